#pragma once

#include <stdexcept>
#include <string>

namespace perclab {

// Invalid family parameters or malformed family names.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Probability or real argument outside the domain of a formula.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Caller supplied inconsistent arguments (empty sets, bad radii, ...).
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A query reaches past the patch radius.
struct OutOfPatchError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// A walk or kernel would leak mass through the patch boundary.
struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Finite-size criterion not applicable to the family (box crossing off the plane).
struct CriterionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Event expression refers to a non-monotone event where a monotone one is required.
struct NonMonotoneEventError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace perclab
