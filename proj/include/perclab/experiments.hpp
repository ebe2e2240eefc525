#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace perclab {

// Flat key/value configuration. Keys of the [experiment] section (or outside any section) are
// stored bare; other sections become "section.key".
class ExperimentConfig {
public:
    ExperimentConfig() = default;
    explicit ExperimentConfig(std::map<std::string, std::string> values, std::string source = {});

    const std::string& experiment() const;
    std::uint64_t seed() const { return get_u64("seed", 0); }
    const std::string& source() const noexcept { return source_; }
    const std::map<std::string, std::string>& values() const noexcept { return values_; }

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::string get_string(const std::string& key, std::optional<std::string> fallback = std::nullopt) const;
    double get_double(const std::string& key, std::optional<double> fallback = std::nullopt) const;
    int get_int(const std::string& key, std::optional<int> fallback = std::nullopt) const;
    std::uint64_t get_u64(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt) const;
    bool get_bool(const std::string& key, std::optional<bool> fallback = std::nullopt) const;
    // Lists separate items with ',' or ';' outside parentheses, so "Slab(3,1,2); Slab(3,1,3)" works.
    std::vector<std::string> get_list(const std::string& key, std::optional<std::vector<std::string>> fallback = std::nullopt) const;
    std::vector<double> get_doubles(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) const;
    std::vector<int> get_ints(const std::string& key, std::optional<std::vector<int>> fallback = std::nullopt) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    // Sorted "key=value" lines; the hash is FNV-1a (64 bit) of this text.
    std::string canonical() const;
    std::string hash() const;

private:
    std::map<std::string, std::string> values_;
    std::string source_;
};

ExperimentConfig parse_config(const std::string& text, const std::string& source = {});
ExperimentConfig load_config(const std::filesystem::path& path);

std::uint64_t fnv1a(const std::string& text);
std::vector<std::string> split_list(const std::string& text);

struct CheckOutcome {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ExperimentResult {
    std::string experiment;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string source;
    std::vector<nlohmann::json> records;
    std::vector<CheckOutcome> checks;
    bool passed() const;
    std::string summary() const;
};

// Collects records for one run. Every record carries the config hash, seed and version.
class Recorder {
public:
    explicit Recorder(const ExperimentConfig& config);
    // Seconds since the previous record (or construction) go into wall_time_s.
    nlohmann::json& record(const std::string& operation, nlohmann::json inputs, nlohmann::json result);
    void check(const std::string& name, bool passed, const std::string& detail = {});
    ExperimentResult finish();
    const ExperimentConfig& config() const noexcept { return config_; }

private:
    const ExperimentConfig& config_;
    ExperimentResult result_;
    double last_ = 0;
};

using ExperimentFn = std::function<void(const ExperimentConfig&, Recorder&)>;

struct ExperimentInfo {
    std::string name;
    std::string description;
};
std::vector<ExperimentInfo> list_experiments();

// Throws ParameterError for unknown experiments or invalid parameters.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Appends JSON-lines records to results.jsonl and their scalar results to results.csv.
void write_results(const std::filesystem::path& dir, const ExperimentResult& result);

// Records with wall_time_s removed, for replay comparison.
std::vector<std::string> replay_signature(const ExperimentResult& result);

struct ReportOutcome {
    std::size_t records = 0;
    std::vector<std::filesystem::path> files;
    bool empty = false;
};
// Reads every *.jsonl file in `dir`, writes summary.txt and one two-column .dat per series.
ReportOutcome write_report(const std::filesystem::path& dir);

}  // namespace perclab
