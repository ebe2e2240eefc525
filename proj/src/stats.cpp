#include "perclab/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>

#include "perclab/errors.hpp"

namespace perclab {

std::string method_name(Method m) { return m == Method::MonteCarlo ? "monte_carlo" : "exact_enumeration"; }

double z_value(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("confidence must lie in (0,1)");
    return boost::math::quantile(boost::math::normal(), 0.5 + confidence / 2.0);
}

McEstimate proportion_estimate(std::uint64_t successes, std::uint64_t trials, std::uint64_t seed, int patch_radius,
                               double confidence) {
    if (trials == 0) throw ArgumentError("an estimate needs at least one replica");
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z = z_value(confidence);
    const double z2 = z * z;
    const double centre = (phat + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z / (1 + z2 / n) * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n));
    McEstimate est;
    est.mean = phat;
    // the Wilson endpoints at 0 and n successes are exactly 0 and 1; rounding would otherwise leave ~1e-17
    est.ci_lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
    est.ci_hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
    est.ci_halfwidth = (est.ci_hi - est.ci_lo) / 2;
    est.replicas = trials;
    est.seed = seed;
    est.patch_radius = patch_radius;
    return est;
}

McEstimate mean_estimate(double sum, double sum_sq, std::uint64_t n, std::uint64_t seed, int patch_radius,
                         double confidence) {
    if (n == 0) throw ArgumentError("an estimate needs at least one replica");
    const double dn = static_cast<double>(n);
    const double mean = sum / dn;
    const double var = n > 1 ? std::max(0.0, (sum_sq - dn * mean * mean) / (dn - 1)) : 0.0;
    McEstimate est;
    est.mean = mean;
    est.ci_halfwidth = z_value(confidence) * std::sqrt(var / dn);
    est.ci_lo = mean - est.ci_halfwidth;
    est.ci_hi = mean + est.ci_halfwidth;
    est.replicas = n;
    est.seed = seed;
    est.patch_radius = patch_radius;
    return est;
}

McEstimate exact_value(double value, int patch_radius) {
    McEstimate est;
    est.mean = est.ci_lo = est.ci_hi = value;
    est.patch_radius = patch_radius;
    est.method = Method::ExactEnumeration;
    return est;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ArgumentError("slope needs at least two paired points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0) throw ArgumentError("slope needs distinct x values");
    return sxy / sxx;
}

double chi_squared_pvalue(double statistic, double dof) {
    if (dof <= 0) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), statistic));
}

double chi_squared_gof(const std::vector<std::uint64_t>& counts, const std::vector<double>& probs,
                       double min_expected) {
    if (counts.size() != probs.size()) throw ArgumentError("counts and probabilities differ in length");
    const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
    // pool small cells in index order
    std::vector<double> obs, expct;
    double po = 0, pe = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        po += static_cast<double>(counts[i]);
        pe += probs[i] * total;
        if (pe >= min_expected) {
            obs.push_back(po);
            expct.push_back(pe);
            po = pe = 0;
        }
    }
    if (pe > 0 || po > 0) {
        if (expct.empty()) {
            obs.push_back(po);
            expct.push_back(pe);
        } else {
            obs.back() += po;
            expct.back() += pe;
        }
    }
    double stat = 0;
    for (std::size_t i = 0; i < obs.size(); ++i)
        if (expct[i] > 0) stat += (obs[i] - expct[i]) * (obs[i] - expct[i]) / expct[i];
        else if (obs[i] > 0) return 0.0;
    return chi_squared_pvalue(stat, static_cast<double>(obs.size()) - 1.0);
}

}  // namespace perclab
