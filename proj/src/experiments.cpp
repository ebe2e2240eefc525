#include "perclab/experiments.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <queue>
#include <sstream>

#include "perclab/errors.hpp"
#include "perclab/estimators.hpp"
#include "perclab/family.hpp"
#include "perclab/geometry.hpp"
#include "perclab/ghostfields.hpp"
#include "perclab/multiscale.hpp"
#include "perclab/patch.hpp"
#include "perclab/percolation.hpp"
#include "perclab/rng.hpp"
#include "perclab/stats.hpp"
#include "perclab/tubes.hpp"
#include "perclab/walks.hpp"

#ifndef PERCLAB_VERSION
#define PERCLAB_VERSION "unknown"
#endif

namespace perclab {

using nlohmann::json;

// ---------------------------------------------------------------- configuration

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : text) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if ((c == ',' || c == ';') && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    out.erase(std::remove(out.begin(), out.end(), std::string{}), out.end());
    return out;
}

ExperimentConfig::ExperimentConfig(std::map<std::string, std::string> values, std::string source)
    : values_(std::move(values)), source_(std::move(source)) {}

const std::string& ExperimentConfig::experiment() const {
    const auto it = values_.find("name");
    if (it == values_.end()) throw ParameterError("config has no experiment name (key 'name' in [experiment])");
    return it->second;
}

std::string ExperimentConfig::get_string(const std::string& key, std::optional<std::string> fallback) const {
    const auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    if (fallback) return *fallback;
    throw ParameterError("missing config key: " + key);
}

double ExperimentConfig::get_double(const std::string& key, std::optional<double> fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        if (fallback) return *fallback;
        throw ParameterError("missing config key: " + key);
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ParameterError("config key " + key + " is not a number: " + it->second);
    }
}

int ExperimentConfig::get_int(const std::string& key, std::optional<int> fallback) const {
    const double v = get_double(key, fallback ? std::optional<double>(*fallback) : std::nullopt);
    if (v != std::floor(v) || std::abs(v) > 2e9) throw ParameterError("config key " + key + " must be an integer");
    return static_cast<int>(v);
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key, std::optional<std::uint64_t> fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        if (fallback) return *fallback;
        throw ParameterError("missing config key: " + key);
    }
    const std::string& s = it->second;
    // accept plain integers and scientific forms such as 1e6
    if (!s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
        return std::stoull(s);
    const double v = get_double(key);
    if (v < 0 || v != std::floor(v) || v > 1.8e19) throw ParameterError("config key " + key + " must be a nonnegative integer");
    return static_cast<std::uint64_t>(v);
}

bool ExperimentConfig::get_bool(const std::string& key, std::optional<bool> fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        if (fallback) return *fallback;
        throw ParameterError("missing config key: " + key);
    }
    const std::string& s = it->second;
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ParameterError("config key " + key + " is not a boolean: " + s);
}

std::vector<std::string> ExperimentConfig::get_list(const std::string& key,
                                                    std::optional<std::vector<std::string>> fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        if (fallback) return *fallback;
        throw ParameterError("missing config key: " + key);
    }
    return split_list(it->second);
}

std::vector<double> ExperimentConfig::get_doubles(const std::string& key,
                                                  std::optional<std::vector<double>> fallback) const {
    if (!has(key)) {
        if (fallback) return *fallback;
        throw ParameterError("missing config key: " + key);
    }
    std::vector<double> out;
    for (const auto& item : get_list(key)) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ParameterError("config key " + key + " has a non-numeric item: " + item);
        }
    }
    return out;
}

std::vector<int> ExperimentConfig::get_ints(const std::string& key, std::optional<std::vector<int>> fallback) const {
    if (!has(key)) {
        if (fallback) return *fallback;
        throw ParameterError("missing config key: " + key);
    }
    std::vector<int> out;
    for (double v : get_doubles(key)) {
        if (v != std::floor(v)) throw ParameterError("config key " + key + " must list integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

std::string ExperimentConfig::canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
}

std::string ExperimentConfig::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical())));
    return buf;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ParseError("config " + source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    std::map<std::string, std::string> values;
    for (const auto& [section, node] : tree) {
        if (node.empty()) {
            values[section] = trim(node.data());
            continue;
        }
        const std::string prefix = section == "experiment" ? "" : section + ".";
        for (const auto& [key, leaf] : node) {
            if (!leaf.empty()) throw ParseError("config " + source + ": nested sections are not supported");
            values[prefix + key] = trim(leaf.data());
        }
    }
    ExperimentConfig cfg(std::move(values), source);
    cfg.experiment();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

// ---------------------------------------------------------------- results

bool ExperimentResult::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckOutcome& c) { return c.passed; });
}

std::string ExperimentResult::summary() const {
    std::ostringstream out;
    for (const auto& c : checks) out << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": ") << c.detail << '\n';
    return out.str();
}

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

json num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

json mc_json(const McEstimate& e) {
    return json{{"mean", num(e.mean)},         {"ci_lo", num(e.ci_lo)},
                {"ci_hi", num(e.ci_hi)},       {"ci_halfwidth", num(e.ci_halfwidth)},
                {"replicas", e.replicas},      {"seed", e.seed},
                {"patch_radius", e.patch_radius}, {"method", method_name(e.method)}};
}

json series(const std::vector<double>& x, const std::vector<double>& y, const std::string& xlabel,
            const std::string& ylabel) {
    json xs = json::array(), ys = json::array();
    for (double v : x) xs.push_back(num(v));
    for (double v : y) ys.push_back(num(v));
    return json{{"x", xs}, {"y", ys}, {"xlabel", xlabel}, {"ylabel", ylabel}};
}

std::string fmt(double x, int prec = 6) {
    std::ostringstream o;
    o << std::setprecision(prec) << x;
    return o.str();
}

}  // namespace

Recorder::Recorder(const ExperimentConfig& config) : config_(config) {
    result_.experiment = config.experiment();
    result_.config_hash = config.hash();
    result_.seed = config.seed();
    result_.source = config.source();
    last_ = now_seconds();
}

json& Recorder::record(const std::string& operation, json inputs, json result) {
    const double t = now_seconds();
    json rec{{"config_hash", result_.config_hash},
             {"experiment", result_.experiment},
             {"operation", operation},
             {"seed", result_.seed},
             {"inputs", std::move(inputs)},
             {"result", std::move(result)},
             {"wall_time_s", config_.get_bool("record_timing", true) ? t - last_ : 0.0},
             {"version", PERCLAB_VERSION}};
    last_ = t;
    result_.records.push_back(std::move(rec));
    return result_.records.back();
}

void Recorder::check(const std::string& name, bool passed, const std::string& detail) {
    result_.checks.push_back({name, passed, detail});
    json rec{{"config_hash", result_.config_hash},
             {"experiment", result_.experiment},
             {"operation", "check"},
             {"seed", result_.seed},
             {"inputs", json{{"name", name}}},
             {"result", json{{"passed", passed}, {"detail", detail}}},
             {"wall_time_s", 0.0},
             {"version", PERCLAB_VERSION}};
    result_.records.push_back(std::move(rec));
}

ExperimentResult Recorder::finish() { return std::move(result_); }

std::vector<std::string> replay_signature(const ExperimentResult& result) {
    std::vector<std::string> out;
    for (json rec : result.records) {
        rec.erase("wall_time_s");
        out.push_back(rec.dump());
    }
    return out;
}

// ---------------------------------------------------------------- experiments

namespace {

std::vector<std::string> families_of(const ExperimentConfig& c) {
    if (c.has("families")) return c.get_list("families");
    return {c.get_string("family", std::string("HyperCubic(2)"))};
}

template <class T>
T broadcast(const std::vector<T>& v, std::size_t i, const std::string& key) {
    if (v.empty()) throw ParameterError("config key " + key + " is empty");
    if (v.size() == 1) return v[0];
    if (i >= v.size()) throw ParameterError("config key " + key + " has fewer items than families");
    return v[i];
}

PcOptions pc_options(const ExperimentConfig& c) {
    PcOptions o;
    if (c.has("threshold")) o.threshold = c.get_double("threshold");
    o.min_replicas = c.get_u64("min_replicas", o.min_replicas);
    o.replica_cap = c.get_u64("replica_cap", o.replica_cap);
    o.ci_target = c.get_double("ci_target", o.ci_target);
    return o;
}

json pc_json(const PcEstimate& e) {
    json probes = json::array();
    for (const auto& pr : e.probes)
        probes.push_back(json{{"p", pr.p}, {"crossing", mc_json(pr.crossing)}, {"verdict", pr.verdict}});
    return json{{"p_hat", e.p_hat},   {"p_hat_lo", e.p_hat_lo}, {"p_hat_hi", e.p_hat_hi}, {"p_lo", e.p_lo},
                {"p_hi", e.p_hi},     {"resolved", e.resolved}, {"replicas", e.replicas}, {"threshold", e.threshold},
                {"confidence", e.confidence}, {"probes", probes}};
}

PcEstimate run_pc(const ExperimentConfig& c, Recorder& rec, const std::string& fam, int L, const std::string& crit,
                  std::uint64_t seed) {
    const GraphFamily family = GraphFamily::parse(fam);
    const double tol = c.get_double("tolerance", 0.01);
    const double conf = c.get_double("confidence", 0.95);
    const PcEstimate e = est_pc(family, L, parse_criterion(crit), tol, conf, seed, pc_options(c));
    rec.record("est_pc", json{{"family", fam}, {"L", L}, {"criterion", crit}, {"tolerance", tol}, {"confidence", conf}, {"seed", seed}},
               pc_json(e));
    return e;
}

// pc-estimate: p_c by bisection on crossing probabilities; optional reference values and Kesten trend.
void exp_pc_estimate(const ExperimentConfig& c, Recorder& rec) {
    const auto fams = families_of(c);
    const auto Ls = c.get_ints("L", std::vector<int>{128});
    const auto crits = c.get_list("criterion", std::vector<std::string>{"box_crossing"});
    const auto expected = c.get_doubles("expected", std::vector<double>{});
    if (!expected.empty() && expected.size() != fams.size()) throw ParameterError("expected must list one value per family");
    const double tol = c.get_double("tolerance", 0.01);
    std::vector<PcEstimate> ests;
    for (std::size_t i = 0; i < fams.size(); ++i) {
        ests.push_back(run_pc(c, rec, fams[i], broadcast(Ls, i, "L"), broadcast(crits, i, "criterion"), derive_seed(c.seed(), i)));
        if (!expected.empty()) {
            const double err = std::abs(ests.back().p_hat - expected[i]);
            rec.check("p_hat(" + fams[i] + ") within " + fmt(tol) + " of " + fmt(expected[i], 7), err <= tol,
                      "p_hat = " + fmt(ests.back().p_hat, 6) + " (seed " + std::to_string(derive_seed(c.seed(), i)) + ")");
        }
    }
    if (c.get_bool("kesten_check", false)) {
        std::vector<double> dims, prods, lo, hi;
        for (std::size_t i = 0; i < fams.size(); ++i) {
            const GraphFamily f = GraphFamily::parse(fams[i]);
            if (f.kind() != FamilyKind::HyperCubic) throw ParameterError("kesten_check needs HyperCubic families");
            const double d = f.degree() / 2.0;
            dims.push_back(d);
            prods.push_back(ests[i].p_hat * (2 * d - 1));
            lo.push_back(std::min(ests[i].p_hat_lo, ests[i].p_lo) * (2 * d - 1));
            hi.push_back(std::max(ests[i].p_hat_hi, ests[i].p_hi) * (2 * d - 1));
        }
        bool ok = true;
        std::string detail;
        for (std::size_t i = 0; i + 1 < prods.size(); ++i) {
            ok = ok && hi[i + 1] < lo[i];
            detail += "d=" + fmt(dims[i]) + ": " + fmt(prods[i], 4) + " [" + fmt(lo[i], 4) + ", " + fmt(hi[i], 4) + "]; ";
        }
        if (!prods.empty())
            detail += "d=" + fmt(dims.back()) + ": " + fmt(prods.back(), 4) + " [" + fmt(lo.back(), 4) + ", " + fmt(hi.back(), 4) + "]";
        auto& r = rec.record("kesten_trend", json{{"families", fams}}, json{{"products", prods}, {"lo", lo}, {"hi", hi}});
        r["result"]["series"] = series(dims, prods, "d", "p_hat*(2d-1)");
        rec.check("p_hat(Z^d)*(2d-1) strictly decreasing with separated intervals", ok, detail);
    }
}

// sphere-connection decay P(o <-> S_r) against r for each family
void sphere_decay(const ExperimentConfig& c, Recorder& rec) {
    const auto fams = families_of(c);
    const double p = c.get_double("p");
    const auto radii = c.get_ints("radii");
    const std::uint64_t replicas = c.get_u64("replicas", 100000);
    const int radius = c.get_int("radius", *std::max_element(radii.begin(), radii.end()));
    const bool has_slope_max = c.has("slope_max");
    const double slope_max = has_slope_max ? c.get_double("slope_max") : 0.0;
    std::vector<double> rates;
    for (std::size_t i = 0; i < fams.size(); ++i) {
        const GraphFamily f = GraphFamily::parse(fams[i]);
        const std::uint64_t seed = derive_seed(c.seed(), i);
        const auto est = est_sphere_connection_multi(f, radius, p, radii, replicas, seed);
        std::vector<double> xs, ys;
        json per = json::array();
        for (std::size_t j = 0; j < radii.size(); ++j) {
            xs.push_back(radii[j]);
            ys.push_back(est[j].mean > 0 ? std::log(est[j].mean) : -std::numeric_limits<double>::infinity());
            per.push_back(mc_json(est[j]));
        }
        const bool finite = std::all_of(ys.begin(), ys.end(), [](double y) { return std::isfinite(y); });
        const double slope = finite ? ls_slope(xs, ys) : -std::numeric_limits<double>::infinity();
        rates.push_back(-slope);
        auto& r = rec.record("sphere_connection_decay",
                             json{{"family", fams[i]}, {"p", p}, {"radii", radii}, {"radius", radius}, {"replicas", replicas}, {"seed", seed}},
                             json{{"estimates", per}, {"slope", num(slope)}});
        r["result"]["series"] = series(xs, ys, "r", "log P(o<->S_r)");
        if (has_slope_max)
            rec.check("slope of log P(o<->S_r) vs r for " + fams[i] + " <= " + fmt(slope_max), slope <= slope_max,
                      "slope = " + fmt(slope, 6) + " (seed " + std::to_string(seed) + ")");
    }
    if (fams.size() > 1) rec.record("decay_rates", json{{"families", fams}}, json{{"rates", rates}});
}

// locality-sweep: p_c along a family sequence against a reference, or sphere-connection decay rates.
void exp_locality_sweep(const ExperimentConfig& c, Recorder& rec) {
    const std::string mode = c.get_string("mode", std::string("pc"));
    if (mode == "sphere") return sphere_decay(c, rec);
    if (mode != "pc") throw ParameterError("locality-sweep mode must be pc or sphere");
    const auto fams = families_of(c);
    const std::string ref = c.get_string("reference");
    const int L = c.get_int("L", 32);
    const std::string crit = c.get_string("criterion", std::string("root_to_sphere"));
    std::vector<PcEstimate> ests;
    for (std::size_t i = 0; i < fams.size(); ++i) ests.push_back(run_pc(c, rec, fams[i], L, crit, derive_seed(c.seed(), i)));
    const PcEstimate refe = run_pc(c, rec, ref, L, crit, derive_seed(c.seed(), 1000));
    auto lo = [](const PcEstimate& e) { return std::min(e.p_hat_lo, e.p_lo); };
    auto hi = [](const PcEstimate& e) { return std::max(e.p_hat_hi, e.p_hi); };

    std::vector<double> idx, vals;
    bool monotone = true, above = true;
    std::string detail;
    for (std::size_t i = 0; i < ests.size(); ++i) {
        idx.push_back(static_cast<double>(i + 1));
        vals.push_back(ests[i].p_hat);
        detail += fmt(ests[i].p_hat, 4) + " ";
        if (i + 1 < ests.size()) monotone = monotone && lo(ests[i + 1]) <= hi(ests[i]);
        above = above && hi(ests[i]) >= lo(refe);
    }
    const bool closer = ests.size() < 2 || (ests.back().p_hat - refe.p_hat) < (ests.front().p_hat - refe.p_hat);
    auto& r = rec.record("locality_sweep", json{{"families", fams}, {"reference", ref}, {"L", L}, {"criterion", crit}},
                         json{{"p_hat", vals}, {"reference_p_hat", refe.p_hat}});
    r["result"]["series"] = series(idx, vals, "index", "p_hat");
    detail += "vs reference " + fmt(refe.p_hat, 4);
    rec.check("p_hat nonincreasing along the sequence within CI", monotone, detail);
    rec.check("p_hat stays at or above the reference within CI", above, detail);
    rec.check("gap to the reference shrinks", closer, detail);
}

// two-ghost-scaling: P(S_{e,n}) against n and, optionally, the coupled ghost version against h.
void exp_two_ghost(const ExperimentConfig& c, Recorder& rec) {
    const GraphFamily f = GraphFamily::parse(c.get_string("family", std::string("HyperCubic(2)")));
    const double p = c.get_double("p", 0.5);
    const int radius = c.get_int("radius", 64);
    const std::uint64_t replicas = c.get_u64("replicas", 1000000);
    std::vector<std::uint64_t> ns;
    for (int n : c.get_ints("ns", std::vector<int>{4, 16, 64})) ns.push_back(static_cast<std::uint64_t>(n));
    const std::uint64_t seed = derive_seed(c.seed(), 0);
    const auto est = est_two_ghost_multi(f, radius, p, ns, replicas, seed);
    std::vector<double> xs, ys;
    json per = json::array();
    for (std::size_t i = 0; i < ns.size(); ++i) {
        xs.push_back(std::log(static_cast<double>(ns[i])));
        ys.push_back(est[i].mean > 0 ? std::log(est[i].mean) : -std::numeric_limits<double>::infinity());
        json e = mc_json(est[i]);
        e["n"] = ns[i];
        e["sqrt_scale"] = std::sqrt((1 - p) / (p * static_cast<double>(ns[i])));
        per.push_back(e);
    }
    const bool finite = std::all_of(ys.begin(), ys.end(), [](double y) { return std::isfinite(y); });
    const double slope = finite ? ls_slope(xs, ys) : -std::numeric_limits<double>::infinity();
    auto& r = rec.record("two_ghost_scaling",
                         json{{"family", f.name()}, {"p", p}, {"radius", radius}, {"replicas", replicas}, {"seed", seed}},
                         json{{"estimates", per}, {"slope", num(slope)}});
    r["result"]["series"] = series(xs, ys, "log n", "log P(S_e,n)");
    if (c.has("slope_max")) {
        const double smax = c.get_double("slope_max");
        rec.check("slope of log P(S_e,n) vs log n <= " + fmt(smax), slope <= smax,
                  "slope = " + fmt(slope, 6) + " (seed " + std::to_string(seed) + ")");
    }
    if (c.has("hs")) {
        const auto hs = c.get_doubles("hs");
        const std::uint64_t hseed = derive_seed(c.seed(), 1);
        const auto sweep = two_ghost_coupled_sweep(f, radius, p, hs, c.get_u64("ghost_replicas", replicas), hseed);
        json rows = json::array();
        std::vector<double> hx, hy;
        for (const auto& s : sweep) {
            rows.push_back(json{{"h", s.h}, {"lhs", mc_json(s.lhs)}, {"rhs", num(s.rhs)}, {"fitted_C", num(s.fitted_C)}});
            hx.push_back(std::log(s.h));
            hy.push_back(s.lhs.mean > 0 ? std::log(s.lhs.mean) : -std::numeric_limits<double>::infinity());
        }
        const double hslope = sweep.empty() || !sweep.front().slope ? std::nan("") : *sweep.front().slope;
        auto& rr = rec.record("two_ghost_coupled_sweep", json{{"family", f.name()}, {"p", p}, {"hs", hs}, {"seed", hseed}},
                              json{{"rows", rows}, {"slope", num(hslope)}});
        rr["result"]["series"] = series(hx, hy, "log h", "log P");
    }
}

// piv-decay: P(Piv[m, n]) against n, with the predicted ceiling shape for comparison.
void exp_piv_decay(const ExperimentConfig& c, Recorder& rec) {
    const GraphFamily f = GraphFamily::parse(c.get_string("family", std::string("HyperCubic(2)")));
    const double p = c.get_double("p", 0.5);
    const int inner = c.get_int("inner", 1);
    const auto ns = c.get_ints("ns", std::vector<int>{4, 8, 16, 32});
    const std::uint64_t replicas = c.get_u64("replicas", 20000);
    std::vector<double> xs, ys;
    json per = json::array();
    for (int n : ns) {
        const std::uint64_t seed = derive_seed(c.seed(), static_cast<std::uint64_t>(n));
        const int inner_arr[1] = {inner};
        const auto est = est_piv_multi(f, p, inner_arr, n, replicas, seed);
        const double ceiling = std::sqrt(std::log(static_cast<double>(growth_of(f, n))) / n);
        json e = mc_json(est[0]);
        e["n"] = n;
        e["ceiling_shape"] = ceiling;
        per.push_back(e);
        xs.push_back(std::log(static_cast<double>(n)));
        ys.push_back(est[0].mean > 0 ? std::log(est[0].mean) : -std::numeric_limits<double>::infinity());
    }
    const bool finite = std::all_of(ys.begin(), ys.end(), [](double y) { return std::isfinite(y); });
    auto& r = rec.record("piv_decay", json{{"family", f.name()}, {"p", p}, {"inner", inner}, {"replicas", replicas}},
                         json{{"estimates", per}, {"slope", num(finite ? ls_slope(xs, ys) : std::nan(""))}});
    r["result"]["series"] = series(xs, ys, "log n", "log P(Piv)");
}

void exp_cerf(const ExperimentConfig& c, Recorder& rec) {
    const GraphFamily f = GraphFamily::parse(c.get_string("family", std::string("HyperCubic(2)")));
    const int n = c.get_int("n", 16);
    const int radius = c.get_int("radius", n);
    const double p = c.get_double("p", 0.5);
    const int r = c.get_int("r", 2), m = c.get_int("m", 2 * r + 1);
    const std::uint64_t replicas = c.get_u64("replicas", 20000);
    const std::uint64_t seed = derive_seed(c.seed(), 0);
    const CerfResult res = cerf_check(f, radius, p, r, m, n, replicas, seed);
    rec.record("cerf_check", json{{"family", f.name()}, {"radius", radius}, {"p", p}, {"r", r}, {"m", m}, {"n", n}, {"seed", seed}},
               json{{"lhs", mc_json(res.lhs)}, {"piv_half", mc_json(res.piv_half)}, {"min_two_point", mc_json(res.min_two_point)},
                    {"rhs", num(res.rhs)}, {"holds", res.holds}});
    rec.check("two-arm bound for " + f.name(), res.holds,
              "lhs = " + fmt(res.lhs.mean) + ", rhs = " + fmt(res.rhs) + " (seed " + std::to_string(seed) + ")");
}

json walk_report_json(const WalkCheckReport& w) {
    json margins = json::array();
    for (const auto& m : w.margins) margins.push_back(json{{"t", m.t}, {"u", m.u}, {"v", m.v}, {"n", m.n}, {"value", num(m.value)}, {"bound", num(m.bound)}});
    json out{{"name", w.name}, {"checks", w.checks}, {"violations", w.violations}, {"max_ratio", num(w.max_ratio)},
             {"worst", json{{"t", w.worst.t}, {"u", w.worst.u}, {"v", w.worst.v}, {"n", w.worst.n}, {"value", num(w.worst.value)}, {"bound", num(w.worst.bound)}}},
             {"margins", margins}};
    if (w.constant) out["constant"] = num(*w.constant);
    return out;
}

// walk-checks: exact-kernel verification of the heat kernel inequalities.
void exp_walk_checks(const ExperimentConfig& c, Recorder& rec) {
    const auto fams = families_of(c);
    const int t_max = c.get_int("t_max", 15);
    const int radius = c.get_int("radius", t_max + 1);
    const auto kernel_t = c.get_ints("kernel_t", std::vector<int>{4, 9, 16});
    for (const auto& name : fams) {
        const GraphFamily f = GraphFamily::parse(name);
        const PatchPtr patch = cached_patch(f, radius);
        for (const auto& w : {vc_check(*patch, t_max), ball_escape_check(*patch, t_max), cool_inequality_check(*patch, t_max)}) {
            auto& r = rec.record(w.name, json{{"family", name}, {"radius", radius}, {"t_max", t_max}}, walk_report_json(w));
            std::vector<double> xs, ys;
            for (const auto& m : w.margins) {
                xs.push_back(m.t);
                ys.push_back(m.bound > 0 ? m.value / m.bound : 0.0);
            }
            r["result"]["series"] = series(xs, ys, "t", "value/bound");
            rec.check(w.name + " on " + name, w.passed(),
                      std::to_string(w.violations) + " violations in " + std::to_string(w.checks) + " checks");
        }
        std::vector<int> ts;
        for (int t : kernel_t)
            if (t <= max_exact_time(*patch, patch->root())) ts.push_back(t);
        if (!ts.empty()) {
            json rows = json::array();
            for (const auto& k : kernel_decay_constant(*patch, ts))
                rows.push_back(json{{"t", k.t}, {"max_kernel", num(k.max_kernel)}, {"scale", num(k.scale)}, {"radius_allowed", k.radius_allowed},
                                    {"c", num(k.c)}, {"c_uncapped", num(k.c_uncapped)}, {"vacuous", k.vacuous}});
            rec.record("kernel_decay_constant", json{{"family", name}, {"radius", radius}, {"t_set", ts}}, json{{"rows", rows}});
        }
    }
}

// tubes-demo: radial tube families from coupled walks, verified for disjointness and lengths.
void exp_tubes(const ExperimentConfig& c, Recorder& rec) {
    const GraphFamily f = GraphFamily::parse(c.get_string("family", std::string("HyperCubic(5)")));
    const int n = c.get_int("n", 2), k = c.get_int("k", 3), r = c.get_int("r", 1);
    const int radius = c.get_int("radius", 4 * n + 2 * r + 4);
    const int horizon = c.get_int("horizon", 60), attempts = c.get_int("attempts", 5);
    const std::uint64_t seed = derive_seed(c.seed(), 0);
    const TubeFamily tf = build_radial_tubes(cached_patch(f, radius), n, k, r, horizon, seed, attempts);
    const bool ok = !tf.construction_failed() && verify_plentiful(tf, tf.k_achieved(), r, tf.ell_achieved());
    json lengths = json::array();
    for (const auto& t : tf.tubes) lengths.push_back(t.length());
    rec.record("build_radial_tubes",
               json{{"family", f.name()}, {"radius", radius}, {"n", n}, {"k", k}, {"r", r}, {"horizon", horizon}, {"attempts", attempts}, {"seed", seed}},
               json{{"k_achieved", tf.k_achieved()}, {"ell_achieved", tf.ell_achieved()}, {"construction_failed", tf.construction_failed()},
                    {"attempts_used", tf.attempts_used}, {"lengths", lengths}, {"verified", ok}});
    rec.check("achieved tube family verifies", ok,
              "k' = " + std::to_string(tf.k_achieved()) + ", ell = " + std::to_string(tf.ell_achieved()));
}

// ghost-influence: per-edge pivotal influences of an event string.
void exp_ghost_influence(const ExperimentConfig& c, Recorder& rec) {
    const GraphFamily f = GraphFamily::parse(c.get_string("family", std::string("HyperCubic(2)")));
    const int radius = c.get_int("radius", 4);
    const double p = c.get_double("p", 0.5), h = c.get_double("h", 0.1);
    const std::string event = c.get_string("event", std::string("ghost(root, sphere:4)"));
    const std::uint64_t replicas = c.get_u64("replicas", 20000);
    const std::uint64_t seed = derive_seed(c.seed(), 0);
    const InfluenceReport r = est_pivotal_influence(f, radius, p, h, event, replicas, seed);
    std::vector<double> xs, ys;
    for (std::size_t e = 0; e < r.per_edge.size(); ++e) {
        xs.push_back(static_cast<double>(e));
        ys.push_back(r.per_edge[e].mean);
    }
    auto& out = rec.record("est_pivotal_influence",
                           json{{"family", f.name()}, {"radius", radius}, {"p", p}, {"h", h}, {"event", event}, {"replicas", replicas}, {"seed", seed}},
                           json{{"max_influence", r.max_influence}, {"argmax", r.argmax}, {"russo_derivative", mc_json(r.russo_derivative)},
                                {"event", mc_json(r.event)}});
    out["result"]["series"] = series(xs, ys, "edge", "P(pivotal)");
}

// snowball-demo: connection of two balls at p2 against the product of their self-connections at p1.
void exp_snowball(const ExperimentConfig& c, Recorder& rec) {
    const GraphFamily f = GraphFamily::parse(c.get_string("family", std::string("HyperCubic(2)")));
    const int span = c.get_int("span", 6), count = c.get_int("count", 3), b = c.get_int("b", 1);
    const int radius = c.get_int("radius", span + b + 2);
    const double p1 = c.get_double("p1", 0.55), p2 = c.get_double("p2", 0.6), h = c.get_double("h", 0.1);
    const std::uint64_t replicas = c.get_u64("replicas", 20000);
    const PatchPtr patch = cached_patch(f, radius);
    const Path g = geodesic(*patch, patch->root(), patch->sphere(span).front());
    std::vector<VertexId> centers;
    for (int i = 0; i < count; ++i) centers.push_back(g[static_cast<std::size_t>(i) * (g.size() - 1) / std::max(count - 1, 1)]);
    const std::uint64_t seed = derive_seed(c.seed(), 0);
    const SnowballResult s = snowball_chain(f, radius, p1, p2, centers, b, h, replicas, seed);
    rec.record("snowball_chain",
               json{{"family", f.name()}, {"radius", radius}, {"p1", p1}, {"p2", p2}, {"h", h}, {"b", b}, {"centers", centers}, {"seed", seed}},
               json{{"lhs", mc_json(s.lhs)}, {"first", mc_json(s.first)}, {"last", mc_json(s.last)}, {"rhs", num(s.rhs)}, {"ratio", num(s.ratio)}});
}

// multiscale-demo: schedule in triple-log coordinates and the desk-scale statements.
void exp_multiscale(const ExperimentConfig& c, Recorder& rec) {
    const Schedule s = make_schedule(c.get_double("n0", 16), c.get_double("p0", 0.5), c.get_double("K", 1.0),
                                     c.get_double("burnin", 0.0), c.get_int("i_max", 6));
    rec.record("make_schedule", json{{"n0", s.n0}, {"p0", s.p0}, {"K", s.K}, {"burnin", num(s.burnin_value)}},
               json::parse(schedule_to_json(s)));
    const GraphFamily f = GraphFamily::parse(c.get_string("family", std::string("HyperCubic(2)")));
    const int n = c.get_int("n", 8);
    const int radius = c.get_int("radius", n);
    const std::uint64_t replicas = c.get_u64("replicas", 4000);
    for (double p : c.get_doubles("ps", std::vector<double>{0.5, 0.55, 0.6})) {
        const std::uint64_t seed = derive_seed(c.seed(), static_cast<std::uint64_t>(std::llround(p * 1e6)));
        const FullSpaceVerdict v = eval_full_space(f, radius, n, p, replicas, seed);
        rec.record("eval_full_space", json{{"family", f.name()}, {"radius", radius}, {"n", n}, {"p", p}, {"seed", seed}},
                   json{{"min", mc_json(v.min_estimate)}, {"threshold", v.threshold}, {"margin", v.margin}, {"holds", v.holds},
                        {"holds_lower", v.holds_lower}, {"holds_upper", v.holds_upper}, {"sampled", v.sampled}, {"pairs", v.pairs_tested}});
        const double n_thr = c.get_double("zone_n", std::pow(static_cast<double>(n), 3));
        const int tz = two_point_zone(f, radius, p, n, n_thr, replicas, seed);
        rec.record("two_point_zone", json{{"family", f.name()}, {"m", n}, {"p", p}, {"n_for_threshold", n_thr}, {"seed", seed}},
                   json{{"zone", tz}});
    }
    if (c.has("corridor_n")) {
        const int cn = c.get_int("corridor_n");
        const double p = c.get_double("corridor_p", 0.6);
        const std::uint64_t seed = derive_seed(c.seed(), 99);
        const CorridorReport cr = eval_corridor(f, c.get_int("corridor_n_prev", 1), cn, p, c.get_double("D", 20),
                                                c.get_int("ell_cap", 8), c.get_u64("corridor_replicas", 2000), seed);
        json rows = json::array();
        for (const auto& v : cr.verdicts)
            rows.push_back(json{{"m", v.m}, {"estimate", mc_json(v.corridor.estimate)}, {"threshold", v.threshold}, {"holds", v.holds}, {"at_cap", v.at_cap}});
        rec.record("eval_corridor", json{{"family", f.name()}, {"n", cn}, {"p", p}, {"seed", seed}},
                   json{{"verdicts", rows}, {"vacuous", cr.vacuous}, {"holds", cr.holds()}});
    }
}

void orange_part(const ExperimentConfig& c, Recorder& rec) {
    const GraphFamily f = GraphFamily::parse(c.get_string("family", std::string("HyperCubic(2)")));
    const int m = c.get_int("m", 64);
    const int radius = c.get_int("radius", m / 8);
    const double p_start = c.get_double("p_start", 0.55), p_end = c.get_double("p_end", 0.65), D = c.get_double("D", 1.0);
    const std::uint64_t first = c.get_u64("seed_base", 0), count = c.get_u64("seed_count", 100);
    std::uint64_t merged = 0;
    bool monotone = true;
    std::vector<double> final_sizes, seeds;
    for (std::uint64_t s = first; s < first + count; ++s) {
        const OrangePeelTrace t = orange_peel_trace(f, radius, m, p_start, p_end, D, s);
        const auto sz = t.sizes();
        for (std::size_t i = 1; i < sz.size(); ++i) monotone = monotone && sz[i] <= sz[i - 1];
        if (sz.back() <= 1) ++merged;
        seeds.push_back(static_cast<double>(s));
        final_sizes.push_back(static_cast<double>(sz.back()));
        if (s == first) {
            json rows = json::array();
            for (const auto& st : t.steps) rows.push_back(json{{"i", st.i}, {"r", st.r}, {"q", st.q}, {"clusters", st.clusters}});
            rec.record("orange_peel_trace", json{{"family", f.name()}, {"m", m}, {"p_start", p_start}, {"p_end", p_end}, {"D", D}, {"seed", s}},
                       json{{"steps", rows}, {"k", t.k}, {"eps", t.eps}, {"n_eff", t.n_eff}, {"truncated", t.truncated}});
        }
    }
    const double frac = static_cast<double>(merged) / static_cast<double>(count);
    auto& r = rec.record("orange_peel_frequency",
                         json{{"family", f.name()}, {"m", m}, {"p_start", p_start}, {"p_end", p_end}, {"D", D}, {"seed_base", first}, {"seed_count", count}},
                         json{{"fraction_merged", frac}, {"merged", merged}});
    r["result"]["series"] = series(seeds, final_sizes, "seed", "|C_k|");
    rec.check("orange-peel traces nonincreasing", monotone);
    const double min_fraction = c.get_double("min_fraction", 0.9);
    rec.check("|C_k| <= 1 in at least " + fmt(min_fraction) + " of seeds", frac >= min_fraction,
              "fraction = " + fmt(frac) + " over seeds " + std::to_string(first) + ".." + std::to_string(first + count - 1));
}

void exp_orange_peel(const ExperimentConfig& c, Recorder& rec) { orange_part(c, rec); }

std::vector<VertexId> spread_on_sphere(const GraphPatch& g, int r, int count) {
    const auto s = g.sphere(r);
    if (static_cast<int>(s.size()) < count) throw ParameterError("sphere too small for the requested vertex count");
    std::vector<VertexId> out;
    for (int i = 0; i < count; ++i) out.push_back(s[static_cast<std::size_t>(i) * s.size() / count]);
    return out;
}

// sprinkling-bound: the Hamming sprinkling bound on a Z^2 instance plus the orange-peel regression.
void exp_sprinkling_bound(const ExperimentConfig& c, Recorder& rec) {
    const GraphFamily f = GraphFamily::parse(c.get_string("hamming.family", std::string("HyperCubic(2)")));
    const int radius = c.get_int("hamming.radius", 16);
    const int a_radius = c.get_int("hamming.a_radius", 6), a_count = c.get_int("hamming.a_count", 6);
    const int b_radius = c.get_int("hamming.b_radius", 10);
    const double p = c.get_double("hamming.p", 0.55), q = c.get_double("hamming.q", 0.6);
    const std::uint64_t replicas = c.get_u64("hamming.replicas", 20000);
    const PatchPtr patch = cached_patch(f, radius);
    const auto A = spread_on_sphere(*patch, a_radius, a_count);
    const auto B = patch->sphere(b_radius);
    const std::uint64_t seed = derive_seed(c.seed(), 0);
    const HammingCheck h = hamming_bound_check(f, radius, p, q, A, B, replicas, seed);
    rec.record("hamming_bound_check",
               json{{"family", f.name()}, {"radius", radius}, {"p", p}, {"q", q}, {"A", A}, {"b_radius", b_radius}, {"replicas", replicas}, {"seed", seed}},
               json{{"lhs", mc_json(h.lhs)}, {"min_to_b", mc_json(h.min_to_b)}, {"max_pair", mc_json(h.max_pair)}, {"theta", h.theta},
                    {"rhs", h.rhs}, {"hypothesis_met", h.hypothesis_met}, {"holds", h.holds}});
    rec.check("P_q(A<->B) >= 1 - exp(-delta theta |A|) within CI", h.holds,
              "lhs = " + fmt(h.lhs.mean) + ", rhs = " + fmt(h.rhs) + ", hypothesis " + (h.hypothesis_met ? "met" : "unmet") +
                  " (seed " + std::to_string(seed) + ")");
    orange_part(c, rec);
}

// ---------------------------------------------------------------- deterministic geometry

void exp_geometry(const ExperimentConfig& c, Recorder& rec) {
    const auto fams = families_of(c);
    const int r_max = c.get_int("r_max", 2);
    const int escape_radius = c.get_int("escape_radius", 4 * r_max + 4);
    const std::uint64_t paths = c.get_u64("paths", 10000);
    const int length = c.get_int("path_length", 10);
    const auto thick = c.get_ints("thickness", std::vector<int>{1, 2});
    const int t_max = *std::max_element(thick.begin(), thick.end());
    for (std::size_t fi = 0; fi < fams.size(); ++fi) {
        const GraphFamily f = GraphFamily::parse(fams[fi]);
        const PatchPtr ep = cached_patch(f, escape_radius);
        for (int r = 1; r <= r_max; ++r) {
            const bool ok = all_crossings_hit_exposed(*ep, r);
            const auto ex = exposed_sphere(*ep, r, escape_radius);
            rec.record("all_crossings_hit_exposed", json{{"family", fams[fi]}, {"r", r}, {"escape_radius", escape_radius}},
                       json{{"holds", ok}, {"exposed", ex.vertices.size()}, {"sphere", ep->sphere(r).size()}, {"stabilized", ex.stabilized}});
            rec.check("every S_" + std::to_string(r) + " -> S_" + std::to_string(2 * r + 1) + " path meets the exposed sphere on " + fams[fi], ok);
        }
        const PatchPtr ip = cached_patch(f, length + 2 * t_max + 1);
        const std::uint64_t seed = derive_seed(c.seed(), fi);
        std::uint64_t bad_a = 0, bad_b = 0;
        for (std::uint64_t i = 0; i < paths; ++i) {
            const int r = thick[i % thick.size()];
            const Path walk = lazy_walk(*ip, ip->root(), length, seed, i);
            // drop lazy stays so the path is simple-step
            Path path;
            for (VertexId v : walk)
                if (path.empty() || path.back() != v) path.push_back(v);
            const IronedPath ir = iron(path, r, *ip);
            bad_a += !ir.iron_in_path;
            bad_b += !ir.path_in_iron;
        }
        rec.record("ironing_containments", json{{"family", fams[fi]}, {"paths", paths}, {"length", length}, {"thickness", thick}, {"seed", seed}},
                   json{{"iron_in_path_failures", bad_a}, {"path_in_iron_failures", bad_b}});
        rec.check("ironing containments on " + std::to_string(paths) + " random paths of " + fams[fi], bad_a == 0 && bad_b == 0,
                  std::to_string(bad_a) + " + " + std::to_string(bad_b) + " failures (seed " + std::to_string(seed) + ")");
    }
}

// ---------------------------------------------------------------- oracle equivalence

// Partition labels by breadth-first flood fill, independent of union-find.
std::vector<VertexId> flood_labels(const GraphPatch& g, const OpenMask& open) {
    const VertexId none = std::numeric_limits<VertexId>::max();
    std::vector<VertexId> label(g.num_vertices(), none);
    std::queue<VertexId> q;
    for (VertexId s = 0; s < g.num_vertices(); ++s) {
        if (label[s] != none) continue;
        label[s] = s;
        q.push(s);
        while (!q.empty()) {
            const VertexId v = q.front();
            q.pop();
            for (const auto& inc : g.neighbors(v))
                if (open[inc.edge] && label[inc.vertex] == none) {
                    label[inc.vertex] = s;
                    q.push(inc.vertex);
                }
        }
    }
    return label;
}

// Exact probability of the gluing event: each edge is closed at p2, open at p2 only, or open at
// p1 (three states), and every vertex of A carries an independent ghost bit.
double exact_gluing(const GraphPatch& g, double p1, double p2, double h, std::span<const VertexId> A,
                    std::span<const VertexId> X, std::span<const VertexId> Y, const Region& lambda, const Region& thick) {
    const std::size_t E = g.num_edges();
    const double w[3] = {1 - p2, p2 - p1, p1};
    std::vector<int> state(E, 0);
    OpenMask o1(E, 0), o2(E, 0);
    std::vector<std::uint8_t> ghost(g.num_vertices(), 0);
    double total = 0;
    while (true) {
        double pw = 1;
        for (std::size_t e = 0; e < E; ++e) {
            pw *= w[state[e]];
            o1[e] = state[e] == 2;
            o2[e] = state[e] >= 1;
        }
        if (pw > 0) {
            for (std::uint64_t mask = 0; mask < (1ULL << A.size()); ++mask) {
                double gw = pw;
                for (std::size_t i = 0; i < A.size(); ++i) {
                    const bool on = (mask >> i) & 1;
                    ghost[A[i]] = on;
                    gw *= on ? h : 1 - h;
                }
                if (gw > 0 && gluing_event(g, o1, o2, ghost, A, X, Y, lambda, thick)) total += gw;
            }
        }
        std::size_t e = 0;
        while (e < E && state[e] == 2) state[e++] = 0;
        if (e == E) break;
        ++state[e];
    }
    return total;
}

void exp_oracle(const ExperimentConfig& c, Recorder& rec) {
    const auto fams = c.get_list("families", std::vector<std::string>{"HyperCubic(2)", "Triangular", "Hexagonal", "Kagome312",
                                                                      "RegularTree(3)", "Cylinder(3)", "Slab(3,1,2)", "Heisenberg3"});
    const std::size_t max_edges = static_cast<std::size_t>(c.get_int("max_edges", 20));
    const std::size_t max_gluing_edges = static_cast<std::size_t>(c.get_int("max_gluing_edges", 12));
    const double max_gluing_states = c.get_double("max_gluing_states", 1e7);
    std::size_t gluing_nonzero = 0;
    const auto ps = c.get_doubles("ps", std::vector<double>{0.3, 0.6});
    const std::uint64_t replicas = c.get_u64("replicas", 20000);
    const double h = c.get_double("h", 0.4);
    const double tol = c.get_double("halfwidths", 3.0);
    std::uint64_t tag = 0;
    std::size_t compared = 0, agreed = 0;
    std::string worst;
    auto compare = [&](const std::string& what, const McEstimate& mc, double exact, std::uint64_t seed) {
        const double allowed = tol * mc.ci_halfwidth;
        const bool ok = std::abs(mc.mean - exact) <= allowed;
        ++compared;
        agreed += ok;
        rec.record("oracle_compare", json{{"event", what}, {"seed", seed}},
                   json{{"mc", mc_json(mc)}, {"exact", exact}, {"agree", ok}});
        if (!ok) worst += what + " mc=" + fmt(mc.mean) + " exact=" + fmt(exact) + " (seed " + std::to_string(seed) + "); ";
    };
    for (const auto& name : fams) {
        const GraphFamily f = GraphFamily::parse(name);
        for (int R = 1; R <= f.max_radius(); ++R) {
            const PatchPtr patch = cached_patch(f, R);
            const GraphPatch& g = *patch;
            if (g.num_edges() > max_edges) break;
            if (g.num_edges() == 0) continue;
            const std::string inst = name + " R=" + std::to_string(R);
            const VertexId far = g.sphere(R).back();
            const std::vector<VertexId> root{g.root()}, farv{far};
            const auto sphere = g.sphere(R);
            for (double p : ps) {
                const std::string tagp = inst + " p=" + fmt(p);
                std::uint64_t s = derive_seed(c.seed(), ++tag);
                compare("two-point " + tagp, est_two_point(patch, p, root, farv, {}, replicas, s),
                        exact_probability(g, p, [&](const OpenMask& o) { return connected(g, o, root, farv); }), s);
                if (R >= 2) {
                    s = derive_seed(c.seed(), ++tag);
                    const int inner[1] = {1};
                    compare("Piv[1," + std::to_string(R) + "] " + tagp, est_piv_multi(f, p, inner, R, replicas, s)[0],
                            exact_probability(g, p, [&](const OpenMask& o) { return piv_event(g, o, 1, R); }), s);
                }
                s = derive_seed(c.seed(), ++tag);
                const EdgeId e0 = root_edge(g);
                compare("two-ghost n=2 " + tagp, est_two_ghost(f, R, p, 2, replicas, s),
                        exact_probability(g, p, [&](const OpenMask& o) { return two_ghost_event(g, o, e0, 2); }), s);
                if (g.num_edges() + 1 + sphere.size() <= kMaxEnumerationEdges) {
                    s = derive_seed(c.seed(), ++tag);
                    compare("ghost-connection h=" + fmt(h) + " " + tagp, est_ghost_connection(patch, p, root, sphere, h, {}, replicas, s),
                            exact_ghost_connection(g, p, root, sphere, h, {}), s);
                }
                // ghosts on S_1, X on the outer sphere, Y on S_1 inside Lambda = B_{R-1}
                const auto s1 = g.sphere(1);
                const double states = std::pow(3.0, static_cast<double>(g.num_edges())) * std::ldexp(1.0, static_cast<int>(s1.size()));
                if (R >= 2 && g.num_edges() <= max_gluing_edges && states <= max_gluing_states && p < 1) {
                    const double p2 = std::min(1.0, p + 0.2);
                    const std::vector<VertexId> X{sphere.front()}, Y{s1.back()};
                    const Region lambda = region_of(g, g.ball(R - 1));
                    const int r = 1;
                    s = derive_seed(c.seed(), ++tag);
                    const double exact = exact_gluing(g, p, p2, h, s1, X, Y, lambda, thicken(g, lambda, r));
                    gluing_nonzero += exact > 0;
                    compare("gluing " + tagp, gluing_event_prob(patch, p, p2, h, s1, X, Y, lambda, r, replicas, s), exact, s);
                }
            }
        }
    }
    rec.check("Monte Carlo agrees with exhaustive enumeration within " + fmt(tol) + " half-widths", agreed == compared,
              std::to_string(agreed) + "/" + std::to_string(compared) + " agree" + (worst.empty() ? "" : "; " + worst));
    rec.check("gluing comparisons include instances where the event has positive probability", gluing_nonzero > 0,
              std::to_string(gluing_nonzero) + " gluing instances with positive exact value");

    // union-find against flood fill
    const std::uint64_t configs = c.get_u64("partition_configs", 1000);
    const int pr = c.get_int("partition_radius", 8);
    std::uint64_t mismatches = 0, total = 0;
    for (std::size_t fi = 0; fi < fams.size(); ++fi) {
        const GraphFamily f = GraphFamily::parse(fams[fi]);
        const PatchPtr patch = cached_patch(f, std::min(pr, f.max_radius()));
        const std::uint64_t seed = derive_seed(c.seed(), 5000 + fi);
        for (std::uint64_t i = 0; i < configs; ++i) {
            const double p = uniform(seed, Stream::Misc, i, 0);
            const EdgeLabels labels = sample_labels(patch, seed, i);
            const OpenMask open = open_mask(labels, p);
            ClusterForest forest(*patch, open);
            const auto flood = flood_labels(*patch, open);
            // compare as partitions: same flood label <=> same union-find root
            std::vector<VertexId> rep(patch->num_vertices(), std::numeric_limits<VertexId>::max());
            bool same = true;
            for (VertexId v = 0; v < patch->num_vertices() && same; ++v) {
                const VertexId root = forest.find(v);
                if (rep[root] == std::numeric_limits<VertexId>::max()) rep[root] = flood[v];
                same = rep[root] == flood[v];
            }
            std::vector<VertexId> uniq(flood);
            std::sort(uniq.begin(), uniq.end());
            same = same && static_cast<std::size_t>(std::unique(uniq.begin(), uniq.end()) - uniq.begin()) == forest.num_clusters();
            mismatches += !same;
            ++total;
        }
    }
    rec.record("partition_compare", json{{"families", fams}, {"configs", configs}, {"radius", pr}},
               json{{"mismatches", mismatches}, {"total", total}});
    rec.check("union-find partitions equal flood fill", mismatches == 0,
              std::to_string(mismatches) + " mismatches in " + std::to_string(total) + " configurations");
}

// ---------------------------------------------------------------- algebraic identities

void exp_identities(const ExperimentConfig& c, Recorder& rec) {
    const std::uint64_t samples = c.get_u64("samples", 20000);
    const double tol = c.get_double("tolerance", 1e-12);
    CounterStream rng(c.seed(), Stream::Misc, 0);
    auto in = [&](double a, double b) { return a + (b - a) * rng.uniform(); };

    double semigroup = 0, inverse = 0, roundtrip = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        const double p = in(0.01, 0.9), a = in(0.0, 1.0), b = in(0.0, 1.0);
        semigroup = std::max(semigroup, std::abs(sprinkle(p, a + b) - sprinkle(sprinkle(p, a), b)));
        inverse = std::max(inverse, std::abs(delta(p, sprinkle(p, a)) - a));
        const double x = in(0.01, 0.99), y = in(0.01, 0.99);
        roundtrip = std::max(roundtrip, std::abs(sprinkle(std::min(x, y), delta(x, y)) - std::max(x, y)));
    }
    rec.record("sprinkle_identities", json{{"samples", samples}},
               json{{"semigroup_err", semigroup}, {"inverse_err", inverse}, {"roundtrip_err", roundtrip}});
    rec.check("sprinkle semigroup", semigroup <= tol, "max error " + fmt(semigroup));
    rec.check("delta inverts sprinkle", inverse <= tol && roundtrip <= tol, "max errors " + fmt(inverse) + ", " + fmt(roundtrip));

    double bits_err = 0;
    std::uint64_t bits_bad = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        const int d = 3 + static_cast<int>(rng.below(8));
        const double p1 = in(1.0 / d, 0.95), p2 = in(p1, 0.99), h = in(1e-4, 1.0 / d);
        if (!(p2 > p1)) continue;
        try {
            const BitsEncoding be = bits_encoding(p1, p2, h, d);
            const double e1 = std::abs(std::pow(1 - be.q1, be.m_E) - (1 - p1));
            const double e2 = std::abs(std::pow(1 - be.q2, be.m_E) - (1 - p2));
            bits_err = std::max({bits_err, e1, e2});
            const bool ok = be.q1 >= 1.0 / d - tol && be.q1 <= 2.0 / d + tol && be.m_G >= 1 &&
                            std::pow(be.q1, be.m_G) >= h * (1 - tol);
            bits_bad += !ok;
        } catch (const std::exception&) {
            ++bits_bad;
        }
    }
    rec.record("bits_encoding_invariants", json{{"samples", samples}}, json{{"max_err", bits_err}, {"failures", bits_bad}});
    rec.check("bits encoding invariants", bits_err <= tol && bits_bad == 0,
              "max error " + fmt(bits_err) + ", " + std::to_string(bits_bad) + " invariant failures");

    double tower = 0, decay = 0, chain = 0, limit = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        const double n0 = std::exp(in(std::log(16.0), std::log(1e12)));
        const Schedule s = make_schedule(n0, in(0.05, 0.95), in(0.0, 2.0), in(0.0, 0.2), 60);
        // one step of n -> exp((log n)^9) in log-log form: log log n_1 = 9 log log n_0
        tower = std::max(tower, std::abs(s.logloglog_n[1] - std::log(9.0 * std::log(std::log(n0)))));
        for (std::size_t j = 0; j < s.logloglog_n.size(); ++j)
            tower = std::max(tower, std::abs(s.logloglog_n[j] - (s.logloglog_n[0] + static_cast<double>(j) * std::log(9.0))) /
                                        std::max(1.0, std::abs(s.logloglog_n[j])));
        for (std::size_t j = 1; j + 1 < s.delta.size(); ++j) decay = std::max(decay, std::abs(s.delta[j] / s.delta[j + 1] - 3.0));
        for (std::size_t j = 0; j + 1 < s.p.size(); ++j) {
            const double expect = s.p[j] >= 1.0 ? 1.0 : sprinkle(s.p[j], s.delta[j]);
            chain = std::max(chain, std::abs(s.p[j + 1] - expect));
        }
        limit = std::max(limit, std::abs(p_infinity(s) - s.p.back()));
    }
    rec.record("schedule_identities", json{{"schedules", 200}},
               json{{"triple_log_err", tower}, {"delta_ratio_err", decay}, {"chain_err", chain}, {"limit_err", limit}});
    rec.check("triple-log recursion", tower <= tol, "max error " + fmt(tower));
    rec.check("geometric decay of the sprinkling steps", decay <= tol, "max error " + fmt(decay));
    rec.check("sprinkle chaining and limit", chain <= tol && limit <= tol, "max errors " + fmt(chain) + ", " + fmt(limit));
}

// ---------------------------------------------------------------- replay

void exp_replay(const ExperimentConfig& c, Recorder& rec) {
    std::filesystem::path target = c.get_string("target");
    if (target.is_relative() && !c.source().empty()) target = std::filesystem::path(c.source()).parent_path() / target;
    const ExperimentConfig inner = load_config(target);
    const ExperimentResult a = run_experiment(inner);
    const ExperimentResult b = run_experiment(inner);
    const auto sa = replay_signature(a), sb = replay_signature(b);
    const bool identical = sa == sb;
    std::size_t failing = 0;
    bool carries = true;
    for (const auto& rec_json : a.records) {
        if (rec_json.at("operation") != "check" || rec_json.at("result").at("passed").get<bool>()) continue;
        ++failing;
        carries = carries && rec_json.at("config_hash") == inner.hash() && rec_json.at("seed") == inner.seed();
    }
    rec.record("replay", json{{"target", target.string()}, {"target_hash", inner.hash()}, {"target_seed", inner.seed()}},
               json{{"records", sa.size()}, {"identical", identical}, {"failing_checks", failing}, {"failure_reproduced", identical && failing > 0}});
    rec.check("replay reproduces every record bit-identically", identical, std::to_string(sa.size()) + " records");
    rec.check("failing checks carry the config hash and seed", carries,
              std::to_string(failing) + " failing checks in " + target.filename().string());
}

struct Entry {
    const char* name;
    const char* description;
    ExperimentFn fn;
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = {
        {"pc-estimate", "critical point by crossing-probability bisection; optional reference values and Kesten trend", exp_pc_estimate},
        {"locality-sweep", "p_c along a family sequence against a reference (mode=pc) or sphere-connection decay (mode=sphere)", exp_locality_sweep},
        {"two-ghost-scaling", "two-ghost probability against n, optional coupled-ghost h sweep", exp_two_ghost},
        {"piv-decay", "two-arm probability Piv[m,n] against n", exp_piv_decay},
        {"cerf-check", "two-arm bound through two-point function lower bounds", exp_cerf},
        {"walk-checks", "exact-kernel Varopoulos-Carne, ball escape and cool inequality checks", exp_walk_checks},
        {"tubes-demo", "radial tube families from coupled random walks", exp_tubes},
        {"ghost-influence", "per-edge pivotal influences of an event", exp_ghost_influence},
        {"snowball-demo", "ball-to-ball connection against products of self-connections", exp_snowball},
        {"multiscale-demo", "schedule, full-space, two-point zone and corridor statements at desk scale", exp_multiscale},
        {"orange-peel", "cluster-merging traces over a fixed seed set", exp_orange_peel},
        {"sprinkling-bound", "Hamming sprinkling bound plus the orange-peel regression", exp_sprinkling_bound},
        {"geometry-checks", "exposed-sphere crossings and ironing containments", exp_geometry},
        {"oracle-equivalence", "Monte Carlo against exhaustive enumeration; union-find against flood fill", exp_oracle},
        {"identities", "sprinkling, bit-encoding and schedule identities on random grids", exp_identities},
        {"replay-check", "runs a target config twice and compares records", exp_replay},
    };
    return entries;
}

}  // namespace

std::vector<ExperimentInfo> list_experiments() {
    std::vector<ExperimentInfo> out;
    for (const auto& e : registry()) out.push_back({e.name, e.description});
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    const std::string& name = config.experiment();
    for (const auto& e : registry()) {
        if (name != e.name) continue;
        Recorder rec(config);
        e.fn(config, rec);
        return rec.finish();
    }
    throw ParameterError("unknown experiment: " + name);
}

// ---------------------------------------------------------------- persistence and report

namespace {

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items())
            if (k != "series") flatten(v, prefix.empty() ? k : prefix + "." + k, out);
    } else if (j.is_array()) {
        // arrays stay in the JSON-lines file
    } else if (j.is_string()) {
        out.emplace_back(prefix, j.get<std::string>());
    } else {
        out.emplace_back(prefix, j.dump());
    }
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return out + "\"";
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char ch : s) out += std::isalnum(static_cast<unsigned char>(ch)) ? ch : '_';
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

}  // namespace

void write_results(const std::filesystem::path& dir, const ExperimentResult& result) {
    std::filesystem::create_directories(dir);
    const bool fresh_csv = !std::filesystem::exists(dir / "results.csv");
    std::ofstream jl(dir / "results.jsonl", std::ios::app);
    std::ofstream csv(dir / "results.csv", std::ios::app);
    if (!jl || !csv) throw ParameterError("cannot write results in " + dir.string());
    if (fresh_csv) csv << "config_hash,experiment,operation,record,key,value\n";
    std::size_t index = 0;
    for (const auto& rec : result.records) {
        jl << rec.dump() << '\n';
        std::vector<std::pair<std::string, std::string>> cells;
        flatten(rec.at("result"), "", cells);
        for (const auto& [k, v] : cells)
            csv << result.config_hash << ',' << result.experiment << ',' << csv_field(rec.at("operation").get<std::string>()) << ','
                << index << ',' << csv_field(k) << ',' << csv_field(v) << '\n';
        ++index;
    }
}

ReportOutcome write_report(const std::filesystem::path& dir) {
    ReportOutcome outcome;
    if (!std::filesystem::is_directory(dir)) throw ParameterError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    // group key: (experiment, family) in sorted order
    std::map<std::pair<std::string, std::string>, std::vector<json>> groups;
    for (const auto& path : files) {
        std::ifstream in(path);
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            json rec;
            try {
                rec = json::parse(line);
            } catch (const json::parse_error&) {
                throw ParseError("malformed record in " + path.string());
            }
            const auto& inputs = rec.value("inputs", json::object());
            const std::string fam = inputs.contains("family") && inputs["family"].is_string() ? inputs["family"].get<std::string>() : "-";
            groups[{rec.value("experiment", std::string("?")), fam}].push_back(std::move(rec));
            ++outcome.records;
        }
    }
    std::ofstream summary(dir / "summary.txt");
    outcome.files.push_back(dir / "summary.txt");
    if (outcome.records == 0) {
        std::cerr << "warning: no result records in " << dir << '\n';
        summary << "no records\n";
        outcome.empty = true;
        return outcome;
    }
    summary << "records: " << outcome.records << "\n";
    std::size_t passed = 0, failed = 0;
    for (const auto& [key, recs] : groups) {
        summary << "\n== " << key.first << " [" << key.second << "] ==\n";
        std::size_t idx = 0;
        for (const auto& rec : recs) {
            const std::string op = rec.value("operation", std::string("?"));
            if (op == "check") {
                const bool ok = rec["result"].value("passed", false);
                (ok ? passed : failed)++;
                summary << (ok ? "  PASS " : "  FAIL ") << rec["inputs"].value("name", std::string()) << "  "
                        << rec["result"].value("detail", std::string()) << '\n';
                continue;
            }
            std::vector<std::pair<std::string, std::string>> cells;
            flatten(rec["result"], "", cells);
            summary << "  " << op;
            for (const auto& [k, v] : cells)
                if (k.find('.') == std::string::npos) summary << "  " << k << "=" << v;
            summary << '\n';
            if (rec["result"].contains("series")) {
                const json& s = rec["result"]["series"];
                const auto name = sanitize(key.first) + "_" + sanitize(op) + "_" + sanitize(key.second) + "_" + std::to_string(idx) + ".dat";
                std::ofstream dat(dir / name);
                dat << "# " << s.value("xlabel", std::string("x")) << ' ' << s.value("ylabel", std::string("y")) << '\n';
                for (std::size_t i = 0; i < s["x"].size() && i < s["y"].size(); ++i) dat << s["x"][i].dump() << ' ' << s["y"][i].dump() << '\n';
                outcome.files.push_back(dir / name);
            }
            ++idx;
        }
    }
    summary << "\nchecks: " << passed << " passed, " << failed << " failed\n";
    return outcome;
}

}  // namespace perclab
