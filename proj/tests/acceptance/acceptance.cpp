// Runs the shipped acceptance configs and prints one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...] [--out DIR]

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "perclab/experiments.hpp"

namespace fs = std::filesystem;

namespace {

const char* const kTitles[] = {
    "",
    "p_c reproduction (Z^2, hexagonal, 3-12)",
    "Kesten trend over Z^2, Z^3, Z^4",
    "locality: Slab(3,1,m) toward Z^3",
    "one-dimensional degeneracy on Cylinder(8)",
    "two-ghost scaling on Z^2",
    "exact walk checks",
    "deterministic geometry",
    "oracle equivalence",
    "algebraic identities",
    "sprinkling bound and orange peeling",
    "reproducibility by replay",
};

fs::path config_for(const fs::path& dir, int criterion) {
    char prefix[32];
    std::snprintf(prefix, sizeof prefix, "acceptance_%02d_", criterion);
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().filename().string().rfind(prefix, 0) == 0 && e.path().extension() == ".ini") return e.path();
    return {};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    fs::path out_dir;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--out" && i + 1 < argc) {
            out_dir = argv[++i];
        } else {
            only.insert(std::atoi(a.c_str()));
        }
    }
    const fs::path dir = PERCLAB_CONFIG_DIR;
    int failures = 0;
    for (int c = 1; c <= 11; ++c) {
        if (!only.empty() && !only.count(c)) continue;
        const fs::path cfg_path = config_for(dir, c);
        if (cfg_path.empty()) {
            std::cout << "criterion " << c << " (" << kTitles[c] << "): FAIL  no config shipped\n";
            ++failures;
            continue;
        }
        try {
            const perclab::ExperimentConfig cfg = perclab::load_config(cfg_path);
            const perclab::ExperimentResult res = perclab::run_experiment(cfg);
            if (!out_dir.empty()) perclab::write_results(out_dir, res);
            const bool ok = res.passed() && !res.checks.empty();
            std::cout << "criterion " << c << " (" << kTitles[c] << "): " << (ok ? "PASS" : "FAIL") << '\n';
            for (const auto& ch : res.checks)
                std::cout << "    " << (ch.passed ? "pass " : "FAIL ") << ch.name << (ch.detail.empty() ? "" : "  [" + ch.detail + "]") << '\n';
            if (!ok) {
                std::cout << "    replay: perclab run " << cfg_path.string() << "  (config hash " << res.config_hash
                          << ", seed " << res.seed << ")\n";
                ++failures;
            }
        } catch (const std::exception& e) {
            std::cout << "criterion " << c << " (" << kTitles[c] << "): FAIL  error: " << e.what() << "  (config "
                      << cfg_path.string() << ")\n";
            ++failures;
        }
        std::cout.flush();
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
    return failures == 0 ? 0 : 1;
}
