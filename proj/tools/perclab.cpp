#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "perclab/errors.hpp"
#include "perclab/experiments.hpp"
#include "perclab/family.hpp"
#include "perclab/patch.hpp"

namespace {

constexpr int kExitChecksFailed = 1;
constexpr int kExitError = 2;

int cmd_run(const std::string& config_path, std::string out_dir, bool no_timing) {
    perclab::ExperimentConfig cfg = perclab::load_config(config_path);
    if (no_timing) cfg.set("record_timing", "false");
    if (out_dir.empty()) out_dir = cfg.get_string("output", std::string("results"));
    std::cerr << "running " << cfg.experiment() << " (config " << cfg.hash() << ", seed " << cfg.seed() << ")\n";
    const perclab::ExperimentResult result = perclab::run_experiment(cfg);
    perclab::write_results(out_dir, result);
    std::cout << result.summary();
    std::cout << result.records.size() << " records appended to " << out_dir << "/results.jsonl\n";
    if (!result.passed()) {
        std::cout << "replay with: perclab run " << config_path << "  (config " << result.config_hash << ", seed " << result.seed << ")\n";
        return kExitChecksFailed;
    }
    return 0;
}

int cmd_report(const std::string& dir) {
    const perclab::ReportOutcome out = perclab::write_report(dir);
    std::cout << out.records << " records, " << out.files.size() << " files written\n";
    return 0;
}

int cmd_list() {
    for (const auto& e : perclab::list_experiments()) std::cout << e.name << "\t" << e.description << '\n';
    return 0;
}

int cmd_export(const std::string& family, int radius, const std::string& out_path) {
    const perclab::PatchPtr patch = perclab::build_patch(perclab::GraphFamily::parse(family), radius);
    if (out_path.empty() || out_path == "-") {
        perclab::write_patch(std::cout, *patch);
    } else {
        std::ofstream out(out_path);
        if (!out) throw perclab::ParameterError("cannot write " + out_path);
        perclab::write_patch(out, *patch);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"perclab: percolation experiments on transitive graphs"};
    app.set_version_flag("--version", std::string(PERCLAB_VERSION));
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (overrides PERCLAB_THREADS)")->check(CLI::PositiveNumber);

    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    std::string config_path, out_dir;
    bool no_timing = false;
    run->add_option("config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--out", out_dir, "output directory (default: config key 'output' or ./results)");
    run->add_flag("--no-timing", no_timing, "record zero wall times so output files replay byte-identically");

    auto* report = app.add_subcommand("report", "summarise result records in a directory");
    std::string report_dir;
    report->add_option("dir", report_dir, "directory with results.jsonl")->required();

    auto* list = app.add_subcommand("list-experiments", "list the named experiments");

    auto* exp = app.add_subcommand("export-patch", "write a ball of a lattice as text");
    std::string family;
    int radius = 0;
    std::string out_path;
    exp->add_option("--family", family, "family name, e.g. HyperCubic(2), Slab(3,1,4), Kagome312")->required();
    exp->add_option("--radius", radius, "ball radius")->required()->check(CLI::NonNegativeNumber);
    exp->add_option("-o,--out", out_path, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);
    if (threads > 0) setenv("PERCLAB_THREADS", std::to_string(threads).c_str(), 1);

    try {
        if (*run) return cmd_run(config_path, out_dir, no_timing);
        if (*report) return cmd_report(report_dir);
        if (*list) return cmd_list();
        if (*exp) return cmd_export(family, radius, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
