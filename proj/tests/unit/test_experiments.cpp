#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "perclab/errors.hpp"
#include "perclab/experiments.hpp"

using namespace perclab;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("perclab_unit_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

const char* kWalkConfig = R"(
; small walk check run
[experiment]
name = walk-checks
family = HyperCubic(2)
t_max = 4
radius = 6
kernel_t = 4
seed = 3
)";
}  // namespace

TEST_CASE("config parsing, typed access and hashing") {
    const ExperimentConfig c = parse_config(R"(
[experiment]
name = pc-estimate
seed = 17
families = Slab(3,1,2); Slab(3,1,3), HyperCubic(2)
ps = 0.5, 0.55,0.6
L = 8;16
flag = yes

[extra]
note = hello
)");
    CHECK(c.experiment() == "pc-estimate");
    CHECK(c.seed() == 17);
    CHECK(c.get_list("families") == std::vector<std::string>{"Slab(3,1,2)", "Slab(3,1,3)", "HyperCubic(2)"});
    CHECK(c.get_doubles("ps") == std::vector<double>{0.5, 0.55, 0.6});
    CHECK(c.get_ints("L") == std::vector<int>{8, 16});
    CHECK(c.get_bool("flag"));
    CHECK(c.get_string("extra.note") == "hello");
    CHECK(c.get_int("missing", 5) == 5);
    CHECK_THROWS_AS(c.get_int("missing"), ParameterError);
    CHECK_THROWS_AS(c.get_double("families"), ParameterError);
    CHECK_THROWS_AS(c.get_int("ps"), ParameterError);

    // FNV-1a 64-bit reference values
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);

    // key order and whitespace do not change the hash; values do
    const ExperimentConfig a = parse_config("[experiment]\nname = identities\nseed = 1\nsamples = 10\n");
    const ExperimentConfig b = parse_config("[experiment]\nsamples=10\n  seed =  1\nname= identities\n");
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 16);
    ExperimentConfig d = a;
    d.set("seed", "2");
    CHECK(d.hash() != a.hash());
    CHECK(a.canonical() == "name=identities\nsamples=10\nseed=1\n");

    CHECK_THROWS_AS(parse_config("[experiment]\nseed = 1\n"), ParameterError);
    CHECK_THROWS_AS(parse_config("[experiment\nname = x\n"), ParseError);
    CHECK_THROWS_AS(load_config("/nonexistent/perclab.ini"), ParameterError);
    CHECK(split_list("a(1,2), b ;c") == std::vector<std::string>{"a(1,2)", "b", "c"});
}

TEST_CASE("experiment dispatch and errors") {
    std::set<std::string> names;
    for (const auto& e : list_experiments()) names.insert(e.name);
    for (const char* required : {"pc-estimate", "locality-sweep", "two-ghost-scaling", "piv-decay", "cerf-check",
                                 "walk-checks", "tubes-demo", "ghost-influence", "snowball-demo", "multiscale-demo",
                                 "orange-peel"})
        CHECK(names.count(required) == 1);
    CHECK_THROWS_AS(run_experiment(parse_config("[experiment]\nname = no-such-thing\n")), ParameterError);
    CHECK_THROWS(run_experiment(parse_config("[experiment]\nname = walk-checks\nt_max = many\n")));
}

TEST_CASE("records carry hash, seed and version and replay identically") {
    const ExperimentConfig c = parse_config(kWalkConfig);
    const ExperimentResult r1 = run_experiment(c);
    const ExperimentResult r2 = run_experiment(c);
    REQUIRE_FALSE(r1.records.empty());
    CHECK(r1.passed());
    CHECK_FALSE(r1.checks.empty());
    for (const auto& rec : r1.records) {
        CHECK(rec.at("config_hash") == c.hash());
        CHECK(rec.at("seed") == 3);
        CHECK(rec.contains("version"));
        CHECK(rec.contains("wall_time_s"));
    }
    CHECK(replay_signature(r1) == replay_signature(r2));
    for (const auto& s : replay_signature(r1)) CHECK(s.find("wall_time_s") == std::string::npos);

    ExperimentConfig other = c;
    other.set("t_max", "3");
    CHECK(replay_signature(run_experiment(other)) != replay_signature(r1));
}

TEST_CASE("results and report") {
    const fs::path empty = fresh_dir("empty");
    const ReportOutcome none = write_report(empty);
    CHECK(none.empty);
    CHECK(none.records == 0);

    ExperimentConfig c = parse_config(kWalkConfig);
    c.set("record_timing", "false");
    const ExperimentResult walk = run_experiment(c);

    const fs::path single = fresh_dir("single");
    ExperimentResult one = walk;
    one.records.resize(1);
    write_results(single, one);
    const ReportOutcome o1 = write_report(single);
    CHECK(o1.records == 1);
    const std::string s1 = slurp(single / "summary.txt");
    CHECK(s1.find("records: 1") != std::string::npos);
    CHECK(s1.find("== walk-checks [HyperCubic(2)] ==") != std::string::npos);
    CHECK(fs::exists(single / "results.csv"));

    const fs::path mixed = fresh_dir("mixed");
    write_results(mixed, walk);
    const ExperimentResult ids = run_experiment(parse_config("[experiment]\nname = identities\nseed = 1\nsamples = 50\nrecord_timing = false\n"));
    write_results(mixed, ids);
    const ReportOutcome o2 = write_report(mixed);
    CHECK(o2.records == walk.records.size() + ids.records.size());
    const std::string first = slurp(mixed / "summary.txt");
    CHECK(first.find("== walk-checks") != std::string::npos);
    CHECK(first.find("== identities") != std::string::npos);
    CHECK(first.find("checks: ") != std::string::npos);
    std::vector<std::string> dats;
    for (const auto& f : o2.files) dats.push_back(slurp(f));
    write_report(mixed);
    CHECK(slurp(mixed / "summary.txt") == first);
    for (std::size_t i = 0; i < o2.files.size(); ++i) CHECK(slurp(o2.files[i]) == dats[i]);

    // untimed runs write byte-identical record files
    const fs::path r1 = fresh_dir("replay_a"), r2 = fresh_dir("replay_b");
    write_results(r1, run_experiment(c));
    write_results(r2, run_experiment(c));
    CHECK(slurp(r1 / "results.jsonl") == slurp(r2 / "results.jsonl"));
    CHECK(slurp(r1 / "results.csv") == slurp(r2 / "results.csv"));

    std::ofstream(empty / "bad.jsonl") << "{not json\n";
    CHECK_THROWS_AS(write_report(empty), ParseError);
    CHECK_THROWS_AS(write_report(empty / "missing"), ParameterError);
    for (const char* d : {"empty", "single", "mixed", "replay_a", "replay_b"}) fs::remove_all(fs::temp_directory_path() / (std::string("perclab_unit_") + d));
}
