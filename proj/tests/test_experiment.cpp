#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "imbench/experiment.hpp"
#include "imbench/report.hpp"

using namespace imbench;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "imbench_test_experiment" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ExperimentConfig quick_config() {
    ExperimentConfig c;
    c.depth = 2;
    c.width = 8;
    c.max_epochs = 3;
    c.patience = 2;
    c.folds = 10;
    c.repetitions = 5;
    c.seed = 2024;
    return c;
}

Dataset quick_data(std::uint64_t seed = 1) {
    Rng rng(seed);
    Dataset d = make_two_gaussians(90, 30, 1.5, 2, rng);
    d.name = "toy";
    return d;
}

std::map<ExperimentRecord::Key, EvalScores> by_key(const std::vector<ExperimentRecord>& recs) {
    std::map<ExperimentRecord::Key, EvalScores> out;
    for (const auto& r : recs) out[r.key()] = r.scores;
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("records round trip through JSON") {
    ExperimentRecord r;
    r.dataset = "pima";
    r.method = "GDRO";
    r.fold = 3;
    r.repetition = 4;
    r.seed = 0xfeedfacecafebeefULL;
    r.depth = 5;
    r.scores = {0.1, 0.2, 0.30000000000000004, 0.4, 0.5, 0.6};
    r.epochs = 17;
    r.best_epoch = 7;
    r.wall_time_s = 1.25;
    const auto j = record_to_json(r);
    CHECK(j.at("v") == 1);
    const auto back = record_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.key() == r.key());
    CHECK(back.seed == r.seed);
    CHECK(back.scores == r.scores);
    CHECK(back.epochs == 17);

    r.error = "boom";
    const auto failed = record_from_json(record_to_json(r));
    CHECK_FALSE(failed.ok());
    CHECK(*failed.error == "boom");

    auto bad = j;
    bad["v"] = 2;
    CHECK_THROWS_AS(record_from_json(bad), std::invalid_argument);
}

TEST_CASE("reading records tolerates only a torn final line") {
    const auto dir = fresh_dir("torn");
    ExperimentRecord r;
    r.dataset = "d";
    r.method = "ERM";
    const std::string line = record_to_json(r).dump();
    std::ofstream(dir / "a.jsonl") << line << "\n" << line << "\n" << line.substr(0, 20);
    CHECK(read_records(dir / "a.jsonl").size() == 2);
    std::ofstream(dir / "b.jsonl") << line << "\n{garbage\n" << line << "\n";
    CHECK_THROWS_AS(read_records(dir / "b.jsonl"), std::invalid_argument);
    CHECK(read_records(dir / "missing.jsonl").empty());
}

TEST_CASE("seeds are stable and distinct") {
    CHECK(job_seed(1, "a", Method::erm, 0, 0) == job_seed(1, "a", Method::erm, 0, 0));
    std::set<std::uint64_t> seen;
    for (Method m : all_methods) {
        for (std::size_t rep = 0; rep < 5; ++rep) {
            for (std::size_t f = 0; f < 10; ++f) seen.insert(job_seed(1, "a", m, rep, f));
        }
    }
    CHECK(seen.size() == 300);
    CHECK(split_seed(1, "a", 0) != split_seed(1, "a", 1));
    CHECK(split_seed(1, "a", 0) != split_seed(2, "a", 0));
}

TEST_CASE("fold plans never leak test or early-stop rows") {
    const Dataset d = quick_data();
    const auto c = quick_config();
    Rng srng(3);
    const auto split = stratified_kfold(d.labels, c.folds, srng);
    for (Method m : all_methods) {
        for (std::size_t f = 0; f < split.k(); ++f) {
            Rng rng(f);
            const auto plan = plan_fold(d.labels, split, f, m, c, rng);
            const std::set<std::size_t> test(plan.test.begin(), plan.test.end());
            const std::set<std::size_t> stop(plan.early_stop.begin(), plan.early_stop.end());
            const std::set<std::size_t> fit(plan.fit_partition.begin(), plan.fit_partition.end());
            CHECK(test.size() + fit.size() == d.size());
            for (auto i : plan.fit_partition) CHECK(test.count(i) == 0);
            for (auto i : plan.early_stop) {
                CHECK(test.count(i) == 0);
                CHECK(fit.count(i) == 1);
            }
            std::vector<int> train_y;
            for (auto i : plan.train) {
                CHECK(test.count(i) == 0);
                CHECK(stop.count(i) == 0);
                train_y.push_back(d.labels[i]);
            }
            const auto counts = ClassCounts::from_labels(train_y);
            if (m == Method::ros || m == Method::rus || m == Method::rusros) CHECK(counts[0] == counts[1]);
            CHECK(plan.class_weights.has_value() == (m == Method::cost));
            std::size_t stop_minority = 0;
            for (auto i : plan.early_stop) stop_minority += d.labels[i];
            CHECK(stop_minority >= 1);
        }
    }
}

TEST_CASE("job count, determinism and resume") {
    const Dataset d = quick_data();
    auto c = quick_config();
    c.methods = {Method::erm, Method::gdro};
    const std::vector<Dataset> data{d};
    const auto dir = fresh_dir("run");

    RunOptions full;
    full.records_path = dir / "full.jsonl";
    const auto s1 = run_experiment(c, data, full);
    CHECK(s1.total_jobs == 100);
    CHECK(s1.completed == 100);
    CHECK(s1.failed == 0);
    const auto first = read_records(full.records_path);
    CHECK(first.size() == 100);
    std::set<ExperimentRecord::Key> keys;
    for (const auto& r : first) keys.insert(r.key());
    CHECK(keys.size() == 100);

    // second run on the same file skips everything
    const auto s2 = run_experiment(c, data, full);
    CHECK(s2.skipped == 100);
    CHECK(s2.completed == 0);
    CHECK(read_records(full.records_path).size() == 100);

    // same seed, new file: identical scores
    RunOptions again;
    again.records_path = dir / "again.jsonl";
    run_experiment(c, data, again);
    CHECK(by_key(read_records(again.records_path)) == by_key(first));

    // interrupted after 37 records, torn tail, then resumed with two workers
    RunOptions part;
    part.records_path = dir / "part.jsonl";
    part.stop_after = 37;
    const auto s3 = run_experiment(c, data, part);
    CHECK(s3.interrupted);
    CHECK(read_records(part.records_path).size() == 37);
    std::ofstream(part.records_path, std::ios::app) << R"({"v":1,"dataset":"toy","meth)";
    part.stop_after = 0;
    part.workers = 2;
    const auto s4 = run_experiment(c, data, part);
    CHECK(s4.skipped == 37);
    CHECK(s4.completed == 63);
    const auto resumed = read_records(part.records_path);
    CHECK(resumed.size() == 100);
    CHECK(by_key(resumed) == by_key(first));
    CHECK(slurp(part.records_path).back() == '\n');
}

TEST_CASE("a different master seed changes the results") {
    const Dataset d = quick_data();
    auto c = quick_config();
    c.methods = {Method::erm};
    c.repetitions = 1;
    const std::vector<Dataset> data{d};
    const auto dir = fresh_dir("seed");
    RunOptions a, b;
    a.records_path = dir / "a.jsonl";
    b.records_path = dir / "b.jsonl";
    run_experiment(c, data, a);
    c.seed += 1;
    run_experiment(c, data, b);
    CHECK(by_key(read_records(a.records_path)) != by_key(read_records(b.records_path)));
}

TEST_CASE("job failures are recorded and the run continues") {
    Dataset broken = quick_data();
    broken.name = "no_features";
    broken.features = Matrix(broken.size(), 0);
    const Dataset good = quick_data(2);
    auto c = quick_config();
    c.methods = {Method::erm};
    c.repetitions = 1;
    const std::vector<Dataset> data{broken, good};
    const auto dir = fresh_dir("fail");
    RunOptions o;
    o.records_path = dir / "r.jsonl";
    const auto s = run_experiment(c, data, o);
    CHECK(s.failed == 10);
    CHECK(s.completed == 10);
    const auto recs = read_records(o.records_path);
    CHECK(recs.size() == 20);
    for (const auto& r : recs) CHECK(r.ok() == (r.dataset == "toy"));
    // failed jobs are retried on resume
    const auto again = run_experiment(c, data, o);
    CHECK(again.skipped == 10);
    CHECK(again.failed == 10);
}

TEST_CASE("tuner prefers the shallowest depth on ties") {
    Rng rng(5);
    Dataset d = make_two_gaussians(900, 300, 12.0, 2, rng);
    d.name = "separable";
    ExperimentConfig c;
    c.seed = 2024;
    const auto report = tune_architecture(d, c);
    CHECK(report.depth_auc.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(report.depth_auc[i].first == i + 2);
        CHECK(report.depth_auc[i].second == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(report.selected_depth == 2);
    const auto j = tune_report_to_json(report);
    CHECK(j.at("depths").size() == 5);
}

TEST_CASE("tuner selects the best mean AUC") {
    Rng rng(6);
    Dataset d = make_two_gaussians(120, 40, 1.0, 3, rng);
    d.name = "overlap";
    auto c = quick_config();
    c.max_epochs = 5;
    const auto report = tune_architecture(d, c);
    double best = -1;
    for (const auto& [depth, auc] : report.depth_auc) {
        CHECK(auc >= 0.0);
        CHECK(auc <= 1.0);
        best = std::max(best, auc);
    }
    for (const auto& [depth, auc] : report.depth_auc) {
        if (depth == report.selected_depth) CHECK(auc == best);
        if (depth < report.selected_depth) CHECK(auc < best);
    }
}

TEST_CASE("tuner rejects datasets too small for the folds") {
    Rng rng(7);
    Dataset d = make_two_gaussians(30, 4, 2.0, 2, rng);
    d.name = "tiny";
    CHECK_THROWS_AS(tune_architecture(d, quick_config()), std::invalid_argument);
}

TEST_CASE("command line") {
    const char* cli = std::getenv("IMBENCH_CLI");
    if (cli == nullptr) return;
    const auto dir = fresh_dir("cli");
    const std::string exe = cli;
    const fs::path pima = fs::path(IMBENCH_DATA_DIR) / "keel" / "pima.dat";

    auto run = [&](const std::string& args) { return std::system((exe + " " + args).c_str()); };

    REQUIRE(run("inspect " + pima.string() + " --json > " + (dir / "profile.json").string()) == 0);
    const auto parsed = profile_from_json(nlohmann::json::parse(slurp(dir / "profile.json")));
    CHECK(parsed == profile_dataset(load_dataset(pima)));
    CHECK(parsed.samples == 768);
    REQUIRE(run("inspect " + pima.string() + " > " + (dir / "profile.txt").string()) == 0);
    CHECK(slurp(dir / "profile.txt").find("1.87") != std::string::npos);

    Rng rng(8);
    Dataset bal = make_two_gaussians(50, 50, 3.0, 2, rng);
    bal.name = "balanced";
    write_csv(bal, dir / "balanced.csv");
    REQUIRE(run("inspect " + (dir / "balanced.csv").string() + " --json > " + (dir / "bal.json").string()) == 0);
    CHECK(profile_from_json(nlohmann::json::parse(slurp(dir / "bal.json"))).imbalance_ratio == 1.0);

    Dataset toy = quick_data();
    write_csv(toy, dir / "toy.csv");
    nlohmann::json config = {{"datasets", {(dir / "toy.csv").string()}},
                             {"methods", {"ERM", "GDRO", "ROS"}},
                             {"depth", 2},
                             {"width", 8},
                             {"max_epochs", 3},
                             {"folds", 5},
                             {"repetitions", 1},
                             {"output_dir", (dir / "out").string()}};
    std::ofstream(dir / "config.json") << config.dump();
    REQUIRE(run("run --config " + (dir / "config.json").string() + " 2> /dev/null") == 0);
    const auto records = dir / "out" / "records.jsonl";
    CHECK(read_records(records).size() == 15);
    REQUIRE(run("aggregate --records " + records.string() + " --out " + (dir / "agg.json").string()) == 0);
    const auto agg = nlohmann::json::parse(slurp(dir / "agg.json"));
    CHECK(agg.at("methods").size() == 3);
    REQUIRE(run("stats --records " + records.string() + " --metric all --out " + (dir / "stats").string() + " 2> /dev/null") != 0);

    config["datasets"] = {(dir / "toy.csv").string(), (dir / "balanced.csv").string()};
    config["output_dir"] = (dir / "out2").string();
    std::ofstream(dir / "config2.json") << config.dump();
    REQUIRE(run("run --config " + (dir / "config2.json").string() + " --workers 2 2> /dev/null") == 0);
    const auto records2 = dir / "out2" / "records.jsonl";
    REQUIRE(run("stats --records " + records2.string() + " --metric all --out " + (dir / "stats").string()) == 0);
    for (auto m : metric_names) CHECK(fs::exists(dir / "stats" / ("cd_" + std::string(m) + ".svg")));
    const auto report = nlohmann::json::parse(slurp(dir / "stats" / "stats_report.json"));
    CHECK(report.at("g_mean").at("pairwise").size() == 3);

    nlohmann::json bad = config;
    bad["unknown_key"] = 1;
    std::ofstream(dir / "bad.json") << bad.dump();
    CHECK(run("run --config " + (dir / "bad.json").string() + " 2> /dev/null") != 0);
}
