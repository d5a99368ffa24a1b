#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "imbench/config.hpp"
#include "imbench/data.hpp"
#include "imbench/experiment.hpp"
#include "imbench/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace imbench;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

int cmd_inspect(const std::string& path, bool as_json) {
    const auto data = load_dataset(path);
    const auto p = profile_dataset(data);
    if (as_json) {
        std::cout << profile_to_json(p).dump(2) << '\n';
        return 0;
    }
    std::printf("dataset     %s\n", p.name.c_str());
    std::printf("N           %zu\n", p.samples);
    std::printf("d           %zu\n", p.features);
    std::printf("majority %%  %.2f\n", p.percent_majority);
    std::printf("minority %%  %.2f\n", p.percent_minority);
    std::printf("IR          %.2f\n", p.imbalance_ratio);
    std::printf("S.Coeff     %.4f\n", p.silhouette);
    return 0;
}

int cmd_tune(const std::string& path, const std::string& config_path) {
    ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    const auto report = tune_architecture(load_dataset(path), config);
    std::cout << tune_report_to_json(report).dump(2) << '\n';
    return 0;
}

int cmd_run(const std::string& config_path, std::optional<std::size_t> workers) {
    const auto config = load_config(config_path);
    const auto datasets = load_config_datasets(config);
    RunOptions opts;
    opts.records_path = fs::path(config.output_dir) / "records.jsonl";
    opts.workers = workers;
    opts.log = [](const std::string& msg) { std::cerr << msg << '\n'; };
    const auto summary = run_experiment(config, datasets, opts);
    if (!summary.tuning.empty()) {
        json t = json::array();
        for (const auto& r : summary.tuning) t.push_back(tune_report_to_json(r));
        write_text(fs::path(config.output_dir) / "tuning.json", t.dump(2) + "\n");
    }
    std::cerr << "jobs " << summary.total_jobs << ", skipped " << summary.skipped << ", completed "
              << summary.completed << ", failed " << summary.failed << '\n';
    return summary.failed > 0 ? 1 : 0;
}

int cmd_aggregate(const std::string& records, const std::string& out) {
    const auto recs = read_records(records);
    const auto text = aggregate_to_json(aggregate(recs)).dump(2) + "\n";
    if (out.empty()) std::cout << text;
    else write_text(out, text);
    return 0;
}

int cmd_stats(const std::string& records, std::vector<std::string> metrics, const std::string& out, double alpha) {
    const auto agg = aggregate(read_records(records));
    if (metrics.size() == 1 && metrics[0] == "all") metrics.assign(metric_names.begin(), metric_names.end());
    json report = json::object();
    for (const auto& metric : metrics) {
        const auto r = stats_report(agg, metric, alpha);
        report[metric] = stats_report_to_json(r);
        write_text(fs::path(out) / ("cd_" + metric + ".svg"), r.svg);
    }
    write_text(fs::path(out) / "stats_report.json", report.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Benchmark harness for class-imbalance methods on tabular data"};
    app.require_subcommand(1);

    std::string data_path, config_path, records, out;
    bool as_json = false;
    std::optional<std::size_t> workers;
    std::vector<std::string> metrics{"g_mean"};
    double alpha = 0.05;

    auto* inspect = app.add_subcommand("inspect", "Print a dataset profile");
    inspect->add_option("data", data_path, "KEEL .dat or CSV file")->required()->check(CLI::ExistingFile);
    inspect->add_flag("--json", as_json, "Emit JSON");

    auto* tune = app.add_subcommand("tune", "Select the network depth by cross-validated ROC-AUC");
    tune->add_option("data", data_path)->required()->check(CLI::ExistingFile);
    tune->add_option("--config", config_path)->check(CLI::ExistingFile);

    auto* run = app.add_subcommand("run", "Run the experiment matrix, resuming from existing records");
    run->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
    run->add_option("--workers", workers)->check(CLI::PositiveNumber);

    auto* agg = app.add_subcommand("aggregate", "Summarise records per dataset and method");
    agg->add_option("--records", records)->required()->check(CLI::ExistingFile);
    agg->add_option("--out", out, "Output JSON (default: stdout)");

    auto* stats = app.add_subcommand("stats", "Friedman, pairwise Wilcoxon/Holm and CD diagrams");
    stats->add_option("--records", records)->required()->check(CLI::ExistingFile);
    stats->add_option("--metric", metrics, "Metric name(s), or 'all'");
    stats->add_option("--out", out)->required();
    stats->add_option("--alpha", alpha)->check(CLI::Range(0.0, 1.0));

    CLI11_PARSE(app, argc, argv);
    try {
        if (*inspect) return cmd_inspect(data_path, as_json);
        if (*tune) return cmd_tune(data_path, config_path);
        if (*run) return cmd_run(config_path, workers);
        if (*agg) return cmd_aggregate(records, out);
        if (*stats) return cmd_stats(records, metrics, out, alpha);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
