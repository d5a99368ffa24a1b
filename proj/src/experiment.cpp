#include "imbench/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "imbench/nn.hpp"
#include "imbench/objectives.hpp"

namespace imbench {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Records

json record_to_json(const ExperimentRecord& r) {
    json j = {
        {"v", record_schema_version},
        {"dataset", r.dataset},
        {"method", r.method},
        {"fold", r.fold},
        {"rep", r.repetition},
        {"seed", r.seed},
        {"depth", r.depth},
    };
    if (r.error) {
        j["error"] = *r.error;
    } else {
        j["scores"] = {
            {"f1", r.scores.f1},           {"g_mean", r.scores.g_mean},       {"pr_auc", r.scores.pr_auc},
            {"roc_auc", r.scores.roc_auc}, {"precision", r.scores.precision}, {"recall", r.scores.recall},
        };
        j["epochs"] = r.epochs;
        j["best_epoch"] = r.best_epoch;
    }
    j["wall_time_s"] = r.wall_time_s;
    return j;
}

ExperimentRecord record_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("record: expected a JSON object");
    const int v = j.at("v").get<int>();
    if (v != record_schema_version) throw std::invalid_argument("record: unsupported schema version " + std::to_string(v));
    ExperimentRecord r;
    r.dataset = j.at("dataset").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.fold = j.at("fold").get<std::size_t>();
    r.repetition = j.at("rep").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.depth = j.at("depth").get<std::size_t>();
    r.wall_time_s = j.value("wall_time_s", 0.0);
    if (j.contains("error")) {
        r.error = j.at("error").get<std::string>();
        return r;
    }
    const auto& s = j.at("scores");
    r.scores.f1 = s.at("f1").get<double>();
    r.scores.g_mean = s.at("g_mean").get<double>();
    r.scores.pr_auc = s.at("pr_auc").get<double>();
    r.scores.roc_auc = s.at("roc_auc").get<double>();
    r.scores.precision = s.at("precision").get<double>();
    r.scores.recall = s.at("recall").get<double>();
    r.epochs = j.value("epochs", std::size_t{0});
    r.best_epoch = j.value("best_epoch", std::size_t{0});
    return r;
}

std::vector<ExperimentRecord> read_records(const std::filesystem::path& path) {
    std::vector<ExperimentRecord> out;
    std::ifstream in(path);
    if (!in) return out;
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(record_from_json(json::parse(lines[i])));
        } catch (const std::exception& e) {
            if (i + 1 == lines.size()) break;  // torn tail from an interrupted append
            throw std::invalid_argument(path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

namespace {

// Drops a trailing partial line so new appends start on a fresh line.
void repair_tail(const std::filesystem::path& path) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec || size == 0) return;
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    if (content.back() == '\n') return;
    const auto last_nl = content.find_last_of('\n');
    std::filesystem::resize_file(path, last_nl == std::string::npos ? 0 : last_nl + 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// Seeds and fold planning

std::uint64_t split_seed(std::uint64_t master, const std::string& dataset, std::size_t repetition) {
    return hash_combine(hash_combine(hash_combine(master, hash_string("split")), hash_string(dataset)), repetition);
}

std::uint64_t job_seed(std::uint64_t master, const std::string& dataset, Method method, std::size_t repetition,
                       std::size_t fold) {
    std::uint64_t h = hash_combine(master, hash_string("job"));
    h = hash_combine(h, hash_string(dataset));
    h = hash_combine(h, hash_string(to_string(method)));
    h = hash_combine(h, repetition);
    return hash_combine(h, fold);
}

FoldPlan plan_fold(std::span<const int> labels, const FoldSplit& split, std::size_t fold, Method method,
                   const ExperimentConfig& config, Rng& rng) {
    FoldPlan plan;
    plan.test = split.folds.at(fold);
    plan.fit_partition = split.training_rows(fold);
    auto tv = train_val_split(plan.fit_partition, labels, config.validation_fraction, rng);
    plan.early_stop = std::move(tv.validation);
    plan.warnings = std::move(tv.warnings);

    const std::vector<int> fit_labels = take(std::vector<int>(labels.begin(), labels.end()), tv.train);
    auto remap = [&](const std::vector<std::size_t>& local) {
        std::vector<std::size_t> rows;
        rows.reserve(local.size());
        for (auto i : local) rows.push_back(tv.train[i]);
        return rows;
    };
    switch (method) {
        case Method::ros: plan.train = remap(random_oversample_indices(fit_labels, rng)); break;
        case Method::rus: plan.train = remap(random_undersample_indices(fit_labels, rng)); break;
        case Method::rusros: plan.train = remap(rus_ros_hybrid_indices(fit_labels, rng)); break;
        case Method::cost:
            plan.class_weights = cost_weights(ClassCounts::from_labels(fit_labels), config.cost_normalization);
            plan.train = tv.train;
            break;
        case Method::erm:
        case Method::gdro: plan.train = tv.train; break;
    }
    return plan;
}

ExperimentRecord run_job(const Dataset& data, const FoldSplit& split, const JobSpec& job,
                         const ExperimentConfig& config) {
    return run_job(data, split, job, config, job_seed(config.seed, data.name, job.method, job.repetition, job.fold));
}

ExperimentRecord run_job(const Dataset& data, const FoldSplit& split, const JobSpec& job,
                         const ExperimentConfig& config, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentRecord rec;
    rec.dataset = data.name;
    rec.method = std::string(to_string(job.method));
    rec.fold = job.fold;
    rec.repetition = job.repetition;
    rec.seed = seed;
    rec.depth = job.depth;
    try {
        Rng plan_rng(hash_combine(seed, 0));
        const FoldPlan plan = plan_fold(data.labels, split, job.fold, job.method, config, plan_rng);
        const auto scaler = Standardizer::fit(take_rows(data.features, plan.fit_partition));
        const Matrix train_x = scaler.apply(take_rows(data.features, plan.train));
        const Matrix val_x = scaler.apply(take_rows(data.features, plan.early_stop));
        const Matrix test_x = scaler.apply(take_rows(data.features, plan.test));
        const auto train_y = take(data.labels, plan.train);
        const auto val_y = take(data.labels, plan.early_stop);
        const auto test_y = take(data.labels, plan.test);

        MlpSpec spec;
        spec.input_width = data.dimension();
        spec.width = config.width;
        spec.depth = job.depth;
        spec.dropout = config.dropout;
        Rng init_rng(hash_combine(seed, 1));
        Mlp model(spec, init_rng);

        TrainConfig tc;
        tc.objective = objective_for(job.method);
        tc.max_epochs = config.max_epochs;
        tc.batch_size = job.batch_size;
        tc.learning_rate = config.learning_rate;
        tc.patience = config.patience;
        tc.class_weights = plan.class_weights;
        tc.seed = hash_combine(seed, 2);
        const auto report = train(model, train_x, train_y, val_x, val_y, tc);

        rec.scores = evaluate(predict_proba(model, test_x), test_y);
        rec.epochs = report.epochs_run;
        rec.best_epoch = report.best_epoch;
    } catch (const std::exception& e) {
        rec.error = e.what();
    }
    rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

// ---------------------------------------------------------------------------
// Tuning

json tune_report_to_json(const TuneReport& r) {
    json depths = json::array();
    for (const auto& [d, auc] : r.depth_auc) depths.push_back({{"depth", d}, {"mean_roc_auc", auc}});
    return {{"dataset", r.dataset}, {"depths", depths}, {"selected_depth", r.selected_depth}};
}

TuneReport tune_architecture(const Dataset& data, const ExperimentConfig& config) {
    const std::uint64_t tune_seed =
        hash_combine(hash_combine(config.seed, hash_string("tune")), hash_string(data.name));
    Rng rng(tune_seed);

    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    if (config.tune_fraction < 1.0) {
        rows = train_val_split(rows, data.labels, 1.0 - config.tune_fraction, rng).train;
    }
    const auto sub_labels = take(data.labels, rows);
    FoldSplit local;
    try {
        local = stratified_kfold(sub_labels, config.tune_folds, rng);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("dataset '" + data.name + "' is too small for " +
                                    std::to_string(config.tune_folds) + "-fold tuning: " + e.what());
    }
    FoldSplit split;
    for (const auto& f : local.folds) {
        std::vector<std::size_t> mapped;
        for (auto i : f) mapped.push_back(rows[i]);
        split.folds.push_back(std::move(mapped));
    }

    auto depths = config.tune_depths;
    std::sort(depths.begin(), depths.end());
    depths.erase(std::unique(depths.begin(), depths.end()), depths.end());

    TuneReport report;
    report.dataset = data.name;
    double best = -1.0;
    for (auto depth : depths) {
        double sum = 0.0;
        for (std::size_t f = 0; f < split.k(); ++f) {
            JobSpec job{Method::erm, f, 0, depth, batch_size_for(config, data.size())};
            const auto rec = run_job(data, split, job, config, hash_combine(hash_combine(tune_seed, depth), f));
            if (!rec.ok()) throw std::runtime_error("tuning job failed for depth " + std::to_string(depth) + ": " + *rec.error);
            sum += rec.scores.roc_auc;
        }
        const double mean = sum / static_cast<double>(split.k());
        report.depth_auc.emplace_back(depth, mean);
        if (mean > best) {
            best = mean;
            report.selected_depth = depth;
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Runner

std::vector<Dataset> load_config_datasets(const ExperimentConfig& config) {
    std::vector<Dataset> out;
    for (const auto& entry : config.datasets) {
        if (entry.label_column || entry.positive_label) {
            ColumnRef column = entry.label_column ? ColumnRef{*entry.label_column} : ColumnRef{std::size_t{0}};
            if (!entry.label_column) {
                // last column
                std::ifstream in(entry.path);
                std::string header;
                std::getline(in, header);
                column = std::size_t(std::count(header.begin(), header.end(), ','));
            }
            out.push_back(load_csv(entry.path, column, entry.positive_label));
        } else {
            out.push_back(load_dataset(entry.path));
        }
    }
    std::set<std::string> names;
    for (const auto& d : out) {
        if (!names.insert(d.name).second) throw std::invalid_argument("duplicate dataset name '" + d.name + "'");
    }
    return out;
}

RunSummary run_experiment(const ExperimentConfig& config, std::span<const Dataset> datasets,
                          const RunOptions& options) {
    config.validate();
    auto log = [&](const std::string& msg) {
        if (options.log) options.log(msg);
    };

    std::set<ExperimentRecord::Key> done;
    if (std::filesystem::exists(options.records_path)) {
        repair_tail(options.records_path);
        for (const auto& r : read_records(options.records_path)) {
            if (r.ok()) done.insert(r.key());
        }
    } else if (options.records_path.has_parent_path()) {
        std::filesystem::create_directories(options.records_path.parent_path());
    }

    struct Pending {
        std::size_t dataset;
        JobSpec job;
    };
    RunSummary summary;
    std::vector<Pending> pending;
    std::vector<std::vector<FoldSplit>> splits(datasets.size());
    const bool per_dataset_overrides = config.datasets.size() == datasets.size();

    for (std::size_t d = 0; d < datasets.size(); ++d) {
        const Dataset& data = datasets[d];
        std::vector<Pending> mine;
        for (Method m : config.methods) {
            for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
                for (std::size_t f = 0; f < config.folds; ++f) {
                    ++summary.total_jobs;
                    if (done.count({data.name, std::string(to_string(m)), f, rep})) {
                        ++summary.skipped;
                        continue;
                    }
                    mine.push_back({d, JobSpec{m, f, rep, 0, 0}});
                }
            }
        }
        if (mine.empty()) continue;

        std::size_t depth = 0;
        if (config.depth) {
            depth = *config.depth;
        } else {
            log("tuning depth for " + data.name);
            auto tr = tune_architecture(data, config);
            depth = tr.selected_depth;
            log("selected depth " + std::to_string(depth) + " for " + data.name);
            summary.tuning.push_back(std::move(tr));
        }
        const std::size_t batch =
            batch_size_for(config, data.size(), per_dataset_overrides ? config.datasets[d].batch_size : std::nullopt);
        splits[d].resize(config.repetitions);
        for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
            Rng rng(split_seed(config.seed, data.name, rep));
            splits[d][rep] = stratified_kfold(data.labels, config.folds, rng);
        }
        for (auto& p : mine) {
            p.job.depth = depth;
            p.job.batch_size = batch;
            pending.push_back(p);
        }
    }

    std::ofstream sink(options.records_path, std::ios::app);
    if (!sink) throw std::runtime_error("cannot open record file " + options.records_path.string());
    std::mutex sink_mutex;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};

    auto worker = [&] {
        while (!stop.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= pending.size()) return;
            const auto& p = pending[i];
            const auto rec = run_job(datasets[p.dataset], splits[p.dataset][p.job.repetition], p.job, config);
            std::lock_guard lock(sink_mutex);
            if (stop.load()) return;
            sink << record_to_json(rec).dump() << '\n';
            sink.flush();
            if (rec.ok()) {
                ++summary.completed;
            } else {
                ++summary.failed;
                log("job failed: " + rec.dataset + "/" + rec.method + " fold " + std::to_string(rec.fold) + " rep " +
                    std::to_string(rec.repetition) + ": " + *rec.error);
            }
            if (options.stop_after > 0 && summary.completed + summary.failed >= options.stop_after) {
                stop.store(true);
                summary.interrupted = summary.completed + summary.failed < pending.size();
            }
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, options.workers.value_or(effective_workers(config)));
    if (workers == 1 || pending.size() <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < std::min(workers, pending.size()); ++w) pool.emplace_back(worker);
    }
    return summary;
}

}  // namespace imbench
