#include "imbench/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace imbench {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (methods.empty()) throw std::invalid_argument("config: no methods selected");
    if (repetitions < 1) throw std::invalid_argument("config: repetitions must be >= 1");
    if (folds < 2) throw std::invalid_argument("config: folds must be >= 2");
    if (depth && *depth > 64) throw std::invalid_argument("config: depth is unreasonably large");
    if (width < 1) throw std::invalid_argument("config: width must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("config: dropout must be in [0, 1)");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("config: learning_rate must be positive");
    if (patience < 1) throw std::invalid_argument("config: patience must be >= 1");
    if (max_epochs < 1) throw std::invalid_argument("config: max_epochs must be >= 1");
    if (batch_divisor < 1) throw std::invalid_argument("config: batch_divisor must be >= 1");
    if (batch_min < 2 || batch_max < batch_min) throw std::invalid_argument("config: need 2 <= batch_min <= batch_max");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
        throw std::invalid_argument("config: validation_fraction must be in (0, 1)");
    }
    if (!(tune_fraction > 0.0 && tune_fraction <= 1.0)) throw std::invalid_argument("config: tune_fraction must be in (0, 1]");
    if (tune_folds < 2) throw std::invalid_argument("config: tune_folds must be >= 2");
    if (tune_depths.empty()) throw std::invalid_argument("config: tune_depths is empty");
    if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    for (const auto& d : datasets) {
        if (d.batch_size && *d.batch_size < 2) throw std::invalid_argument("config: dataset batch_size must be >= 2");
    }
}

namespace {

template <typename T>
T get_as(const json& v, const std::string& key) {
    try {
        if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
                throw std::invalid_argument("expected a non-negative integer");
            }
        } else if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) throw std::invalid_argument("expected a number");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw std::invalid_argument("expected a string");
        }
        return v.get<T>();
    } catch (const std::exception& e) {
        throw std::invalid_argument("config: key '" + key + "': " + e.what());
    }
}

DatasetEntry dataset_from_json(const json& v) {
    if (v.is_string()) return DatasetEntry{v.get<std::string>(), {}, {}, {}};
    if (!v.is_object()) throw std::invalid_argument("config: each dataset must be a path or an object");
    DatasetEntry d;
    bool has_path = false;
    for (const auto& [key, value] : v.items()) {
        if (key == "path") {
            d.path = get_as<std::string>(value, "datasets.path");
            has_path = true;
        } else if (key == "batch_size") {
            d.batch_size = get_as<std::size_t>(value, "datasets.batch_size");
        } else if (key == "label_column") {
            d.label_column = get_as<std::string>(value, "datasets.label_column");
        } else if (key == "positive_label") {
            d.positive_label = get_as<std::string>(value, "datasets.positive_label");
        } else {
            throw std::invalid_argument("config: unknown dataset key '" + key + "'");
        }
    }
    if (!has_path) throw std::invalid_argument("config: dataset entry without 'path'");
    return d;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
    ExperimentConfig c;
    for (const auto& [key, v] : j.items()) {
        if (key == "datasets") {
            if (!v.is_array()) throw std::invalid_argument("config: 'datasets' must be an array");
            c.datasets.clear();
            for (const auto& d : v) c.datasets.push_back(dataset_from_json(d));
        } else if (key == "methods") {
            if (!v.is_array()) throw std::invalid_argument("config: 'methods' must be an array");
            c.methods.clear();
            for (const auto& m : v) c.methods.push_back(parse_method(get_as<std::string>(m, "methods")));
        } else if (key == "depth") {
            if (v.is_string()) {
                if (v.get<std::string>() != "tune") throw std::invalid_argument("config: depth must be an integer or \"tune\"");
                c.depth.reset();
            } else {
                c.depth = get_as<std::size_t>(v, key);
            }
        } else if (key == "width") c.width = get_as<std::size_t>(v, key);
        else if (key == "dropout") c.dropout = get_as<double>(v, key);
        else if (key == "learning_rate") c.learning_rate = get_as<double>(v, key);
        else if (key == "patience") c.patience = get_as<std::size_t>(v, key);
        else if (key == "max_epochs") c.max_epochs = get_as<std::size_t>(v, key);
        else if (key == "folds") c.folds = get_as<std::size_t>(v, key);
        else if (key == "repetitions") c.repetitions = get_as<std::size_t>(v, key);
        else if (key == "batch_divisor") c.batch_divisor = get_as<std::size_t>(v, key);
        else if (key == "batch_min") c.batch_min = get_as<std::size_t>(v, key);
        else if (key == "batch_max") c.batch_max = get_as<std::size_t>(v, key);
        else if (key == "validation_fraction") c.validation_fraction = get_as<double>(v, key);
        else if (key == "cost_normalization") {
            const auto s = get_as<std::string>(v, key);
            if (s == "mean_one") c.cost_normalization = CostNormalization::mean_one;
            else if (s == "raw_inverse") c.cost_normalization = CostNormalization::raw_inverse;
            else throw std::invalid_argument("config: cost_normalization must be \"mean_one\" or \"raw_inverse\"");
        } else if (key == "seed") c.seed = get_as<std::uint64_t>(v, key);
        else if (key == "output_dir") c.output_dir = get_as<std::string>(v, key);
        else if (key == "workers") c.workers = get_as<std::size_t>(v, key);
        else if (key == "tune_fraction") c.tune_fraction = get_as<double>(v, key);
        else if (key == "tune_folds") c.tune_folds = get_as<std::size_t>(v, key);
        else if (key == "tune_depths") {
            if (!v.is_array()) throw std::invalid_argument("config: 'tune_depths' must be an array");
            c.tune_depths.clear();
            for (const auto& d : v) c.tune_depths.push_back(get_as<std::size_t>(d, key));
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }
    c.validate();
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json datasets = json::array();
    for (const auto& d : c.datasets) {
        json e = {{"path", d.path}};
        if (d.batch_size) e["batch_size"] = *d.batch_size;
        if (d.label_column) e["label_column"] = *d.label_column;
        if (d.positive_label) e["positive_label"] = *d.positive_label;
        datasets.push_back(std::move(e));
    }
    json methods = json::array();
    for (auto m : c.methods) methods.push_back(std::string(to_string(m)));
    return json{
        {"datasets", datasets},
        {"methods", methods},
        {"depth", c.depth ? json(*c.depth) : json("tune")},
        {"width", c.width},
        {"dropout", c.dropout},
        {"learning_rate", c.learning_rate},
        {"patience", c.patience},
        {"max_epochs", c.max_epochs},
        {"folds", c.folds},
        {"repetitions", c.repetitions},
        {"batch_divisor", c.batch_divisor},
        {"batch_min", c.batch_min},
        {"batch_max", c.batch_max},
        {"validation_fraction", c.validation_fraction},
        {"cost_normalization", c.cost_normalization == CostNormalization::mean_one ? "mean_one" : "raw_inverse"},
        {"seed", c.seed},
        {"output_dir", c.output_dir},
        {"workers", c.workers},
        {"tune_fraction", c.tune_fraction},
        {"tune_folds", c.tune_folds},
        {"tune_depths", c.tune_depths},
    };
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

std::size_t batch_size_for(const ExperimentConfig& c, std::size_t n_samples, std::optional<std::size_t> override_size) {
    if (override_size) return *override_size;
    const std::size_t rule = (n_samples + c.batch_divisor - 1) / c.batch_divisor;
    return std::clamp(rule, c.batch_min, c.batch_max);
}

std::size_t effective_workers(const ExperimentConfig& c) {
    if (const char* env = std::getenv("IMBENCH_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
    }
    return c.workers;
}

}  // namespace imbench
