#include "imbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace imbench {

using nlohmann::json;

json profile_to_json(const DatasetProfile& p) {
    return {{"name", p.name},
            {"samples", p.samples},
            {"features", p.features},
            {"percent_majority", p.percent_majority},
            {"percent_minority", p.percent_minority},
            {"imbalance_ratio", p.imbalance_ratio},
            {"silhouette", p.silhouette}};
}

DatasetProfile profile_from_json(const json& j) {
    DatasetProfile p;
    p.name = j.at("name").get<std::string>();
    p.samples = j.at("samples").get<std::size_t>();
    p.features = j.at("features").get<std::size_t>();
    p.percent_majority = j.at("percent_majority").get<double>();
    p.percent_minority = j.at("percent_minority").get<double>();
    p.imbalance_ratio = j.at("imbalance_ratio").get<double>();
    p.silhouette = j.at("silhouette").get<double>();
    return p;
}

const MetricSummary* Aggregate::cell(const std::string& dataset, const std::string& method,
                                     const std::string& metric) const {
    const auto it = cells.find({dataset, method, metric});
    return it == cells.end() ? nullptr : &it->second;
}

namespace {

std::size_t method_order(const std::string& name) {
    try {
        const Method m = parse_method(name);
        return static_cast<std::size_t>(std::find(all_methods.begin(), all_methods.end(), m) - all_methods.begin());
    } catch (const std::invalid_argument&) {
        return all_methods.size();
    }
}

}  // namespace

Aggregate aggregate(std::span<const ExperimentRecord> records) {
    Aggregate agg;
    std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> values;
    std::set<std::string> datasets, methods;
    for (const auto& r : records) {
        if (!r.ok()) {
            ++agg.failed_records;
            continue;
        }
        datasets.insert(r.dataset);
        methods.insert(r.method);
        for (auto metric : metric_names) {
            values[{r.dataset, r.method, std::string(metric)}].push_back(metric_value(r.scores, metric));
        }
    }
    agg.datasets.assign(datasets.begin(), datasets.end());
    agg.methods.assign(methods.begin(), methods.end());
    std::stable_sort(agg.methods.begin(), agg.methods.end(), [](const std::string& a, const std::string& b) {
        return method_order(a) < method_order(b);
    });

    for (const auto& [key, v] : values) {
        MetricSummary s;
        s.n = v.size();
        double sum = 0.0;
        for (double x : v) sum += x;
        s.mean = sum / static_cast<double>(s.n);
        if (s.n > 1) {
            double ss = 0.0;
            for (double x : v) ss += (x - s.mean) * (x - s.mean);
            s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
        }
        agg.cells[key] = s;
    }

    for (auto metric_sv : metric_names) {
        const std::string metric(metric_sv);
        for (const auto& m : agg.methods) {
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& d : agg.datasets) {
                if (const auto* c = agg.cell(d, m, metric)) {
                    sum += c->mean;
                    ++n;
                }
            }
            if (n > 0) agg.overall[{m, metric}] = sum / static_cast<double>(n);
            agg.rank_first[{m, metric}] = 0;
        }
        for (const auto& d : agg.datasets) {
            double best = -INFINITY;
            for (const auto& m : agg.methods) {
                if (const auto* c = agg.cell(d, m, metric)) best = std::max(best, c->mean);
            }
            for (const auto& m : agg.methods) {
                const auto* c = agg.cell(d, m, metric);
                if (c && c->mean == best) ++agg.rank_first[{m, metric}];
            }
        }
    }
    return agg;
}

json aggregate_to_json(const Aggregate& agg) {
    json per_dataset = json::object();
    for (const auto& d : agg.datasets) {
        json methods = json::object();
        for (const auto& m : agg.methods) {
            json metrics = json::object();
            for (auto metric : metric_names) {
                if (const auto* c = agg.cell(d, m, std::string(metric))) {
                    metrics[std::string(metric)] = {{"mean", c->mean}, {"std", c->std}, {"n", c->n}};
                }
            }
            if (!metrics.empty()) methods[m] = std::move(metrics);
        }
        per_dataset[d] = std::move(methods);
    }
    json overall = json::object();
    for (auto metric_sv : metric_names) {
        const std::string metric(metric_sv);
        json row = json::object();
        for (const auto& m : agg.methods) {
            json e = {{"rank_first", agg.rank_first.at({m, metric})}};
            if (const auto it = agg.overall.find({m, metric}); it != agg.overall.end()) e["mean"] = it->second;
            row[m] = std::move(e);
        }
        overall[metric] = std::move(row);
    }
    return {{"datasets", agg.datasets},
            {"methods", agg.methods},
            {"per_dataset", per_dataset},
            {"overall", overall},
            {"failed_records", agg.failed_records}};
}

ScoreTable score_table(const Aggregate& agg, const std::string& metric) {
    if (std::find(metric_names.begin(), metric_names.end(), metric) == metric_names.end()) {
        throw std::invalid_argument("unknown metric '" + metric + "'");
    }
    ScoreTable t;
    t.methods = agg.methods;
    std::vector<double> values;
    for (const auto& d : agg.datasets) {
        std::vector<double> row;
        for (const auto& m : agg.methods) {
            if (const auto* c = agg.cell(d, m, metric)) row.push_back(c->mean);
        }
        if (row.size() != agg.methods.size()) continue;
        t.datasets.push_back(d);
        values.insert(values.end(), row.begin(), row.end());
    }
    t.scores = Matrix(t.datasets.size(), t.methods.size(), std::move(values));
    return t;
}

StatsReport stats_report(const Aggregate& agg, const std::string& metric, double alpha) {
    StatsReport r;
    r.metric = metric;
    r.alpha = alpha;
    r.table = score_table(agg, metric);
    r.table.validate();
    r.ranks = mean_ranks(r.table, true);
    r.friedman = friedman_test(r.ranks);
    r.pairwise = pairwise_wilcoxon_holm(r.table, alpha);
    r.cliques = cd_cliques(r.ranks, r.pairwise);
    r.svg = cd_diagram_svg(r.ranks, r.pairwise, metric);
    return r;
}

json stats_report_to_json(const StatsReport& r) {
    json mean_rank = json::object();
    for (std::size_t j = 0; j < r.ranks.methods.size(); ++j) mean_rank[r.ranks.methods[j]] = r.ranks.mean_ranks[j];
    json pairs = json::array();
    for (const auto& p : r.pairwise) {
        pairs.push_back({{"first", p.first},
                         {"second", p.second},
                         {"n", p.test.n},
                         {"w_plus", p.test.w_plus},
                         {"w_minus", p.test.w_minus},
                         {"statistic", p.test.statistic},
                         {"p_value", p.test.p_value},
                         {"exact", p.test.exact},
                         {"significant", p.significant}});
    }
    return {{"metric", r.metric},
            {"alpha", r.alpha},
            {"datasets", r.table.datasets},
            {"methods", r.table.methods},
            {"mean_ranks", mean_rank},
            {"friedman", {{"statistic", r.friedman.statistic}, {"p_value", r.friedman.p_value}, {"dof", r.friedman.dof}}},
            {"pairwise", pairs},
            {"cliques", r.cliques}};
}

}  // namespace imbench
