#pragma once

// Aggregation of experiment records into per-dataset summaries, and the
// cross-dataset statistical report built on top of them.

#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "imbench/experiment.hpp"
#include "imbench/stats.hpp"

namespace imbench {

nlohmann::json profile_to_json(const DatasetProfile& p);
DatasetProfile profile_from_json(const nlohmann::json& j);

struct MetricSummary {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation; 0 for a single record
    std::size_t n = 0;
};

struct Aggregate {
    std::vector<std::string> datasets;  // sorted
    std::vector<std::string> methods;   // canonical method order
    // (dataset, method, metric)
    std::map<std::tuple<std::string, std::string, std::string>, MetricSummary> cells;
    // (method, metric): mean of the per-dataset means
    std::map<std::pair<std::string, std::string>, double> overall;
    // (method, metric): datasets where the method's mean is the maximum, ties credit all
    std::map<std::pair<std::string, std::string>, std::size_t> rank_first;
    std::size_t failed_records = 0;

    const MetricSummary* cell(const std::string& dataset, const std::string& method, const std::string& metric) const;
};

/// Failed records are counted but excluded from every statistic.
Aggregate aggregate(std::span<const ExperimentRecord> records);
nlohmann::json aggregate_to_json(const Aggregate& agg);

/// Per-dataset means of one metric, restricted to datasets where every method
/// has results.
ScoreTable score_table(const Aggregate& agg, const std::string& metric);

struct StatsReport {
    std::string metric;
    double alpha = 0.05;
    ScoreTable table;
    RankMatrix ranks;
    FriedmanResult friedman;
    std::vector<PairwiseResult> pairwise;
    std::vector<std::vector<std::string>> cliques;
    std::string svg;
};

StatsReport stats_report(const Aggregate& agg, const std::string& metric, double alpha = 0.05);
nlohmann::json stats_report_to_json(const StatsReport& r);

}  // namespace imbench
