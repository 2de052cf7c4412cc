#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pdm/model.hpp"
#include "pdm/paths.hpp"
#include "pdm/planners.hpp"
#include "pdm/simulator.hpp"

namespace pdm {

/// A model plus the metadata the experiment harness needs to sample it.
struct ModelSpec {
    std::string name;
    ProductDataModel model;
    /// Gaussian standard deviation as a fraction of the table value.
    double sigma_fraction = 0.33;
    /// True when the table carries no durations and time was defaulted to cost.
    bool time_defaulted = false;
};

std::span<const std::string_view> builtin_names();

/// mortgage, social_insurance or monitoring.
ModelSpec builtin_pdm(std::string_view name);

/// Accepts `builtin:NAME`, a bare builtin name, or a path to a model file.
ModelSpec resolve_model(std::string_view reference);

struct NormalizedMeans {
    std::vector<double> means; // per planner
    std::size_t instances = 0; // instances that contributed
};

/// `values[i][p]` is planner p's value on instance i. Each value is divided by
/// the instance minimum and averaged. Instances whose minimum is 0 have no
/// defined ratio and are skipped.
NormalizedMeans normalized_performance(const std::vector<std::vector<double>> &values);

/// Percentage of `total_cases` in which each planner attained the instance
/// minimum (ties credit every tied planner).
std::vector<double> best_case_shares(const std::vector<std::vector<double>> &values, std::size_t total_cases);

/// Cheapest complete set whose operations all succeed in `instance`.
std::optional<double> optimal_cost(std::span<const CompletePathSet> sets, const Instance &instance);

/// Mean of planner cost over optimal cost across instances where the root is
/// producible and the optimal cost is positive.
double deviation_from_optimal(const ProductDataModel &model, std::span<const Instance> instances,
                              PlannerKind planner, std::size_t cap = default_enumeration_cap);

/// Raw per-case outcomes for one model.
struct ModelRun {
    std::string name;
    double sigma_fraction = 0.0;
    bool time_defaulted = false;
    std::size_t cases = 0;
    std::vector<bool> producible;            // per case
    std::vector<std::vector<double>> cost;   // [case][planner]
    std::vector<std::vector<double>> time;   // [case][planner]
    std::vector<std::vector<TraceStatus>> status;
    bool optimal_available = false;
    std::vector<std::optional<double>> optimal; // per case
    std::vector<double> wall_seconds;        // per planner, summed over cases
};

struct MetricRow {
    std::string planner;
    std::string model;
    std::string metric;
    double value = 0.0;
};

struct Report {
    SettingConfig setting;
    std::vector<PlannerKind> planners;
    std::vector<ModelRun> runs;
    std::vector<MetricRow> rows;

    std::optional<double> value(std::string_view planner, std::string_view model, std::string_view metric) const;
};

struct ExperimentOptions {
    unsigned threads = 1;
    /// When set, every trace is written here in case order.
    std::ostream *traces = nullptr;
    std::size_t enumeration_cap = 4096;
};

/// Runs every planner on `setting.cases` sampled cases of every model. For
/// models whose complete sets enumerate within the cap, the optimal cost of
/// each case is computed too.
Report run_experiment(const std::vector<ModelSpec> &models, const SettingConfig &setting,
                      std::span<const PlannerKind> planners, const ExperimentOptions &options = {});

/// Derives the metric rows of `report.rows` from `report.runs`.
void compute_metrics(Report &report);

/// `planner;model;metric;value` with `#` header lines. Contains no timing data.
void write_report_csv(std::ostream &out, const Report &report);

/// Human-readable summary, including wall time per case.
void print_report_table(std::ostream &out, const Report &report);

} // namespace pdm
