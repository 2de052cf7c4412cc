#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "pdm/model.hpp"
#include "pdm/paths.hpp"
#include "pdm/planners.hpp"

namespace pdm {

enum class SettingKind { gaussian, uniform };

std::string_view to_string(SettingKind kind);

struct SettingConfig {
    SettingKind kind = SettingKind::gaussian;
    /// Standard deviation as a fraction of each attribute's table value (gaussian only).
    double sigma_fraction = 0.33;
    std::size_t cases = 10000;
    std::uint64_t master_seed = 0;
};

/// One case: sampled attributes and a fixed outcome for every operation.
struct Instance {
    std::vector<OpAttributes> attrs;
    std::vector<bool> outcomes;
    std::size_t index = 0;
    std::uint64_t seed = 0;

    /// Stream reserved for the random planner, independent of attribute draws.
    std::mt19937_64 planner_stream() const;
};

/// Draws attributes for each real operation in canonical order (cost, time,
/// probability), then one outcome per real operation. Gaussian draws are
/// clamped: cost and time at 0, probabilities to [0, 1]. The uniform setting
/// draws integer cost and time in [0, 10] and probability in [0, 1].
Instance sample_instance(const NormalizedGraph &graph, const SettingConfig &setting, std::uint64_t master_seed,
                         std::size_t index);

/// Table attributes with the given outcomes (artificial operations always succeed).
Instance fixed_instance(const NormalizedGraph &graph, std::vector<bool> outcomes);

enum class TraceStatus { root_produced, exhausted, early_terminated };

std::string_view to_string(TraceStatus status);

struct TraceStep {
    OpIndex op = 0;
    bool success = false;
    double cum_cost = 0.0;
    double cum_time = 0.0;
};

struct ExecutionTrace {
    std::vector<TraceStep> steps; // real operations only
    TraceStatus status = TraceStatus::exhausted;
    /// Sums over executed operations in canonical order, so equal operation
    /// sets give bit-identical totals regardless of execution order.
    double total_cost = 0.0;
    double total_time = 0.0;
};

ExecutionTrace execute(const PlannerModel &model, PlannerKind planner, const Instance &instance,
                       const PlanningContext &context);
ExecutionTrace execute(const NormalizedGraph &graph, PlannerKind planner, const Instance &instance);

/// True iff the root can be produced using only operations that succeed in this case.
bool root_producible(const NormalizedGraph &graph, const Instance &instance);

/// `instance;planner;step;op;success;cum_cost;cum_time;status` rows.
void write_trace_csv_header(std::ostream &out);
void write_trace_csv(std::ostream &out, const NormalizedGraph &graph, std::size_t instance, PlannerKind planner,
                     const ExecutionTrace &trace);

} // namespace pdm
