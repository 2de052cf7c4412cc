#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "pdm/model.hpp"

namespace pdm {

/// Per-operation attribute values for one case, indexed by graph operation.
struct OpAttributes {
    double cost = 0.0;
    double time = 0.0;
    double fail_prob = 0.0;
};

/// Attribute table taken straight from the model (artificial operations are zero).
std::vector<OpAttributes> default_attributes(const NormalizedGraph &graph);

enum class WeightKind { cost, time, fail_prob, hop, normalized_combo };

std::string_view to_string(WeightKind kind);

/// Edge weights for shortest-path searches. Artificial operations always weigh 0.
/// `normalized_combo` is cost/max_cost + time/max_time over real operations,
/// with a zero maximum contributing 0.
std::vector<double> operation_weights(const NormalizedGraph &graph, std::span<const OpAttributes> attrs,
                                      WeightKind kind);

class NoPathError : public Error {
  public:
    using Error::Error;
};

struct RootPath {
    std::vector<OpIndex> ops;
    double total_weight = 0.0;
};

/// Single-target shortest paths toward the root over the normalized graph.
/// The successor of each element is the consumer minimizing
/// (weight + remaining distance, canonical index).
class RootDistances {
  public:
    RootDistances() = default;
    RootDistances(const NormalizedGraph &graph, std::vector<double> weights);

    bool reaches_root(OpIndex op) const;
    /// Weight of the best path starting with `op` (inclusive); +inf when the root is unreachable.
    double op_distance(OpIndex op) const;
    double element_distance(ElementIndex e) const { return distance_[e]; }
    RootPath path_from(OpIndex op) const;

  private:
    const NormalizedGraph *graph_ = nullptr;
    std::vector<double> weights_;
    std::vector<double> distance_;
    std::vector<OpIndex> next_;
};

RootPath shortest_root_path(const NormalizedGraph &graph, OpIndex op, WeightKind kind,
                            std::span<const OpAttributes> attrs);
RootPath shortest_root_path(const NormalizedGraph &graph, OpIndex op, WeightKind kind);

struct ProbabilityPath {
    RootPath path;
    double success_product = 1.0;
};

/// Root path minimizing the plain sum of failure probabilities, together with
/// the product of success probabilities along it.
ProbabilityPath rank_probability_path(const NormalizedGraph &graph, OpIndex op, std::span<const OpAttributes> attrs);
ProbabilityPath rank_probability_path(const NormalizedGraph &graph, OpIndex op);

/// Elements producible using only the operations flagged in `usable`
/// (indexed by graph operation).
std::vector<bool> producible_elements(const NormalizedGraph &graph, const std::vector<bool> &usable);
bool root_producible_with(const NormalizedGraph &graph, const std::vector<bool> &usable);

struct CompletePathSet {
    std::vector<std::size_t> ops; // model operation indices, ascending
    double total_cost = 0.0;
    double total_time = 0.0;
};

class CapExceededError : public Error {
  public:
    using Error::Error;
};

inline constexpr std::size_t default_enumeration_cap = 1'000'000;

/// Exhaustive minimal complete-path enumeration. Sets are ordered by the
/// ascending list of their operation indices.
std::vector<CompletePathSet> enumerate_complete_paths(const ProductDataModel &model,
                                                      std::size_t cap = default_enumeration_cap);

/// `ops;total_cost;total_time` rows, operations joined with ','.
void write_complete_paths_csv(std::ostream &out, const ProductDataModel &model,
                              std::span<const CompletePathSet> sets);

/// Execution-state knowledge used to detect operations that can no longer help
/// produce the root.
struct LivenessState {
    std::vector<bool> executed;    // per operation
    std::vector<bool> failed;      // per operation
    std::vector<bool> dead;        // per element: no live producer remains
    std::vector<bool> useless;     // per element: every remaining use is blocked
    std::vector<bool> meaningless; // per operation, unexecuted only

    static LivenessState initial(const NormalizedGraph &graph);

    std::vector<OpIndex> failed_ops() const;
    std::vector<OpIndex> executed_ops() const;
    std::vector<ElementIndex> dead_elements() const;
    std::vector<OpIndex> meaningless_ops() const;
};

/// Records `op` as executed and recomputes dead elements and meaningless
/// operations from scratch.
///
/// An element is dead when every producer has failed or has a dead input.
/// Element B becomes useless when, for some dead element A that is the output
/// of a failed operation, (1) an unexecuted operation consumes both A and B and
/// (2) no operation at all consumes B without A. Consumers that already ran
/// count in (2), so a marked operation is never part of a complete set that
/// can still succeed. Uselessness propagates: an element whose consumers all
/// produce useless elements is useless too. The root is never useless. Unexecuted operations producing a
/// useless element, or consuming a dead one, are meaningless.
LivenessState update_liveness(LivenessState state, const NormalizedGraph &graph, OpIndex op, bool success);

/// Failure-only form: `newly_failed` was just executed unsuccessfully.
LivenessState update_liveness(LivenessState state, const NormalizedGraph &graph, OpIndex newly_failed);

/// In-place recomputation of the derived fields of `state`.
void recompute_liveness(LivenessState &state, const NormalizedGraph &graph);

/// Elements whose (non-empty) sets of consuming operations coincide.
struct InterdependenceGroups {
    std::vector<std::size_t> group_of;            // per element
    std::vector<std::vector<ElementIndex>> groups; // ordered by first member
};

InterdependenceGroups interdependent_groups(const NormalizedGraph &graph);

/// Sum over the group partners of `element` of their remaining production
/// weight: 0 for partners already produced, otherwise the minimum direct
/// weight among their non-failed producers (+inf when none remain).
double group_surcharge(const NormalizedGraph &graph, const InterdependenceGroups &groups, ElementIndex element,
                       std::span<const double> weights, const LivenessState &state,
                       const std::vector<bool> &produced);

} // namespace pdm
