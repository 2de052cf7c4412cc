#pragma once

#include <array>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "pdm/model.hpp"
#include "pdm/paths.hpp"

namespace pdm {

enum class PlannerKind {
    random,
    lowest_cost,
    shortest_time,
    lowest_fail_prob,
    root_distance,
    remaining_cost,
    remaining_time,
    rank_cost,
    rank_time,
    rank_combo,
    rank_ext_cost,
    rank_ext_time,
    rank_ext_combo,
};

inline constexpr std::array<PlannerKind, 13> all_planners = {
    PlannerKind::random,         PlannerKind::lowest_cost,   PlannerKind::shortest_time,
    PlannerKind::lowest_fail_prob, PlannerKind::root_distance, PlannerKind::remaining_cost,
    PlannerKind::remaining_time, PlannerKind::rank_cost,     PlannerKind::rank_time,
    PlannerKind::rank_combo,     PlannerKind::rank_ext_cost, PlannerKind::rank_ext_time,
    PlannerKind::rank_ext_combo,
};

std::string_view to_string(PlannerKind kind);
std::optional<PlannerKind> parse_planner_kind(std::string_view name);

bool is_rank(PlannerKind kind);
bool is_extended(PlannerKind kind);
/// rank_ext_X -> rank_X; every other kind maps to itself.
PlannerKind base_variant(PlannerKind kind);

enum class RankVariant { cost, time, combo };

enum class Objective { maximize, minimize };

/// Selection key: primary value, then secondary value, then canonical order
/// (lower index wins).
struct Score {
    double value = 0.0;
    double tiebreak = 0.0;
    OpIndex order = 0;
};

/// True when `a` should be preferred over `b`. Secondary values follow the
/// primary objective's direction for rank scores (higher success product wins)
/// and are minimized for baselines (lower failure probability wins).
bool better(const Score &a, const Score &b, Objective objective);

/// Per-graph data shared by every case.
struct PlannerModel {
    explicit PlannerModel(const NormalizedGraph &graph);

    const NormalizedGraph &graph;
    InterdependenceGroups groups;
};

/// Per-case precomputation: shortest root paths under every weight kind and
/// the success product of each operation's most reliable root path.
class PlanningContext {
  public:
    PlanningContext(const PlannerModel &model, std::span<const OpAttributes> attrs);

    const NormalizedGraph &graph() const { return model_->graph; }
    std::span<const OpAttributes> attributes() const { return attrs_; }

    /// Ratio of root-path success product to root-path weight. Extended scoring
    /// adds the interdependence surcharge of the output element to the weight.
    /// A zero weight yields +inf (numerator as tiebreak); an operation that
    /// cannot reach the root yields -inf.
    Score rank(OpIndex op, RankVariant variant) const;
    Score rank_extended(OpIndex op, RankVariant variant, const LivenessState &state,
                        const std::vector<bool> &produced) const;

    /// Minimized score for the six deterministic baselines. Unreachable
    /// operations score +inf.
    Score baseline_score(OpIndex op, PlannerKind kind) const;

    double success_product(OpIndex op) const { return success_product_[op]; }
    const RootDistances &distances(WeightKind kind) const;

  private:
    const PlannerModel *model_;
    std::span<const OpAttributes> attrs_;
    std::vector<double> cost_weights_, time_weights_, combo_weights_;
    RootDistances cost_, time_, combo_, hop_, fail_prob_;
    std::vector<double> success_product_;

    const std::vector<double> &weights_for(RankVariant variant) const;
    const RootDistances &distances_for(RankVariant variant) const;
    Score rank_score(OpIndex op, RankVariant variant, double surcharge) const;
};

/// Chooses the next real operation among `candidates`. Extended rank kinds only
/// consider operations not marked meaningless and return nullopt when none
/// remain; `random` draws uniformly from `rng`.
std::optional<OpIndex> next_operation(PlannerKind kind, std::span<const OpIndex> candidates,
                                      const LivenessState &state, const std::vector<bool> &produced,
                                      const PlanningContext &context, std::mt19937_64 &rng);

} // namespace pdm
