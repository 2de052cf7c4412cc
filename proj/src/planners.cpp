#include "pdm/planners.hpp"

#include <cmath>
#include <limits>

namespace pdm {

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();

constexpr std::array<std::string_view, 13> planner_names = {
    "random",         "lowest_cost", "shortest_time", "lowest_fail_prob", "root_distance",
    "remaining_cost", "remaining_time", "rank_cost",  "rank_time",        "rank_combo",
    "rank_ext_cost",  "rank_ext_time", "rank_ext_combo",
};
} // namespace

std::string_view to_string(PlannerKind kind) { return planner_names[static_cast<std::size_t>(kind)]; }

std::optional<PlannerKind> parse_planner_kind(std::string_view name) {
    for (std::size_t i = 0; i < planner_names.size(); ++i) {
        if (planner_names[i] == name) {
            return static_cast<PlannerKind>(i);
        }
    }
    return std::nullopt;
}

bool is_rank(PlannerKind kind) { return kind >= PlannerKind::rank_cost; }

bool is_extended(PlannerKind kind) { return kind >= PlannerKind::rank_ext_cost; }

PlannerKind base_variant(PlannerKind kind) {
    switch (kind) {
    case PlannerKind::rank_ext_cost:
        return PlannerKind::rank_cost;
    case PlannerKind::rank_ext_time:
        return PlannerKind::rank_time;
    case PlannerKind::rank_ext_combo:
        return PlannerKind::rank_combo;
    default:
        return kind;
    }
}

bool better(const Score &a, const Score &b, Objective objective) {
    if (a.value != b.value) {
        return objective == Objective::maximize ? a.value > b.value : a.value < b.value;
    }
    if (a.tiebreak != b.tiebreak) {
        return objective == Objective::maximize ? a.tiebreak > b.tiebreak : a.tiebreak < b.tiebreak;
    }
    return a.order < b.order;
}

PlannerModel::PlannerModel(const NormalizedGraph &g) : graph(g), groups(interdependent_groups(g)) {}

PlanningContext::PlanningContext(const PlannerModel &model, std::span<const OpAttributes> attrs)
    : model_(&model), attrs_(attrs) {
    const auto &graph = model.graph;
    cost_weights_ = operation_weights(graph, attrs, WeightKind::cost);
    time_weights_ = operation_weights(graph, attrs, WeightKind::time);
    combo_weights_ = operation_weights(graph, attrs, WeightKind::normalized_combo);
    cost_ = RootDistances(graph, cost_weights_);
    time_ = RootDistances(graph, time_weights_);
    combo_ = RootDistances(graph, combo_weights_);
    hop_ = RootDistances(graph, operation_weights(graph, attrs, WeightKind::hop));
    fail_prob_ = RootDistances(graph, operation_weights(graph, attrs, WeightKind::fail_prob));

    success_product_.assign(graph.operation_count(), 0.0);
    for (OpIndex op = 0; op < graph.operation_count(); ++op) {
        if (!fail_prob_.reaches_root(op)) {
            continue;
        }
        double product = 1.0;
        for (const auto step : fail_prob_.path_from(op).ops) {
            if (!graph.op(step).artificial) {
                product *= 1.0 - attrs[step].fail_prob;
            }
        }
        success_product_[op] = product;
    }
}

const RootDistances &PlanningContext::distances(WeightKind kind) const {
    switch (kind) {
    case WeightKind::cost:
        return cost_;
    case WeightKind::time:
        return time_;
    case WeightKind::normalized_combo:
        return combo_;
    case WeightKind::hop:
        return hop_;
    case WeightKind::fail_prob:
        return fail_prob_;
    }
    return cost_;
}

const std::vector<double> &PlanningContext::weights_for(RankVariant variant) const {
    switch (variant) {
    case RankVariant::time:
        return time_weights_;
    case RankVariant::combo:
        return combo_weights_;
    default:
        return cost_weights_;
    }
}

const RootDistances &PlanningContext::distances_for(RankVariant variant) const {
    switch (variant) {
    case RankVariant::time:
        return time_;
    case RankVariant::combo:
        return combo_;
    default:
        return cost_;
    }
}

Score PlanningContext::rank_score(OpIndex op, RankVariant variant, double surcharge) const {
    const auto &dist = distances_for(variant);
    if (!dist.reaches_root(op)) {
        return {-inf, 0.0, op};
    }
    const double numerator = success_product_[op];
    const double denominator = dist.op_distance(op) + surcharge;
    if (denominator == 0.0) {
        return {inf, numerator, op};
    }
    return {numerator / denominator, numerator, op};
}

Score PlanningContext::rank(OpIndex op, RankVariant variant) const { return rank_score(op, variant, 0.0); }

Score PlanningContext::rank_extended(OpIndex op, RankVariant variant, const LivenessState &state,
                                     const std::vector<bool> &produced) const {
    const auto &graph = model_->graph;
    const double surcharge =
        group_surcharge(graph, model_->groups, graph.op(op).output, weights_for(variant), state, produced);
    return rank_score(op, variant, surcharge);
}

Score PlanningContext::baseline_score(OpIndex op, PlannerKind kind) const {
    const auto &a = attrs_[op];
    const auto path_total = [&](const RootDistances &d) { return d.reaches_root(op) ? d.op_distance(op) : inf; };
    double value = 0.0;
    switch (kind) {
    case PlannerKind::lowest_cost:
        value = a.cost;
        break;
    case PlannerKind::shortest_time:
        value = a.time;
        break;
    case PlannerKind::lowest_fail_prob:
        value = a.fail_prob;
        break;
    case PlannerKind::root_distance:
        value = path_total(hop_);
        break;
    case PlannerKind::remaining_cost:
        value = path_total(cost_);
        break;
    case PlannerKind::remaining_time:
        value = path_total(time_);
        break;
    default:
        throw Error("baseline_score: not a baseline heuristic: " + std::string(to_string(kind)));
    }
    return {value, a.fail_prob, op};
}

namespace {

RankVariant variant_of(PlannerKind kind) {
    switch (base_variant(kind)) {
    case PlannerKind::rank_time:
        return RankVariant::time;
    case PlannerKind::rank_combo:
        return RankVariant::combo;
    default:
        return RankVariant::cost;
    }
}

} // namespace

std::optional<OpIndex> next_operation(PlannerKind kind, std::span<const OpIndex> candidates,
                                      const LivenessState &state, const std::vector<bool> &produced,
                                      const PlanningContext &context, std::mt19937_64 &rng) {
    if (candidates.empty()) {
        return std::nullopt;
    }
    if (kind == PlannerKind::random) {
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        return candidates[pick(rng)];
    }

    const bool extended = is_extended(kind);
    const auto objective = is_rank(kind) ? Objective::maximize : Objective::minimize;
    std::optional<OpIndex> chosen;
    Score best;
    for (const auto op : candidates) {
        if (extended && state.meaningless[op]) {
            continue;
        }
        Score score;
        if (extended) {
            score = context.rank_extended(op, variant_of(kind), state, produced);
        } else if (is_rank(kind)) {
            score = context.rank(op, variant_of(kind));
        } else {
            score = context.baseline_score(op, kind);
        }
        if (!chosen || better(score, best, objective)) {
            chosen = op;
            best = score;
        }
    }
    return chosen;
}

} // namespace pdm
