#include "pdm/paths.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

namespace pdm {

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();
constexpr OpIndex no_op = std::numeric_limits<OpIndex>::max();
} // namespace

std::vector<OpAttributes> default_attributes(const NormalizedGraph &graph) {
    std::vector<OpAttributes> attrs;
    attrs.reserve(graph.operation_count());
    for (const auto &op : graph.operations()) {
        attrs.push_back({op.cost, op.time, op.fail_prob});
    }
    return attrs;
}

std::string_view to_string(WeightKind kind) {
    switch (kind) {
    case WeightKind::cost:
        return "cost";
    case WeightKind::time:
        return "time";
    case WeightKind::fail_prob:
        return "fail_prob";
    case WeightKind::hop:
        return "hop";
    case WeightKind::normalized_combo:
        return "normalized_combo";
    }
    return "?";
}

std::vector<double> operation_weights(const NormalizedGraph &graph, std::span<const OpAttributes> attrs,
                                      WeightKind kind) {
    const auto &ops = graph.operations();
    std::vector<double> weights(ops.size(), 0.0);
    double max_cost = 0.0;
    double max_time = 0.0;
    if (kind == WeightKind::normalized_combo) {
        for (OpIndex i = 0; i < ops.size(); ++i) {
            if (!ops[i].artificial) {
                max_cost = std::max(max_cost, attrs[i].cost);
                max_time = std::max(max_time, attrs[i].time);
            }
        }
    }
    for (OpIndex i = 0; i < ops.size(); ++i) {
        if (ops[i].artificial) {
            continue;
        }
        switch (kind) {
        case WeightKind::cost:
            weights[i] = attrs[i].cost;
            break;
        case WeightKind::time:
            weights[i] = attrs[i].time;
            break;
        case WeightKind::fail_prob:
            weights[i] = attrs[i].fail_prob;
            break;
        case WeightKind::hop:
            weights[i] = 1.0;
            break;
        case WeightKind::normalized_combo:
            weights[i] = (max_cost > 0.0 ? attrs[i].cost / max_cost : 0.0) +
                         (max_time > 0.0 ? attrs[i].time / max_time : 0.0);
            break;
        }
    }
    return weights;
}

RootDistances::RootDistances(const NormalizedGraph &graph, std::vector<double> weights)
    : graph_(&graph), weights_(std::move(weights)), distance_(graph.element_count(), inf),
      next_(graph.element_count(), no_op) {
    using Entry = std::pair<double, ElementIndex>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
    distance_[graph.root()] = 0.0;
    frontier.emplace(0.0, graph.root());
    while (!frontier.empty()) {
        const auto [d, v] = frontier.top();
        frontier.pop();
        if (d > distance_[v]) {
            continue;
        }
        for (const auto p : graph.producers(v)) {
            const double candidate = d + weights_[p];
            for (const auto u : graph.op(p).inputs) {
                if (candidate < distance_[u]) {
                    distance_[u] = candidate;
                    frontier.emplace(candidate, u);
                }
            }
        }
    }
    // Canonical successor: lowest (total, operation index) among consumers.
    for (ElementIndex u = 0; u < graph.element_count(); ++u) {
        if (u == graph.root()) {
            continue;
        }
        double best = inf;
        for (const auto c : graph.consumers(u)) {
            const double total = weights_[c] + distance_[graph.op(c).output];
            if (total < best) {
                best = total;
                next_[u] = c;
            }
        }
    }
}

bool RootDistances::reaches_root(OpIndex op) const {
    return std::isfinite(distance_[graph_->op(op).output]);
}

double RootDistances::op_distance(OpIndex op) const {
    return weights_[op] + distance_[graph_->op(op).output];
}

RootPath RootDistances::path_from(OpIndex op) const {
    if (!reaches_root(op)) {
        throw NoPathError("operation " + graph_->op(op).id + " cannot reach the root");
    }
    RootPath path{{op}, op_distance(op)};
    ElementIndex e = graph_->op(op).output;
    while (e != graph_->root()) {
        const auto c = next_[e];
        path.ops.push_back(c);
        e = graph_->op(c).output;
    }
    return path;
}

RootPath shortest_root_path(const NormalizedGraph &graph, OpIndex op, WeightKind kind,
                            std::span<const OpAttributes> attrs) {
    return RootDistances(graph, operation_weights(graph, attrs, kind)).path_from(op);
}

RootPath shortest_root_path(const NormalizedGraph &graph, OpIndex op, WeightKind kind) {
    const auto attrs = default_attributes(graph);
    return shortest_root_path(graph, op, kind, attrs);
}

ProbabilityPath rank_probability_path(const NormalizedGraph &graph, OpIndex op, std::span<const OpAttributes> attrs) {
    ProbabilityPath result{shortest_root_path(graph, op, WeightKind::fail_prob, attrs), 1.0};
    for (const auto step : result.path.ops) {
        if (!graph.op(step).artificial) {
            result.success_product *= 1.0 - attrs[step].fail_prob;
        }
    }
    return result;
}

ProbabilityPath rank_probability_path(const NormalizedGraph &graph, OpIndex op) {
    const auto attrs = default_attributes(graph);
    return rank_probability_path(graph, op, attrs);
}

std::vector<bool> producible_elements(const NormalizedGraph &graph, const std::vector<bool> &usable) {
    const auto &ops = graph.operations();
    std::vector<bool> produced(graph.element_count(), false);
    std::vector<std::size_t> missing(ops.size());
    std::vector<ElementIndex> queue;
    const auto produce = [&](ElementIndex e) {
        if (!produced[e]) {
            produced[e] = true;
            queue.push_back(e);
        }
    };
    for (OpIndex i = 0; i < ops.size(); ++i) {
        missing[i] = ops[i].inputs.size();
        if (usable[i] && missing[i] == 0) {
            produce(ops[i].output);
        }
    }
    while (!queue.empty()) {
        const auto e = queue.back();
        queue.pop_back();
        for (const auto c : graph.consumers(e)) {
            if (--missing[c] == 0 && usable[c]) {
                produce(ops[c].output);
            }
        }
    }
    return produced;
}

bool root_producible_with(const NormalizedGraph &graph, const std::vector<bool> &usable) {
    return producible_elements(graph, usable)[graph.root()];
}

std::vector<CompletePathSet> enumerate_complete_paths(const ProductDataModel &model, std::size_t cap) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t e = 0; e < model.elements.size(); ++e) {
        index.emplace(model.elements[e], e);
    }
    const std::size_t n = model.elements.size();
    std::vector<std::vector<std::size_t>> producers(n);
    std::vector<std::vector<std::size_t>> inputs(model.operations.size());
    for (std::size_t i = 0; i < model.operations.size(); ++i) {
        producers[index.at(model.operations[i].output)].push_back(i);
        for (const auto &input : model.operations[i].inputs) {
            inputs[i].push_back(index.at(input));
        }
    }

    // Each needed element is bound to exactly one producer, so every completed
    // assignment is already minimal; distinct assignments may still coincide as sets.
    std::set<std::vector<std::size_t>> found;
    std::vector<std::size_t> producer_of(n, SIZE_MAX);
    std::function<void(std::vector<std::size_t>)> expand = [&](std::vector<std::size_t> pending) {
        while (!pending.empty() && producer_of[pending.back()] != SIZE_MAX) {
            pending.pop_back();
        }
        if (pending.empty()) {
            std::vector<std::size_t> ops;
            for (const auto p : producer_of) {
                if (p != SIZE_MAX) {
                    ops.push_back(p);
                }
            }
            std::sort(ops.begin(), ops.end());
            found.insert(std::move(ops));
            if (found.size() > cap) {
                throw CapExceededError("more than " + std::to_string(cap) + " complete path sets");
            }
            return;
        }
        const auto e = pending.back();
        pending.pop_back();
        for (const auto p : producers[e]) {
            producer_of[e] = p;
            auto next = pending;
            next.insert(next.end(), inputs[p].begin(), inputs[p].end());
            expand(std::move(next));
        }
        producer_of[e] = SIZE_MAX;
    };
    expand({index.at(model.root)});

    std::vector<CompletePathSet> result;
    result.reserve(found.size());
    for (const auto &ops : found) {
        CompletePathSet set{ops, 0.0, 0.0};
        for (const auto i : ops) {
            set.total_cost += model.operations[i].cost;
            set.total_time += model.operations[i].time;
        }
        result.push_back(std::move(set));
    }
    return result;
}

void write_complete_paths_csv(std::ostream &out, const ProductDataModel &model,
                              std::span<const CompletePathSet> sets) {
    out << "ops;total_cost;total_time\n";
    for (const auto &set : sets) {
        for (std::size_t k = 0; k < set.ops.size(); ++k) {
            out << (k ? "," : "") << model.operations[set.ops[k]].id;
        }
        std::ostringstream values;
        values.precision(10);
        values << ';' << set.total_cost << ';' << set.total_time;
        out << values.str() << '\n';
    }
}

LivenessState LivenessState::initial(const NormalizedGraph &graph) {
    LivenessState state;
    state.executed.assign(graph.operation_count(), false);
    state.failed.assign(graph.operation_count(), false);
    state.dead.assign(graph.element_count(), false);
    state.useless.assign(graph.element_count(), false);
    state.meaningless.assign(graph.operation_count(), false);
    recompute_liveness(state, graph);
    return state;
}

namespace {
template <typename Index>
std::vector<Index> flagged(const std::vector<bool> &flags) {
    std::vector<Index> out;
    for (Index i = 0; i < flags.size(); ++i) {
        if (flags[i]) {
            out.push_back(i);
        }
    }
    return out;
}
} // namespace

std::vector<OpIndex> LivenessState::failed_ops() const { return flagged<OpIndex>(failed); }
std::vector<OpIndex> LivenessState::executed_ops() const { return flagged<OpIndex>(executed); }
std::vector<ElementIndex> LivenessState::dead_elements() const { return flagged<ElementIndex>(dead); }
std::vector<OpIndex> LivenessState::meaningless_ops() const { return flagged<OpIndex>(meaningless); }

void recompute_liveness(LivenessState &state, const NormalizedGraph &graph) {
    const auto &ops = graph.operations();
    const std::size_t n = graph.element_count();

    // Least fixpoint of "has a non-failed producer whose inputs are all alive".
    std::vector<bool> alive(n, false);
    std::vector<std::size_t> missing(ops.size());
    std::vector<ElementIndex> queue;
    const auto revive = [&](ElementIndex e) {
        if (!alive[e]) {
            alive[e] = true;
            queue.push_back(e);
        }
    };
    for (OpIndex i = 0; i < ops.size(); ++i) {
        missing[i] = ops[i].inputs.size();
        if (!state.failed[i] && missing[i] == 0) {
            revive(ops[i].output);
        }
    }
    while (!queue.empty()) {
        const auto e = queue.back();
        queue.pop_back();
        for (const auto c : graph.consumers(e)) {
            if (--missing[c] == 0 && !state.failed[c]) {
                revive(ops[c].output);
            }
        }
    }
    for (ElementIndex e = 0; e < n; ++e) {
        state.dead[e] = !alive[e];
    }

    std::fill(state.useless.begin(), state.useless.end(), false);
    const auto consumes = [&](OpIndex c, ElementIndex e) {
        const auto &in = ops[c].inputs;
        return std::find(in.begin(), in.end(), e) != in.end();
    };
    for (OpIndex f = 0; f < ops.size(); ++f) {
        if (!state.failed[f]) {
            continue;
        }
        const auto a = ops[f].output;
        if (!state.dead[a]) {
            continue;
        }
        for (const auto c : graph.consumers(a)) {
            if (state.executed[c]) {
                continue;
            }
            for (const auto b : ops[c].inputs) {
                if (b == a || b == graph.root() || state.useless[b]) {
                    continue;
                }
                const auto &uses = graph.consumers(b);
                const bool always_with_a = std::all_of(uses.begin(), uses.end(), [&](OpIndex d) {
                    return consumes(d, a);
                });
                if (always_with_a) {
                    state.useless[b] = true;
                }
            }
        }
    }

    bool changed = true;
    while (changed) {
        changed = false;
        for (ElementIndex b = 0; b < n; ++b) {
            if (b == graph.root() || state.useless[b]) {
                continue;
            }
            bool any = false;
            bool all_blocked = true;
            // Consumers that already ran still count: `b` only becomes useless
            // when it appears in no complete set that can still succeed.
            for (const auto c : graph.consumers(b)) {
                any = true;
                if (!state.useless[ops[c].output]) {
                    all_blocked = false;
                    break;
                }
            }
            if (any && all_blocked) {
                state.useless[b] = true;
                changed = true;
            }
        }
    }

    for (OpIndex i = 0; i < ops.size(); ++i) {
        const bool dead_input = std::any_of(ops[i].inputs.begin(), ops[i].inputs.end(),
                                            [&](ElementIndex e) { return state.dead[e]; });
        state.meaningless[i] = !state.executed[i] && (state.useless[ops[i].output] || dead_input);
    }
}

LivenessState update_liveness(LivenessState state, const NormalizedGraph &graph, OpIndex op, bool success) {
    state.executed[op] = true;
    state.failed[op] = !success;
    recompute_liveness(state, graph);
    return state;
}

LivenessState update_liveness(LivenessState state, const NormalizedGraph &graph, OpIndex newly_failed) {
    return update_liveness(std::move(state), graph, newly_failed, false);
}

InterdependenceGroups interdependent_groups(const NormalizedGraph &graph) {
    InterdependenceGroups result;
    result.group_of.assign(graph.element_count(), 0);
    std::map<std::vector<OpIndex>, std::size_t> by_consumers;
    for (ElementIndex e = 0; e < graph.element_count(); ++e) {
        auto consumers = graph.consumers(e);
        std::sort(consumers.begin(), consumers.end());
        if (!consumers.empty()) {
            const auto it = by_consumers.find(consumers);
            if (it != by_consumers.end()) {
                result.group_of[e] = it->second;
                result.groups[it->second].push_back(e);
                continue;
            }
            by_consumers.emplace(std::move(consumers), result.groups.size());
        }
        result.group_of[e] = result.groups.size();
        result.groups.push_back({e});
    }
    return result;
}

double group_surcharge(const NormalizedGraph &graph, const InterdependenceGroups &groups, ElementIndex element,
                       std::span<const double> weights, const LivenessState &state,
                       const std::vector<bool> &produced) {
    double surcharge = 0.0;
    for (const auto partner : groups.groups[groups.group_of[element]]) {
        if (partner == element || (!produced.empty() && produced[partner])) {
            continue;
        }
        double best = inf;
        for (const auto p : graph.producers(partner)) {
            if (!state.failed[p]) {
                best = std::min(best, weights[p]);
            }
        }
        surcharge += best;
    }
    return surcharge;
}

} // namespace pdm
