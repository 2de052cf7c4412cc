#include "pdm/simulator.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

namespace pdm {

std::string_view to_string(SettingKind kind) { return kind == SettingKind::gaussian ? "gaussian" : "uniform"; }

std::string_view to_string(TraceStatus status) {
    switch (status) {
    case TraceStatus::root_produced:
        return "root_produced";
    case TraceStatus::exhausted:
        return "exhausted";
    case TraceStatus::early_terminated:
        return "early_terminated";
    }
    return "?";
}

namespace {

std::mt19937_64 seeded_stream(std::uint64_t master_seed, std::size_t index, std::uint32_t stream) {
    const auto idx = static_cast<std::uint64_t>(index);
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32), stream};
    return std::mt19937_64(seq);
}

constexpr std::uint32_t attribute_stream = 0;
constexpr std::uint32_t planner_stream_id = 1;

} // namespace

std::mt19937_64 Instance::planner_stream() const { return seeded_stream(seed, index, planner_stream_id); }

Instance sample_instance(const NormalizedGraph &graph, const SettingConfig &setting, std::uint64_t master_seed,
                         std::size_t index) {
    if (setting.kind == SettingKind::gaussian && !(setting.sigma_fraction >= 0.0)) {
        throw Error("sigma fraction must be non-negative");
    }
    auto rng = seeded_stream(master_seed, index, attribute_stream);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> uniform_int(0, 10);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Instance instance;
    instance.index = index;
    instance.seed = master_seed;
    instance.attrs.assign(graph.operation_count(), OpAttributes{});
    instance.outcomes.assign(graph.operation_count(), true);

    const auto gaussian = [&](double mean) { return mean + setting.sigma_fraction * mean * normal(rng); };
    for (OpIndex i = 0; i < graph.real_operation_count(); ++i) {
        const auto &op = graph.op(i);
        auto &a = instance.attrs[i];
        if (setting.kind == SettingKind::gaussian) {
            a.cost = std::max(0.0, gaussian(op.cost));
            a.time = std::max(0.0, gaussian(op.time));
            a.fail_prob = std::clamp(gaussian(op.fail_prob), 0.0, 1.0);
        } else {
            a.cost = uniform_int(rng);
            a.time = uniform_int(rng);
            a.fail_prob = unit(rng);
        }
    }
    for (OpIndex i = 0; i < graph.real_operation_count(); ++i) {
        instance.outcomes[i] = unit(rng) < 1.0 - instance.attrs[i].fail_prob;
    }
    return instance;
}

Instance fixed_instance(const NormalizedGraph &graph, std::vector<bool> outcomes) {
    if (outcomes.size() != graph.operation_count()) {
        throw Error("outcome vector does not match the operation count");
    }
    Instance instance;
    instance.attrs = default_attributes(graph);
    instance.outcomes = std::move(outcomes);
    for (OpIndex i = graph.real_operation_count(); i < graph.operation_count(); ++i) {
        instance.outcomes[i] = true;
    }
    return instance;
}

ExecutionTrace execute(const PlannerModel &model, PlannerKind planner, const Instance &instance,
                       const PlanningContext &context) {
    const auto &graph = model.graph;
    const auto &ops = graph.operations();
    const bool extended = is_extended(planner);
    auto rng = instance.planner_stream();

    std::vector<bool> produced(graph.element_count(), false);
    std::vector<std::size_t> missing(ops.size());
    for (OpIndex i = 0; i < ops.size(); ++i) {
        missing[i] = ops[i].inputs.size();
    }
    auto state = LivenessState::initial(graph);

    const auto produce = [&](ElementIndex e) {
        if (produced[e]) {
            return;
        }
        produced[e] = true;
        for (const auto c : graph.consumers(e)) {
            --missing[c];
        }
    };

    ExecutionTrace trace;
    double cum_cost = 0.0;
    double cum_time = 0.0;
    std::vector<OpIndex> candidates;
    candidates.reserve(graph.real_operation_count());

    while (true) {
        bool progressed = true;
        while (progressed) {
            progressed = false;
            for (OpIndex a = graph.real_operation_count(); a < ops.size(); ++a) {
                if (!state.executed[a] && missing[a] == 0) {
                    state.executed[a] = true;
                    produce(ops[a].output);
                    progressed = true;
                }
            }
        }
        if (produced[graph.root()]) {
            trace.status = TraceStatus::root_produced;
            break;
        }

        candidates.clear();
        for (OpIndex i = 0; i < graph.real_operation_count(); ++i) {
            if (!state.executed[i] && missing[i] == 0) {
                candidates.push_back(i);
            }
        }
        if (candidates.empty()) {
            trace.status = TraceStatus::exhausted;
            break;
        }
        if (extended) {
            recompute_liveness(state, graph);
        }
        const auto choice = next_operation(planner, candidates, state, produced, context, rng);
        if (!choice) {
            trace.status = TraceStatus::early_terminated;
            break;
        }

        const auto op = *choice;
        const bool success = instance.outcomes[op];
        cum_cost += instance.attrs[op].cost;
        cum_time += instance.attrs[op].time;
        state.executed[op] = true;
        state.failed[op] = !success;
        if (success) {
            produce(ops[op].output);
        }
        trace.steps.push_back({op, success, cum_cost, cum_time});
    }

    for (OpIndex i = 0; i < graph.real_operation_count(); ++i) {
        if (state.executed[i]) {
            trace.total_cost += instance.attrs[i].cost;
            trace.total_time += instance.attrs[i].time;
        }
    }
    return trace;
}

ExecutionTrace execute(const NormalizedGraph &graph, PlannerKind planner, const Instance &instance) {
    const PlannerModel model(graph);
    const PlanningContext context(model, instance.attrs);
    return execute(model, planner, instance, context);
}

bool root_producible(const NormalizedGraph &graph, const Instance &instance) {
    std::vector<bool> usable = instance.outcomes;
    for (OpIndex i = graph.real_operation_count(); i < graph.operation_count(); ++i) {
        usable[i] = true;
    }
    return root_producible_with(graph, usable);
}

void write_trace_csv_header(std::ostream &out) {
    out << "instance;planner;step;op;success;cum_cost;cum_time;status\n";
}

void write_trace_csv(std::ostream &out, const NormalizedGraph &graph, std::size_t instance, PlannerKind planner,
                     const ExecutionTrace &trace) {
    std::ostringstream rows;
    rows.setf(std::ios::fixed);
    rows.precision(6);
    for (std::size_t s = 0; s < trace.steps.size(); ++s) {
        const auto &step = trace.steps[s];
        rows << instance << ';' << to_string(planner) << ';' << s + 1 << ';' << graph.op(step.op).id << ';'
             << (step.success ? 1 : 0) << ';' << step.cum_cost << ';' << step.cum_time << ';'
             << to_string(trace.status) << '\n';
    }
    out << rows.str();
}

} // namespace pdm
