#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "pdm/experiments.hpp"
#include "pdm/simulator.hpp"

using namespace pdm;

namespace {

OpIndex op_named(const NormalizedGraph &graph, std::string_view id) { return *graph.find_operation(id); }

std::vector<bool> outcomes_failing(const NormalizedGraph &graph, std::initializer_list<const char *> failing) {
    std::vector<bool> outcomes(graph.operation_count(), true);
    for (const auto *id : failing) {
        outcomes[op_named(graph, id)] = false;
    }
    return outcomes;
}

// Replays a trace on the un-normalized model and checks it is a legal
// execution there with the same totals.
void check_replay(const ProductDataModel &model, const NormalizedGraph &graph, const Instance &instance,
                  const ExecutionTrace &trace) {
    std::set<std::string> produced;
    double cost = 0.0, time = 0.0;
    for (const auto &step : trace.steps) {
        REQUIRE(step.op < model.operations.size());
        const auto &op = model.operations[step.op];
        for (const auto &in : op.inputs) {
            CHECK(produced.count(in) == 1);
        }
        CHECK(step.success == instance.outcomes[step.op]);
        cost += instance.attrs[step.op].cost;
        time += instance.attrs[step.op].time;
        if (step.success) {
            produced.insert(op.output);
        }
    }
    CHECK(trace.total_cost == doctest::Approx(cost).epsilon(1e-12));
    CHECK(trace.total_time == doctest::Approx(time).epsilon(1e-12));
    CHECK((trace.status == TraceStatus::root_produced) == (produced.count(model.root) == 1));
    (void)graph;
}

} // namespace

TEST_CASE("sampled outcomes at the probability extremes") {
    const auto graph = normalize(parse_pdm("root: A\n"
                                           "op: id=X out=A in=B cost=1 time=1 prob=1\n"
                                           "op: id=Y out=B in=- cost=1 time=1 prob=0\n"));
    SettingConfig setting;
    setting.sigma_fraction = 0.0;
    for (std::size_t i = 0; i < 50; ++i) {
        const auto instance = sample_instance(graph, setting, 3, i);
        CHECK_FALSE(instance.outcomes[op_named(graph, "X")]);
        CHECK(instance.outcomes[op_named(graph, "Y")]);
    }
}

TEST_CASE("sampling is a pure function of seed and index") {
    const auto graph = normalize(builtin_pdm("social_insurance").model);
    for (const auto kind : {SettingKind::gaussian, SettingKind::uniform}) {
        SettingConfig setting;
        setting.kind = kind;
        const auto a = sample_instance(graph, setting, 42, 7);
        const auto b = sample_instance(graph, setting, 42, 7);
        const auto c = sample_instance(graph, setting, 42, 8);
        REQUIRE(a.attrs.size() == b.attrs.size());
        bool differs = false;
        for (std::size_t i = 0; i < a.attrs.size(); ++i) {
            CHECK(a.attrs[i].cost == b.attrs[i].cost);
            CHECK(a.attrs[i].time == b.attrs[i].time);
            CHECK(a.attrs[i].fail_prob == b.attrs[i].fail_prob);
            differs = differs || a.attrs[i].cost != c.attrs[i].cost;
        }
        CHECK(a.outcomes == b.outcomes);
        CHECK(differs);
    }
}

TEST_CASE("uniform setting ranges") {
    const auto graph = normalize(builtin_pdm("monitoring").model);
    SettingConfig setting;
    setting.kind = SettingKind::uniform;
    for (std::size_t i = 0; i < 200; ++i) {
        const auto instance = sample_instance(graph, setting, 1, i);
        for (OpIndex op = 0; op < graph.real_operation_count(); ++op) {
            const auto &a = instance.attrs[op];
            CHECK(a.cost >= 0.0);
            CHECK(a.cost <= 10.0);
            CHECK(a.cost == std::floor(a.cost));
            CHECK(a.time == std::floor(a.time));
            CHECK(a.fail_prob >= 0.0);
            CHECK(a.fail_prob <= 1.0);
        }
    }
}

TEST_CASE("mortgage with table attributes and no failures") {
    const auto model = builtin_pdm("mortgage").model;
    const auto graph = normalize(model);
    const auto sets = enumerate_complete_paths(model);
    auto instance = fixed_instance(graph, std::vector<bool>(graph.operation_count(), true));
    double best = std::numeric_limits<double>::infinity();
    for (const auto kind : all_planners) {
        const auto trace = execute(graph, kind, instance);
        CHECK(trace.status == TraceStatus::root_produced);
        std::set<std::size_t> executed;
        for (const auto &step : trace.steps) {
            executed.insert(step.op);
        }
        const bool contains_complete_set = std::any_of(sets.begin(), sets.end(), [&](const CompletePathSet &s) {
            return std::all_of(s.ops.begin(), s.ops.end(), [&](std::size_t op) { return executed.count(op) == 1; });
        });
        CHECK(contains_complete_set);
        CHECK(trace.total_cost >= 3.0);
        best = std::min(best, trace.total_cost);
    }
    CHECK(best == 3.0);
}

TEST_CASE("worked example: rank_cost picks Op03 once E is lost") {
    const auto graph = normalize(builtin_pdm("mortgage").model);
    const auto instance = fixed_instance(graph, outcomes_failing(graph, {"Op07"}));
    const auto trace = execute(graph, PlannerKind::rank_cost, instance);
    std::vector<std::string> non_leaf;
    for (const auto &step : trace.steps) {
        if (!graph.op(step.op).inputs.empty()) {
            non_leaf.push_back(graph.op(step.op).id);
        }
    }
    REQUIRE_FALSE(non_leaf.empty());
    CHECK(non_leaf.front() == "Op03");
    CHECK(trace.status == TraceStatus::root_produced);
}

TEST_CASE("monitoring: losing i6..i9 makes i2 unproducible") {
    const auto graph = normalize(builtin_pdm("monitoring").model);
    const auto instance = fixed_instance(graph, outcomes_failing(graph, {"Op13", "Op14", "Op15", "Op16"}));
    CHECK_FALSE(root_producible(graph, instance));
    for (const auto kind : all_planners) {
        CHECK(execute(graph, kind, instance).status != TraceStatus::root_produced);
    }
}

TEST_CASE("root producibility") {
    const auto graph = normalize(builtin_pdm("mortgage").model);
    CHECK(root_producible(graph, fixed_instance(graph, std::vector<bool>(graph.operation_count(), true))));
    CHECK_FALSE(root_producible(graph, fixed_instance(graph, std::vector<bool>(graph.operation_count(), false))));
    CHECK(root_producible(graph, fixed_instance(graph, outcomes_failing(graph, {"Op04"}))));
}

TEST_CASE("traces replay on the un-normalized model") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 150; ++trial) {
        const auto model = oracle::random_pdm(rng);
        const auto graph = normalize(model);
        SettingConfig setting;
        setting.kind = trial % 2 ? SettingKind::uniform : SettingKind::gaussian;
        const auto instance = sample_instance(graph, setting, 5, static_cast<std::size_t>(trial));
        for (const auto kind : all_planners) {
            const auto trace = execute(graph, kind, instance);
            check_replay(model, graph, instance, trace);
            if (!is_extended(kind)) {
                CHECK((trace.status == TraceStatus::root_produced) == root_producible(graph, instance));
            }
        }
    }
}

TEST_CASE("failed cases converge for planners without early termination") {
    std::mt19937_64 rng(123);
    int failed_cases = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const auto model = oracle::random_pdm(rng);
        const auto graph = normalize(model);
        SettingConfig setting;
        setting.kind = SettingKind::uniform;
        const auto instance = sample_instance(graph, setting, 8, static_cast<std::size_t>(trial));
        if (root_producible(graph, instance)) {
            continue;
        }
        ++failed_cases;
        const auto reference = execute(graph, PlannerKind::random, instance);
        for (const auto kind : all_planners) {
            const auto trace = execute(graph, kind, instance);
            if (is_extended(kind)) {
                CHECK(trace.total_cost <= reference.total_cost);
                CHECK(trace.total_time <= reference.total_time);
            } else {
                CHECK(trace.total_cost == reference.total_cost);
                CHECK(trace.total_time == reference.total_time);
            }
        }
    }
    CHECK(failed_cases > 20);
}

TEST_CASE("trace CSV") {
    const auto graph = normalize(builtin_pdm("mortgage").model);
    const auto instance = fixed_instance(graph, outcomes_failing(graph, {"Op04"}));
    const auto trace = execute(graph, PlannerKind::rank_cost, instance);
    std::ostringstream out;
    write_trace_csv_header(out);
    write_trace_csv(out, graph, 4, PlannerKind::rank_cost, trace);
    const auto text = out.str();
    CHECK(text.rfind("instance;planner;step;op;success;cum_cost;cum_time;status\n", 0) == 0);
    CHECK(text.find("4;rank_cost;1;Op07;1;1.000000;1.000000;root_produced\n") != std::string::npos);
    CHECK(text.find(";Op04;0;") != std::string::npos);
}
