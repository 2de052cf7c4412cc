#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "pdm/experiments.hpp"

using namespace pdm;

TEST_CASE("normalized performance") {
    SUBCASE("single instance") {
        const auto result = normalized_performance({{2.0, 4.0}});
        CHECK(result.means == std::vector<double>{1.0, 2.0});
        CHECK(result.instances == 1);
    }
    SUBCASE("all equal") {
        const auto result = normalized_performance({{3.0, 3.0, 3.0}, {1.0, 1.0, 1.0}});
        CHECK(result.means == std::vector<double>{1.0, 1.0, 1.0});
    }
    SUBCASE("symmetric") {
        const auto result = normalized_performance({{1.0, 2.0}, {2.0, 1.0}});
        CHECK(result.means == std::vector<double>{1.5, 1.5});
    }
    SUBCASE("zero minimum is skipped") {
        const auto result = normalized_performance({{0.0, 1.0}, {2.0, 4.0}});
        CHECK(result.instances == 1);
        CHECK(result.means == std::vector<double>{1.0, 2.0});
    }
    SUBCASE("empty input") { CHECK_THROWS_AS(normalized_performance({}), Error); }
}

TEST_CASE("best-case shares credit ties") {
    const auto shares = best_case_shares({{1.0, 1.0, 2.0}, {3.0, 2.0, 2.0}}, 4);
    CHECK(shares == std::vector<double>{25.0, 50.0, 25.0});
}

TEST_CASE("optimal cost follows feasibility") {
    const auto model = builtin_pdm("mortgage").model;
    const auto graph = normalize(model);
    const auto sets = enumerate_complete_paths(model);
    std::vector<bool> outcomes(graph.operation_count(), true);
    CHECK(optimal_cost(sets, fixed_instance(graph, outcomes)) == 3.0);
    outcomes[*graph.find_operation("Op04")] = false;
    CHECK(optimal_cost(sets, fixed_instance(graph, outcomes)) == 12.0);
    std::fill(outcomes.begin(), outcomes.end(), false);
    CHECK_FALSE(optimal_cost(sets, fixed_instance(graph, outcomes)).has_value());
}

TEST_CASE("deviation from optimal") {
    const auto model = builtin_pdm("mortgage").model;
    const auto graph = normalize(model);
    const std::vector<Instance> instances{fixed_instance(graph, std::vector<bool>(graph.operation_count(), true))};
    CHECK(deviation_from_optimal(model, instances, PlannerKind::rank_cost) == doctest::Approx(1.0));
    CHECK(deviation_from_optimal(model, instances, PlannerKind::lowest_cost) >= 1.0);
}

TEST_CASE("model references") {
    CHECK(resolve_model("builtin:monitoring").name == "monitoring");
    CHECK(resolve_model("mortgage").model.root == "A");
    CHECK_THROWS_AS(resolve_model("builtin:unknown"), Error);
    CHECK_THROWS_AS(resolve_model("/nonexistent/file.pdm"), Error);
}

TEST_CASE("small experiment") {
    std::vector<ModelSpec> models{builtin_pdm("mortgage"), builtin_pdm("monitoring")};
    SettingConfig setting;
    setting.kind = SettingKind::uniform;
    setting.cases = 300;
    setting.master_seed = 9;
    const auto report = run_experiment(models, setting, all_planners);

    // Normalized values are >= 1 and shares lie in [0, 100].
    for (const auto &row : report.rows) {
        if (row.metric == "norm_cost" || row.metric == "norm_time") {
            CHECK(row.value >= 1.0);
        }
        if (row.metric.find("share") != std::string::npos) {
            CHECK(row.value >= 0.0);
            CHECK(row.value <= 100.0);
        }
    }

    // Every successful instance credits at least one planner.
    for (const auto &run : report.runs) {
        double successful = 0.0, share_sum = 0.0;
        for (std::size_t i = 0; i < run.cases; ++i) {
            successful += run.producible[i];
        }
        for (const auto kind : all_planners) {
            share_sum += *report.value(to_string(kind), run.name, "best_cost_share");
        }
        CHECK(share_sum >= 100.0 * successful / static_cast<double>(run.cases) - 1e-9);
    }

    // The pooled value is the instance-weighted mean of the per-model values.
    for (const auto kind : all_planners) {
        const auto name = std::string(to_string(kind));
        double weighted = 0.0, weight = 0.0;
        for (const auto &run : report.runs) {
            const double n = *report.value("*", run.name, "norm_cost_instances");
            weighted += n * *report.value(name, run.name, "norm_cost");
            weight += n;
        }
        CHECK(*report.value(name, "aggregate", "norm_cost") == doctest::Approx(weighted / weight).epsilon(1e-12));
    }

    // Monitoring: extended and base rank rows agree on successful cases.
    for (const auto *metric : {"norm_cost", "norm_time"}) {
        CHECK(*report.value("rank_ext_cost", "monitoring", metric) == *report.value("rank_cost", "monitoring", metric));
        CHECK(*report.value("rank_ext_time", "monitoring", metric) == *report.value("rank_time", "monitoring", metric));
    }

    CHECK(report.value("rank_ext_cost", "mortgage", "optimal_cost_ratio").has_value());
}

TEST_CASE("report output is independent of thread count") {
    std::vector<ModelSpec> models{builtin_pdm("mortgage"), builtin_pdm("social_insurance")};
    SettingConfig setting;
    setting.cases = 200;
    setting.master_seed = 3;
    std::string outputs[2];
    std::string traces[2];
    for (int k = 0; k < 2; ++k) {
        ExperimentOptions options;
        options.threads = k == 0 ? 1 : 4;
        std::ostringstream trace_out;
        options.traces = &trace_out;
        std::ostringstream csv;
        write_report_csv(csv, run_experiment(models, setting, all_planners, options));
        outputs[k] = csv.str();
        traces[k] = trace_out.str();
    }
    CHECK(outputs[0] == outputs[1]);
    CHECK(traces[0] == traces[1]);
    CHECK(outputs[0].find("time=defaulted_to_cost") != std::string::npos);
    CHECK(outputs[0].find("planner;model;metric;value\n") != std::string::npos);
}
