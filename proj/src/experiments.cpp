#include "pdm/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "builtin_models.inc"

namespace pdm {

namespace {

constexpr double tie_tolerance = 1e-9;

bool ties_min(double value, double minimum) {
    return value <= minimum + tie_tolerance * std::max(1.0, std::abs(minimum));
}

} // namespace

std::span<const std::string_view> builtin_names() {
    static constexpr std::array<std::string_view, 3> names = {"mortgage", "social_insurance", "monitoring"};
    return names;
}

ModelSpec builtin_pdm(std::string_view name) {
    if (name == "mortgage") {
        return {"mortgage", parse_pdm(builtin::mortgage_text), 0.5, false};
    }
    if (name == "social_insurance") {
        return {"social_insurance", parse_pdm(builtin::social_insurance_text), 0.33, true};
    }
    if (name == "monitoring") {
        return {"monitoring", parse_pdm(builtin::monitoring_text), 0.33, true};
    }
    throw Error("unknown builtin model '" + std::string(name) + "'");
}

ModelSpec resolve_model(std::string_view reference) {
    constexpr std::string_view scheme = "builtin:";
    if (reference.starts_with(scheme)) {
        return builtin_pdm(reference.substr(scheme.size()));
    }
    const auto names = builtin_names();
    if (std::find(names.begin(), names.end(), reference) != names.end()) {
        return builtin_pdm(reference);
    }
    std::string path(reference);
    auto name = path.substr(path.find_last_of('/') + 1);
    if (const auto dot = name.rfind('.'); dot != std::string::npos && dot > 0) {
        name.resize(dot);
    }
    return {name, load_pdm_file(path), 0.33, false};
}

NormalizedMeans normalized_performance(const std::vector<std::vector<double>> &values) {
    if (values.empty()) {
        throw Error("normalized_performance: no instances");
    }
    NormalizedMeans result;
    result.means.assign(values.front().size(), 0.0);
    for (const auto &row : values) {
        const double minimum = *std::min_element(row.begin(), row.end());
        if (!(minimum > 0.0)) {
            continue;
        }
        ++result.instances;
        for (std::size_t p = 0; p < row.size(); ++p) {
            result.means[p] += row[p] / minimum;
        }
    }
    if (result.instances == 0) {
        throw Error("normalized_performance: no instance has a positive minimum");
    }
    for (auto &m : result.means) {
        m /= static_cast<double>(result.instances);
    }
    return result;
}

std::vector<double> best_case_shares(const std::vector<std::vector<double>> &values, std::size_t total_cases) {
    std::vector<double> shares(values.empty() ? 0 : values.front().size(), 0.0);
    if (total_cases == 0) {
        return shares;
    }
    for (const auto &row : values) {
        const double minimum = *std::min_element(row.begin(), row.end());
        for (std::size_t p = 0; p < row.size(); ++p) {
            if (ties_min(row[p], minimum)) {
                shares[p] += 1.0;
            }
        }
    }
    for (auto &s : shares) {
        s = 100.0 * s / static_cast<double>(total_cases);
    }
    return shares;
}

std::optional<double> optimal_cost(std::span<const CompletePathSet> sets, const Instance &instance) {
    std::optional<double> best;
    for (const auto &set : sets) {
        double cost = 0.0;
        bool feasible = true;
        for (const auto op : set.ops) {
            if (!instance.outcomes[op]) {
                feasible = false;
                break;
            }
            cost += instance.attrs[op].cost;
        }
        if (feasible && (!best || cost < *best)) {
            best = cost;
        }
    }
    return best;
}

double deviation_from_optimal(const ProductDataModel &model, std::span<const Instance> instances,
                              PlannerKind planner, std::size_t cap) {
    const auto sets = enumerate_complete_paths(model, cap);
    const auto graph = normalize(model);
    const PlannerModel planner_model(graph);
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto &instance : instances) {
        const auto optimum = optimal_cost(sets, instance);
        if (!optimum || !(*optimum > 0.0)) {
            continue;
        }
        const PlanningContext context(planner_model, instance.attrs);
        sum += execute(planner_model, planner, instance, context).total_cost / *optimum;
        ++count;
    }
    if (count == 0) {
        throw Error("deviation_from_optimal: no instance with a feasible, positive-cost optimum");
    }
    return sum / static_cast<double>(count);
}

std::optional<double> Report::value(std::string_view planner, std::string_view model,
                                    std::string_view metric) const {
    for (const auto &row : rows) {
        if (row.planner == planner && row.model == model && row.metric == metric) {
            return row.value;
        }
    }
    return std::nullopt;
}

namespace {

ModelRun run_model(const ModelSpec &spec, const SettingConfig &setting, std::span<const PlannerKind> planners,
                   const ExperimentOptions &options) {
    const auto graph = normalize(spec.model);
    const PlannerModel planner_model(graph);
    const std::size_t cases = setting.cases;
    const std::size_t p_count = planners.size();

    SettingConfig model_setting = setting;
    model_setting.sigma_fraction = spec.sigma_fraction;

    ModelRun run;
    run.name = spec.name;
    run.sigma_fraction = spec.sigma_fraction;
    run.time_defaulted = spec.time_defaulted;
    run.cases = cases;
    run.producible.assign(cases, false);
    run.cost.assign(cases, std::vector<double>(p_count, 0.0));
    run.time.assign(cases, std::vector<double>(p_count, 0.0));
    run.status.assign(cases, std::vector<TraceStatus>(p_count, TraceStatus::exhausted));
    run.optimal.assign(cases, std::nullopt);

    std::vector<CompletePathSet> sets;
    try {
        sets = enumerate_complete_paths(spec.model, options.enumeration_cap);
        run.optimal_available = true;
    } catch (const CapExceededError &) {
        run.optimal_available = false;
    }

    std::vector<std::string> traces(options.traces ? cases : 0);
    std::vector<std::vector<double>> wall(std::max(1u, options.threads), std::vector<double>(p_count, 0.0));
    std::atomic<std::size_t> next{0};

    const auto worker = [&](unsigned worker_id) {
        using clock = std::chrono::steady_clock;
        auto &my_wall = wall[worker_id];
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cases) {
                break;
            }
            const auto instance = sample_instance(graph, model_setting, setting.master_seed, i);
            run.producible[i] = root_producible(graph, instance);
            if (run.optimal_available) {
                run.optimal[i] = optimal_cost(sets, instance);
            }
            const auto t0 = clock::now();
            const PlanningContext context(planner_model, instance.attrs);
            const double context_seconds = std::chrono::duration<double>(clock::now() - t0).count();
            std::ostringstream trace_out;
            for (std::size_t p = 0; p < p_count; ++p) {
                const auto t1 = clock::now();
                const auto trace = execute(planner_model, planners[p], instance, context);
                my_wall[p] += context_seconds + std::chrono::duration<double>(clock::now() - t1).count();
                run.cost[i][p] = trace.total_cost;
                run.time[i][p] = trace.total_time;
                run.status[i][p] = trace.status;
                if (options.traces) {
                    write_trace_csv(trace_out, graph, i, planners[p], trace);
                }
            }
            if (options.traces) {
                traces[i] = trace_out.str();
            }
        }
    };

    const unsigned thread_count = std::max(1u, options.threads);
    if (thread_count == 1) {
        worker(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < thread_count; ++t) {
            pool.emplace_back(worker, t);
        }
    }

    run.wall_seconds.assign(p_count, 0.0);
    for (const auto &w : wall) {
        for (std::size_t p = 0; p < p_count; ++p) {
            run.wall_seconds[p] += w[p];
        }
    }
    if (options.traces) {
        for (const auto &t : traces) {
            *options.traces << t;
        }
    }
    return run;
}

// Instance-level selections shared by all metrics of one pooled group.
struct Pool {
    std::vector<std::vector<double>> success_cost, success_time;
    std::vector<std::vector<double>> failed_cost, failed_time;
    std::vector<std::vector<double>> optimal_ratio_rows; // [instance][planner]
    std::vector<double> optimal_values;
    std::size_t cases = 0;

    void absorb(const ModelRun &run) {
        cases += run.cases;
        for (std::size_t i = 0; i < run.cases; ++i) {
            if (run.producible[i]) {
                success_cost.push_back(run.cost[i]);
                success_time.push_back(run.time[i]);
                if (run.optimal_available && run.optimal[i] && *run.optimal[i] > 0.0) {
                    std::vector<double> ratios(run.cost[i].size());
                    for (std::size_t p = 0; p < ratios.size(); ++p) {
                        ratios[p] = run.cost[i][p] / *run.optimal[i];
                    }
                    optimal_ratio_rows.push_back(std::move(ratios));
                    optimal_values.push_back(*run.optimal[i]);
                }
            } else {
                failed_cost.push_back(run.cost[i]);
                failed_time.push_back(run.time[i]);
            }
        }
    }
};

std::vector<double> column_means(const std::vector<std::vector<double>> &rows, std::size_t width) {
    std::vector<double> means(width, 0.0);
    for (const auto &row : rows) {
        for (std::size_t p = 0; p < width; ++p) {
            means[p] += row[p];
        }
    }
    for (auto &m : means) {
        m /= rows.empty() ? 1.0 : static_cast<double>(rows.size());
    }
    return means;
}

void emit_pool(Report &report, const std::string &model, const Pool &pool) {
    const auto &planners = report.planners;
    const std::size_t width = planners.size();
    auto add = [&](std::string planner, std::string metric, double value) {
        report.rows.push_back({std::move(planner), model, std::move(metric), value});
    };

    add("*", "cases", static_cast<double>(pool.cases));
    add("*", "successful_cases", static_cast<double>(pool.success_cost.size()));
    add("*", "failed_cases", static_cast<double>(pool.failed_cost.size()));

    const auto emit_normalized = [&](const std::vector<std::vector<double>> &rows, const std::string &metric) {
        if (rows.empty()) {
            return;
        }
        try {
            const auto norm = normalized_performance(rows);
            add("*", metric + "_instances", static_cast<double>(norm.instances));
            for (std::size_t p = 0; p < width; ++p) {
                add(std::string(to_string(planners[p])), metric, norm.means[p]);
            }
        } catch (const Error &) {
            add("*", metric + "_instances", 0.0);
        }
    };
    emit_normalized(pool.success_cost, "norm_cost");
    emit_normalized(pool.success_time, "norm_time");

    const auto cost_share = best_case_shares(pool.success_cost, pool.cases);
    const auto time_share = best_case_shares(pool.success_time, pool.cases);
    for (std::size_t p = 0; p < width; ++p) {
        add(std::string(to_string(planners[p])), "best_cost_share", cost_share[p]);
        add(std::string(to_string(planners[p])), "best_time_share", time_share[p]);
    }

    if (!pool.failed_cost.empty()) {
        const auto fc = column_means(pool.failed_cost, width);
        const auto ft = column_means(pool.failed_time, width);
        for (std::size_t p = 0; p < width; ++p) {
            add(std::string(to_string(planners[p])), "failed_cost", fc[p]);
            add(std::string(to_string(planners[p])), "failed_time", ft[p]);
        }
        for (std::size_t p = 0; p < width; ++p) {
            if (!is_extended(planners[p])) {
                continue;
            }
            const auto base = std::find(planners.begin(), planners.end(), base_variant(planners[p]));
            if (base == planners.end()) {
                continue;
            }
            const auto b = static_cast<std::size_t>(base - planners.begin());
            const auto saving = [](double ext, double ref) { return ref > 0.0 ? 100.0 * (1.0 - ext / ref) : 0.0; };
            add(std::string(to_string(planners[p])), "failed_cost_saving", saving(fc[p], fc[b]));
            add(std::string(to_string(planners[p])), "failed_time_saving", saving(ft[p], ft[b]));
        }
    }

    if (!pool.optimal_ratio_rows.empty()) {
        const auto ratios = column_means(pool.optimal_ratio_rows, width);
        double optimum = 0.0;
        for (const auto v : pool.optimal_values) {
            optimum += v;
        }
        add("*", "optimal_mean_cost", optimum / static_cast<double>(pool.optimal_values.size()));
        for (std::size_t p = 0; p < width; ++p) {
            add(std::string(to_string(planners[p])), "optimal_cost_ratio", ratios[p]);
        }
    }
}

} // namespace

void compute_metrics(Report &report) {
    report.rows.clear();
    Pool aggregate;
    for (const auto &run : report.runs) {
        Pool pool;
        pool.absorb(run);
        emit_pool(report, run.name, pool);
        aggregate.absorb(run);
    }
    // Optimal ratios only pool across models where they exist.
    emit_pool(report, "aggregate", aggregate);
}

Report run_experiment(const std::vector<ModelSpec> &models, const SettingConfig &setting,
                      std::span<const PlannerKind> planners, const ExperimentOptions &options) {
    if (planners.empty()) {
        throw Error("run_experiment: no planners");
    }
    Report report;
    report.setting = setting;
    report.planners.assign(planners.begin(), planners.end());
    if (options.traces) {
        write_trace_csv_header(*options.traces);
    }
    for (const auto &spec : models) {
        const auto violations = validate(spec.model);
        if (!violations.empty()) {
            throw Error("model '" + spec.name + "' is invalid: " + violations.front().subject + ": " +
                        violations.front().message);
        }
        report.runs.push_back(run_model(spec, setting, planners, options));
    }
    compute_metrics(report);
    return report;
}

void write_report_csv(std::ostream &out, const Report &report) {
    std::ostringstream csv;
    csv << "# setting=" << to_string(report.setting.kind) << " seed=" << report.setting.master_seed
        << " cases_per_model=" << report.setting.cases << '\n';
    for (const auto &run : report.runs) {
        csv << "# model=" << run.name;
        if (report.setting.kind == SettingKind::gaussian) {
            csv << " sigma_fraction=" << run.sigma_fraction;
        }
        if (run.time_defaulted) {
            csv << " time=defaulted_to_cost";
        }
        csv << '\n';
    }
    csv << "planner;model;metric;value\n";
    csv.setf(std::ios::fixed);
    csv.precision(6);
    for (const auto &row : report.rows) {
        csv << row.planner << ';' << row.model << ';' << row.metric << ';' << row.value << '\n';
    }
    out << csv.str();
}

void print_report_table(std::ostream &out, const Report &report) {
    std::vector<std::string> columns;
    for (const auto &run : report.runs) {
        columns.push_back(run.name);
    }
    columns.push_back("aggregate");

    out << "setting " << to_string(report.setting.kind) << ", seed " << report.setting.master_seed << ", "
        << report.setting.cases << " cases per model\n";
    for (const auto &run : report.runs) {
        if (run.time_defaulted) {
            out << "note: " << run.name << " has no published durations; time defaults to cost\n";
        }
    }
    const auto width = [](const std::string &column) { return static_cast<int>(std::max<std::size_t>(16, column.size() + 12)); };
    out << std::left << std::setw(18) << "planner";
    for (const auto &c : columns) {
        out << std::right << std::setw(width(c)) << (c + " cost/time");
    }
    out << std::setw(14) << "us/case" << '\n';

    std::ostringstream cell;
    for (std::size_t p = 0; p < report.planners.size(); ++p) {
        const auto name = std::string(to_string(report.planners[p]));
        out << std::left << std::setw(18) << name;
        for (const auto &c : columns) {
            const auto cost = report.value(name, c, "norm_cost");
            const auto time = report.value(name, c, "norm_time");
            cell.str("");
            cell << std::fixed << std::setprecision(2);
            if (cost && time) {
                cell << *cost << " / " << *time;
            } else {
                cell << "-";
            }
            out << std::right << std::setw(width(c)) << cell.str();
        }
        double seconds = 0.0;
        std::size_t cases = 0;
        for (const auto &run : report.runs) {
            seconds += run.wall_seconds[p];
            cases += run.cases;
        }
        cell.str("");
        cell << std::fixed << std::setprecision(2) << (cases ? 1e6 * seconds / static_cast<double>(cases) : 0.0);
        out << std::right << std::setw(14) << cell.str() << '\n';
    }
}

} // namespace pdm
