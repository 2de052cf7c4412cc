#include "pdm/cli.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "pdm/experiments.hpp"

namespace pdm {

namespace {

constexpr int exit_ok = 0;
constexpr int exit_model_error = 1;
constexpr int exit_usage = 2;

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

PlannerKind planner_or_usage(const std::string &name) {
    if (const auto kind = parse_planner_kind(name)) {
        return *kind;
    }
    std::string known;
    for (const auto k : all_planners) {
        known += known.empty() ? "" : ", ";
        known += to_string(k);
    }
    throw UsageError("unknown heuristic '" + name + "' (expected one of: " + known + ")");
}

SettingKind setting_or_usage(const std::string &name) {
    if (name == "gaussian" || name == "1") {
        return SettingKind::gaussian;
    }
    if (name == "uniform" || name == "2") {
        return SettingKind::uniform;
    }
    throw UsageError("unknown setting '" + name + "' (expected gaussian or uniform)");
}

// Loads a model and rejects structurally invalid ones.
ModelSpec load_valid(const std::string &reference) {
    auto spec = resolve_model(reference);
    const auto violations = validate(spec.model);
    if (!violations.empty()) {
        std::string message = "invalid model '" + reference + "':";
        for (const auto &v : violations) {
            message += "\n  " + v.subject + ": " + v.message;
        }
        throw Error(message);
    }
    return spec;
}

int cmd_validate(const std::string &reference, std::ostream &out) {
    const auto spec = resolve_model(reference);
    const auto violations = validate(spec.model);
    if (violations.empty()) {
        out << "OK\n";
        return exit_ok;
    }
    for (const auto &v : violations) {
        out << v.subject << ": " << v.message << '\n';
    }
    return exit_model_error;
}

int cmd_plan(const std::string &reference, const std::string &heuristic, std::uint64_t seed,
             const std::vector<std::string> &fail, std::ostream &out) {
    const auto planner = planner_or_usage(heuristic);
    const auto spec = load_valid(reference);
    const auto graph = normalize(spec.model);

    std::vector<bool> outcomes(graph.operation_count(), true);
    for (const auto &id : fail) {
        const auto op = graph.find_operation(id);
        if (!op || graph.op(*op).artificial) {
            throw Error("unknown operation '" + id + "'");
        }
        outcomes[*op] = false;
    }
    auto instance = fixed_instance(graph, std::move(outcomes));
    instance.seed = seed;
    const auto trace = execute(graph, planner, instance);

    auto state = LivenessState::initial(graph);
    std::ostringstream text;
    text << std::fixed << std::setprecision(6);
    text << "step;op;success;cum_cost;cum_time;meaningless\n";
    for (std::size_t s = 0; s < trace.steps.size(); ++s) {
        const auto &step = trace.steps[s];
        state.executed[step.op] = true;
        state.failed[step.op] = !step.success;
        recompute_liveness(state, graph);
        std::string meaningless;
        for (const auto op : state.meaningless_ops()) {
            if (!graph.op(op).artificial) {
                meaningless += meaningless.empty() ? "" : ",";
                meaningless += graph.op(op).id;
            }
        }
        text << s + 1 << ';' << graph.op(step.op).id << ';' << (step.success ? 1 : 0) << ';' << step.cum_cost << ';'
             << step.cum_time << ';' << meaningless << '\n';
    }
    text << "status: " << to_string(trace.status) << '\n';
    text << "total_cost: " << trace.total_cost << "\ntotal_time: " << trace.total_time << '\n';
    out << text.str();
    return exit_ok;
}

struct SimulateArgs {
    std::string reference;
    std::string heuristic;
    std::size_t cases = 10000;
    std::string setting = "gaussian";
    std::uint64_t seed = 0;
    std::optional<double> sigma;
    std::string traces;
    unsigned threads = 1;
};

int cmd_simulate(const SimulateArgs &args, std::ostream &out) {
    const auto planner = planner_or_usage(args.heuristic);
    SettingConfig setting;
    setting.kind = setting_or_usage(args.setting);
    setting.cases = args.cases;
    setting.master_seed = args.seed;
    auto spec = load_valid(args.reference);
    if (args.sigma) {
        spec.sigma_fraction = *args.sigma;
    }

    std::ofstream trace_file;
    ExperimentOptions options;
    options.threads = args.threads;
    if (!args.traces.empty()) {
        trace_file.open(args.traces, std::ios::binary);
        if (!trace_file) {
            throw Error("cannot write '" + args.traces + "'");
        }
        options.traces = &trace_file;
    }
    const std::array planners{planner};
    const auto report = run_experiment({spec}, setting, planners, options);
    const auto &run = report.runs.front();

    std::size_t succeeded = 0, produced = 0, early = 0;
    double cost = 0.0, time = 0.0, failed_cost = 0.0, failed_time = 0.0;
    for (std::size_t i = 0; i < run.cases; ++i) {
        produced += run.status[i][0] == TraceStatus::root_produced;
        early += run.status[i][0] == TraceStatus::early_terminated;
        if (run.producible[i]) {
            ++succeeded;
            cost += run.cost[i][0];
            time += run.time[i][0];
        } else {
            failed_cost += run.cost[i][0];
            failed_time += run.time[i][0];
        }
    }
    const auto mean = [](double sum, std::size_t n) { return n ? sum / static_cast<double>(n) : 0.0; };
    const std::size_t failed = run.cases - succeeded;

    std::ostringstream text;
    text << std::fixed << std::setprecision(6);
    text << "model: " << run.name << "\nheuristic: " << to_string(planner) << "\nsetting: " << to_string(setting.kind)
         << "\nseed: " << setting.master_seed << "\ncases: " << run.cases << '\n';
    if (run.time_defaulted) {
        text << "note: time defaults to cost for this model\n";
    }
    text << "root_producible_cases: " << succeeded << "\nroot_produced: " << produced
         << "\nearly_terminated: " << early << '\n';
    text << "mean_cost_successful: " << mean(cost, succeeded) << "\nmean_time_successful: " << mean(time, succeeded)
         << '\n';
    text << "mean_cost_failed: " << mean(failed_cost, failed) << "\nmean_time_failed: " << mean(failed_time, failed)
         << '\n';
    text << "wall_us_per_case: " << std::setprecision(2) << mean(1e6 * run.wall_seconds[0], run.cases) << '\n';
    out << text.str();
    return exit_ok;
}

int cmd_enumerate(const std::string &reference, std::size_t cap, std::ostream &out) {
    const auto spec = load_valid(reference);
    const auto sets = enumerate_complete_paths(spec.model, cap);
    write_complete_paths_csv(out, spec.model, sets);
    return exit_ok;
}

struct ReportArgs {
    std::vector<std::string> models{"mortgage", "social_insurance", "monitoring"};
    std::string setting = "gaussian";
    std::uint64_t seed = 0;
    std::string out_path;
    std::size_t cases = 10000;
    unsigned threads = 1;
    std::string traces;
};

int cmd_report(const ReportArgs &args, std::ostream &out) {
    SettingConfig setting;
    setting.kind = setting_or_usage(args.setting);
    setting.cases = args.cases;
    setting.master_seed = args.seed;
    std::vector<ModelSpec> models;
    for (const auto &m : args.models) {
        models.push_back(load_valid(m));
    }

    std::ofstream trace_file;
    ExperimentOptions options;
    options.threads = args.threads;
    if (!args.traces.empty()) {
        trace_file.open(args.traces, std::ios::binary);
        if (!trace_file) {
            throw Error("cannot write '" + args.traces + "'");
        }
        options.traces = &trace_file;
    }
    const auto report = run_experiment(models, setting, all_planners, options);
    if (args.out_path.empty()) {
        write_report_csv(out, report);
    } else {
        std::ofstream csv(args.out_path, std::ios::binary);
        if (!csv) {
            throw Error("cannot write '" + args.out_path + "'");
        }
        write_report_csv(csv, report);
        print_report_table(out, report);
    }
    return exit_ok;
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Plan and simulate product data model execution"};
    app.require_subcommand(1);

    std::string reference;
    std::string heuristic;
    std::uint64_t seed = 0;

    auto *validate_cmd = app.add_subcommand("validate", "Check a model for structural problems");
    validate_cmd->add_option("model", reference, "Model file or builtin:NAME")->required();

    std::vector<std::string> fail;
    auto *plan_cmd = app.add_subcommand("plan", "Run one case with table attributes and print the steps");
    plan_cmd->add_option("model", reference, "Model file or builtin:NAME")->required();
    plan_cmd->add_option("--heuristic", heuristic, "Planner name")->required();
    plan_cmd->add_option("--seed", seed, "Seed for the random planner");
    plan_cmd->add_option("--fail", fail, "Operations forced to fail");

    SimulateArgs sim;
    auto *simulate_cmd = app.add_subcommand("simulate", "Simulate one planner over sampled cases");
    simulate_cmd->add_option("model", sim.reference, "Model file or builtin:NAME")->required();
    simulate_cmd->add_option("--heuristic", sim.heuristic, "Planner name")->required();
    simulate_cmd->add_option("--cases", sim.cases, "Number of cases");
    simulate_cmd->add_option("--setting", sim.setting, "gaussian or uniform");
    simulate_cmd->add_option("--seed", sim.seed, "Master seed");
    simulate_cmd->add_option("--sigma", sim.sigma, "Gaussian sigma as a fraction of the table value");
    simulate_cmd->add_option("--traces", sim.traces, "Write per-case traces to this CSV file");
    simulate_cmd->add_option("--threads", sim.threads, "Worker threads");

    std::size_t cap = default_enumeration_cap;
    auto *enumerate_cmd = app.add_subcommand("enumerate", "List minimal complete path sets");
    enumerate_cmd->add_option("model", reference, "Model file or builtin:NAME")->required();
    enumerate_cmd->add_option("--cap", cap, "Maximum number of sets");

    ReportArgs rep;
    auto *report_cmd = app.add_subcommand("report", "Run every planner on every model and emit the metrics");
    report_cmd->add_option("--models", rep.models, "Comma-separated models")->delimiter(',');
    report_cmd->add_option("--setting", rep.setting, "gaussian or uniform");
    report_cmd->add_option("--seed", rep.seed, "Master seed");
    report_cmd->add_option("--out", rep.out_path, "CSV destination (stdout when omitted)");
    report_cmd->add_option("--cases", rep.cases, "Cases per model");
    report_cmd->add_option("--threads", rep.threads, "Worker threads");
    report_cmd->add_option("--traces", rep.traces, "Write per-case traces to this CSV file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return exit_usage;
    }

    try {
        if (validate_cmd->parsed()) {
            return cmd_validate(reference, out);
        }
        if (plan_cmd->parsed()) {
            return cmd_plan(reference, heuristic, seed, fail, out);
        }
        if (simulate_cmd->parsed()) {
            return cmd_simulate(sim, out);
        }
        if (enumerate_cmd->parsed()) {
            if (cap == 0) {
                throw UsageError("--cap must be positive");
            }
            return cmd_enumerate(reference, cap, out);
        }
        if (report_cmd->parsed()) {
            if (rep.cases == 0) {
                throw UsageError("--cases must be positive");
            }
            return cmd_report(rep, out);
        }
    } catch (const UsageError &e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return exit_model_error;
    }
    return exit_usage;
}

} // namespace pdm
