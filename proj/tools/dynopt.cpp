#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <dynopt/bnb.hpp>
#include <dynopt/ivp.hpp>
#include <dynopt/parser.hpp>
#include <dynopt/problem_file.hpp>
#include <dynopt/problems.hpp>

#include "report.hpp"

using namespace dynopt;

namespace
{

enum Exit { ok = 0, other = 1, usage = 2, integration = 3, limit = 4 };

class UsageError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct Loaded {
    Problem problem;
    SolverConfig defaults;
    const CatalogEntry *entry = nullptr;
};

// A catalog name, or else a problem file path.
Loaded load(const std::string &ref)
{
    if (const CatalogEntry *e = find_problem(ref)) {
        return {e->problem, e->defaults, e};
    }
    if (!std::filesystem::exists(ref)) {
        throw UsageError("'" + ref + "' is neither a built-in problem nor a file (see 'dynopt list')");
    }
    return {load_problem(ref), SolverConfig{}, nullptr};
}

struct SolverFlags {
    std::string heuristic;
    std::optional<double> epsilon;
    std::optional<int> order;
    std::optional<double> step;
    std::optional<long> max_branches;
    std::optional<double> feas_tol;
    std::string smear_mode;
    std::optional<int> subdiv;
    std::optional<std::size_t> batch;
    std::optional<int> threads;
    std::string on_failure;
    bool natural = false;

    void add_to(CLI::App &app, bool with_heuristic)
    {
        if (with_heuristic) {
            app.add_option("--heuristic", heuristic, "Bisection rule: rr, lf or smear (default lf)");
            app.add_option("--epsilon", epsilon, "Width threshold below which a box is a solution");
        }
        app.add_option("--order", order, "Taylor order of the integrator (2-10, default 4)");
        app.add_option("--step", step, "Nominal integration step (default (tf - t0)/50)");
        app.add_option("--max-branches", max_branches, "Stop after this many bisections");
        app.add_option("--feas-tol", feas_tol, "Width tolerance for equality constraints at midpoints");
        app.add_option("--smear-mode", smear_mode, "Smear norm: auto, terminal or horizon");
        app.add_option("--subdiv", subdiv, "Rectangle-rule windows per integration step");
        app.add_option("--batch", batch, "Parallel mode: nodes expanded per batch (0 = serial)");
        app.add_option("--threads", threads, "OpenMP threads in parallel mode (0 = default)");
        app.add_option("--on-failure", on_failure, "Integration failure policy: abort or keep");
        app.add_flag("--natural", natural, "Natural interval enclosure only (no centered step form)");
    }

    SolverConfig apply(SolverConfig cfg) const
    {
        if (!heuristic.empty()) {
            const auto h = parse_heuristic(heuristic);
            if (!h) {
                throw UsageError("unknown heuristic '" + heuristic + "' (expected rr, lf or smear)");
            }
            cfg.heuristic = *h;
        }
        if (epsilon) {
            cfg.epsilon = *epsilon;
        }
        if (order) {
            cfg.integrator.order = *order;
        }
        if (step) {
            cfg.integrator.h0 = *step;
        }
        if (max_branches) {
            cfg.max_branches = *max_branches;
        }
        if (feas_tol) {
            cfg.feas_tol = *feas_tol;
        }
        if (!smear_mode.empty()) {
            if (smear_mode == "auto") {
                cfg.smear_mode = SmearMode::automatic;
            } else if (smear_mode == "terminal") {
                cfg.smear_mode = SmearMode::terminal;
            } else if (smear_mode == "horizon") {
                cfg.smear_mode = SmearMode::horizon;
            } else {
                throw UsageError("unknown smear mode '" + smear_mode + "' (expected auto, terminal or horizon)");
            }
        }
        if (subdiv) {
            cfg.quad_subdiv = *subdiv;
        }
        if (batch) {
            cfg.batch = *batch;
        }
        if (threads) {
            cfg.threads = *threads;
        }
        if (!on_failure.empty()) {
            if (on_failure == "abort") {
                cfg.on_failure = FailurePolicy::abort;
            } else if (on_failure == "keep") {
                cfg.on_failure = FailurePolicy::keep;
            } else {
                throw UsageError("unknown failure policy '" + on_failure + "' (expected abort or keep)");
            }
        }
        if (natural) {
            cfg.integrator.centered = false;
        }
        return cfg;
    }
};

report::Format format_of(const std::string &s)
{
    const auto f = report::parse_format(s);
    if (!f) {
        throw UsageError("unknown format '" + s + "' (expected json, csv or table)");
    }
    return *f;
}

// Writes to the file when a path is given, to stdout otherwise.
template <typename F>
void emit(const std::string &path, F &&write)
{
    if (path.empty() || path == "-") {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    write(os);
}

report::Run timed_solve(const std::string &name, const Problem &prob, const SolverConfig &cfg)
{
    const auto start = std::chrono::steady_clock::now();
    Solution sol = solve(prob, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {name, cfg, std::move(sol), secs};
}

std::vector<double> parse_list(const std::string &s)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception &) {
            throw UsageError("bad number '" + item + "' in list");
        }
    }
    return out;
}

Box parse_box(const std::string &s, std::size_t m)
{
    // "lo:hi,lo:hi" or "v,v"
    Box b;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        try {
            if (colon == std::string::npos) {
                b.push_back(Interval(std::stod(item)));
            } else {
                b.push_back(Interval(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))));
            }
        } catch (const std::exception &) {
            throw UsageError("bad parameter component '" + item + "'");
        }
    }
    if (b.size() != m) {
        throw UsageError("parameter box needs " + std::to_string(m) + " components");
    }
    return b;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Guaranteed global optimization of parametrized ODE problems"};
    app.require_subcommand(1);

    // run
    auto *run = app.add_subcommand("run", "Solve one problem and write a report");
    std::string run_problem, run_format = "json", run_out, run_events;
    SolverFlags run_flags;
    run->add_option("problem", run_problem, "Built-in problem name or problem file")->required();
    run_flags.add_to(*run, true);
    run->add_option("--format", run_format, "Report format: json, csv or table");
    run->add_option("--out", run_out, "Write the report to this file");
    run->add_option("--events", run_events, "Write the event stream (JSON lines) to this file, '-' for stderr");

    // bench
    auto *bench = app.add_subcommand("bench", "Compare heuristics over several precisions");
    std::string bench_problem, bench_format = "table", bench_out, bench_heuristics = "lf,smear", bench_eps;
    SolverFlags bench_flags;
    bench->add_option("problem", bench_problem, "Built-in problem name or problem file")->required();
    bench_flags.add_to(*bench, false);
    bench->add_option("--heuristics", bench_heuristics, "Comma-separated heuristics (default lf,smear)");
    bench->add_option("--epsilons", bench_eps, "Comma-separated precisions (default: the published table)");
    bench->add_option("--format", bench_format, "Report format: json, csv or table");
    bench->add_option("--out", bench_out, "Write the report to this file");

    // list
    auto *list = app.add_subcommand("list", "List the built-in problems");

    // export
    auto *exp = app.add_subcommand("export", "Print a problem in the problem-file format");
    std::string exp_problem, exp_out;
    exp->add_option("problem", exp_problem, "Built-in problem name or problem file")->required();
    exp->add_option("--out", exp_out, "Write to this file");

    // flow
    auto *flow = app.add_subcommand("flow", "Integrate once and dump the enclosure as CSV");
    std::string flow_problem, flow_out, flow_params;
    SolverFlags flow_flags;
    flow->add_option("problem", flow_problem, "Built-in problem name or problem file")->required();
    flow->add_option("--params", flow_params, "Parameter box as lo:hi or values, comma-separated (default: whole box)");
    flow->add_flag("--sensitivities", "Integrate the sensitivity-augmented system");
    flow_flags.add_to(*flow, false);
    flow->add_option("--out", flow_out, "Write to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? Exit::ok : Exit::usage;
    }

    try {
        if (*run) {
            const Loaded l = load(run_problem);
            SolverConfig cfg = run_flags.apply(l.defaults);
            const auto fmt = format_of(run_format);
            std::ofstream events_file;
            std::ostream *events = nullptr;
            if (run_events == "-") {
                events = &std::cerr;
            } else if (!run_events.empty()) {
                events_file.open(run_events);
                if (!events_file) {
                    throw std::runtime_error("cannot open '" + run_events + "' for writing");
                }
                events = &events_file;
            }
            if (events != nullptr) {
                cfg.on_event = [events](const Event &e) { *events << report::event_json(e).dump() << '\n'; };
            }
            const report::Run r = timed_solve(l.problem.name, l.problem, cfg);
            emit(run_out, [&](std::ostream &os) { report::write_run(os, r, fmt); });
            return r.sol.status == SolveStatus::limit_reached ? Exit::limit : Exit::ok;
        }
        if (*bench) {
            const Loaded l = load(bench_problem);
            const SolverConfig base = bench_flags.apply(l.defaults);
            const auto fmt = format_of(bench_format);
            std::vector<double> eps = parse_list(bench_eps);
            if (eps.empty() && l.entry != nullptr) {
                for (const auto &row : l.entry->ref.table) {
                    eps.push_back(row.epsilon);
                }
            }
            if (eps.empty()) {
                eps.push_back(base.epsilon);
            }
            std::vector<Heuristic> hs;
            std::stringstream ss(bench_heuristics);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const auto h = parse_heuristic(item);
                if (!h) {
                    throw UsageError("unknown heuristic '" + item + "'");
                }
                hs.push_back(*h);
            }
            if (hs.empty()) {
                throw UsageError("no heuristics given");
            }
            std::vector<report::BenchRow> rows;
            bool limited = false;
            for (double e : eps) {
                report::BenchRow row{e, {}};
                for (Heuristic h : hs) {
                    SolverConfig cfg = base;
                    cfg.heuristic = h;
                    cfg.epsilon = e;
                    row.runs.push_back(timed_solve(l.problem.name, l.problem, cfg));
                    limited = limited || row.runs.back().sol.status == SolveStatus::limit_reached;
                }
                rows.push_back(std::move(row));
            }
            emit(bench_out, [&](std::ostream &os) { report::write_bench(os, l.problem.name, rows, fmt); });
            return limited ? Exit::limit : Exit::ok;
        }
        if (*list) {
            for (const auto &e : catalog()) {
                std::cout << e.name << (e.synthetic ? "  (synthetic)" : "") << "\n    " << e.description << '\n';
            }
            return Exit::ok;
        }
        if (*exp) {
            const Loaded l = load(exp_problem);
            emit(exp_out, [&](std::ostream &os) { os << format_problem(l.problem); });
            return Exit::ok;
        }
        if (*flow) {
            const Loaded l = load(flow_problem);
            const SolverConfig cfg = flow_flags.apply(l.defaults);
            const Box p = flow_params.empty() ? l.problem.pbox : parse_box(flow_params, l.problem.pbox.size());
            const bool sens = flow->count("--sensitivities") > 0;
            const OdeSystem sys = sens ? augment(l.problem.sys).full : l.problem.sys;
            const FlowEnclosure f = integrate(sys, p, cfg.integrator);
            emit(flow_out, [&](std::ostream &os) { write_flow_csv(os, f); });
            return Exit::ok;
        }
    } catch (const UsageError &e) {
        std::cerr << "dynopt: " << e.what() << '\n';
        return Exit::usage;
    } catch (const ProblemFileError &e) {
        std::cerr << "dynopt: problem file: " << e.what() << '\n';
        return Exit::usage;
    } catch (const ParseError &e) {
        std::cerr << "dynopt: " << e.what() << '\n';
        return Exit::usage;
    } catch (const IntegrationError &e) {
        std::cerr << "dynopt: integration failed: " << e.what() << '\n';
        return Exit::integration;
    } catch (const std::invalid_argument &e) {
        std::cerr << "dynopt: invalid setting: " << e.what() << '\n';
        return Exit::usage;
    } catch (const std::exception &e) {
        std::cerr << "dynopt: " << e.what() << '\n';
        return Exit::other;
    }
    return Exit::other;
}
