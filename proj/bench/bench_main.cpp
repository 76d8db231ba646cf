#include <vector>

#include <benchmark/benchmark.h>

#include <dynopt/bnb.hpp>
#include <dynopt/ivp.hpp>
#include <dynopt/problems.hpp>
#include <dynopt/system.hpp>
#include <dynopt/tape.hpp>

using namespace dynopt;

namespace
{

const CatalogEntry &entry(const char *name)
{
    return *find_problem(name);
}

// Sensitivity-augmented right-hand side of the polynomial problem.
const OdeSystem &augmented_polynomial()
{
    static const OdeSystem sys = augment(entry("polynomial").problem.sys).full;
    return sys;
}

void BM_rhs_tree(benchmark::State &state)
{
    const OdeSystem &sys = augmented_polynomial();
    const Box y(static_cast<std::size_t>(sys.n), Interval(0.5, 1.0));
    const Box p(3, Interval(0.95, 1.0));
    for (auto _ : state) {
        for (const Expr &e : sys.rhs) {
            benchmark::DoNotOptimize(eval_interval(e, Interval(0.0, 0.1), y, p));
        }
    }
}
BENCHMARK(BM_rhs_tree);

void BM_rhs_tape(benchmark::State &state)
{
    const OdeSystem &sys = augmented_polynomial();
    const Tape tape(sys.rhs);
    const Box y(static_cast<std::size_t>(sys.n), Interval(0.5, 1.0));
    const Box p(3, Interval(0.95, 1.0));
    std::vector<Interval> out(sys.rhs.size());
    std::vector<Interval> work;
    for (auto _ : state) {
        tape.eval(Interval(0.0, 0.1), y, p, out, work);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_rhs_tape);

void BM_integrate(benchmark::State &state)
{
    const Problem &prob = entry("polynomial").problem;
    const AugmentedSystem aug = augment(prob.sys);
    const Box p(3, Interval(0.95, 0.96));
    IntegratorConfig cfg;
    cfg.order = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(integrate(aug.full, p, cfg));
    }
}
BENCHMARK(BM_integrate)->Arg(2)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

SolverConfig solver_config(Heuristic h, std::size_t batch, int threads)
{
    SolverConfig cfg = entry("polynomial").defaults;
    cfg.heuristic = h;
    cfg.epsilon = 1e-2;
    cfg.batch = batch;
    cfg.threads = threads;
    return cfg;
}

void BM_solve_serial(benchmark::State &state)
{
    const SolverConfig cfg = solver_config(static_cast<Heuristic>(state.range(0)), 0, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_serial(entry("polynomial").problem, cfg));
    }
}
BENCHMARK(BM_solve_serial)
    ->Arg(static_cast<int>(Heuristic::largest_first))
    ->Arg(static_cast<int>(Heuristic::smear))
    ->Unit(benchmark::kMillisecond);

// Arguments: heuristic, batch size, threads (0 = OpenMP default).
void BM_solve_parallel(benchmark::State &state)
{
    const SolverConfig cfg = solver_config(static_cast<Heuristic>(state.range(0)),
                                           static_cast<std::size_t>(state.range(1)), static_cast<int>(state.range(2)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_parallel(entry("polynomial").problem, cfg));
    }
}
BENCHMARK(BM_solve_parallel)
    ->Args({static_cast<int>(Heuristic::largest_first), 16, 0})
    ->Args({static_cast<int>(Heuristic::smear), 16, 0})
    ->Args({static_cast<int>(Heuristic::smear), 64, 0})
    ->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
