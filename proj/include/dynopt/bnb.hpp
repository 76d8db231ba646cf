#ifndef DYNOPT_BNB_HPP
#define DYNOPT_BNB_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <dynopt/box.hpp>
#include <dynopt/ivp.hpp>
#include <dynopt/objective.hpp>
#include <dynopt/system.hpp>

namespace dynopt
{

// c(y(tf), p) must lie in target.
struct EndpointConstraint {
    Expr expr;
    Interval target;
};

struct Problem {
    std::string name;
    OdeSystem sys;
    CostSpec cost;
    std::vector<EndpointConstraint> constraints;
    Box pbox;

    void validate() const;
};

enum class Heuristic { round_robin, largest_first, smear };
enum class SmearMode { automatic, terminal, horizon };
enum class FailurePolicy { abort, keep };

enum class EventKind { pop, infeasible, incumbent, purge, leaf, bisect, integration_failure };

struct Event {
    EventKind kind;
    long node = 0;
    int depth = 0;
    double value = 0.0; // lower bound, incumbent or purge count depending on kind
    int dimension = -1;
    std::vector<double> sigma;
};

struct SolverConfig {
    double epsilon = 1e-3;
    Heuristic heuristic = Heuristic::largest_first;
    IntegratorConfig integrator;
    // Rectangle-rule windows per integration step for the integral cost.
    int quad_subdiv = 1;
    long max_branches = 10'000'000;
    // Midpoint trials update the incumbent only when every equality
    // constraint encloses its target within this width.
    double feas_tol = 1e-3;
    SmearMode smear_mode = SmearMode::automatic;
    FailurePolicy on_failure = FailurePolicy::abort;
    // Parallel mode: nodes are expanded in batches of this size by OpenMP
    // threads and merged in queue order. 0 selects the serial loop.
    std::size_t batch = 0;
    int threads = 0; // 0 = OpenMP default
    std::function<void(const Event &)> on_event;

    void validate(std::size_t m) const;
};

enum class SolveStatus { optimal, infeasible, limit_reached };

struct NodeStats {
    long created = 0;
    long processed = 0;
    long infeasible = 0;
    long purged = 0;
    long leaves = 0;
    long discarded_leaves = 0;
    long integration_failures = 0;
    std::size_t max_queue = 0;
};

struct Solution {
    Box psol;
    Interval csol = Interval::empty();
    double incumbent = 0.0;
    long branch_count = 0;
    NodeStats stats;
    SolveStatus status = SolveStatus::optimal;
    // Accepted boxes and their cost enclosures, after the final filtering.
    std::vector<Box> boxes;
    std::vector<Interval> costs;
};

class SolveError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Serial reference when cfg.batch == 0, batched OpenMP otherwise.
Solution solve(const Problem &prob, const SolverConfig &cfg);
Solution solve_serial(const Problem &prob, const SolverConfig &cfg);
Solution solve_parallel(const Problem &prob, const SolverConfig &cfg);

// Empty optional when some constraint is provably violated on the box.
std::optional<Box> filter_constraints(const Problem &prob, const Box &pbox, const Box &terminal);
std::optional<Box> filter_constraints(const Problem &prob, const Box &pbox, const FlowEnclosure &flow);

// Cycles with depth, skipping components narrower than min_width (and
// zero-width ones).
std::size_t choose_dimension_round_robin(const Box &pbox, int depth, double min_width = 0.0);
std::size_t choose_dimension_largest_first(const Box &pbox);
// sigma_i = norms[i] * widths[i]; zero widths never win; all sigma zero
// falls back to the widest component.
std::size_t choose_dimension_smear(std::span<const double> norms, std::span<const double> widths);
// Sensitivity norms of each parameter block of an augmented flow, either
// over all panels or at tf only.
std::vector<double> sensitivity_norms(const AugmentedSystem &aug, const FlowEnclosure &flow, bool terminal_only);
std::size_t choose_dimension_smear(const AugmentedSystem &aug, const FlowEnclosure &flow, const Box &pbox,
                                   bool terminal_only, std::vector<double> *sigma = nullptr);

const char *to_string(Heuristic h);
const char *to_string(SmearMode mode);
const char *to_string(SolveStatus s);
const char *to_string(EventKind k);
std::optional<Heuristic> parse_heuristic(std::string_view s);

} // namespace dynopt

#endif
