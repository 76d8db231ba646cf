#include <algorithm>
#include <cmath>
#include <deque>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>

#include <omp.h>

#include <dynopt/bnb.hpp>

namespace dynopt
{

void Problem::validate() const
{
    sys.validate();
    cost.validate(sys.n, sys.m);
    for (const auto &c : constraints) {
        if (max_state_slot(c.expr) >= sys.n || max_param_index(c.expr) >= sys.m) {
            throw std::invalid_argument("problem: endpoint constraint references an undeclared state or parameter");
        }
        if (c.target.is_empty()) {
            throw std::invalid_argument("problem: endpoint constraint target is empty");
        }
    }
    if (pbox.size() != static_cast<std::size_t>(sys.m) || pbox.is_empty()) {
        throw std::invalid_argument("problem: parameter box must be non-empty with dimension m");
    }
    for (const auto &x : pbox) {
        if (!x.is_bounded()) {
            throw std::invalid_argument("problem: parameter box must have finite bounds");
        }
    }
}

void SolverConfig::validate(std::size_t m) const
{
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("solver: epsilon must be positive");
    }
    if (quad_subdiv < 1) {
        throw std::invalid_argument("solver: quadrature subdivision must be >= 1");
    }
    if (!(feas_tol >= 0.0)) {
        throw std::invalid_argument("solver: feasibility tolerance must be non-negative");
    }
    if (max_branches < 0) {
        throw std::invalid_argument("solver: branch limit must be non-negative");
    }
    if (m == 0) {
        throw std::invalid_argument("solver: nothing to branch on (m = 0)");
    }
}

std::size_t choose_dimension_round_robin(const Box &pbox, int depth, double min_width)
{
    const std::size_t m = pbox.size();
    if (m == 0) {
        throw std::invalid_argument("round robin: empty box");
    }
    const auto start = static_cast<std::size_t>(depth) % m;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t k = (start + i) % m;
        const double w = width(pbox[k]);
        if (w > 0.0 && w >= min_width) {
            return k;
        }
    }
    return start;
}

std::size_t choose_dimension_largest_first(const Box &pbox)
{
    if (pbox.size() == 0) {
        throw std::invalid_argument("largest first: empty box");
    }
    std::size_t best = 0;
    double wbest = width(pbox[0]);
    for (std::size_t i = 1; i < pbox.size(); ++i) {
        const double w = width(pbox[i]);
        if (w > wbest) {
            best = i;
            wbest = w;
        }
    }
    return best;
}

std::size_t choose_dimension_smear(std::span<const double> norms, std::span<const double> widths)
{
    if (norms.size() != widths.size() || widths.empty()) {
        throw std::invalid_argument("smear: need one norm per parameter");
    }
    std::size_t best = 0;
    double sbest = 0.0;
    bool found = false;
    for (std::size_t i = 0; i < widths.size(); ++i) {
        if (!(widths[i] > 0.0)) {
            continue;
        }
        double s = norms[i] * widths[i];
        if (std::isnan(s)) {
            s = std::numeric_limits<double>::infinity();
        }
        if (s > sbest) {
            best = i;
            sbest = s;
            found = true;
        }
    }
    if (found) {
        return best;
    }
    std::size_t wide = 0;
    for (std::size_t i = 1; i < widths.size(); ++i) {
        if (widths[i] > widths[wide]) {
            wide = i;
        }
    }
    return wide;
}

std::vector<double> sensitivity_norms(const AugmentedSystem &aug, const FlowEnclosure &flow, bool terminal_only)
{
    const auto n = static_cast<std::size_t>(aug.n());
    const auto m = static_cast<std::size_t>(aug.m());
    if (flow.dim() != n * (1 + m) || flow.num_steps() == 0) {
        throw std::invalid_argument("sensitivity_norms: flow does not belong to the augmented system");
    }
    std::vector<double> norms(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const auto first = static_cast<std::size_t>(aug.slot(0, static_cast<int>(i)));
        if (terminal_only) {
            norms[i] = box_inf_norm(flow.final_box(), first, n);
            continue;
        }
        for (const auto &panel : flow.panels()) {
            norms[i] = std::max(norms[i], box_inf_norm(panel, first, n));
        }
    }
    return norms;
}

std::size_t choose_dimension_smear(const AugmentedSystem &aug, const FlowEnclosure &flow, const Box &pbox,
                                   bool terminal_only, std::vector<double> *sigma)
{
    const auto norms = sensitivity_norms(aug, flow, terminal_only);
    const auto widths = pbox.widths();
    if (sigma != nullptr) {
        sigma->resize(norms.size());
        for (std::size_t i = 0; i < norms.size(); ++i) {
            (*sigma)[i] = norms[i] * widths[i];
        }
    }
    return choose_dimension_smear(norms, widths);
}

namespace
{

struct SearchNode {
    Box pbox;
    Interval cost;
    Box terminal;
    int depth = 0;
    long id = 0;
    bool failed = false;
};

struct Expansion {
    bool feasible = true;
    std::optional<double> upper;
    bool leaf = false;
    std::size_t dim = 0;
    std::vector<double> sigma;
    bool smear_failed = false;
    std::vector<SearchNode> children;
};

class Context
{
public:
    Context(const Problem &prob, const SolverConfig &cfg)
        : prob_(prob), cfg_(cfg), base_(prob.sys, cfg.integrator.order), cost_(prob.cost, prob.sys.n, prob.sys.m)
    {
        prob.validate();
        cfg.validate(prob.pbox.size());
        cfg.integrator.validate(prob.sys.t0, prob.sys.tf);
        std::vector<Expr> cs;
        for (const auto &c : prob.constraints) {
            cs.push_back(c.expr);
        }
        constraints_ = Tape(cs);
        if (cfg.heuristic == Heuristic::smear && prob.sys.m > 1) {
            aug_ = augment(prob.sys);
            aug_int_.emplace(aug_->full, cfg.integrator.order);
        }
        terminal_smear_ = cfg.smear_mode == SmearMode::terminal
                          || (cfg.smear_mode == SmearMode::automatic && !cost_.has_integral());
    }

    // Integrates the box and bounds its cost. Failures either propagate or
    // give a node that can never be discarded.
    SearchNode make_node(Box pbox, int depth, long id) const
    {
        SearchNode node{std::move(pbox), Interval::entire(), Box(), depth, id, false};
        try {
            const auto flow = base_.integrate(node.pbox, cfg_.integrator);
            node.cost = cost_.cost(flow, node.pbox, cfg_.quad_subdiv);
            node.terminal = flow.final_box();
            if (node.cost.is_empty()) {
                // Outside the domain of the cost on the whole box.
                node.cost = Interval::entire();
            }
        } catch (const IntegrationError &) {
            if (cfg_.on_failure == FailurePolicy::abort) {
                throw;
            }
            node.failed = true;
            node.cost = Interval::entire();
            node.terminal = Box(static_cast<std::size_t>(prob_.sys.n), Interval::entire());
        }
        return node;
    }

    bool feasible(const SearchNode &node) const
    {
        if (prob_.constraints.empty() || node.failed) {
            return true;
        }
        std::vector<Interval> vals(prob_.constraints.size()), work;
        constraints_.eval(Interval(prob_.sys.tf), node.terminal.view(), node.pbox.view(), vals, work);
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (disjoint(vals[i], prob_.constraints[i].target)) {
                return false;
            }
        }
        return true;
    }

    // Cost upper bound at the box midpoint, when the midpoint is feasible.
    std::optional<double> midpoint_upper(const Box &pbox) const
    {
        const Box mid = point_box(pbox.midpoint());
        try {
            const auto flow = base_.integrate(mid, cfg_.integrator);
            if (!prob_.constraints.empty()) {
                std::vector<Interval> vals(prob_.constraints.size()), work;
                constraints_.eval(Interval(flow.tf()), flow.final_box().view(), mid.view(), vals, work);
                for (std::size_t i = 0; i < vals.size(); ++i) {
                    const Interval &target = prob_.constraints[i].target;
                    const bool ok = target.is_thin()
                                        ? !disjoint(vals[i], target) && width(vals[i]) <= cfg_.feas_tol
                                        : vals[i].subset_of(target);
                    if (!ok) {
                        return std::nullopt;
                    }
                }
            }
            const Interval c = cost_.cost(flow, mid, cfg_.quad_subdiv);
            if (c.is_empty() || std::isnan(c.hi())) {
                return std::nullopt;
            }
            return c.hi();
        } catch (const IntegrationError &) {
            return std::nullopt;
        }
    }

    std::size_t choose(const SearchNode &node, std::vector<double> &sigma, bool &smear_failed) const
    {
        switch (cfg_.heuristic) {
            case Heuristic::round_robin:
                return choose_dimension_round_robin(node.pbox, node.depth, cfg_.epsilon);
            case Heuristic::largest_first:
                return choose_dimension_largest_first(node.pbox);
            case Heuristic::smear:
                break;
        }
        // Components already below epsilon are never split again.
        auto widths = node.pbox.widths();
        std::size_t open = 0;
        for (auto &w : widths) {
            if (w < cfg_.epsilon) {
                w = 0.0;
            } else {
                ++open;
            }
        }
        if (!aug_ || open <= 1) {
            return choose_dimension_largest_first(node.pbox);
        }
        try {
            const auto flow = aug_int_->integrate(node.pbox, cfg_.integrator);
            const auto norms = sensitivity_norms(*aug_, flow, terminal_smear_);
            sigma.resize(norms.size());
            for (std::size_t i = 0; i < norms.size(); ++i) {
                sigma[i] = norms[i] * widths[i];
            }
            return choose_dimension_smear(norms, widths);
        } catch (const IntegrationError &) {
            smear_failed = true;
            return choose_dimension_largest_first(node.pbox);
        }
    }

    // Steps 2 and 4 for one node, without touching shared state.
    Expansion expand(const SearchNode &node, long first_child_id) const
    {
        Expansion ex;
        ex.feasible = feasible(node);
        if (!ex.feasible) {
            return ex;
        }
        ex.upper = midpoint_upper(node.pbox);
        if (node.pbox.width() < cfg_.epsilon) {
            ex.leaf = true;
            return ex;
        }
        ex.dim = choose(node, ex.sigma, ex.smear_failed);
        auto halves = bisect(node.pbox, ex.dim);
        ex.children.push_back(make_node(std::move(halves.first), node.depth + 1, first_child_id));
        ex.children.push_back(make_node(std::move(halves.second), node.depth + 1, first_child_id + 1));
        return ex;
    }

    void emit(const Event &e) const
    {
        if (cfg_.on_event) {
            cfg_.on_event(e);
        }
    }

    const SolverConfig &cfg() const noexcept
    {
        return cfg_;
    }

private:
    const Problem &prob_;
    const SolverConfig &cfg_;
    Integrator base_;
    CostEvaluator cost_;
    Tape constraints_;
    std::optional<AugmentedSystem> aug_;
    std::optional<Integrator> aug_int_;
    bool terminal_smear_ = true;
};

// Step 6, plus whatever is still queued when a limit stopped the search.
Solution finish(const Context &ctx, Solution sol, std::vector<SearchNode> &accepted, std::deque<SearchNode> &queue,
                double incumbent)
{
    sol.incumbent = incumbent;
    for (auto &node : queue) {
        if (node.cost.lo() <= incumbent) {
            accepted.push_back(std::move(node));
        }
    }
    queue.clear();
    for (auto &node : accepted) {
        if (node.cost.lo() > incumbent) {
            ++sol.stats.discarded_leaves;
            continue;
        }
        sol.psol = sol.boxes.empty() ? node.pbox : hull(sol.psol, node.pbox);
        sol.csol = sol.boxes.empty() ? node.cost : hull(sol.csol, node.cost);
        sol.boxes.push_back(std::move(node.pbox));
        sol.costs.push_back(node.cost);
    }
    if (sol.boxes.empty() && sol.status == SolveStatus::optimal) {
        sol.status = SolveStatus::infeasible;
    }
    (void)ctx;
    return sol;
}

void note_failures(const Context &ctx, Solution &sol, const SearchNode &node)
{
    if (node.failed) {
        ++sol.stats.integration_failures;
        ctx.emit(Event{EventKind::integration_failure, node.id, node.depth, 0.0, -1, {}});
    }
}

} // namespace

Solution solve_serial(const Problem &prob, const SolverConfig &cfg)
{
    const Context ctx(prob, cfg);
    Solution sol;
    double incumbent = std::numeric_limits<double>::infinity();
    std::vector<SearchNode> accepted;
    std::deque<SearchNode> queue;
    long next_id = 0;

    queue.push_back(ctx.make_node(prob.pbox, 0, next_id++));
    sol.stats.created = 1;
    note_failures(ctx, sol, queue.back());

    while (!queue.empty()) {
        SearchNode node = std::move(queue.front());
        queue.pop_front();
        ++sol.stats.processed;
        ctx.emit(Event{EventKind::pop, node.id, node.depth, node.cost.lo(), -1, {}});

        // Step 2: constraints, then the midpoint trial.
        if (!ctx.feasible(node)) {
            ++sol.stats.infeasible;
            ctx.emit(Event{EventKind::infeasible, node.id, node.depth, 0.0, -1, {}});
            continue;
        }
        if (const auto up = ctx.midpoint_upper(node.pbox); up && *up < incumbent) {
            incumbent = *up;
            ctx.emit(Event{EventKind::incumbent, node.id, node.depth, incumbent, -1, {}});
            // Step 3.
            const auto removed = std::erase_if(queue, [&](const SearchNode &q) { return q.cost.lo() > incumbent; });
            if (removed > 0) {
                sol.stats.purged += static_cast<long>(removed);
                ctx.emit(Event{EventKind::purge, node.id, node.depth, static_cast<double>(removed), -1, {}});
            }
        }

        // Step 4.
        if (node.pbox.width() < cfg.epsilon) {
            ++sol.stats.leaves;
            ctx.emit(Event{EventKind::leaf, node.id, node.depth, node.cost.lo(), -1, {}});
            accepted.push_back(std::move(node));
            continue;
        }
        if (sol.branch_count >= cfg.max_branches) {
            sol.status = SolveStatus::limit_reached;
            queue.push_front(std::move(node));
            break;
        }
        std::vector<double> sigma;
        bool smear_failed = false;
        const std::size_t dim = ctx.choose(node, sigma, smear_failed);
        ++sol.branch_count;
        ctx.emit(Event{EventKind::bisect, node.id, node.depth, 0.0, static_cast<int>(dim), sigma});
        if (smear_failed) {
            ctx.emit(Event{EventKind::integration_failure, node.id, node.depth, 0.0, static_cast<int>(dim), {}});
        }
        auto halves = bisect(node.pbox, dim);
        for (Box *half : {&halves.first, &halves.second}) {
            SearchNode child = ctx.make_node(std::move(*half), node.depth + 1, next_id++);
            ++sol.stats.created;
            note_failures(ctx, sol, child);
            if (child.cost.lo() > incumbent) {
                // Would be removed by the next Step 3.
                ++sol.stats.purged;
                continue;
            }
            queue.push_back(std::move(child));
        }
        sol.stats.max_queue = std::max(sol.stats.max_queue, queue.size());
    }
    return finish(ctx, std::move(sol), accepted, queue, incumbent);
}

Solution solve_parallel(const Problem &prob, const SolverConfig &cfg)
{
    const Context ctx(prob, cfg);
    Solution sol;
    double incumbent = std::numeric_limits<double>::infinity();
    std::vector<SearchNode> accepted;
    std::deque<SearchNode> queue;
    long next_id = 0;
    const std::size_t batch = std::max<std::size_t>(cfg.batch, 1);
    if (cfg.threads > 0) {
        omp_set_num_threads(cfg.threads);
    }

    queue.push_back(ctx.make_node(prob.pbox, 0, next_id++));
    sol.stats.created = 1;
    note_failures(ctx, sol, queue.back());

    std::vector<SearchNode> work;
    std::vector<Expansion> results;
    while (!queue.empty()) {
        // Purging is lazy here: stale nodes are dropped when they reach the front.
        work.clear();
        while (!queue.empty() && work.size() < batch) {
            if (queue.front().cost.lo() > incumbent) {
                ++sol.stats.purged;
            } else {
                work.push_back(std::move(queue.front()));
            }
            queue.pop_front();
        }
        if (work.empty()) {
            break;
        }
        results.assign(work.size(), Expansion{});
        const long ids = next_id;
        next_id += 2 * static_cast<long>(work.size());
        std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
        for (std::size_t i = 0; i < work.size(); ++i) {
            try {
                results[i] = ctx.expand(work[i], ids + 2 * static_cast<long>(i));
            } catch (...) {
#pragma omp critical(dynopt_bnb_error)
                if (!error) {
                    error = std::current_exception();
                }
            }
        }
        if (error) {
            std::rethrow_exception(error);
        }

        for (std::size_t i = 0; i < work.size(); ++i) {
            SearchNode &node = work[i];
            Expansion &ex = results[i];
            ++sol.stats.processed;
            ctx.emit(Event{EventKind::pop, node.id, node.depth, node.cost.lo(), -1, {}});
            if (!ex.feasible) {
                ++sol.stats.infeasible;
                ctx.emit(Event{EventKind::infeasible, node.id, node.depth, 0.0, -1, {}});
                continue;
            }
            if (ex.upper && *ex.upper < incumbent) {
                incumbent = *ex.upper;
                ctx.emit(Event{EventKind::incumbent, node.id, node.depth, incumbent, -1, {}});
            }
            if (ex.leaf) {
                ++sol.stats.leaves;
                ctx.emit(Event{EventKind::leaf, node.id, node.depth, node.cost.lo(), -1, {}});
                accepted.push_back(std::move(node));
                continue;
            }
            if (sol.branch_count >= cfg.max_branches) {
                sol.status = SolveStatus::limit_reached;
                for (std::size_t j = work.size(); j-- > i;) {
                    if (results[j].feasible) {
                        queue.push_front(std::move(work[j]));
                    }
                }
                break;
            }
            ++sol.branch_count;
            ctx.emit(Event{EventKind::bisect, node.id, node.depth, 0.0, static_cast<int>(ex.dim), ex.sigma});
            if (ex.smear_failed) {
                ctx.emit(
                    Event{EventKind::integration_failure, node.id, node.depth, 0.0, static_cast<int>(ex.dim), {}});
            }
            for (auto &child : ex.children) {
                ++sol.stats.created;
                note_failures(ctx, sol, child);
                if (child.cost.lo() > incumbent) {
                    ++sol.stats.purged;
                    continue;
                }
                queue.push_back(std::move(child));
            }
        }
        if (sol.status == SolveStatus::limit_reached) {
            break;
        }
        sol.stats.max_queue = std::max(sol.stats.max_queue, queue.size());
    }
    return finish(ctx, std::move(sol), accepted, queue, incumbent);
}

Solution solve(const Problem &prob, const SolverConfig &cfg)
{
    return cfg.batch == 0 ? solve_serial(prob, cfg) : solve_parallel(prob, cfg);
}

std::optional<Box> filter_constraints(const Problem &prob, const Box &pbox, const Box &terminal)
{
    if (prob.constraints.empty()) {
        return pbox;
    }
    std::vector<Expr> cs;
    for (const auto &c : prob.constraints) {
        cs.push_back(c.expr);
    }
    const Tape tape(cs);
    std::vector<Interval> vals(cs.size()), work;
    tape.eval(Interval(prob.sys.tf), terminal.view(), pbox.view(), vals, work);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (disjoint(vals[i], prob.constraints[i].target)) {
            return std::nullopt;
        }
    }
    return pbox;
}

std::optional<Box> filter_constraints(const Problem &prob, const Box &pbox, const FlowEnclosure &flow)
{
    return filter_constraints(prob, pbox, flow.final_box());
}

const char *to_string(Heuristic h)
{
    switch (h) {
        case Heuristic::round_robin:
            return "rr";
        case Heuristic::largest_first:
            return "lf";
        case Heuristic::smear:
            return "smear";
    }
    return "?";
}

const char *to_string(SmearMode mode)
{
    switch (mode) {
        case SmearMode::automatic:
            return "auto";
        case SmearMode::terminal:
            return "terminal";
        case SmearMode::horizon:
            return "horizon";
    }
    return "?";
}

const char *to_string(SolveStatus s)
{
    switch (s) {
        case SolveStatus::optimal:
            return "optimal";
        case SolveStatus::infeasible:
            return "infeasible";
        case SolveStatus::limit_reached:
            return "limit_reached";
    }
    return "?";
}

const char *to_string(EventKind k)
{
    switch (k) {
        case EventKind::pop:
            return "pop";
        case EventKind::infeasible:
            return "infeasible";
        case EventKind::incumbent:
            return "incumbent";
        case EventKind::purge:
            return "purge";
        case EventKind::leaf:
            return "leaf";
        case EventKind::bisect:
            return "bisect";
        case EventKind::integration_failure:
            return "integration_failure";
    }
    return "?";
}

std::optional<Heuristic> parse_heuristic(std::string_view s)
{
    if (s == "rr" || s == "round-robin" || s == "round_robin") {
        return Heuristic::round_robin;
    }
    if (s == "lf" || s == "largest-first" || s == "largest_first") {
        return Heuristic::largest_first;
    }
    if (s == "smear" || s == "s") {
        return Heuristic::smear;
    }
    return std::nullopt;
}

} // namespace dynopt
