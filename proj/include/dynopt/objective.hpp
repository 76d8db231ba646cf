#ifndef DYNOPT_OBJECTIVE_HPP
#define DYNOPT_OBJECTIVE_HPP

#include <optional>
#include <vector>

#include <dynopt/box.hpp>
#include <dynopt/expr.hpp>
#include <dynopt/ivp.hpp>
#include <dynopt/tape.hpp>

namespace dynopt
{

// J(p) = phi(y(tf), p) + integral over [t0, tf] of g(t, y, p).
struct CostSpec {
    std::optional<Expr> phi;
    std::optional<Expr> g;

    // Throws std::invalid_argument when both parts are missing or an
    // expression references an index outside (n, m).
    void validate(int n, int m) const;
};

// Compiled form of a CostSpec. Evaluation is const and thread-safe.
class CostEvaluator
{
public:
    CostEvaluator(const CostSpec &spec, int n, int m);

    // phi(R(tf), p); [0, 0] without a terminal part.
    Interval terminal(const FlowEnclosure &flow, const Box &p) const;
    // Rectangle rule over the integration steps, each split into `subdiv`
    // equal windows enclosed from the step's Taylor expansion.
    Interval continuous(const FlowEnclosure &flow, const Box &p, int subdiv = 1) const;
    Interval cost(const FlowEnclosure &flow, const Box &p, int subdiv = 1) const;

    bool has_terminal() const noexcept
    {
        return has_phi_;
    }
    bool has_integral() const noexcept
    {
        return has_g_;
    }

private:
    bool has_phi_ = false;
    bool has_g_ = false;
    Tape phi_;
    Tape g_;
};

Interval eval_terminal(const CostSpec &spec, const FlowEnclosure &flow, const Box &p);
Interval eval_continuous(const CostSpec &spec, const FlowEnclosure &flow, const Box &p, int subdiv = 1);
Interval eval_cost(const CostSpec &spec, const FlowEnclosure &flow, const Box &p, int subdiv = 1);

} // namespace dynopt

#endif
