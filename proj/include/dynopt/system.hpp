#ifndef DYNOPT_SYSTEM_HPP
#define DYNOPT_SYSTEM_HPP

#include <vector>

#include <dynopt/box.hpp>
#include <dynopt/expr.hpp>

namespace dynopt
{

// y' = f(t, y, p), y(t0) in y0, t in [t0, tf].
struct OdeSystem {
    int n = 0;
    int m = 0;
    std::vector<Expr> rhs;
    Box y0;
    double t0 = 0.0;
    double tf = 1.0;

    // Throws std::invalid_argument on inconsistent dimensions or tspan.
    void validate() const;
};

// Original states followed by m sensitivity blocks of n states each,
// parameter-major: slot(k, i) = n + i*n + k holds dy_k/dp_i.
struct AugmentedSystem {
    OdeSystem base;
    OdeSystem full;

    int n() const noexcept
    {
        return base.n;
    }
    int m() const noexcept
    {
        return base.m;
    }
    int slot(int state, int param) const noexcept
    {
        return base.n + param * base.n + state;
    }
};

// Forward sensitivity system s_i' = (df/dy) s_i + df/dp_i with s_i(t0) = 0
// (the initial state never depends on p). Throws UnsupportedOperation when
// the right-hand side is not differentiable.
AugmentedSystem augment(const OdeSystem &sys);

} // namespace dynopt

#endif
