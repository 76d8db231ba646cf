#include <stdexcept>
#include <string>

#include <dynopt/system.hpp>

namespace dynopt
{

void OdeSystem::validate() const
{
    if (n <= 0) {
        throw std::invalid_argument("system: state dimension must be positive");
    }
    if (m < 0) {
        throw std::invalid_argument("system: parameter dimension must be non-negative");
    }
    if (rhs.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("system: expected " + std::to_string(n) + " right-hand sides, got "
                                    + std::to_string(rhs.size()));
    }
    if (y0.size() != static_cast<std::size_t>(n) || y0.is_empty()) {
        throw std::invalid_argument("system: initial state must be a non-empty box of dimension n");
    }
    if (!(t0 < tf) || !std::isfinite(t0) || !std::isfinite(tf)) {
        throw std::invalid_argument("system: need finite t0 < tf");
    }
    for (const auto &f : rhs) {
        if (max_state_slot(f) >= n) {
            throw std::invalid_argument("system: right-hand side references an undeclared state");
        }
        if (max_param_index(f) >= m) {
            throw std::invalid_argument("system: right-hand side references an undeclared parameter");
        }
    }
}

AugmentedSystem augment(const OdeSystem &sys)
{
    sys.validate();
    const int n = sys.n;
    const int m = sys.m;

    // Jacobians are shared across all parameter blocks.
    std::vector<std::vector<Expr>> dfdy(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            dfdy[k].push_back(differentiate(sys.rhs[k], Var::state(j)));
        }
    }

    OdeSystem full;
    full.n = n * (1 + m);
    full.m = m;
    full.t0 = sys.t0;
    full.tf = sys.tf;
    full.rhs = sys.rhs;
    full.y0 = sys.y0;
    for (int i = 0; i < m; ++i) {
        for (int k = 0; k < n; ++k) {
            Expr rhs = differentiate(sys.rhs[k], Var::param(i));
            for (int j = 0; j < n; ++j) {
                rhs = rhs + dfdy[k][j] * Expr::sens(j, i, n);
            }
            full.rhs.push_back(rhs);
            full.y0.push_back(Interval(0.0));
        }
    }
    return AugmentedSystem{sys, std::move(full)};
}

} // namespace dynopt
