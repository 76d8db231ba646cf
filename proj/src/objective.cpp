#include <stdexcept>
#include <string>

#include <dynopt/objective.hpp>

namespace dynopt
{

namespace
{

void check_indices(const Expr &e, int n, int m, const char *what)
{
    if (max_state_slot(e) >= n || max_param_index(e) >= m) {
        throw std::invalid_argument(std::string("cost: ") + what + " references an undeclared state or parameter");
    }
}

} // namespace

void CostSpec::validate(int n, int m) const
{
    if (!phi && !g) {
        throw std::invalid_argument("cost: need a terminal part, an integral part, or both");
    }
    if (phi) {
        check_indices(*phi, n, m, "terminal cost");
    }
    if (g) {
        check_indices(*g, n, m, "integrand");
    }
}

CostEvaluator::CostEvaluator(const CostSpec &spec, int n, int m)
{
    spec.validate(n, m);
    if (spec.phi) {
        has_phi_ = true;
        phi_ = Tape(std::vector<Expr>{*spec.phi});
    }
    if (spec.g) {
        has_g_ = true;
        g_ = Tape(std::vector<Expr>{*spec.g});
    }
}

Interval CostEvaluator::terminal(const FlowEnclosure &flow, const Box &p) const
{
    if (!has_phi_) {
        return Interval(0.0);
    }
    if (flow.num_steps() == 0) {
        throw std::logic_error("terminal cost: empty flow");
    }
    Interval out;
    std::vector<Interval> work;
    phi_.eval(Interval(flow.tf()), flow.final_box().view(), p.view(), std::span<Interval>(&out, 1), work);
    return out;
}

Interval CostEvaluator::continuous(const FlowEnclosure &flow, const Box &p, int subdiv) const
{
    if (!has_g_) {
        return Interval(0.0);
    }
    if (subdiv < 1) {
        throw std::invalid_argument("integral cost: subdivision factor must be >= 1");
    }
    if (flow.num_steps() == 0) {
        throw std::logic_error("integral cost: empty flow");
    }
    const auto &times = flow.times();
    std::vector<Interval> work;
    Interval total(0.0);
    Interval val;
    for (std::size_t j = 0; j < flow.num_steps(); ++j) {
        const double a = times[j];
        const double b = times[j + 1];
        if (subdiv == 1) {
            g_.eval(Interval(a, b), flow.panels()[j].view(), p.view(), std::span<Interval>(&val, 1), work);
            total += (Interval(b) - Interval(a)) * val;
            continue;
        }
        double lo = a;
        for (int q = 1; q <= subdiv; ++q) {
            const double hi = q == subdiv ? b : a + (b - a) * q / subdiv;
            if (hi <= lo) {
                continue;
            }
            const Box y = flow.sub_panel_enclosure(j, lo, hi);
            g_.eval(Interval(lo, hi), y.view(), p.view(), std::span<Interval>(&val, 1), work);
            total += (Interval(hi) - Interval(lo)) * val;
            lo = hi;
        }
    }
    return total;
}

Interval CostEvaluator::cost(const FlowEnclosure &flow, const Box &p, int subdiv) const
{
    return terminal(flow, p) + continuous(flow, p, subdiv);
}

Interval eval_terminal(const CostSpec &spec, const FlowEnclosure &flow, const Box &p)
{
    return CostEvaluator(spec, static_cast<int>(flow.dim()), static_cast<int>(p.size())).terminal(flow, p);
}

Interval eval_continuous(const CostSpec &spec, const FlowEnclosure &flow, const Box &p, int subdiv)
{
    return CostEvaluator(spec, static_cast<int>(flow.dim()), static_cast<int>(p.size())).continuous(flow, p, subdiv);
}

Interval eval_cost(const CostSpec &spec, const FlowEnclosure &flow, const Box &p, int subdiv)
{
    return CostEvaluator(spec, static_cast<int>(flow.dim()), static_cast<int>(p.size())).cost(flow, p, subdiv);
}

} // namespace dynopt
