#ifndef DYNOPT_IVP_HPP
#define DYNOPT_IVP_HPP

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <dynopt/box.hpp>
#include <dynopt/system.hpp>
#include <dynopt/tape.hpp>

namespace dynopt
{

struct IntegratorConfig {
    // Taylor order k: terms 0..k-1 at the grid point, remainder of order k
    // on the a priori enclosure.
    int order = 4;
    // Nominal step; <= 0 means (tf - t0) / 50.
    double h0 = 0.0;
    double hmin = 1e-9;
    // Epsilon-inflation of the Picard candidate: rel * width + abs.
    double inflation = 0.1;
    double inflation_abs = 1e-10;
    int max_picard = 10;
    long max_steps = 100000;
    // Also bound y + h f(y, p) with its mean-value form around the box
    // midpoint and keep the intersection with the natural enclosure.
    bool centered = true;

    double nominal_step(double t0, double tf) const
    {
        return h0 > 0.0 ? h0 : (tf - t0) / 50.0;
    }
    void validate(double t0, double tf) const;
};

class IntegrationError : public std::runtime_error
{
public:
    enum class Kind { step_failure, max_steps };

    IntegrationError(Kind kind, double t_reached, const std::string &msg)
        : std::runtime_error(msg), kind_(kind), t_reached_(t_reached)
    {
    }

    Kind kind() const noexcept
    {
        return kind_;
    }
    double t_reached() const noexcept
    {
        return t_reached_;
    }

private:
    Kind kind_;
    double t_reached_;
};

// Validated flow over [t0, tf] for a parameter box: tight enclosures at the
// grid times and a priori enclosures over each step. The Taylor coefficient
// boxes of every step are kept so the flow can be re-expanded inside a step
// without integrating again.
class FlowEnclosure
{
public:
    FlowEnclosure() = default;
    FlowEnclosure(std::size_t dim, int order, Box params);

    std::size_t dim() const noexcept
    {
        return dim_;
    }
    int order() const noexcept
    {
        return order_;
    }
    std::size_t num_steps() const noexcept
    {
        return panels_.size();
    }
    const Box &params() const noexcept
    {
        return params_;
    }
    const std::vector<double> &times() const noexcept
    {
        return times_;
    }
    const std::vector<Box> &grid() const noexcept
    {
        return grid_;
    }
    const std::vector<Box> &panels() const noexcept
    {
        return panels_;
    }
    double t0() const
    {
        return times_.front();
    }
    double tf() const
    {
        return times_.back();
    }
    const Box &final_box() const
    {
        return grid_.back();
    }

    // Panel j covers [times[j], times[j+1]].
    std::size_t panel_containing(double t) const;

    // Enclosure of the flow over [a, b] within panel j, from the stored
    // Taylor expansion at times[j] and intersected with the panel.
    Box sub_panel_enclosure(std::size_t j, double a, double b) const;

    void start(double t0, Box y0);
    // Append one accepted step: its end time, the a priori box, the Taylor
    // coefficient boxes 1..k-1 at the start point, the order-k remainder box
    // and the tightened end box.
    void push_step(double t1, Box apriori, std::span<const Interval> low_coeffs, std::span<const Interval> remainder,
                   Box y1);

private:
    std::size_t dim_ = 0;
    int order_ = 0;
    Box params_;
    std::vector<double> times_;
    std::vector<Box> grid_;
    std::vector<Box> panels_;
    // Per step: k boxes of dim_ (coefficients 1..k-1, then the remainder).
    std::vector<Interval> coeffs_;
};

// Interval Taylor-series integrator with symbolically derived coefficient
// expressions, compiled once per system.
class Integrator
{
public:
    Integrator(const OdeSystem &sys, int order);

    const OdeSystem &system() const noexcept
    {
        return sys_;
    }
    int order() const noexcept
    {
        return order_;
    }
    // Normalized Taylor coefficients y^(i)/i!, i = 1..k, as expressions.
    const std::vector<std::vector<Expr>> &coefficients() const noexcept
    {
        return coeffs_;
    }

    // Returns a box satisfying yj + [0,h'] f([tj, tj+h'], box, p) subset of
    // box, and the accepted h' <= h. Throws IntegrationError below hmin.
    std::pair<Box, double> a_priori_enclosure(const Box &yj, const Box &p, double tj, double h,
                                              const IntegratorConfig &cfg) const;

    // Order-k Taylor step from (tj, yj) to tj + h with the remainder bounded on
    // the a priori box, intersected with it.
    Box tighten_step(const Box &yj, const Box &p, double tj, double h, const Box &apriori,
                     bool centered = true) const;

    FlowEnclosure integrate(const Box &p, const IntegratorConfig &cfg) const;

    // Same, starting from an explicit initial box instead of the system's y0.
    FlowEnclosure integrate(const Box &y0, const Box &p, const IntegratorConfig &cfg) const;

private:
    struct Workspace;

    bool picard(const Box &yj, const Box &p, double tj, double t1, const IntegratorConfig &cfg, Box &out,
                Workspace &ws) const;
    void expand(const Box &yj, const Box &p, double tj, double t1, const Box &apriori, bool centered, Box &out,
                std::vector<Interval> &low, std::vector<Interval> &rem, Workspace &ws) const;

    OdeSystem sys_;
    int order_;
    std::vector<std::vector<Expr>> coeffs_;
    Tape rhs_tape_;
    Tape low_tape_;
    Tape rem_tape_;
    // df/d(y, p), one row of n + m entries per state.
    Tape jac_tape_;
};

FlowEnclosure integrate(const OdeSystem &sys, const Box &p, const IntegratorConfig &cfg);

// R(t): enclosure of every trajectory at time t.
Box query_R(const FlowEnclosure &flow, double t);
// R~([tlo, thi]): hull of the a priori boxes of every step overlapping the window.
Box query_Rtilde(const FlowEnclosure &flow, double tlo, double thi);

// One row per grid time: t, then lo/hi for each state.
void write_flow_csv(std::ostream &os, const FlowEnclosure &flow);

} // namespace dynopt

#endif
