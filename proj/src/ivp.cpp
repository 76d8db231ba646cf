#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>

#include <dynopt/ivp.hpp>

namespace dynopt
{

void IntegratorConfig::validate(double t0, double tf) const
{
    if (order < 2 || order > 10) {
        throw std::invalid_argument("integrator: order must be in [2, 10]");
    }
    const double h = nominal_step(t0, tf);
    if (!(hmin > 0.0) || !(hmin <= h) || !(h <= tf - t0)) {
        throw std::invalid_argument("integrator: need 0 < hmin <= h0 <= tf - t0");
    }
    if (!(inflation > 0.0) || inflation_abs < 0.0) {
        throw std::invalid_argument("integrator: inflation factor must be positive");
    }
    if (max_picard < 1 || max_steps < 1) {
        throw std::invalid_argument("integrator: iteration limits must be positive");
    }
}

FlowEnclosure::FlowEnclosure(std::size_t dim, int order, Box params)
    : dim_(dim), order_(order), params_(std::move(params))
{
}

void FlowEnclosure::start(double t0, Box y0)
{
    times_.assign(1, t0);
    grid_.assign(1, std::move(y0));
    panels_.clear();
    coeffs_.clear();
}

void FlowEnclosure::push_step(double t1, Box apriori, std::span<const Interval> low_coeffs,
                              std::span<const Interval> remainder, Box y1)
{
    times_.push_back(t1);
    panels_.push_back(std::move(apriori));
    grid_.push_back(std::move(y1));
    coeffs_.insert(coeffs_.end(), low_coeffs.begin(), low_coeffs.end());
    coeffs_.insert(coeffs_.end(), remainder.begin(), remainder.end());
}

std::size_t FlowEnclosure::panel_containing(double t) const
{
    if (panels_.empty()) {
        throw std::logic_error("flow has no steps");
    }
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const auto j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - times_.begin()) - 1));
    return std::min(j, panels_.size() - 1);
}

Box FlowEnclosure::sub_panel_enclosure(std::size_t j, double a, double b) const
{
    if (j >= panels_.size() || a > b) {
        throw std::out_of_range("sub_panel_enclosure: bad panel or window");
    }
    const double tj = times_[j];
    const Interval tau(std::max(0.0, rounding::sub_down(a, tj)), std::max(0.0, rounding::sub_up(b, tj)));
    const std::size_t k = static_cast<std::size_t>(order_);
    const Interval *c = coeffs_.data() + j * k * dim_;
    Box out(dim_);
    for (std::size_t s = 0; s < dim_; ++s) {
        // Horner from the remainder (stored last) down to the first coefficient.
        Interval acc = c[(k - 1) * dim_ + s];
        for (std::size_t i = k - 1; i-- > 0;) {
            acc = acc * tau + c[i * dim_ + s];
        }
        acc = acc * tau + grid_[j][s];
        out[s] = intersect(acc, panels_[j][s]);
    }
    return out;
}

struct Integrator::Workspace {
    std::vector<Interval> f;
    std::vector<Interval> tape;
    std::vector<Interval> jac;
    std::vector<Interval> center;
    Box ymid;
    Box pmid;
};

Integrator::Integrator(const OdeSystem &sys, int order) : sys_(sys), order_(order)
{
    sys_.validate();
    if (order < 2 || order > 10) {
        throw std::invalid_argument("integrator: order must be in [2, 10]");
    }
    const auto n = static_cast<std::size_t>(sys_.n);
    coeffs_.push_back(sys_.rhs);
    for (int i = 1; i < order; ++i) {
        const auto &prev = coeffs_.back();
        std::vector<Expr> next;
        next.reserve(n);
        const Expr divisor = Expr::constant(static_cast<double>(i + 1));
        for (std::size_t c = 0; c < n; ++c) {
            Expr d = differentiate(prev[c], Var::time());
            for (std::size_t j = 0; j < n; ++j) {
                const Var v = Var::state(static_cast<int>(j));
                if (depends_on(prev[c], v)) {
                    d = d + differentiate(prev[c], v) * sys_.rhs[j];
                }
            }
            next.push_back(d / divisor);
        }
        coeffs_.push_back(std::move(next));
    }

    rhs_tape_ = Tape(sys_.rhs);
    std::vector<Expr> low;
    for (int i = 0; i + 1 < order; ++i) {
        low.insert(low.end(), coeffs_[static_cast<std::size_t>(i)].begin(), coeffs_[static_cast<std::size_t>(i)].end());
    }
    low_tape_ = Tape(low);
    rem_tape_ = Tape(coeffs_.back());

    std::vector<Expr> jac;
    const auto m = static_cast<std::size_t>(sys_.m);
    for (const auto &f : sys_.rhs) {
        for (std::size_t l = 0; l < n; ++l) {
            jac.push_back(differentiate(f, Var::state(static_cast<int>(l))));
        }
        for (std::size_t l = 0; l < m; ++l) {
            jac.push_back(differentiate(f, Var::param(static_cast<int>(l))));
        }
    }
    jac_tape_ = Tape(jac);
}

bool Integrator::picard(const Box &yj, const Box &p, double tj, double t1, const IntegratorConfig &cfg, Box &out,
                        Workspace &ws) const
{
    const std::size_t n = yj.size();
    const Interval step = Interval(t1) - Interval(tj);
    const Interval h(0.0, step.hi());
    const Interval T(tj, t1);
    ws.f.resize(n);

    auto apply = [&](const Box &c, Box &res) {
        rhs_tape_.eval(T, c.view(), p.view(), ws.f, ws.tape);
        for (std::size_t i = 0; i < n; ++i) {
            if (ws.f[i].is_empty() || !ws.f[i].is_bounded()) {
                return false;
            }
            res[i] = yj[i] + h * ws.f[i];
        }
        return true;
    };

    Box next(n);
    if (!apply(yj, next)) {
        return false;
    }
    Box cand = inflate(next, cfg.inflation, cfg.inflation_abs);
    for (int it = 0; it < cfg.max_picard; ++it) {
        if (!apply(cand, next)) {
            return false;
        }
        if (next.subset_of(cand)) {
            // Contraction proven; a couple more iterations only shrink the box.
            Box refined(n);
            for (int r = 0; r < 2; ++r) {
                if (!apply(next, refined)) {
                    break;
                }
                next = intersect(refined, next);
            }
            out = std::move(next);
            return true;
        }
        cand = inflate(next, cfg.inflation, cfg.inflation_abs);
    }
    return false;
}

std::pair<Box, double> Integrator::a_priori_enclosure(const Box &yj, const Box &p, double tj, double h,
                                                      const IntegratorConfig &cfg) const
{
    if (yj.is_empty()) {
        throw std::invalid_argument("a_priori_enclosure: empty initial box");
    }
    Workspace ws;
    Box out;
    double step = h;
    while (step >= cfg.hmin) {
        if (picard(yj, p, tj, tj + step, cfg, out, ws)) {
            return {std::move(out), step};
        }
        step *= 0.5;
    }
    throw IntegrationError(IntegrationError::Kind::step_failure, tj,
                           "no contracting a priori enclosure at t = " + std::to_string(tj));
}

void Integrator::expand(const Box &yj, const Box &p, double tj, double t1, const Box &apriori, bool centered,
                        Box &out, std::vector<Interval> &low, std::vector<Interval> &rem, Workspace &ws) const
{
    const std::size_t n = yj.size();
    const std::size_t m = p.size();
    const auto k = static_cast<std::size_t>(order_);
    low.resize(n * (k - 1));
    rem.resize(n);
    low_tape_.eval(Interval(tj), yj.view(), p.view(), low, ws.tape);
    rem_tape_.eval(Interval(tj, t1), apriori.view(), p.view(), rem, ws.tape);
    const Interval h = Interval(t1) - Interval(tj);
    out = Box(n);
    for (std::size_t s = 0; s < n; ++s) {
        Interval acc = rem[s];
        for (std::size_t i = k - 1; i-- > 0;) {
            acc = acc * h + low[i * n + s];
        }
        out[s] = acc * h + yj[s];
    }

    if (centered && (yj.width() > 0.0 || p.width() > 0.0)) {
        // Mean-value form for y + h f(y, p) around the midpoints; the higher
        // coefficients keep their natural enclosures.
        const std::size_t w = n + m;
        ws.ymid = point_box(yj.midpoint());
        ws.pmid = point_box(p.midpoint());
        ws.center.resize(n);
        ws.jac.resize(n * w);
        rhs_tape_.eval(Interval(tj), ws.ymid.view(), ws.pmid.view(), ws.center, ws.tape);
        jac_tape_.eval(Interval(tj), yj.view(), p.view(), ws.jac, ws.tape);
        for (std::size_t s = 0; s < n; ++s) {
            Interval acc = rem[s];
            for (std::size_t i = k - 1; i-- > 1;) {
                acc = acc * h + low[i * n + s];
            }
            acc = (acc * h + ws.center[s]) * h + ws.ymid[s];
            for (std::size_t l = 0; l < w; ++l) {
                const Interval dev = l < n ? yj[l] - ws.ymid[l] : p[l - n] - ws.pmid[l - n];
                if (dev.lo() == 0.0 && dev.hi() == 0.0) {
                    continue;
                }
                Interval d = ws.jac[s * w + l] * h;
                if (l == s) {
                    d += Interval(1.0);
                }
                acc += d * dev;
            }
            out[s] = intersect(out[s], acc);
        }
    }

    for (std::size_t s = 0; s < n; ++s) {
        out[s] = intersect(out[s], apriori[s]);
        if (out[s].is_empty()) {
            throw std::logic_error("tighten_step: Taylor enclosure disjoint from the a priori enclosure");
        }
    }
}

Box Integrator::tighten_step(const Box &yj, const Box &p, double tj, double h, const Box &apriori,
                             bool centered) const
{
    Workspace ws;
    std::vector<Interval> low, rem;
    Box out;
    expand(yj, p, tj, tj + h, apriori, centered, out, low, rem, ws);
    return out;
}

FlowEnclosure Integrator::integrate(const Box &p, const IntegratorConfig &cfg) const
{
    return integrate(sys_.y0, p, cfg);
}

FlowEnclosure Integrator::integrate(const Box &y0, const Box &p, const IntegratorConfig &cfg) const
{
    const double t0 = sys_.t0;
    const double tf = sys_.tf;
    cfg.validate(t0, tf);
    if (p.size() != static_cast<std::size_t>(sys_.m) || p.is_empty()) {
        throw std::invalid_argument("integrate: parameter box must be non-empty with dimension m");
    }
    if (y0.size() != static_cast<std::size_t>(sys_.n) || y0.is_empty()) {
        throw std::invalid_argument("integrate: initial box must be non-empty with dimension n");
    }

    const double h_nom = cfg.nominal_step(t0, tf);
    FlowEnclosure flow(y0.size(), order_, p);
    flow.start(t0, y0);

    Workspace ws;
    std::vector<Interval> low, rem;
    Box y = y0;
    Box apriori, y1;
    double t = t0;
    double h = h_nom;
    long steps = 0;
    while (t < tf) {
        if (steps++ >= cfg.max_steps) {
            throw IntegrationError(IntegrationError::Kind::max_steps, t,
                                   "step limit reached at t = " + std::to_string(t));
        }
        double t1 = t + std::min(h, tf - t);
        if (tf - t1 <= 1e-3 * h_nom) {
            t1 = tf;
        }
        while (!picard(y, p, t, t1, cfg, apriori, ws)) {
            const double half = 0.5 * (t1 - t);
            if (half < cfg.hmin) {
                throw IntegrationError(IntegrationError::Kind::step_failure, t,
                                       "no contracting a priori enclosure at t = " + std::to_string(t));
            }
            t1 = t + half;
        }
        expand(y, p, t, t1, apriori, cfg.centered, y1, low, rem, ws);
        flow.push_step(t1, apriori, low, rem, y1);
        h = std::min(h_nom, 2.0 * (t1 - t));
        t = t1;
        y = y1;
    }
    return flow;
}

FlowEnclosure integrate(const OdeSystem &sys, const Box &p, const IntegratorConfig &cfg)
{
    return Integrator(sys, cfg.order).integrate(p, cfg);
}

Box query_R(const FlowEnclosure &flow, double t)
{
    if (flow.num_steps() == 0) {
        throw std::logic_error("query_R: empty flow");
    }
    if (!(t >= flow.t0() && t <= flow.tf())) {
        throw std::out_of_range("query_R: t outside [t0, tf]");
    }
    const auto &times = flow.times();
    if (const auto it = std::lower_bound(times.begin(), times.end(), t); it != times.end() && *it == t) {
        return flow.grid()[static_cast<std::size_t>(it - times.begin())];
    }
    return flow.sub_panel_enclosure(flow.panel_containing(t), t, t);
}

Box query_Rtilde(const FlowEnclosure &flow, double tlo, double thi)
{
    if (flow.num_steps() == 0) {
        throw std::logic_error("query_Rtilde: empty flow");
    }
    if (!(tlo <= thi) || tlo < flow.t0() || thi > flow.tf()) {
        throw std::out_of_range("query_Rtilde: window outside [t0, tf]");
    }
    if (tlo == thi) {
        return query_R(flow, tlo);
    }
    const auto &times = flow.times();
    Box out;
    bool any = false;
    for (std::size_t j = 0; j < flow.num_steps(); ++j) {
        if (times[j] < thi && times[j + 1] > tlo) {
            out = any ? hull(out, flow.panels()[j]) : flow.panels()[j];
            any = true;
        }
    }
    return out;
}

void write_flow_csv(std::ostream &os, const FlowEnclosure &flow)
{
    os << "t";
    for (std::size_t i = 0; i < flow.dim(); ++i) {
        os << ",y" << i + 1 << "_lo,y" << i + 1 << "_hi";
    }
    os << '\n';
    const auto old = os.precision(17);
    for (std::size_t j = 0; j < flow.times().size(); ++j) {
        os << flow.times()[j];
        for (const auto &x : flow.grid()[j]) {
            os << ',' << x.lo() << ',' << x.hi();
        }
        os << '\n';
    }
    os.precision(old);
}

} // namespace dynopt
