#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <doctest.h>

#include <dynopt/ivp.hpp>
#include <dynopt/objective.hpp>
#include <dynopt/parser.hpp>
#include <dynopt/problems.hpp>

#include "oracle.hpp"

using namespace dynopt;
using oracle::Real;

namespace
{

OdeSystem scalar(const char *rhs, Interval y0, int m = 0, double tf = 1.0)
{
    OdeSystem sys;
    sys.n = 1;
    sys.m = m;
    sys.rhs = {parse(rhs)};
    sys.y0 = Box{y0};
    sys.tf = tf;
    return sys;
}

bool encloses(const Interval &x, Real v)
{
    return static_cast<Real>(x.lo()) <= v && v <= static_cast<Real>(x.hi());
}

} // namespace

TEST_SUITE("ivp")
{
    TEST_CASE("a priori enclosure examples")
    {
        const IntegratorConfig cfg;
        {
            const Integrator it(scalar("0", Interval(1.0)), 4);
            const auto [box, h] = it.a_priori_enclosure(Box{Interval(1.0)}, Box{}, 0.0, 0.3, cfg);
            CHECK(box[0] == Interval(1.0));
            CHECK(h == 0.3);
        }
        {
            const Integrator it(scalar("y1", Interval(1.0)), 4);
            const auto [box, h] = it.a_priori_enclosure(Box{Interval(1.0)}, Box{}, 0.0, 0.1, cfg);
            CHECK(h == 0.1);
            CHECK(box[0].lo() <= 1.0);
            CHECK(encloses(box[0], std::exp(Real(0.1))));
        }
        {
            const Integrator it(scalar("1", Interval(0.0)), 4);
            const auto [box, h] = it.a_priori_enclosure(Box{Interval(0.0)}, Box{}, 0.0, 0.5, cfg);
            CHECK(h == 0.5);
            CHECK(Interval(0, 0.5).subset_of(box[0]));
        }
    }

    TEST_CASE("a priori enclosure shrinks the step when needed")
    {
        // y' = y^2 from y = 1 blows up at t = 1; a step of 2 cannot contract
        const Integrator it(scalar("y1^2", Interval(1.0), 0, 2.0), 4);
        const auto [box, h] = it.a_priori_enclosure(Box{Interval(1.0)}, Box{}, 0.0, 2.0, IntegratorConfig{});
        CHECK(h < 1.0);
        CHECK(encloses(box[0], 1 / (1 - Real(h))));
    }

    TEST_CASE("tightened step examples")
    {
        {
            const Integrator it(scalar("0", Interval(1, 2)), 4);
            CHECK(it.tighten_step(Box{Interval(1, 2)}, Box{}, 0.0, 0.1, Box{Interval(1, 2)})[0] == Interval(1, 2));
        }
        {
            const Integrator it(scalar("y1", Interval(1.0)), 4);
            const Box yj{Interval(1.0)};
            const auto [apriori, h] = it.a_priori_enclosure(yj, Box{}, 0.0, 0.1, IntegratorConfig{});
            const Box y1 = it.tighten_step(yj, Box{}, 0.0, h, apriori);
            CHECK(encloses(y1[0], std::exp(Real(0.1))));
            CHECK(width(y1[0]) < 1e-6);
        }
        {
            const FlowEnclosure flow = integrate(scalar("-y1^2", Interval(1.0)), Box{}, IntegratorConfig{});
            CHECK(encloses(flow.final_box()[0], Real(0.5)));
            CHECK(width(flow.final_box()[0]) < 1e-6);
        }
    }

    TEST_CASE("integration examples")
    {
        {
            const FlowEnclosure flow = integrate(scalar("1", Interval(0.0)), Box{}, IntegratorConfig{});
            CHECK(flow.final_box()[0].contains(1.0));
            CHECK(width(flow.final_box()[0]) < 1e-12);
            CHECK(flow.t0() == 0.0);
            CHECK(flow.tf() == 1.0);
            CHECK(flow.num_steps() == 50);
        }
        {
            const FlowEnclosure flow = integrate(scalar("y1", Interval(0.9, 1.1)), Box{}, IntegratorConfig{});
            const Interval y1 = query_R(flow, 1.0)[0];
            CHECK(encloses(y1, Real(0.9) * std::exp(Real(1))));
            CHECK(encloses(y1, Real(1.1) * std::exp(Real(1))));
            std::mt19937_64 rng(31);
            for (int i = 0; i < 200; ++i) {
                const Real y0 = oracle::uniform(rng, 0.9, 1.1);
                const Real t = oracle::uniform(rng, 0, 1);
                REQUIRE(encloses(query_R(flow, static_cast<double>(t))[0], y0 * std::exp(static_cast<double>(t))));
            }
        }
        {
            const CatalogEntry *poly = find_problem("polynomial");
            REQUIRE(poly != nullptr);
            const Box p{Interval(0.95), Interval(1.0), Interval(1.0)};
            const FlowEnclosure flow = integrate(poly->problem.sys, p, IntegratorConfig{});
            CHECK(flow.final_box().width() < 1e-3);
            const Interval cost = eval_cost(poly->problem.cost, flow, p);
            CHECK(width(cost) < 1e-3);
            // reference cost from a long-double RK4 run
            const auto f = [](Real, const oracle::State &y, oracle::State &dy) {
                dy[0] = Real(0.95) * y[0] * y[0] + y[1] - 2;
                dy[1] = -3 * Real(0.95) * y[0] - Real(0.95) * y[1] + y[0] * y[1] + 1;
            };
            const auto yf = oracle::rk4(f, {0, 1}, 0, 1, 4000);
            const Real ref = (yf[0] + yf[1]) * (yf[0] + yf[1]);
            CHECK(encloses(cost, ref));
            // the reported optimum 0.71875 is the point cost rounded to 5 digits
            CHECK(std::fabs(static_cast<double>(ref) - 0.71875) < 5e-5);
            CHECK(cost.lo() <= 0.71875 + 5e-5);
            CHECK(cost.hi() >= 0.71875 - 5e-5);
        }
    }

    TEST_CASE("R and R~ queries")
    {
        const FlowEnclosure flow = integrate(scalar("y1", Interval(1.0)), Box{}, IntegratorConfig{});
        const auto &times = flow.times();
        CHECK(query_R(flow, times[7]) == flow.grid()[7]);
        CHECK(query_R(flow, flow.tf()) == flow.final_box());
        const Interval half = query_R(flow, 0.5)[0];
        CHECK(encloses(half, std::exp(Real(0.5))));
        CHECK(width(half) < 1e-8);
        const Interval mid = query_R(flow, 0.51)[0];
        CHECK(encloses(mid, std::exp(Real(0.51))));
        CHECK(width(mid) < 1e-8);

        CHECK(query_Rtilde(flow, times[3], times[4]) == flow.panels()[3]);
        const Box all = query_Rtilde(flow, 0.0, 1.0);
        CHECK(encloses(all[0], 1));
        CHECK(encloses(all[0], std::exp(Real(1))));
        Box hull_all = flow.panels()[0];
        for (const auto &b : flow.panels()) {
            hull_all = hull(hull_all, b);
        }
        CHECK(all == hull_all);
        CHECK_THROWS_AS(query_R(flow, 1.5), std::out_of_range);
        CHECK_THROWS_AS(query_Rtilde(flow, -0.5, 0.5), std::out_of_range);
    }

    TEST_CASE("panels tile the horizon and grid boxes sit in their panels")
    {
        for (const char *name : {"polynomial", "endpoint", "singular_control"}) {
            const Problem &prob = find_problem(name)->problem;
            const FlowEnclosure flow = integrate(prob.sys, prob.pbox, IntegratorConfig{});
            const auto &times = flow.times();
            REQUIRE(times.front() == prob.sys.t0);
            REQUIRE(times.back() == prob.sys.tf);
            REQUIRE(flow.grid().size() == times.size());
            REQUIRE(flow.panels().size() + 1 == times.size());
            for (std::size_t j = 0; j + 1 < times.size(); ++j) {
                REQUIRE(times[j] < times[j + 1]);
                REQUIRE(flow.grid()[j].subset_of(flow.panels()[j]));
                REQUIRE(flow.grid()[j + 1].subset_of(flow.panels()[j]));
            }
        }
    }

    TEST_CASE("enclosures are monotone in the parameter box")
    {
        const Problem &prob = find_problem("polynomial")->problem;
        const Box outer = prob.pbox;
        Box inner = outer;
        inner[0] = Interval(0.96, 0.97);
        inner[2] = Interval(0.99, 1.0);
        const FlowEnclosure a = integrate(prob.sys, inner, IntegratorConfig{});
        const FlowEnclosure b = integrate(prob.sys, outer, IntegratorConfig{});
        REQUIRE(a.times() == b.times());
        for (std::size_t j = 0; j < a.times().size(); ++j) {
            REQUIRE(a.grid()[j].subset_of(b.grid()[j]));
        }
    }

    TEST_CASE("halving the step shrinks the final enclosure")
    {
        const OdeSystem sys = scalar("y1", Interval(1.0));
        IntegratorConfig coarse;
        coarse.h0 = 0.1;
        coarse.centered = false;
        IntegratorConfig fine = coarse;
        fine.h0 = 0.05;
        const double wc = width(integrate(sys, Box{}, coarse).final_box()[0]);
        const double wf = width(integrate(sys, Box{}, fine).final_box()[0]);
        CHECK(wf * 2 <= wc);
    }

    TEST_CASE("blow-up is reported as an integration failure")
    {
        const OdeSystem sys = scalar("p1*y1^2", Interval(1.0), 1, 1.0);
        IntegratorConfig cfg;
        cfg.hmin = 1e-6;
        try {
            (void)integrate(sys, Box{Interval(0, 2)}, cfg);
            FAIL("expected IntegrationError");
        } catch (const IntegrationError &e) {
            CHECK(e.t_reached() > 0.3);
            CHECK(e.t_reached() < 0.5 + 1e-9);
        }
        cfg.max_steps = 10;
        CHECK_THROWS_AS(integrate(scalar("y1", Interval(1.0)), Box{}, cfg), IntegrationError);
    }

    TEST_CASE("configuration is validated")
    {
        const OdeSystem sys = scalar("y1", Interval(1.0));
        IntegratorConfig cfg;
        cfg.order = 1;
        CHECK_THROWS_AS(integrate(sys, Box{}, cfg), std::invalid_argument);
        cfg = IntegratorConfig{};
        cfg.h0 = 2.0;
        CHECK_THROWS_AS(integrate(sys, Box{}, cfg), std::invalid_argument);
        cfg = IntegratorConfig{};
        cfg.hmin = 0.5;
        CHECK_THROWS_AS(integrate(sys, Box{}, cfg), std::invalid_argument);
    }

    TEST_CASE("every order from 2 to 8 is sound")
    {
        for (int k = 2; k <= 8; ++k) {
            IntegratorConfig cfg;
            cfg.order = k;
            const FlowEnclosure flow = integrate(scalar("cos(t)*y1", Interval(1.0)), Box{}, cfg);
            CHECK(encloses(flow.final_box()[0], std::exp(std::sin(Real(1)))));
        }
    }

    TEST_CASE("flow CSV dump")
    {
        const FlowEnclosure flow = integrate(scalar("1", Interval(0.0)), Box{}, IntegratorConfig{});
        std::ostringstream os;
        write_flow_csv(os, flow);
        const std::string text = os.str();
        CHECK(text.rfind("t,y1_lo,y1_hi\n0,0,0\n", 0) == 0);
        CHECK(std::count(text.begin(), text.end(), '\n') == 52);
    }

    TEST_CASE("random soundness against closed-form solutions")
    {
        std::mt19937_64 rng(33);
        for (int trial = 0; trial < 60; ++trial) {
            const double a = oracle::uniform(rng, 0.5, 1.5);
            const double w = trial % 2 == 0 ? 0.0 : oracle::uniform(rng, 0.0, 0.1);
            const double p = oracle::uniform(rng, -1, 1);
            const OdeSystem sys = scalar("p1*y1", Interval(a, a + w), 1);
            const FlowEnclosure flow = integrate(sys, Box{Interval(p)}, IntegratorConfig{});
            for (int s = 0; s < 20; ++s) {
                const Real y0 = std::min(Real(a + w), Real(a) + Real(w) * oracle::uniform(rng, 0, 1));
                const double t = oracle::uniform(rng, 0, 1);
                REQUIRE(encloses(query_R(flow, t)[0], y0 * std::exp(Real(p) * Real(t))));
            }
        }
    }
}
