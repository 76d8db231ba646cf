#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include <dynopt/ivp.hpp>
#include <dynopt/parser.hpp>
#include <dynopt/problems.hpp>
#include <dynopt/system.hpp>

#include "oracle.hpp"

using namespace dynopt;

namespace
{

// Evaluates augmented right-hand side k at a random point; s holds the
// sensitivity states in parameter-major order.
double rhs_at(const AugmentedSystem &aug, int k, double t, const std::vector<double> &ys,
              const std::vector<double> &ps)
{
    return midpoint(eval_point(aug.full.rhs[static_cast<std::size_t>(k)], t, ys, ps));
}

} // namespace

TEST_SUITE("sensitivity")
{
    TEST_CASE("polynomial system sensitivity block matches the printed equations")
    {
        const AugmentedSystem aug = augment(find_problem("polynomial")->problem.sys);
        REQUIRE(aug.full.n == 8);
        REQUIRE(aug.full.rhs.size() == 8);
        std::mt19937_64 rng(21);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> ys(8), ps(3);
            for (auto &v : ys) {
                v = oracle::uniform(rng, -2, 2);
            }
            for (auto &v : ps) {
                v = oracle::uniform(rng, 0.5, 1.5);
            }
            const double y1 = ys[0], y2 = ys[1], p1 = ps[0], p2 = ps[1], p3 = ps[2];
            // block for p1 occupies slots 2, 3
            const double s1 = ys[static_cast<std::size_t>(aug.slot(0, 0))];
            const double s2 = ys[static_cast<std::size_t>(aug.slot(1, 0))];
            const double e1 = 2 * p1 * s1 * y1 + p2 * s2 + y1 * y1;
            const double e2 = -p2 * y2 + s1 * (-3 * p1 + p3 * y2) + s2 * (-p1 * p2 + p3 * y1) - 3 * y1;
            REQUIRE(rhs_at(aug, aug.slot(0, 0), 0.0, ys, ps) == doctest::Approx(e1).epsilon(1e-13));
            REQUIRE(rhs_at(aug, aug.slot(1, 0), 0.0, ys, ps) == doctest::Approx(e2).epsilon(1e-13));
            // block for p3
            const double r1 = ys[static_cast<std::size_t>(aug.slot(0, 2))];
            const double r2 = ys[static_cast<std::size_t>(aug.slot(1, 2))];
            REQUIRE(rhs_at(aug, aug.slot(0, 2), 0.0, ys, ps)
                    == doctest::Approx(2 * p1 * r1 * y1 + p2 * r2 - 4 * p3).epsilon(1e-13));
            REQUIRE(rhs_at(aug, aug.slot(1, 2), 0.0, ys, ps)
                    == doctest::Approx(r1 * (-3 * p1 + p3 * y2) + r2 * (-p1 * p2 + p3 * y1) + y1 * y2).epsilon(1e-13));
            // the base right-hand sides are untouched
            for (int k = 0; k < 2; ++k) {
                REQUIRE(structurally_equal(aug.full.rhs[static_cast<std::size_t>(k)], aug.base.rhs[static_cast<std::size_t>(k)]));
            }
        }
    }

    TEST_CASE("endpoint system sensitivity block matches the printed equations")
    {
        const AugmentedSystem aug = augment(find_problem("endpoint")->problem.sys);
        REQUIRE(aug.full.n == 6);
        std::mt19937_64 rng(22);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> ys(6), ps(2);
            for (auto &v : ys) {
                v = oracle::uniform(rng, -2, 2);
            }
            for (auto &v : ps) {
                v = oracle::uniform(rng, -1, 1);
            }
            const double t = oracle::uniform(rng, 0, 1);
            const double y1 = ys[0], u1 = ps[0], u2 = ps[1];
            const double s1 = ys[static_cast<std::size_t>(aug.slot(0, 0))];
            REQUIRE(rhs_at(aug, aug.slot(0, 0), t, ys, ps) == doctest::Approx(-t + 1).epsilon(1e-13));
            REQUIRE(rhs_at(aug, aug.slot(1, 0), t, ys, ps)
                    == doctest::Approx(2 * s1 * y1 + (-2 * t + 2) * (t * u2 + u1 * (-t + 1))).epsilon(1e-13));
            const double r1 = ys[static_cast<std::size_t>(aug.slot(0, 1))];
            REQUIRE(rhs_at(aug, aug.slot(0, 1), t, ys, ps) == doctest::Approx(t).epsilon(1e-13));
            REQUIRE(rhs_at(aug, aug.slot(1, 1), t, ys, ps)
                    == doctest::Approx(2 * r1 * y1 + 2 * t * (t * u2 + u1 * (-t + 1))).epsilon(1e-13));
        }
    }

    TEST_CASE("parameter-free right-hand side gives a zero sensitivity")
    {
        OdeSystem sys;
        sys.n = 1;
        sys.m = 1;
        sys.rhs = {parse("y1")};
        sys.y0 = Box{Interval(1.0)};
        const AugmentedSystem aug = augment(sys);
        REQUIRE(aug.full.n == 2);
        CHECK(structurally_equal(aug.full.rhs[1], Expr::sens(0, 0, 1)));
        CHECK(aug.full.y0[1] == Interval(0.0));
        const FlowEnclosure flow = integrate(aug.full, Box{Interval(0.5)}, IntegratorConfig{});
        // zero up to the epsilon-inflation of the a priori boxes
        CHECK(magnitude(flow.final_box()[1]) < 1e-15);
        CHECK(flow.final_box()[1].contains(0.0));
    }

    TEST_CASE("abs in the right-hand side is rejected")
    {
        OdeSystem sys;
        sys.n = 1;
        sys.m = 1;
        sys.rhs = {parse("abs(y1) * p1")};
        sys.y0 = Box{Interval(1.0)};
        CHECK_THROWS_AS(augment(sys), UnsupportedOperation);
    }

    TEST_CASE("integrated sensitivities match central finite differences")
    {
        std::mt19937_64 rng(23);
        for (const char *name : {"polynomial", "endpoint", "decay", "cascade"}) {
            const Problem prob = find_problem(name)->problem;
            const AugmentedSystem aug = augment(prob.sys);
            const Integrator base(prob.sys, 4), full(aug.full, 4);
            const IntegratorConfig cfg;
            for (int trial = 0; trial < 3; ++trial) {
                std::vector<double> p;
                for (const auto &x : prob.pbox) {
                    p.push_back(oracle::uniform(rng, x.lo(), x.hi()));
                }
                const Box fin = full.integrate(point_box(p), cfg).final_box();
                const double h = 1e-5;
                for (int i = 0; i < prob.sys.m; ++i) {
                    auto shifted = p;
                    shifted[static_cast<std::size_t>(i)] += h;
                    const Box up = base.integrate(point_box(shifted), cfg).final_box();
                    shifted[static_cast<std::size_t>(i)] -= 2 * h;
                    const Box dn = base.integrate(point_box(shifted), cfg).final_box();
                    for (int k = 0; k < prob.sys.n; ++k) {
                        const auto kk = static_cast<std::size_t>(k);
                        const double fd = (midpoint(up[kk]) - midpoint(dn[kk])) / (2 * h);
                        const Interval s = fin[static_cast<std::size_t>(aug.slot(k, i))];
                        const double slack = std::max(1e-4, 3 * (width(s) + (width(up[kk]) + width(dn[kk])) / (2 * h)));
                        INFO(name, " param ", i, " state ", k);
                        REQUIRE(s.lo() - slack <= fd);
                        REQUIRE(fd <= s.hi() + slack);
                    }
                }
            }
        }
    }
}
