#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include <dynopt/problems.hpp>

#include "oracle.hpp"

using namespace dynopt;
using oracle::Real;

namespace
{

std::vector<double> draw(std::mt19937_64 &rng, std::size_t k, double lo, double hi)
{
    std::vector<double> v(k);
    for (auto &x : v) {
        x = oracle::uniform(rng, lo, hi);
    }
    return v;
}

double at(const Expr &e, double t, const std::vector<double> &y, const std::vector<double> &p)
{
    return midpoint(eval_point(e, t, y, p));
}

} // namespace

TEST_SUITE("problems")
{
    TEST_CASE("catalog contents")
    {
        const auto &cat = catalog();
        REQUIRE(cat.size() >= 7);
        for (const char *name : {"singular_control", "polynomial", "endpoint", "toy", "decay", "tracking", "cascade"}) {
            const CatalogEntry *e = find_problem(name);
            REQUIRE(e != nullptr);
            CHECK(e->name == name);
            CHECK_NOTHROW(e->problem.validate());
            CHECK_FALSE(e->ref.optimizer.empty());
            CHECK(e->ref.optimizer.size() == e->problem.pbox.size());
        }
        CHECK(find_problem("endpoint_control") == find_problem("endpoint"));
        CHECK(find_problem("nope") == nullptr);

        const CatalogEntry &sc = *find_problem("singular_control");
        CHECK(sc.ref.optimizer[0] == 4.07);
        CHECK(*sc.ref.optimum == 0.497);
        CHECK(sc.problem.pbox == Box{Interval(-4, 10)});
        CHECK(sc.problem.cost.g.has_value());
        CHECK_FALSE(sc.problem.cost.phi.has_value());

        const CatalogEntry &poly = *find_problem("polynomial");
        CHECK(poly.ref.optimizer == std::vector<double>{0.95, 1.0, 1.0});
        CHECK(poly.problem.pbox.size() == 3);
        for (const auto &x : poly.problem.pbox) {
            CHECK(x.contains(0.95));
            CHECK(x.hi() == 1.0);
        }
        CHECK(poly.problem.sys.y0 == Box{Interval(0.0), Interval(1.0)});

        const CatalogEntry &ep = *find_problem("endpoint");
        CHECK(ep.ref.optimizer == std::vector<double>{-0.4545, 0.4545});
        CHECK(*ep.ref.optimum == 0.924242);
        CHECK(ep.problem.pbox == Box{Interval(-1, 1), Interval(-1, 1)});
        CHECK(ep.problem.sys.y0 == Box{Interval(1.0), Interval(0.0)});
        REQUIRE(ep.problem.constraints.size() == 1);
        CHECK(ep.problem.constraints[0].target == Interval(1.0));
    }

    TEST_CASE("the square root in the initial state is enclosed outward")
    {
        const Interval y3 = find_problem("singular_control")->problem.sys.y0[2];
        const Real r = -std::sqrt(Real(5));
        CHECK(static_cast<Real>(y3.lo()) <= r);
        CHECK(r <= static_cast<Real>(y3.hi()));
        CHECK(width(y3) <= 2 * std::ldexp(1.0, -51));
        CHECK(y3.lo() < y3.hi());
    }

    TEST_CASE("transcribed formulas match hand-coded evaluation")
    {
        std::mt19937_64 rng(61);
        for (int trial = 0; trial < 200; ++trial) {
            const double t = oracle::uniform(rng, 0, 1);
            {
                const Problem &pr = find_problem("singular_control")->problem;
                const auto y = draw(rng, 3, -3, 3);
                const auto p = draw(rng, 1, -4, 10);
                const double u = p[0];
                REQUIRE(at(pr.sys.rhs[0], t, y, p) == doctest::Approx(y[1]).epsilon(1e-14));
                REQUIRE(at(pr.sys.rhs[1], t, y, p) == doctest::Approx(-y[2] * u + 16 * t - 8).epsilon(1e-12));
                REQUIRE(at(pr.sys.rhs[2], t, y, p) == doctest::Approx(u).epsilon(1e-14));
                const double w = y[1] + 16 * t - 8 - 0.1 * y[2] * u * u;
                REQUIRE(at(*pr.cost.g, t, y, p)
                        == doctest::Approx(y[0] * y[0] + y[1] * y[1] + 0.0005 * w * w).epsilon(1e-12));
            }
            {
                const Problem &pr = find_problem("polynomial")->problem;
                const auto y = draw(rng, 2, -2, 2);
                const auto p = draw(rng, 3, 0.9, 1.1);
                REQUIRE(at(pr.sys.rhs[0], t, y, p)
                        == doctest::Approx(p[0] * y[0] * y[0] + p[1] * y[1] - 2 * p[2] * p[2]).epsilon(1e-12));
                REQUIRE(at(pr.sys.rhs[1], t, y, p)
                        == doctest::Approx(-3 * p[0] * y[0] - p[0] * p[1] * y[1] + y[0] * y[1] * p[2] + 1)
                               .epsilon(1e-12));
                REQUIRE(at(*pr.cost.phi, t, y, p) == doctest::Approx((y[0] + y[1]) * (y[0] + y[1])).epsilon(1e-12));
            }
            {
                const Problem &pr = find_problem("endpoint")->problem;
                const auto y = draw(rng, 2, -2, 2);
                const auto p = draw(rng, 2, -1, 1);
                const double u = p[0] * (1 - t) + p[1] * t;
                REQUIRE(at(pr.sys.rhs[0], t, y, p) == doctest::Approx(u).epsilon(1e-12));
                REQUIRE(at(pr.sys.rhs[1], t, y, p) == doctest::Approx(y[0] * y[0] + u * u).epsilon(1e-12));
                REQUIRE(at(*pr.cost.phi, t, y, p) == doctest::Approx(y[1]).epsilon(1e-14));
                REQUIRE(at(pr.constraints[0].expr, t, y, p) == doctest::Approx(y[0]).epsilon(1e-14));
            }
        }
    }

    TEST_CASE("published tables")
    {
        const auto &poly = find_problem("polynomial")->ref.table;
        REQUIRE(poly.size() == 4);
        CHECK(poly[0].epsilon == 1e-2);
        CHECK(poly[0].cost == 0.72805);
        CHECK(poly[1].cost == 0.71991);
        CHECK(poly[2].cost == 0.71889);
        CHECK(poly[0].branches_lf == 399);
        CHECK(poly[0].branches_smear == 357);
        const auto &ep = find_problem("endpoint")->ref.table;
        REQUIRE(ep.size() == 3);
        CHECK(ep[1].epsilon == 1e-4);
        CHECK(ep[1].cost == 0.924249);
        for (const auto &row : poly) {
            CHECK(row.psol.contains(std::vector<double>{0.95, 1.0, 1.0}));
        }
    }

    TEST_CASE("synthetic optima are where the analytic solution says")
    {
        CHECK(find_problem("decay")->ref.optimizer[0] == doctest::Approx(std::log(2.0)));
        for (const auto &e : catalog()) {
            if (!e.synthetic) {
                continue;
            }
            CHECK(e.problem.pbox.contains(e.ref.optimizer));
            CHECK(*e.ref.optimum == 0.0);
        }
    }
}
