#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include <dynopt/box.hpp>
#include <dynopt/interval.hpp>

#include "oracle.hpp"

using namespace dynopt;
using oracle::Real;

namespace
{

const double kInf = std::numeric_limits<double>::infinity();

bool encloses(const Interval &r, Real x)
{
    return !r.is_empty() && static_cast<Real>(r.lo()) <= x && x <= static_cast<Real>(r.hi());
}

Interval random_interval(std::mt19937_64 &rng, double scale)
{
    double a = oracle::uniform(rng, -scale, scale);
    double b = oracle::uniform(rng, -scale, scale);
    if (rng() % 8 == 0) {
        b = a;
    }
    return Interval(std::min(a, b), std::max(a, b));
}

double sample(std::mt19937_64 &rng, const Interval &x)
{
    switch (rng() % 4) {
        case 0:
            return x.lo();
        case 1:
            return x.hi();
        default:
            // uniform_real_distribution may return its upper bound
            return std::min(x.hi(), oracle::uniform(rng, x.lo(), std::nextafter(x.hi(), kInf)));
    }
}

Interval nested_in(std::mt19937_64 &rng, const Interval &x)
{
    double a = sample(rng, x), b = sample(rng, x);
    return Interval(std::min(a, b), std::max(a, b));
}

} // namespace

TEST_SUITE("interval")
{
    TEST_CASE("worked examples are reproduced exactly")
    {
        CHECK(Interval(-2, 5) + Interval(-8, 12) == Interval(-10, 17));
        CHECK(Interval(-10, 17) - Interval(-8, 12) == Interval(-22, 25));
        CHECK(Interval(-10, 17) + Interval(-12, 8) == Interval(-22, 25));
        CHECK(Interval(-10, 17) - Interval(-2, 5) == Interval(-15, 19));
        CHECK(Interval(-2, 5) / Interval(-8, 12) == Interval::entire());
        CHECK(Interval(3, 5) / Interval(8, 12) == Interval(3.0 / 12.0, 5.0 / 8.0));
        CHECK(Interval(3.0 / 12.0, 5.0 / 8.0) * Interval(8, 12) == Interval(2, 15.0 / 2.0));
    }

    TEST_CASE("elementary functions")
    {
        CHECK(sin(Interval(0.0)) == Interval(0.0));
        CHECK(cos(Interval(0.0)) == Interval(1.0));
        CHECK(pow(Interval(-2, 3), 2) == Interval(0, 9));
        CHECK(Interval(-2, 3) * Interval(-2, 3) == Interval(-6, 9));
        CHECK(pow(Interval(-2, 3), 3) == Interval(-8, 27));
        CHECK(pow(Interval(-2, 3), 0) == Interval(1.0));
        CHECK_THROWS_AS(pow(Interval(1, 2), -1), std::domain_error);
        CHECK(abs(Interval(-3, 2)) == Interval(0, 3));
        CHECK(abs(Interval(-3, -2)) == Interval(2, 3));

        const Interval e = exp(Interval(0, 1));
        CHECK(e.lo() == 1.0);
        CHECK(encloses(e, std::exp(Real(1))));
        CHECK(static_cast<Real>(e.hi()) - std::exp(Real(1)) < 1e-15L);

        CHECK(sqrt(Interval(4.0)) == Interval(2.0));
        CHECK(sqrt(Interval(-1, 4)) == Interval(0, 2));
        CHECK(sqrt(Interval(-4, -1)).is_empty());
        CHECK(encloses(sqrt(Interval(2.0)), std::sqrt(Real(2))));

        CHECK(sin(Interval(0, 4)).hi() == 1.0);
        CHECK(sin(Interval(0, 5)).lo() == -1.0);
        CHECK(cos(Interval(3, 3.5)).lo() == -1.0);
        CHECK(sin(Interval(0, 100)) == Interval(-1, 1));
        const Interval s = sin(Interval(0.1, 0.2));
        CHECK(encloses(s, std::sin(Real(0.1))));
        CHECK(encloses(s, std::sin(Real(0.2))));
        CHECK(width(s) < 0.1);
    }

    TEST_CASE("width, midpoint, magnitude")
    {
        CHECK(width(Interval(-2, 5)) == 7.0);
        CHECK(magnitude(Interval(-3, 2)) == 3.0);
        CHECK(midpoint(Interval(3, 5)) == 4.0);
        CHECK(mignitude(Interval(-3, 2)) == 0.0);
        CHECK(mignitude(Interval(2, 3)) == 2.0);
        CHECK(midpoint(Interval(-kInf, kInf)) == 0.0);
        CHECK(Interval(-kInf, 1).contains(midpoint(Interval(-kInf, 1))));
        CHECK(std::isfinite(midpoint(Interval(-std::numeric_limits<double>::max(), std::numeric_limits<double>::max()))));
    }

    TEST_CASE("box infinity norm")
    {
        CHECK(box_inf_norm(Box{Interval(-3, 2), Interval(0, 1)}) == 3.0);
        CHECK(box_inf_norm(Box{Interval(0.0)}) == 0.0);
        CHECK(box_inf_norm(Box{Interval(-1, 1), Interval(-5, 4)}) == 5.0);
        CHECK(box_inf_norm(Box{Interval(-1, 1), Interval(-5, 4), Interval(7, 8)}, 0, 2) == 5.0);
        CHECK(box_inf_norm(Box{Interval(-1, 1), Interval(-5, 4), Interval(7, 8)}, 2, 1) == 8.0);
    }

    TEST_CASE("hull, intersect, bisect")
    {
        CHECK(hull(Interval(0, 1), Interval(2, 3)) == Interval(0, 3));
        CHECK(intersect(Interval(0, 2), Interval(1, 3)) == Interval(1, 2));
        CHECK(intersect(Interval(0, 1), Interval(2, 3)).is_empty());
        CHECK(disjoint(Interval(0, 1), Interval(2, 3)));
        CHECK_FALSE(disjoint(Interval(0, 1), Interval(1, 3)));
        CHECK(hull(Interval::empty(), Interval(1, 2)) == Interval(1, 2));

        const auto [a, b] = bisect(Box{Interval(0, 2), Interval(0, 1)}, 0);
        CHECK(a == Box{Interval(0, 1), Interval(0, 1)});
        CHECK(b == Box{Interval(1, 2), Interval(0, 1)});
        CHECK_THROWS(bisect(Box{Interval(1.0), Interval(0, 1)}, 0));
        CHECK_THROWS(bisect(Box{Interval(0, kInf)}, 0));

        const Box box{Interval(0, 2), Interval(-1, 3)};
        CHECK(box.width() == 4.0);
        CHECK(hull(Box{Interval(0, 1)}, Box{Interval(2, 3)}) == Box{Interval(0, 3)});
        CHECK(intersect(box, Box{Interval(1, 5), Interval(0, 1)}) == Box{Interval(1, 2), Interval(0, 1)});
    }

    TEST_CASE("empty interval propagates")
    {
        const Interval e = Interval::empty();
        CHECK(e.is_empty());
        CHECK((e + Interval(1, 2)).is_empty());
        CHECK((Interval(1, 2) * e).is_empty());
        CHECK((e / Interval(1, 2)).is_empty());
        CHECK(exp(e).is_empty());
        CHECK(sin(e).is_empty());
        CHECK(pow(e, 2).is_empty());
        CHECK(Box{Interval(0, 1), e}.is_empty());
        CHECK_THROWS_AS(Interval(2, 1), std::invalid_argument);
        CHECK_THROWS_AS(Interval(std::nan("")), std::invalid_argument);
    }

    TEST_CASE("division cases")
    {
        CHECK(Interval(1, 2) / Interval(0.0) == Interval::entire());
        CHECK(Interval(-4, -2) / Interval(1, 2) == Interval(-4, -1));
        CHECK(Interval(-4, 2) / Interval(-2, -1) == Interval(-2, 4));
        CHECK(encloses(Interval(1.0) / Interval(3.0), Real(1) / 3));
        CHECK((Interval(1.0) / Interval(3.0)).hi() == std::nextafter((Interval(1.0) / Interval(3.0)).lo(), kInf));
    }

    TEST_CASE("directed rounding primitives")
    {
        using namespace rounding;
        CHECK(add_down(1.0, 2.0) == 3.0);
        CHECK(add_up(1.0, 2.0) == 3.0);
        CHECK(add_down(0.1, 0.2) < add_up(0.1, 0.2));
        CHECK(static_cast<Real>(add_down(0.1, 0.2)) <= Real(0.1) + Real(0.2));
        CHECK(static_cast<Real>(add_up(0.1, 0.2)) >= Real(0.1) + Real(0.2));
        CHECK(mul_down(3.0, 0.1) <= mul_up(3.0, 0.1));
        CHECK(add_up(std::numeric_limits<double>::max(), std::numeric_limits<double>::max()) == kInf);
        CHECK(add_down(std::numeric_limits<double>::max(), std::numeric_limits<double>::max())
              == std::numeric_limits<double>::max());
        CHECK(next_up(0.0) > 0.0);
        CHECK(next_down(0.0) < 0.0);
        CHECK(mul_down(1e-300, 1e-300) <= 0.0);
        CHECK(mul_up(1e-300, 1e-300) > 0.0);
    }

    TEST_CASE("containment soundness on random samples")
    {
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 3000; ++trial) {
            const double scale = trial % 3 == 0 ? 1e-3 : (trial % 3 == 1 ? 1.0 : 1e4);
            const Interval a = random_interval(rng, scale);
            const Interval b = random_interval(rng, scale);
            const Interval sum = a + b, diff = a - b, prod = a * b, quot = a / b;
            const Interval ea = exp(Interval(a.lo() / scale, a.hi() / scale));
            const Interval sa = sin(a), ca = cos(a), sq = sqrt(a), p3 = pow(a, 3), p2 = pow(a, 2);
            for (int s = 0; s < 8; ++s) {
                const double x = sample(rng, a), y = sample(rng, b);
                const Real X = x, Y = y;
                REQUIRE(encloses(sum, X + Y));
                REQUIRE(encloses(diff, X - Y));
                REQUIRE(encloses(prod, X * Y));
                if (y != 0.0) {
                    REQUIRE(encloses(quot, X / Y));
                }
                REQUIRE(encloses(ea, std::exp(static_cast<Real>(x / scale))));
                REQUIRE(encloses(sa, std::sin(X)));
                REQUIRE(encloses(ca, std::cos(X)));
                REQUIRE(encloses(p2, X * X));
                REQUIRE(encloses(p3, X * X * X));
                if (x >= 0.0) {
                    REQUIRE(encloses(sq, std::sqrt(X)));
                }
            }
        }
    }

    TEST_CASE("inclusion isotonicity on random nested intervals")
    {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 3000; ++trial) {
            const Interval a2 = random_interval(rng, 10.0), b2 = random_interval(rng, 10.0);
            const Interval a1 = nested_in(rng, a2), b1 = nested_in(rng, b2);
            REQUIRE((a1 + b1).subset_of(a2 + b2));
            REQUIRE((a1 - b1).subset_of(a2 - b2));
            REQUIRE((a1 * b1).subset_of(a2 * b2));
            REQUIRE((a1 / b1).subset_of(a2 / b2));
            REQUIRE(sin(a1).subset_of(sin(a2)));
            REQUIRE(cos(a1).subset_of(cos(a2)));
            REQUIRE(exp(a1 / Interval(10.0)).subset_of(exp(a2 / Interval(10.0))));
            REQUIRE(sqrt(a1).subset_of(sqrt(a2)));
            REQUIRE(pow(a1, 2).subset_of(pow(a2, 2)));
            REQUIRE(pow(a1, 5).subset_of(pow(a2, 5)));
            REQUIRE(abs(a1).subset_of(abs(a2)));
        }
    }

    TEST_CASE("bisected halves reunite")
    {
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 500; ++trial) {
            Box b;
            for (int i = 0; i < 3; ++i) {
                Interval x = random_interval(rng, 100.0);
                if (x.is_thin()) {
                    x = Interval(x.lo(), x.lo() + 1.0);
                }
                b.push_back(x);
            }
            const auto k = static_cast<std::size_t>(rng() % 3);
            const auto [l, r] = bisect(b, k);
            REQUIRE(hull(l, r) == b);
            REQUIRE(l[k].hi() == r[k].lo());
            REQUIRE(l.subset_of(b));
            REQUIRE(r.subset_of(b));
        }
    }

    TEST_CASE("magnitude and norm match closed forms on dyadic inputs")
    {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 500; ++trial) {
            const double a = static_cast<double>(static_cast<int>(rng() % 2001) - 1000) / 64.0;
            const double b = static_cast<double>(static_cast<int>(rng() % 2001) - 1000) / 64.0;
            const Interval x(std::min(a, b), std::max(a, b));
            REQUIRE(magnitude(x) == std::max(std::fabs(a), std::fabs(b)));
            REQUIRE(width(x) == std::fabs(a - b));
            REQUIRE(box_inf_norm(Box{x, Interval(0.0)}) == magnitude(x));
        }
    }
}
