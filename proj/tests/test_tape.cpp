#include <random>
#include <vector>

#include <doctest.h>

#include <dynopt/parser.hpp>
#include <dynopt/tape.hpp>

#include "oracle.hpp"

using namespace dynopt;

TEST_SUITE("tape")
{
    TEST_CASE("tape agrees with the tree walk")
    {
        const std::vector<Expr> exprs{
            parse("p1*y1^2 + p2*y2 - 2*p3^2"),
            parse("-3*p1*y1 - p1*p2*y2 + y1*y2*p3 + 1.0"),
            parse("y1^2 + y2^2 + 0.0005*(y2 + 16*t - 8 - 0.1*y1*p1^2)^2"),
            parse("sin(y1*t) + cos(y2) - exp(-p1) + sqrt(p2) * abs(y1 - p3)"),
            parse("(y1 - y2)/(3 + p1) + y1^5"),
        };
        const Tape tape(exprs);
        CHECK(tape.num_outputs() == exprs.size());
        std::mt19937_64 rng(9);
        std::vector<Interval> out(exprs.size()), work;
        for (int trial = 0; trial < 500; ++trial) {
            auto iv = [&](double lo, double hi) {
                const double a = oracle::uniform(rng, lo, hi), b = oracle::uniform(rng, lo, hi);
                return Interval(std::min(a, b), std::max(a, b));
            };
            const Interval t = iv(0, 1);
            const Box y{iv(-2, 2), iv(-2, 2)};
            const Box p{iv(-1, 2), iv(-1, 2), iv(-1, 2)};
            tape.eval(t, y.view(), p.view(), out, work);
            for (std::size_t i = 0; i < exprs.size(); ++i) {
                REQUIRE(out[i] == eval_interval(exprs[i], t, y.view(), p.view()));
            }
        }
    }

    TEST_CASE("common subexpressions are merged")
    {
        const Expr a = parse("(y1 + p1)^2 + sin(y1 + p1)");
        const Expr b = parse("sin(y1 + p1) * 2");
        const Tape both(std::vector<Expr>{a, b});
        const Tape only_a(std::vector<Expr>{a});
        // y1, p1, add, pow, sin, add: b only adds the constant and one product
        CHECK(only_a.num_instructions() == 6);
        CHECK(both.num_instructions() == 8);
    }

    TEST_CASE("dimension checks")
    {
        const Tape tape(std::vector<Expr>{parse("y2 + p1")});
        const Box y1{Interval(0.0)};
        const Box y2{Interval(0.0), Interval(1.0)};
        const Box p{Interval(2.0)};
        CHECK_THROWS_AS(tape.eval(Interval(0.0), y1.view(), p.view()), std::out_of_range);
        CHECK_THROWS_AS(tape.eval(Interval(0.0), y2.view(), {}), std::out_of_range);
        CHECK(tape.eval(Interval(0.0), y2.view(), p.view())[0] == Interval(3.0));
    }
}
