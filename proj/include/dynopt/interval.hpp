#ifndef DYNOPT_INTERVAL_HPP
#define DYNOPT_INTERVAL_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dynopt
{

namespace rounding
{

// Directed rounding without touching the FPU control word: every primitive
// is computed in round-to-nearest, the exact error is recovered with an
// error-free transformation (TwoSum / fma), and the result is moved by one
// ulp only when the error points the wrong way. Exact operations therefore
// stay exact, and everything is reentrant.

inline constexpr double inf = std::numeric_limits<double>::infinity();
inline constexpr double max_finite = std::numeric_limits<double>::max();

// Below this magnitude the fma residual may itself underflow, so the sign
// test is unreliable and we widen unconditionally.
inline constexpr double tiny = 0x1p-960;

inline double next_up(double x)
{
    if (std::isnan(x) || x == inf) {
        return x;
    }
    if (x == 0.0) {
        return std::numeric_limits<double>::denorm_min();
    }
    auto bits = std::bit_cast<std::uint64_t>(x);
    bits = (x > 0) ? bits + 1 : bits - 1;
    return std::bit_cast<double>(bits);
}

inline double next_down(double x)
{
    return -next_up(-x);
}

// NOTE: the overflow branches return +-max_finite when the exact value is
// finite but the nearest rounding went to infinity on the wrong side.
inline double add_down(double a, double b)
{
    const double s = a + b;
    if (!std::isfinite(s)) {
        if (s == inf && std::isfinite(a) && std::isfinite(b)) {
            return max_finite;
        }
        return s;
    }
    const double bb = s - a;
    const double err = (a - (s - bb)) + (b - bb);
    return err < 0 ? next_down(s) : s;
}

inline double add_up(double a, double b)
{
    return -add_down(-a, -b);
}

inline double sub_down(double a, double b)
{
    return add_down(a, -b);
}

inline double sub_up(double a, double b)
{
    return add_up(a, -b);
}

inline double mul_down(double a, double b)
{
    if (a == 0.0 || b == 0.0) {
        return 0.0;
    }
    const double p = a * b;
    if (!std::isfinite(p)) {
        if (p == inf && std::isfinite(a) && std::isfinite(b)) {
            return max_finite;
        }
        return p;
    }
    if (std::fabs(p) < tiny) {
        return next_down(p);
    }
    const double e = std::fma(a, b, -p);
    return e < 0 ? next_down(p) : p;
}

inline double mul_up(double a, double b)
{
    return -mul_down(-a, b);
}

inline double div_down(double a, double b)
{
    if (a == 0.0) {
        return 0.0;
    }
    const double q = a / b;
    if (!std::isfinite(q)) {
        if (q == inf && std::isfinite(a) && b != 0.0) {
            return max_finite;
        }
        return q;
    }
    if (std::isinf(b)) {
        // finite / inf: exact quotient is 0 with the sign of q.
        return q > 0 || (q == 0 && std::signbit(a) == std::signbit(b)) ? 0.0 : -std::numeric_limits<double>::denorm_min();
    }
    if (std::fabs(q) < tiny || std::fabs(a) < tiny) {
        return next_down(q);
    }
    // a - q*b is exact; the exact quotient is q + r/b.
    const double r = std::fma(-q, b, a);
    const bool below = (r < 0) != (b < 0) && r != 0;
    return below ? next_down(q) : q;
}

inline double div_up(double a, double b)
{
    return -div_down(-a, b);
}

inline double sqrt_down(double a)
{
    const double r = std::sqrt(a);
    if (r == 0.0 || std::isinf(r)) {
        return r;
    }
    if (a < tiny) {
        return next_down(r);
    }
    return std::fma(-r, r, a) < 0 ? next_down(r) : r;
}

inline double sqrt_up(double a)
{
    const double r = std::sqrt(a);
    if (r == 0.0 || std::isinf(r)) {
        return r;
    }
    if (a < tiny) {
        return next_up(r);
    }
    return std::fma(-r, r, a) > 0 ? next_up(r) : r;
}

// libm transcendental functions are not correctly rounded; glibc documents
// sub-ulp errors for exp/sin/cos, and we widen by two ulps.
inline double widen_down(double x)
{
    return next_down(next_down(x));
}

inline double widen_up(double x)
{
    return next_up(next_up(x));
}

} // namespace rounding

// Closed real interval with outward-rounded arithmetic. The empty set is a
// distinct state (both bounds NaN); either bound may be infinite.
class Interval
{
public:
    constexpr Interval() noexcept : lo_(0.0), hi_(0.0) {}
    // NOLINTNEXTLINE(google-explicit-constructor)
    constexpr Interval(double x) : lo_(x), hi_(x)
    {
        if (std::isnan(x) || std::isinf(x)) {
            throw std::invalid_argument("Interval: point value must be finite");
        }
    }
    // NOLINTNEXTLINE(bugprone-easily-swappable-parameters)
    constexpr Interval(double lo, double hi) : lo_(lo), hi_(hi)
    {
        if (std::isnan(lo) || std::isnan(hi) || lo > hi || lo == rounding::inf || hi == -rounding::inf) {
            throw std::invalid_argument("Interval: invalid bounds");
        }
    }

    static Interval empty() noexcept
    {
        Interval r;
        r.lo_ = std::numeric_limits<double>::quiet_NaN();
        r.hi_ = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    static constexpr Interval entire() noexcept
    {
        return from_bounds(-rounding::inf, rounding::inf);
    }
    static constexpr Interval positive_reals() noexcept
    {
        return from_bounds(0.0, rounding::inf);
    }

    // Unchecked construction used by the arithmetic kernels.
    static constexpr Interval from_bounds(double lo, double hi) noexcept
    {
        Interval r;
        r.lo_ = lo;
        r.hi_ = hi;
        return r;
    }

    constexpr double lo() const noexcept
    {
        return lo_;
    }
    constexpr double hi() const noexcept
    {
        return hi_;
    }

    bool is_empty() const noexcept
    {
        return std::isnan(lo_);
    }
    bool is_bounded() const noexcept
    {
        return std::isfinite(lo_) && std::isfinite(hi_);
    }
    bool is_thin() const noexcept
    {
        return lo_ == hi_;
    }
    bool contains(double x) const noexcept
    {
        return lo_ <= x && x <= hi_;
    }
    bool contains_zero() const noexcept
    {
        return lo_ <= 0.0 && 0.0 <= hi_;
    }
    // Subset test; the empty set is a subset of everything.
    bool subset_of(const Interval &other) const noexcept
    {
        if (is_empty()) {
            return true;
        }
        if (other.is_empty()) {
            return false;
        }
        return other.lo_ <= lo_ && hi_ <= other.hi_;
    }
    bool interior_of(const Interval &other) const noexcept
    {
        if (is_empty()) {
            return true;
        }
        if (other.is_empty()) {
            return false;
        }
        return (other.lo_ < lo_ || other.lo_ == -rounding::inf) && (hi_ < other.hi_ || other.hi_ == rounding::inf);
    }

    friend bool operator==(const Interval &a, const Interval &b) noexcept
    {
        if (a.is_empty() || b.is_empty()) {
            return a.is_empty() && b.is_empty();
        }
        return a.lo_ == b.lo_ && a.hi_ == b.hi_;
    }

private:
    double lo_;
    double hi_;
};

// Width rounded upward so it never underestimates.
inline double width(const Interval &a)
{
    if (a.is_empty()) {
        return 0.0;
    }
    return rounding::sub_up(a.hi(), a.lo());
}

inline double midpoint(const Interval &a)
{
    if (a.is_empty()) {
        throw std::domain_error("midpoint of an empty interval");
    }
    if (a.lo() == -rounding::inf && a.hi() == rounding::inf) {
        return 0.0;
    }
    if (a.lo() == -rounding::inf) {
        return -rounding::max_finite;
    }
    if (a.hi() == rounding::inf) {
        return rounding::max_finite;
    }
    const double m = 0.5 * a.lo() + 0.5 * a.hi();
    return std::clamp(m, a.lo(), a.hi());
}

inline double radius(const Interval &a)
{
    const double m = midpoint(a);
    return std::max(rounding::sub_up(m, a.lo()), rounding::sub_up(a.hi(), m));
}

// |[a]| = max(|lo|, |hi|).
inline double magnitude(const Interval &a)
{
    if (a.is_empty()) {
        return 0.0;
    }
    return std::max(std::fabs(a.lo()), std::fabs(a.hi()));
}

// Smallest absolute value over the interval.
inline double mignitude(const Interval &a)
{
    if (a.is_empty() || a.contains_zero()) {
        return 0.0;
    }
    return std::min(std::fabs(a.lo()), std::fabs(a.hi()));
}

inline Interval hull(const Interval &a, const Interval &b)
{
    if (a.is_empty()) {
        return b;
    }
    if (b.is_empty()) {
        return a;
    }
    return Interval::from_bounds(std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi()));
}

inline Interval intersect(const Interval &a, const Interval &b)
{
    if (a.is_empty() || b.is_empty()) {
        return Interval::empty();
    }
    const double lo = std::max(a.lo(), b.lo());
    const double hi = std::min(a.hi(), b.hi());
    if (lo > hi) {
        return Interval::empty();
    }
    return Interval::from_bounds(lo, hi);
}

inline bool disjoint(const Interval &a, const Interval &b)
{
    return intersect(a, b).is_empty();
}

// [m - r, m + r] grown by rel * width + abs on each side.
inline Interval inflate(const Interval &a, double rel, double abs)
{
    if (a.is_empty()) {
        return a;
    }
    const double d = rounding::add_up(rounding::mul_up(rel, width(a)), abs);
    return Interval::from_bounds(rounding::sub_down(a.lo(), d), rounding::add_up(a.hi(), d));
}

inline Interval operator-(const Interval &a)
{
    if (a.is_empty()) {
        return a;
    }
    return Interval::from_bounds(-a.hi(), -a.lo());
}

inline Interval operator+(const Interval &a, const Interval &b)
{
    if (a.is_empty() || b.is_empty()) {
        return Interval::empty();
    }
    return Interval::from_bounds(rounding::add_down(a.lo(), b.lo()), rounding::add_up(a.hi(), b.hi()));
}

inline Interval operator-(const Interval &a, const Interval &b)
{
    if (a.is_empty() || b.is_empty()) {
        return Interval::empty();
    }
    return Interval::from_bounds(rounding::sub_down(a.lo(), b.hi()), rounding::sub_up(a.hi(), b.lo()));
}

inline Interval operator*(const Interval &a, const Interval &b)
{
    using namespace rounding;
    if (a.is_empty() || b.is_empty()) {
        return Interval::empty();
    }
    const double al = a.lo(), ah = a.hi(), bl = b.lo(), bh = b.hi();
    // Sign-case analysis keeps the common cases to two products.
    if (al >= 0) {
        if (bl >= 0) {
            return Interval::from_bounds(mul_down(al, bl), mul_up(ah, bh));
        }
        if (bh <= 0) {
            return Interval::from_bounds(mul_down(ah, bl), mul_up(al, bh));
        }
        return Interval::from_bounds(mul_down(ah, bl), mul_up(ah, bh));
    }
    if (ah <= 0) {
        if (bl >= 0) {
            return Interval::from_bounds(mul_down(al, bh), mul_up(ah, bl));
        }
        if (bh <= 0) {
            return Interval::from_bounds(mul_down(ah, bh), mul_up(al, bl));
        }
        return Interval::from_bounds(mul_down(al, bh), mul_up(al, bl));
    }
    if (bl >= 0) {
        return Interval::from_bounds(mul_down(al, bh), mul_up(ah, bh));
    }
    if (bh <= 0) {
        return Interval::from_bounds(mul_down(ah, bl), mul_up(al, bl));
    }
    return Interval::from_bounds(std::min(mul_down(al, bh), mul_down(ah, bl)),
                                 std::max(mul_up(al, bl), mul_up(ah, bh)));
}

// Division by an interval containing zero yields the whole real line.
inline Interval operator/(const Interval &a, const Interval &b)
{
    using namespace rounding;
    if (a.is_empty() || b.is_empty()) {
        return Interval::empty();
    }
    if (b.contains_zero()) {
        return Interval::entire();
    }
    const double al = a.lo(), ah = a.hi(), bl = b.lo(), bh = b.hi();
    if (bl > 0) {
        const double lo = al >= 0 ? div_down(al, bh) : div_down(al, bl);
        const double hi = ah >= 0 ? div_up(ah, bl) : div_up(ah, bh);
        return Interval::from_bounds(lo, hi);
    }
    // bh < 0
    const double lo = ah >= 0 ? div_down(ah, bh) : div_down(ah, bl);
    const double hi = al >= 0 ? div_up(al, bl) : div_up(al, bh);
    return Interval::from_bounds(lo, hi);
}

inline Interval &operator+=(Interval &a, const Interval &b)
{
    return a = a + b;
}
inline Interval &operator-=(Interval &a, const Interval &b)
{
    return a = a - b;
}
inline Interval &operator*=(Interval &a, const Interval &b)
{
    return a = a * b;
}
inline Interval &operator/=(Interval &a, const Interval &b)
{
    return a = a / b;
}

namespace detail
{

// x^k for x >= 0 with the requested rounding direction.
inline double pow_nonneg(double x, unsigned k, bool up)
{
    double r = 1.0;
    double base = x;
    while (k > 0) {
        if (k & 1u) {
            r = up ? rounding::mul_up(r, base) : rounding::mul_down(r, base);
        }
        k >>= 1u;
        if (k > 0) {
            base = up ? rounding::mul_up(base, base) : rounding::mul_down(base, base);
        }
    }
    return r;
}

} // namespace detail

// Integer power as a single primitive: even powers of an interval containing
// zero start at 0 instead of going negative.
inline Interval pow(const Interval &a, int k)
{
    if (k < 0) {
        throw std::domain_error("pow: negative exponent");
    }
    if (a.is_empty()) {
        return a;
    }
    if (k == 0) {
        return Interval(1.0);
    }
    const auto uk = static_cast<unsigned>(k);
    auto signed_pow = [uk](double x, bool up) {
        if (x >= 0) {
            return detail::pow_nonneg(x, uk, up);
        }
        // odd power of a negative value
        return -detail::pow_nonneg(-x, uk, !up);
    };
    if (k % 2 == 1) {
        return Interval::from_bounds(signed_pow(a.lo(), false), signed_pow(a.hi(), true));
    }
    const double lo = detail::pow_nonneg(mignitude(a), uk, false);
    const double hi = detail::pow_nonneg(magnitude(a), uk, true);
    return Interval::from_bounds(lo, hi);
}

inline Interval sqr(const Interval &a)
{
    return pow(a, 2);
}

inline Interval abs(const Interval &a)
{
    if (a.is_empty()) {
        return a;
    }
    return Interval::from_bounds(mignitude(a), magnitude(a));
}

// Image over a ∩ [0, inf); empty when the intersection is empty.
inline Interval sqrt(const Interval &a)
{
    const Interval d = intersect(a, Interval::positive_reals());
    if (d.is_empty()) {
        return d;
    }
    return Interval::from_bounds(rounding::sqrt_down(d.lo()), rounding::sqrt_up(d.hi()));
}

inline Interval exp(const Interval &a)
{
    if (a.is_empty()) {
        return a;
    }
    auto down = [](double x) {
        if (x == 0.0) {
            return 1.0;
        }
        if (x == -rounding::inf) {
            return 0.0;
        }
        return std::max(0.0, rounding::widen_down(std::exp(x)));
    };
    auto up = [](double x) {
        if (x == 0.0) {
            return 1.0;
        }
        const double e = std::exp(x);
        return std::isinf(e) ? e : rounding::widen_up(e);
    };
    return Interval::from_bounds(down(a.lo()), up(a.hi()));
}

namespace detail
{

// Does [lo, hi] possibly contain a point offset + 2k*pi? Errs towards yes.
inline bool may_contain_periodic(double lo, double hi, double offset)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double slack = 1e-9;
    const double k = std::ceil((lo - offset) / two_pi - slack);
    const double c = offset + k * two_pi;
    return c <= hi + slack * (1.0 + std::fabs(hi));
}

inline double sin_down(double x)
{
    return x == 0.0 ? 0.0 : std::max(-1.0, rounding::widen_down(std::sin(x)));
}
inline double sin_up(double x)
{
    return x == 0.0 ? 0.0 : std::min(1.0, rounding::widen_up(std::sin(x)));
}
inline double cos_down(double x)
{
    return x == 0.0 ? 1.0 : std::max(-1.0, rounding::widen_down(std::cos(x)));
}
inline double cos_up(double x)
{
    return x == 0.0 ? 1.0 : std::min(1.0, rounding::widen_up(std::cos(x)));
}

// Beyond this magnitude the argument reduction above is no longer trusted.
inline constexpr double trig_reduction_limit = 1e6;

} // namespace detail

inline Interval sin(const Interval &a)
{
    if (a.is_empty()) {
        return a;
    }
    if (!a.is_bounded() || width(a) >= 2.0 * std::numbers::pi || magnitude(a) > detail::trig_reduction_limit) {
        return Interval::from_bounds(-1.0, 1.0);
    }
    double lo = std::min(detail::sin_down(a.lo()), detail::sin_down(a.hi()));
    double hi = std::max(detail::sin_up(a.lo()), detail::sin_up(a.hi()));
    if (detail::may_contain_periodic(a.lo(), a.hi(), 0.5 * std::numbers::pi)) {
        hi = 1.0;
    }
    if (detail::may_contain_periodic(a.lo(), a.hi(), -0.5 * std::numbers::pi)) {
        lo = -1.0;
    }
    return Interval::from_bounds(lo, hi);
}

inline Interval cos(const Interval &a)
{
    if (a.is_empty()) {
        return a;
    }
    if (!a.is_bounded() || width(a) >= 2.0 * std::numbers::pi || magnitude(a) > detail::trig_reduction_limit) {
        return Interval::from_bounds(-1.0, 1.0);
    }
    double lo = std::min(detail::cos_down(a.lo()), detail::cos_down(a.hi()));
    double hi = std::max(detail::cos_up(a.lo()), detail::cos_up(a.hi()));
    if (detail::may_contain_periodic(a.lo(), a.hi(), 0.0)) {
        hi = 1.0;
    }
    if (detail::may_contain_periodic(a.lo(), a.hi(), std::numbers::pi)) {
        lo = -1.0;
    }
    return Interval::from_bounds(lo, hi);
}

std::ostream &operator<<(std::ostream &os, const Interval &a);

} // namespace dynopt

#endif
