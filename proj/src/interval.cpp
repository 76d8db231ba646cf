#include <algorithm>
#include <ostream>
#include <stdexcept>

#include <dynopt/box.hpp>
#include <dynopt/interval.hpp>

namespace dynopt
{

std::ostream &operator<<(std::ostream &os, const Interval &a)
{
    if (a.is_empty()) {
        return os << "[empty]";
    }
    return os << '[' << a.lo() << ", " << a.hi() << ']';
}

Box Box::from_points(std::span<const double> xs)
{
    return point_box(xs);
}

bool Box::is_empty() const
{
    return std::any_of(comps_.begin(), comps_.end(), [](const Interval &x) { return x.is_empty(); });
}

double Box::width() const
{
    double w = 0.0;
    for (const auto &x : comps_) {
        w = std::max(w, dynopt::width(x));
    }
    return w;
}

std::vector<double> Box::midpoint() const
{
    std::vector<double> m;
    m.reserve(comps_.size());
    for (const auto &x : comps_) {
        m.push_back(dynopt::midpoint(x));
    }
    return m;
}

std::vector<double> Box::widths() const
{
    std::vector<double> w;
    w.reserve(comps_.size());
    for (const auto &x : comps_) {
        w.push_back(dynopt::width(x));
    }
    return w;
}

bool Box::subset_of(const Box &other) const
{
    if (size() != other.size()) {
        return false;
    }
    for (std::size_t i = 0; i < size(); ++i) {
        if (!comps_[i].subset_of(other[i])) {
            return false;
        }
    }
    return true;
}

bool Box::contains(std::span<const double> x) const
{
    if (x.size() != size()) {
        return false;
    }
    for (std::size_t i = 0; i < size(); ++i) {
        if (!comps_[i].contains(x[i])) {
            return false;
        }
    }
    return true;
}

double box_inf_norm(const Box &b)
{
    return box_inf_norm(b, 0, b.size());
}

double box_inf_norm(const Box &b, std::size_t first, std::size_t count)
{
    if (first + count > b.size()) {
        throw std::out_of_range("box_inf_norm: component range");
    }
    double r = 0.0;
    for (std::size_t i = first; i < first + count; ++i) {
        r = std::max(r, magnitude(b[i]));
    }
    return r;
}

Box hull(const Box &a, const Box &b)
{
    if (a.size() != b.size()) {
        throw std::invalid_argument("hull: dimension mismatch");
    }
    Box r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        r[i] = hull(a[i], b[i]);
    }
    return r;
}

Box intersect(const Box &a, const Box &b)
{
    if (a.size() != b.size()) {
        throw std::invalid_argument("intersect: dimension mismatch");
    }
    Box r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        r[i] = intersect(a[i], b[i]);
    }
    return r;
}

Box inflate(const Box &b, double rel, double abs)
{
    Box r(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        r[i] = inflate(b[i], rel, abs);
    }
    return r;
}

std::pair<Box, Box> bisect(const Box &b, std::size_t k)
{
    if (k >= b.size()) {
        throw std::out_of_range("bisect: index out of range");
    }
    const Interval &x = b[k];
    if (x.is_empty() || !x.is_bounded() || !(x.lo() < x.hi())) {
        throw std::invalid_argument("bisect: component must be bounded with positive width");
    }
    const double m = midpoint(x);
    Box left = b;
    Box right = b;
    left[k] = Interval(x.lo(), m);
    right[k] = Interval(m, x.hi());
    return {std::move(left), std::move(right)};
}

Box point_box(std::span<const double> xs)
{
    Box r(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        r[i] = Interval(xs[i]);
    }
    return r;
}

std::ostream &operator<<(std::ostream &os, const Box &b)
{
    os << '(';
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (i != 0) {
            os << " ; ";
        }
        os << b[i];
    }
    return os << ')';
}

} // namespace dynopt
