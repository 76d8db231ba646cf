#ifndef DYNOPT_BOX_HPP
#define DYNOPT_BOX_HPP

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include <dynopt/interval.hpp>

namespace dynopt
{

// Interval vector. Empty as soon as one component is empty.
class Box
{
public:
    Box() = default;
    explicit Box(std::size_t n, Interval init = Interval(0.0)) : comps_(n, init) {}
    Box(std::initializer_list<Interval> comps) : comps_(comps) {}
    explicit Box(std::vector<Interval> comps) : comps_(std::move(comps)) {}

    static Box from_points(std::span<const double> xs);

    std::size_t size() const noexcept
    {
        return comps_.size();
    }
    Interval &operator[](std::size_t i)
    {
        return comps_[i];
    }
    const Interval &operator[](std::size_t i) const
    {
        return comps_[i];
    }

    auto begin() noexcept
    {
        return comps_.begin();
    }
    auto end() noexcept
    {
        return comps_.end();
    }
    auto begin() const noexcept
    {
        return comps_.begin();
    }
    auto end() const noexcept
    {
        return comps_.end();
    }

    std::span<const Interval> view() const noexcept
    {
        return comps_;
    }
    std::span<Interval> view() noexcept
    {
        return comps_;
    }
    const std::vector<Interval> &components() const noexcept
    {
        return comps_;
    }

    void push_back(const Interval &x)
    {
        comps_.push_back(x);
    }

    bool is_empty() const;
    // Max component width.
    double width() const;
    std::vector<double> midpoint() const;
    std::vector<double> widths() const;

    bool subset_of(const Box &other) const;
    bool contains(std::span<const double> x) const;

    friend bool operator==(const Box &a, const Box &b) = default;

private:
    std::vector<Interval> comps_;
};

// max_i |[a_i]|.
double box_inf_norm(const Box &b);
// Same norm restricted to the components [first, first + count).
double box_inf_norm(const Box &b, std::size_t first, std::size_t count);

Box hull(const Box &a, const Box &b);
Box intersect(const Box &a, const Box &b);
Box inflate(const Box &b, double rel, double abs);

// Split component k at its midpoint; the two halves share the midpoint.
std::pair<Box, Box> bisect(const Box &b, std::size_t k);

Box point_box(std::span<const double> xs);

std::ostream &operator<<(std::ostream &os, const Box &b);

} // namespace dynopt

#endif
