#ifndef DYNOPT_EXPR_HPP
#define DYNOPT_EXPR_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>

#include <dynopt/box.hpp>
#include <dynopt/interval.hpp>

namespace dynopt
{

enum class Op : std::uint8_t {
    constant,
    time,
    state,
    param,
    // Sensitivity dy_k/dp_i of an augmented system; reads state slot n + i*n + k.
    sens,
    neg,
    sin,
    cos,
    exp,
    sqrt,
    abs,
    pow_int,
    add,
    sub,
    mul,
    div,
};

struct Node;

// Immutable expression over time, states and parameters. Copies share
// structure; the builders below apply identity/zero/constant folding only.
class Expr
{
public:
    // The constant 0.
    Expr();

    // A constant literal. Inexact literals (decimal strings that do not
    // round-trip through a double) are enclosed by one ulp on each side.
    static Expr constant(double v, bool exact = true);
    static Expr time();
    static Expr state(int i);
    static Expr param(int j);
    static Expr sens(int state, int param, int n_base);

    Op op() const noexcept;
    double value() const noexcept;
    bool exact() const noexcept;
    // State/param index, or the state index of a sens node.
    int index() const noexcept;
    // Parameter index of a sens node.
    int index2() const noexcept;
    // Flattened augmented-state slot read by state and sens nodes.
    int slot() const noexcept;
    int exponent() const noexcept;
    Expr lhs() const;
    Expr rhs() const;
    Expr child() const
    {
        return lhs();
    }

    bool is_constant() const noexcept
    {
        return op() == Op::constant;
    }
    bool is_constant(double v) const noexcept;
    // Enclosure of a constant node.
    Interval constant_value() const;

    const Node *id() const noexcept
    {
        return node_.get();
    }

    // Number of nodes in the tree, counting shared subtrees once.
    std::size_t dag_size() const;

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    friend Expr make_node(Node &&);
    friend struct Node;

    std::shared_ptr<const Node> node_;
};

struct Node {
    Op op = Op::constant;
    double value = 0.0;
    bool exact = true;
    int index = 0;
    int index2 = 0;
    int slot = 0;
    int exponent = 0;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;

    static const std::shared_ptr<const Node> &of(const Expr &e)
    {
        return e.node_;
    }
    static Expr wrap(std::shared_ptr<const Node> n)
    {
        return Expr(std::move(n));
    }
};

class UnsupportedOperation : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

Expr operator+(const Expr &a, const Expr &b);
Expr operator-(const Expr &a, const Expr &b);
Expr operator*(const Expr &a, const Expr &b);
Expr operator/(const Expr &a, const Expr &b);
Expr operator-(const Expr &a);
Expr sin(const Expr &a);
Expr cos(const Expr &a);
Expr exp(const Expr &a);
Expr sqrt(const Expr &a);
Expr abs(const Expr &a);
Expr pow(const Expr &a, int k);

bool structurally_equal(const Expr &a, const Expr &b);

// Variable to differentiate with respect to. State indices are flattened
// slots, so a sensitivity node is the state at its slot.
struct Var {
    enum class Kind : std::uint8_t { time, state, param };
    Kind kind;
    int index = 0;

    static Var time()
    {
        return {Kind::time, 0};
    }
    static Var state(int i)
    {
        return {Kind::state, i};
    }
    static Var param(int j)
    {
        return {Kind::param, j};
    }
};

Expr differentiate(const Expr &e, Var wrt);

bool depends_on(const Expr &e, Var v);
// Largest state slot / param index referenced, or -1.
int max_state_slot(const Expr &e);
int max_param_index(const Expr &e);

struct EvalContext {
    Interval t;
    Box y;
    Box p;
};

// Natural inclusion: tree walk with every variable replaced by its interval.
Interval eval_interval(const Expr &e, const EvalContext &ctx);
Interval eval_interval(const Expr &e, const Interval &t, std::span<const Interval> y, std::span<const Interval> p);
// Same evaluation at a point; the result is a thin enclosure of the value.
Interval eval_point(const Expr &e, double t, std::span<const double> y, std::span<const double> p);

// Text in the problem-file grammar (sens nodes render as s<i>_<k>, which
// the parser does not accept).
std::string to_string(const Expr &e);

} // namespace dynopt

#endif
