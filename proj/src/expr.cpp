#include <algorithm>
#include <charconv>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <dynopt/expr.hpp>
#include <dynopt/parser.hpp>

namespace dynopt
{

Expr make_node(Node &&n)
{
    return Expr(std::make_shared<const Node>(std::move(n)));
}

namespace
{

const std::shared_ptr<const Node> &zero_node()
{
    static const std::shared_ptr<const Node> z = std::make_shared<const Node>();
    return z;
}

Expr unary(Op op, const Expr &a, int exponent = 0)
{
    Node n;
    n.op = op;
    n.exponent = exponent;
    n.lhs = Node::of(a);
    return make_node(std::move(n));
}

Expr binary(Op op, const Expr &a, const Expr &b)
{
    Node n;
    n.op = op;
    n.lhs = Node::of(a);
    n.rhs = Node::of(b);
    return make_node(std::move(n));
}

bool is_exact_constant(const Expr &e)
{
    return e.is_constant() && e.exact();
}

// Fold to a constant only when the interval result is a single finite double.
bool try_fold(const Interval &r, Expr &out)
{
    if (r.is_empty() || !r.is_thin() || !r.is_bounded()) {
        return false;
    }
    out = Expr::constant(r.lo() == 0.0 ? 0.0 : r.lo());
    return true;
}

} // namespace

Expr::Expr() : node_(zero_node()) {}

Expr Expr::constant(double v, bool exact)
{
    if (!std::isfinite(v)) {
        throw std::invalid_argument("Expr::constant: value must be finite");
    }
    Node n;
    n.op = Op::constant;
    n.value = v;
    n.exact = exact;
    return make_node(std::move(n));
}

Expr Expr::time()
{
    Node n;
    n.op = Op::time;
    return make_node(std::move(n));
}

Expr Expr::state(int i)
{
    if (i < 0) {
        throw std::invalid_argument("Expr::state: negative index");
    }
    Node n;
    n.op = Op::state;
    n.index = i;
    n.slot = i;
    return make_node(std::move(n));
}

Expr Expr::param(int j)
{
    if (j < 0) {
        throw std::invalid_argument("Expr::param: negative index");
    }
    Node n;
    n.op = Op::param;
    n.index = j;
    return make_node(std::move(n));
}

Expr Expr::sens(int state, int param, int n_base)
{
    if (state < 0 || param < 0 || n_base <= 0 || state >= n_base) {
        throw std::invalid_argument("Expr::sens: bad indices");
    }
    Node n;
    n.op = Op::sens;
    n.index = state;
    n.index2 = param;
    n.slot = n_base + param * n_base + state;
    return make_node(std::move(n));
}

Op Expr::op() const noexcept
{
    return node_->op;
}
double Expr::value() const noexcept
{
    return node_->value;
}
bool Expr::exact() const noexcept
{
    return node_->exact;
}
int Expr::index() const noexcept
{
    return node_->index;
}
int Expr::index2() const noexcept
{
    return node_->index2;
}
int Expr::slot() const noexcept
{
    return node_->slot;
}
int Expr::exponent() const noexcept
{
    return node_->exponent;
}
Expr Expr::lhs() const
{
    return node_->lhs ? Node::wrap(node_->lhs) : Expr();
}
Expr Expr::rhs() const
{
    return node_->rhs ? Node::wrap(node_->rhs) : Expr();
}

bool Expr::is_constant(double v) const noexcept
{
    return node_->op == Op::constant && node_->exact && node_->value == v;
}

Interval Expr::constant_value() const
{
    if (!is_constant()) {
        throw std::logic_error("constant_value on a non-constant node");
    }
    if (node_->exact) {
        return Interval(node_->value);
    }
    return Interval(rounding::next_down(node_->value), rounding::next_up(node_->value));
}

std::size_t Expr::dag_size() const
{
    std::unordered_set<const Node *> seen;
    std::vector<const Node *> stack{node_.get()};
    while (!stack.empty()) {
        const Node *n = stack.back();
        stack.pop_back();
        if (!seen.insert(n).second) {
            continue;
        }
        if (n->lhs) {
            stack.push_back(n->lhs.get());
        }
        if (n->rhs) {
            stack.push_back(n->rhs.get());
        }
    }
    return seen.size();
}

Expr operator+(const Expr &a, const Expr &b)
{
    if (a.is_constant(0.0)) {
        return b;
    }
    if (b.is_constant(0.0)) {
        return a;
    }
    Expr r;
    if (is_exact_constant(a) && is_exact_constant(b) && try_fold(a.constant_value() + b.constant_value(), r)) {
        return r;
    }
    return binary(Op::add, a, b);
}

Expr operator-(const Expr &a, const Expr &b)
{
    if (b.is_constant(0.0)) {
        return a;
    }
    if (a.is_constant(0.0)) {
        return -b;
    }
    Expr r;
    if (is_exact_constant(a) && is_exact_constant(b) && try_fold(a.constant_value() - b.constant_value(), r)) {
        return r;
    }
    return binary(Op::sub, a, b);
}

Expr operator*(const Expr &a, const Expr &b)
{
    if (a.is_constant(0.0) || b.is_constant(0.0)) {
        return Expr();
    }
    if (a.is_constant(1.0)) {
        return b;
    }
    if (b.is_constant(1.0)) {
        return a;
    }
    Expr r;
    if (is_exact_constant(a) && is_exact_constant(b) && try_fold(a.constant_value() * b.constant_value(), r)) {
        return r;
    }
    return binary(Op::mul, a, b);
}

Expr operator/(const Expr &a, const Expr &b)
{
    if (b.is_constant(1.0)) {
        return a;
    }
    if (a.is_constant(0.0) && !(b.is_constant() && b.constant_value().contains_zero())) {
        return Expr();
    }
    Expr r;
    if (is_exact_constant(a) && is_exact_constant(b) && try_fold(a.constant_value() / b.constant_value(), r)) {
        return r;
    }
    return binary(Op::div, a, b);
}

Expr operator-(const Expr &a)
{
    if (a.is_constant()) {
        return Expr::constant(a.value() == 0.0 ? 0.0 : -a.value(), a.exact());
    }
    if (a.op() == Op::neg) {
        return a.child();
    }
    return unary(Op::neg, a);
}

Expr sin(const Expr &a)
{
    Expr r;
    if (is_exact_constant(a) && try_fold(sin(a.constant_value()), r)) {
        return r;
    }
    return unary(Op::sin, a);
}

Expr cos(const Expr &a)
{
    Expr r;
    if (is_exact_constant(a) && try_fold(cos(a.constant_value()), r)) {
        return r;
    }
    return unary(Op::cos, a);
}

Expr exp(const Expr &a)
{
    Expr r;
    if (is_exact_constant(a) && try_fold(exp(a.constant_value()), r)) {
        return r;
    }
    return unary(Op::exp, a);
}

Expr sqrt(const Expr &a)
{
    Expr r;
    if (is_exact_constant(a) && try_fold(sqrt(a.constant_value()), r)) {
        return r;
    }
    return unary(Op::sqrt, a);
}

Expr abs(const Expr &a)
{
    Expr r;
    if (is_exact_constant(a) && try_fold(abs(a.constant_value()), r)) {
        return r;
    }
    return unary(Op::abs, a);
}

Expr pow(const Expr &a, int k)
{
    if (k < 0) {
        throw std::invalid_argument("pow: exponent must be a non-negative integer");
    }
    if (k == 0) {
        return Expr::constant(1.0);
    }
    if (k == 1) {
        return a;
    }
    Expr r;
    if (is_exact_constant(a) && try_fold(pow(a.constant_value(), k), r)) {
        return r;
    }
    return unary(Op::pow_int, a, k);
}

bool structurally_equal(const Expr &a, const Expr &b)
{
    if (a.id() == b.id()) {
        return true;
    }
    if (a.op() != b.op()) {
        return false;
    }
    switch (a.op()) {
        case Op::constant:
            return a.value() == b.value() && a.exact() == b.exact();
        case Op::time:
            return true;
        case Op::state:
        case Op::param:
            return a.index() == b.index();
        case Op::sens:
            return a.index() == b.index() && a.index2() == b.index2() && a.slot() == b.slot();
        case Op::pow_int:
            return a.exponent() == b.exponent() && structurally_equal(a.child(), b.child());
        case Op::neg:
        case Op::sin:
        case Op::cos:
        case Op::exp:
        case Op::sqrt:
        case Op::abs:
            return structurally_equal(a.child(), b.child());
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div:
            return structurally_equal(a.lhs(), b.lhs()) && structurally_equal(a.rhs(), b.rhs());
    }
    return false;
}

namespace
{

bool is_var(const Expr &e, Var v)
{
    switch (v.kind) {
        case Var::Kind::time:
            return e.op() == Op::time;
        case Var::Kind::state:
            return (e.op() == Op::state || e.op() == Op::sens) && e.slot() == v.index;
        case Var::Kind::param:
            return e.op() == Op::param && e.index() == v.index;
    }
    return false;
}

class Differentiator
{
public:
    explicit Differentiator(Var v) : wrt_(v) {}

    Expr operator()(const Expr &e)
    {
        if (auto it = memo_.find(e.id()); it != memo_.end()) {
            return it->second;
        }
        Expr d = compute(e);
        memo_.emplace(e.id(), d);
        keep_.push_back(e);
        return d;
    }

private:
    Expr compute(const Expr &e)
    {
        switch (e.op()) {
            case Op::constant:
                return Expr();
            case Op::time:
            case Op::state:
            case Op::param:
            case Op::sens:
                return is_var(e, wrt_) ? Expr::constant(1.0) : Expr();
            case Op::neg:
                return -(*this)(e.child());
            case Op::add:
                return (*this)(e.lhs()) + (*this)(e.rhs());
            case Op::sub:
                return (*this)(e.lhs()) - (*this)(e.rhs());
            case Op::mul: {
                const Expr a = e.lhs(), b = e.rhs();
                return (*this)(a) * b + a * (*this)(b);
            }
            case Op::div: {
                const Expr a = e.lhs(), b = e.rhs();
                const Expr da = (*this)(a), db = (*this)(b);
                if (db.is_constant(0.0)) {
                    return da / b;
                }
                return (da * b - a * db) / pow(b, 2);
            }
            case Op::sin:
                return cos(e.child()) * (*this)(e.child());
            case Op::cos:
                return -(sin(e.child()) * (*this)(e.child()));
            case Op::exp:
                return e * (*this)(e.child());
            case Op::sqrt:
                return (*this)(e.child()) / (Expr::constant(2.0) * e);
            case Op::abs:
                throw UnsupportedOperation("differentiate: abs is not differentiable");
            case Op::pow_int: {
                const int k = e.exponent();
                const Expr a = e.child();
                return Expr::constant(static_cast<double>(k)) * pow(a, k - 1) * (*this)(a);
            }
        }
        throw std::logic_error("differentiate: unknown node");
    }

    Var wrt_;
    std::unordered_map<const Node *, Expr> memo_;
    // Keeps memo keys alive for the lifetime of the differentiator.
    std::vector<Expr> keep_;
};

template <typename Visit>
void visit_dag(const Expr &e, Visit &&visit)
{
    std::unordered_set<const Node *> seen;
    std::vector<Expr> stack{e};
    while (!stack.empty()) {
        Expr cur = stack.back();
        stack.pop_back();
        if (!seen.insert(cur.id()).second) {
            continue;
        }
        visit(cur);
        const Node &n = *cur.id();
        if (n.lhs) {
            stack.push_back(cur.lhs());
        }
        if (n.rhs) {
            stack.push_back(cur.rhs());
        }
    }
}

} // namespace

Expr differentiate(const Expr &e, Var wrt)
{
    Differentiator d(wrt);
    return d(e);
}

bool depends_on(const Expr &e, Var v)
{
    bool found = false;
    visit_dag(e, [&](const Expr &n) { found = found || is_var(n, v); });
    return found;
}

int max_state_slot(const Expr &e)
{
    int m = -1;
    visit_dag(e, [&](const Expr &n) {
        if (n.op() == Op::state || n.op() == Op::sens) {
            m = std::max(m, n.slot());
        }
    });
    return m;
}

int max_param_index(const Expr &e)
{
    int m = -1;
    visit_dag(e, [&](const Expr &n) {
        if (n.op() == Op::param) {
            m = std::max(m, n.index());
        }
    });
    return m;
}

namespace
{

Interval eval_rec(const Expr &e, const Interval &t, std::span<const Interval> y, std::span<const Interval> p,
                  std::unordered_map<const Node *, Interval> &memo)
{
    const Node &n = *e.id();
    if (auto it = memo.find(&n); it != memo.end()) {
        return it->second;
    }
    Interval r;
    switch (n.op) {
        case Op::constant:
            r = e.constant_value();
            break;
        case Op::time:
            r = t;
            break;
        case Op::state:
        case Op::sens:
            if (static_cast<std::size_t>(n.slot) >= y.size()) {
                throw std::out_of_range("eval: state slot out of range");
            }
            r = y[static_cast<std::size_t>(n.slot)];
            break;
        case Op::param:
            if (static_cast<std::size_t>(n.index) >= p.size()) {
                throw std::out_of_range("eval: parameter index out of range");
            }
            r = p[static_cast<std::size_t>(n.index)];
            break;
        case Op::neg:
            r = -eval_rec(e.child(), t, y, p, memo);
            break;
        case Op::sin:
            r = sin(eval_rec(e.child(), t, y, p, memo));
            break;
        case Op::cos:
            r = cos(eval_rec(e.child(), t, y, p, memo));
            break;
        case Op::exp:
            r = exp(eval_rec(e.child(), t, y, p, memo));
            break;
        case Op::sqrt:
            r = sqrt(eval_rec(e.child(), t, y, p, memo));
            break;
        case Op::abs:
            r = abs(eval_rec(e.child(), t, y, p, memo));
            break;
        case Op::pow_int:
            r = pow(eval_rec(e.child(), t, y, p, memo), n.exponent);
            break;
        case Op::add:
            r = eval_rec(e.lhs(), t, y, p, memo) + eval_rec(e.rhs(), t, y, p, memo);
            break;
        case Op::sub:
            r = eval_rec(e.lhs(), t, y, p, memo) - eval_rec(e.rhs(), t, y, p, memo);
            break;
        case Op::mul:
            r = eval_rec(e.lhs(), t, y, p, memo) * eval_rec(e.rhs(), t, y, p, memo);
            break;
        case Op::div:
            r = eval_rec(e.lhs(), t, y, p, memo) / eval_rec(e.rhs(), t, y, p, memo);
            break;
    }
    memo.emplace(&n, r);
    return r;
}

} // namespace

Interval eval_interval(const Expr &e, const Interval &t, std::span<const Interval> y, std::span<const Interval> p)
{
    std::unordered_map<const Node *, Interval> memo;
    return eval_rec(e, t, y, p, memo);
}

Interval eval_interval(const Expr &e, const EvalContext &ctx)
{
    return eval_interval(e, ctx.t, ctx.y.view(), ctx.p.view());
}

Interval eval_point(const Expr &e, double t, std::span<const double> y, std::span<const double> p)
{
    const Box yb = point_box(y);
    const Box pb = point_box(p);
    return eval_interval(e, Interval(t), yb.view(), pb.view());
}

namespace
{

enum Prec { prec_add = 1, prec_mul = 2, prec_neg = 3, prec_pow = 4, prec_atom = 5 };

int precedence(const Expr &e)
{
    switch (e.op()) {
        case Op::add:
        case Op::sub:
            return prec_add;
        case Op::mul:
        case Op::div:
            return prec_mul;
        case Op::neg:
            return prec_neg;
        case Op::pow_int:
            return prec_pow;
        case Op::constant:
            return std::signbit(e.value()) ? prec_neg : prec_atom;
        default:
            return prec_atom;
    }
}

std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void render(const Expr &e, std::string &out);

void render_paren(const Expr &e, bool paren, std::string &out)
{
    if (paren) {
        out += '(';
    }
    render(e, out);
    if (paren) {
        out += ')';
    }
}

const char *function_name(Op op)
{
    switch (op) {
        case Op::sin:
            return "sin";
        case Op::cos:
            return "cos";
        case Op::exp:
            return "exp";
        case Op::sqrt:
            return "sqrt";
        case Op::abs:
            return "abs";
        default:
            return "";
    }
}

void render(const Expr &e, std::string &out)
{
    switch (e.op()) {
        case Op::constant:
            out += e.exact() ? exact_decimal(e.value()) : format_double(e.value());
            return;
        case Op::time:
            out += 't';
            return;
        case Op::state:
            out += 'y' + std::to_string(e.index() + 1);
            return;
        case Op::param:
            out += 'p' + std::to_string(e.index() + 1);
            return;
        case Op::sens:
            out += 's' + std::to_string(e.index2() + 1) + '_' + std::to_string(e.index() + 1);
            return;
        case Op::neg:
            out += '-';
            render_paren(e.child(), precedence(e.child()) < prec_pow, out);
            return;
        case Op::sin:
        case Op::cos:
        case Op::exp:
        case Op::sqrt:
        case Op::abs:
            out += function_name(e.op());
            render_paren(e.child(), true, out);
            return;
        case Op::pow_int:
            render_paren(e.child(), precedence(e.child()) < prec_atom, out);
            out += '^' + std::to_string(e.exponent());
            return;
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div: {
            const int p = precedence(e);
            const Expr l = e.lhs(), r = e.rhs();
            render_paren(l, precedence(l) < p, out);
            switch (e.op()) {
                case Op::add:
                    out += " + ";
                    break;
                case Op::sub:
                    out += " - ";
                    break;
                case Op::mul:
                    out += '*';
                    break;
                default:
                    out += '/';
                    break;
            }
            render_paren(r, precedence(r) <= p || precedence(r) == prec_neg, out);
            return;
        }
    }
}

} // namespace

std::string to_string(const Expr &e)
{
    std::string out;
    render(e, out);
    return out;
}

} // namespace dynopt
