#include <cstring>
#include <stdexcept>
#include <unordered_map>

#include <dynopt/tape.hpp>

namespace dynopt
{

namespace
{

struct Key {
    Op op;
    std::int32_t a;
    std::int32_t b;
    std::int32_t k;
    double lo;
    double hi;

    bool operator==(const Key &o) const
    {
        return op == o.op && a == o.a && b == o.b && k == o.k && std::memcmp(&lo, &o.lo, sizeof(double)) == 0
               && std::memcmp(&hi, &o.hi, sizeof(double)) == 0;
    }
};

struct KeyHash {
    std::size_t operator()(const Key &key) const noexcept
    {
        std::uint64_t lo = 0, hi = 0;
        std::memcpy(&lo, &key.lo, sizeof(double));
        std::memcpy(&hi, &key.hi, sizeof(double));
        std::size_t h = static_cast<std::size_t>(key.op);
        auto mix = [&h](std::uint64_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
        mix(static_cast<std::uint64_t>(key.a));
        mix(static_cast<std::uint64_t>(key.b));
        mix(static_cast<std::uint64_t>(key.k));
        mix(lo);
        mix(hi);
        return h;
    }
};

} // namespace

Tape::Tape(std::span<const Expr> outputs)
{
    std::unordered_map<const Node *, std::int32_t> by_node;
    std::unordered_map<Key, std::int32_t, KeyHash> by_key;
    std::vector<Expr> keep;

    auto emit = [&](Instr ins) {
        const Key key{ins.op, ins.a, ins.b, ins.k, ins.c.lo(), ins.c.hi()};
        if (auto it = by_key.find(key); it != by_key.end()) {
            return it->second;
        }
        const auto id = static_cast<std::int32_t>(code_.size());
        code_.push_back(ins);
        by_key.emplace(key, id);
        return id;
    };

    // Iterative post-order so deep trees do not blow the stack.
    auto compile = [&](const Expr &root) {
        std::vector<std::pair<Expr, bool>> stack{{root, false}};
        while (!stack.empty()) {
            auto [e, expanded] = stack.back();
            stack.pop_back();
            if (by_node.count(e.id()) != 0) {
                continue;
            }
            const Node &n = *e.id();
            if (!expanded) {
                stack.emplace_back(e, true);
                if (n.rhs) {
                    stack.emplace_back(e.rhs(), false);
                }
                if (n.lhs) {
                    stack.emplace_back(e.lhs(), false);
                }
                continue;
            }
            Instr ins{n.op, 0, 0, 0, Interval()};
            switch (n.op) {
                case Op::constant:
                    ins.c = e.constant_value();
                    break;
                case Op::time:
                    break;
                case Op::state:
                case Op::sens:
                    ins.op = Op::state;
                    ins.k = n.slot;
                    max_slot_ = std::max(max_slot_, ins.k);
                    break;
                case Op::param:
                    ins.k = n.index;
                    max_param_ = std::max(max_param_, ins.k);
                    break;
                case Op::pow_int:
                    ins.k = n.exponent;
                    ins.a = by_node.at(n.lhs.get());
                    break;
                case Op::neg:
                case Op::sin:
                case Op::cos:
                case Op::exp:
                case Op::sqrt:
                case Op::abs:
                    ins.a = by_node.at(n.lhs.get());
                    break;
                case Op::add:
                case Op::sub:
                case Op::mul:
                case Op::div:
                    ins.a = by_node.at(n.lhs.get());
                    ins.b = by_node.at(n.rhs.get());
                    break;
            }
            by_node.emplace(&n, emit(ins));
            keep.push_back(e);
        }
        return by_node.at(root.id());
    };

    outputs_.reserve(outputs.size());
    for (const auto &e : outputs) {
        outputs_.push_back(compile(e));
    }
}

void Tape::eval(const Interval &t, std::span<const Interval> y, std::span<const Interval> p, std::span<Interval> out,
                std::vector<Interval> &work) const
{
    if (static_cast<std::int64_t>(y.size()) <= max_slot_ || static_cast<std::int64_t>(p.size()) <= max_param_) {
        throw std::out_of_range("Tape::eval: context dimension too small");
    }
    if (out.size() != outputs_.size()) {
        throw std::invalid_argument("Tape::eval: output size mismatch");
    }
    work.resize(code_.size());
    Interval *r = work.data();
    const std::size_t n = code_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Instr &ins = code_[i];
        switch (ins.op) {
            case Op::constant:
                r[i] = ins.c;
                break;
            case Op::time:
                r[i] = t;
                break;
            case Op::state:
            case Op::sens:
                r[i] = y[static_cast<std::size_t>(ins.k)];
                break;
            case Op::param:
                r[i] = p[static_cast<std::size_t>(ins.k)];
                break;
            case Op::neg:
                r[i] = -r[ins.a];
                break;
            case Op::sin:
                r[i] = sin(r[ins.a]);
                break;
            case Op::cos:
                r[i] = cos(r[ins.a]);
                break;
            case Op::exp:
                r[i] = exp(r[ins.a]);
                break;
            case Op::sqrt:
                r[i] = sqrt(r[ins.a]);
                break;
            case Op::abs:
                r[i] = abs(r[ins.a]);
                break;
            case Op::pow_int:
                r[i] = ins.k == 2 ? sqr(r[ins.a]) : pow(r[ins.a], ins.k);
                break;
            case Op::add:
                r[i] = r[ins.a] + r[ins.b];
                break;
            case Op::sub:
                r[i] = r[ins.a] - r[ins.b];
                break;
            case Op::mul:
                r[i] = r[ins.a] * r[ins.b];
                break;
            case Op::div:
                r[i] = r[ins.a] / r[ins.b];
                break;
        }
    }
    for (std::size_t j = 0; j < outputs_.size(); ++j) {
        out[j] = r[outputs_[j]];
    }
}

std::vector<Interval> Tape::eval(const Interval &t, std::span<const Interval> y, std::span<const Interval> p) const
{
    std::vector<Interval> out(outputs_.size());
    std::vector<Interval> work;
    eval(t, y, p, out, work);
    return out;
}

} // namespace dynopt
