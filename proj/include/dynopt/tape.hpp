#ifndef DYNOPT_TAPE_HPP
#define DYNOPT_TAPE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <dynopt/expr.hpp>
#include <dynopt/interval.hpp>

namespace dynopt
{

// A set of expressions flattened into straight-line code with common
// subexpressions merged. This is the evaluation path used by the
// integrator; the tree walk in eval_interval is the reference it is tested
// against.
class Tape
{
public:
    Tape() = default;
    explicit Tape(std::span<const Expr> outputs);

    std::size_t num_outputs() const noexcept
    {
        return outputs_.size();
    }
    std::size_t num_instructions() const noexcept
    {
        return code_.size();
    }

    // `work` is scratch space, resized as needed.
    void eval(const Interval &t, std::span<const Interval> y, std::span<const Interval> p, std::span<Interval> out,
              std::vector<Interval> &work) const;

    std::vector<Interval> eval(const Interval &t, std::span<const Interval> y, std::span<const Interval> p) const;

private:
    struct Instr {
        Op op;
        std::int32_t a = 0;
        std::int32_t b = 0;
        std::int32_t k = 0;
        Interval c;
    };

    std::vector<Instr> code_;
    std::vector<std::int32_t> outputs_;
    std::int32_t max_slot_ = -1;
    std::int32_t max_param_ = -1;
};

} // namespace dynopt

#endif
