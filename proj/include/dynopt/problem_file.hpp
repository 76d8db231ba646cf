#ifndef DYNOPT_PROBLEM_FILE_HPP
#define DYNOPT_PROBLEM_FILE_HPP

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <dynopt/bnb.hpp>

namespace dynopt
{

class ProblemFileError : public std::runtime_error
{
public:
    ProblemFileError(const std::string &msg, std::size_t line, std::size_t column)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
          line_(line), column_(column)
    {
    }

    // 1-based; 0 when the error is not tied to a position.
    std::size_t line() const noexcept
    {
        return line_;
    }
    std::size_t column() const noexcept
    {
        return column_;
    }

private:
    std::size_t line_;
    std::size_t column_;
};

// Sectioned key = value text:
//
//   [problem]      name, states, params, t0, tf
//   [rhs]          y1' = <expr>   (one line per state)
//   [initial]      y1 = <value>
//   [params]       p1 = <value>
//   [cost]         phi = <expr>, g = <expr>
//   [constraints]  <expr> = <value>
//
// <value> is a constant expression or [lo, hi] with constant-expression
// bounds; both are enclosed outward. '#' starts a comment.
Problem parse_problem(std::string_view text);
Problem load_problem(const std::filesystem::path &path);

// Text that parse_problem turns back into the same problem.
std::string format_problem(const Problem &prob);

} // namespace dynopt

#endif
