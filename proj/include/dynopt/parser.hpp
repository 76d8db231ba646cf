#ifndef DYNOPT_PARSER_HPP
#define DYNOPT_PARSER_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include <dynopt/expr.hpp>
#include <dynopt/interval.hpp>

namespace dynopt
{

class ParseError : public std::runtime_error
{
public:
    ParseError(const std::string &msg, std::size_t position)
        : std::runtime_error(msg + " at column " + std::to_string(position + 1)), position_(position)
    {
    }

    // Zero-based offset into the parsed text.
    std::size_t position() const noexcept
    {
        return position_;
    }

private:
    std::size_t position_;
};

// Declared dimensions; identifiers beyond them are rejected. Negative means
// unchecked.
struct ParseOptions {
    int num_states = -1;
    int num_params = -1;
};

// expr   := term (("+"|"-") term)*
// term   := unary (("*"|"/") unary)*
// unary  := ("-"|"+") unary | factor
// factor := atom ["^" int]
// atom   := number | ident | "(" expr ")" | func "(" expr ")"
// ident  := t | y<k> | p<k> | u<k>   (u<k> is an alias of p<k>, 1-based)
Expr parse(std::string_view src, const ParseOptions &opts = {});

// Decimal literal -> tightest enclosing interval (thin when exact).
Interval parse_decimal(std::string_view text);

// Shortest decimal text that parse_decimal reads back as exactly v.
std::string exact_decimal(double v);

} // namespace dynopt

#endif
