#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <cfenv>
#include <cstdlib>
#include <string>

#include <dynopt/parser.hpp>

namespace dynopt
{

Interval parse_decimal(std::string_view text)
{
    const std::string s(text);
    char *end = nullptr;
    const int old = std::fegetround();
    std::fesetround(FE_DOWNWARD);
    const double lo = std::strtod(s.c_str(), &end);
    std::fesetround(FE_UPWARD);
    const double hi = std::strtod(s.c_str(), nullptr);
    std::fesetround(old);
    if (end != s.c_str() + s.size() || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw std::invalid_argument("invalid numeric literal '" + s + "'");
    }
    return Interval(lo, hi);
}

namespace
{

class Parser
{
public:
    Parser(std::string_view src, const ParseOptions &opts) : src_(src), opts_(opts) {}

    Expr run()
    {
        Expr e = expr();
        skip_ws();
        if (pos_ != src_.size()) {
            throw ParseError("unexpected '" + std::string(1, src_[pos_]) + "'", pos_);
        }
        return e;
    }

private:
    void skip_ws()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])) != 0) {
            ++pos_;
        }
    }

    bool accept(char c)
    {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c)) {
            if (pos_ >= src_.size()) {
                throw ParseError(std::string("expected '") + c + "' but reached end of input", pos_);
            }
            throw ParseError(std::string("expected '") + c + "'", pos_);
        }
    }

    Expr expr()
    {
        Expr lhs = term();
        while (true) {
            if (accept('+')) {
                lhs = lhs + term();
            } else if (accept('-')) {
                lhs = lhs - term();
            } else {
                return lhs;
            }
        }
    }

    Expr term()
    {
        Expr lhs = unary();
        while (true) {
            if (accept('*')) {
                lhs = lhs * unary();
            } else if (accept('/')) {
                lhs = lhs / unary();
            } else {
                return lhs;
            }
        }
    }

    Expr unary()
    {
        if (accept('-')) {
            return -unary();
        }
        if (accept('+')) {
            return unary();
        }
        return factor();
    }

    Expr factor()
    {
        Expr base = atom();
        if (accept('^')) {
            skip_ws();
            const std::size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])) != 0) {
                ++pos_;
            }
            if (start == pos_) {
                throw ParseError("exponent must be a non-negative integer literal", start);
            }
            if (pos_ - start > 6) {
                throw ParseError("exponent too large", start);
            }
            return pow(base, std::stoi(std::string(src_.substr(start, pos_ - start))));
        }
        return base;
    }

    Expr number()
    {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])) != 0) {
                ++pos_;
            }
        };
        digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            const std::size_t save = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) {
                ++pos_;
            }
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])) != 0) {
                digits();
            } else {
                pos_ = save;
            }
        }
        const auto text = src_.substr(start, pos_ - start);
        Interval v;
        try {
            v = parse_decimal(text);
        } catch (const std::invalid_argument &) {
            throw ParseError("invalid number '" + std::string(text) + "'", start);
        }
        if (v.is_thin()) {
            return Expr::constant(v.lo());
        }
        // Round-to-nearest value with a one-ulp enclosure on each side.
        const std::string s(text);
        return Expr::constant(std::strtod(s.c_str(), nullptr), false);
    }

    int index_suffix(std::string_view ident, std::size_t start)
    {
        const auto digits = ident.substr(1);
        if (digits.empty() || digits.size() > 6) {
            throw ParseError("unknown identifier '" + std::string(ident) + "'", start);
        }
        for (char c : digits) {
            if (std::isdigit(static_cast<unsigned char>(c)) == 0) {
                throw ParseError("unknown identifier '" + std::string(ident) + "'", start);
            }
        }
        const int k = std::stoi(std::string(digits));
        if (k < 1) {
            throw ParseError("indices start at 1 in '" + std::string(ident) + "'", start);
        }
        return k - 1;
    }

    Expr atom()
    {
        skip_ws();
        if (pos_ >= src_.size()) {
            throw ParseError("unexpected end of input", pos_);
        }
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) != 0 || c == '.') {
            return number();
        }
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < src_.size()
                   && (std::isalnum(static_cast<unsigned char>(src_[pos_])) != 0 || src_[pos_] == '_')) {
                ++pos_;
            }
            const auto ident = src_.substr(start, pos_ - start);
            if (ident == "sin" || ident == "cos" || ident == "exp" || ident == "sqrt" || ident == "abs") {
                expect('(');
                Expr arg = expr();
                expect(')');
                if (ident == "sin") {
                    return sin(arg);
                }
                if (ident == "cos") {
                    return cos(arg);
                }
                if (ident == "exp") {
                    return exp(arg);
                }
                if (ident == "sqrt") {
                    return sqrt(arg);
                }
                return abs(arg);
            }
            if (ident == "t") {
                return Expr::time();
            }
            if (ident[0] == 'y') {
                const int k = index_suffix(ident, start);
                if (opts_.num_states >= 0 && k >= opts_.num_states) {
                    throw ParseError("unknown identifier '" + std::string(ident) + "' (only "
                                         + std::to_string(opts_.num_states) + " states declared)",
                                     start);
                }
                return Expr::state(k);
            }
            if (ident[0] == 'p' || ident[0] == 'u') {
                const int k = index_suffix(ident, start);
                if (opts_.num_params >= 0 && k >= opts_.num_params) {
                    throw ParseError("unknown identifier '" + std::string(ident) + "' (only "
                                         + std::to_string(opts_.num_params) + " parameters declared)",
                                     start);
                }
                return Expr::param(k);
            }
            throw ParseError("unknown identifier '" + std::string(ident) + "'", start);
        }
        throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
    }

    std::string_view src_;
    ParseOptions opts_;
    std::size_t pos_ = 0;
};

} // namespace

Expr parse(std::string_view src, const ParseOptions &opts)
{
    return Parser(src, opts).run();
}

std::string exact_decimal(double v)
{
    if (!std::isfinite(v)) {
        throw std::invalid_argument("exact_decimal: value must be finite");
    }
    char buf[1100];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    std::string out(buf, res.ptr);
    if (parse_decimal(out).is_thin()) {
        return out;
    }
    // Every double has a finite decimal expansion; widen until it is exact.
    for (int prec = 17; prec <= 800; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        out = buf;
        if (parse_decimal(out).is_thin()) {
            return out;
        }
    }
    throw std::logic_error("exact_decimal: no exact expansion found");
}

} // namespace dynopt
