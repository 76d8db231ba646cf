#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include <dynopt/parser.hpp>
#include <dynopt/problem_file.hpp>

namespace dynopt
{

namespace
{

struct Entry {
    std::string key;
    std::string value;
    std::size_t line;
    std::size_t key_col;   // 1-based
    std::size_t value_col; // 1-based
};

const std::set<std::string> sections{"problem", "rhs", "initial", "params", "cost", "constraints"};

std::size_t skip_space(std::string_view s, std::size_t i)
{
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) {
        ++i;
    }
    return i;
}

std::string_view rtrim(std::string_view s)
{
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

Expr parse_at(std::string_view src, const ParseOptions &opts, std::size_t line, std::size_t col)
{
    try {
        return parse(src, opts);
    } catch (const ParseError &e) {
        std::string msg = e.what();
        msg = msg.substr(0, msg.rfind(" at column "));
        throw ProblemFileError(msg, line, col + e.position());
    }
}

Interval constant_at(std::string_view src, std::size_t line, std::size_t col)
{
    const Expr e = parse_at(src, ParseOptions{0, 0}, line, col);
    if (depends_on(e, Var::time())) {
        throw ProblemFileError("expected a constant expression", line, col);
    }
    const Interval v = eval_interval(e, Interval(0.0), {}, {});
    if (v.is_empty() || !v.is_bounded()) {
        throw ProblemFileError("constant expression has no finite value", line, col);
    }
    return v;
}

Interval value_at(std::string_view src, std::size_t line, std::size_t col)
{
    if (src.empty()) {
        throw ProblemFileError("missing value", line, col);
    }
    if (src.front() != '[') {
        return constant_at(src, line, col);
    }
    if (src.back() != ']') {
        throw ProblemFileError("unterminated interval, expected ']'", line, col + src.size());
    }
    const auto comma = src.find(',');
    if (comma == std::string_view::npos) {
        throw ProblemFileError("interval needs two bounds separated by ','", line, col + 1);
    }
    const auto lo_text = src.substr(1, comma - 1);
    const auto hi_text = src.substr(comma + 1, src.size() - comma - 2);
    const std::size_t lo_skip = skip_space(lo_text, 0);
    const std::size_t hi_skip = skip_space(hi_text, 0);
    const Interval lo = constant_at(rtrim(lo_text.substr(lo_skip)), line, col + 1 + lo_skip);
    const Interval hi = constant_at(rtrim(hi_text.substr(hi_skip)), line, col + comma + 1 + hi_skip);
    if (lo.lo() > hi.hi()) {
        throw ProblemFileError("interval lower bound exceeds upper bound", line, col);
    }
    return Interval(lo.lo(), hi.hi());
}

// y<k> or p<k>/u<k>, 1-based, within [1, limit].
int indexed_key(const Entry &e, std::string_view prefixes, int limit, std::string_view suffix = {})
{
    std::string_view key = e.key;
    if (!suffix.empty()) {
        if (key.size() <= suffix.size() || key.substr(key.size() - suffix.size()) != suffix) {
            throw ProblemFileError("expected '" + std::string(1, prefixes[0]) + "<k>" + std::string(suffix) + "'",
                                   e.line, e.key_col);
        }
        key.remove_suffix(suffix.size());
    }
    if (key.size() < 2 || prefixes.find(key[0]) == std::string_view::npos) {
        throw ProblemFileError("unexpected key '" + e.key + "'", e.line, e.key_col);
    }
    int k = 0;
    for (std::size_t i = 1; i < key.size(); ++i) {
        if (key[i] < '0' || key[i] > '9' || k > 100000) {
            throw ProblemFileError("unexpected key '" + e.key + "'", e.line, e.key_col);
        }
        k = k * 10 + (key[i] - '0');
    }
    if (k < 1 || k > limit) {
        throw ProblemFileError("index out of range in '" + e.key + "'", e.line, e.key_col + 1);
    }
    return k - 1;
}

long integer_value(const Entry &e)
{
    const Interval v = constant_at(e.value, e.line, e.value_col);
    if (!v.is_thin() || v.lo() != static_cast<double>(static_cast<long>(v.lo())) || v.lo() < 0) {
        throw ProblemFileError("expected a non-negative integer", e.line, e.value_col);
    }
    return static_cast<long>(v.lo());
}

double real_value(const Entry &e)
{
    const Interval v = constant_at(e.value, e.line, e.value_col);
    if (!v.is_thin()) {
        throw ProblemFileError("time bounds must be exactly representable", e.line, e.value_col);
    }
    return v.lo();
}

std::string format_value(const Interval &x)
{
    if (x.is_thin()) {
        return exact_decimal(x.lo());
    }
    return "[" + exact_decimal(x.lo()) + ", " + exact_decimal(x.hi()) + "]";
}

} // namespace

Problem parse_problem(std::string_view text)
{
    std::map<std::string, std::vector<Entry>> by_section;
    std::string current;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(start, end - start);
        ++line_no;
        start = end + 1;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = rtrim(line);
        const std::size_t i = skip_space(line, 0);
        if (i == line.size()) {
            continue;
        }
        if (line[i] == '[') {
            if (line.back() != ']') {
                throw ProblemFileError("expected ']' after section name", line_no, line.size() + 1);
            }
            const auto inner = line.substr(i + 1, line.size() - i - 2);
            const std::size_t a = skip_space(inner, 0);
            current = std::string(rtrim(inner.substr(a)));
            if (sections.count(current) == 0) {
                throw ProblemFileError("unknown section '" + current + "'", line_no, i + 2 + a);
            }
            if (by_section.count(current) != 0) {
                throw ProblemFileError("duplicate section '" + current + "'", line_no, i + 2 + a);
            }
            by_section[current];
            continue;
        }
        if (current.empty()) {
            throw ProblemFileError("entry outside of any section", line_no, i + 1);
        }
        const auto eq = line.find('=', i);
        if (eq == std::string_view::npos) {
            throw ProblemFileError("expected 'key = value'", line_no, line.size() + 1);
        }
        const auto key = rtrim(line.substr(i, eq - i));
        if (key.empty()) {
            throw ProblemFileError("missing key before '='", line_no, eq + 1);
        }
        const std::size_t v = skip_space(line, eq + 1);
        by_section[current].push_back(Entry{std::string(key), std::string(line.substr(v)), line_no, i + 1, v + 1});
    }

    Problem prob;
    prob.name = "problem";
    bool have_n = false, have_m = false;
    std::set<std::string> seen;
    for (const auto &e : by_section["problem"]) {
        if (!seen.insert(e.key).second) {
            throw ProblemFileError("duplicate key '" + e.key + "'", e.line, e.key_col);
        }
        if (e.key == "name") {
            if (e.value.empty()) {
                throw ProblemFileError("empty name", e.line, e.value_col);
            }
            prob.name = e.value;
        } else if (e.key == "states") {
            const long n = integer_value(e);
            if (n < 1 || n > 10000) {
                throw ProblemFileError("states must be in [1, 10000]", e.line, e.value_col);
            }
            prob.sys.n = static_cast<int>(n);
            have_n = true;
        } else if (e.key == "params") {
            const long m = integer_value(e);
            if (m > 10000) {
                throw ProblemFileError("params must be in [0, 10000]", e.line, e.value_col);
            }
            prob.sys.m = static_cast<int>(m);
            have_m = true;
        } else if (e.key == "t0") {
            prob.sys.t0 = real_value(e);
        } else if (e.key == "tf") {
            prob.sys.tf = real_value(e);
        } else {
            throw ProblemFileError("unknown key '" + e.key + "' in [problem]", e.line, e.key_col);
        }
    }
    if (!have_n || !have_m) {
        throw ProblemFileError("[problem] must declare states and params", 0, 0);
    }
    const int n = prob.sys.n;
    const int m = prob.sys.m;
    const ParseOptions opts{n, m};

    std::vector<std::optional<Expr>> rhs(static_cast<std::size_t>(n));
    for (const auto &e : by_section["rhs"]) {
        const int k = indexed_key(e, "y", n, "'");
        if (rhs[static_cast<std::size_t>(k)]) {
            throw ProblemFileError("duplicate right-hand side for '" + e.key + "'", e.line, e.key_col);
        }
        rhs[static_cast<std::size_t>(k)] = parse_at(e.value, opts, e.line, e.value_col);
    }
    std::vector<std::optional<Interval>> y0(static_cast<std::size_t>(n));
    for (const auto &e : by_section["initial"]) {
        const int k = indexed_key(e, "y", n);
        if (y0[static_cast<std::size_t>(k)]) {
            throw ProblemFileError("duplicate initial value for '" + e.key + "'", e.line, e.key_col);
        }
        y0[static_cast<std::size_t>(k)] = value_at(e.value, e.line, e.value_col);
    }
    for (int k = 0; k < n; ++k) {
        if (!rhs[static_cast<std::size_t>(k)]) {
            throw ProblemFileError("missing right-hand side for y" + std::to_string(k + 1), 0, 0);
        }
        if (!y0[static_cast<std::size_t>(k)]) {
            throw ProblemFileError("missing initial value for y" + std::to_string(k + 1), 0, 0);
        }
        prob.sys.rhs.push_back(*rhs[static_cast<std::size_t>(k)]);
        prob.sys.y0.push_back(*y0[static_cast<std::size_t>(k)]);
    }

    std::vector<std::optional<Interval>> pbox(static_cast<std::size_t>(m));
    for (const auto &e : by_section["params"]) {
        const int k = indexed_key(e, "pu", m);
        if (pbox[static_cast<std::size_t>(k)]) {
            throw ProblemFileError("duplicate bounds for '" + e.key + "'", e.line, e.key_col);
        }
        pbox[static_cast<std::size_t>(k)] = value_at(e.value, e.line, e.value_col);
    }
    for (int k = 0; k < m; ++k) {
        if (!pbox[static_cast<std::size_t>(k)]) {
            throw ProblemFileError("missing bounds for p" + std::to_string(k + 1), 0, 0);
        }
        prob.pbox.push_back(*pbox[static_cast<std::size_t>(k)]);
    }

    for (const auto &e : by_section["cost"]) {
        auto &slot = e.key == "phi" ? prob.cost.phi : prob.cost.g;
        if (e.key != "phi" && e.key != "g") {
            throw ProblemFileError("unknown cost part '" + e.key + "' (expected phi or g)", e.line, e.key_col);
        }
        if (slot) {
            throw ProblemFileError("duplicate cost part '" + e.key + "'", e.line, e.key_col);
        }
        slot = parse_at(e.value, opts, e.line, e.value_col);
        if (e.key == "phi" && depends_on(*slot, Var::time())) {
            throw ProblemFileError("terminal cost may not depend on t", e.line, e.value_col);
        }
    }
    if (!prob.cost.phi && !prob.cost.g) {
        throw ProblemFileError("[cost] must define phi, g, or both", 0, 0);
    }

    for (const auto &e : by_section["constraints"]) {
        const Expr c = parse_at(e.key, opts, e.line, e.key_col);
        if (depends_on(c, Var::time())) {
            throw ProblemFileError("endpoint constraint may not depend on t", e.line, e.key_col);
        }
        prob.constraints.push_back(EndpointConstraint{c, value_at(e.value, e.line, e.value_col)});
    }

    try {
        prob.validate();
    } catch (const std::invalid_argument &ex) {
        throw ProblemFileError(ex.what(), 0, 0);
    }
    return prob;
}

Problem load_problem(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open problem file '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_problem(ss.str());
}

std::string format_problem(const Problem &prob)
{
    std::ostringstream os;
    os << "[problem]\n";
    os << "name = " << prob.name << '\n';
    os << "states = " << prob.sys.n << '\n';
    os << "params = " << prob.sys.m << '\n';
    os << "t0 = " << exact_decimal(prob.sys.t0) << '\n';
    os << "tf = " << exact_decimal(prob.sys.tf) << '\n';
    os << "\n[rhs]\n";
    for (std::size_t k = 0; k < prob.sys.rhs.size(); ++k) {
        os << 'y' << k + 1 << "' = " << to_string(prob.sys.rhs[k]) << '\n';
    }
    os << "\n[initial]\n";
    for (std::size_t k = 0; k < prob.sys.y0.size(); ++k) {
        os << 'y' << k + 1 << " = " << format_value(prob.sys.y0[k]) << '\n';
    }
    os << "\n[params]\n";
    for (std::size_t k = 0; k < prob.pbox.size(); ++k) {
        os << 'p' << k + 1 << " = " << format_value(prob.pbox[k]) << '\n';
    }
    os << "\n[cost]\n";
    if (prob.cost.phi) {
        os << "phi = " << to_string(*prob.cost.phi) << '\n';
    }
    if (prob.cost.g) {
        os << "g = " << to_string(*prob.cost.g) << '\n';
    }
    if (!prob.constraints.empty()) {
        os << "\n[constraints]\n";
        for (const auto &c : prob.constraints) {
            os << to_string(c.expr) << " = " << format_value(c.target) << '\n';
        }
    }
    return os.str();
}

} // namespace dynopt
