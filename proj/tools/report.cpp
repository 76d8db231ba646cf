#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "report.hpp"

namespace dynopt::report
{

using nlohmann::ordered_json;

std::optional<Format> parse_format(const std::string &s)
{
    if (s == "json") {
        return Format::json;
    }
    if (s == "csv") {
        return Format::csv;
    }
    if (s == "table") {
        return Format::table;
    }
    return std::nullopt;
}

std::optional<double> gain(const BenchRow &row)
{
    std::optional<long> lf, smear;
    for (const auto &r : row.runs) {
        if (r.cfg.heuristic == Heuristic::largest_first) {
            lf = r.sol.branch_count;
        } else if (r.cfg.heuristic == Heuristic::smear) {
            smear = r.sol.branch_count;
        }
    }
    if (!lf || !smear || *lf == 0) {
        return std::nullopt;
    }
    return static_cast<double>(*lf - *smear) / static_cast<double>(*lf);
}

std::string number(double v)
{
    if (v == 0.0) {
        v = 0.0;
    }
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace
{

// v rounded to `digits` significant digits towards -inf (down) or +inf.
std::string directed(double v, int digits, bool down)
{
    if (!std::isfinite(v) || v == 0.0) {
        return number(v);
    }
    const int k = static_cast<int>(std::floor(std::log10(std::fabs(v)))) - digits + 1;
    if (k < -22 || k > 22) {
        return number(v); // powers of ten beyond 1e22 are inexact
    }
    const double scale = std::pow(10.0, std::abs(k));
    // v / 10^k = y + r exactly, with r carrying the rounding error of y.
    double y = 0.0;
    double r = 0.0;
    if (k < 0) {
        y = v * scale;
        r = std::fma(v, scale, -y);
    } else {
        y = v / scale;
        r = std::fma(-y, scale, v);
    }
    double q = down ? std::floor(y) : std::ceil(y);
    if (q == y) {
        if (down && r < 0.0) {
            q -= 1.0;
        } else if (!down && r > 0.0) {
            q += 1.0;
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*Lg", digits + 1, static_cast<long double>(q) * std::pow(10.0L, k));
    return buf;
}

ordered_json num_json(double v)
{
    if (std::isfinite(v)) {
        return v + 0.0; // no negative zero
    }
    return number(v);
}

std::string box_display(const Box &b, int digits = 7)
{
    std::string s;
    for (std::size_t i = 0; i < b.size(); ++i) {
        s += (i ? " x " : "") + display_interval(b[i], digits);
    }
    return s.empty() ? "-" : s;
}

std::string percent(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.1f%%", 100.0 * x);
    return buf;
}

// Left-aligned text table.
void write_table(std::ostream &os, const std::vector<std::vector<std::string>> &cells)
{
    std::vector<std::size_t> w;
    for (const auto &row : cells) {
        w.resize(std::max(w.size(), row.size()), 0);
        for (std::size_t i = 0; i < row.size(); ++i) {
            w[i] = std::max(w[i], row[i].size());
        }
    }
    for (std::size_t r = 0; r < cells.size(); ++r) {
        std::string line;
        for (std::size_t i = 0; i < cells[r].size(); ++i) {
            line += cells[r][i];
            if (i + 1 < cells[r].size()) {
                line += std::string(w[i] - cells[r][i].size() + 2, ' ');
            }
        }
        os << line << '\n';
        if (r == 0) {
            std::size_t total = 0;
            for (std::size_t i = 0; i < w.size(); ++i) {
                total += w[i] + (i + 1 < w.size() ? 2 : 0);
            }
            os << std::string(total, '-') << '\n';
        }
    }
}

std::string csv_escape(const std::string &s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c == '"' ? "\"\"" : std::string(1, c);
    }
    return out + "\"";
}

} // namespace

std::string display_interval(const Interval &x, int digits)
{
    if (x.is_empty()) {
        return "empty";
    }
    return "[" + directed(x.lo(), digits, true) + ", " + directed(x.hi(), digits, false) + "]";
}

ordered_json interval_json(const Interval &x)
{
    if (x.is_empty()) {
        return nullptr;
    }
    return ordered_json::array({num_json(x.lo()), num_json(x.hi())});
}

ordered_json box_json(const Box &b)
{
    ordered_json out = ordered_json::array();
    for (const auto &x : b) {
        out.push_back(interval_json(x));
    }
    return out;
}

ordered_json config_json(const SolverConfig &cfg)
{
    ordered_json j;
    j["heuristic"] = to_string(cfg.heuristic);
    j["epsilon"] = cfg.epsilon;
    j["order"] = cfg.integrator.order;
    j["step"] = cfg.integrator.h0 > 0.0 ? ordered_json(cfg.integrator.h0) : ordered_json("auto");
    j["centered"] = cfg.integrator.centered;
    j["quad_subdiv"] = cfg.quad_subdiv;
    j["max_branches"] = cfg.max_branches;
    j["feas_tol"] = cfg.feas_tol;
    j["smear_mode"] = to_string(cfg.smear_mode);
    j["on_failure"] = cfg.on_failure == FailurePolicy::abort ? "abort" : "keep";
    j["batch"] = cfg.batch;
    return j;
}

ordered_json run_json(const Run &run)
{
    const Solution &s = run.sol;
    ordered_json j;
    j["problem"] = run.problem;
    j["status"] = to_string(s.status);
    j["config"] = config_json(run.cfg);
    j["psol"] = s.boxes.empty() ? ordered_json(nullptr) : box_json(s.psol);
    j["csol"] = interval_json(s.csol);
    j["incumbent"] = num_json(s.incumbent);
    j["branches"] = s.branch_count;
    j["nodes"] = {{"created", s.stats.created},
                  {"processed", s.stats.processed},
                  {"infeasible", s.stats.infeasible},
                  {"purged", s.stats.purged},
                  {"leaves", s.stats.leaves},
                  {"discarded_leaves", s.stats.discarded_leaves},
                  {"integration_failures", s.stats.integration_failures},
                  {"max_queue", s.stats.max_queue}};
    j["solution_boxes"] = s.boxes.size();
    j["wall_time_s"] = run.wall_time;
    return j;
}

ordered_json bench_json(const std::string &problem, const std::vector<BenchRow> &rows)
{
    ordered_json j;
    j["problem"] = problem;
    ordered_json arr = ordered_json::array();
    for (const auto &row : rows) {
        ordered_json r;
        r["epsilon"] = row.epsilon;
        ordered_json runs = ordered_json::array();
        for (const auto &run : row.runs) {
            ordered_json x = run_json(run);
            x.erase("problem");
            runs.push_back(std::move(x));
        }
        r["runs"] = std::move(runs);
        if (const auto g = gain(row)) {
            r["gain"] = *g;
        }
        arr.push_back(std::move(r));
    }
    j["rows"] = std::move(arr);
    return j;
}

ordered_json event_json(const Event &e)
{
    ordered_json j;
    j["event"] = to_string(e.kind);
    j["node"] = e.node;
    j["depth"] = e.depth;
    switch (e.kind) {
        case EventKind::pop:
        case EventKind::leaf:
            j["lower_bound"] = num_json(e.value);
            break;
        case EventKind::incumbent:
            j["incumbent"] = num_json(e.value);
            break;
        case EventKind::purge:
            j["removed"] = static_cast<long>(e.value);
            break;
        case EventKind::bisect:
            j["dimension"] = e.dimension;
            if (!e.sigma.empty()) {
                ordered_json sig = ordered_json::array();
                for (double s : e.sigma) {
                    sig.push_back(num_json(s));
                }
                j["sigma"] = std::move(sig);
            }
            break;
        default:
            break;
    }
    return j;
}

void write_run(std::ostream &os, const Run &run, Format fmt)
{
    const Solution &s = run.sol;
    switch (fmt) {
        case Format::json:
            os << run_json(run).dump(2) << '\n';
            return;
        case Format::csv: {
            os << "problem,heuristic,epsilon,status,branches,nodes,cost_lo,cost_hi,incumbent";
            for (std::size_t i = 0; i < s.psol.size(); ++i) {
                os << ",p" << i + 1 << "_lo,p" << i + 1 << "_hi";
            }
            os << ",wall_time_s\n";
            os << csv_escape(run.problem) << ',' << to_string(run.cfg.heuristic) << ',' << number(run.cfg.epsilon)
               << ',' << to_string(s.status) << ',' << s.branch_count << ',' << s.stats.created << ','
               << (s.csol.is_empty() ? "" : number(s.csol.lo())) << ','
               << (s.csol.is_empty() ? "" : number(s.csol.hi())) << ',' << number(s.incumbent);
            for (const auto &x : s.psol) {
                os << ',' << number(x.lo()) << ',' << number(x.hi());
            }
            os << ',' << number(run.wall_time) << '\n';
            return;
        }
        case Format::table: {
            std::vector<std::vector<std::string>> cells{{"field", "value"}};
            cells.push_back({"problem", run.problem});
            cells.push_back({"status", to_string(s.status)});
            cells.push_back({"heuristic", to_string(run.cfg.heuristic)});
            cells.push_back({"epsilon", number(run.cfg.epsilon)});
            cells.push_back({"solution box", s.boxes.empty() ? "-" : box_display(s.psol)});
            cells.push_back({"cost", display_interval(s.csol)});
            cells.push_back({"incumbent", number(s.incumbent)});
            cells.push_back({"branches", std::to_string(s.branch_count)});
            cells.push_back({"nodes", std::to_string(s.stats.created)});
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3f", run.wall_time);
            cells.push_back({"wall time (s)", buf});
            write_table(os, cells);
            return;
        }
    }
}

void write_bench(std::ostream &os, const std::string &problem, const std::vector<BenchRow> &rows, Format fmt)
{
    bool any_gain = false;
    std::vector<Heuristic> heuristics;
    for (const auto &row : rows) {
        any_gain = any_gain || gain(row).has_value();
        for (const auto &r : row.runs) {
            if (std::find(heuristics.begin(), heuristics.end(), r.cfg.heuristic) == heuristics.end()) {
                heuristics.push_back(r.cfg.heuristic);
            }
        }
    }
    auto branches_of = [](const BenchRow &row, Heuristic h) -> std::string {
        for (const auto &r : row.runs) {
            if (r.cfg.heuristic == h) {
                return std::to_string(r.sol.branch_count);
            }
        }
        return "";
    };
    switch (fmt) {
        case Format::json:
            os << bench_json(problem, rows).dump(2) << '\n';
            return;
        case Format::csv:
            os << "problem,epsilon,heuristic,status,branches,nodes,cost_lo,cost_hi,incumbent,gain,wall_time_s\n";
            for (const auto &row : rows) {
                const auto g = gain(row);
                for (const auto &r : row.runs) {
                    os << csv_escape(problem) << ',' << number(row.epsilon) << ',' << to_string(r.cfg.heuristic) << ','
                       << to_string(r.sol.status) << ',' << r.sol.branch_count << ',' << r.sol.stats.created << ','
                       << (r.sol.csol.is_empty() ? "" : number(r.sol.csol.lo())) << ','
                       << (r.sol.csol.is_empty() ? "" : number(r.sol.csol.hi())) << ',' << number(r.sol.incumbent)
                       << ',' << (g ? number(*g) : "") << ',' << number(r.wall_time) << '\n';
                }
            }
            return;
        case Format::table: {
            std::vector<std::string> head{"precision", "solution box", "cost"};
            for (Heuristic h : heuristics) {
                head.push_back(std::string("branches ") + to_string(h));
            }
            if (any_gain) {
                head.emplace_back("gain");
            }
            std::vector<std::vector<std::string>> cells{head};
            for (const auto &row : rows) {
                // Solution box and cost of the first run; the heuristics only
                // change how the same region is explored.
                const Run &first = row.runs.front();
                std::vector<std::string> line{number(row.epsilon),
                                              first.sol.boxes.empty() ? "-" : box_display(first.sol.psol, 4),
                                              display_interval(first.sol.csol, 6)};
                for (Heuristic h : heuristics) {
                    line.push_back(branches_of(row, h));
                }
                if (any_gain) {
                    const auto g = gain(row);
                    line.push_back(g ? percent(*g) : "");
                }
                cells.push_back(std::move(line));
            }
            write_table(os, cells);
            return;
        }
    }
}

} // namespace dynopt::report
