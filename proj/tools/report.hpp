#ifndef DYNOPT_TOOLS_REPORT_HPP
#define DYNOPT_TOOLS_REPORT_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <dynopt/bnb.hpp>

namespace dynopt::report
{

enum class Format { json, csv, table };

std::optional<Format> parse_format(const std::string &s);

struct Run {
    std::string problem;
    SolverConfig cfg;
    Solution sol;
    double wall_time = 0.0;
};

struct BenchRow {
    double epsilon = 0.0;
    std::vector<Run> runs;
};

// Relative branch saving of smear over largest first, when both ran.
std::optional<double> gain(const BenchRow &row);

// Shortest decimal that reads back as exactly v.
std::string number(double v);
// Bounds rounded outward to `digits` significant digits, for display.
std::string display_interval(const Interval &x, int digits = 7);

nlohmann::ordered_json interval_json(const Interval &x);
nlohmann::ordered_json box_json(const Box &b);
nlohmann::ordered_json config_json(const SolverConfig &cfg);
nlohmann::ordered_json run_json(const Run &run);
nlohmann::ordered_json bench_json(const std::string &problem, const std::vector<BenchRow> &rows);
nlohmann::ordered_json event_json(const Event &e);

void write_run(std::ostream &os, const Run &run, Format fmt);
void write_bench(std::ostream &os, const std::string &problem, const std::vector<BenchRow> &rows, Format fmt);

} // namespace dynopt::report

#endif
