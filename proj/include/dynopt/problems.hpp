#ifndef DYNOPT_PROBLEMS_HPP
#define DYNOPT_PROBLEMS_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <dynopt/bnb.hpp>

namespace dynopt
{

// One row of a published results table.
struct TableRow {
    double epsilon;
    Box psol;
    double cost;
    long branches_lf;
    long branches_smear;
};

struct Reference {
    std::vector<double> optimizer;
    std::optional<double> optimum;
    // Published solver output, when there is one.
    std::optional<Box> reported_psol;
    std::optional<double> reported_upper;
    std::optional<long> reported_branches;
    std::vector<TableRow> table;
};

struct CatalogEntry {
    std::string name;
    std::string description;
    // Problem-file text the problem was built from.
    std::string source;
    Problem problem;
    Reference ref;
    // Settings the entry is meant to be solved with.
    SolverConfig defaults;
    bool synthetic = false;
};

const std::vector<CatalogEntry> &catalog();
// nullptr when unknown.
const CatalogEntry *find_problem(std::string_view name);

} // namespace dynopt

#endif
