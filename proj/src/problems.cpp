#include <cmath>
#include <numbers>

#include <dynopt/problem_file.hpp>
#include <dynopt/problems.hpp>

namespace dynopt
{

namespace
{

constexpr const char *singular_control_src = R"([problem]
name = singular_control
states = 3
params = 1
t0 = 0
tf = 1

[rhs]
y1' = y2
y2' = -y3*u1 + 16*t - 8
y3' = u1

[initial]
y1 = 0
y2 = -1
y3 = -sqrt(5)

[params]
u1 = [-4, 10]

[cost]
g = y1^2 + y2^2 + 0.0005*(y2 + 16*t - 8 - 0.1*y3*u1^2)^2
)";

constexpr const char *polynomial_src = R"([problem]
name = polynomial
states = 2
params = 3
t0 = 0
tf = 1

[rhs]
y1' = p1*y1^2 + p2*y2 - 2*p3^2
y2' = -3*p1*y1 - p1*p2*y2 + y1*y2*p3 + 1.0

[initial]
y1 = 0
y2 = 1

[params]
p1 = [0.95, 1]
p2 = [0.95, 1]
p3 = [0.95, 1]

[cost]
phi = (y1 + y2)^2
)";

constexpr const char *endpoint_src = R"([problem]
name = endpoint
states = 2
params = 2
t0 = 0
tf = 1

[rhs]
y1' = u1*(1 - t) + u2*t
y2' = y1^2 + (u1*(1 - t) + u2*t)^2

[initial]
y1 = 1
y2 = 0

[params]
u1 = [-1, 1]
u2 = [-1, 1]

[cost]
phi = y2

[constraints]
y1 = 1
)";

// y' = p, min y(1)^2: optimum 0 at p = 0.
constexpr const char *toy_src = R"([problem]
name = toy
states = 1
params = 1

[rhs]
y1' = p1

[initial]
y1 = 0

[params]
p1 = [-1, 1]

[cost]
phi = y1^2
)";

// y = exp(-p t): min (y(1) - 1/2)^2 at p = ln 2.
constexpr const char *decay_src = R"([problem]
name = decay
states = 1
params = 1

[rhs]
y1' = -p1*y1

[initial]
y1 = 1

[params]
p1 = [0, 2]

[cost]
phi = (y1 - 0.5)^2
)";

// y = p t: integral of (p t - t)^2 is (p - 1)^2 / 3.
constexpr const char *tracking_src = R"([problem]
name = tracking
states = 1
params = 1

[rhs]
y1' = p1

[initial]
y1 = 0

[params]
p1 = [0, 2]

[cost]
g = (y1 - t)^2
)";

// y1 = p1 t, y2 = p1 p2 t^2 / 2: optimum 0 at (1, 1/2).
constexpr const char *cascade_src = R"([problem]
name = cascade
states = 2
params = 2

[rhs]
y1' = p1
y2' = p2*y1

[initial]
y1 = 0
y2 = 0

[params]
p1 = [0, 2]
p2 = [0, 2]

[cost]
phi = (y1 - 1)^2 + (y2 - 0.25)^2
)";

Box box_of(std::initializer_list<std::pair<double, double>> bounds)
{
    Box b;
    for (const auto &[lo, hi] : bounds) {
        b.push_back(Interval(lo, hi));
    }
    return b;
}

CatalogEntry make(std::string description, const char *src, Reference ref, SolverConfig defaults, bool synthetic)
{
    CatalogEntry e;
    e.problem = parse_problem(src);
    e.name = e.problem.name;
    e.description = std::move(description);
    e.source = src;
    e.ref = std::move(ref);
    e.defaults = std::move(defaults);
    e.synthetic = synthetic;
    return e;
}

std::vector<CatalogEntry> build()
{
    std::vector<CatalogEntry> out;

    {
        Reference ref;
        ref.optimizer = {4.07};
        ref.optimum = 0.497;
        ref.reported_psol = box_of({{3.9003, 4.2165}});
        ref.reported_upper = 0.5044;
        ref.reported_branches = 10376;
        SolverConfig cfg;
        cfg.epsilon = 1e-4;
        cfg.quad_subdiv = 8;
        out.push_back(make("singular control, one control parameter, integral cost", singular_control_src,
                           std::move(ref), cfg, false));
    }
    {
        Reference ref;
        ref.optimizer = {0.95, 1.0, 1.0};
        ref.optimum = 0.71875;
        ref.table = {
            {1e-2, box_of({{0.95, 1}, {0.95, 1}, {0.969, 1}}), 0.72805, 399, 357},
            {1e-3, box_of({{0.95, 0.977}, {0.992, 1}, {0.996, 1}}), 0.71991, 4331, 3154},
            {1e-4, box_of({{0.95, 0.954}, {0.998, 1}, {0.998, 1}}), 0.71889, 8999, 6460},
            {1e-5, box_of({{0.95, 0.951}, {0.999, 1}, {0.999, 1}}), 0.71875, 16864, 12154},
        };
        SolverConfig cfg;
        cfg.epsilon = 1e-3;
        out.push_back(make("polynomial dynamics, three parameters, terminal cost", polynomial_src, std::move(ref),
                           cfg, false));
    }
    {
        Reference ref;
        ref.optimizer = {-0.4545, 0.4545};
        ref.optimum = 0.924242;
        ref.reported_psol = box_of({{-0.462448, -0.446724}, {0.446716, 0.46244}});
        ref.reported_upper = 0.924249;
        ref.table = {
            {1e-3, box_of({{-0.511, -0.399}, {0.398, 0.510}}), 0.924249, 1243, 1250},
            {1e-4, box_of({{-0.469, -0.439}, {0.439, 0.469}}), 0.924249, 5362, 5369},
            {1e-5, box_of({{-0.462, -0.446}, {0.446, 0.462}}), 0.924249, 19283, 19290},
        };
        SolverConfig cfg;
        cfg.epsilon = 1e-3;
        out.push_back(make("linear control with an end-point equality constraint", endpoint_src, std::move(ref), cfg,
                           false));
    }

    SolverConfig small;
    small.epsilon = 1e-3;
    out.push_back(make("y' = p, minimize y(1)^2", toy_src, Reference{{0.0}, 0.0, {}, {}, {}, {}}, small, true));
    out.push_back(make("exponential decay hitting 1/2 at t = 1", decay_src,
                       Reference{{std::numbers::ln2}, 0.0, {}, {}, {}, {}}, small, true));
    out.push_back(make("ramp tracking with an integral cost", tracking_src, Reference{{1.0}, 0.0, {}, {}, {}, {}},
                       small, true));
    out.push_back(make("two-parameter cascade with a terminal target", cascade_src,
                       Reference{{1.0, 0.5}, 0.0, {}, {}, {}, {}}, small, true));
    return out;
}

} // namespace

const std::vector<CatalogEntry> &catalog()
{
    static const std::vector<CatalogEntry> entries = build();
    return entries;
}

const CatalogEntry *find_problem(std::string_view name)
{
    if (name == "endpoint_control") {
        name = "endpoint";
    }
    for (const auto &e : catalog()) {
        if (e.name == name) {
            return &e;
        }
    }
    return nullptr;
}

} // namespace dynopt
