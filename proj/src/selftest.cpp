#include "pmetric/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "pmetric/degeneration.hpp"
#include "pmetric/graph_core.hpp"
#include "pmetric/hexagon.hpp"
#include "pmetric/pressure_metric.hpp"
#include "pmetric/thermo.hpp"

namespace pmetric {

namespace {

std::vector<MetricGraph> graphs() {
    return {
        MetricGraph(2, {{0, 1, "a", 1.0}, {0, 1, "b", 1.0}, {0, 1, "c", 1.0}}),
        MetricGraph(1, {{0, 0, "a", 1.0}, {0, 0, "b", 1.0}}),
        MetricGraph(2, {{0, 0, "a", 1.0}, {0, 1, "b", 1.0}, {1, 1, "c", 1.0}}),
        MetricGraph(4, {{0, 1, "a", 1.0}, {0, 2, "b", 1.0}, {0, 3, "c", 1.0},
                        {1, 2, "d", 1.0}, {1, 3, "e", 1.0}, {2, 3, "f", 1.0}}),
    };
}

TriangulationComplex pants() {
    std::vector<HexagonRecord> h(2);
    h[0].sides = {"b:1", "a:1", "b:2", "a:2", "b:3", "a:3"};
    h[0].marked = true;
    h[1].sides = {"b:4", "a:1", "b:5", "a:3", "b:6", "a:2"};
    return TriangulationComplex(0, 3, std::move(h));
}

class Suite {
public:
    explicit Suite(std::uint64_t seed) : rng_(seed) {}

    void add(std::string module, std::string name, double value, double bound) {
        out_.push_back({std::move(module), std::move(name), value, bound, value < bound});
    }

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

    Potential random_potential(const TransitionStructure& ts, std::size_t depth) {
        return Potential::from_function(ts, depth, [&](std::span<const std::size_t>) { return uniform(-1.0, 1.0); });
    }

    std::vector<CheckResult> results() && { return std::move(out_); }

private:
    std::mt19937_64 rng_;
    std::vector<CheckResult> out_;
};

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

void graph_checks(Suite& s) {
    double worst = 0.0;
    for (const auto& g : graphs()) {
        const auto ts = build_transition_structure(g);
        for (std::size_t n = 1; n <= 6; ++n) {
            const double predicted = predicted_periodic_points(ts, n) - predicted_periodic_points(ts, n - 1);
            worst = std::max(worst, std::abs(static_cast<double>(count_periodic_points(ts, n)) - predicted));
        }
    }
    s.add("graph_core", "periodic points match trace(A^n)", worst, 0.5);
}

void thermo_checks(Suite& s) {
    const auto all = graphs();
    const auto theta_ts = build_transition_structure(all[0]);
    s.add("thermo", "theta entropy is log 2",
          std::abs(topological_entropy(theta_ts, Potential::edge_lengths(theta_ts, {1, 1, 1})) - std::log(2.0)), 1e-10);

    double excess = -std::numeric_limits<double>::infinity(), equality = 0.0;
    double first = 0.0, second = 0.0, cob = 0.0;
    for (const auto& g : all) {
        const auto ts = build_transition_structure(g);
        const Potential f = s.random_potential(ts, 2);
        const double p = pressure(ts, f);
        const EquilibriumState eq = equilibrium_state(ts, f);
        equality = std::max(equality, std::abs(markov_entropy(eq) + integrate(f, eq) - p));
        for (int k = 0; k < 5; ++k) {
            WordShift shift = recode(ts, 1);
            const auto n = static_cast<Eigen::Index>(shift.size());
            Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
            for (Eigen::Index i = 0; i < n; ++i) {
                for (std::size_t j : shift.successors[static_cast<std::size_t>(i)])
                    q(i, static_cast<Eigen::Index>(j)) = s.uniform(0.01, 1.0);
                q.row(i) /= q.row(i).sum();
            }
            const EquilibriumState mu = markov_state(std::move(shift), q);
            excess = std::max(excess, markov_entropy(mu) + integrate(f, mu) - p);
        }

        const Potential dir = s.random_potential(ts, 2);
        const double h = 1e-4;
        const double pp = pressure(ts, f + dir * h), pm = pressure(ts, f - dir * h);
        first = std::max(first, relative((pp - pm) / (2 * h), integrate(dir, eq)));
        const double h2 = 1e-3;
        const double qp = pressure(ts, f + dir * h2), qm = pressure(ts, f - dir * h2);
        second = std::max(second, relative((qp - 2 * p + qm) / (h2 * h2), variance(dir, eq, Centering::Subtract).value));

        const Potential u = s.random_potential(ts, 2);
        cob = std::max(cob, std::abs(variance(coboundary(ts, u), equilibrium_state(ts, f, 2)).value));
    }
    s.add("thermo", "variational principle excess", excess, 1e-12);
    s.add("thermo", "equality at the equilibrium state", equality, 1e-10);
    s.add("thermo", "first derivative of pressure", first, 1e-6);
    s.add("thermo", "second derivative of pressure", second, 1e-5);
    s.add("thermo", "coboundary variance", cob, 1e-10);
}

void metric_checks(Suite& s) {
    const auto all = graphs();
    double min_eig = std::numeric_limits<double>::infinity(), asym = 0.0, coding = 0.0, tangency = 0.0;
    for (std::size_t gi : {0u, 1u, 3u}) {
        const MetricGraph& g = all[gi];
        std::vector<double> lengths;
        for (std::size_t e = 0; e < g.edge_count(); ++e) lengths.push_back(s.uniform(0.5, 2.0));
        const ModuliPoint p = normalize_to_entropy_one(g, lengths);
        const MetricTensor m = metric_tensor(p);
        min_eig = std::min(min_eig, m.min_eigenvalue);
        asym = std::max(asym, (m.gram - m.gram.transpose()).cwiseAbs().maxCoeff());
        const auto cut = spanning_tree_complement(g);
        for (const auto& v : m.basis) {
            tangency = std::max(tangency, std::abs(tangency_residual(p, v)));
            coding = std::max(coding, std::abs(metric_via_midpoint_coding(p, v, cut) - pressure_norm(p, v)));
        }
    }
    s.add("pressure_metric", "negated smallest tensor eigenvalue", -min_eig, 0.0);
    s.add("pressure_metric", "tensor asymmetry", asym, 1e-12);
    s.add("pressure_metric", "basis tangency", tangency, 1e-10);
    s.add("pressure_metric", "midpoint coding invariance", coding, 1e-8);
}

void hexagon_checks(Suite& s) {
    const double a = std::acosh(2.0);
    double self_dual = 0.0;
    for (double x : solve_hexagon(a, a, a)) self_dual = std::max(self_dual, std::abs(x - a));
    s.add("hexagon", "self-dual hexagon", self_dual, 1e-12);

    const TriangulationComplex c = pants();
    double holonomy_gap = 0.0, residual = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const SurfaceStructure ss =
            surface_from_coordinates(c, {s.uniform(0.3, 3.0), s.uniform(0.3, 3.0), s.uniform(0.3, 3.0)});
        residual = std::max(residual, ss.max_residual);
        for (std::size_t k = 0; k < c.boundary_cycles().size(); ++k) {
            double expected = 0.0;
            for (const SideRef& side : c.boundary_cycles()[k])
                if (!c.is_arc(side)) expected += ss.segment_lengths[c.side_index(side)];
            holonomy_gap = std::max(holonomy_gap, std::abs(boundary_length(ss, k) - expected));
        }
    }
    s.add("hexagon", "hexagon relations", residual, 1e-12);
    s.add("hexagon", "boundary holonomy against segment sums", holonomy_gap, 1e-9);
}

void degeneration_checks(Suite& s) {
    const DegenerationPath path(pants(), {1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0});
    double slope = 0.0;
    for (std::size_t arc = 0; arc < 3; ++arc) {
        const DecayFit fit = arc_decay_rate(path, arc, {30.0, 40.0, 50.0, 60.0});
        slope = std::max(slope, std::abs(fit.slope - fit.predicted_slope));
    }
    s.add("degeneration", "arc decay slope", slope, 1e-3);

    const auto measured = midpoint_edge_lengths(rescaled_surface_at(path, 60.0));
    const auto limit = path.limit_edge_lengths();
    double gap = 0.0;
    for (std::size_t k = 0; k < limit.size(); ++k) gap = std::max(gap, std::abs(measured[k] - limit[k]));
    s.add("degeneration", "midpoint lengths against the limit graph", gap, 1e-4);

    double rise = -std::numeric_limits<double>::infinity();
    double previous = std::numeric_limits<double>::infinity();
    for (double t : {0.2, 0.1, 0.05, 0.025}) {
        const double speed = path_speed(path, t, 2).speed;
        rise = std::max(rise, speed - previous);
        previous = speed;
    }
    s.add("degeneration", "largest speed increase along the path", rise, 0.0);
}

} // namespace

std::vector<CheckResult> run_selftest(std::uint64_t seed) {
    Suite s(seed);
    graph_checks(s);
    thermo_checks(s);
    metric_checks(s);
    hexagon_checks(s);
    degeneration_checks(s);
    return std::move(s).results();
}

} // namespace pmetric
