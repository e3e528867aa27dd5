#include "pmetric/degeneration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "pmetric/error.hpp"

namespace pmetric {

namespace {

std::size_t at(std::size_t position, std::size_t shift) { return (position + shift) % 6; }

// Least squares y = slope * x + intercept.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

// Side of hexagon entered by a crossing symbol of the dual shift, and the
// side it leaves through.
SideRef entry_side(const TriangulationComplex& c, std::size_t symbol) { return c.arc_sides(symbol / 2)[1 - symbol % 2]; }
SideRef exit_side(const TriangulationComplex& c, std::size_t symbol) { return c.arc_sides(symbol / 2)[symbol % 2]; }

// Distance between the midpoints of the first and last crossing of a chain.
double chain_length(const SurfaceStructure& ss, std::span<const std::size_t> chain) {
    if (chain.size() < 2) return 0.0;
    const Mat2 turn = rotation(std::numbers::pi);
    Mat2 product = Mat2::Identity();
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
        const SideRef in = entry_side(ss.complex, chain[k]);
        const SideRef out = exit_side(ss.complex, chain[k + 1]);
        if (in.hexagon != out.hexagon) throw DomainError("crossing sequence is not a walk in the dual graph");
        product = product * midpoint_route(ss.sides[in.hexagon], in.position, out.position) * turn;
    }
    return displacement(product);
}

void require_t(double t) {
    if (!(t > 0.0) || !(t <= 1.0)) throw DomainError("t must lie in (0, 1]");
}

} // namespace

ConeReport cone_check(const TriangulationComplex& complex, const std::vector<double>& b) {
    const auto marked_segments = complex.marked_segments();
    if (b.size() != marked_segments.size())
        throw InvalidInput("expected " + std::to_string(marked_segments.size()) + " base coordinates, got " +
                           std::to_string(b.size()));
    std::vector<double> by_segment(complex.segments().size(), 0.0);
    for (std::size_t k = 0; k < b.size(); ++k) by_segment[marked_segments[k]] = b[k];
    ConeReport out;
    out.margin = std::numeric_limits<double>::infinity();
    for (std::size_t h : complex.marked_hexagons()) {
        std::vector<double> sides;
        for (std::size_t q = 0; q < 6; ++q)
            if (!complex.is_arc({h, q})) sides.push_back(by_segment[complex.side_index({h, q})]);
        const double m = std::min({sides[0] + sides[1] - sides[2], sides[1] + sides[2] - sides[0],
                                   sides[2] + sides[0] - sides[1]});
        out.margins.push_back(m);
        out.margin = std::min(out.margin, m);
    }
    out.inside = out.margin > 0.0;
    return out;
}

DegenerationPath::DegenerationPath(TriangulationComplex complex, std::vector<double> b)
    : complex_(std::move(complex)), b_(std::move(b)), cone_(cone_check(complex_, b_)),
      dual_ts_(build_transition_structure(complex_.dual_graph())) {
    if (!complex_.has_valid_marking()) throw InvalidInput("triangulation has no valid marking of hexagons");
    const double sum = std::accumulate(b_.begin(), b_.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "base coordinates must sum to 1 (sum " << sum << ")";
        throw DomainError(msg.str());
    }
    if (!cone_.inside) {
        std::ostringstream msg;
        msg << "base point lies outside the cone (margin " << cone_.margin << ")";
        throw DomainError(msg.str());
    }
    const auto marked_segments = complex_.marked_segments();
    std::vector<double> by_segment(complex_.segments().size(), 0.0);
    for (std::size_t k = 0; k < b_.size(); ++k) by_segment[marked_segments[k]] = b_[k];
    legs_.assign(complex_.arcs().size(), 0.0);
    for (std::size_t h : complex_.marked_hexagons()) {
        for (std::size_t q = 0; q < 6; ++q) {
            if (!complex_.is_arc({h, q})) continue;
            const auto seg = [&](std::size_t shift) { return by_segment[complex_.side_index({h, at(q, shift)})]; };
            legs_[complex_.side_index({h, q})] = 0.5 * (seg(1) + seg(5) - seg(3));
        }
    }
}

std::vector<double> DegenerationPath::segment_limits() const {
    std::vector<double> out(complex_.segments().size(), 0.0);
    const auto marked_segments = complex_.marked_segments();
    for (std::size_t k = 0; k < b_.size(); ++k) out[marked_segments[k]] = b_[k];
    for (std::size_t k : complex_.complementary_segments()) {
        const SideRef side = complex_.segment_side(k);
        out[k] = legs_[complex_.side_index({side.hexagon, at(side.position, 1)})] +
                 legs_[complex_.side_index({side.hexagon, at(side.position, 5)})];
    }
    return out;
}

std::vector<double> DegenerationPath::limit_edge_lengths() const {
    std::vector<double> out = legs_;
    for (double& x : out) x *= 2.0;
    return out;
}

MetricGraph DegenerationPath::limit_graph() const { return complex_.dual_graph().with_lengths(limit_edge_lengths()); }

PathSample rescaled_surface_at(const DegenerationPath& path, double lambda) {
    if (!(lambda >= 1.0)) throw DomainError("lambda must be at least 1");
    std::vector<double> coords = path.base();
    for (double& x : coords) x *= lambda;
    PathSample out{1.0 / lambda, lambda, surface_from_coordinates(path.complex(), coords), {}, {}};
    out.rescaled_ortholengths = out.surface.ortholengths;
    for (double& x : out.rescaled_ortholengths) x *= out.t;
    out.rescaled_segments = out.surface.segment_lengths;
    for (double& x : out.rescaled_segments) x *= out.t;
    return out;
}

DecayFit arc_decay_rate(const DegenerationPath& path, std::size_t arc, const std::vector<double>& lambda_grid) {
    if (lambda_grid.size() < 3) throw DomainError("decay fit needs at least three values of lambda");
    if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end()) ||
        std::adjacent_find(lambda_grid.begin(), lambda_grid.end()) != lambda_grid.end())
        throw DomainError("lambda grid must be increasing");
    if (arc >= path.complex().arcs().size()) throw InvalidInput("arc index out of range");
    std::vector<double> logs;
    for (double lambda : lambda_grid) {
        // the ortholength itself comes out of the log-domain cosine rule
        logs.push_back(std::log(rescaled_surface_at(path, lambda).surface.ortholengths[arc]));
    }
    const auto [slope, intercept] = linear_fit(lambda_grid, logs);
    return {slope, intercept, path.predicted_decay_slope(arc)};
}

ExponentialFit fit_exponential_decay(const std::vector<double>& x, const std::vector<double>& err) {
    if (x.size() != err.size() || x.size() < 2) throw DomainError("exponential fit needs matching samples");
    std::vector<double> logs;
    for (double e : err) {
        if (!(e > 0.0)) throw DomainError("exponential fit needs positive errors");
        logs.push_back(std::log(e));
    }
    const auto [slope, intercept] = linear_fit(x, logs);
    return {std::exp(intercept), -slope};
}

ModuliPoint limit_graph_metric(const DegenerationPath& path) { return normalize_to_entropy_one(path.limit_graph()); }

std::vector<double> midpoint_edge_lengths(const PathSample& sample) {
    const TriangulationComplex& c = sample.surface.complex;
    std::vector<double> out(c.arcs().size(), 0.0);
    for (std::size_t h = 0; h < c.hexagons().size(); ++h) {
        const auto& sides = sample.surface.sides[h];
        for (std::size_t q = 0; q < 6; ++q) {
            if (!c.is_arc({h, q})) continue;
            const auto dist = [&](std::size_t from, std::size_t to) {
                return sample.t * displacement(midpoint_route(sides, from, to));
            };
            const double leg = 0.5 * (dist(q, at(q, 2)) + dist(q, at(q, 4)) - dist(at(q, 2), at(q, 4)));
            out[c.side_index({h, q})] += leg;
        }
    }
    return out;
}

Potential surface_potential_approx(const DegenerationPath& path, const PathSample& sample, std::size_t depth) {
    if (depth < 1) throw DomainError("surface potential depth must be at least 1");
    const SurfaceStructure& ss = sample.surface;
    return Potential::from_function(path.dual_transitions(), depth + 1, [&](std::span<const std::size_t> w) {
        return sample.t * (chain_length(ss, w) - chain_length(ss, w.subspan(1)));
    });
}

Potential limit_potential(const DegenerationPath& path, std::size_t depth) {
    if (depth < 1) throw DomainError("surface potential depth must be at least 1");
    const auto l = path.limit_edge_lengths();
    return Potential::from_function(path.dual_transitions(), depth + 1, [&](std::span<const std::size_t> w) {
        return 0.5 * (l[w[0] / 2] + l[w[1] / 2]);
    });
}

SpeedSample path_speed(const DegenerationPath& path, double t, std::size_t depth) {
    require_t(t);
    const double step = std::min(t / 10.0, 1e-3);
    const TransitionStructure& ts = path.dual_transitions();
    auto r_at = [&](double s, double* entropy) {
        const Potential f = surface_potential_approx(path, rescaled_surface_at(path, 1.0 / s), depth);
        const double h = topological_entropy(ts, f);
        if (entropy) *entropy = h;
        return f * -h;
    };
    SpeedSample out;
    out.t = t;
    const Potential r = r_at(t, &out.entropy);
    const Potential derivative = (r_at(t + step, nullptr) - r_at(t - step, nullptr)) * (0.5 / step);
    const EquilibriumState eq = equilibrium_state(ts, r);
    const VarianceResult v = variance(derivative, eq, Centering::Subtract);
    out.centering_residual = v.mean;
    out.speed = std::sqrt(std::max(0.0, v.value / -integrate(r, eq)));
    return out;
}

PathLengthReport path_length(const DegenerationPath& path, double t_min, double t_max, std::size_t depth,
                             std::size_t points_per_halving) {
    require_t(t_max);
    if (!(t_min > 0.0) || t_min > t_max) throw DomainError("need 0 < t_min <= t_max");
    if (points_per_halving < 1) throw DomainError("need at least one grid step per halving");
    PathLengthReport out;
    if (t_min == t_max) return out;

    const double halvings = std::log2(t_max / t_min);
    const auto blocks = static_cast<std::size_t>(std::ceil(halvings - 1e-9));
    const double ratio = std::exp2(-1.0 / static_cast<double>(points_per_halving));
    for (std::size_t j = 0; j <= blocks * points_per_halving; ++j) {
        const double t = t_max * std::pow(ratio, static_cast<double>(j));
        out.grid.push_back(std::max(t, t_min));
        if (t <= t_min) break;
    }
    out.grid.back() = t_min;
    for (double t : out.grid) out.speeds.push_back(path_speed(path, t, depth));

    out.cumulative.assign(out.grid.size(), 0.0);
    for (std::size_t i = 1; i < out.grid.size(); ++i) {
        const double dt = out.grid[i - 1] - out.grid[i];
        out.cumulative[i] = out.cumulative[i - 1] + 0.5 * dt * (out.speeds[i - 1].speed + out.speeds[i].speed);
    }
    out.total = out.cumulative.back();
    for (std::size_t k = 0; k * points_per_halving + 1 < out.grid.size(); ++k) {
        const std::size_t top = k * points_per_halving;
        const std::size_t bottom = std::min(top + points_per_halving, out.grid.size() - 1);
        out.halving_starts.push_back(out.grid[top]);
        out.increments.push_back(out.cumulative[bottom] - out.cumulative[top]);
    }
    for (std::size_t k = 0; k + 1 < out.increments.size(); ++k)
        out.ratios.push_back(out.increments[k + 1] / out.increments[k]);
    return out;
}

EntropyBand entropy_band(const DegenerationPath& path, double t, std::size_t depth,
                         const std::vector<double>& lambda_grid) {
    require_t(t);
    EntropyBand out;
    const TransitionStructure& ts = path.dual_transitions();
    out.h0 = topological_entropy(ts, limit_potential(path, depth));
    out.ht = topological_entropy(ts, surface_potential_approx(path, rescaled_surface_at(path, 1.0 / t), depth));
    double max_slope = -std::numeric_limits<double>::infinity();
    for (std::size_t arc = 0; arc < path.complex().arcs().size(); ++arc)
        max_slope = std::max(max_slope, arc_decay_rate(path, arc, lambda_grid).slope);
    out.c = -2.0 * max_slope;
    const auto limits = path.segment_limits();
    out.c_prime = *std::min_element(limits.begin(), limits.end());
    const double eps = 4.0 * t * std::exp(-out.c / (2.0 * t)) / out.c_prime;
    out.lower = out.h0 / (1.0 + eps);
    out.upper = eps < 1.0 ? out.h0 / (1.0 - eps) : std::numeric_limits<double>::infinity();
    out.inside = out.lower <= out.ht && out.ht <= out.upper;
    return out;
}

} // namespace pmetric
