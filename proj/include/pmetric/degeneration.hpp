#pragma once

#include <cstddef>
#include <vector>

#include "pmetric/hexagon.hpp"
#include "pmetric/pressure_metric.hpp"
#include "pmetric/thermo.hpp"

namespace pmetric {

struct ConeReport {
    std::vector<double> margins;  // per marked hexagon, in marked_hexagons() order
    double margin = 0.0;          // smallest of them
    bool inside = false;
};

// Triangle-inequality margins min(b_i + b_j - b_k) of every marked hexagon.
ConeReport cone_check(const TriangulationComplex& complex, const std::vector<double>& b);

// The ray m_lambda = lambda * b through the cone, t = 1 / lambda.
class DegenerationPath {
public:
    // b sums to 1 (within 1e-12) and lies strictly inside the cone.
    DegenerationPath(TriangulationComplex complex, std::vector<double> b);

    const TriangulationComplex& complex() const { return complex_; }
    const std::vector<double>& base() const { return b_; }
    const ConeReport& cone() const { return cone_; }

    // Tripod leg of each arc in its marked hexagon, (b_i + b_j - b_k) / 2.
    const std::vector<double>& legs() const { return legs_; }
    // Predicted slope of log(arc length) against lambda: minus the leg.
    double predicted_decay_slope(std::size_t arc) const { return -legs_.at(arc); }
    // Limits of segment / lambda: b for marked segments, the sum of the two
    // adjacent arcs' legs for complementary ones.
    std::vector<double> segment_limits() const;
    // Edge lengths of the limit graph (the dual graph), one per arc.
    std::vector<double> limit_edge_lengths() const;
    MetricGraph limit_graph() const;
    const TransitionStructure& dual_transitions() const { return dual_ts_; }

private:
    TriangulationComplex complex_;
    std::vector<double> b_;
    ConeReport cone_;
    std::vector<double> legs_;
    TransitionStructure dual_ts_;
};

struct PathSample {
    double t = 0.0;
    double lambda = 0.0;
    SurfaceStructure surface;                 // at lambda * b, unscaled
    std::vector<double> rescaled_ortholengths;  // per arc, times t
    std::vector<double> rescaled_segments;      // per segment, times t
};

PathSample rescaled_surface_at(const DegenerationPath& path, double lambda);

struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;  // log of the prefactor
    double predicted_slope = 0.0;
};

// Least-squares fit of log(arc length) against lambda.
DecayFit arc_decay_rate(const DegenerationPath& path, std::size_t arc, const std::vector<double>& lambda_grid);

struct ExponentialFit {
    double prefactor = 0.0;  // C
    double rate = 0.0;       // delta
};

// Fit of err(x) ~ C exp(-delta x) by least squares on log err.
ExponentialFit fit_exponential_decay(const std::vector<double>& x, const std::vector<double>& err);

// Limit metric normalized to entropy one.
ModuliPoint limit_graph_metric(const DegenerationPath& path);

// Edge lengths read off the rescaled midpoint-to-midpoint distances of a
// sample: legs from the three distances in each hexagon, summed per arc.
std::vector<double> midpoint_edge_lengths(const PathSample& sample);

// Locally constant approximation of the rescaled length function on the
// shift of the dual graph. Windows of depth + 1 crossings; the value is the
// growth of the rescaled midpoint-chain length when the first crossing is
// prepended. depth 1 is the midpoint-to-midpoint distance.
Potential surface_potential_approx(const DegenerationPath& path, const PathSample& sample, std::size_t depth);

// The same quantity on the limit graph: (l(x_0) + l(x_1)) / 2, lifted to
// windows of depth + 1 crossings.
Potential limit_potential(const DegenerationPath& path, std::size_t depth);

struct SpeedSample {
    double t = 0.0;
    double speed = 0.0;
    double entropy = 0.0;          // h_t of the rescaled potential
    double centering_residual = 0.0;  // mean of dr/dt, zero in exact arithmetic
};

// Pressure norm of dr/dt for r(t) = -h_t F_t, central difference with
// step min(t / 10, 1e-3).
SpeedSample path_speed(const DegenerationPath& path, double t, std::size_t depth);

struct PathLengthReport {
    std::vector<double> grid;        // decreasing in t
    std::vector<SpeedSample> speeds;
    std::vector<double> cumulative;  // length from grid[0] down to grid[i]
    double total = 0.0;
    std::vector<double> halving_starts;  // t at the top of each dyadic interval
    std::vector<double> increments;      // length over [t / 2, t]
    std::vector<double> ratios;          // increments[k + 1] / increments[k]
};

// Trapezoid rule on a geometric grid with `points_per_halving` steps per
// factor of two, from t_max down to t_min.
PathLengthReport path_length(const DegenerationPath& path, double t_min, double t_max, std::size_t depth,
                             std::size_t points_per_halving = 1);

struct EntropyBand {
    double h0 = 0.0;  // entropy of the limit potential
    double ht = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double c = 0.0;
    double c_prime = 0.0;
    bool inside = false;
};

// h_0 (1 + 4 t e^{-c/2t} / c')^{-1} <= h_t <= h_0 (1 - 4 t e^{-c/2t} / c')^{-1},
// with c = -2 max(fitted decay slope) and c' the smallest rescaled side limit.
EntropyBand entropy_band(const DegenerationPath& path, double t, std::size_t depth,
                         const std::vector<double>& lambda_grid = {30.0, 45.0, 60.0});

} // namespace pmetric
