#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pmetric/degeneration.hpp"
#include "pmetric/error.hpp"
#include "pmetric/io.hpp"

using namespace pmetric;

namespace {

TriangulationComplex load(const char* name) { return load_triangulation(std::string(PMETRIC_DATA_DIR) + "/" + name); }

const std::vector<double> kEquilateral{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
const std::vector<double> kGenusTwo{0.15, 0.17, 0.2, 0.16, 0.14, 0.18};

DegenerationPath pants() { return DegenerationPath(load("pants.json"), kEquilateral); }

// Random point of the cone with coordinates summing to one.
std::vector<double> random_base(std::size_t hexagons, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.5, 1.0);
    std::vector<double> b;
    for (std::size_t h = 0; h < hexagons; ++h)
        for (int k = 0; k < 3; ++k) b.push_back(u(rng));
    double sum = 0.0;
    for (double x : b) sum += x;
    for (double& x : b) x /= sum;
    return b;
}

} // namespace

TEST(Cone, Margins) {
    const auto c = load("pants.json");
    EXPECT_NEAR(cone_check(c, kEquilateral).margin, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(cone_check(c, {0.2, 0.35, 0.45}).margin, 0.1, 1e-15);
    const ConeReport out = cone_check(c, {0.1, 0.2, 0.7});
    EXPECT_NEAR(out.margin, -0.4, 1e-15);
    EXPECT_FALSE(out.inside);
    EXPECT_THROW(cone_check(c, {0.5, 0.5}), InvalidInput);
}

TEST(Cone, GenusTwoHasOneMarginPerMarkedHexagon) {
    const ConeReport out = cone_check(load("s12.json"), kGenusTwo);
    ASSERT_EQ(out.margins.size(), 2u);
    EXPECT_NEAR(out.margins[0], 0.15 + 0.17 - 0.2, 1e-15);
    EXPECT_NEAR(out.margins[1], 0.16 + 0.14 - 0.18, 1e-15);
}

TEST(DegenerationPath, RejectsBadBase) {
    const auto c = load("pants.json");
    EXPECT_THROW(DegenerationPath(c, {0.3, 0.3, 0.3}), DomainError);
    EXPECT_THROW(DegenerationPath(c, {0.1, 0.2, 0.7}), DomainError);
    EXPECT_THROW(DegenerationPath(c, {0.25, 0.25, 0.5}), DomainError);
}

TEST(DegenerationPath, LegsFromBase) {
    const DegenerationPath p(load("s11.json"), {0.3, 0.35, 0.35});
    // arcs sit between consecutive segments; each leg is half the excess
    // of its two neighbours over the opposite segment
    EXPECT_NEAR(p.legs()[0], 0.15, 1e-15);
    EXPECT_NEAR(p.legs()[1], 0.2, 1e-15);
    EXPECT_NEAR(p.legs()[2], 0.15, 1e-15);
    EXPECT_NEAR(p.predicted_decay_slope(1), -0.2, 1e-15);
}

TEST(RescaledSurface, MarkedSidesFollowTheRay) {
    const DegenerationPath p(load("s12.json"), kGenusTwo);
    const auto marked = p.complex().marked_segments();
    for (double lambda : {1.0, 7.5, 60.0}) {
        const PathSample s = rescaled_surface_at(p, lambda);
        EXPECT_DOUBLE_EQ(s.t, 1.0 / lambda);
        for (std::size_t k = 0; k < marked.size(); ++k)
            EXPECT_NEAR(s.rescaled_segments[marked[k]], kGenusTwo[k], 1e-14);
    }
    EXPECT_THROW(rescaled_surface_at(p, 0.5), DomainError);
}

TEST(RescaledSurface, OrtholengthsCollapse) {
    const PathSample s = rescaled_surface_at(pants(), 45.0);
    for (double x : s.rescaled_ortholengths) {
        EXPECT_GT(x, 0.0);
        EXPECT_LT(x, 1e-3);
    }
}

TEST(RescaledSurface, OrtholengthsShrinkAlongTheGrid) {
    for (const auto& [name, b] : std::vector<std::pair<const char*, std::vector<double>>>{
             {"pants.json", {0.3, 0.33, 0.37}}, {"s12.json", kGenusTwo}}) {
        const DegenerationPath p(load(name), b);
        std::vector<double> previous(p.complex().arcs().size(), std::numeric_limits<double>::infinity());
        for (double t : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
            const PathSample s = rescaled_surface_at(p, 1.0 / t);
            for (std::size_t k = 0; k < previous.size(); ++k) {
                EXPECT_LT(s.rescaled_ortholengths[k], previous[k]) << name << " arc " << k << " t " << t;
                previous[k] = s.rescaled_ortholengths[k];
            }
        }
    }
}

TEST(Decay, SlopesMatchLegsOnEveryComplex) {
    const std::vector<double> grid{30.0, 40.0, 50.0, 60.0};
    const std::vector<std::pair<const char*, std::vector<double>>> cases{
        {"pants.json", kEquilateral},
        {"pants.json", {0.3, 0.33, 0.37}},
        {"s11.json", {0.3, 0.35, 0.35}},
        {"s12.json", kGenusTwo},
        {"s04.json", {0.2, 0.15, 0.15, 0.18, 0.16, 0.16}},
    };
    for (const auto& [name, b] : cases) {
        const DegenerationPath p(load(name), b);
        for (std::size_t arc = 0; arc < p.complex().arcs().size(); ++arc) {
            const DecayFit fit = arc_decay_rate(p, arc, grid);
            EXPECT_NEAR(fit.slope, fit.predicted_slope, 1e-3) << name << " arc " << arc;
        }
    }
    EXPECT_NEAR(arc_decay_rate(pants(), 0, grid).slope, -1.0 / 6.0, 1e-5);
}

TEST(Decay, GridValidation) {
    const DegenerationPath p = pants();
    EXPECT_THROW(arc_decay_rate(p, 0, {30.0, 60.0}), DomainError);
    EXPECT_THROW(arc_decay_rate(p, 0, {60.0, 45.0, 30.0}), DomainError);
    EXPECT_THROW(arc_decay_rate(p, 7, {30.0, 45.0, 60.0}), InvalidInput);
}

TEST(SegmentLimits, ComplementarySegmentsConverge) {
    const DegenerationPath p(load("s12.json"), kGenusTwo);
    const auto limits = p.segment_limits();
    std::vector<double> lambdas, errors;
    for (double lambda : {20.0, 30.0, 40.0, 50.0, 60.0}) {
        const PathSample s = rescaled_surface_at(p, lambda);
        double worst = 0.0;
        for (std::size_t k : p.complex().complementary_segments())
            worst = std::max(worst, std::abs(s.rescaled_segments[k] - limits[k]));
        if (lambda == 60.0) EXPECT_LT(worst, 1e-3);
        lambdas.push_back(lambda);
        errors.push_back(worst);
    }
    const ExponentialFit fit = fit_exponential_decay(lambdas, errors);
    EXPECT_GT(fit.rate, 0.0);
}

TEST(SegmentLimits, EquilateralPants) {
    for (double x : pants().segment_limits()) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
}

TEST(ExponentialFit, RecoversParameters) {
    std::vector<double> x, y;
    for (double v : {1.0, 2.0, 3.0, 5.0}) {
        x.push_back(v);
        y.push_back(0.7 * std::exp(-0.4 * v));
    }
    const ExponentialFit fit = fit_exponential_decay(x, y);
    EXPECT_NEAR(fit.prefactor, 0.7, 1e-12);
    EXPECT_NEAR(fit.rate, 0.4, 1e-12);
    EXPECT_THROW(fit_exponential_decay({1.0, 2.0}, {1.0, 0.0}), DomainError);
}

TEST(LimitGraph, EquilateralPantsIsTheta) {
    const ModuliPoint m = limit_graph_metric(pants());
    ASSERT_EQ(m.graph().edge_count(), 3u);
    ASSERT_EQ(m.graph().vertex_count(), 2u);
    // theta with equal edges has entropy log 2 / edge length
    for (double l : m.lengths()) EXPECT_NEAR(l, std::log(2.0), 1e-10);
}

TEST(LimitGraph, MidpointLengthsAgreeAtLargeLambda) {
    for (const auto& [name, b] : std::vector<std::pair<const char*, std::vector<double>>>{
             {"pants.json", kEquilateral}, {"s12.json", kGenusTwo}, {"s11.json", {0.3, 0.35, 0.35}}}) {
        const DegenerationPath p(load(name), b);
        const auto measured = midpoint_edge_lengths(rescaled_surface_at(p, 60.0));
        const auto limit = p.limit_edge_lengths();
        for (std::size_t k = 0; k < limit.size(); ++k) EXPECT_NEAR(measured[k], limit[k], 1e-4) << name << " " << k;
    }
}

TEST(LimitGraph, DistinctBasesGiveDistinctLimits) {
    std::mt19937_64 rng(11);
    const auto c = load("s12.json");
    for (int trial = 0; trial < 10; ++trial) {
        const auto b1 = random_base(2, rng);
        const auto b2 = random_base(2, rng);
        const auto l1 = limit_graph_metric(DegenerationPath(c, b1)).lengths();
        const auto l2 = limit_graph_metric(DegenerationPath(c, b2)).lengths();
        double gap = 0.0;
        for (std::size_t k = 0; k < l1.size(); ++k) gap = std::max(gap, std::abs(l1[k] - l2[k]));
        EXPECT_GT(gap, 1e-6);
    }
}

TEST(Potential, DepthOneMatchesLimitAtLargeLambda) {
    const DegenerationPath p(load("s12.json"), kGenusTwo);
    const PathSample s = rescaled_surface_at(p, 60.0);
    const Potential f = surface_potential_approx(p, s, 1);
    const Potential g = limit_potential(p, 1);
    for (const Word& w : admissible_words(p.dual_transitions(), 2)) EXPECT_NEAR(f(w), g(w), 1e-4);
}

TEST(Potential, DepthOneIsMidpointDistance) {
    const DegenerationPath p = pants();
    const PathSample s = rescaled_surface_at(p, 3.0);
    const Potential f = surface_potential_approx(p, s, 1);
    for (const Word& w : admissible_words(p.dual_transitions(), 2)) {
        const SideRef in = p.complex().arc_sides(w[0] / 2)[1 - w[0] % 2];
        const SideRef out = p.complex().arc_sides(w[1] / 2)[w[1] % 2];
        ASSERT_EQ(in.hexagon, out.hexagon);
        const double d = displacement(midpoint_route(s.surface.sides[in.hexagon], in.position, out.position));
        EXPECT_NEAR(f(w), d / 3.0, 1e-12);
    }
    EXPECT_THROW(surface_potential_approx(p, s, 0), DomainError);
}

TEST(Potential, PeriodSumsApproachGeodesicLengths) {
    // the deeper potentials sum to the rescaled geodesic length of a closed
    // dual walk more closely than the midpoint polygon does
    const DegenerationPath p = pants();
    const PathSample s = rescaled_surface_at(p, 5.0);
    auto exact_length = [&](const std::vector<std::size_t>& loop) {
        std::vector<GeneratorLetter> letters;
        for (std::size_t x : loop) {
            const ArcCrossing crossing{x / 2, p.complex().arc_sides(x / 2)[x % 2].hexagon};
            for (const auto& letter : word_of_crossings(s.surface, {crossing})) letters.push_back(letter);
        }
        return geodesic_length_of_word(s.surface, letters) / 5.0;
    };
    auto error = [&](const std::vector<std::size_t>& loop, std::size_t depth) {
        const ClosedGeodesic g{canonical_rotation(loop), true};
        return std::abs(livsic_period(g, surface_potential_approx(p, s, depth)) - exact_length(loop));
    };
    const std::vector<std::size_t> cuff{0, 3};
    EXPECT_NEAR(exact_length(cuff), 2.0 / 3.0, 1e-12);
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t depth : {1u, 2u, 3u, 4u}) {
        const double err = error(cuff, depth);
        EXPECT_LT(err, previous) << "depth " << depth;
        previous = err;
    }
    EXPECT_LT(error({0, 3, 0, 5}, 4), 0.01 * error({0, 3, 0, 5}, 1));
    // the midpoints of this walk lie on its geodesic, so every depth is exact
    for (std::size_t depth : {1u, 2u, 3u}) EXPECT_NEAR(error({0, 3, 4, 1, 2, 5}, depth), 0.0, 1e-12);
}

TEST(Speed, StrictlyDecreasingOnEquilateralPants) {
    const DegenerationPath p = pants();
    double previous = std::numeric_limits<double>::infinity();
    for (double t : {0.2, 0.1, 0.05, 0.025}) {
        const SpeedSample s = path_speed(p, t, 2);
        EXPECT_LT(s.speed, previous) << "t " << t;
        EXPECT_LT(std::abs(s.centering_residual), 1e-5);
        previous = s.speed;
    }
    EXPECT_LT(path_speed(p, 0.0125, 2).speed, 1e-2 * path_speed(p, 0.2, 2).speed);
}

TEST(Speed, MatchesPressureCurvature) {
    // Var(g, mu_r) is the second derivative of s -> P(r + s g)
    const DegenerationPath p(load("s12.json"), kGenusTwo);
    const TransitionStructure& ts = p.dual_transitions();
    const double t = 0.1, dt = 1e-3;
    auto r_at = [&](double s) {
        const Potential f = surface_potential_approx(p, rescaled_surface_at(p, 1.0 / s), 2);
        return f * -topological_entropy(ts, f);
    };
    const Potential r = r_at(t);
    const Potential g = (r_at(t + dt) - r_at(t - dt)) * (0.5 / dt);
    const double eps = 1e-3;
    const double curvature = (pressure(ts, r + g * eps) - 2.0 * pressure(ts, r) + pressure(ts, r - g * eps)) / (eps * eps);
    const double expected = std::sqrt(curvature / -integrate(r, equilibrium_state(ts, r)));
    EXPECT_NEAR(path_speed(p, t, 2).speed, expected, 1e-4 * expected);
}

TEST(Speed, EntropyTendsToLimit) {
    const DegenerationPath p = pants();
    const double h0 = topological_entropy(p.dual_transitions(), limit_potential(p, 2));
    EXPECT_NEAR(h0, 3.0 * std::log(2.0), 1e-10);
    EXPECT_NEAR(path_speed(p, 0.0125, 2).entropy, h0, 1e-8);
    EXPECT_THROW(path_speed(p, 0.0, 2), DomainError);
    EXPECT_THROW(path_speed(p, 1.5, 2), DomainError);
}

TEST(PathLength, TailIncrementsShrink) {
    const PathLengthReport r = path_length(pants(), 0.0125, 0.2, 2, 4);
    ASSERT_EQ(r.increments.size(), 4u);
    ASSERT_EQ(r.ratios.size(), 3u);
    for (double ratio : r.ratios) EXPECT_LT(ratio, 0.7);
    EXPECT_DOUBLE_EQ(r.grid.front(), 0.2);
    EXPECT_DOUBLE_EQ(r.grid.back(), 0.0125);
    EXPECT_EQ(r.grid.size(), 17u);
    for (std::size_t i = 1; i < r.cumulative.size(); ++i) EXPECT_GE(r.cumulative[i], r.cumulative[i - 1]);
    double sum = 0.0;
    for (double x : r.increments) sum += x;
    EXPECT_NEAR(sum, r.total, 1e-15);
}

TEST(PathLength, Additive) {
    const DegenerationPath p = pants();
    const double whole = path_length(p, 0.0125, 0.2, 2).total;
    const double upper = path_length(p, 0.05, 0.2, 2).total;
    const double lower = path_length(p, 0.0125, 0.05, 2).total;
    EXPECT_NEAR(upper + lower, whole, 1e-14);
}

TEST(PathLength, Degenerate) {
    const DegenerationPath p = pants();
    EXPECT_EQ(path_length(p, 0.1, 0.1, 2).total, 0.0);
    EXPECT_THROW(path_length(p, 0.2, 0.1, 2), DomainError);
    EXPECT_THROW(path_length(p, 0.0, 0.1, 2), DomainError);
    EXPECT_THROW(path_length(p, 0.1, 0.2, 2, 0), DomainError);
}

TEST(EntropyBand, HoldsAlongThePath) {
    for (const auto& [name, b] : std::vector<std::pair<const char*, std::vector<double>>>{
             {"pants.json", kEquilateral}, {"s12.json", kGenusTwo}}) {
        const DegenerationPath p(load(name), b);
        for (double t : {0.1, 0.05, 0.025, 0.0125}) {
            const EntropyBand band = entropy_band(p, t, 2);
            EXPECT_TRUE(band.inside) << name << " t " << t << ": " << band.lower << " <= " << band.ht << " <= "
                                     << band.upper;
            EXPECT_GT(band.c, 0.0);
        }
    }
}
