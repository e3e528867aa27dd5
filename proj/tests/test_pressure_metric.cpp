#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "pmetric/error.hpp"
#include "pmetric/pressure_metric.hpp"

using namespace pmetric;
using namespace pmetric::testing;

namespace {

const double kLog2 = std::log(2.0);

ModuliPoint random_point(const MetricGraph& graph, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.5, 2.0);
    std::vector<double> lengths(graph.edge_count());
    for (double& x : lengths) x = u(rng);
    return normalize_to_entropy_one(graph, lengths);
}

TangentVector random_tangent(const ModuliPoint& p, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    TangentVector v{std::vector<double>(p.graph().edge_count())};
    for (double& x : v.rates) x = n(rng);
    const auto& m = p.edge_masses();
    double mv = 0.0, mm = 0.0;
    for (std::size_t e = 0; e < m.size(); ++e) {
        mv += m[e] * v.rates[e];
        mm += m[e] * m[e];
    }
    double norm = 0.0;
    for (std::size_t e = 0; e < m.size(); ++e) {
        v.rates[e] -= mv / mm * m[e];
        norm += v.rates[e] * v.rates[e];
    }
    for (double& x : v.rates) x /= std::sqrt(norm);
    return v;
}

// ||v||^2 along the curve l_s = normalize(l + s v): differentiating
// P(-F_{l_s}) = 0 twice gives Var(F_v) = sum_e m_e l''(e).
double curve_oracle(const ModuliPoint& p, const TangentVector& v, double h = 1e-3) {
    const auto l = p.lengths();
    auto at = [&](double s) {
        std::vector<double> x = l;
        for (std::size_t e = 0; e < x.size(); ++e) x[e] += s * v.rates[e];
        return normalize_to_entropy_one(p.graph(), x).lengths();
    };
    auto second = [&](double step) {
        const auto plus = at(step);
        const auto minus = at(-step);
        double sum = 0.0;
        for (std::size_t e = 0; e < l.size(); ++e)
            sum += p.edge_masses()[e] * (plus[e] - 2.0 * l[e] + minus[e]) / (step * step);
        return sum;
    };
    return (4.0 * second(h / 2) - second(h)) / 3.0 / p.mean_length();
}

// Straight-line Hessian of the pressure, d^2/ds^2 P(-F_l - s F_v).
double hessian_oracle(const ModuliPoint& p, const TangentVector& v, double h = 1e-3) {
    const auto& ts = p.transitions();
    const Potential f = thermodynamic_map(p);
    const Potential g = Potential::edge_lengths(ts, v.rates);
    auto second = [&](double s) {
        return (pressure(ts, f + g * s) - 2.0 * pressure(ts, f) + pressure(ts, f + g * -s)) / (s * s);
    };
    return (4.0 * second(h / 2) - second(h)) / 3.0 / p.mean_length();
}

std::vector<double> permuted(const std::vector<double>& x, const std::vector<std::size_t>& perm) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[perm[i]] = x[i];
    return out;
}

} // namespace

TEST(Normalize, ThetaExamples) {
    for (double s : {1.0, 2.0}) {
        const auto p = normalize_to_entropy_one(theta(s, s, s));
        for (double x : p.lengths()) EXPECT_NEAR(x, kLog2, 1e-12);
    }
}

TEST(Normalize, Idempotent) {
    std::mt19937_64 rng(1);
    for (const auto& graph : bundled_graphs()) {
        const auto p = random_point(graph, rng);
        const auto q = normalize_to_entropy_one(p.graph());
        for (std::size_t e = 0; e < graph.edge_count(); ++e) EXPECT_NEAR(q.lengths()[e], p.lengths()[e], 1e-12);
    }
}

TEST(Normalize, ModuliPointRejectsOtherEntropy) {
    EXPECT_THROW(ModuliPoint{theta()}, DomainError);
}

TEST(ThermodynamicMap, SymmetricTheta) {
    const auto p = normalize_to_entropy_one(theta());
    const auto f = thermodynamic_map(p);
    EXPECT_EQ(f.depth(), 1u);
    ASSERT_EQ(f.values().size(), 6u);
    for (double x : f.values()) EXPECT_NEAR(x, -kLog2, 1e-12);
    EXPECT_NEAR(pressure(p.transitions(), f), 0.0, 1e-12);
}

TEST(ThermodynamicMap, PressureZeroEverywhere) {
    std::mt19937_64 rng(2);
    for (const auto& graph : bundled_graphs()) {
        const auto p = random_point(graph, rng);
        EXPECT_NEAR(pressure(p.transitions(), thermodynamic_map(p)), 0.0, 1e-10);
    }
}

TEST(ThermodynamicMap, CommutesWithRelabelling) {
    // cycling the theta edges a -> b -> c -> a
    const auto p = normalize_to_entropy_one(theta(1.0, 1.5, 2.0));
    const std::vector<std::size_t> perm{1, 2, 0};
    const auto q = normalize_to_entropy_one(theta(), permuted(p.lengths(), perm));
    const auto fp = thermodynamic_map(p);
    const auto fq = thermodynamic_map(q);
    for (std::size_t s = 0; s < 6; ++s) {
        const std::size_t image = 2 * perm[s / 2] + s % 2;
        EXPECT_NEAR(fp(std::span<const std::size_t>(&s, 1)), fq(std::span<const std::size_t>(&image, 1)), 1e-12);
    }
}

TEST(TangentBasis, DimensionAndConstraint) {
    std::mt19937_64 rng(3);
    for (const auto& graph : bundled_graphs()) {
        const auto p = random_point(graph, rng);
        const auto basis = tangent_basis(p);
        EXPECT_EQ(basis.size(), graph.edge_count() - 1);
        for (const auto& v : basis) EXPECT_LE(std::abs(tangency_residual(p, v)), 1e-12);
        Eigen::MatrixXd b(static_cast<Eigen::Index>(graph.edge_count()), static_cast<Eigen::Index>(basis.size()));
        for (std::size_t k = 0; k < basis.size(); ++k)
            for (std::size_t e = 0; e < graph.edge_count(); ++e)
                b(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(k)) = basis[k].rates[e];
        EXPECT_EQ(Eigen::FullPivLU<Eigen::MatrixXd>(b).rank(), static_cast<Eigen::Index>(basis.size()));
    }
}

TEST(TangentBasis, SymmetricPointMassesAreUniform) {
    const auto p = normalize_to_entropy_one(theta());
    for (double m : p.edge_masses()) EXPECT_NEAR(m, 1.0 / 3.0, 1e-14);
    EXPECT_NEAR(tangency_residual(p, {{1.0, -1.0, 0.0}}), 0.0, 1e-14);
    const auto basis = tangent_basis(p);
    EXPECT_NEAR(basis[0].rates[0], 1.0, 1e-14);
    EXPECT_NEAR(basis[0].rates[1], -1.0, 1e-14);
}

TEST(PressureNorm, TrivialCases) {
    const auto p = normalize_to_entropy_one(theta(1.0, 1.2, 0.9));
    EXPECT_EQ(pressure_norm(p, {{0.0, 0.0, 0.0}}), 0.0);
    const auto v = tangent_basis(p)[1];
    TangentVector twice = v;
    for (double& x : twice.rates) x *= 2.0;
    EXPECT_NEAR(pressure_norm(p, twice), 4.0 * pressure_norm(p, v), 1e-13);
}

TEST(PressureNorm, RejectsNonTangentVector) {
    const auto p = normalize_to_entropy_one(theta());
    try {
        pressure_norm(p, {{1.0, 0.0, 0.0}});
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("residual"), std::string::npos);
    }
}

TEST(PressureNorm, SymmetricThetaMatchesCurveOracle) {
    const auto p = normalize_to_entropy_one(theta());
    const TangentVector v{{1.0, -1.0, 0.0}};
    const double value = pressure_norm(p, v);
    EXPECT_GT(value, 0.0);
    EXPECT_TRUE(near_rel(curve_oracle(p, v), value, 1e-5)) << curve_oracle(p, v) << " vs " << value;
    EXPECT_TRUE(near_rel(hessian_oracle(p, v), value, 1e-5)) << hessian_oracle(p, v) << " vs " << value;
}

TEST(PressureNorm, BasisVectorsMatchOracles) {
    std::mt19937_64 rng(4);
    for (const auto& graph : bundled_graphs()) {
        const auto p = random_point(graph, rng);
        for (const auto& v : tangent_basis(p)) {
            const double value = pressure_norm(p, v);
            EXPECT_TRUE(near_rel(curve_oracle(p, v), value, 1e-5)) << curve_oracle(p, v) << " vs " << value;
            EXPECT_TRUE(near_rel(hessian_oracle(p, v), value, 1e-5)) << hessian_oracle(p, v) << " vs " << value;
        }
    }
}

TEST(PressureNorm, NondegenerateOnRandomUnitVectors) {
    std::mt19937_64 rng(5);
    const auto graphs = bundled_graphs();
    for (int k = 0; k < 100; ++k) {
        const auto p = random_point(graphs[static_cast<std::size_t>(k) % graphs.size()], rng);
        EXPECT_GT(pressure_norm(p, random_tangent(p, rng)), 0.0);
    }
}

TEST(MetricTensor, SymmetricThetaDiagonalEqual) {
    const auto t = metric_tensor(normalize_to_entropy_one(theta()));
    ASSERT_EQ(t.gram.rows(), 2);
    EXPECT_NEAR(t.gram(0, 0), t.gram(1, 1), 1e-12);
    EXPECT_EQ(t.gram(0, 1), t.gram(1, 0));
    EXPECT_GT(t.min_eigenvalue, 0.0);
}

TEST(MetricTensor, PositiveDefiniteAtRandomPoints) {
    std::mt19937_64 rng(6);
    for (const auto& graph : {theta(), two_loop()}) {
        for (int k = 0; k < 20; ++k) {
            const auto t = metric_tensor(random_point(graph, rng));
            EXPECT_GT(t.min_eigenvalue, 0.0);
            EXPECT_LE((t.gram - t.gram.transpose()).norm(), 0.0);
        }
    }
}

TEST(MetricTensor, QuadraticFormMatchesNorm) {
    std::mt19937_64 rng(7);
    const auto p = random_point(k4(), rng);
    const auto t = metric_tensor(p);
    Eigen::VectorXd c = Eigen::VectorXd::Random(t.gram.rows());
    TangentVector v{std::vector<double>(6, 0.0)};
    for (Eigen::Index k = 0; k < c.size(); ++k)
        for (std::size_t e = 0; e < 6; ++e) v.rates[e] += c(k) * t.basis[static_cast<std::size_t>(k)].rates[e];
    EXPECT_TRUE(near_rel(c.dot(t.gram * c), pressure_norm(p, v), 1e-10));
}

TEST(MetricTensor, NaturalUnderAutomorphism) {
    std::mt19937_64 rng(8);
    const auto p = random_point(theta(), rng);
    const std::vector<std::size_t> perm{2, 0, 1};
    const auto q = normalize_to_entropy_one(theta(), permuted(p.lengths(), perm));
    for (int k = 0; k < 5; ++k) {
        const auto v = random_tangent(p, rng);
        const TangentVector w{permuted(v.rates, perm)};
        EXPECT_TRUE(near_rel(pressure_norm(q, w), pressure_norm(p, v), 1e-10));
    }
}

TEST(Intersection, SelfIsOne) {
    std::mt19937_64 rng(9);
    for (const auto& graph : {theta(), dumbbell(), k4()}) {
        const auto p = random_point(graph, rng);
        EXPECT_NEAR(intersection_J(p, p, 5.0), 1.0, 1e-14);
    }
}

TEST(Intersection, SymmetricThetaIsAverageLength) {
    // R_T of the symmetric metric is invariant under all edge permutations, so
    // each edge carries a third of every geodesic on average
    const auto l1 = normalize_to_entropy_one(theta());
    const auto l2 = normalize_to_entropy_one(theta(1, 1, 2));
    const auto x = l2.lengths();
    const double expected = (x[0] + x[1] + x[2]) / (3.0 * kLog2);
    for (double t : {10.0 * kLog2, 15.0 * kLog2}) EXPECT_NEAR(intersection_J(l1, l2, t), expected, 1e-12);
}

TEST(Intersection, InvariantUnderAutomorphism) {
    const auto l1 = normalize_to_entropy_one(theta(1.0, 1.3, 0.8));
    const auto l2 = normalize_to_entropy_one(theta(1.0, 1.0, 2.0));
    const std::vector<std::size_t> perm{1, 2, 0};
    const auto m1 = normalize_to_entropy_one(theta(), permuted(l1.lengths(), perm));
    const auto m2 = normalize_to_entropy_one(theta(), permuted(l2.lengths(), perm));
    EXPECT_NEAR(intersection_J(m1, m2, 8.0), intersection_J(l1, l2, 8.0), 1e-12);
}

TEST(Intersection, EmptyWindowIsAnError) {
    const auto p = normalize_to_entropy_one(theta());
    EXPECT_THROW(intersection_J(p, p, 1.0), DomainError);
}

TEST(MidpointCoding, RejectsInconsistentCutSystems) {
    const auto graph = theta();
    EXPECT_THROW(midpoint_coding(graph, {0}), InvalidInput);
    EXPECT_THROW(midpoint_coding(graph, {0, 0}), InvalidInput);
    EXPECT_THROW(midpoint_coding(graph, {0, 7}), InvalidInput);
    // dumbbell: cutting the bridge and a loop leaves the other loop in the tree
    EXPECT_THROW(midpoint_coding(dumbbell(), {0, 1}), InvalidInput);
    EXPECT_NO_THROW(midpoint_coding(dumbbell(), {0, 2}));
}

TEST(MidpointCoding, PreservesEntropy) {
    std::mt19937_64 rng(10);
    for (const auto& graph : bundled_graphs()) {
        const auto p = random_point(graph, rng);
        const auto coding = midpoint_coding(graph, spanning_tree_complement(graph));
        const auto f = recode_edge_weights(coding, p.graph(), p.lengths());
        EXPECT_NEAR(pressure(coding.transitions, -f), 0.0, 1e-10);
    }
}

TEST(MidpointCoding, SymmetricTheta) {
    const auto p = normalize_to_entropy_one(theta());
    const TangentVector v{{1.0, -1.0, 0.0}};
    EXPECT_NEAR(metric_via_midpoint_coding(p, v, {1, 2}), pressure_norm(p, v), 1e-8);
    EXPECT_EQ(metric_via_midpoint_coding(p, {{0.0, 0.0, 0.0}}, {1, 2}), 0.0);
}

TEST(MidpointCoding, AgreesOnEveryBasisVector) {
    std::mt19937_64 rng(11);
    for (const auto& graph : bundled_graphs()) {
        const auto p = random_point(graph, rng);
        const auto cut = spanning_tree_complement(graph);
        for (const auto& v : tangent_basis(p))
            EXPECT_NEAR(metric_via_midpoint_coding(p, v, cut), pressure_norm(p, v), 1e-8);
    }
}

TEST(MidpointCoding, IndependentOfTheCutSystem) {
    std::mt19937_64 rng(12);
    const auto p = random_point(k4(), rng);
    const auto v = random_tangent(p, rng);
    // two spanning trees of K4: a star at vertex 0 and a path 1-0-2-3
    EXPECT_NEAR(metric_via_midpoint_coding(p, v, {3, 4, 5}), metric_via_midpoint_coding(p, v, {2, 3, 4}), 1e-8);
}
