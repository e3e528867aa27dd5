#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pmetric/graph_core.hpp"
#include "pmetric/thermo.hpp"

namespace pmetric {

// An entropy-one metric on a graph, with the equilibrium state of -F_l
// cached. Construction checks the entropy to 1e-10.
class ModuliPoint {
public:
    explicit ModuliPoint(MetricGraph graph);

    const MetricGraph& graph() const { return graph_; }
    const TransitionStructure& transitions() const { return ts_; }
    std::vector<double> lengths() const { return graph_.lengths(); }
    const EquilibriumState& equilibrium() const { return eq_; }

    // mu(+e) + mu(-e) per edge.
    const std::vector<double>& edge_masses() const { return masses_; }
    // Integral of F_l against the equilibrium state.
    double mean_length() const { return mean_length_; }

private:
    MetricGraph graph_;
    TransitionStructure ts_;
    EquilibriumState eq_;
    std::vector<double> masses_;
    double mean_length_ = 0.0;
};

// Per-edge rates of change of the lengths.
struct TangentVector {
    std::vector<double> rates;
};

ModuliPoint normalize_to_entropy_one(const MetricGraph& graph);
ModuliPoint normalize_to_entropy_one(const MetricGraph& graph, const std::vector<double>& lengths);

Potential thermodynamic_map(const ModuliPoint& p);

// sum_e m_e v_e; zero for tangent vectors.
double tangency_residual(const ModuliPoint& p, const TangentVector& v);

std::vector<TangentVector> tangent_basis(const ModuliPoint& p);

// The squared norm Var(F_v) / integral of F_l, both against the equilibrium
// state of -F_l.
double pressure_norm(const ModuliPoint& p, const TangentVector& v);

// Bilinear form from the norm by polarization.
double pressure_inner(const ModuliPoint& p, const TangentVector& u, const TangentVector& v);

struct MetricTensor {
    Eigen::MatrixXd gram;
    std::vector<TangentVector> basis;
    std::string basis_description;
    double min_eigenvalue = 0.0;
};

MetricTensor metric_tensor(const ModuliPoint& p);

// Finite-T renormalized intersection over closed geodesics of l1-length < T.
double intersection_J(const ModuliPoint& l1, const ModuliPoint& l2, double horizon,
                      double cap = kDefaultEnumerationCap);

// Coding of the geodesic flow by passages through the midpoints of the
// cut edges: one symbol per oriented cut edge, any non-backtracking pair
// of cut edges is admissible. The complement of the cut set must be a
// spanning tree.
struct MidpointCoding {
    MetricGraph rose;               // one vertex, one loop per cut edge
    TransitionStructure transitions;
    std::vector<std::size_t> cut_edges;
    std::size_t vertex_count = 0;
    // Edges of the tree path from u to v, at index u * vertex_count + v.
    std::vector<std::vector<std::size_t>> tree_path;
};

MidpointCoding midpoint_coding(const MetricGraph& graph, const std::vector<std::size_t>& cut_edges);

// Depth-2 potential on the coding: half of each cut edge's weight at both
// ends plus the weight of the tree path between them.
Potential recode_edge_weights(const MidpointCoding& coding, const MetricGraph& graph, const std::vector<double>& weights);

double metric_via_midpoint_coding(const ModuliPoint& p, const TangentVector& v, const std::vector<std::size_t>& cut_edges);

} // namespace pmetric
