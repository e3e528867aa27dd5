#include "pmetric/pressure_metric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "pmetric/error.hpp"

namespace pmetric {

namespace {

constexpr double kEntropyTolerance = 1e-10;
constexpr double kTangencyTolerance = 1e-10;

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

void require_size(const ModuliPoint& p, const TangentVector& v) {
    if (v.rates.size() != p.graph().edge_count())
        throw InvalidInput("tangent vector has " + std::to_string(v.rates.size()) + " rates for " +
                           std::to_string(p.graph().edge_count()) + " edges");
}

void require_tangent(const ModuliPoint& p, const TangentVector& v) {
    require_size(p, v);
    const double residual = tangency_residual(p, v);
    if (std::abs(residual) > kTangencyTolerance * std::max(1.0, inf_norm(v.rates))) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "vector is not tangent to the entropy-one locus (constraint residual " << residual << ")";
        throw DomainError(msg.str());
    }
}

TangentVector combine(const TangentVector& u, const TangentVector& v, double sign) {
    TangentVector out{u.rates};
    for (std::size_t i = 0; i < out.rates.size(); ++i) out.rates[i] += sign * v.rates[i];
    return out;
}

// Var / mean for a pair of depth-n potentials on one shift.
double rescaled_variance(const TransitionStructure& ts, const Potential& length, const Potential& rate) {
    const EquilibriumState eq = equilibrium_state(ts, -length);
    const double var = variance(rate, eq, Centering::Subtract).value;
    return var / integrate(length, eq);
}

} // namespace

ModuliPoint::ModuliPoint(MetricGraph graph)
    : graph_(std::move(graph)), ts_(build_transition_structure(graph_)), eq_() {
    const Potential fl = Potential::edge_lengths(ts_, graph_.lengths());
    const double h = topological_entropy(ts_, fl);
    if (std::abs(h - 1.0) > kEntropyTolerance)
        throw DomainError("metric does not have entropy one (h = " + std::to_string(h) + ")");
    eq_ = equilibrium_state(ts_, -fl, 1);
    masses_.assign(graph_.edge_count(), 0.0);
    for (std::size_t s = 0; s < ts_.size(); ++s) masses_[s / 2] += eq_.stationary(static_cast<Eigen::Index>(s));
    mean_length_ = integrate(fl, eq_);
}

ModuliPoint normalize_to_entropy_one(const MetricGraph& graph) {
    const TransitionStructure ts = build_transition_structure(graph);
    std::vector<double> lengths = graph.lengths();
    const double h = topological_entropy(ts, Potential::edge_lengths(ts, lengths));
    for (double& x : lengths) x *= h;
    return ModuliPoint(graph.with_lengths(lengths));
}

ModuliPoint normalize_to_entropy_one(const MetricGraph& graph, const std::vector<double>& lengths) {
    return normalize_to_entropy_one(graph.with_lengths(lengths));
}

Potential thermodynamic_map(const ModuliPoint& p) {
    return -Potential::edge_lengths(p.transitions(), p.lengths());
}

double tangency_residual(const ModuliPoint& p, const TangentVector& v) {
    require_size(p, v);
    double sum = 0.0;
    for (std::size_t e = 0; e < v.rates.size(); ++e) sum += p.edge_masses()[e] * v.rates[e];
    return sum;
}

std::vector<TangentVector> tangent_basis(const ModuliPoint& p) {
    const std::size_t n = p.graph().edge_count();
    if (n < 2) throw InvalidInput("tangent space needs at least two edges");
    const std::vector<double>& m = p.edge_masses();
    const double mm = std::inner_product(m.begin(), m.end(), m.begin(), 0.0);
    std::vector<TangentVector> basis;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        std::vector<double> d(n, 0.0);
        d[k] = 1.0;
        d[k + 1] = -1.0;
        const double c = (m[k] - m[k + 1]) / mm;
        for (std::size_t e = 0; e < n; ++e) d[e] -= c * m[e];
        basis.push_back({std::move(d)});
    }
    return basis;
}

double pressure_norm(const ModuliPoint& p, const TangentVector& v) {
    require_tangent(p, v);
    if (inf_norm(v.rates) == 0.0) return 0.0;
    const Potential fv = Potential::edge_lengths(p.transitions(), v.rates);
    return variance(fv, p.equilibrium(), Centering::Subtract).value / p.mean_length();
}

double pressure_inner(const ModuliPoint& p, const TangentVector& u, const TangentVector& v) {
    return 0.25 * (pressure_norm(p, combine(u, v, 1.0)) - pressure_norm(p, combine(u, v, -1.0)));
}

MetricTensor metric_tensor(const ModuliPoint& p) {
    MetricTensor out;
    out.basis = tangent_basis(p);
    out.basis_description = "e_k - e_{k+1} projected orthogonally to the edge masses, k = 0.." +
                            std::to_string(out.basis.size() - 1);
    const auto n = static_cast<Eigen::Index>(out.basis.size());
    out.gram.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.gram(i, i) = pressure_norm(p, out.basis[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < i; ++j) {
            const double g = pressure_inner(p, out.basis[static_cast<std::size_t>(i)], out.basis[static_cast<std::size_t>(j)]);
            out.gram(i, j) = g;
            out.gram(j, i) = g;
        }
    }
    out.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(out.gram).eigenvalues().minCoeff();
    return out;
}

double intersection_J(const ModuliPoint& l1, const ModuliPoint& l2, double horizon, double cap) {
    const MetricGraph& g1 = l1.graph();
    const MetricGraph& g2 = l2.graph();
    if (g1.edge_count() != g2.edge_count() || g1.vertex_count() != g2.vertex_count())
        throw InvalidInput("intersection needs two metrics on the same graph");
    for (std::size_t e = 0; e < g1.edge_count(); ++e) {
        const Edge& a = g1.edge(e);
        const Edge& b = g2.edge(e);
        if (a.name != b.name || a.tail != b.tail || a.head != b.head)
            throw InvalidInput("intersection needs two metrics on the same graph");
    }
    if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
    const std::vector<double> lengths = g1.lengths();
    const double shortest = *std::min_element(lengths.begin(), lengths.end());
    if (horizon / shortest > 1e6) throw ResourceLimit("horizon too large for enumeration");
    const auto max_period = static_cast<std::size_t>(std::ceil(horizon / shortest)) - 1;

    double sum = 0.0;
    std::size_t count = 0;
    for (const ClosedGeodesic& g : enumerate_closed_geodesics(l1.transitions(), max_period, cap)) {
        const double a = geodesic_length(g, g1);
        if (a >= horizon) continue;
        sum += geodesic_length(g, g2) / a;
        ++count;
    }
    if (count == 0) throw DomainError("no closed geodesics shorter than T");
    const auto h = [](const ModuliPoint& p) {
        return topological_entropy(p.transitions(), Potential::edge_lengths(p.transitions(), p.lengths()));
    };
    return h(l2) / h(l1) * sum / static_cast<double>(count);
}

MidpointCoding midpoint_coding(const MetricGraph& graph, const std::vector<std::size_t>& cut_edges) {
    const std::size_t n_edges = graph.edge_count();
    const std::size_t n_vertices = graph.vertex_count();
    std::vector<std::size_t> cut = cut_edges;
    std::sort(cut.begin(), cut.end());
    if (std::adjacent_find(cut.begin(), cut.end()) != cut.end()) throw InvalidInput("cut system repeats an edge");
    for (std::size_t e : cut)
        if (e >= n_edges) throw InvalidInput("cut edge " + std::to_string(e) + " out of range");
    if (cut.size() != n_edges - n_vertices + 1)
        throw InvalidInput("cut system has " + std::to_string(cut.size()) + " edges, expected " +
                           std::to_string(n_edges - n_vertices + 1));

    std::vector<bool> is_cut(n_edges, false);
    for (std::size_t e : cut) is_cut[e] = true;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> tree(n_vertices);  // (neighbour, edge)
    for (std::size_t e = 0; e < n_edges; ++e) {
        if (is_cut[e]) continue;
        const Edge& ed = graph.edge(e);
        if (ed.tail == ed.head) throw InvalidInput("cut system leaves loop " + ed.name + " in the tree");
        tree[ed.tail].push_back({ed.head, e});
        tree[ed.head].push_back({ed.tail, e});
    }

    MidpointCoding out{graph, {}, cut, n_vertices, {}};
    out.tree_path.resize(n_vertices * n_vertices);
    for (std::size_t root = 0; root < n_vertices; ++root) {
        std::vector<std::size_t> parent_edge(n_vertices, n_edges);
        std::vector<std::size_t> parent(n_vertices, n_vertices);
        std::vector<bool> seen(n_vertices, false);
        std::queue<std::size_t> queue;
        queue.push(root);
        seen[root] = true;
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop();
            for (auto [w, e] : tree[u]) {
                if (seen[w]) continue;
                seen[w] = true;
                parent[w] = u;
                parent_edge[w] = e;
                queue.push(w);
            }
        }
        for (std::size_t v = 0; v < n_vertices; ++v) {
            if (!seen[v]) throw InvalidInput("complement of the cut system is not a spanning tree");
            auto& path = out.tree_path[root * n_vertices + v];
            for (std::size_t x = v; x != root; x = parent[x]) path.push_back(parent_edge[x]);
        }
    }

    std::vector<Edge> loops;
    for (std::size_t e : cut) loops.push_back({0, 0, graph.edge(e).name, graph.edge(e).length});
    out.rose = MetricGraph(1, std::move(loops));
    out.transitions = build_transition_structure(out.rose);
    return out;
}

Potential recode_edge_weights(const MidpointCoding& coding, const MetricGraph& graph, const std::vector<double>& weights) {
    if (weights.size() != graph.edge_count()) throw InvalidInput("one weight per edge expected");
    // rose loops follow the order of the sorted cut edges
    auto endpoint = [&](std::size_t symbol, bool start) {
        const Edge& e = graph.edge(coding.cut_edges[symbol / 2]);
        const bool plus = symbol % 2 == 0;
        return plus == start ? e.tail : e.head;
    };
    return Potential::from_function(coding.transitions, 2, [&](std::span<const std::size_t> w) {
        const std::size_t c0 = coding.cut_edges[w[0] / 2];
        const std::size_t c1 = coding.cut_edges[w[1] / 2];
        double value = 0.5 * weights[c0] + 0.5 * weights[c1];
        for (std::size_t e : coding.tree_path[endpoint(w[0], false) * coding.vertex_count + endpoint(w[1], true)])
            value += weights[e];
        return value;
    });
}

double metric_via_midpoint_coding(const ModuliPoint& p, const TangentVector& v, const std::vector<std::size_t>& cut_edges) {
    require_tangent(p, v);
    const MidpointCoding coding = midpoint_coding(p.graph(), cut_edges);
    if (inf_norm(v.rates) == 0.0) return 0.0;
    const Potential length = recode_edge_weights(coding, p.graph(), p.lengths());
    const Potential rate = recode_edge_weights(coding, p.graph(), v.rates);
    return rescaled_variance(coding.transitions, length, rate);
}

} // namespace pmetric
