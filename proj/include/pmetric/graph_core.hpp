#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pmetric {

// An undirected edge with a positive length. Loops have tail == head.
struct Edge {
    std::size_t tail = 0;
    std::size_t head = 0;
    std::string name;
    double length = 1.0;
};

// Finite connected graph, every vertex of valence >= 3, positive lengths.
// Edges are kept sorted by identifier (natural order, so "a:2" < "a:10");
// every per-edge vector in the library follows this order.
class MetricGraph {
public:
    MetricGraph(std::size_t vertex_count, std::vector<Edge> edges);

    std::size_t vertex_count() const { return vertex_count_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(std::size_t i) const { return edges_.at(i); }

    std::vector<double> lengths() const;
    double volume() const;
    std::size_t edge_index(std::string_view name) const;
    std::size_t valence(std::size_t vertex) const;

    // Same combinatorics, new lengths (validated).
    MetricGraph with_lengths(const std::vector<double>& lengths) const;

private:
    std::size_t vertex_count_;
    std::vector<Edge> edges_;
};

// Natural ordering of identifiers: digit runs compare numerically.
bool natural_less(std::string_view a, std::string_view b);

enum class Orientation : std::uint8_t { Plus, Minus };

struct DirectedEdge {
    std::size_t edge = 0;
    Orientation orientation = Orientation::Plus;

    friend bool operator==(const DirectedEdge&, const DirectedEdge&) = default;
};

// Symbol index of a directed edge: 2*edge for +e, 2*edge+1 for -e.
inline std::size_t symbol_of(DirectedEdge d) {
    return 2 * d.edge + (d.orientation == Orientation::Minus ? 1 : 0);
}
inline DirectedEdge directed_edge_of(std::size_t symbol) {
    return {symbol / 2, symbol % 2 == 0 ? Orientation::Plus : Orientation::Minus};
}
inline std::size_t reversal_of(std::size_t symbol) { return symbol ^ 1U; }

// The directed-edge shift of a metric graph: symbols are directed edges,
// A(e, e') = 1 iff head(e) = tail(e') and e' is not the reversal of e.
class TransitionStructure {
public:
    std::size_t size() const { return labels_.size(); }
    std::size_t edge_count() const { return size() / 2; }

    bool allowed(std::size_t from, std::size_t to) const { return adjacency_[from * size() + to] != 0; }
    const std::vector<std::size_t>& successors(std::size_t symbol) const { return successors_.at(symbol); }
    std::size_t reversal(std::size_t symbol) const { return reversal_of(symbol); }
    std::size_t tail_vertex(std::size_t symbol) const { return tail_.at(symbol); }
    std::size_t head_vertex(std::size_t symbol) const { return head_.at(symbol); }
    const std::string& label(std::size_t symbol) const { return labels_.at(symbol); }
    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t symbol_index(std::string_view label) const;

    // Row-major 0/1 matrix.
    const std::vector<std::uint8_t>& adjacency() const { return adjacency_; }

    bool irreducible() const { return irreducible_; }
    // gcd of cycle lengths; 1 means aperiodic.
    std::size_t period() const { return period_; }
    bool aperiodic() const { return period_ == 1; }

    friend TransitionStructure build_transition_structure(const MetricGraph& graph);

private:
    std::vector<std::string> labels_;
    std::vector<std::size_t> tail_;
    std::vector<std::size_t> head_;
    std::vector<std::uint8_t> adjacency_;
    std::vector<std::vector<std::size_t>> successors_;
    bool irreducible_ = false;
    std::size_t period_ = 0;
};

TransitionStructure build_transition_structure(const MetricGraph& graph);

// Oriented closed geodesic, stored as the lexicographically minimal rotation
// of its cyclic symbol word.
struct ClosedGeodesic {
    std::vector<std::size_t> word;
    bool primitive = true;

    std::size_t period() const { return word.size(); }
    friend auto operator<=>(const ClosedGeodesic&, const ClosedGeodesic&) = default;
};

std::vector<std::size_t> canonical_rotation(std::vector<std::size_t> word);
bool is_primitive_word(const std::vector<std::size_t>& word);

inline constexpr double kDefaultEnumerationCap = 2.0e7;

// sum_{p <= max_period} trace(A^p), in floating point.
double predicted_periodic_points(const TransitionStructure& ts, std::size_t max_period);

// All oriented closed geodesics of period <= max_period (powers included),
// ordered by period then word. Throws ResourceLimit when the predicted
// number of periodic points exceeds `cap`.
std::vector<ClosedGeodesic> enumerate_closed_geodesics(const TransitionStructure& ts,
                                                       std::size_t max_period,
                                                       double cap = kDefaultEnumerationCap);

std::vector<ClosedGeodesic> primitive_only(std::vector<ClosedGeodesic> geodesics);

// Number of fixed points of the n-th power of the shift, by enumeration.
std::size_t count_periodic_points(const TransitionStructure& ts, std::size_t n,
                                  double cap = kDefaultEnumerationCap);

ClosedGeodesic reverse_geodesic(const ClosedGeodesic& g);

// Sum of edge lengths along the cycle, with multiplicity.
double geodesic_length(const ClosedGeodesic& g, const MetricGraph& graph);

// Edges outside the spanning tree built greedily in edge order.
// Its size is |E| - |V| + 1.
std::vector<std::size_t> spanning_tree_complement(const MetricGraph& graph);

} // namespace pmetric
