#include "pmetric/graph_core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "pmetric/error.hpp"

namespace pmetric {

bool natural_less(std::string_view a, std::string_view b) {
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() && j < b.size()) {
        const bool da = std::isdigit(static_cast<unsigned char>(a[i])) != 0;
        const bool db = std::isdigit(static_cast<unsigned char>(b[j])) != 0;
        if (da && db) {
            std::size_t ei = i;
            std::size_t ej = j;
            while (ei < a.size() && std::isdigit(static_cast<unsigned char>(a[ei]))) ++ei;
            while (ej < b.size() && std::isdigit(static_cast<unsigned char>(b[ej]))) ++ej;
            // strip leading zeros, then compare by length and digits
            std::size_t si = i;
            std::size_t sj = j;
            while (si + 1 < ei && a[si] == '0') ++si;
            while (sj + 1 < ej && b[sj] == '0') ++sj;
            if (ei - si != ej - sj) return ei - si < ej - sj;
            const int c = a.substr(si, ei - si).compare(b.substr(sj, ej - sj));
            if (c != 0) return c < 0;
            i = ei;
            j = ej;
            continue;
        }
        if (a[i] != b[j]) return a[i] < b[j];
        ++i;
        ++j;
    }
    return a.size() - i < b.size() - j;
}

namespace {

void validate(std::size_t vertex_count, const std::vector<Edge>& edges) {
    if (vertex_count == 0) throw InvalidInput("graph has no vertices");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const Edge& e = edges[i];
        if (e.tail >= vertex_count || e.head >= vertex_count)
            throw InvalidInput("edges[" + std::to_string(i) + "] (" + e.name + "): endpoint out of range");
        if (!(e.length > 0.0) || !std::isfinite(e.length))
            throw InvalidInput("edges[" + std::to_string(i) + "] (" + e.name + "): non-positive length");
        if (i > 0 && !natural_less(edges[i - 1].name, e.name))
            throw InvalidInput("edges[" + std::to_string(i) + "] (" + e.name + "): duplicate edge identifier");
    }
    std::vector<std::size_t> valence(vertex_count, 0);
    for (const Edge& e : edges) {
        ++valence[e.tail];
        ++valence[e.head];
    }
    for (std::size_t v = 0; v < vertex_count; ++v) {
        if (valence[v] < 3)
            throw InvalidInput("vertex " + std::to_string(v) + ": valence below 3 (valence " +
                               std::to_string(valence[v]) + ")");
    }
    // connectivity
    std::vector<std::size_t> parent(vertex_count);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::size_t components = vertex_count;
    for (const Edge& e : edges) {
        const std::size_t a = find(e.tail);
        const std::size_t b = find(e.head);
        if (a != b) {
            parent[a] = b;
            --components;
        }
    }
    if (components != 1)
        throw InvalidInput("graph is disconnected (" + std::to_string(components) + " components)");
}

} // namespace

MetricGraph::MetricGraph(std::size_t vertex_count, std::vector<Edge> edges)
    : vertex_count_(vertex_count), edges_(std::move(edges)) {
    std::stable_sort(edges_.begin(), edges_.end(),
                     [](const Edge& a, const Edge& b) { return natural_less(a.name, b.name); });
    validate(vertex_count_, edges_);
}

std::vector<double> MetricGraph::lengths() const {
    std::vector<double> out;
    out.reserve(edges_.size());
    for (const Edge& e : edges_) out.push_back(e.length);
    return out;
}

double MetricGraph::volume() const {
    double v = 0.0;
    for (const Edge& e : edges_) v += e.length;
    return v;
}

std::size_t MetricGraph::edge_index(std::string_view name) const {
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        if (edges_[i].name == name) return i;
    }
    throw InvalidInput("unknown edge identifier '" + std::string(name) + "'");
}

std::size_t MetricGraph::valence(std::size_t vertex) const {
    std::size_t n = 0;
    for (const Edge& e : edges_) {
        if (e.tail == vertex) ++n;
        if (e.head == vertex) ++n;
    }
    return n;
}

MetricGraph MetricGraph::with_lengths(const std::vector<double>& lengths) const {
    if (lengths.size() != edges_.size())
        throw InvalidInput("expected " + std::to_string(edges_.size()) + " lengths, got " +
                           std::to_string(lengths.size()));
    std::vector<Edge> edges = edges_;
    for (std::size_t i = 0; i < edges.size(); ++i) edges[i].length = lengths[i];
    return MetricGraph(vertex_count_, std::move(edges));
}

std::size_t TransitionStructure::symbol_index(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == label) return i;
    }
    throw InvalidInput("unknown directed edge '" + std::string(label) + "'");
}

namespace {

// Reachability from symbol 0 in the graph and in its transpose, then the
// period as the gcd of level differences along every transition.
void classify(const std::vector<std::vector<std::size_t>>& succ, bool& irreducible, std::size_t& period) {
    const std::size_t n = succ.size();
    std::vector<std::vector<std::size_t>> pred(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j : succ[i]) pred[j].push_back(i);

    auto bfs = [n](const std::vector<std::vector<std::size_t>>& adj, std::vector<long>& level) {
        level.assign(n, -1);
        std::queue<std::size_t> q;
        level[0] = 0;
        q.push(0);
        std::size_t seen = 1;
        while (!q.empty()) {
            const std::size_t u = q.front();
            q.pop();
            for (std::size_t v : adj[u]) {
                if (level[v] < 0) {
                    level[v] = level[u] + 1;
                    ++seen;
                    q.push(v);
                }
            }
        }
        return seen;
    };
    std::vector<long> level;
    std::vector<long> back;
    irreducible = bfs(succ, level) == n && bfs(pred, back) == n;
    if (!irreducible) {
        period = 0;
        return;
    }
    long g = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j : succ[i]) g = std::gcd(g, std::labs(level[i] + 1 - level[j]));
    period = static_cast<std::size_t>(g);
}

} // namespace

TransitionStructure build_transition_structure(const MetricGraph& graph) {
    TransitionStructure ts;
    const std::size_t n = 2 * graph.edge_count();
    ts.labels_.resize(n);
    ts.tail_.resize(n);
    ts.head_.resize(n);
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        const Edge& edge = graph.edge(e);
        ts.labels_[2 * e] = "+" + edge.name;
        ts.labels_[2 * e + 1] = "-" + edge.name;
        ts.tail_[2 * e] = edge.tail;
        ts.head_[2 * e] = edge.head;
        ts.tail_[2 * e + 1] = edge.head;
        ts.head_[2 * e + 1] = edge.tail;
    }
    ts.adjacency_.assign(n * n, 0);
    ts.successors_.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (ts.head_[i] == ts.tail_[j] && j != reversal_of(i)) {
                ts.adjacency_[i * n + j] = 1;
                ts.successors_[i].push_back(j);
            }
        }
        if (ts.successors_[i].size() < 2)
            throw InvalidInput("directed edge " + ts.labels_[i] + " has fewer than two successors");
    }
    classify(ts.successors_, ts.irreducible_, ts.period_);
    return ts;
}

std::vector<std::size_t> canonical_rotation(std::vector<std::size_t> word) {
    if (word.empty()) return word;
    std::vector<std::size_t> best = word;
    for (std::size_t r = 1; r < word.size(); ++r) {
        std::rotate(word.begin(), word.begin() + 1, word.end());
        if (word < best) best = word;
    }
    return best;
}

bool is_primitive_word(const std::vector<std::size_t>& word) {
    const std::size_t p = word.size();
    for (std::size_t d = 1; d < p; ++d) {
        if (p % d != 0) continue;
        bool repeats = true;
        for (std::size_t i = d; i < p && repeats; ++i) repeats = word[i] == word[i - d];
        if (repeats) return false;
    }
    return true;
}

double predicted_periodic_points(const TransitionStructure& ts, std::size_t max_period) {
    const std::size_t n = ts.size();
    std::vector<double> power(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) power[i * n + i] = 1.0;
    std::vector<double> next(n * n);
    double total = 0.0;
    for (std::size_t p = 1; p <= max_period; ++p) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) {
                const double v = power[i * n + k];
                if (v == 0.0) continue;
                for (std::size_t j : ts.successors(k)) next[i * n + j] += v;
            }
        power.swap(next);
        for (std::size_t i = 0; i < n; ++i) total += power[i * n + i];
        if (!std::isfinite(total)) return total;
    }
    return total;
}

namespace {

void guard(const TransitionStructure& ts, std::size_t max_period, double cap) {
    const double predicted = predicted_periodic_points(ts, max_period);
    if (predicted > cap)
        throw ResourceLimit("enumeration up to period " + std::to_string(max_period) + " predicts " +
                            std::to_string(predicted) + " periodic points (cap " + std::to_string(cap) + ")");
}

} // namespace

std::vector<ClosedGeodesic> enumerate_closed_geodesics(const TransitionStructure& ts, std::size_t max_period,
                                                       double cap) {
    std::vector<ClosedGeodesic> out;
    if (max_period == 0) return out;
    guard(ts, max_period, cap);

    // Depth-first search over words whose first symbol is their minimum;
    // a closed word is kept when it equals its own minimal rotation.
    std::vector<std::size_t> word;
    word.reserve(max_period);
    auto emit_if_canonical = [&]() {
        if (canonical_rotation(word) == word) out.push_back({word, is_primitive_word(word)});
    };
    auto dfs = [&](auto&& self, std::size_t start) -> void {
        const std::size_t last = word.back();
        if (ts.allowed(last, start)) emit_if_canonical();
        if (word.size() == max_period) return;
        for (std::size_t next : ts.successors(last)) {
            if (next < start) continue;
            word.push_back(next);
            self(self, start);
            word.pop_back();
        }
    };
    for (std::size_t s = 0; s < ts.size(); ++s) {
        word.assign(1, s);
        dfs(dfs, s);
    }
    std::sort(out.begin(), out.end(), [](const ClosedGeodesic& a, const ClosedGeodesic& b) {
        if (a.period() != b.period()) return a.period() < b.period();
        return a.word < b.word;
    });
    return out;
}

std::vector<ClosedGeodesic> primitive_only(std::vector<ClosedGeodesic> geodesics) {
    std::erase_if(geodesics, [](const ClosedGeodesic& g) { return !g.primitive; });
    return geodesics;
}

std::size_t count_periodic_points(const TransitionStructure& ts, std::size_t n, double cap) {
    if (n == 0) return 0;
    guard(ts, n, cap);
    std::size_t count = 0;
    auto dfs = [&](auto&& self, std::size_t start, std::size_t last, std::size_t depth) -> void {
        if (depth == n) {
            if (ts.allowed(last, start)) ++count;
            return;
        }
        for (std::size_t next : ts.successors(last)) self(self, start, next, depth + 1);
    };
    for (std::size_t s = 0; s < ts.size(); ++s) dfs(dfs, s, s, 1);
    return count;
}

ClosedGeodesic reverse_geodesic(const ClosedGeodesic& g) {
    std::vector<std::size_t> word(g.word.rbegin(), g.word.rend());
    for (auto& s : word) s = reversal_of(s);
    return {canonical_rotation(std::move(word)), g.primitive};
}

double geodesic_length(const ClosedGeodesic& g, const MetricGraph& graph) {
    if (g.word.empty()) throw InvalidInput("closed geodesic has an empty word");
    const std::size_t p = g.word.size();
    double total = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        const std::size_t s = g.word[i];
        const std::size_t t = g.word[(i + 1) % p];
        if (s / 2 >= graph.edge_count() || t / 2 >= graph.edge_count())
            throw InvalidInput("closed geodesic refers to a directed edge outside the graph");
        const Edge& e = graph.edge(s / 2);
        const Edge& f = graph.edge(t / 2);
        const std::size_t head = s % 2 == 0 ? e.head : e.tail;
        const std::size_t tail = t % 2 == 0 ? f.tail : f.head;
        if (head != tail || t == reversal_of(s))
            throw InvalidInput("closed geodesic is not admissible at position " + std::to_string(i));
        total += e.length;
    }
    return total;
}

std::vector<std::size_t> spanning_tree_complement(const MetricGraph& graph) {
    std::vector<std::size_t> parent(graph.vertex_count());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<std::size_t> cut;
    for (std::size_t i = 0; i < graph.edge_count(); ++i) {
        const std::size_t a = find(graph.edge(i).tail);
        const std::size_t b = find(graph.edge(i).head);
        if (a == b) {
            cut.push_back(i);
        } else {
            parent[a] = b;
        }
    }
    return cut;
}

} // namespace pmetric
