#include "pmetric/hexagon.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "pmetric/error.hpp"

namespace pmetric {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kResidualTolerance = 1e-10;

double log_cosh(double x) {
    x = std::abs(x);
    return x + std::log1p(std::exp(-2.0 * x)) - kLn2;
}

// x > 0
double log_sinh(double x) { return x + std::log(-std::expm1(-2.0 * x)) - kLn2; }

double log_add_exp(double u, double v) {
    const double hi = std::max(u, v);
    return hi + std::log1p(std::exp(std::min(u, v) - hi));
}

std::size_t at(std::size_t position, std::size_t shift) { return (position + shift) % 6; }

Mat2 sl2_inverse(const Mat2& g) {
    Mat2 out;
    out << g(1, 1), -g(0, 1), -g(1, 0), g(0, 0);
    return out;
}

std::string side_kind(const std::string& name) { return name.size() > 2 ? name.substr(0, 2) : std::string(); }

} // namespace

double hexagon_side(double a, double b, double c) {
    if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
        throw DomainError("hexagon sides must be positive and finite");
    // log(cosh A - 1), using cosh a + cosh b cosh c - sinh b sinh c = cosh a + cosh(b - c)
    const double log_defect = log_add_exp(log_cosh(a), log_cosh(b - c)) - log_sinh(b) - log_sinh(c);
    // cosh A - 1 = 2 sinh^2(A / 2)
    const double log_half_sinh = 0.5 * (log_defect - kLn2);
    if (log_half_sinh > 700.0) return 2.0 * (log_half_sinh + kLn2);
    return 2.0 * std::asinh(std::exp(log_half_sinh));
}

std::array<double, 3> solve_hexagon(double a, double b, double c) {
    return {hexagon_side(a, b, c), hexagon_side(b, c, a), hexagon_side(c, a, b)};
}

double hexagon_residual(const std::array<double, 6>& sides) {
    double worst = 0.0;
    for (std::size_t q = 0; q < 6; ++q) {
        const double predicted = hexagon_side(sides[at(q, 3)], sides[at(q, 1)], sides[at(q, 5)]);
        worst = std::max(worst, std::abs(predicted - sides[q]) / std::max(1.0, sides[q]));
    }
    return worst;
}

Mat2 translation(double d) {
    Mat2 m;
    m << std::exp(0.5 * d), 0.0, 0.0, std::exp(-0.5 * d);
    return m;
}

Mat2 rotation(double theta) {
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    Mat2 m;
    m << c, s, -s, c;
    return m;
}

double displacement(const Mat2& g) { return std::acosh(std::max(1.0, 0.5 * g.squaredNorm())); }

double translation_length(const Mat2& g) {
    const double tr = std::abs(g.trace());
    // rounding leaves the identity with a trace just above 2
    if (!(tr > 2.0 + 1e-12 * std::max(1.0, g.squaredNorm()))) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "non-hyperbolic element (|trace| = " << tr << ")";
        throw DomainError(msg.str());
    }
    return 2.0 * std::acosh(0.5 * tr);
}

std::array<Mat2, 6> hexagon_frames(const std::array<double, 6>& sides) {
    const Mat2 left = rotation(std::numbers::pi / 2);
    std::array<Mat2, 6> frames;
    frames[0] = Mat2::Identity();
    for (std::size_t k = 0; k + 1 < 6; ++k) frames[k + 1] = frames[k] * translation(sides[k]) * left;
    return frames;
}

Mat2 midpoint_route(const std::array<double, 6>& sides, std::size_t from, std::size_t to) {
    const Mat2 left = rotation(std::numbers::pi / 2);
    const Mat2 right = rotation(-std::numbers::pi / 2);
    const Mat2 turn = rotation(std::numbers::pi);
    if (to == at(from, 2))
        return translation(0.5 * sides[from]) * left * translation(sides[at(from, 1)]) * left *
               translation(0.5 * sides[to]);
    if (to == at(from, 4))
        return turn * translation(0.5 * sides[from]) * right * translation(sides[at(from, 5)]) * right *
               translation(0.5 * sides[to]) * turn;
    throw InvalidInput("midpoint route needs arcs two positions apart");
}

// ---------------------------------------------------------------------------

TriangulationComplex::TriangulationComplex(int genus, int boundaries, std::vector<HexagonRecord> hexagons)
    : genus_(genus), boundaries_(boundaries), hexagons_(std::move(hexagons)) {
    if (genus < 0 || boundaries < 1) throw InvalidInput("surface needs genus >= 0 and at least one boundary");
    const int s = 2 * genus + boundaries - 2;
    if (s < 1) throw InvalidInput("surface has non-negative Euler characteristic");
    if (hexagons_.size() != static_cast<std::size_t>(2 * s))
        throw InvalidInput("expected " + std::to_string(2 * s) + " hexagons for genus " + std::to_string(genus) +
                           " with " + std::to_string(boundaries) + " boundaries, got " +
                           std::to_string(hexagons_.size()));

    std::map<std::string, std::vector<SideRef>, decltype([](const std::string& a, const std::string& b) {
                 return natural_less(a, b);
             })>
        arc_uses, segment_uses;
    for (std::size_t h = 0; h < hexagons_.size(); ++h) {
        const auto& sides = hexagons_[h].sides;
        const std::string first = side_kind(sides[0]);
        for (std::size_t q = 0; q < 6; ++q) {
            const std::string kind = side_kind(sides[q]);
            if (kind != "a:" && kind != "b:")
                throw InvalidInput("hexagon " + std::to_string(h) + " side " + std::to_string(q) + " '" + sides[q] +
                                   "' is neither an arc (a:) nor a boundary segment (b:)");
            if ((kind == first) != (q % 2 == 0))
                throw InvalidInput("hexagon " + std::to_string(h) + " does not alternate arcs and segments");
            (kind == "a:" ? arc_uses : segment_uses)[sides[q]].push_back({h, q});
        }
    }
    for (const auto& [name, uses] : arc_uses) {
        if (uses.size() != 2)
            throw InvalidInput("arc " + name + " appears " + std::to_string(uses.size()) + " times (expected 2)");
        if (uses[0].hexagon == uses[1].hexagon)
            throw InvalidInput("arc " + name + " joins hexagon " + std::to_string(uses[0].hexagon) + " to itself");
        arcs_.push_back(name);
        arc_sides_.push_back({uses[0], uses[1]});
    }
    for (const auto& [name, uses] : segment_uses) {
        if (uses.size() != 1) throw InvalidInput("boundary segment " + name + " appears more than once");
        segments_.push_back(name);
        segment_sides_.push_back(uses[0]);
    }
    if (arcs_.size() != 3 * this->s())
        throw InvalidInput("expected " + std::to_string(3 * this->s()) + " arcs, got " + std::to_string(arcs_.size()));

    try {
        (void)dual_graph();
    } catch (const InvalidInput& e) {
        throw InvalidInput(std::string("dual graph: ") + e.what());
    }

    std::vector<bool> seen(segments_.size(), false);
    for (std::size_t start = 0; start < segments_.size(); ++start) {
        if (seen[start]) continue;
        std::vector<SideRef> cycle;
        SideRef side = segment_sides_[start];
        do {
            const std::size_t k = side_index(side);
            if (seen[k]) throw InvalidInput("boundary segments do not close up into cycles");
            seen[k] = true;
            cycle.push_back(side);
            const SideRef across = glued({side.hexagon, at(side.position, 1)});
            side = {across.hexagon, at(across.position, 1)};
        } while (!(side == segment_sides_[start]));
        cycles_.push_back(std::move(cycle));
    }
    if (cycles_.size() != static_cast<std::size_t>(boundaries))
        throw InvalidInput("gluing produces " + std::to_string(cycles_.size()) + " boundary components, declared " +
                           std::to_string(boundaries));

    const auto marked = marked_hexagons();
    if (!marked.empty() && !has_valid_marking())
        throw InvalidInput("marked hexagons must be " + std::to_string(this->s()) + " pairwise non-adjacent hexagons");
}

std::size_t TriangulationComplex::arc_index(const std::string& name) const {
    const auto it = std::find(arcs_.begin(), arcs_.end(), name);
    if (it == arcs_.end()) throw InvalidInput("unknown arc " + name);
    return static_cast<std::size_t>(it - arcs_.begin());
}

std::size_t TriangulationComplex::segment_index(const std::string& name) const {
    const auto it = std::find(segments_.begin(), segments_.end(), name);
    if (it == segments_.end()) throw InvalidInput("unknown boundary segment " + name);
    return static_cast<std::size_t>(it - segments_.begin());
}

bool TriangulationComplex::is_arc(SideRef side) const {
    return side_kind(hexagons_.at(side.hexagon).sides.at(side.position)) == "a:";
}

std::size_t TriangulationComplex::side_index(SideRef side) const {
    const std::string& name = hexagons_.at(side.hexagon).sides.at(side.position);
    return is_arc(side) ? arc_index(name) : segment_index(name);
}

SideRef TriangulationComplex::glued(SideRef arc_side) const {
    if (!is_arc(arc_side)) throw InvalidInput("only arcs are glued");
    const auto& pair = arc_sides_[side_index(arc_side)];
    return pair[0] == arc_side ? pair[1] : pair[0];
}

MetricGraph TriangulationComplex::dual_graph() const {
    std::vector<Edge> edges;
    for (std::size_t k = 0; k < arcs_.size(); ++k)
        edges.push_back({arc_sides_[k][0].hexagon, arc_sides_[k][1].hexagon, arcs_[k], 1.0});
    return MetricGraph(hexagons_.size(), std::move(edges));
}

std::vector<std::size_t> TriangulationComplex::marked_hexagons() const {
    std::vector<std::size_t> out;
    for (std::size_t h = 0; h < hexagons_.size(); ++h)
        if (hexagons_[h].marked) out.push_back(h);
    return out;
}

bool TriangulationComplex::has_valid_marking() const {
    if (marked_hexagons().size() != s()) return false;
    for (const auto& pair : arc_sides_)
        if (hexagons_[pair[0].hexagon].marked == hexagons_[pair[1].hexagon].marked) return false;
    return true;
}

TriangulationComplex TriangulationComplex::with_marking(const std::vector<std::size_t>& marked) const {
    std::vector<HexagonRecord> hexagons = hexagons_;
    for (auto& h : hexagons) h.marked = false;
    for (std::size_t h : marked) hexagons.at(h).marked = true;
    return TriangulationComplex(genus_, boundaries_, std::move(hexagons));
}

std::vector<std::size_t> TriangulationComplex::marked_segments() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < segments_.size(); ++k)
        if (hexagons_[segment_sides_[k].hexagon].marked) out.push_back(k);
    return out;
}

std::vector<std::size_t> TriangulationComplex::complementary_segments() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < segments_.size(); ++k)
        if (!hexagons_[segment_sides_[k].hexagon].marked) out.push_back(k);
    return out;
}

// ---------------------------------------------------------------------------

IndependentHalf find_independent_set(const std::vector<std::vector<std::size_t>>& adjacency, std::size_t size) {
    const std::size_t n = adjacency.size();
    IndependentHalf out;
    if (size == 0) {
        out.hexagons = std::vector<std::size_t>{};
        return out;
    }
    if (n <= kExactIndependentSetLimit) {
        std::vector<std::uint32_t> closed(n);
        for (std::size_t v = 0; v < n; ++v) {
            closed[v] = std::uint32_t{1} << v;
            for (std::size_t w : adjacency[v]) closed[v] |= std::uint32_t{1} << w;
        }
        std::unordered_map<std::uint32_t, int> memo;
        std::function<int(std::uint32_t)> best = [&](std::uint32_t mask) -> int {
            if (mask == 0) return 0;
            if (auto it = memo.find(mask); it != memo.end()) return it->second;
            const int v = std::countr_zero(mask);
            const int value = std::max(best(mask & ~(std::uint32_t{1} << v)), 1 + best(mask & ~closed[static_cast<std::size_t>(v)]));
            memo.emplace(mask, value);
            return value;
        };
        std::uint32_t mask = (std::uint32_t{1} << n) - 1;
        if (static_cast<std::size_t>(best(mask)) < size) return out;
        std::vector<std::size_t> chosen;
        while (chosen.size() < size) {
            const int v = std::countr_zero(mask);
            const std::uint32_t rest = mask & ~closed[static_cast<std::size_t>(v)];
            if (1 + static_cast<std::size_t>(best(rest)) >= size - chosen.size()) {
                chosen.push_back(static_cast<std::size_t>(v));
                mask = rest;
            } else {
                mask &= ~(std::uint32_t{1} << v);
            }
        }
        out.hexagons = std::move(chosen);
        return out;
    }

    // greedy: repeatedly take a vertex of least remaining degree
    out.exact = false;
    std::vector<bool> alive(n, true);
    std::vector<std::size_t> chosen;
    while (chosen.size() < size) {
        std::size_t pick = n;
        std::size_t pick_degree = n + 1;
        for (std::size_t v = 0; v < n; ++v) {
            if (!alive[v]) continue;
            std::size_t d = 0;
            for (std::size_t w : adjacency[v]) d += alive[w] && w != v ? 1 : 0;
            if (d < pick_degree) {
                pick = v;
                pick_degree = d;
            }
        }
        if (pick == n) return out;
        chosen.push_back(pick);
        alive[pick] = false;
        for (std::size_t w : adjacency[pick]) alive[w] = false;
    }
    std::sort(chosen.begin(), chosen.end());
    out.hexagons = std::move(chosen);
    return out;
}

IndependentHalf find_independent_half(const TriangulationComplex& complex) {
    std::vector<std::vector<std::size_t>> adjacency(complex.hexagons().size());
    for (std::size_t k = 0; k < complex.arcs().size(); ++k) {
        const auto& pair = complex.arc_sides(k);
        adjacency[pair[0].hexagon].push_back(pair[1].hexagon);
        adjacency[pair[1].hexagon].push_back(pair[0].hexagon);
    }
    return find_independent_set(adjacency, complex.s());
}

std::vector<std::size_t> cut_system(const TriangulationComplex& complex) {
    return spanning_tree_complement(complex.dual_graph());
}

// ---------------------------------------------------------------------------

double SurfaceStructure::segment_length(const std::string& name) const {
    return segment_lengths.at(complex.segment_index(name));
}

double SurfaceStructure::ortholength(const std::string& name) const {
    return ortholengths.at(complex.arc_index(name));
}

SurfaceStructure surface_from_coordinates(const TriangulationComplex& complex, const std::vector<double>& coords) {
    if (!complex.has_valid_marking()) throw InvalidInput("triangulation has no valid marking of hexagons");
    const auto marked_segments = complex.marked_segments();
    if (coords.size() != marked_segments.size())
        throw InvalidInput("expected " + std::to_string(marked_segments.size()) + " coordinates, got " +
                           std::to_string(coords.size()));
    for (double x : coords)
        if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("coordinates must be positive and finite");

    SurfaceStructure ss{complex, {}, {}, {}, 0.0, {}, {}, {}};
    const std::size_t n_hex = complex.hexagons().size();
    ss.sides.assign(n_hex, {});
    ss.ortholengths.assign(complex.arcs().size(), 0.0);
    ss.segment_lengths.assign(complex.segments().size(), 0.0);
    for (std::size_t k = 0; k < coords.size(); ++k) {
        const SideRef side = complex.segment_side(marked_segments[k]);
        ss.sides[side.hexagon][side.position] = coords[k];
        ss.segment_lengths[marked_segments[k]] = coords[k];
    }

    auto solve_unknowns = [&](std::size_t h) {
        auto& sides = ss.sides[h];
        std::array<double, 6> solved = sides;
        for (std::size_t q = 0; q < 6; ++q)
            if (sides[q] == 0.0) solved[q] = hexagon_side(sides[at(q, 3)], sides[at(q, 1)], sides[at(q, 5)]);
        sides = solved;
    };
    for (std::size_t h : complex.marked_hexagons()) {
        solve_unknowns(h);
        for (std::size_t q = 0; q < 6; ++q) {
            const SideRef side{h, q};
            if (!complex.is_arc(side)) continue;
            const std::size_t arc = complex.side_index(side);
            ss.ortholengths[arc] = ss.sides[h][q];
            const SideRef other = complex.glued(side);
            ss.sides[other.hexagon][other.position] = ss.sides[h][q];
        }
    }
    for (std::size_t h = 0; h < n_hex; ++h) {
        if (complex.hexagons()[h].marked) continue;
        solve_unknowns(h);
        for (std::size_t q = 0; q < 6; ++q)
            if (!complex.is_arc({h, q})) ss.segment_lengths[complex.side_index({h, q})] = ss.sides[h][q];
    }
    for (std::size_t h = 0; h < n_hex; ++h) {
        const double r = hexagon_residual(ss.sides[h]);
        if (!(r <= kResidualTolerance)) {
            std::ostringstream msg;
            msg << "hexagon " << h << " does not close up (relative residual " << r << ")";
            throw DomainError(msg.str());
        }
        ss.max_residual = std::max(ss.max_residual, r);
    }

    // Lay the hexagons out along the spanning tree, hexagon 0 at the root.
    std::vector<std::array<Mat2, 6>> frames(n_hex);
    for (std::size_t h = 0; h < n_hex; ++h) frames[h] = hexagon_frames(ss.sides[h]);
    const Mat2 turn = rotation(std::numbers::pi);
    // Carries coordinates of the hexagon at `to` into those of `from`.
    auto gluing = [&](SideRef from, SideRef to, double length) -> Mat2 {
        const Mat2 reversed = frames[to.hexagon][to.position] * translation(length) * turn;
        return frames[from.hexagon][from.position] * sl2_inverse(reversed);
    };

    ss.cut_arcs = cut_system(complex);
    std::vector<bool> is_cut(complex.arcs().size(), false);
    for (std::size_t c : ss.cut_arcs) is_cut[c] = true;
    ss.placements.assign(n_hex, Mat2::Identity());
    std::vector<bool> placed(n_hex, false);
    placed[0] = true;
    std::queue<std::size_t> queue;
    queue.push(0);
    while (!queue.empty()) {
        const std::size_t h = queue.front();
        queue.pop();
        for (std::size_t arc = 0; arc < complex.arcs().size(); ++arc) {
            if (is_cut[arc]) continue;
            const auto& pair = complex.arc_sides(arc);
            for (int end = 0; end < 2; ++end) {
                const SideRef here = pair[static_cast<std::size_t>(end)];
                const SideRef there = pair[static_cast<std::size_t>(1 - end)];
                if (here.hexagon != h || placed[there.hexagon]) continue;
                ss.placements[there.hexagon] = ss.placements[h] * gluing(here, there, ss.ortholengths[arc]);
                placed[there.hexagon] = true;
                queue.push(there.hexagon);
            }
        }
    }
    for (std::size_t c : ss.cut_arcs) {
        const auto& pair = complex.arc_sides(c);
        ss.generators.push_back(ss.placements[pair[0].hexagon] * gluing(pair[0], pair[1], ss.ortholengths[c]) *
                                sl2_inverse(ss.placements[pair[1].hexagon]));
    }
    return ss;
}

std::vector<double> coordinates_of(const SurfaceStructure& ss) {
    std::vector<double> out;
    for (std::size_t k : ss.complex.marked_segments()) out.push_back(ss.segment_lengths[k]);
    return out;
}

SurfaceWord word_of_crossings(const SurfaceStructure& ss, const std::vector<ArcCrossing>& crossings) {
    SurfaceWord word;
    for (const ArcCrossing& x : crossings) {
        const auto& pair = ss.complex.arc_sides(x.arc);
        if (x.from_hexagon != pair[0].hexagon && x.from_hexagon != pair[1].hexagon)
            throw InvalidInput("arc " + ss.complex.arcs()[x.arc] + " does not border hexagon " +
                               std::to_string(x.from_hexagon));
        const auto it = std::find(ss.cut_arcs.begin(), ss.cut_arcs.end(), x.arc);
        if (it == ss.cut_arcs.end()) continue;
        word.push_back({static_cast<std::size_t>(it - ss.cut_arcs.begin()), x.from_hexagon != pair[0].hexagon});
    }
    return word;
}

std::vector<ArcCrossing> boundary_crossings(const TriangulationComplex& complex, std::size_t cycle) {
    std::vector<ArcCrossing> out;
    for (const SideRef& side : complex.boundary_cycles().at(cycle)) {
        const SideRef arc{side.hexagon, at(side.position, 1)};
        out.push_back({complex.side_index(arc), side.hexagon});
    }
    return out;
}

SurfaceWord boundary_word(const SurfaceStructure& ss, std::size_t cycle) {
    return word_of_crossings(ss, boundary_crossings(ss.complex, cycle));
}

double boundary_length(const SurfaceStructure& ss, std::size_t cycle) {
    double total = 0.0;
    for (const SideRef& side : ss.complex.boundary_cycles().at(cycle))
        total += ss.segment_lengths[ss.complex.side_index(side)];
    return total;
}

Mat2 holonomy(const SurfaceStructure& ss, const SurfaceWord& word) {
    Mat2 product = Mat2::Identity();
    for (const GeneratorLetter& letter : word) {
        if (letter.generator >= ss.generators.size())
            throw InvalidInput("generator " + std::to_string(letter.generator) + " out of range");
        const Mat2& g = ss.generators[letter.generator];
        product = product * (letter.inverse ? sl2_inverse(g) : g);
    }
    return product;
}

double geodesic_length_of_word(const SurfaceStructure& ss, const SurfaceWord& word) {
    if (word.empty()) throw InvalidInput("empty word");
    return translation_length(holonomy(ss, word));
}

} // namespace pmetric
