#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pmetric/graph_core.hpp"

namespace pmetric {

// Right-angled hexagon with alternate sides a, b, c: the side opposite a.
// Evaluated in log form so that sides of length ~100 neither overflow nor
// lose the small opposite side to cancellation.
double hexagon_side(double a, double b, double c);

// The three sides opposite a, b, c (in that order).
std::array<double, 3> solve_hexagon(double a, double b, double c);

// Largest relative defect of the six opposite-side relations.
double hexagon_residual(const std::array<double, 6>& sides);

// ---------------------------------------------------------------------------
// Isometries of the upper half-plane as SL(2, R) matrices.

using Mat2 = Eigen::Matrix2d;

// Translation by d along the imaginary axis.
Mat2 translation(double d);
// Counter-clockwise rotation by theta about i.
Mat2 rotation(double theta);
// Hyperbolic distance from i to g(i).
double displacement(const Mat2& g);
// 2 arccosh(|tr g| / 2); throws DomainError when |tr g| <= 2.
double translation_length(const Mat2& g);

// Frames at the six vertices of a counter-clockwise hexagon: frame k sits at
// the start of side k and points along it. frames[0] is the identity.
std::array<Mat2, 6> hexagon_frames(const std::array<double, 6>& sides);

// Relative frame between the midpoints of two arcs of one hexagon, two
// positions apart, each frame pointing counter-clockwise along its arc.
Mat2 midpoint_route(const std::array<double, 6>& sides, std::size_t from, std::size_t to);

// ---------------------------------------------------------------------------
// Triangulations

struct SideRef {
    std::size_t hexagon = 0;
    std::size_t position = 0;

    friend bool operator==(const SideRef&, const SideRef&) = default;
};

struct HexagonRecord {
    std::array<std::string, 6> sides;  // counter-clockwise, alternating "b:" segments and "a:" arcs
    bool marked = false;
};

// A bordered surface cut into right-angled hexagons along 3s disjoint arcs.
// Arcs and boundary segments are indexed in natural order of their names.
class TriangulationComplex {
public:
    TriangulationComplex(int genus, int boundaries, std::vector<HexagonRecord> hexagons);

    int genus() const { return genus_; }
    int boundaries() const { return boundaries_; }
    std::size_t s() const { return hexagons_.size() / 2; }

    const std::vector<HexagonRecord>& hexagons() const { return hexagons_; }
    const std::vector<std::string>& arcs() const { return arcs_; }
    const std::vector<std::string>& segments() const { return segments_; }

    // The two occurrences of an arc; the first lies in the lower-numbered hexagon.
    const std::array<SideRef, 2>& arc_sides(std::size_t arc) const { return arc_sides_.at(arc); }
    const SideRef& segment_side(std::size_t segment) const { return segment_sides_.at(segment); }
    std::size_t arc_index(const std::string& name) const;
    std::size_t segment_index(const std::string& name) const;
    // Arc or segment index of a side, depending on its kind.
    std::size_t side_index(SideRef side) const;
    bool is_arc(SideRef side) const;
    SideRef glued(SideRef arc_side) const;

    // Hexagons as vertices, arcs as edges (tail: hexagon of the first
    // occurrence), unit lengths.
    MetricGraph dual_graph() const;

    // Boundary components as cyclic lists of segment sides, surface on the left.
    const std::vector<std::vector<SideRef>>& boundary_cycles() const { return cycles_; }

    std::vector<std::size_t> marked_hexagons() const;
    bool has_valid_marking() const;
    TriangulationComplex with_marking(const std::vector<std::size_t>& marked) const;

    // Segments of marked hexagons (the coordinates), then of complementary ones.
    std::vector<std::size_t> marked_segments() const;
    std::vector<std::size_t> complementary_segments() const;

private:
    int genus_;
    int boundaries_;
    std::vector<HexagonRecord> hexagons_;
    std::vector<std::string> arcs_;
    std::vector<std::string> segments_;
    std::vector<std::array<SideRef, 2>> arc_sides_;
    std::vector<SideRef> segment_sides_;
    std::vector<std::vector<SideRef>> cycles_;
};

struct IndependentHalf {
    std::optional<std::vector<std::size_t>> hexagons;
    bool exact = true;  // false when the greedy fallback was used
};

inline constexpr std::size_t kExactIndependentSetLimit = 24;

// An independent set of `size` vertices in a simple graph given by adjacency
// lists, or nothing.
IndependentHalf find_independent_set(const std::vector<std::vector<std::size_t>>& adjacency, std::size_t size);
IndependentHalf find_independent_half(const TriangulationComplex& complex);

// Arcs outside the spanning tree of the dual graph built in arc order.
std::vector<std::size_t> cut_system(const TriangulationComplex& complex);

struct GeneratorLetter {
    std::size_t generator = 0;
    bool inverse = false;

    friend bool operator==(const GeneratorLetter&, const GeneratorLetter&) = default;
};
using SurfaceWord = std::vector<GeneratorLetter>;

struct SurfaceStructure {
    TriangulationComplex complex;
    std::vector<std::array<double, 6>> sides;  // per hexagon
    std::vector<double> ortholengths;           // per arc
    std::vector<double> segment_lengths;        // per segment: b for marked, b^c otherwise
    double max_residual = 0.0;

    std::vector<std::size_t> cut_arcs;  // generator k belongs to cut_arcs[k]
    std::vector<Mat2> generators;
    std::vector<Mat2> placements;       // hexagon coordinates -> root coordinates along the tree

    double segment_length(const std::string& name) const;
    double ortholength(const std::string& name) const;
};

// coords[k] is the length of marked_segments()[k].
SurfaceStructure surface_from_coordinates(const TriangulationComplex& complex, const std::vector<double>& coords);
std::vector<double> coordinates_of(const SurfaceStructure& ss);

// Crossings of arcs as the word in the generators. A crossing is an arc and
// the hexagon it is entered from.
struct ArcCrossing {
    std::size_t arc = 0;
    std::size_t from_hexagon = 0;
};
SurfaceWord word_of_crossings(const SurfaceStructure& ss, const std::vector<ArcCrossing>& crossings);

std::vector<ArcCrossing> boundary_crossings(const TriangulationComplex& complex, std::size_t cycle);
SurfaceWord boundary_word(const SurfaceStructure& ss, std::size_t cycle);
double boundary_length(const SurfaceStructure& ss, std::size_t cycle);

Mat2 holonomy(const SurfaceStructure& ss, const SurfaceWord& word);
double geodesic_length_of_word(const SurfaceStructure& ss, const SurfaceWord& word);

} // namespace pmetric
