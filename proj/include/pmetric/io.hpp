#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pmetric/graph_core.hpp"
#include "pmetric/hexagon.hpp"

namespace pmetric {

// {"vertices": n, "edges": [[u, v, "name", length], ...]}
MetricGraph parse_graph(std::string_view text, const std::string& origin = "<string>");
MetricGraph load_graph(const std::filesystem::path& path);

// {"genus": g, "boundaries": r, "hexagons": [{"sides": [...], "marked": bool}, ...]}
TriangulationComplex parse_triangulation(std::string_view text, const std::string& origin = "<string>");
TriangulationComplex load_triangulation(const std::filesystem::path& path);

std::string graph_to_json(const MetricGraph& graph);

// Shortest round-trip form is not used: numbers are printed with a fixed
// count of significant digits so outputs diff cleanly.
std::string format_number(double x, int significant_digits);
inline std::string json_number(double x) { return format_number(x, 17); }
inline std::string csv_number(double x) { return format_number(x, 9); }

std::string read_file(const std::filesystem::path& path);
// Write to a sibling temporary file, then rename over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace pmetric
