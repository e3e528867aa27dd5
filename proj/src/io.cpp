#include "pmetric/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"

#include "pmetric/error.hpp"

namespace pmetric {

namespace {

using nlohmann::json;

json parse_json(std::string_view text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
}

[[noreturn]] void fail(const std::string& origin, const std::string& where, const std::string& what) {
    throw ParseError(origin + ": " + where + ": " + what);
}

const json& member(const json& doc, const char* key, const std::string& origin) {
    if (!doc.is_object()) fail(origin, "/", "expected an object");
    const auto it = doc.find(key);
    if (it == doc.end()) fail(origin, std::string("/") + key, "missing");
    return *it;
}

long long as_integer(const json& value, const std::string& origin, const std::string& where) {
    if (!value.is_number_integer()) fail(origin, where, "expected an integer");
    return value.get<long long>();
}

} // namespace

MetricGraph parse_graph(std::string_view text, const std::string& origin) {
    const json doc = parse_json(text, origin);
    const long long n = as_integer(member(doc, "vertices", origin), origin, "/vertices");
    if (n < 1) fail(origin, "/vertices", "must be positive");
    const json& edges = member(doc, "edges", origin);
    if (!edges.is_array()) fail(origin, "/edges", "expected an array");
    std::vector<Edge> out;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const std::string where = "/edges/" + std::to_string(i);
        const json& e = edges[i];
        if (!e.is_array() || e.size() != 4) fail(origin, where, "expected [tail, head, \"name\", length]");
        const long long u = as_integer(e[0], origin, where + "/0");
        const long long v = as_integer(e[1], origin, where + "/1");
        if (u < 0 || u >= n) fail(origin, where + "/0", "endpoint out of range");
        if (v < 0 || v >= n) fail(origin, where + "/1", "endpoint out of range");
        if (!e[2].is_string()) fail(origin, where + "/2", "expected a string identifier");
        if (!e[3].is_number()) fail(origin, where + "/3", "expected a number");
        const double length = e[3].get<double>();
        if (!(length > 0.0) || !std::isfinite(length)) fail(origin, where + "/3", "non-positive length");
        out.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v), e[2].get<std::string>(), length});
    }
    try {
        return MetricGraph(static_cast<std::size_t>(n), std::move(out));
    } catch (const InvalidInput& e) {
        throw InvalidInput(origin + ": " + e.what());
    }
}

MetricGraph load_graph(const std::filesystem::path& path) { return parse_graph(read_file(path), path.string()); }

TriangulationComplex parse_triangulation(std::string_view text, const std::string& origin) {
    const json doc = parse_json(text, origin);
    const long long genus = as_integer(member(doc, "genus", origin), origin, "/genus");
    const long long boundaries = as_integer(member(doc, "boundaries", origin), origin, "/boundaries");
    const json& hexagons = member(doc, "hexagons", origin);
    if (!hexagons.is_array()) fail(origin, "/hexagons", "expected an array");
    std::vector<HexagonRecord> records;
    for (std::size_t h = 0; h < hexagons.size(); ++h) {
        const std::string where = "/hexagons/" + std::to_string(h);
        const json& sides = member(hexagons[h], "sides", origin);
        if (!sides.is_array() || sides.size() != 6) fail(origin, where + "/sides", "expected six side names");
        HexagonRecord record;
        for (std::size_t q = 0; q < 6; ++q) {
            if (!sides[q].is_string()) fail(origin, where + "/sides/" + std::to_string(q), "expected a string");
            record.sides[q] = sides[q].get<std::string>();
        }
        if (const auto it = hexagons[h].find("marked"); it != hexagons[h].end()) {
            if (!it->is_boolean()) fail(origin, where + "/marked", "expected a boolean");
            record.marked = it->get<bool>();
        }
        records.push_back(std::move(record));
    }
    try {
        return TriangulationComplex(static_cast<int>(genus), static_cast<int>(boundaries), std::move(records));
    } catch (const InvalidInput& e) {
        throw InvalidInput(origin + ": " + e.what());
    }
}

TriangulationComplex load_triangulation(const std::filesystem::path& path) {
    return parse_triangulation(read_file(path), path.string());
}

std::string graph_to_json(const MetricGraph& graph) {
    std::ostringstream out;
    out << "{\n  \"vertices\": " << graph.vertex_count() << ",\n  \"edges\": [";
    for (std::size_t i = 0; i < graph.edge_count(); ++i) {
        const Edge& e = graph.edge(i);
        out << (i ? ",\n    " : "\n    ") << "[" << e.tail << ", " << e.head << ", " << json(e.name).dump() << ", "
            << json_number(e.length) << "]";
    }
    out << "\n  ]\n}\n";
    return out.str();
}

std::string format_number(double x, int significant_digits) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buffer[64];
    const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, x, std::chars_format::general, significant_digits);
    if (ec != std::errc()) throw Error("number formatting failed");
    return std::string(buffer, end);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string() + ": cannot open");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ParseError(tmp.string() + ": cannot open for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw ParseError(tmp.string() + ": write failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw ParseError(path.string() + ": cannot replace (" + ec.message() + ")");
    }
}

} // namespace pmetric
