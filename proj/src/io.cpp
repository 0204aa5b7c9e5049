#include "idsm/io.hpp"

#include "idsm/errors.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace idsm {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = end + 1;
    }
    return lines;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t p = s.find(sep, start);
        out.push_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
        if (p == std::string_view::npos) break;
        start = p + 1;
    }
    return out;
}

std::vector<std::string_view> words(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

long parse_long(std::string_view s, std::string_view what) {
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ParseError(std::string(what) + ": expected an integer, got '" + std::string(s) + "'");
    return v;
}

Vector read_csv(const std::filesystem::path& path, std::size_t expected_rows, std::string_view header, std::size_t columns) {
    const std::string text = read_text(path);
    const auto lines = split_lines(text);
    const std::string where = path.string();
    if (lines.empty() || lines[0] != header) throw ParseError(where + ": missing header '" + std::string(header) + "'");
    std::vector<double> values;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        if (lines[r].empty()) continue;
        const auto cells = split(lines[r], ',');
        if (cells.size() != columns) throw ParseError(where + ": line " + std::to_string(r + 1) + " has wrong column count");
        const long idx = parse_long(cells[0], where);
        if (idx != static_cast<long>(values.size()))
            throw ParseError(where + ": line " + std::to_string(r + 1) + " has index " + std::to_string(idx));
        values.push_back(parse_double(cells.back(), where));
    }
    if (values.size() != expected_rows)
        throw ParseError(where + ": expected " + std::to_string(expected_rows) + " rows, found " + std::to_string(values.size()));
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf.data(), p);
}

double parse_double(std::string_view s, std::string_view what) {
    double v = 0.0;
    const char* b = s.data();
    if (!s.empty() && s.front() == '+') ++b;
    auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size())
        throw ParseError(std::string(what) + ": expected a number, got '" + std::string(s) + "'");
    return v;
}

std::uint64_t parse_u64(std::string_view s, std::string_view what) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size())
        throw ParseError(std::string(what) + ": expected an unsigned integer, got '" + std::string(s) + "'");
    return v;
}

std::string mesh_to_text(const Mesh& mesh) {
    std::string out = "mesh 2d tri\nnodes " + std::to_string(mesh.node_count()) + "\n";
    for (const Vec2& p : mesh.nodes()) out += format_double(p.x) + " " + format_double(p.y) + "\n";
    out += "triangles " + std::to_string(mesh.triangle_count()) + "\n";
    for (const Triangle& t : mesh.triangles())
        out += std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
    out += "boundary " + std::to_string(mesh.boundary_count()) + "\n";
    for (int b : mesh.boundary_nodes()) out += std::to_string(b) + "\n";
    return out;
}

Mesh mesh_from_text(std::string_view text) {
    const auto lines = split_lines(text);
    std::size_t li = 0;
    auto next = [&](std::string_view what) -> std::vector<std::string_view> {
        while (li < lines.size() && words(lines[li]).empty()) ++li;
        if (li >= lines.size()) throw ParseError("mesh: unexpected end of file, expected " + std::string(what));
        return words(lines[li++]);
    };
    auto header = [&](std::string_view key) {
        const auto w = next(key);
        if (w.size() != 2 || w[0] != key) throw ParseError("mesh: expected '" + std::string(key) + " <count>' at line " + std::to_string(li));
        const long n = parse_long(w[1], "mesh");
        if (n < 0) throw ParseError("mesh: negative count");
        return static_cast<std::size_t>(n);
    };
    const auto magic = next("header");
    if (magic.size() != 3 || magic[0] != "mesh" || magic[1] != "2d" || magic[2] != "tri")
        throw ParseError("mesh: missing 'mesh 2d tri' header");
    std::vector<Vec2> nodes(header("nodes"));
    for (auto& p : nodes) {
        const auto w = next("node");
        if (w.size() != 2) throw ParseError("mesh: node line " + std::to_string(li) + " needs two coordinates");
        p = {parse_double(w[0], "mesh"), parse_double(w[1], "mesh")};
    }
    std::vector<Triangle> tris(header("triangles"));
    for (auto& t : tris) {
        const auto w = next("triangle");
        if (w.size() != 3) throw ParseError("mesh: triangle line " + std::to_string(li) + " needs three indices");
        for (int k = 0; k < 3; ++k) t[static_cast<std::size_t>(k)] = static_cast<int>(parse_long(w[static_cast<std::size_t>(k)], "mesh"));
    }
    std::vector<int> boundary(header("boundary"));
    for (auto& b : boundary) {
        const auto w = next("boundary node");
        if (w.size() != 1) throw ParseError("mesh: boundary line " + std::to_string(li) + " needs one index");
        b = static_cast<int>(parse_long(w[0], "mesh"));
    }
    return Mesh(std::move(nodes), std::move(tris), std::move(boundary));
}

void write_mesh(const std::filesystem::path& path, const Mesh& mesh) { write_text(path, mesh_to_text(mesh)); }
Mesh read_mesh(const std::filesystem::path& path) { return mesh_from_text(read_text(path)); }

std::uint64_t mesh_hash(const Mesh& mesh) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : mesh_to_text(mesh)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

std::string nodal_csv(const Vector& field) {
    std::string out = "node_index,value\n";
    for (Eigen::Index i = 0; i < field.size(); ++i) out += std::to_string(i) + "," + format_double(field[i]) + "\n";
    return out;
}

std::string boundary_csv(const Mesh& mesh, const Vector& field) {
    if (static_cast<std::size_t>(field.size()) != mesh.boundary_count()) throw DimensionError("boundary_csv: size mismatch");
    std::string out = "boundary_index,arclength,value\n";
    for (Eigen::Index i = 0; i < field.size(); ++i)
        out += std::to_string(i) + "," + format_double(mesh.arclength()[static_cast<std::size_t>(i)]) + "," +
               format_double(field[i]) + "\n";
    return out;
}

void write_nodal_csv(const std::filesystem::path& path, const Vector& field) { write_text(path, nodal_csv(field)); }
void write_boundary_csv(const std::filesystem::path& path, const Mesh& mesh, const Vector& field) {
    write_text(path, boundary_csv(mesh, field));
}

Vector read_nodal_csv(const std::filesystem::path& path, std::size_t expected_rows) {
    return read_csv(path, expected_rows, "node_index,value", 2);
}

Vector read_boundary_csv(const std::filesystem::path& path, std::size_t expected_rows) {
    return read_csv(path, expected_rows, "boundary_index,arclength,value", 3);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace idsm
