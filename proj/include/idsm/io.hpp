#pragma once

// Text formats for meshes and fields.
//
// Mesh file:
//   mesh 2d tri
//   nodes N         followed by N lines "x y"
//   triangles M     followed by M lines "i j k"
//   boundary B      followed by B node indices, one per line, counterclockwise
//
// Nodal CSV:     header "node_index,value", one row per node.
// Boundary CSV:  header "boundary_index,arclength,value", one row per boundary node.

#include "idsm/fem.hpp"
#include "idsm/mesh.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace idsm {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
/// Strict parse of a whole string as a double; throws ParseError.
double parse_double(std::string_view s, std::string_view what);
std::uint64_t parse_u64(std::string_view s, std::string_view what);

std::string mesh_to_text(const Mesh& mesh);
Mesh mesh_from_text(std::string_view text);
void write_mesh(const std::filesystem::path& path, const Mesh& mesh);
Mesh read_mesh(const std::filesystem::path& path);

/// FNV-1a 64 of the canonical mesh text.
std::uint64_t mesh_hash(const Mesh& mesh);
std::string hex64(std::uint64_t v);

std::string nodal_csv(const Vector& field);
std::string boundary_csv(const Mesh& mesh, const Vector& field);
void write_nodal_csv(const std::filesystem::path& path, const Vector& field);
void write_boundary_csv(const std::filesystem::path& path, const Mesh& mesh, const Vector& field);
/// Throws ParseError on malformed or truncated input.
Vector read_nodal_csv(const std::filesystem::path& path, std::size_t expected_rows);
Vector read_boundary_csv(const std::filesystem::path& path, std::size_t expected_rows);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace idsm
