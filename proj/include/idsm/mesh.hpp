#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace idsm {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 a);

using Triangle = std::array<int, 3>;

/// Ellipse x^2/a^2 + y^2/b^2 < 1 meshed with target edge length h.
struct DomainSpec {
    double semi_axis_a = 1.0;
    double semi_axis_b = 0.8;
    double edge_length = 0.04;

    /// Throws InvalidDomainError unless a, b, h > 0 and h < min(a, b).
    void validate() const;
};

/// Conforming triangulation with a single closed counterclockwise boundary.
///
/// The boundary is stored as an ordered list of node indices; boundary edge i
/// joins boundary_nodes[i] and boundary_nodes[(i+1) % B]. Arclength is measured
/// along the polyline starting at boundary_nodes[0].
class Mesh {
public:
    Mesh() = default;
    /// Validates the triangulation; throws MeshError on any violation.
    Mesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles, std::vector<int> boundary_nodes);

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t triangle_count() const { return triangles_.size(); }
    std::size_t boundary_count() const { return boundary_nodes_.size(); }

    const std::vector<Vec2>& nodes() const { return nodes_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }
    std::vector<std::array<int, 2>> boundary_edges() const;
    const std::vector<double>& arclength() const { return arclength_; }
    double boundary_length() const { return boundary_length_; }

    /// Position of node in boundary_nodes, or -1 for interior nodes.
    int boundary_index(int node) const { return boundary_index_[static_cast<std::size_t>(node)]; }
    bool is_boundary(int node) const { return boundary_index(node) >= 0; }

    double triangle_area(std::size_t t) const;
    /// Length of boundary edge i (from boundary node i to i+1).
    double boundary_edge_length(std::size_t i) const;
    /// Lumped (row-sum) mass: one third of the area of every incident triangle.
    const std::vector<double>& lumped_mass() const { return lumped_mass_; }
    double area() const;
    double max_edge_length() const;

    /// Re-runs all validity checks.
    void validate() const;

private:
    std::vector<Vec2> nodes_;
    std::vector<Triangle> triangles_;
    std::vector<int> boundary_nodes_;
    std::vector<int> boundary_index_;
    std::vector<double> arclength_;
    std::vector<double> lumped_mass_;
    double boundary_length_ = 0.0;
};

/// Ring triangulation of the unit disk mapped onto the ellipse, followed by
/// five Laplacian smoothing passes with boundary nodes pinned. Boundary node 0
/// sits at (a, 0) and the boundary runs counterclockwise.
Mesh build_ellipse_mesh(const DomainSpec& spec);

/// Euclidean distance from every node to the boundary polyline.
std::vector<double> distance_to_boundary(const Mesh& mesh);

/// Closest point on segment [p, q] to x, as the segment parameter in [0, 1].
double project_to_segment(Vec2 x, Vec2 p, Vec2 q);

/// Triangle lookup on a uniform bucket grid.
class PointLocator {
public:
    explicit PointLocator(const Mesh& mesh);

    struct Hit {
        int triangle = -1;
        std::array<double, 3> barycentric{};
    };
    /// Containing triangle (tolerance applies to barycentric coordinates scaled
    /// by the local length scale); triangle == -1 when none is found.
    Hit locate(Vec2 p, double tolerance) const;

private:
    const Mesh* mesh_;
    double x0_ = 0, y0_ = 0, cell_ = 1;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> buckets_;
};

/// P1 interpolation of a nodal field from `source` to the nodes of `target`.
/// Throws OutOfDomainError for target nodes farther than 1e-10 from the source mesh.
std::vector<double> interpolate(const Mesh& source, std::span<const double> field, const Mesh& target);

}  // namespace idsm
