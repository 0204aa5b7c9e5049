#include "idsm/mesh.hpp"

#include "idsm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

namespace idsm {

double norm(Vec2 a) { return std::hypot(a.x, a.y); }

void DomainSpec::validate() const {
    const double a = semi_axis_a, b = semi_axis_b, h = edge_length;
    if (!(a > 0.0) || !(b > 0.0) || !(h > 0.0) || !std::isfinite(a) || !std::isfinite(b) ||
        !std::isfinite(h))
        throw InvalidDomainError("domain: semi-axes and edge length must be positive and finite");
    if (!(h < std::min(a, b)))
        throw InvalidDomainError("domain: edge length must be smaller than both semi-axes");
}

Mesh::Mesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles, std::vector<int> boundary_nodes)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)), boundary_nodes_(std::move(boundary_nodes)) {
    const std::size_t n = nodes_.size();
    if (n < 3 || triangles_.empty() || boundary_nodes_.size() < 3) throw MeshError("mesh: too small");
    for (const auto& t : triangles_)
        for (int v : t)
            if (v < 0 || static_cast<std::size_t>(v) >= n) throw MeshError("mesh: triangle index out of range");
    boundary_index_.assign(n, -1);
    for (std::size_t i = 0; i < boundary_nodes_.size(); ++i) {
        const int v = boundary_nodes_[i];
        if (v < 0 || static_cast<std::size_t>(v) >= n) throw MeshError("mesh: boundary index out of range");
        if (boundary_index_[static_cast<std::size_t>(v)] >= 0) throw MeshError("mesh: boundary polyline is not simple");
        boundary_index_[static_cast<std::size_t>(v)] = static_cast<int>(i);
    }
    const std::size_t nb = boundary_nodes_.size();
    arclength_.resize(nb);
    double s = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
        arclength_[i] = s;
        s += boundary_edge_length(i);
    }
    boundary_length_ = s;
    lumped_mass_.assign(n, 0.0);
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        const double a3 = triangle_area(t) / 3.0;
        for (int v : triangles_[t]) lumped_mass_[static_cast<std::size_t>(v)] += a3;
    }
    validate();
}

std::vector<std::array<int, 2>> Mesh::boundary_edges() const {
    std::vector<std::array<int, 2>> e(boundary_nodes_.size());
    for (std::size_t i = 0; i < e.size(); ++i)
        e[i] = {boundary_nodes_[i], boundary_nodes_[(i + 1) % boundary_nodes_.size()]};
    return e;
}

double Mesh::triangle_area(std::size_t t) const {
    const auto& tri = triangles_[t];
    const Vec2 p0 = nodes_[static_cast<std::size_t>(tri[0])];
    const Vec2 p1 = nodes_[static_cast<std::size_t>(tri[1])];
    const Vec2 p2 = nodes_[static_cast<std::size_t>(tri[2])];
    return 0.5 * cross(p1 - p0, p2 - p0);
}

double Mesh::boundary_edge_length(std::size_t i) const {
    const auto nb = boundary_nodes_.size();
    return norm(nodes_[static_cast<std::size_t>(boundary_nodes_[(i + 1) % nb])] -
                nodes_[static_cast<std::size_t>(boundary_nodes_[i])]);
}

double Mesh::area() const {
    double a = 0.0;
    for (std::size_t t = 0; t < triangles_.size(); ++t) a += triangle_area(t);
    return a;
}

double Mesh::max_edge_length() const {
    double m = 0.0;
    for (const auto& t : triangles_)
        for (int k = 0; k < 3; ++k)
            m = std::max(m, norm(nodes_[static_cast<std::size_t>(t[k])] -
                                 nodes_[static_cast<std::size_t>(t[(k + 1) % 3])]));
    return m;
}

void Mesh::validate() const {
    for (std::size_t t = 0; t < triangles_.size(); ++t)
        if (!(triangle_area(t) > 0.0))
            throw MeshError("mesh: triangle " + std::to_string(t) + " has non-positive signed area");

    // Oriented edge -> count. An interior edge shows up once in each direction,
    // a boundary edge exactly once in the counterclockwise direction.
    std::map<std::pair<int, int>, int> directed;
    for (const auto& t : triangles_)
        for (int k = 0; k < 3; ++k) {
            auto key = std::make_pair(t[k], t[(k + 1) % 3]);
            if (++directed[key] > 1) throw MeshError("mesh: edge used twice with the same orientation");
        }
    std::size_t unmatched = 0;
    for (const auto& [e, c] : directed) {
        if (directed.count({e.second, e.first}) == 0) {
            ++unmatched;
            const int bi = boundary_index_[static_cast<std::size_t>(e.first)];
            const int bj = boundary_index_[static_cast<std::size_t>(e.second)];
            const int nb = static_cast<int>(boundary_nodes_.size());
            if (bi < 0 || bj < 0 || (bi + 1) % nb != bj)
                throw MeshError("mesh: free edge is not on the counterclockwise boundary polyline");
        }
    }
    if (unmatched != boundary_nodes_.size())
        throw MeshError("mesh: boundary polyline does not match the free edges of the triangulation");

    for (std::size_t i = 1; i < arclength_.size(); ++i)
        if (!(arclength_[i] > arclength_[i - 1])) throw MeshError("mesh: arclength is not strictly increasing");
    if (!(boundary_length_ > arclength_.back())) throw MeshError("mesh: degenerate closing edge");
}

namespace {

int ring_count(const DomainSpec& spec) {
    // Ring spacing a/n; 1.2 keeps the longest (diagonal) edges near h.
    return std::max(2, static_cast<int>(std::ceil(1.2 * spec.semi_axis_a / spec.edge_length - 1e-9)));
}

}  // namespace

Mesh build_ellipse_mesh(const DomainSpec& spec) {
    spec.validate();
    const int n = ring_count(spec);
    const double two_pi = 2.0 * std::numbers::pi;

    // Ring r holds 6r nodes at angles 2*pi*j/(6r); node 0 of each ring is at angle 0.
    std::vector<Vec2> unit;
    std::vector<int> ring_start(static_cast<std::size_t>(n) + 2, 0);
    unit.push_back({0.0, 0.0});
    ring_start[1] = 1;
    for (int r = 1; r <= n; ++r) {
        const int m = 6 * r;
        const double rad = static_cast<double>(r) / n;
        for (int j = 0; j < m; ++j) {
            const double th = two_pi * j / m;
            unit.push_back({rad * std::cos(th), rad * std::sin(th)});
        }
        ring_start[static_cast<std::size_t>(r) + 1] = ring_start[static_cast<std::size_t>(r)] + m;
    }

    std::vector<Triangle> tris;
    for (int j = 0; j < 6; ++j) tris.push_back({0, 1 + j, 1 + (j + 1) % 6});
    for (int r = 1; r < n; ++r) {
        const int mi = 6 * r, mo = 6 * (r + 1);
        const int si = ring_start[static_cast<std::size_t>(r)], so = ring_start[static_cast<std::size_t>(r) + 1];
        int i = 0, o = 0;
        while (i < mi || o < mo) {
            const int in0 = si + i % mi, out0 = so + o % mo;
            bool advance_inner;
            if (i == mi) advance_inner = false;
            else if (o == mo) advance_inner = true;
            else advance_inner = static_cast<double>(i + 1) / mi < static_cast<double>(o + 1) / mo;
            if (advance_inner) {
                tris.push_back({in0, out0, si + (i + 1) % mi});
                ++i;
            } else {
                tris.push_back({in0, out0, so + (o + 1) % mo});
                ++o;
            }
        }
    }

    std::vector<Vec2> nodes(unit.size());
    for (std::size_t k = 0; k < unit.size(); ++k)
        nodes[k] = {spec.semi_axis_a * unit[k].x, spec.semi_axis_b * unit[k].y};

    const int outer = ring_start[static_cast<std::size_t>(n)];
    const int nb = 6 * n;
    // Boundary nodes placed exactly on the ellipse.
    for (int j = 0; j < nb; ++j) {
        const double th = two_pi * j / nb;
        nodes[static_cast<std::size_t>(outer + j)] = {spec.semi_axis_a * std::cos(th), spec.semi_axis_b * std::sin(th)};
    }

    std::vector<std::vector<int>> adj(nodes.size());
    for (const auto& t : tris)
        for (int k = 0; k < 3; ++k) {
            adj[static_cast<std::size_t>(t[k])].push_back(t[(k + 1) % 3]);
            adj[static_cast<std::size_t>(t[(k + 1) % 3])].push_back(t[k]);
        }
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    for (int pass = 0; pass < 5; ++pass) {
        std::vector<Vec2> next = nodes;
        for (int v = 0; v < outer; ++v) {
            Vec2 acc{};
            for (int w : adj[static_cast<std::size_t>(v)]) acc = acc + nodes[static_cast<std::size_t>(w)];
            next[static_cast<std::size_t>(v)] = (1.0 / static_cast<double>(adj[static_cast<std::size_t>(v)].size())) * acc;
        }
        nodes.swap(next);
    }

    std::vector<int> boundary(static_cast<std::size_t>(nb));
    for (int j = 0; j < nb; ++j) boundary[static_cast<std::size_t>(j)] = outer + j;
    return Mesh(std::move(nodes), std::move(tris), std::move(boundary));
}

double project_to_segment(Vec2 x, Vec2 p, Vec2 q) {
    const Vec2 d = q - p;
    const double len2 = dot(d, d);
    if (len2 == 0.0) return 0.0;
    return std::clamp(dot(x - p, d) / len2, 0.0, 1.0);
}

std::vector<double> distance_to_boundary(const Mesh& mesh) {
    const auto& nodes = mesh.nodes();
    const auto& bnd = mesh.boundary_nodes();
    const std::size_t nb = bnd.size();
    std::vector<double> d(mesh.node_count());
    for (std::size_t v = 0; v < nodes.size(); ++v) {
        if (mesh.is_boundary(static_cast<int>(v))) {
            d[v] = 0.0;
            continue;
        }
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < nb; ++i) {
            const Vec2 p = nodes[static_cast<std::size_t>(bnd[i])];
            const Vec2 q = nodes[static_cast<std::size_t>(bnd[(i + 1) % nb])];
            const double t = project_to_segment(nodes[v], p, q);
            best = std::min(best, norm(nodes[v] - (p + t * (q - p))));
        }
        d[v] = best;
    }
    return d;
}

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
    double x1 = -std::numeric_limits<double>::infinity(), y1 = x1;
    x0_ = y0_ = std::numeric_limits<double>::infinity();
    for (const auto& p : mesh.nodes()) {
        x0_ = std::min(x0_, p.x);
        y0_ = std::min(y0_, p.y);
        x1 = std::max(x1, p.x);
        y1 = std::max(y1, p.y);
    }
    const double side = std::max(x1 - x0_, y1 - y0_);
    const int cells = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.triangle_count()) / 2.0)));
    cell_ = side / cells * (1.0 + 1e-9);
    nx_ = static_cast<int>((x1 - x0_) / cell_) + 1;
    ny_ = static_cast<int>((y1 - y0_) / cell_) + 1;
    buckets_.assign(static_cast<std::size_t>(nx_ * ny_), {});
    const auto& nodes = mesh.nodes();
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        double bx0 = 1e300, by0 = 1e300, bx1 = -1e300, by1 = -1e300;
        for (int v : mesh.triangles()[t]) {
            const Vec2 p = nodes[static_cast<std::size_t>(v)];
            bx0 = std::min(bx0, p.x), by0 = std::min(by0, p.y);
            bx1 = std::max(bx1, p.x), by1 = std::max(by1, p.y);
        }
        const int i0 = std::clamp(static_cast<int>((bx0 - x0_) / cell_), 0, nx_ - 1);
        const int i1 = std::clamp(static_cast<int>((bx1 - x0_) / cell_), 0, nx_ - 1);
        const int j0 = std::clamp(static_cast<int>((by0 - y0_) / cell_), 0, ny_ - 1);
        const int j1 = std::clamp(static_cast<int>((by1 - y0_) / cell_), 0, ny_ - 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j * nx_ + i)].push_back(static_cast<int>(t));
    }
}

PointLocator::Hit PointLocator::locate(Vec2 p, double tolerance) const {
    const auto& nodes = mesh_->nodes();
    const int ci = static_cast<int>(std::floor((p.x - x0_) / cell_));
    const int cj = static_cast<int>(std::floor((p.y - y0_) / cell_));
    Hit best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int j = cj - 1; j <= cj + 1; ++j)
        for (int i = ci - 1; i <= ci + 1; ++i) {
            if (i < 0 || j < 0 || i >= nx_ || j >= ny_) continue;
            for (int t : buckets_[static_cast<std::size_t>(j * nx_ + i)]) {
                const auto& tri = mesh_->triangles()[static_cast<std::size_t>(t)];
                const Vec2 a = nodes[static_cast<std::size_t>(tri[0])];
                const Vec2 b = nodes[static_cast<std::size_t>(tri[1])];
                const Vec2 c = nodes[static_cast<std::size_t>(tri[2])];
                const double det = cross(b - a, c - a);
                const double l1 = cross(p - a, c - a) / det;
                const double l2 = cross(b - a, p - a) / det;
                const double l0 = 1.0 - l1 - l2;
                if (l0 >= 0.0 && l1 >= 0.0 && l2 >= 0.0) return {t, {l0, l1, l2}};
                // Distance to the triangle for points just outside.
                double dist = std::numeric_limits<double>::infinity();
                Vec2 closest{};
                const Vec2 verts[3] = {a, b, c};
                for (int k = 0; k < 3; ++k) {
                    const Vec2 q0 = verts[k], q1 = verts[(k + 1) % 3];
                    const double s = project_to_segment(p, q0, q1);
                    const Vec2 q = q0 + s * (q1 - q0);
                    const double dd = norm(p - q);
                    if (dd < dist) dist = dd, closest = q;
                }
                if (dist < best_dist) {
                    best_dist = dist;
                    const double m1 = std::clamp(cross(closest - a, c - a) / det, 0.0, 1.0);
                    const double m2 = std::clamp(cross(b - a, closest - a) / det, 0.0, 1.0 - m1);
                    best = {t, {1.0 - m1 - m2, m1, m2}};
                }
            }
        }
    if (best_dist <= tolerance) return best;
    return {};
}

std::vector<double> interpolate(const Mesh& source, std::span<const double> field, const Mesh& target) {
    if (field.size() != source.node_count()) throw DimensionError("interpolate: field size does not match source mesh");
    PointLocator locator(source);
    std::vector<double> out(target.node_count());
    for (std::size_t v = 0; v < target.node_count(); ++v) {
        const auto hit = locator.locate(target.nodes()[v], 1e-10);
        if (hit.triangle < 0)
            throw OutOfDomainError("interpolate: target node " + std::to_string(v) + " lies outside the source mesh");
        const auto& tri = source.triangles()[static_cast<std::size_t>(hit.triangle)];
        out[v] = hit.barycentric[0] * field[static_cast<std::size_t>(tri[0])] +
                 hit.barycentric[1] * field[static_cast<std::size_t>(tri[1])] +
                 hit.barycentric[2] * field[static_cast<std::size_t>(tri[2])];
    }
    return out;
}

}  // namespace idsm
