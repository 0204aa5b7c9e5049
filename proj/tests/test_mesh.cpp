#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "idsm/errors.hpp"
#include "support.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <set>

using namespace idsm;
using namespace idsm::test;

TEST_CASE("domain spec rejects bad parameters") {
    CHECK_THROWS_AS(DomainSpec({0.0, 0.8, 0.1}).validate(), InvalidDomainError);
    CHECK_THROWS_AS(DomainSpec({1.0, -1.0, 0.1}).validate(), InvalidDomainError);
    CHECK_THROWS_AS(DomainSpec({1.0, 0.8, 0.0}).validate(), InvalidDomainError);
    CHECK_THROWS_AS(DomainSpec({1.0, 0.8, 0.8}).validate(), InvalidDomainError);
    CHECK_NOTHROW(DomainSpec({1.0, 0.8, 0.1}).validate());
}

TEST_CASE("ellipse mesh: boundary on the ellipse, edges bounded, valid") {
    for (double h : {0.1, 0.05}) {
        const Mesh m = ellipse(1.0, 0.8, h);
        CHECK_NOTHROW(m.validate());
        CHECK(m.max_edge_length() <= 1.5 * h);
        for (int b : m.boundary_nodes()) {
            const Vec2 p = m.nodes()[static_cast<std::size_t>(b)];
            CHECK(std::abs(p.x * p.x + p.y * p.y / 0.64 - 1.0) <= 1e-12);
        }
        const Vec2 first = m.nodes()[static_cast<std::size_t>(m.boundary_nodes()[0])];
        CHECK(first.x == doctest::Approx(1.0));
        CHECK(std::abs(first.y) <= 1e-14);
        for (std::size_t t = 0; t < m.triangle_count(); ++t) CHECK(m.triangle_area(t) > 0.0);
    }
}

TEST_CASE("ellipse mesh: counterclockwise boundary with increasing arclength") {
    const Mesh m = ellipse(1.0, 0.8, 0.1);
    const auto& s = m.arclength();
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] > s[i - 1]);
    double signed_area = 0.0;
    for (auto [i, j] : m.boundary_edges()) signed_area += cross(m.nodes()[static_cast<std::size_t>(i)], m.nodes()[static_cast<std::size_t>(j)]);
    CHECK(signed_area > 0.0);
    double total = 0.0;
    for (std::size_t t = 0; t < m.triangle_count(); ++t) total += m.triangle_area(t);
    CHECK(total == doctest::Approx(m.area()).epsilon(1e-12));
}

TEST_CASE("edge manifold: boundary edges in one triangle, interior edges in two") {
    const Mesh m = ellipse(1.0, 0.8, 0.1);
    std::map<std::pair<int, int>, int> count;
    for (const auto& t : m.triangles())
        for (int e = 0; e < 3; ++e) {
            int a = t[static_cast<std::size_t>(e)], b = t[static_cast<std::size_t>((e + 1) % 3)];
            if (a > b) std::swap(a, b);
            ++count[{a, b}];
        }
    std::set<std::pair<int, int>> boundary;
    for (auto [i, j] : m.boundary_edges()) boundary.insert({std::min(i, j), std::max(i, j)});
    for (const auto& [edge, n] : count) CHECK(n == (boundary.count(edge) ? 1 : 2));
    CHECK(boundary.size() == m.boundary_count());
}

TEST_CASE("disk mesh circumference") {
    const Mesh m = disk(0.2);
    CHECK(std::abs(m.boundary_length() - 2.0 * std::numbers::pi) <= 0.01 * 2.0 * std::numbers::pi);
}

TEST_CASE("node count grows roughly four-fold when h halves") {
    const double ratio = static_cast<double>(ellipse(1.0, 0.8, 0.05).node_count()) / ellipse(1.0, 0.8, 0.1).node_count();
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
}

TEST_CASE("mesh constructor rejects broken triangulations") {
    // Clockwise triangle.
    CHECK_THROWS_AS(Mesh({{0, 0}, {0, 1}, {1, 0}}, {{0, 1, 2}}, {0, 1, 2}), MeshError);
    // Boundary list not matching the free edges.
    CHECK_THROWS_AS(Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {0, 2, 1}), MeshError);
    CHECK_NOTHROW(unit_triangle());
}

TEST_CASE("distance to boundary") {
    const double h = 0.05;
    const Mesh d = disk(h);
    const auto dd = distance_to_boundary(d);
    CHECK(std::abs(dd[nearest_node(d, {0, 0})] - 1.0) <= h);
    for (int b : d.boundary_nodes()) CHECK(dd[static_cast<std::size_t>(b)] == 0.0);

    const Mesh e = ellipse(1.0, 0.8, h);
    const auto de = distance_to_boundary(e);
    const std::size_t o = nearest_node(e, {0, 0});
    // Brute force against a dense sampling of the exact ellipse.
    double brute = 1e9;
    for (int k = 0; k < 20000; ++k) {
        const double t = 2.0 * std::numbers::pi * k / 20000.0;
        brute = std::min(brute, norm(Vec2{std::cos(t), 0.8 * std::sin(t)} - e.nodes()[o]));
    }
    CHECK(std::abs(de[o] - 0.8) <= h);
    CHECK(std::abs(de[o] - brute) <= h);
}

TEST_CASE("distance to boundary is 1-Lipschitz along edges") {
    const Mesh m = ellipse(1.0, 0.8, 0.05);
    const auto d = distance_to_boundary(m);
    for (const auto& t : m.triangles())
        for (int e = 0; e < 3; ++e) {
            const auto a = static_cast<std::size_t>(t[static_cast<std::size_t>(e)]);
            const auto b = static_cast<std::size_t>(t[static_cast<std::size_t>((e + 1) % 3)]);
            CHECK(std::abs(d[a] - d[b]) <= norm(m.nodes()[a] - m.nodes()[b]) + 1e-14);
        }
}

TEST_CASE("interpolation reproduces constants, identity and affine fields") {
    const Mesh fine = ellipse(1.0, 0.8, 0.05);
    const Mesh coarse = ellipse(1.0, 0.8, 0.1);
    const Vector c = Vector::Constant(static_cast<Eigen::Index>(fine.node_count()), 2.5);
    for (double v : interpolate(fine, view(c), coarse)) CHECK(std::abs(v - 2.5) <= 1e-12);

    const Vector r = random_vector(fine.node_count(), 3);
    const auto same = interpolate(fine, view(r), fine);
    for (std::size_t i = 0; i < fine.node_count(); ++i) CHECK(same[i] == doctest::Approx(r[static_cast<Eigen::Index>(i)]).epsilon(1e-12));

    const Vector affine = nodal(fine, [](Vec2 p) { return p.x + 2.0 * p.y; });
    const auto out = interpolate(fine, view(affine), coarse);
    for (std::size_t i = 0; i < coarse.node_count(); ++i) {
        const Vec2 p = coarse.nodes()[i];
        CHECK(std::abs(out[i] - (p.x + 2.0 * p.y)) <= 1e-12);
    }
}

TEST_CASE("interpolation onto a larger domain fails") {
    const Mesh small = ellipse(0.5, 0.4, 0.1);
    const Mesh big = ellipse(1.0, 0.8, 0.1);
    const Vector f = Vector::Zero(static_cast<Eigen::Index>(small.node_count()));
    CHECK_THROWS_AS(interpolate(small, view(f), big), OutOfDomainError);
}

TEST_CASE("point locator finds containing triangles") {
    const Mesh m = ellipse(1.0, 0.8, 0.1);
    const PointLocator loc(m);
    for (std::size_t t = 0; t < m.triangle_count(); t += 7) {
        const auto& tri = m.triangles()[t];
        const Vec2 c = (1.0 / 3.0) * (m.nodes()[static_cast<std::size_t>(tri[0])] + m.nodes()[static_cast<std::size_t>(tri[1])] +
                                      m.nodes()[static_cast<std::size_t>(tri[2])]);
        const auto hit = loc.locate(c, 1e-12);
        REQUIRE(hit.triangle >= 0);
        CHECK(hit.barycentric[0] + hit.barycentric[1] + hit.barycentric[2] == doctest::Approx(1.0));
    }
    CHECK(loc.locate({3.0, 3.0}, 1e-12).triangle == -1);
}
