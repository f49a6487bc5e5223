#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sobex/geom.hpp"

using namespace sobex;

namespace {

PolyCurve circle(std::size_t n, double r = 1.0) {
    std::vector<Point2> pts;
    for (std::size_t i = 0; i < n; ++i) {
        double t = 2 * M_PI * static_cast<double>(i) / static_cast<double>(n);
        pts.push_back({r * std::cos(t), r * std::sin(t)});
    }
    return PolyCurve::closed(std::move(pts));
}

// brute-force shortest path: Dijkstra over the visibility graph of polygon
// vertices plus the two endpoints
double visibility_distance(const PolygonDomain& d, Point2 a, Point2 b) {
    std::vector<Point2> nodes = d.boundary.v;
    nodes.push_back(a);
    nodes.push_back(b);
    std::size_t n = nodes.size();
    auto visible = [&](Point2 p, Point2 q) {
        const auto& v = d.boundary.v;
        std::size_t m = v.size();
        for (std::size_t i = 0; i < m; ++i) {
            Point2 c = v[i], e = v[(i + 1) % m];
            double d1 = orient(c, e, p), d2 = orient(c, e, q);
            double d3 = orient(p, q, c), d4 = orient(p, q, e);
            if (d1 * d2 < 0 && d3 * d4 < 0) return false;
        }
        for (double t : {0.5, 0.25, 0.75, 0.1, 0.9})
            if (!d.contains(p + t * (q - p))) return false;
        return true;
    };
    std::vector<double> dist_to(n, 1e300);
    std::vector<char> done(n, 0);
    dist_to[n - 2] = 0.0;
    for (;;) {
        std::size_t u = n;
        double best = 1e300;
        for (std::size_t i = 0; i < n; ++i)
            if (!done[i] && dist_to[i] < best) {
                best = dist_to[i];
                u = i;
            }
        if (u == n) break;
        done[u] = 1;
        if (u == n - 1) break;
        for (std::size_t w = 0; w < n; ++w)
            if (!done[w] && visible(nodes[u], nodes[w]))
                dist_to[w] = std::min(dist_to[w], dist_to[u] + dist(nodes[u], nodes[w]));
    }
    return dist_to[n - 1];
}

}  // namespace

TEST_CASE("closed curve parameterization") {
    PolyCurve sq = PolyCurve::closed({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    CHECK(sq.length() == doctest::Approx(4.0));
    CHECK(sq.signed_area() == doctest::Approx(1.0));
    CHECK(sq.is_ccw());
    Point2 p = sq.point_at(2.5);
    CHECK(p.x == doctest::Approx(0.5));
    CHECK(p.y == doctest::Approx(1.0));
    Point2 q = sq.point_at(-0.5);  // wraps
    CHECK(q.x == doctest::Approx(0.0));
    CHECK(q.y == doctest::Approx(0.5));
    CHECK(sq.is_simple());

    ArcRef arc{&sq, 0.5, 2.5};
    auto pl = arc.polyline();
    REQUIRE(pl.size() == 4);
    CHECK(pl[0].x == doctest::Approx(0.5));
    CHECK(pl[1].x == doctest::Approx(1.0));
    CHECK(pl[1].y == doctest::Approx(0.0));
    CHECK(pl[3].y == doctest::Approx(1.0));
    CHECK(polyline_length(pl) == doctest::Approx(2.0));
}

TEST_CASE("self-intersecting input is rejected") {
    CHECK_THROWS_AS(PolygonDomain::from_points({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), Error);
    PolyCurve bow = PolyCurve::closed({{0, 0}, {1, 1}, {1, 0}, {0, 1}});
    CHECK(!bow.is_simple());
}

TEST_CASE("orientation is normalized") {
    PolygonDomain d = PolygonDomain::from_points({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
    CHECK(d.area() == doctest::Approx(1.0));
    CHECK(d.boundary.is_ccw());
}

TEST_CASE("containment") {
    PolygonDomain d = PolygonDomain::from_points({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
    CHECK(d.contains({0.5, 0.5}));
    CHECK(d.contains({1.5, 0.5}));
    CHECK(!d.contains({1.5, 1.5}));
    CHECK(d.contains({1.0, 1.0}));  // boundary
}

TEST_CASE("ear clipping covers the polygon") {
    std::vector<Point2> pts{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
    auto tris = triangulate_polygon(pts);
    CHECK(tris.size() == pts.size() - 2);
    double area = 0.0;
    for (auto& t : tris) {
        double a = orient(pts[t[0]], pts[t[1]], pts[t[2]]);
        CHECK(a > 0.0);
        area += 0.5 * a;
    }
    CHECK(area == doctest::Approx(3.0));
}

TEST_CASE("refined mesh respects the size bound") {
    PolygonDomain d = PolygonDomain::from_points({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    Mesh m = triangulate(d, 0.3);
    CHECK(m.max_edge() <= 0.3);
    CHECK(m.area() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(!m.boundary_loop.empty());
    // boundary loop stays on the unit square edges
    for (int i : m.boundary_loop) {
        Point2 p = m.verts[i];
        bool on = p.x == 0 || p.x == 1 || p.y == 0 || p.y == 1;
        CHECK(on);
    }
    for (auto& t : m.tris) CHECK(orient(m.verts[t[0]], m.verts[t[1]], m.verts[t[2]]) > 0.0);
}

TEST_CASE("internal distance in a convex polygon is the chord") {
    PolygonDomain d = PolygonDomain::from_points({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    CHECK(internal_distance(d, {0, 0}, {1, 1}) == doctest::Approx(std::sqrt(2.0)));
    CHECK(internal_distance(d, {0.1, 0.2}, {0.9, 0.7}) ==
          doctest::Approx(dist({0.1, 0.2}, {0.9, 0.7})));
}

TEST_CASE("internal distance bends around a corner") {
    PolygonDomain d = PolygonDomain::from_points({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
    Point2 a{1.9, 0.5}, b{0.5, 1.9};
    double expect = dist(a, {1, 1}) + dist({1, 1}, b);
    CHECK(internal_distance(d, a, b) == doctest::Approx(expect).epsilon(1e-12));
    auto path = internal_path(d, a, b);
    REQUIRE(path.size() == 3);
    CHECK(path[1].x == doctest::Approx(1.0));
    CHECK(path[1].y == doctest::Approx(1.0));
}

TEST_CASE("geodesics agree with a visibility-graph oracle") {
    PolygonDomain comb = PolygonDomain::from_points({{0, 0},   {7, 0},   {7, 3},   {6, 3},
                                                     {6, 1},   {5, 1},   {5, 3},   {4, 3},
                                                     {4, 1},   {3, 1},   {3, 3},   {2, 3},
                                                     {2, 1},   {1, 1},   {1, 3},   {0, 3}});
    GeodesicOracle oracle(comb);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ux(0.05, 6.95), uy(0.05, 2.95);
    int tested = 0;
    while (tested < 40) {
        Point2 a{ux(rng), uy(rng)}, b{ux(rng), uy(rng)};
        if (!comb.contains(a) || !comb.contains(b)) continue;
        ++tested;
        double got = oracle.distance(a, b);
        double want = visibility_distance(comb, a, b);
        CHECK(got == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("round curve distortion constants") {
    PolyCurve c = circle(1024);
    auto ahl = ahlfors_constant(c, 512);
    CHECK(ahl.value == doctest::Approx(1.0).epsilon(1e-3));
    auto tp = three_point_constant(c, 512);
    CHECK(tp.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
    CHECK(tp.samples >= 512);
}

TEST_CASE("three point constant of a square stays moderate") {
    PolyCurve sq = PolyCurve::closed({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    auto tp = three_point_constant(sq, 256);
    CHECK(tp.value > 1.0);
    CHECK(tp.value < 3.0);
}

TEST_CASE("quasiconvexity of a convex domain is 1") {
    PolygonDomain d = PolygonDomain::from_points({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    CHECK(quasiconvexity_constant(d, 32, 100.0) == doctest::Approx(1.0));
}

TEST_CASE("inward cusp trips the quasiconvexity cap") {
    // near the tip the detour ratio grows like x^(1-beta), so a fine enough
    // boundary sampling must exceed any cap
    PolygonDomain notch = cusp_domain(2.0, CuspKind::inner, 1e-3, 48);
    CHECK(std::isinf(quasiconvexity_constant(notch, 512, 50.0)));
    PolygonDomain spike = cusp_domain(2.0, CuspKind::outer, 1e-3, 48);
    double q = quasiconvexity_constant(spike, 128, 50.0);
    CHECK(std::isfinite(q));
    CHECK(q < 10.0);
}

TEST_CASE("generator arithmetic") {
    auto g1 = koch_curve(0.3, 1, {0, 0}, {1, 0});
    REQUIRE(g1.size() == 5);
    CHECK(polyline_length(g1) == doctest::Approx(1.2).epsilon(1e-12));
    for (std::size_t i = 0; i + 1 < g1.size(); ++i)
        CHECK(dist(g1[i], g1[i + 1]) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(g1[2].y > 0.0);  // bump to the left of travel

    auto g3 = koch_curve(0.3, 3, {0, 0}, {1, 0});
    CHECK(g3.size() == 65);
    CHECK(polyline_length(g3) == doctest::Approx(1.728).epsilon(1e-12));
    CHECK(g3.front() == Point2{0, 0});
    CHECK(g3.back().x == doctest::Approx(1.0));

    CHECK_THROWS_AS(koch_curve(0.25, 1, {0, 0}, {1, 0}), Error);
    CHECK_THROWS_AS(koch_curve(0.5, 1, {0, 0}, {1, 0}), Error);
}

TEST_CASE("snowflake polygon") {
    PolygonDomain s = koch_snowflake(1.0 / 3.0 + 1e-9, 2);
    CHECK(s.boundary.is_ccw());
    CHECK(s.area() > std::sqrt(3.0) / 4.0);  // bumps add area
    CHECK(s.boundary.size() == 3 * 16);
}

TEST_CASE("tube around the three-quarter curve") {
    SnowflakeTube t = snowflake_tube(0.3, 2, 0.0);
    CHECK(t.spine.size() == 13);  // 12 segments
    CHECK(t.eps == doctest::Approx(std::pow(0.3, 2) / 20.0));
    CHECK(t.domain.boundary.is_simple());
    double spine_len = polyline_length(t.spine);
    CHECK(t.domain.area() == doctest::Approx(2 * t.eps * spine_len).epsilon(0.05));
    CHECK(t.spine.back().x == doctest::Approx(0.7));
    CHECK(t.spine.back().y == doctest::Approx(0.0));
    CHECK_THROWS_AS(snowflake_tube(0.3, 2, 0.1), Error);
}

TEST_CASE("tube chain with certified traverse bounds") {
    TubeChain chain = tube_chain(0.3, 2, 800);
    REQUIRE(chain.parts.size() == 2);
    CHECK(chain.domain.boundary.is_simple());
    CHECK(chain.parts[1].scale == doctest::Approx(0.25));
    // second part sits to the right of the first
    CHECK(chain.parts[1].top_begin > 0);
    CHECK(chain.left_lo.x == doctest::Approx(0.0));
    Point2 right_mid = 0.5 * (chain.right_lo + chain.right_hi);
    CHECK(right_mid.x == doctest::Approx(0.7 + 0.25 * 0.7).epsilon(1e-12));
    CHECK(right_mid.y == doctest::Approx(0.0));
    CHECK(chain.s_right_mid < chain.s_top_end);
    CHECK(chain.s_top_end < chain.domain.boundary.length());
    for (const auto& p : chain.parts) {
        CHECK(p.traverse_achieved > 0.0);
        CHECK(p.traverse_achieved <= p.spine_length * 1.01);
        CHECK(p.traverse_ok == (p.traverse_achieved >= p.traverse_required));
    }
}

TEST_CASE("traverse grows with the generation count") {
    double prev = 0.0;
    for (std::size_t budget : {12u, 48u, 200u, 800u}) {
        TubeChain chain = tube_chain(0.3, 1, budget);
        CHECK(chain.parts[0].traverse_achieved >= prev - 1e-12);
        prev = chain.parts[0].traverse_achieved;
    }
}

TEST_CASE("cusp domains") {
    PolygonDomain inner = cusp_domain(2.0, CuspKind::inner);
    PolygonDomain outer = cusp_domain(2.0, CuspKind::outer);
    CHECK(inner.boundary.is_ccw());
    CHECK(outer.boundary.is_ccw());
    // inner domain excludes the spike, outer domain is the spike
    CHECK(!inner.contains({0.5, 0.0}));
    CHECK(outer.contains({0.5, 0.0}));
    CHECK(inner.contains({-1.0, 0.0}));
    CHECK(!outer.contains({-1.0, 0.0}));
    CHECK(outer.contains({0.5, 0.2}));   // |0.2| < 0.25
    CHECK(!outer.contains({0.5, 0.3}));
    double r2 = std::sqrt(2.0);
    CHECK(inner.area() + outer.area() == doctest::Approx(M_PI * r2 * r2).epsilon(1e-2));
    CHECK_THROWS_AS(cusp_domain(1.0, CuspKind::inner), Error);
}
