#pragma once

// Planar geometry kernel: closed polyline curves, polygon domains, meshes,
// boundary-distortion constants and the fractal/cusp domain generators.

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sobex {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// ---- points ----

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
inline Point2 operator/(Point2 a, double s) { return {a.x / s, a.y / s}; }
inline bool operator==(Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
double norm(Point2 a);
double dist(Point2 a, Point2 b);
inline Point2 perp(Point2 a) { return {-a.y, a.x}; }  // +90 degrees

// twice the signed area of (a,b,c); positive for a left turn
inline double orient(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

double dist_point_segment(Point2 p, Point2 a, Point2 b);
bool segments_cross(Point2 a, Point2 b, Point2 c, Point2 d, double eps);

// ---- closed curves ----

// Closed polyline; vertices are not repeated at the seam. Parameterized by
// arc length in [0, length()), wrapping.
struct PolyCurve {
    std::vector<Point2> v;
    std::vector<double> cum;  // cum[i] = arc length of vertex i, cum[n] = total

    static PolyCurve closed(std::vector<Point2> pts);

    std::size_t size() const { return v.size(); }
    double length() const { return cum.empty() ? 0.0 : cum.back(); }
    double signed_area() const;
    bool is_ccw() const { return signed_area() > 0.0; }
    PolyCurve reversed() const;

    double wrap(double s) const;               // reduce into [0, L)
    Point2 point_at(double s) const;
    std::size_t seg_index(double s) const;     // segment containing param s
    double vertex_param(std::size_t i) const { return cum[i]; }

    // inserts a vertex at parameter s unless one already sits within snap_tol
    void insert_param(double s, double snap_tol);

    bool is_simple(double eps_rel = 1e-12) const;
    double diameter() const;
    Point2 centroid_vertex_mean() const;
};

// Reference to a sub-arc [s0, s1] of a closed curve; s1 may exceed the curve
// length by wrapping but s1 > s0 always.
struct ArcRef {
    const PolyCurve* curve = nullptr;
    double s0 = 0.0;
    double s1 = 0.0;

    double length() const { return s1 - s0; }
    Point2 point_at(double u) const { return curve->point_at(s0 + u); }  // u in [0, length]
    // polyline through every curve vertex inside the arc, endpoints exact
    std::vector<Point2> polyline() const;
};

struct PolygonDomain {
    PolyCurve boundary;  // simple, CCW

    static PolygonDomain from_points(std::vector<Point2> pts);
    double area() const { return boundary.signed_area(); }
    bool contains(Point2 p) const;  // closed containment
};

struct Mesh {
    std::vector<Point2> verts;
    std::vector<std::array<int, 3>> tris;  // CCW
    std::vector<int> boundary_loop;        // outer loop, CCW vertex indices
    std::vector<std::vector<int>> inner_loops;

    double area() const;
    double max_edge() const;
};

// ---- basic ops ----

double curve_length(const PolyCurve& c);
double polyline_length(const std::vector<Point2>& pts);

// Ear-clip triangulation of a simple CCW polygon (indices into pts).
std::vector<std::array<int, 3>> triangulate_polygon(const std::vector<Point2>& pts);

// Conforming triangulation with every triangle diameter <= h_max.
Mesh triangulate(const PolygonDomain& d, double h_max);

// Shortest path between two points of the closed domain, as a polyline.
std::vector<Point2> internal_path(const PolygonDomain& d, Point2 a, Point2 b);
double internal_distance(const PolygonDomain& d, Point2 a, Point2 b);

// Reusable shortest-path engine: triangulates once, answers many queries.
struct GeodesicOracle {
    explicit GeodesicOracle(const PolygonDomain& d);
    std::vector<Point2> path(Point2 a, Point2 b) const;
    double distance(Point2 a, Point2 b) const;

    std::vector<Point2> pts;
    std::vector<std::array<int, 3>> tris;
    std::vector<std::array<int, 3>> adj;  // neighbor tri per edge (i,i+1), -1 none

  private:
    double diam2_ = 0.0;
    int locate(Point2 p) const;
};

// ---- boundary-distortion constants ----

struct CurveConstant {
    double value = 0.0;
    std::size_t samples = 0;
    double max_gap = 0.0;  // sampling density: largest arc gap used
};

// sup over sampled pairs (a,b) of diam(smaller component of c \ {a,b}) / |a-b|
CurveConstant ahlfors_constant(const PolyCurve& c, std::size_t samples);
// sup over sampled (a,b) and c in the smaller component of (|a-c|+|c-b|)/|a-b|
CurveConstant three_point_constant(const PolyCurve& c, std::size_t samples);

// sup over sampled boundary pairs of internal_distance/|a-b|; +inf if any
// sampled ratio exceeds cap.
double quasiconvexity_constant(const PolygonDomain& d, std::size_t samples, double cap);

// ---- generators ----

// Quad-segment snowflake generator applied n times to the segment a->b.
// tau in (1/4, 1/2); each generation replaces a segment by 4 segments of
// relative length tau. bump_left places apexes to the left of travel.
std::vector<Point2> koch_curve(double tau, int n, Point2 a, Point2 b, bool bump_left = true);

// Closed snowflake polygon: equilateral triangle with koch_curve sides,
// bumps outward. gen >= 0.
PolygonDomain koch_snowflake(double tau, int gen);

// Tube of half-width eps around the three-quarter snowflake curve
// (first 3*4^(n-1) segments of the generation-n curve on [0,1]x{0}).
struct SnowflakeTube {
    PolygonDomain domain;
    std::vector<Point2> spine;   // the three-quarter curve
    std::vector<Point2> top;     // +eps offset chain, left to right
    std::vector<Point2> bottom;  // -eps offset chain, left to right
    double eps = 0.0;
};
SnowflakeTube snowflake_tube(double tau, int n, double eps);

// Chain of tubes, each scaled by 4^-(j-1) and glued end to edge.
struct TubeChainPart {
    int n = 0;                  // generations used
    int n_requested = 0;        // before the segment-budget cap
    double eps = 0.0;           // at unit scale
    double scale = 1.0;
    double spine_length = 0.0;  // scaled
    double traverse_required = 0.0;  // 4^j
    double traverse_achieved = 0.0;  // certified shortest-path bound
    bool traverse_ok = false;
    std::size_t top_begin = 0, top_end = 0;  // vertex range in `top`
};
struct TubeChain {
    PolygonDomain domain;
    std::vector<TubeChainPart> parts;
    std::vector<Point2> top;     // joined top chain, left to right
    std::vector<Point2> bottom;  // joined bottom chain
    Point2 left_lo, left_hi;     // left end edge of part 1
    Point2 right_lo, right_hi;   // right end edge of last part
    double tau = 0.0;
    // boundary params of the three sides (CCW, starting at left_lo):
    // L3 = bottom side up to the rightmost midpoint, L2 = back along the top,
    // L1 = the left end edge.
    double s_right_mid = 0.0;  // param of the rightmost midpoint
    double s_top_end = 0.0;    // param of left_hi
};
// Budget caps the per-part segment count 3*4^n/4; parts that cannot reach the
// 4^j traverse bound under the cap report traverse_ok = false with the
// achieved bound.
TubeChain tube_chain(double tau, int parts, std::size_t segment_budget = 20000);

// Power cusp domains: boundary contains both branches y = +-x^beta meeting at
// the origin, closed by a circular cap through (1, +-1).
enum class CuspKind { inner, outer };
PolygonDomain cusp_domain(double beta, CuspKind kind, double x_tip = 1e-6, int pts_per_branch = 160);

}  // namespace sobex
