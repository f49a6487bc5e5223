#pragma once

// Boundary homeomorphisms between closed curves as strictly increasing
// piecewise-linear arc-length correspondences, plus the dyadic arc machinery.

#include <memory>
#include <utility>

#include "sobex/geom.hpp"

namespace sobex {

// One monotone piece of a correspondence: maps the source param range
// [src0, src1] onto the target range [dst0, dst1] (lifts, src1 > src0).
// Knots are local offsets: first (0,0), last (src1-src0, dst1-dst0).
struct MapPiece {
    std::shared_ptr<const PolyCurve> src_curve, dst_curve;
    double src0 = 0, src1 = 0;
    double dst0 = 0, dst1 = 0;
    std::vector<std::pair<double, double>> knots;

    double map_local(double u) const;  // u in [0, src1-src0] -> [0, dst1-dst0]
};

struct BoundaryMap {
    std::shared_ptr<const PolyCurve> source, target;
    // global breakpoints: s strictly increasing over one source period,
    // t the strictly increasing lift; wraps by exactly one target period
    std::vector<std::pair<double, double>> corr;

    double evaluate(double s) const;          // -> target param in [0, L_t)
    double evaluate_inverse(double t) const;  // -> source param in [0, L_s)
    Point2 operator()(double s) const { return target->point_at(evaluate(s)); }
    BoundaryMap inverse() const;
    bool valid(double tol_rel = 1e-9, std::string* why = nullptr) const;
};

MapPiece constant_speed_map(std::shared_ptr<const PolyCurve> src, double s0, double s1,
                            std::shared_ptr<const PolyCurve> dst, double t0, double t1);

// s |-> L_t (s/L_s)^alpha, sampled geometrically so the PL interpolation
// error stays below 1e-6 of the target span.
MapPiece holder_map(double alpha, std::shared_ptr<const PolyCurve> src, double s0, double s1,
                    std::shared_ptr<const PolyCurve> dst, double t0, double t1);

BoundaryMap assemble(std::vector<MapPiece> pieces);

BoundaryMap identity_map(std::shared_ptr<const PolyCurve> c);

// boundary profile of the logarithmic cusp map: f(x) = log^{-eps}(e/x)
double cusp_profile(double x, double eps);

// Correspondence along the walls of {0<=x<=1, |y|<=x} onto the walls of
// {0<=u<=1, |v|<=u^beta}, x |-> (f(x), +-f(x)^beta), through the cusp point.
// Requires eps < 1/2 < beta*eps.
MapPiece cusp_trace(double beta, double eps);

// The tube-chain boundary map: A1 -> left end edge at constant speed; A2 and
// A3 carry geometric arcs a_j (|a_j| = 4 |a_{j+1}|) mapped sub-arc by sub-arc
// onto the per-part chain segments of the top and bottom sides.
BoundaryMap snowflake_boundary_map(const TubeChain& chain,
                                   std::shared_ptr<const PolyCurve> circle,
                                   double frac_a1 = 0.25, double frac_a2 = 0.375,
                                   double anchor = 0.0);

struct DyadicFamily {
    std::shared_ptr<const PolyCurve> circle;
    int n0 = 0, N = 0;
    double anchor = 0.0;
    std::vector<std::vector<ArcRef>> arcs;  // arcs[n - n0][j], 2^n per generation

    const ArcRef& arc(int n, std::size_t j) const { return arcs[static_cast<std::size_t>(n - n0)][j]; }
    std::size_t count() const;
};

DyadicFamily dyadic_family(std::shared_ptr<const PolyCurve> circle, int n0, int N,
                           double anchor = 0.0);

}  // namespace sobex
