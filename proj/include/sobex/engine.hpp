#pragma once

// Constructive extension machinery: crosscut trees over dyadic boundary
// arcs, cell decompositions of the disk and target, per-cell maps, and the
// assembled homeomorphic extensions.

#include "sobex/energy.hpp"

namespace sobex {

// Per dyadic arc I_{n,j}, a simple polyline inside the target joining the
// images of the arc endpoints. cuts[n - family.n0][j] matches family.arc(n, j).
struct CrosscutTree {
    DyadicFamily family;
    std::vector<std::vector<std::vector<Point2>>> cuts;

    double cut_length(int n, std::size_t j) const {
        return polyline_length(cuts[static_cast<std::size_t>(n - family.n0)][j]);
    }
};

// Shortest internal paths between dyadic arc endpoint images, each generation
// computed inside the region its parent cut encloses, then pushed strictly
// off the boundary. Cuts of one generation are pairwise disjoint except for
// shared endpoints, and each lies inside its parent's region.
CrosscutTree crosscut_tree(const PolygonDomain& Y, const BoundaryMap& phi,
                           const DyadicFamily& fam);

// ---- cell decomposition of the model triangle T ----
//
// T has base [-1,1] x {0} and apex (0,1). Over every dyadic base interval a
// tent of base angle alpha[g] is erected; the cell at (g, r) is bounded by
// its tent and the two child tents. Indexing is relative: generation
// n = n0 + g, r = 0 .. 2^g - 1 within one gen-n0 subtree.

struct DiskCell {
    double a = 0.0, b = 0.0;       // base interval inside [-1, 1]
    std::vector<Point2> outline;   // CCW: base-left, child tents, parent tent
    std::vector<Point2> central;   // hexagonal middle part, CCW
    std::vector<Point2> left, right;  // corner triangles at (a,0) and (b,0)
};

struct CellDecomposition {
    int n0 = 0, N = 0;
    std::vector<double> alpha;                           // alpha[g], g = 0..N-n0
    std::vector<std::vector<std::vector<Point2>>> legs;  // legs[g][r]: tent polyline
    std::vector<std::vector<DiskCell>> cells;            // cells[g][r], g = 0..N-n0-1

    double beta(int g) const { return alpha[g] - alpha[g + 1]; }  // corner angle
};

// pi/4 divided harmonically: alpha[g] = (pi/4) / (g + 1).
std::vector<double> default_alpha_schedule(int n0, int N);

CellDecomposition disk_cells(const DyadicFamily& fam,
                             const std::vector<double>& schedule = {});

// ---- target decomposition ----
//
// V_{n,j} is bounded by the cut Gamma_{n,j} and its two children. Connectors
// of length <= 2(d_n + d_{n+1}) split off corner pieces R-/R+ that absorb the
// initial/final d-pieces of the cuts, leaving the central remainder R.

struct TargetPiece {
    std::vector<Point2> outline;           // V_{n,j}, CCW
    std::vector<Point2> central;           // R
    std::vector<Point2> left, right;       // R- at the cut start, R+ at the end
    std::vector<Point2> connector_left, connector_right;
    double perimeter = 0.0;  // |Gamma| + |Gamma_left| + |Gamma_right| exactly
};

struct TargetDecomposition {
    std::vector<double> d;                         // d[g], generation n0 + g
    std::vector<std::vector<TargetPiece>> pieces;  // pieces[g][j], global j
};

// d defaults to min(d_{g-1}, min_j |Gamma_{n,j}|/4, 8^-n diam), clamped
// decreasing; a generation whose connectors cannot be placed gets its d
// halved and the decomposition rebuilt.
TargetDecomposition target_cells(const CrosscutTree& tree, std::vector<double> d = {});

// ---- per-cell maps ----

// One side of a cell correspondence: src[i] maps to dst[i]; both polylines
// run the same way and consecutive side pairs share endpoints exactly.
struct SidePair {
    std::vector<Point2> src, dst;
};

// Constant-speed correspondence refined to the union of both breakpoint
// sets; original vertices are kept bit-exactly on their own side.
SidePair matched_side(const std::vector<Point2>& src, const std::vector<Point2>& dst);
SidePair reversed(const SidePair& s);

struct CellMapPiece {
    Mesh mesh;                   // triangulated source cell, boundary first
    std::vector<Point2> images;  // boundary images pinned to the dst chain
};

// Homeomorphism of one cell onto its target with the prescribed boundary
// correspondence: both polygons are parameterized over a regular polygon
// (ear clip + Tutte), composed, and refined at the source centroids of any
// flipped triangles until every image triangle is positively oriented.
CellMapPiece cell_map(const std::vector<SidePair>& sides);

// ---- assembled extensions ----

struct Extension {
    PLMap map;
    EnergyReport energy;
    HomeoVerdict verdict;  // pass is a postcondition; returned for its metrics
    CrosscutTree tree;
};

// Piecewise-affine homeomorphic extension of phi to the closed disk:
// central cell, per-cell maps for generations n0..N-1, and a collar of leaf
// cells between the gen-N tents and the boundary whose traces agree with phi
// at every circle vertex and every target vertex pullback.
Extension extend_disk(const PolygonDomain& Y, const BoundaryMap& phi,
                      const DyadicFamily& fam, double p, int N);

// Extension to the annulus 1 <= |z| <= R through inversion: reflects the
// problem by tau(z) = z / |z|^2, extends the reflected boundary map over the
// disk, and conjugates back. The trace on |z| = 1 is phi; images lie outside
// Y. Requires 0 strictly inside Y and inside the source circle.
PLMap exterior_by_inversion(const PLMap& h, const PolygonDomain& Y, double R = 2.0,
                            int depth = 4);

// Sampled graph y = f(x) on [0, 1], xs strictly increasing, xs[0] = 0.
struct GraphSamples {
    std::vector<double> xs, ys;
};

struct OnesidedExtension {
    PLMap map;
    EnergyReport energy;
    HomeoVerdict verdict;
    std::vector<double> region_perimeter;  // |dV_j|, j = 0..J-1
};

// Extension over the model triangle for a target pinched between two graphs
// Phi >= Psi meeting tangentially at the origin: dyadic ladder of bands U_j
// mapped onto regions V_j between successive rungs beta_j (vertical risers
// joined along the interpolating graph Phi/j + (1-1/j) Psi), side flaps, and
// a tip cell through the pinch point.
OnesidedExtension onesided_quasiconvex(const GraphSamples& Phi, const GraphSamples& Psi,
                                       const BoundaryMap& phi, int J = 8);

}  // namespace sobex
