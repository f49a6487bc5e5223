#pragma once

// Scalar certificates: the p-Douglas boundary integral, modulus-of-continuity
// integrals, crosscut sums, exact piecewise-affine W^{1,p} energies,
// homeomorphism verification, and the monotone-series oracle.

#include <optional>
#include <string>

#include "sobex/bmap.hpp"

namespace sobex {

struct CrosscutTree;  // engine.hpp

// Piecewise-affine map: vertex images over a triangulated source. labels, if
// nonempty, assign each triangle to a named accounting cell.
struct PLMap {
    Mesh mesh;
    std::vector<Point2> images;
    std::shared_ptr<const BoundaryMap> boundary_corr;  // trace contract, may be null
    std::vector<int> labels;                           // per triangle, optional
    std::vector<std::string> label_names;
};

enum class MatrixNorm { frobenius, operator_norm };

struct EnergyReport {
    double p = 2;
    MatrixNorm norm = MatrixNorm::frobenius;
    double value = 0;  // = sum of per_cell values, exactly
    std::vector<std::pair<std::string, double>> per_cell;
    std::optional<double> lower_bound, upper_bound;
};

// Exact per-triangle energy sum area(T) * |D|^p of the affine pieces.
// Triangles are rescaled individually so cells at vastly different scales
// (down to coordinates ~1e-300) neither overflow nor collapse to 0*inf.
EnergyReport pl_energy(const PLMap& h, double p, MatrixNorm norm);
EnergyReport pl_energy(const PLMap& h, double p);  // frobenius at p=2, else operator

// Open verdict for the p-Douglas double integral: partial band sums plus
// either a geometric tail estimate or a divergence flag.
struct DouglasResult {
    double value = 0;           // sum of computed bands
    std::vector<double> bands;  // band k = 1.. contributions
    double tail = 0;            // geometric tail estimate when stabilized
    bool divergent = false;     // band contributions non-decreasing over 8 bands
    bool stabilized = false;    // tail dropped below tol * running total
    int depth = 0;
    long long evals = 0;
};

// Dyadic off-diagonal band quadrature of the integral of
// (|phi(x)-phi(y)| / |x-y|)^p over pairs of boundary points, both distances
// chordal; band k holds pairs with arc gap in [2^-k-1, 2^-k] * L.
DouglasResult douglas_energy(const BoundaryMap& phi, double p, double tol = 1e-3,
                             int max_depth = 40);

// sup of |phi(x)-phi(y)| over pairs at chordal distance <= t, aligned to the
// piecewise-linear structure of phi (knots, curve vertices, and the exact
// distance-t window endpoints). grid must be positive decreasing; the result
// pairs (t, omega(t)) keep that order. Source curve must be convex.
std::vector<std::pair<double, double>> modulus_of_continuity(const BoundaryMap& phi,
                                                             const std::vector<double>& grid);

struct Dini2Result {
    double value = 0;             // integral over [delta, 1]
    std::vector<double> partials;  // ladder over [10^-d, 1], d = 1..
    bool divergent = false;
    double fitted_exponent = 0;  // growth exponent of partials in log(e/delta)
    double fit_r2 = 0;
    std::optional<double> limit_estimate;  // extrapolated limit when convergent
};

// Trapezoid quadrature of the integral of omega(t)^2 / t on [delta, 1] in
// log t, with a decade ladder: divergence is called when the per-decade
// increments decay no faster than 1/log(1/t) (the borderline rate), measured
// by a least-squares local exponent over at least 4 decades.
Dini2Result dini2_integral(std::vector<std::pair<double, double>> omega, double delta);

// Sum over generations n of 2^{(p-2)n} Sum_j |Gamma_{n,j}|^p.
double crosscut_sum(const CrosscutTree& tree, double p,
                    std::vector<double>* per_generation = nullptr);

struct HomeoVerdict {
    bool pass = false;
    std::string clause;   // "", "orientation", "boundary", "area"
    std::string witness;  // first offending triangle/vertex
    double boundary_error = 0;
    double area_mismatch = 0;
};

// PASS iff (a) every image triangle is positively oriented, (b) the image
// boundary loop is simple and within boundary_tol Hausdorff distance of the
// target curve, (c) enclosed areas agree within boundary_tol * perimeter.
// For an affine map of a disk mesh, (a)+(b) give global injectivity.
HomeoVerdict verify_homeomorphism(const PLMap& h, double boundary_tol);

struct Lemma21Result {
    double input_sum = 0;   // Sum 2^{(p-2)j} (a_j - a_{j+1})^p
    double output_sum = 0;  // Sum 2^{(p-2)k} a_k^p
    double ratio = 0;       // output / input, 0 for the zero sequence
    bool flagged = false;   // output > 0 with zero input (cannot happen)
};

// Series oracle for nonincreasing a_0 >= a_1 >= ... >= a_K >= 0; the sequence
// is extended by a virtual a_{K+1} = 0, so the final drop is charged.
Lemma21Result lemma21_check(const std::vector<double>& a, double p);

// The Holder-chain constant bounding ratio for every admissible sequence,
// from the geometric-series proof with weight base alpha = 2^{(p-2)/(2p)}.
double lemma21_constant(double p);

}  // namespace sobex
