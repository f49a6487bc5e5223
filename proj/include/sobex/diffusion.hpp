#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "sobex/energy.hpp"
#include "sobex/geom.hpp"

namespace sobex {

// Scalar field on the unit triangle S = {0 <= x <= 1, 0 <= y <= x}, meshed
// along the segment family L_t from the origin to (1, t).
struct DiffusionField {
    Mesh mesh;
    std::vector<double> A;                             // per vertex, in [0, 1]
    std::vector<std::vector<int>> rays;                // rays[i]: vertex ids along L_{t_i}
    std::vector<double> ray_t;                         // t_i ascending, 0 = bottom, 1 = diagonal
    std::vector<std::pair<double, double>> ray_param;  // per vertex (t, x); origin (0, 0)
};

// Ray-aligned mesh of S: n_rays+1 rays through the origin, n_steps vertices
// per ray plus the shared origin. A is left empty.
DiffusionField unit_triangle_field(int n_rays, int n_steps);

// Discrete harmonic field (linear finite elements, direct sparse solve) with
// Dirichlet data g, one value per mesh.boundary_loop entry.
std::vector<double> harmonic_extension(const Mesh& mesh, const std::vector<double>& g);

// First coordinate of the diffusion map: harmonic extension of the boundary
// data (phi1 on the bottom edge, 1 on the right edge, x on the diagonal),
// then monotone rearrangement of the values along each ray.
DiffusionField boundary_diffusion(const std::function<double(double)>& phi1,
                                  DiffusionField skeleton);

// Piecewise-linear strictly monotone sample table with a monotone inverse.
struct MonotoneFn {
    std::vector<double> xs, ys;

    double operator()(double x) const;
    double inverse(double y) const;
};

// tau(x) = max of A over the vertical fiber at x, on the mesh x-grid.
MonotoneFn tau_max(const DiffusionField& F);

// Monotone cubic Hermite interpolant.
struct CubicFn {
    std::vector<double> xs, ys, slopes;

    double operator()(double x) const;
};

// Smooth increasing f with f(0) = 0 and f <= tau^{-1}, built as the monotone
// cubic through a halved minorant grid of tau^{-1} and verified on a dense
// grid.
CubicFn choose_f(const MonotoneFn& tau);

// H*(x,y) = (A, (1 - (y/x) f(A)) Phi(A)) per vertex; throws if the guard
// f(A(x,y)) <= x fails anywhere. Each ray L_t lands on the graph curve
// gamma_t(s) = (s, (1 - t f(s)) Phi(s)).
PLMap regularized_hstar(const DiffusionField& F, const CubicFn& f,
                        const std::function<double(double)>& Phi);

}  // namespace sobex
