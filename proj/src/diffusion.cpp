#include "sobex/diffusion.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>

namespace sobex {

DiffusionField unit_triangle_field(int n_rays, int n_steps) {
    if (n_rays < 1 || n_steps < 1) throw Error("need at least one ray and one step");
    int M = n_rays, N = n_steps;
    DiffusionField F;
    F.mesh.verts.push_back({0, 0});
    F.ray_param.emplace_back(0.0, 0.0);
    auto vid = [&](int i, int j) { return 1 + i * N + (j - 1); };  // j >= 1
    for (int i = 0; i <= M; ++i) {
        double t = static_cast<double>(i) / M;
        F.ray_t.push_back(t);
        for (int j = 1; j <= N; ++j) {
            double x = static_cast<double>(j) / N;
            F.mesh.verts.push_back({x, t * x});
            F.ray_param.emplace_back(t, x);
        }
    }
    for (int i = 0; i <= M; ++i) {
        std::vector<int> ray{0};
        for (int j = 1; j <= N; ++j) ray.push_back(vid(i, j));
        F.rays.push_back(std::move(ray));
    }
    for (int i = 0; i < M; ++i) {
        F.mesh.tris.push_back({0, vid(i, 1), vid(i + 1, 1)});
        for (int j = 1; j < N; ++j) {
            int a = vid(i, j), b = vid(i, j + 1), c = vid(i + 1, j + 1), d = vid(i + 1, j);
            F.mesh.tris.push_back({a, b, c});
            F.mesh.tris.push_back({a, c, d});
        }
    }
    F.mesh.boundary_loop.push_back(0);
    for (int j = 1; j <= N; ++j) F.mesh.boundary_loop.push_back(vid(0, j));
    for (int i = 1; i <= M; ++i) F.mesh.boundary_loop.push_back(vid(i, N));
    for (int j = N - 1; j >= 1; --j) F.mesh.boundary_loop.push_back(vid(M, j));
    return F;
}

std::vector<double> harmonic_extension(const Mesh& mesh, const std::vector<double>& g) {
    if (!mesh.inner_loops.empty()) throw Error("meshes with holes are not supported");
    if (g.size() != mesh.boundary_loop.size()) throw Error("one boundary value per loop vertex");
    std::size_t nv = mesh.verts.size();

    std::vector<char> fixed(nv, 0);
    std::vector<double> field(nv, 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        auto v = static_cast<std::size_t>(mesh.boundary_loop[k]);
        fixed[v] = 1;
        field[v] = g[k];
    }
    std::vector<int> unknown(nv, -1);
    int nu = 0;
    for (std::size_t v = 0; v < nv; ++v)
        if (!fixed[v]) unknown[v] = nu++;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.tris.size() * 9);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nu);
    for (const auto& tr : mesh.tris) {
        Point2 P[3] = {mesh.verts[static_cast<std::size_t>(tr[0])],
                       mesh.verts[static_cast<std::size_t>(tr[1])],
                       mesh.verts[static_cast<std::size_t>(tr[2])]};
        Point2 e[3] = {P[2] - P[1], P[0] - P[2], P[1] - P[0]};  // edge opposite each vertex
        double area = cross(P[1] - P[0], P[2] - P[0]) * 0.5;
        if (!(area > 0)) throw Error("degenerate or flipped mesh triangle");
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double kij = (e[i].x * e[j].x + e[i].y * e[j].y) / (4.0 * area);
                auto vi = static_cast<std::size_t>(tr[i]), vj = static_cast<std::size_t>(tr[j]);
                if (fixed[vi]) continue;
                if (fixed[vj])
                    rhs[unknown[vi]] -= kij * field[vj];
                else
                    trip.emplace_back(unknown[vi], unknown[vj], kij);
            }
    }
    if (nu > 0) {
        Eigen::SparseMatrix<double> K(nu, nu);
        K.setFromTriplets(trip.begin(), trip.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
        if (solver.info() != Eigen::Success) throw Error("stiffness factorization failed");
        Eigen::VectorXd sol = solver.solve(rhs);
        if (solver.info() != Eigen::Success) throw Error("harmonic solve failed");
        for (std::size_t v = 0; v < nv; ++v)
            if (!fixed[v]) field[v] = sol[unknown[v]];
    }
    return field;
}

DiffusionField boundary_diffusion(const std::function<double(double)>& phi1,
                                  DiffusionField skeleton) {
    if (std::abs(phi1(0.0)) > 1e-9 || std::abs(phi1(1.0) - 1.0) > 1e-9)
        throw Error("phi1 must map [0,1] onto [0,1]");
    DiffusionField F = std::move(skeleton);

    std::vector<double> g;
    double prev_bottom = 0.0;
    for (int idx : F.mesh.boundary_loop) {
        Point2 q = F.mesh.verts[static_cast<std::size_t>(idx)];
        double val;
        if (q.x == 1.0) {
            val = 1.0;
        } else if (q.y == q.x) {
            val = q.x;
        } else if (q.y == 0.0) {
            val = phi1(q.x);
            if (val < prev_bottom - 1e-12) throw Error("phi1 must be nondecreasing");
            prev_bottom = val;
        } else {
            throw Error("boundary vertex off the three edges of S");
        }
        g.push_back(val);
    }

    F.A = harmonic_extension(F.mesh, g);
    for (double& a : F.A) a = std::clamp(a, 0.0, 1.0);

    std::vector<double> vals;
    for (const auto& ray : F.rays) {
        vals.clear();
        for (int v : ray) vals.push_back(F.A[static_cast<std::size_t>(v)]);
        std::sort(vals.begin(), vals.end());
        for (std::size_t k = 0; k < ray.size(); ++k)
            F.A[static_cast<std::size_t>(ray[k])] = vals[k];
    }
    return F;
}

namespace {

double pl_interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    double den = xs[i + 1] - xs[i];
    if (!(den > 0)) return ys[i];
    return ys[i] + (x - xs[i]) / den * (ys[i + 1] - ys[i]);
}

}  // namespace

double MonotoneFn::operator()(double x) const { return pl_interp(xs, ys, x); }

double MonotoneFn::inverse(double y) const { return pl_interp(ys, xs, y); }

MonotoneFn tau_max(const DiffusionField& F) {
    if (F.A.size() != F.mesh.verts.size()) throw Error("field has no values");
    if (F.rays.empty()) throw Error("field has no ray structure");
    std::size_t steps = F.rays.front().size();
    MonotoneFn tau;
    for (std::size_t j = 0; j < steps; ++j) {
        double fiber = 0;
        for (const auto& ray : F.rays)
            fiber = std::max(fiber, F.A[static_cast<std::size_t>(ray[j])]);
        double x = F.ray_param[static_cast<std::size_t>(F.rays.front()[j])].second;
        if (j == 0) fiber = 0.0;
        if (!tau.ys.empty()) fiber = std::max(fiber, tau.ys.back());
        tau.xs.push_back(x);
        tau.ys.push_back(fiber);
    }
    return tau;
}

double CubicFn::operator()(double x) const {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    double h = xs[i + 1] - xs[i], u = (x - xs[i]) / h;
    double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    return h00 * ys[i] + h10 * h * slopes[i] + h01 * ys[i + 1] + h11 * h * slopes[i + 1];
}

CubicFn choose_f(const MonotoneFn& tau) {
    const int K = 64;
    CubicFn f;
    f.xs.resize(K + 1);
    f.ys.resize(K + 1);
    for (int k = 0; k <= K; ++k) {
        double s = static_cast<double>(k) / K;
        f.xs[static_cast<std::size_t>(k)] = s;
        double half = tau.inverse(s) / 2.0;
        // capping at tau^{-1} of the previous knot keeps the interpolant
        // under tau^{-1} across the whole knot interval, not just at knots
        f.ys[static_cast<std::size_t>(k)] =
            (k == 0) ? 0.0
                     : std::min(half, tau.inverse(static_cast<double>(k - 1) / K));
    }

    f.slopes.assign(K + 1, 0.0);
    std::vector<double> d(K);
    for (int k = 0; k < K; ++k)
        d[static_cast<std::size_t>(k)] = (f.ys[static_cast<std::size_t>(k + 1)] -
                                          f.ys[static_cast<std::size_t>(k)]) * K;
    f.slopes[0] = d[0];
    f.slopes[static_cast<std::size_t>(K)] = d[static_cast<std::size_t>(K - 1)];
    for (int k = 1; k < K; ++k) {
        double a = d[static_cast<std::size_t>(k - 1)], b = d[static_cast<std::size_t>(k)];
        f.slopes[static_cast<std::size_t>(k)] = (a * b <= 0) ? 0.0 : 2.0 * a * b / (a + b);
    }

    for (int i = 0; i <= 10000; ++i) {
        double s = i / 10000.0;
        if (f(s) > tau.inverse(s) + 1e-12) throw Error("f exceeds the inverse bound");
    }
    return f;
}

PLMap regularized_hstar(const DiffusionField& F, const CubicFn& f,
                        const std::function<double(double)>& Phi) {
    if (F.A.size() != F.mesh.verts.size()) throw Error("field has no values");
    PLMap h;
    h.mesh = F.mesh;
    h.images.resize(F.mesh.verts.size());
    for (std::size_t v = 0; v < F.mesh.verts.size(); ++v) {
        double t = F.ray_param[v].first;  // y/x along the ray, defined at the origin too
        double a = F.A[v];
        double fa = f(a);
        if (fa > F.mesh.verts[v].x + 1e-12)
            throw Error("guard f(A) <= x violated at vertex " + std::to_string(v));
        h.images[v] = {a, (1.0 - t * fa) * Phi(a)};
    }
    return h;
}

}  // namespace sobex
