#include "sobex/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sobex/engine.hpp"
#include "sobex/parallel.hpp"

namespace sobex {

namespace {

struct ScaledJacobian {
    double d11, d12, d21, d22;  // gradient mantissa
    int shift;                  // gradient = mantissa * 2^shift
    double det_scaled;          // source det mantissa (area = det * 2^{2ex1} / 2)
    int ex1;
};

// Per-triangle affine gradient with the source and image edge matrices
// rescaled to power-of-two mantissas, so cells at wildly different scales
// stay inside the double range.
ScaledJacobian tri_jacobian(const Point2& a, const Point2& b, const Point2& c,
                            const Point2& A, const Point2& B, const Point2& C,
                            std::size_t tri_index) {
    double sx1 = b.x - a.x, sy1 = b.y - a.y;
    double sx2 = c.x - a.x, sy2 = c.y - a.y;
    double mx1 = B.x - A.x, my1 = B.y - A.y;
    double mx2 = C.x - A.x, my2 = C.y - A.y;

    double ms = std::max(std::max(std::abs(sx1), std::abs(sy1)),
                         std::max(std::abs(sx2), std::abs(sy2)));
    if (!(ms > 0) || !std::isfinite(ms))
        throw Error("degenerate source triangle " + std::to_string(tri_index));
    double mm = std::max(std::max(std::abs(mx1), std::abs(my1)),
                         std::max(std::abs(mx2), std::abs(my2)));
    if (!std::isfinite(mm)) throw Error("non-finite image at triangle " + std::to_string(tri_index));

    int ex1, ex2 = 0;
    std::frexp(ms, &ex1);
    double f1 = std::ldexp(1.0, -ex1);
    sx1 *= f1; sy1 *= f1; sx2 *= f1; sy2 *= f1;
    if (mm > 0) {
        std::frexp(mm, &ex2);
        double f2 = std::ldexp(1.0, -ex2);
        mx1 *= f2; my1 *= f2; mx2 *= f2; my2 *= f2;
    }

    double det = sx1 * sy2 - sy1 * sx2;
    if (!(det > 0))
        throw Error("degenerate source triangle " + std::to_string(tri_index));

    ScaledJacobian j;
    j.d11 = (mx1 * sy2 - mx2 * sy1) / det;
    j.d12 = (-mx1 * sx2 + mx2 * sx1) / det;
    j.d21 = (my1 * sy2 - my2 * sy1) / det;
    j.d22 = (-my1 * sx2 + my2 * sx1) / det;
    j.shift = ex2 - ex1;
    j.det_scaled = det;
    j.ex1 = ex1;
    return j;
}

double operator_norm(double a, double b, double c, double d) {
    return 0.5 * (std::hypot(a + d, b - c) + std::hypot(a - d, b + c));
}

double lin_fit(const std::vector<double>& x, const std::vector<double>& y, double* intercept,
               double* r2) {
    std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i]; sy += y[i];
        sxx += x[i] * x[i]; sxy += x[i] * y[i]; syy += y[i] * y[i];
    }
    double nn = static_cast<double>(n);
    double vx = sxx - sx * sx / nn, vy = syy - sy * sy / nn, cxy = sxy - sx * sy / nn;
    double slope = (vx > 0) ? cxy / vx : 0.0;
    if (intercept) *intercept = (sy - slope * sx) / nn;
    if (r2) *r2 = (vx > 0 && vy > 0) ? (cxy * cxy) / (vx * vy) : 1.0;
    return slope;
}

}  // namespace

EnergyReport pl_energy(const PLMap& h, double p, MatrixNorm norm) {
    if (h.images.size() != h.mesh.verts.size()) throw Error("image count != vertex count");
    if (!(p >= 1)) throw Error("exponent must be >= 1");
    std::size_t nt = h.mesh.tris.size();
    if (!h.labels.empty() && h.labels.size() != nt) throw Error("label count != triangle count");

    int ncells = 1;
    for (int l : h.labels) {
        if (l < 0) throw Error("negative cell label");
        ncells = std::max(ncells, l + 1);
    }
    std::vector<double> cell(static_cast<std::size_t>(ncells), 0.0);
    double image_area2 = 0;

    for (std::size_t t = 0; t < nt; ++t) {
        const auto& tr = h.mesh.tris[t];
        ScaledJacobian j = tri_jacobian(
            h.mesh.verts[static_cast<std::size_t>(tr[0])], h.mesh.verts[static_cast<std::size_t>(tr[1])],
            h.mesh.verts[static_cast<std::size_t>(tr[2])], h.images[static_cast<std::size_t>(tr[0])],
            h.images[static_cast<std::size_t>(tr[1])], h.images[static_cast<std::size_t>(tr[2])],
            t);
        double nrm = (norm == MatrixNorm::frobenius)
                         ? std::sqrt(j.d11 * j.d11 + j.d12 * j.d12 + j.d21 * j.d21 + j.d22 * j.d22)
                         : operator_norm(j.d11, j.d12, j.d21, j.d22);
        double log2term = std::log2(j.det_scaled / 2) + 2.0 * j.ex1 +
                          p * (std::log2(nrm) + static_cast<double>(j.shift));
        double term = std::exp2(log2term);
        int l = h.labels.empty() ? 0 : h.labels[t];
        cell[static_cast<std::size_t>(l)] += term;

        double detD = j.d11 * j.d22 - j.d12 * j.d21;
        image_area2 += std::exp2(std::log2(std::abs(detD) * j.det_scaled) + 2.0 * j.ex1 +
                                 2.0 * j.shift) * (detD < 0 ? -1.0 : 1.0);
    }

    EnergyReport rep;
    rep.p = p;
    rep.norm = norm;
    for (int l = 0; l < ncells; ++l) {
        std::string name = (static_cast<std::size_t>(l) < h.label_names.size())
                               ? h.label_names[static_cast<std::size_t>(l)]
                               : (ncells == 1 ? std::string("all") : "cell" + std::to_string(l));
        rep.per_cell.emplace_back(name, cell[static_cast<std::size_t>(l)]);
        rep.value += cell[static_cast<std::size_t>(l)];
    }
    if (norm == MatrixNorm::frobenius && p == 2.0) rep.lower_bound = image_area2;  // Hadamard
    return rep;
}

EnergyReport pl_energy(const PLMap& h, double p) {
    return pl_energy(h, p, p == 2.0 ? MatrixNorm::frobenius : MatrixNorm::operator_norm);
}

// ---- p-Douglas band quadrature ----

namespace {

struct LiftCursor {
    const std::vector<double>* xs = nullptr;
    const std::vector<double>* ts = nullptr;
    std::size_t i = 0;

    void seek(double x) {
        auto it = std::upper_bound(xs->begin(), xs->end(), x);
        i = static_cast<std::size_t>(it - xs->begin());
        i = (i > 0) ? i - 1 : 0;
        if (i + 1 >= xs->size()) i = xs->size() - 2;
    }
    double at(double x) {
        while (i + 2 < xs->size() && (*xs)[i + 1] < x) ++i;
        double x0 = (*xs)[i], x1 = (*xs)[i + 1];
        double f = (x1 > x0) ? (x - x0) / (x1 - x0) : 0.0;
        return (*ts)[i] + f * ((*ts)[i + 1] - (*ts)[i]);
    }
};

}  // namespace

DouglasResult douglas_energy(const BoundaryMap& phi, double p, double tol, int max_depth) {
    if (!(p >= 1)) throw Error("exponent must be >= 1");
    std::string why;
    if (!phi.valid(1e-9, &why)) throw Error("douglas_energy: " + why);
    const PolyCurve& src = *phi.source;
    const PolyCurve& tgt = *phi.target;
    double Ls = src.length(), Lt = tgt.length();
    double s0 = phi.corr.front().first, t0 = phi.corr.front().second;

    // lift table over two source periods, in the shifted coordinate x = s - s0
    std::vector<double> tabx, tabt;
    for (const auto& kv : phi.corr) {
        tabx.push_back(kv.first - s0);
        tabt.push_back(kv.second - t0);
    }
    std::size_t base = tabx.size();
    for (std::size_t i = 1; i < base; ++i) {
        tabx.push_back(tabx[i] + Ls);
        tabt.push_back(tabt[i] + Lt);
    }

    // kinks of x -> phi-point: map knots, source vertices, target vertex pullbacks
    std::vector<double> kinks;
    auto push_kink = [&](double s_abs) {
        double x = std::fmod(s_abs - s0, Ls);
        if (x < 0) x += Ls;
        kinks.push_back(x);
    };
    for (const auto& kv : phi.corr) push_kink(kv.first);
    for (std::size_t i = 0; i < src.size(); ++i) push_kink(src.vertex_param(i));
    for (std::size_t i = 0; i < tgt.size(); ++i) push_kink(phi.evaluate_inverse(tgt.vertex_param(i)));
    kinks.push_back(0.0);
    std::sort(kinks.begin(), kinks.end());
    kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());

    const int Ng = 8, CX = 32;
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    std::vector<double> rotated(kinks.size());
    std::vector<long long> chunk_evals(static_cast<std::size_t>(Ng * CX), 0);

    DouglasResult res;
    int streak = 0;
    for (int k = 1; k <= max_depth; ++k) {
        double G = Ls * std::ldexp(1.0, -k - 1);  // band gap range [G, 2G]
        double wg = G / Ng;
        double band = 0;
        std::fill(chunk_evals.begin(), chunk_evals.end(), 0);
        for (int q = 0; q < Ng; ++q) {
            double g = G * (1.0 + (q + 0.5) / Ng);
            // kinks shifted by -g, wrapped: a rotation of the sorted list
            std::size_t j0 = static_cast<std::size_t>(
                std::lower_bound(kinks.begin(), kinks.end(), g) - kinks.begin());
            std::size_t n = kinks.size(), w = 0;
            for (std::size_t i = j0; i < n; ++i) rotated[w++] = kinks[i] - g;
            for (std::size_t i = 0; i < j0; ++i) rotated[w++] = kinks[i] - g + Ls;

            double qsum = ordered_chunk_sum(CX, [&](int cx) {
                double xlo = Ls * cx / CX, xhi = Ls * (cx + 1) / CX;
                std::size_t i1 = static_cast<std::size_t>(
                    std::upper_bound(kinks.begin(), kinks.end(), xlo) - kinks.begin());
                std::size_t i2 = static_cast<std::size_t>(
                    std::upper_bound(rotated.begin(), rotated.end(), xlo) - rotated.begin());
                LiftCursor Tx{&tabx, &tabt}, Ty{&tabx, &tabt};
                Tx.seek(xlo);
                Ty.seek(xlo + g);
                double xa = xlo, sum = 0;
                long long evals = 0;
                while (xa < xhi) {
                    double xb = xhi;
                    if (i1 < kinks.size() && kinks[i1] < xb) xb = kinks[i1];
                    if (i2 < rotated.size() && rotated[i2] < xb) xb = rotated[i2];
                    if (i1 < kinks.size() && kinks[i1] <= xb) ++i1;
                    if (i2 < rotated.size() && rotated[i2] <= xb) ++i2;
                    double h2 = 0.5 * (xb - xa);
                    if (h2 > 1e-18 * Ls) {
                        double xm = 0.5 * (xa + xb);
                        for (double node : {xm - h2 * inv_sqrt3, xm + h2 * inv_sqrt3}) {
                            double tx = Tx.at(node), ty = Ty.at(node + g);
                            Point2 px = src.point_at(src.wrap(s0 + node));
                            Point2 py = src.point_at(src.wrap(s0 + node + g));
                            Point2 qx = tgt.point_at(tgt.wrap(t0 + tx));
                            Point2 qy = tgt.point_at(tgt.wrap(t0 + ty));
                            double chord = dist(px, py);
                            if (chord > 0) sum += h2 * std::pow(dist(qx, qy) / chord, p);
                            evals += 1;
                        }
                    }
                    xa = xb;
                }
                chunk_evals[static_cast<std::size_t>(q * CX + cx)] += evals;
                return sum;
            });
            band += 2.0 * wg * qsum;
        }
        for (long long e : chunk_evals) res.evals += e;
        res.bands.push_back(band);
        res.value += band;
        res.depth = k;

        if (k >= 2) {
            double prev = res.bands[static_cast<std::size_t>(k - 2)];
            streak = (band >= prev * (1.0 - 1e-9)) ? streak + 1 : 0;
            if (streak >= 7) {  // 8 consecutive non-decreasing bands
                res.divergent = true;
                break;
            }
            if (prev > 0 && band < prev) {
                double r = band / prev;
                res.tail = (r < 0.95) ? band * r / (1.0 - r) : band;
                if (res.tail < tol * res.value) {
                    res.stabilized = true;
                    break;
                }
            }
        }
    }
    return res;
}

// ---- modulus of continuity ----

std::vector<std::pair<double, double>> modulus_of_continuity(const BoundaryMap& phi,
                                                             const std::vector<double>& grid) {
    if (grid.empty()) throw Error("empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0)) throw Error("grid values must be positive");
        if (i > 0 && !(grid[i] < grid[i - 1])) throw Error("grid must be decreasing");
    }
    const PolyCurve& src = *phi.source;
    double Ls = src.length();

    std::vector<double> params;
    for (const auto& kv : phi.corr) params.push_back(src.wrap(kv.first));
    for (std::size_t i = 0; i < src.size(); ++i) params.push_back(src.vertex_param(i));
    for (std::size_t i = 0; i < phi.target->size(); ++i)
        params.push_back(phi.evaluate_inverse(phi.target->vertex_param(i)));
    std::sort(params.begin(), params.end());
    params.erase(std::unique(params.begin(), params.end()), params.end());

    std::size_t n = params.size();
    std::vector<Point2> pts(n), imgs(n);
    for (std::size_t i = 0; i < n; ++i) {
        pts[i] = src.point_at(params[i]);
        imgs[i] = phi(params[i]);
    }

    // exact chordal-distance-t point on the segment from the last inside
    // sample to the first outside one; adjacent samples bound a straight
    // piece of the curve, so param interpolation matches the chord
    auto crossing = [&](std::size_t jin, std::size_t jout, int dir, Point2 center, double t,
                        Point2* out) {
        Point2 a = pts[jin] - center, d = pts[jout] - pts[jin];
        double dd = d.x * d.x + d.y * d.y;
        if (!(dd > 0)) return false;
        double bq = a.x * d.x + a.y * d.y;
        double cq = a.x * a.x + a.y * a.y - t * t;
        double disc = bq * bq - dd * cq;
        if (disc < 0) return false;
        double u = std::clamp((-bq + std::sqrt(disc)) / dd, 0.0, 1.0);
        double gap = (dir > 0) ? params[jout] - params[jin] : params[jin] - params[jout];
        if (gap < 0) gap += Ls;
        *out = phi(src.wrap(params[jin] + dir * u * gap));
        return true;
    };

    std::vector<std::pair<double, double>> out;
    for (double t : grid) {
        double best = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (int dir : {1, -1}) {
                std::size_t prev = i;
                for (std::size_t step = 1; step < n; ++step) {
                    std::size_t j = (dir > 0) ? (i + step) % n : (i + n - step % n) % n;
                    if (dist(pts[i], pts[j]) > t) {
                        Point2 x;
                        if (crossing(prev, j, dir, pts[i], t, &x))
                            best = std::max(best, dist(imgs[i], x));
                        break;
                    }
                    best = std::max(best, dist(imgs[i], imgs[j]));
                    prev = j;
                }
            }
        }
        out.emplace_back(t, best);
    }
    for (std::size_t k = out.size(); k-- > 1;)  // insurance: nondecreasing in t
        out[k - 1].second = std::max(out[k - 1].second, out[k].second);
    return out;
}

// ---- Dini-type integral of omega^2 ----

Dini2Result dini2_integral(std::vector<std::pair<double, double>> omega, double delta) {
    if (omega.size() < 2) throw Error("need at least two omega samples");
    if (!(delta > 0 && delta < 1)) throw Error("cutoff must be in (0,1)");
    std::sort(omega.begin(), omega.end());
    omega.erase(std::unique(omega.begin(), omega.end(),
                            [](const auto& a, const auto& b) { return a.first == b.first; }),
                omega.end());
    if (omega.size() < 2) throw Error("need at least two omega samples");
    for (const auto& s : omega)
        if (!(s.first > 0) || !(s.second >= 0)) throw Error("omega samples must be positive");

    // x = ln t descending from 0; omega interpolated linearly in x
    auto omega_at = [&](double t) {
        auto it = std::lower_bound(omega.begin(), omega.end(), std::make_pair(t, -1.0));
        if (it == omega.begin()) return it->second;
        if (it == omega.end()) return (it - 1)->second;
        auto p0 = *(it - 1), p1 = *it;
        double f = std::log(t / p0.first) / std::log(p1.first / p0.first);
        return p0.second + f * (p1.second - p0.second);
    };

    double t_lo = std::max(delta, omega.front().first);
    double t_hi = std::min(1.0, omega.back().first);
    if (!(t_lo < t_hi)) throw Error("omega samples do not cover the integration range");

    // integration nodes: sample t's in range plus the exact endpoints and decade cuts
    std::vector<double> ts{t_lo, t_hi};
    for (const auto& s : omega)
        if (s.first > t_lo && s.first < t_hi) ts.push_back(s.first);
    int decades = static_cast<int>(std::floor(-std::log10(t_lo) + 1e-12));
    for (int d = 1; d <= decades; ++d) {
        double td = std::pow(10.0, -d);
        if (td > t_lo && td < t_hi) ts.push_back(td);
    }
    std::sort(ts.begin(), ts.end(), std::greater<>());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

    Dini2Result res;
    double acc = 0;
    int next_decade = 1;
    double w_prev = omega_at(ts[0]);
    for (std::size_t i = 1; i < ts.size(); ++i) {
        double w_cur = omega_at(ts[i]);
        double dx = std::log(ts[i - 1] / ts[i]);
        acc += 0.5 * (w_prev * w_prev + w_cur * w_cur) * dx;
        w_prev = w_cur;
        while (next_decade <= decades && ts[i] <= std::pow(10.0, -next_decade) * (1 + 1e-12)) {
            res.partials.push_back(acc);
            ++next_decade;
        }
    }
    res.value = acc;

    std::size_t D = res.partials.size();
    std::vector<double> lx, ly, incr;
    for (std::size_t d = 1; d < D; ++d) {
        double di = res.partials[d] - res.partials[d - 1];
        incr.push_back(di);
        if (di > 0) {
            lx.push_back(std::log(1.0 + (static_cast<double>(d) + 0.5) * std::log(10.0)));
            ly.push_back(std::log(di));
        }
    }
    if (lx.size() >= 4 && lx.size() == incr.size()) {
        double slope = lin_fit(lx, ly, nullptr, &res.fit_r2);
        res.fitted_exponent = 1.0 + slope;
        res.divergent = res.fitted_exponent >= -0.02;
    } else if (D >= 4) {
        res.fitted_exponent = -99;  // increments vanish: certainly convergent
        res.fit_r2 = 1.0;
    }

    if (!res.divergent && D >= 4) {
        // extrapolate I(u) = A - B u^{-b}, scanning the decay rate b
        double best_sse = 1e300, best_A = res.value;
        std::vector<double> u(D);
        for (std::size_t d = 0; d < D; ++d)
            u[d] = 1.0 + (static_cast<double>(d) + 1.0) * std::log(10.0);
        for (double b = 0.01; b <= 2.0; b += 0.005) {
            std::vector<double> z(D);
            for (std::size_t d = 0; d < D; ++d) z[d] = -std::pow(u[d], -b);
            double A, r2;
            double B = lin_fit(z, res.partials, &A, &r2);
            if (B < 0) continue;
            double sse = 0;
            for (std::size_t d = 0; d < D; ++d) {
                double e = res.partials[d] - (A + B * z[d]);
                sse += e * e;
            }
            if (sse < best_sse) {
                best_sse = sse;
                best_A = A;
            }
        }
        res.limit_estimate = std::max(best_A, res.value);
    }
    return res;
}

// ---- crosscut sum ----

double crosscut_sum(const CrosscutTree& tree, double p, std::vector<double>* per_generation) {
    if (per_generation) per_generation->clear();
    double total = 0;
    for (std::size_t g = 0; g < tree.cuts.size(); ++g) {
        int n = tree.family.n0 + static_cast<int>(g);
        double weight = std::exp2((p - 2.0) * n);
        double gen = 0;
        for (const auto& cut : tree.cuts[g]) gen += std::pow(polyline_length(cut), p);
        gen *= weight;
        if (per_generation) per_generation->push_back(gen);
        total += gen;
    }
    return total;
}

// ---- homeomorphism verification ----

HomeoVerdict verify_homeomorphism(const PLMap& h, double boundary_tol) {
    HomeoVerdict v;
    if (h.images.size() != h.mesh.verts.size()) {
        v.clause = "orientation";
        v.witness = "image count != vertex count";
        return v;
    }

    double image_area = 0;
    for (std::size_t t = 0; t < h.mesh.tris.size(); ++t) {
        const auto& tr = h.mesh.tris[t];
        Point2 A = h.images[static_cast<std::size_t>(tr[0])];
        Point2 B = h.images[static_cast<std::size_t>(tr[1])];
        Point2 C = h.images[static_cast<std::size_t>(tr[2])];
        double d1x = B.x - A.x, d1y = B.y - A.y, d2x = C.x - A.x, d2y = C.y - A.y;
        double m = std::max(std::max(std::abs(d1x), std::abs(d1y)),
                            std::max(std::abs(d2x), std::abs(d2y)));
        if (!(m > 0) || !std::isfinite(m)) {
            v.clause = "orientation";
            v.witness = "triangle " + std::to_string(t) + " collapses";
            return v;
        }
        double inv = 1.0 / m;
        double cross = (d1x * inv) * (d2y * inv) - (d1y * inv) * (d2x * inv);
        if (!(cross > 0)) {
            v.clause = "orientation";
            v.witness = "triangle " + std::to_string(t) + " flipped";
            return v;
        }
        image_area += 0.5 * (d1x * d2y - d1y * d2x);
    }

    std::vector<Point2> loop;
    for (int idx : h.mesh.boundary_loop) loop.push_back(h.images[static_cast<std::size_t>(idx)]);
    if (loop.size() < 3) {
        v.clause = "boundary";
        v.witness = "no boundary loop";
        return v;
    }
    PolyCurve image_bd = PolyCurve::closed(std::move(loop));
    if (!image_bd.is_simple()) {
        v.clause = "boundary";
        v.witness = "image boundary self-intersects";
        return v;
    }

    auto dist_to_curve = [](Point2 q, const PolyCurve& c) {
        double best = 1e300;
        for (std::size_t i = 0; i < c.size(); ++i)
            best = std::min(best, dist_point_segment(q, c.v[i], c.v[(i + 1) % c.size()]));
        return best;
    };
    auto samples = [](const PolyCurve& c) {
        std::vector<Point2> s;
        for (std::size_t i = 0; i < c.size(); ++i) {
            Point2 a = c.v[i], b = c.v[(i + 1) % c.size()];
            s.push_back(a);
            s.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
        }
        return s;
    };

    double target_area = image_bd.signed_area(), perim = image_bd.length();
    if (h.boundary_corr) {
        const PolyCurve& target = *h.boundary_corr->target;
        double haus = 0;
        for (Point2 q : samples(image_bd)) haus = std::max(haus, dist_to_curve(q, target));
        for (Point2 q : samples(target)) haus = std::max(haus, dist_to_curve(q, image_bd));
        v.boundary_error = haus;
        if (haus > boundary_tol) {
            v.clause = "boundary";
            v.witness = "Hausdorff distance " + std::to_string(haus);
            return v;
        }
        target_area = std::abs(target.signed_area());
        perim = target.length();
    }

    v.area_mismatch = std::abs(image_area - std::abs(target_area));
    if (v.area_mismatch > boundary_tol * perim) {
        v.clause = "area";
        v.witness = "area mismatch " + std::to_string(v.area_mismatch);
        return v;
    }
    v.pass = true;
    return v;
}

// ---- monotone series oracle ----

Lemma21Result lemma21_check(const std::vector<double>& a, double p) {
    if (!(p > 2)) throw Error("series oracle needs p > 2");
    if (a.empty()) throw Error("empty sequence");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a[i] >= 0)) throw Error("sequence must be nonnegative");
        if (i > 0 && a[i] > a[i - 1]) throw Error("sequence must be nonincreasing");
    }
    Lemma21Result r;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double nxt = (j + 1 < a.size()) ? a[j + 1] : 0.0;
        r.input_sum += std::exp2((p - 2.0) * static_cast<double>(j)) * std::pow(a[j] - nxt, p);
        r.output_sum += std::exp2((p - 2.0) * static_cast<double>(j)) * std::pow(a[j], p);
    }
    if (r.input_sum > 0) {
        r.ratio = r.output_sum / r.input_sum;
    } else if (r.output_sum > 0) {
        r.ratio = std::numeric_limits<double>::infinity();
        r.flagged = true;
    }
    return r;
}

double lemma21_constant(double p) {
    if (!(p > 2)) throw Error("series oracle needs p > 2");
    double q_exp = (p - 2.0) / (2.0 * (p - 1.0));        // alpha^{-q} = 2^{-q_exp}
    double first = std::pow(1.0 - std::exp2(-q_exp), -(p - 1.0));
    double second = 1.0 / (1.0 - std::exp2(-(p - 2.0) / 2.0));
    return first * second;
}

}  // namespace sobex
