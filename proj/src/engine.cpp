#include "sobex/engine.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstdint>
#include <cstring>
#include <map>
#include <unordered_map>
#include <utility>

namespace sobex {

namespace {

constexpr double kPi = 3.14159265358979323846;

// ---- polyline helpers ----

std::vector<double> cumlen(const std::vector<Point2>& pts) {
    std::vector<double> c(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i) c[i] = c[i - 1] + dist(pts[i - 1], pts[i]);
    return c;
}

Point2 polyline_at(const std::vector<Point2>& pts, const std::vector<double>& cum, double s) {
    if (s <= 0.0) return pts.front();
    if (s >= cum.back()) return pts.back();
    std::size_t i = static_cast<std::size_t>(
        std::upper_bound(cum.begin(), cum.end(), s) - cum.begin());
    if (i == 0) return pts.front();
    if (i >= pts.size()) return pts.back();
    double seg = cum[i] - cum[i - 1];
    double t = seg > 0.0 ? (s - cum[i - 1]) / seg : 0.0;
    return pts[i - 1] + t * (pts[i] - pts[i - 1]);
}

// piece of pts between arc lengths s0 < s1, endpoints interpolated exactly
std::vector<Point2> sub_polyline(const std::vector<Point2>& pts, const std::vector<double>& cum,
                                 double s0, double s1) {
    double tol = 1e-12 * std::max(cum.back(), 1e-300);
    std::vector<Point2> out;
    out.push_back(polyline_at(pts, cum, s0));
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (cum[i] > s0 + tol && cum[i] < s1 - tol) out.push_back(pts[i]);
    Point2 last = polyline_at(pts, cum, s1);
    if (!(last == out.back())) out.push_back(last);
    if (out.size() < 2) out.push_back(last);
    return out;
}

std::vector<Point2> reversed_pts(std::vector<Point2> pts) {
    std::reverse(pts.begin(), pts.end());
    return pts;
}

double polygon_area(const std::vector<Point2>& pts) {
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) s += cross(pts[i], pts[(i + 1) % pts.size()]);
    return 0.5 * s;
}

Point2 unit(Point2 v) {
    double n = norm(v);
    return n > 0.0 ? v / n : Point2{0.0, 0.0};
}

// strict crossing of open segment interiors
bool proper_cross(Point2 p, Point2 q, Point2 a, Point2 b) {
    double d1 = orient(a, b, p), d2 = orient(a, b, q);
    double d3 = orient(p, q, a), d4 = orient(p, q, b);
    return ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) &&
           ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0));
}

double seg_distance(Point2 a, Point2 b, Point2 c, Point2 d) {
    if (proper_cross(a, b, c, d)) return 0.0;
    return std::min(std::min(dist_point_segment(a, c, d), dist_point_segment(b, c, d)),
                    std::min(dist_point_segment(c, a, b), dist_point_segment(d, a, b)));
}

// copy with the two end segments shortened, so contacts at the polyline's own
// endpoints stop registering
std::vector<Point2> end_trimmed(const std::vector<Point2>& c, double frac = 0.02) {
    std::vector<Point2> t = c;
    if (t.size() >= 2) {
        t.front() = t.front() + frac * (t[1] - t.front());
        t.back() = t.back() + frac * (t[t.size() - 2] - t.back());
    }
    return t;
}

bool polyline_simple(const std::vector<Point2>& c, double eps) {
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
        for (std::size_t j = i + 1; j + 1 < c.size(); ++j) {
            if (j == i + 1) {
                if (dist_point_segment(c[i], c[j], c[j + 1]) <= eps && !(c[i] == c[j])) return false;
                if (dist_point_segment(c[j + 1], c[i], c[i + 1]) <= eps && !(c[j + 1] == c[j]))
                    return false;
                continue;
            }
            if (seg_distance(c[i], c[i + 1], c[j], c[j + 1]) <= eps) return false;
        }
    return true;
}

// distance from every (end-trimmed) point of c to the closed curve bd
bool polyline_clear(const std::vector<Point2>& c, const PolyCurve& bd, double eps) {
    std::vector<Point2> t = end_trimmed(c);
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
        for (std::size_t k = 0; k < bd.size(); ++k)
            if (seg_distance(t[i], t[i + 1], bd.v[k], bd.v[(k + 1) % bd.size()]) <= eps)
                return false;
    return true;
}

// ---- cut post-processing ----
//
// Funnel shortest paths run along straight boundary stretches and wrap
// boundary corners; a geodesic for the hyperbolic metric would bulge
// strictly inside instead. Bow hugging chords inward and nudge wrapped
// vertices along the concave bisector until the cut clears the boundary.
std::vector<Point2> interiorize(std::vector<Point2> path, const PolygonDomain& region,
                                double shrink) {
    if (path.size() < 2) throw Error("degenerate crosscut path");
    double len = polyline_length(path);
    double eps = 1e-9 * std::max(len, 1e-300);

    auto good = [&](const std::vector<Point2>& c) {
        if (!polyline_simple(c, eps)) return false;
        if (!polyline_clear(c, region.boundary, eps)) return false;
        for (std::size_t i = 1; i + 1 < c.size(); ++i)
            if (!region.contains(c[i])) return false;
        for (std::size_t i = 0; i + 1 < c.size(); ++i)
            if (!region.contains(0.5 * (c[i] + c[i + 1]))) return false;
        return true;
    };

    if (path.size() == 2) {
        if (good(path)) return path;
        Point2 A = path.front(), B = path.back();
        double ab = dist(A, B);
        Point2 n = unit(perp(B - A));
        Point2 mid = 0.5 * (A + B);
        double side = 0.0;
        for (double probe = 1e-3 * ab; probe > 1e-9 * ab; probe *= 0.25) {
            if (region.contains(mid + probe * n)) { side = 1.0; break; }
            if (region.contains(mid - probe * n)) { side = -1.0; break; }
        }
        if (side == 0.0) throw Error("crosscut chord has no interior side");
        const int K = 8;
        for (double delta = 0.2 * ab * shrink; delta > 1e-7 * ab; delta *= 0.5) {
            for (double s : {side, -side}) {
                std::vector<Point2> c;
                c.push_back(A);
                for (int i = 1; i < K; ++i) {
                    double f = static_cast<double>(i) / K;
                    c.push_back(A + f * (B - A) + (s * delta * std::sin(kPi * f)) * n);
                }
                c.push_back(B);
                if (good(c)) return c;
            }
        }
        throw Error("crosscut chord cannot be bowed off the boundary (span " +
                    std::to_string(ab) + ")");
    }

    for (double scale = 0.05 * shrink; scale > 2e-6; scale *= 0.5) {
        std::vector<Point2> c = path;
        for (std::size_t i = 1; i + 1 < path.size(); ++i) {
            Point2 v = path[i];
            Point2 u = unit(path[i - 1] - v), w = unit(path[i + 1] - v);
            Point2 dir = u + w;
            double d = std::min(dist(path[i - 1], v), dist(path[i + 1], v));
            // a taut path bends around boundary corners, so the turn bisector
            // may point out of the region; flip toward the side that contains
            // the nudged point at the current scale
            dir = norm(dir) < 1e-9 ? unit(perp(path[i + 1] - path[i - 1])) : unit(dir);
            Point2 q = v + (scale * d) * dir;
            if (!region.contains(q)) q = v - (scale * d) * dir;
            c[i] = q;
        }
        if (good(c)) return c;
    }
    throw Error("crosscut path of " + std::to_string(path.size()) +
                " points cannot be nudged off the boundary (length " + std::to_string(len) +
                ")");
}

// pairwise disjointness of two cuts that may share endpoints
bool cuts_disjoint(const std::vector<Point2>& a, const std::vector<Point2>& b) {
    double eps = 1e-9 * std::max(polyline_length(a) + polyline_length(b), 1e-300);
    std::vector<Point2> ta = end_trimmed(a), tb = end_trimmed(b);
    for (std::size_t i = 0; i + 1 < ta.size(); ++i)
        for (std::size_t j = 0; j + 1 < tb.size(); ++j)
            if (seg_distance(ta[i], ta[i + 1], tb[j], tb[j + 1]) <= eps) return false;
    return true;
}

bool same_curve(const PolyCurve& a, const PolyCurve& b) {
    return a.size() == b.size() && a.v.front() == b.v.front() &&
           std::abs(a.length() - b.length()) <= 1e-12 * std::max(a.length(), 1e-300);
}

// lift t above base by whole target periods
double lift_above(double t, double base, double period) {
    while (t <= base) t += period;
    return t;
}

// curve vertex params strictly inside (s0, s1); s1 may exceed one period
std::vector<double> params_in_arc(const PolyCurve& c, double s0, double s1) {
    double L = c.length(), tol = 1e-12 * L;
    std::vector<double> out;
    for (std::size_t k = 0; k < c.size(); ++k)
        for (double s : {c.cum[k], c.cum[k] + L}) {
            if (s > s0 + tol && s < s1 - tol) out.push_back(s);
        }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

// ---- crosscut tree ----

CrosscutTree crosscut_tree(const PolygonDomain& Y, const BoundaryMap& phi,
                           const DyadicFamily& fam) {
    std::string why;
    if (!phi.valid(1e-9, &why)) throw Error("boundary map invalid: " + why);
    if (!fam.circle || !phi.source || !same_curve(*fam.circle, *phi.source))
        throw Error("dyadic family and boundary map must share the source circle");
    if (!phi.target || !same_curve(*phi.target, Y.boundary))
        throw Error("boundary map target does not match the domain");

    const PolyCurve& target = *phi.target;
    double Lt = target.length();
    int G = fam.N - fam.n0;

    CrosscutTree tree;
    tree.family = fam;
    tree.cuts.assign(static_cast<std::size_t>(G) + 1, {});

    // image polyline of a dyadic arc, endpoints exact
    auto arc_image = [&](int n, std::size_t j) {
        const ArcRef& a = fam.arc(n, j);
        double t0 = phi.evaluate(phi.source->wrap(a.s0));
        double t1 = lift_above(phi.evaluate(phi.source->wrap(a.s1)), t0, Lt);
        return ArcRef{&target, t0, t1}.polyline();
    };

    auto fix_pair = [&](std::vector<Point2>& second, const std::vector<Point2>& first,
                        const PolygonDomain& region, Point2 a, Point2 b,
                        const GeodesicOracle& oracle) {
        double shrink = 1.0;
        for (int k = 0; k < 6; ++k) {
            if (cuts_disjoint(first, second)) return;
            shrink *= 0.4;
            second = interiorize(oracle.path(a, b), region, shrink);
        }
        throw Error("sibling crosscuts keep intersecting");
    };

    // generation n0 inside the whole domain
    {
        GeodesicOracle oracle(Y);
        std::size_t m = static_cast<std::size_t>(1) << fam.n0;
        auto& gen = tree.cuts[0];
        gen.resize(m);
        std::vector<std::vector<Point2>> imgs(m);
        for (std::size_t j = 0; j < m; ++j) {
            imgs[j] = arc_image(fam.n0, j);
            gen[j] = interiorize(oracle.path(imgs[j].front(), imgs[j].back()), Y, 1.0);
        }
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = 0; k < j; ++k)
                fix_pair(gen[j], gen[k], Y, imgs[j].front(), imgs[j].back(), oracle);
    }

    for (int g = 1; g <= G; ++g) {
        int n = fam.n0 + g;
        std::size_t m = static_cast<std::size_t>(1) << n;
        auto& gen = tree.cuts[static_cast<std::size_t>(g)];
        gen.resize(m);
        const auto& parents = tree.cuts[static_cast<std::size_t>(g - 1)];
        for (std::size_t jp = 0; jp < parents.size(); ++jp) {
            try {
                std::vector<Point2> arcp = arc_image(n - 1, jp);
                std::vector<Point2> region_pts(arcp.begin(), arcp.end() - 1);
                std::vector<Point2> back = reversed_pts(parents[jp]);
                region_pts.insert(region_pts.end(), back.begin(), back.end() - 1);
                PolygonDomain region = PolygonDomain::from_points(std::move(region_pts));
                GeodesicOracle oracle(region);

                std::vector<Point2> arcl = arc_image(n, 2 * jp);
                Point2 A = arcl.front(), M = arcl.back(), B = arcp.back();
                auto& left = gen[2 * jp];
                auto& right = gen[2 * jp + 1];
                left = interiorize(oracle.path(A, M), region, 1.0);
                right = interiorize(oracle.path(M, B), region, 1.0);
                fix_pair(right, left, region, M, B, oracle);
            } catch (const Error& e) {
                throw Error("crosscut " + std::to_string(n) + "." + std::to_string(2 * jp) +
                            ": " + e.what());
            }
        }
    }
    return tree;
}

// ---- cell decomposition of T ----

std::vector<double> default_alpha_schedule(int n0, int N) {
    if (N < n0) throw Error("bad generation range");
    std::vector<double> a;
    for (int g = 0; g <= N - n0; ++g) a.push_back((kPi / 4.0) / (g + 1));
    return a;
}

CellDecomposition disk_cells(const DyadicFamily& fam, const std::vector<double>& schedule) {
    int G = fam.N - fam.n0;
    std::vector<double> alpha = schedule.empty() ? default_alpha_schedule(fam.n0, fam.N) : schedule;
    if (alpha.size() != static_cast<std::size_t>(G) + 1)
        throw Error("tent angle schedule must cover every generation");
    if (std::abs(alpha[0] - kPi / 4.0) > 1e-12)
        throw Error("tent angle schedule must start at pi/4");
    for (int g = 0; g < G; ++g)
        if (!(alpha[static_cast<std::size_t>(g) + 1] < alpha[static_cast<std::size_t>(g)] &&
              alpha[static_cast<std::size_t>(g) + 1] > 0.0))
            throw Error("tent angle schedule must decrease strictly to a positive value");

    CellDecomposition dec;
    dec.n0 = fam.n0;
    dec.N = fam.N;
    dec.alpha = alpha;

    auto interval = [](int g, std::size_t r) {
        double w = std::ldexp(2.0, -g);
        double a = -1.0 + static_cast<double>(r) * w;
        return std::pair<double, double>{a, a + w};
    };

    dec.legs.resize(static_cast<std::size_t>(G) + 1);
    for (int g = 0; g <= G; ++g) {
        double tn = std::tan(alpha[static_cast<std::size_t>(g)]);
        std::size_t cnt = static_cast<std::size_t>(1) << g;
        for (std::size_t r = 0; r < cnt; ++r) {
            auto [a, b] = interval(g, r);
            double m = 0.5 * (a + b), h = 0.5 * (b - a) * tn;
            dec.legs[static_cast<std::size_t>(g)].push_back(
                {Point2{a, 0.0}, Point2{m, h}, Point2{b, 0.0}});
        }
    }

    dec.cells.resize(static_cast<std::size_t>(G));
    for (int g = 0; g < G; ++g) {
        double tn = std::tan(alpha[static_cast<std::size_t>(g)]);
        double tc = std::tan(alpha[static_cast<std::size_t>(g) + 1]);
        std::size_t cnt = static_cast<std::size_t>(1) << g;
        for (std::size_t r = 0; r < cnt; ++r) {
            auto [a, b] = interval(g, r);
            double m = 0.5 * (a + b);
            Point2 A{a, 0.0}, B{b, 0.0};
            Point2 apexP = dec.legs[static_cast<std::size_t>(g)][r][1];
            Point2 apexL = dec.legs[static_cast<std::size_t>(g) + 1][2 * r][1];
            Point2 apexR = dec.legs[static_cast<std::size_t>(g) + 1][2 * r + 1][1];
            Point2 M{m, 0.0};
            // child legs extended through their apexes meet the parent legs
            double xl = (a * tn + m * tc) / (tn + tc);
            double xr = (b * tn + m * tc) / (tn + tc);
            Point2 PL{xl, tn * (xl - a)}, PR{xr, tn * (b - xr)};

            DiskCell cell;
            cell.a = a;
            cell.b = b;
            cell.outline = {A, apexL, M, apexR, B, apexP};
            cell.central = {apexL, M, apexR, PR, apexP, PL};
            cell.left = {A, apexL, PL};
            cell.right = {B, PR, apexR};
            dec.cells[static_cast<std::size_t>(g)].push_back(std::move(cell));
        }
    }
    return dec;
}

// ---- target decomposition ----

namespace {

struct PieceFrame {
    std::vector<Point2> outline;  // V_{n,j}, CCW
    double area = 0.0;
};

bool simple_positive(const std::vector<Point2>& pts) {
    if (pts.size() < 3) return false;
    if (polygon_area(pts) <= 0.0) return false;
    try {
        return PolyCurve::closed(pts).is_simple();
    } catch (const Error&) {
        return false;
    }
}

}  // namespace

TargetDecomposition target_cells(const CrosscutTree& tree, std::vector<double> d) {
    const auto& cuts = tree.cuts;
    if (cuts.size() < 2) throw Error("target decomposition needs at least two generations");
    int G = static_cast<int>(cuts.size()) - 1;

    std::vector<double> minlen(static_cast<std::size_t>(G) + 1);
    Point2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    for (int g = 0; g <= G; ++g) {
        double m = 1e300;
        for (const auto& c : cuts[static_cast<std::size_t>(g)]) {
            m = std::min(m, polyline_length(c));
            for (Point2 p : c) {
                lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y);
                hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y);
            }
        }
        minlen[static_cast<std::size_t>(g)] = m;
    }
    double diam = dist(lo, hi);

    bool user_d = !d.empty();
    if (user_d) {
        if (d.size() != static_cast<std::size_t>(G) + 1)
            throw Error("corner depth schedule must cover every generation");
        for (int g = 0; g <= G; ++g) {
            double dg = d[static_cast<std::size_t>(g)];
            if (!(dg > 0.0) || dg >= minlen[static_cast<std::size_t>(g)] / 2.0 ||
                (g > 0 && dg > d[static_cast<std::size_t>(g) - 1]))
                throw Error("corner depth schedule must decrease and stay below half "
                            "the shortest cut");
        }
    } else {
        d.resize(static_cast<std::size_t>(G) + 1);
        for (int g = 0; g <= G; ++g) {
            double dg = std::min(minlen[static_cast<std::size_t>(g)] / 4.0,
                                 std::pow(8.0, -(tree.family.n0 + g)) * diam);
            if (g > 0) dg = std::min(dg, d[static_cast<std::size_t>(g) - 1]);
            d[static_cast<std::size_t>(g)] = dg;
        }
    }

    // V outlines are d-independent
    std::vector<std::vector<PieceFrame>> frames(static_cast<std::size_t>(G));
    for (int g = 0; g < G; ++g) {
        std::size_t cnt = cuts[static_cast<std::size_t>(g)].size();
        frames[static_cast<std::size_t>(g)].resize(cnt);
        for (std::size_t j = 0; j < cnt; ++j) {
            const auto& P = cuts[static_cast<std::size_t>(g)][j];
            const auto& Lc = cuts[static_cast<std::size_t>(g) + 1][2 * j];
            const auto& Rc = cuts[static_cast<std::size_t>(g) + 1][2 * j + 1];
            std::vector<Point2> v(Lc.begin(), Lc.end() - 1);
            v.insert(v.end(), Rc.begin(), Rc.end() - 1);
            std::vector<Point2> back = reversed_pts(P);
            v.insert(v.end(), back.begin(), back.end() - 1);
            if (!simple_positive(v))
                throw Error("region between cuts is degenerate at generation " +
                            std::to_string(tree.family.n0 + g));
            frames[static_cast<std::size_t>(g)][j].area = polygon_area(v);
            frames[static_cast<std::size_t>(g)][j].outline = std::move(v);
        }
    }

    std::string why;
    auto build_piece = [&](int g, std::size_t j, double dn, double dn1,
                           TargetPiece& out) -> bool {
        const auto& P = cuts[static_cast<std::size_t>(g)][j];
        const auto& Lc = cuts[static_cast<std::size_t>(g) + 1][2 * j];
        const auto& Rc = cuts[static_cast<std::size_t>(g) + 1][2 * j + 1];
        auto cp = cumlen(P), cl = cumlen(Lc), cr = cumlen(Rc);
        double LP = cp.back(), LL = cl.back(), LR = cr.back();
        why = "piece " + std::to_string(g) + "." + std::to_string(j);
        if (dn >= LP / 2.0 || dn1 >= LL / 2.0 || dn1 >= LR / 2.0) {
            why += ": depth exceeds half a cut";
            return false;
        }

        const auto& frame = frames[static_cast<std::size_t>(g)][j];
        PolygonDomain V = PolygonDomain{PolyCurve::closed(frame.outline)};

        Point2 A = P.front(), B = P.back();
        Point2 e1l = polyline_at(P, cp, dn), e2l = polyline_at(Lc, cl, dn1);
        Point2 e1r = polyline_at(P, cp, LP - dn), e2r = polyline_at(Rc, cr, LR - dn1);

        auto connector = [&](Point2 corner, Point2 e1, Point2 e2,
                             std::vector<Point2>& conn) -> bool {
            Point2 bis = unit(unit(e1 - corner) + unit(e2 - corner));
            if (norm(bis) < 1e-9) bis = unit(0.5 * (e1 + e2) - corner);
            for (double delta = 0.35 * std::min(dn, dn1); delta > 1e-6 * std::min(dn, dn1);
                 delta *= 0.5) {
                Point2 c = corner + delta * bis;
                if (!V.contains(c)) continue;
                double clearance = 1e300;
                for (std::size_t k = 0; k < V.boundary.size(); ++k)
                    clearance = std::min(clearance,
                                         dist_point_segment(c, V.boundary.v[k],
                                                            V.boundary.v[(k + 1) %
                                                                         V.boundary.size()]));
                if (clearance <= 1e-9 * std::min(dn, dn1)) continue;
                // e1 and e2 sit on the cuts themselves, so start the legs a
                // hair off them to keep the orientation tests determinate
                Point2 e1s = e1 + 1e-3 * (c - e1), e2s = e2 + 1e-3 * (c - e2);
                bool crossing = false;
                for (const auto* cut : {&P, &Lc, &Rc}) {
                    for (std::size_t k = 0; k + 1 < cut->size() && !crossing; ++k) {
                        if (proper_cross(e1s, c, (*cut)[k], (*cut)[k + 1])) crossing = true;
                        if (proper_cross(c, e2s, (*cut)[k], (*cut)[k + 1])) crossing = true;
                    }
                    if (crossing) break;
                }
                if (crossing) continue;
                conn = {e1, c, e2};
                return true;
            }
            return false;
        };

        std::vector<Point2> connl, connr;
        if (!connector(A, e1l, e2l, connl)) {
            why += ": no room for the left connector";
            return false;
        }
        if (!connector(B, e1r, e2r, connr)) {
            why += ": no room for the right connector";
            return false;
        }

        auto sub = [&](const std::vector<Point2>& pts, const std::vector<double>& cum, double s0,
                       double s1) { return sub_polyline(pts, cum, s0, s1); };

        // corner at A: initial dn of P, connector, initial dn1 of Lc reversed
        std::vector<Point2> RL = sub(P, cp, 0.0, dn);
        RL.push_back(connl[1]);
        {
            std::vector<Point2> t = reversed_pts(sub(Lc, cl, 0.0, dn1));
            RL.insert(RL.end(), t.begin(), t.end() - 1);
        }
        std::reverse(RL.begin(), RL.end());  // orient CCW: along Lc, over c, back down P

        // corner at B: final dn1 of Rc, then back along P reversed, connector
        std::vector<Point2> RR = sub(Rc, cr, LR - dn1, LR);
        {
            std::vector<Point2> t = reversed_pts(sub(P, cp, LP - dn, LP));
            RR.insert(RR.end(), t.begin() + 1, t.end());
        }
        RR.push_back(connr[1]);

        // central remainder
        std::vector<Point2> RC = sub(Lc, cl, dn1, LL);
        {
            std::vector<Point2> t = sub(Rc, cr, 0.0, LR - dn1);
            RC.insert(RC.end(), t.begin() + 1, t.end());
        }
        RC.push_back(connr[1]);
        {
            std::vector<Point2> t = reversed_pts(sub(P, cp, dn, LP - dn));
            RC.insert(RC.end(), t.begin(), t.end());
        }
        RC.push_back(connl[1]);

        if (!simple_positive(RL)) {
            why += ": left corner piece degenerates";
            return false;
        }
        if (!simple_positive(RR)) {
            why += ": right corner piece degenerates";
            return false;
        }
        if (!simple_positive(RC)) {
            why += ": central remainder degenerates";
            return false;
        }
        double asum = polygon_area(RL) + polygon_area(RR) + polygon_area(RC);
        if (std::abs(asum - frame.area) > 1e-6 * frame.area) {
            why += ": piece areas do not add up";
            return false;
        }

        out.outline = frame.outline;
        out.central = std::move(RC);
        out.left = std::move(RL);
        out.right = std::move(RR);
        out.connector_left = std::move(connl);
        out.connector_right = std::move(connr);
        out.perimeter = LP + LL + LR;
        return true;
    };

    TargetDecomposition dec;
    std::string first_why;
    for (int attempt = 0; attempt < 60; ++attempt) {
        dec.pieces.assign(static_cast<std::size_t>(G), {});
        int failed_gen = -1;
        for (int g = 0; g < G && failed_gen < 0; ++g) {
            std::size_t cnt = cuts[static_cast<std::size_t>(g)].size();
            dec.pieces[static_cast<std::size_t>(g)].resize(cnt);
            for (std::size_t j = 0; j < cnt; ++j) {
                if (!build_piece(g, j, d[static_cast<std::size_t>(g)],
                                 d[static_cast<std::size_t>(g) + 1],
                                 dec.pieces[static_cast<std::size_t>(g)][j])) {
                    failed_gen = g;
                    break;
                }
            }
        }
        if (failed_gen < 0) {
            dec.d = d;
            return dec;
        }
        if (user_d)
            throw Error("corner pieces cannot be placed with the given depths (" + why + ")");
        if (first_why.empty()) first_why = why;
        d[static_cast<std::size_t>(failed_gen)] *= 0.5;
        for (int g = failed_gen + 1; g <= G; ++g)
            d[static_cast<std::size_t>(g)] =
                std::min(d[static_cast<std::size_t>(g)], d[static_cast<std::size_t>(g) - 1]);
    }
    throw Error("corner pieces cannot be placed after repeated depth halving (first: " +
                first_why + ", last: " + why + ")");
}

// ---- matched sides ----

SidePair matched_side(const std::vector<Point2>& src, const std::vector<Point2>& dst) {
    if (src.size() < 2 || dst.size() < 2) throw Error("side needs at least two points");
    auto cs = cumlen(src), cd = cumlen(dst);
    double Ls = cs.back(), Ld = cd.back();
    if (!(Ls > 0.0) || !(Ld > 0.0)) throw Error("side has zero length");

    struct Ev {
        double f;
        int si = -1, di = -1;  // exact vertex index on either side
    };
    std::vector<Ev> evs;
    std::size_t i = 0, k = 0;
    while (i < src.size() || k < dst.size()) {
        double fs = i < src.size() ? cs[i] / Ls : 2.0;
        double fd = k < dst.size() ? cd[k] / Ld : 2.0;
        if (i + 1 == src.size()) fs = i == src.size() ? 2.0 : 1.0;
        if (k + 1 == dst.size()) fd = k == dst.size() ? 2.0 : 1.0;
        Ev e;
        if (std::abs(fs - fd) <= 1e-12) {
            e = {fs, static_cast<int>(i), static_cast<int>(k)};
            ++i; ++k;
        } else if (fs < fd) {
            e = {fs, static_cast<int>(i), -1};
            ++i;
        } else {
            e = {fd, -1, static_cast<int>(k)};
            ++k;
        }
        if (!evs.empty() && e.f - evs.back().f <= 1e-12) {
            if (e.si >= 0) evs.back().si = e.si;
            if (e.di >= 0) evs.back().di = e.di;
            continue;
        }
        evs.push_back(e);
    }

    SidePair out;
    for (const Ev& e : evs) {
        Point2 ps = e.si >= 0 ? src[static_cast<std::size_t>(e.si)]
                              : polyline_at(src, cs, e.f * Ls);
        Point2 pd = e.di >= 0 ? dst[static_cast<std::size_t>(e.di)]
                              : polyline_at(dst, cd, e.f * Ld);
        if (!out.src.empty() && ps == out.src.back() && pd == out.dst.back()) continue;
        out.src.push_back(ps);
        out.dst.push_back(pd);
    }
    if (out.src.size() < 2) throw Error("matched side degenerated");
    return out;
}

SidePair reversed(const SidePair& s) {
    return {reversed_pts(s.src), reversed_pts(s.dst)};
}

// ---- cell map ----

namespace {

struct Bary {
    int tri = -1;
    double w[3] = {0, 0, 0};
};

Bary locate_best(const std::vector<Point2>& pos, const std::vector<std::array<int, 3>>& tris,
                 Point2 q) {
    Bary best;
    double best_min = -1e300;
    for (std::size_t t = 0; t < tris.size(); ++t) {
        Point2 A = pos[static_cast<std::size_t>(tris[t][0])];
        Point2 B = pos[static_cast<std::size_t>(tris[t][1])];
        Point2 C = pos[static_cast<std::size_t>(tris[t][2])];
        double den = orient(A, B, C);
        if (den <= 0.0) continue;
        double w0 = orient(q, B, C) / den;
        double w1 = orient(A, q, C) / den;
        double w2 = 1.0 - w0 - w1;
        double mn = std::min({w0, w1, w2});
        if (mn > best_min) {
            best_min = mn;
            best.tri = static_cast<int>(t);
            best.w[0] = w0; best.w[1] = w1; best.w[2] = w2;
        }
        if (best_min >= 0.0) break;
    }
    for (double& w : best.w) w = std::max(w, 0.0);
    double s = best.w[0] + best.w[1] + best.w[2];
    if (s > 0.0)
        for (double& w : best.w) w /= s;
    return best;
}

// Tutte barycentric coordinates with uniform weights: interior vertices at
// the average of their neighbors, boundary pinned.
void tutte_positions(std::size_t nv, std::size_t nb, const std::vector<std::array<int, 3>>& tris,
                     std::vector<Point2>& pos) {
    std::size_t ni = nv - nb;
    if (ni == 0) return;
    std::vector<std::map<int, char>> nbr(nv);
    for (const auto& t : tris)
        for (int e = 0; e < 3; ++e) {
            int u = t[static_cast<std::size_t>(e)], v = t[static_cast<std::size_t>((e + 1) % 3)];
            nbr[static_cast<std::size_t>(u)][v] = 1;
            nbr[static_cast<std::size_t>(v)][u] = 1;
        }
    Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(ni), static_cast<Eigen::Index>(ni));
    Eigen::VectorXd bx = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ni));
    Eigen::VectorXd by = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ni));
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t q = nb; q < nv; ++q) {
        Eigen::Index row = static_cast<Eigen::Index>(q - nb);
        trip.emplace_back(row, row, static_cast<double>(nbr[q].size()));
        for (auto [v, _] : nbr[q]) {
            (void)_;
            if (static_cast<std::size_t>(v) >= nb) {
                trip.emplace_back(row, static_cast<Eigen::Index>(static_cast<std::size_t>(v) - nb),
                                  -1.0);
            } else {
                bx[row] += pos[static_cast<std::size_t>(v)].x;
                by[row] += pos[static_cast<std::size_t>(v)].y;
            }
        }
    }
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
    if (solver.info() != Eigen::Success) throw Error("cell parameterization solve failed");
    Eigen::VectorXd x = solver.solve(bx), y = solver.solve(by);
    for (std::size_t q = nb; q < nv; ++q) {
        pos[q].x = x[static_cast<Eigen::Index>(q - nb)];
        pos[q].y = y[static_cast<Eigen::Index>(q - nb)];
    }
}

bool image_tri_positive(Point2 A, Point2 B, Point2 C) {
    double d1x = B.x - A.x, d1y = B.y - A.y, d2x = C.x - A.x, d2y = C.y - A.y;
    double m = std::max(std::max(std::abs(d1x), std::abs(d1y)),
                        std::max(std::abs(d2x), std::abs(d2y)));
    if (!(m > 0.0) || !std::isfinite(m)) return false;
    double inv = 1.0 / m;
    return (d1x * inv) * (d2y * inv) - (d1y * inv) * (d2x * inv) > 0.0;
}

struct SideMesh {
    std::vector<Point2> verts;  // the polygon first, then interior repair points
    std::vector<std::array<int, 3>> tris;
};

// Ear-clip triangulation that keeps every polygon vertex: vertices the clip
// dropped as collinear are re-attached by fanning the owning triangle around
// an interior point, so a full run of boundary edges (i, i+1) survives.
SideMesh repaired_triangulation(const std::vector<Point2>& P, const char* which) {
    SideMesh m;
    try {
        m.tris = triangulate_polygon(P);
    } catch (const Error& e) {
        throw Error(std::string("cell ") + which + " triangulation failed: " + e.what());
    }
    m.verts = P;
    std::size_t M = P.size();
    auto& tris = m.tris;
    auto& verts = m.verts;

    std::vector<char> used(M, 0);
    for (const auto& t : tris)
        for (int c : t)
            if (static_cast<std::size_t>(c) < M) used[static_cast<std::size_t>(c)] = 1;
    std::size_t fu = M;
    for (std::size_t i = 0; i < M && fu == M; ++i)
        if (used[i]) fu = i;
    if (fu == M) throw Error("cell triangulation kept no boundary vertex");
    std::vector<std::pair<std::size_t, std::size_t>> runs;  // inclusive, may wrap
    std::size_t off = 1;
    while (off <= M) {
        if (used[(fu + off) % M]) { ++off; continue; }
        std::size_t run0 = off;
        while (off + 1 <= M && !used[(fu + off + 1) % M]) ++off;
        runs.emplace_back((fu + run0) % M, (fu + off) % M);
        ++off;
    }
    for (auto [r0, r1] : runs) {
        int a = static_cast<int>((r0 + M - 1) % M);
        int c = static_cast<int>((r1 + 1) % M);
        std::size_t owner = tris.size();
        int corner = -1;
        for (std::size_t t = 0; t < tris.size() && owner == tris.size(); ++t)
            for (int e = 0; e < 3; ++e)
                if (tris[t][static_cast<std::size_t>(e)] == a &&
                    tris[t][static_cast<std::size_t>((e + 1) % 3)] == c) {
                    owner = t;
                    corner = e;
                    break;
                }
        if (owner == tris.size()) throw Error("cell boundary vertex lost by triangulation");
        int o = tris[owner][static_cast<std::size_t>((corner + 2) % 3)];
        Point2 A = verts[static_cast<std::size_t>(a)];
        Point2 C = verts[static_cast<std::size_t>(c)];
        Point2 O = verts[static_cast<std::size_t>(o)];
        int q = static_cast<int>(verts.size());
        verts.push_back((A + C + O) / 3.0);
        std::vector<std::array<int, 3>> fan;
        int prev = a;
        for (std::size_t b = r0;; b = (b + 1) % M) {
            fan.push_back({prev, static_cast<int>(b), q});
            prev = static_cast<int>(b);
            if (b == r1) break;
        }
        fan.push_back({prev, c, q});
        fan.push_back({c, o, q});
        fan.push_back({o, a, q});
        tris[owner] = fan.back();
        fan.pop_back();
        tris.insert(tris.end(), fan.begin(), fan.end());
    }
    return m;
}

}  // namespace

CellMapPiece cell_map(const std::vector<SidePair>& sides) {
    if (sides.empty()) throw Error("cell needs at least one side");
    std::vector<Point2> Pu, Pv;
    for (std::size_t k = 0; k < sides.size(); ++k) {
        const SidePair& s = sides[k];
        if (s.src.size() != s.dst.size() || s.src.size() < 2)
            throw Error("side " + std::to_string(k) + " is malformed");
        const SidePair& nxt = sides[(k + 1) % sides.size()];
        double scale = std::max(polyline_length(s.src), 1e-300);
        if (dist(s.src.back(), nxt.src.front()) > 1e-9 * scale ||
            dist(s.dst.back(), nxt.dst.front()) >
                1e-9 * std::max(polyline_length(s.dst), 1e-300))
            throw Error("side " + std::to_string(k) + " does not chain to the next side");
        Pu.insert(Pu.end(), s.src.begin(), s.src.end() - 1);
        Pv.insert(Pv.end(), s.dst.begin(), s.dst.end() - 1);
    }
    std::size_t M = Pu.size();
    if (M < 3) throw Error("cell boundary needs at least three vertices");
    for (std::size_t i = 0; i < M; ++i) {
        if (Pu[i] == Pu[(i + 1) % M] || Pv[i] == Pv[(i + 1) % M])
            throw Error("cell boundary has a repeated vertex");
    }
    {
        PolyCurve cu = PolyCurve::closed(Pu), cv = PolyCurve::closed(Pv);
        if (cu.size() != M || cv.size() != M) throw Error("cell boundary degenerated");
        if (!cu.is_ccw() || !cu.is_simple()) throw Error("cell source boundary is not a CCW Jordan polygon");
        if (!cv.is_ccw() || !cv.is_simple()) {
            if (std::getenv("SOBEX_DUMP_CELL")) {
                std::fprintf(stderr, "[dump] cv ccw=%d simple=%d M=%zu\n", (int)cv.is_ccw(),
                             (int)cv.is_simple(), M);
                FILE* f = std::fopen("/tmp/cell_pv_bad.csv", "w");
                for (Point2 p : Pv) std::fprintf(f, "%.17g,%.17g\n", p.x, p.y);
                std::fclose(f);
                f = std::fopen("/tmp/cell_pu_bad.csv", "w");
                for (Point2 p : Pu) std::fprintf(f, "%.17g,%.17g\n", p.x, p.y);
                std::fclose(f);
            }
            throw Error("cell target boundary is not a CCW Jordan polygon");
        }
    }

    SideMesh mu = repaired_triangulation(Pu, "source");
    SideMesh mv = repaired_triangulation(Pv, "target");

    // Both meshes are parameterized over one regular M-gon; Tutte's theorem
    // makes both parameterizations embeddings.  The composed map from source
    // to target is affine on every face of the common refinement of the two
    // parameter meshes, and its Jacobian is positive there, so overlaying the
    // meshes yields a flip-free piecewise-linear homeomorphism directly.
    auto corner_pos = [&](std::size_t i) {
        double th = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(M);
        return Point2{std::cos(th), std::sin(th)};
    };
    std::vector<Point2> upos(mu.verts.size()), vpos(mv.verts.size());
    for (std::size_t i = 0; i < M; ++i) upos[i] = vpos[i] = corner_pos(i);
    tutte_positions(mu.verts.size(), M, mu.tris, upos);
    tutte_positions(mv.verts.size(), M, mv.tris, vpos);
    auto embedded = [](const std::vector<Point2>& pos, const std::vector<std::array<int, 3>>& ts) {
        for (const auto& t : ts)
            if (!(orient(pos[static_cast<std::size_t>(t[0])], pos[static_cast<std::size_t>(t[1])],
                         pos[static_cast<std::size_t>(t[2])]) > 0.0))
                return false;
        return true;
    };
    if (!embedded(upos, mu.tris)) throw Error("cell source parameterization degenerated");
    if (!embedded(vpos, mv.tris)) throw Error("cell target parameterization degenerated");

    // vertex pool keyed by parameter position: crossings computed from
    // adjacent triangle pairs differ by rounding only, so nearby parameter
    // points collapse to one mesh vertex and the overlay stays conforming
    struct PoolPt {
        Point2 par, src, img;
        char src_exact, img_exact;
    };
    std::vector<PoolPt> pool;
    std::map<std::pair<long long, long long>, std::vector<int>> bins;
    const double snap = 1e-11;
    auto find_or_add = [&](Point2 par, Point2 src, Point2 img, bool se, bool ie) {
        long long gx = std::llround(par.x / snap), gy = std::llround(par.y / snap);
        for (long long dx = -1; dx <= 1; ++dx)
            for (long long dy = -1; dy <= 1; ++dy) {
                auto it = bins.find({gx + dx, gy + dy});
                if (it == bins.end()) continue;
                for (int id : it->second) {
                    PoolPt& e = pool[static_cast<std::size_t>(id)];
                    if (std::abs(e.par.x - par.x) > snap || std::abs(e.par.y - par.y) > snap)
                        continue;
                    if (se && !e.src_exact) { e.src = src; e.src_exact = 1; }
                    if (ie && !e.img_exact) { e.img = img; e.img_exact = 1; }
                    return id;
                }
            }
        pool.push_back({par, src, img, static_cast<char>(se), static_cast<char>(ie)});
        bins[{gx, gy}].push_back(static_cast<int>(pool.size()) - 1);
        return static_cast<int>(pool.size()) - 1;
    };

    for (std::size_t i = 0; i < M; ++i) find_or_add(corner_pos(i), Pu[i], Pv[i], true, true);
    for (std::size_t q = M; q < mu.verts.size(); ++q) {
        Bary b = locate_best(vpos, mv.tris, upos[q]);
        if (b.tri < 0) throw Error("cell parameter point fell outside the target domain");
        const auto& t = mv.tris[static_cast<std::size_t>(b.tri)];
        Point2 img = b.w[0] * mv.verts[static_cast<std::size_t>(t[0])] +
                     b.w[1] * mv.verts[static_cast<std::size_t>(t[1])] +
                     b.w[2] * mv.verts[static_cast<std::size_t>(t[2])];
        find_or_add(upos[q], mu.verts[q], img, true, false);
    }
    for (std::size_t q = M; q < mv.verts.size(); ++q) {
        Bary b = locate_best(upos, mu.tris, vpos[q]);
        if (b.tri < 0) throw Error("cell parameter point fell outside the source domain");
        const auto& t = mu.tris[static_cast<std::size_t>(b.tri)];
        Point2 src = b.w[0] * mu.verts[static_cast<std::size_t>(t[0])] +
                     b.w[1] * mu.verts[static_cast<std::size_t>(t[1])] +
                     b.w[2] * mu.verts[static_cast<std::size_t>(t[2])];
        find_or_add(vpos[q], src, mv.verts[q], false, true);
    }

    auto affine_in = [&](Point2 q, const std::array<int, 3>& t, const std::vector<Point2>& pos,
                         const std::vector<Point2>& val) {
        Point2 a = pos[static_cast<std::size_t>(t[0])], b = pos[static_cast<std::size_t>(t[1])],
               c = pos[static_cast<std::size_t>(t[2])];
        double den = orient(a, b, c);
        double w0 = orient(q, b, c) / den, w1 = orient(a, q, c) / den, w2 = 1.0 - w0 - w1;
        return w0 * val[static_cast<std::size_t>(t[0])] + w1 * val[static_cast<std::size_t>(t[1])] +
               w2 * val[static_cast<std::size_t>(t[2])];
    };

    std::vector<std::array<int, 3>> otris;
    const double eps_on = 1e-14;
    for (const auto& tu : mu.tris) {
        std::array<Point2, 3> pu = {upos[static_cast<std::size_t>(tu[0])],
                                    upos[static_cast<std::size_t>(tu[1])],
                                    upos[static_cast<std::size_t>(tu[2])]};
        double ulx = std::min({pu[0].x, pu[1].x, pu[2].x}), uhx = std::max({pu[0].x, pu[1].x, pu[2].x});
        double uly = std::min({pu[0].y, pu[1].y, pu[2].y}), uhy = std::max({pu[0].y, pu[1].y, pu[2].y});
        for (const auto& tv : mv.tris) {
            std::array<Point2, 3> pv = {vpos[static_cast<std::size_t>(tv[0])],
                                        vpos[static_cast<std::size_t>(tv[1])],
                                        vpos[static_cast<std::size_t>(tv[2])]};
            if (std::min({pv[0].x, pv[1].x, pv[2].x}) > uhx + snap ||
                std::max({pv[0].x, pv[1].x, pv[2].x}) < ulx - snap ||
                std::min({pv[0].y, pv[1].y, pv[2].y}) > uhy + snap ||
                std::max({pv[0].y, pv[1].y, pv[2].y}) < uly - snap)
                continue;
            std::vector<Point2> poly(pu.begin(), pu.end());
            for (int e = 0; e < 3 && poly.size() >= 3; ++e) {
                Point2 p = pv[static_cast<std::size_t>(e)], q = pv[static_cast<std::size_t>((e + 1) % 3)];
                std::vector<Point2> out;
                std::size_t np = poly.size();
                for (std::size_t i = 0; i < np; ++i) {
                    Point2 cur = poly[i], nxt = poly[(i + 1) % np];
                    double dc = orient(p, q, cur), dn = orient(p, q, nxt);
                    if (dc >= -eps_on) out.push_back(cur);
                    if ((dc > eps_on && dn < -eps_on) || (dc < -eps_on && dn > eps_on))
                        out.push_back(cur + (dc / (dc - dn)) * (nxt - cur));
                }
                poly = std::move(out);
            }
            if (poly.size() < 3) continue;
            double area2 = 0.0;
            for (std::size_t i = 0; i < poly.size(); ++i) {
                Point2 a = poly[i], b = poly[(i + 1) % poly.size()];
                area2 += a.x * b.y - a.y * b.x;
            }
            if (area2 <= 1e-26) continue;
            std::vector<int> ids;
            Point2 cen{0.0, 0.0};
            for (Point2 pt : poly) {
                int id = find_or_add(pt, affine_in(pt, tu, upos, mu.verts),
                                     affine_in(pt, tv, vpos, mv.verts), false, false);
                if (ids.empty() || (ids.back() != id && ids.front() != id)) ids.push_back(id);
                cen = cen + pt;
            }
            while (ids.size() > 1 && ids.back() == ids.front()) ids.pop_back();
            if (ids.size() < 3) continue;
            cen = (1.0 / static_cast<double>(poly.size())) * cen;
            int cid = find_or_add(cen, affine_in(cen, tu, upos, mu.verts),
                                  affine_in(cen, tv, vpos, mv.verts), false, false);
            for (std::size_t i = 0; i < ids.size(); ++i)
                otris.push_back({ids[i], ids[(i + 1) % ids.size()], cid});
        }
    }

    // a conforming overlay pairs every interior directed edge and leaves the
    // polygon sides as the only boundary
    std::map<std::pair<int, int>, int> edge_use;
    for (const auto& t : otris)
        for (int e = 0; e < 3; ++e) {
            int a = t[static_cast<std::size_t>(e)], b = t[static_cast<std::size_t>((e + 1) % 3)];
            edge_use[{std::min(a, b), std::max(a, b)}] += (a < b) ? 1 : 4;
        }
    std::size_t rim = 0;
    for (const auto& [e, u] : edge_use) {
        if (u == 5) continue;
        bool side = (e.first < static_cast<int>(M) && e.second < static_cast<int>(M)) &&
                    ((e.second - e.first == 1) ||
                     (e.first == 0 && e.second == static_cast<int>(M) - 1));
        if (!((u == 1 || u == 4) && side)) throw Error("cell overlay is not conforming");
        ++rim;
    }
    if (rim != M) throw Error("cell overlay lost part of the boundary");

    CellMapPiece piece;
    piece.mesh.verts.resize(pool.size());
    piece.images.resize(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        piece.mesh.verts[i] = pool[i].src;
        piece.images[i] = pool[i].img;
    }
    piece.mesh.tris = std::move(otris);
    piece.mesh.boundary_loop.resize(M);
    for (std::size_t i = 0; i < M; ++i) piece.mesh.boundary_loop[i] = static_cast<int>(i);
    for (const auto& t : piece.mesh.tris) {
        if (!image_tri_positive(piece.mesh.verts[static_cast<std::size_t>(t[0])],
                                piece.mesh.verts[static_cast<std::size_t>(t[1])],
                                piece.mesh.verts[static_cast<std::size_t>(t[2])]) ||
            !image_tri_positive(piece.images[static_cast<std::size_t>(t[0])],
                                piece.images[static_cast<std::size_t>(t[1])],
                                piece.images[static_cast<std::size_t>(t[2])])) {
            std::string msg = "cell overlay produced a degenerate triangle";
            if (std::getenv("SOBEX_DUMP_CELL")) {
                char buf[512];
                for (int k = 0; k < 3; ++k) {
                    const PoolPt& e = pool[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])];
                    std::snprintf(buf, sizeof(buf),
                                  "\n  v%d id %d par %.17g %.17g src %.17g %.17g img %.17g %.17g",
                                  k, t[static_cast<std::size_t>(k)], e.par.x, e.par.y, e.src.x,
                                  e.src.y, e.img.x, e.img.y);
                    msg += buf;
                }
                std::FILE* f = std::fopen("/tmp/cell_pu.csv", "w");
                for (std::size_t i = 0; f && i < M; ++i)
                    std::fprintf(f, "%.17g,%.17g\n", Pu[i].x, Pu[i].y);
                if (f) std::fclose(f);
                f = std::fopen("/tmp/cell_pv.csv", "w");
                for (std::size_t i = 0; f && i < M; ++i)
                    std::fprintf(f, "%.17g,%.17g\n", Pv[i].x, Pv[i].y);
                if (f) std::fclose(f);
                for (auto [nm, mm] : {std::pair<const char*, const SideMesh*>{"mu", &mu},
                                      std::pair<const char*, const SideMesh*>{"mv", &mv}}) {
                    double worst = 1e300;
                    std::array<int, 3> wt{};
                    for (const auto& tt : mm->tris) {
                        double o = orient(mm->verts[static_cast<std::size_t>(tt[0])],
                                          mm->verts[static_cast<std::size_t>(tt[1])],
                                          mm->verts[static_cast<std::size_t>(tt[2])]);
                        if (o < worst) { worst = o; wt = tt; }
                    }
                    std::snprintf(buf, sizeof(buf), "\n  %s min orient %.3g tri %d %d %d (nv %zu)",
                                  nm, worst, wt[0], wt[1], wt[2], mm->verts.size());
                    msg += buf;
                }
            }
            throw Error(msg);
        }
    }
    return piece;
}

// ---- assembled extension over the disk ----

namespace {

std::uint64_t pt_key_half(double v) {
    v += 0.0;  // -0 -> +0
    std::uint64_t b;
    std::memcpy(&b, &v, sizeof(b));
    return b;
}

struct PtKey {
    std::uint64_t x, y;
    bool operator==(const PtKey& o) const { return x == o.x && y == o.y; }
};

struct PtKeyHash {
    std::size_t operator()(const PtKey& k) const {
        std::uint64_t h = k.x * 0x9E3779B97F4A7C15ull;
        h ^= k.y + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

// incremental mesh merge keyed on exact coordinate bits
struct Welder {
    std::vector<Point2> verts;
    std::vector<Point2> images;
    std::vector<std::array<int, 3>> tris;
    std::vector<int> labels;
    std::unordered_map<PtKey, int, PtKeyHash> index;
    double diam = 1.0;

    int vertex(Point2 p, Point2 img) {
        PtKey k{pt_key_half(p.x), pt_key_half(p.y)};
        auto it = index.find(k);
        if (it != index.end()) {
            if (dist(images[static_cast<std::size_t>(it->second)], img) > 1e-9 * diam)
                throw Error("weld images disagree across cells");
            return it->second;
        }
        int id = static_cast<int>(verts.size());
        verts.push_back(p);
        images.push_back(img);
        index.emplace(k, id);
        return id;
    }

    void add(const CellMapPiece& piece, int label) {
        std::vector<int> remap(piece.mesh.verts.size());
        for (std::size_t i = 0; i < piece.mesh.verts.size(); ++i)
            remap[i] = vertex(piece.mesh.verts[i], piece.images[i]);
        for (const auto& t : piece.mesh.tris) {
            tris.push_back({remap[static_cast<std::size_t>(t[0])],
                            remap[static_cast<std::size_t>(t[1])],
                            remap[static_cast<std::size_t>(t[2])]});
            labels.push_back(label);
        }
    }

    std::vector<int> boundary_loop() const {
        std::map<std::pair<int, int>, int> dir;
        for (const auto& t : tris)
            for (int e = 0; e < 3; ++e) {
                int u = t[static_cast<std::size_t>(e)], v = t[static_cast<std::size_t>((e + 1) % 3)];
                dir[{u, v}] += 1;
            }
        std::map<int, int> succ;
        for (const auto& [edge, cnt] : dir) {
            if (cnt != 1) continue;
            auto rev = dir.find({edge.second, edge.first});
            if (rev == dir.end() || rev->second == 0) {
                if (succ.count(edge.first)) throw Error("extension mesh boundary branches");
                succ[edge.first] = edge.second;
            }
        }
        if (succ.empty()) {
            std::size_t ones = 0, twos = 0, rev1 = 0;
            for (const auto& [edge, cnt] : dir) {
                if (cnt == 1) {
                    ++ones;
                    auto rev = dir.find({edge.second, edge.first});
                    if (rev != dir.end()) ++rev1;
                }
                if (cnt >= 2) ++twos;
            }
            throw Error("extension mesh has no boundary (directed " + std::to_string(dir.size()) +
                        ", single " + std::to_string(ones) + ", single-with-reverse " +
                        std::to_string(rev1) + ", multi " + std::to_string(twos) + ")");
        }
        std::vector<int> loop;
        int start = succ.begin()->first, cur = start;
        do {
            loop.push_back(cur);
            auto it = succ.find(cur);
            if (it == succ.end()) throw Error("extension mesh boundary is not closed");
            cur = it->second;
        } while (cur != start && loop.size() <= succ.size());
        if (loop.size() != succ.size())
            throw Error("extension mesh boundary is not a single loop");
        return loop;
    }
};

DyadicFamily trim_family(const DyadicFamily& fam, int N) {
    if (N < fam.n0 + 1 || N > fam.N) throw Error("generation depth outside the family range");
    DyadicFamily f = fam;
    f.N = N;
    f.arcs.resize(static_cast<std::size_t>(N - fam.n0) + 1);
    return f;
}

}  // namespace

Extension extend_disk(const PolygonDomain& Y, const BoundaryMap& phi, const DyadicFamily& fam,
                      double p, int N) {
    DyadicFamily fam2 = trim_family(fam, N);
    CrosscutTree tree = crosscut_tree(Y, phi, fam2);
    CellDecomposition dec = disk_cells(fam2, default_alpha_schedule(fam2.n0, N));

    const PolyCurve& circle = *fam2.circle;
    const PolyCurve& target = *phi.target;
    double Ls = circle.length(), Lt = target.length();
    int n0 = fam2.n0, G = N - n0;
    const double kappa = 0.5;

    // transplant of a tent into its gen-n0 subtree of the disk
    auto tent_pts = [&](int g, std::size_t j) {
        std::size_t sub = j >> g;
        std::size_t r = j & ((static_cast<std::size_t>(1) << g) - 1);
        const auto& leg = dec.legs[static_cast<std::size_t>(g)][r];
        double sA = fam2.arc(n0 + g, j).s0, sB = fam2.arc(n0 + g, j).s1;
        (void)sub;
        Point2 A = leg[0], apex = leg[1], B = leg[2];
        int K = std::max(2, 24 >> g);
        std::vector<Point2> pts;
        auto push = [&](Point2 tp, double f) {
            double s = f == 0.0 ? sA : (f == 1.0 ? sB : sA + f * (sB - sA));
            double rr = 1.0 - kappa * tp.y;
            pts.push_back(rr * circle.point_at(circle.wrap(s)));
        };
        for (int i = 0; i <= K; ++i) {
            double t = static_cast<double>(i) / K;
            push(A + t * (apex - A), 0.5 * t);
        }
        for (int i = 1; i <= K; ++i) {
            double t = static_cast<double>(i) / K;
            push(apex + t * (B - apex), i == K ? 1.0 : 0.5 + 0.5 * t);
        }
        return pts;
    };

    // one matched discretization per tent/cut interface, shared by both cells
    std::vector<std::vector<SidePair>> iface(static_cast<std::size_t>(G) + 1);
    for (int g = 0; g <= G; ++g) {
        std::size_t cnt = static_cast<std::size_t>(1) << (n0 + g);
        iface[static_cast<std::size_t>(g)].resize(cnt);
        for (std::size_t j = 0; j < cnt; ++j)
            iface[static_cast<std::size_t>(g)][j] =
                matched_side(tent_pts(g, j), tree.cuts[static_cast<std::size_t>(g)][j]);
    }

    auto leaf_base = [&](std::size_t j) {
        double s0 = fam2.arc(N, j).s0, s1 = fam2.arc(N, j).s1;
        double t0 = phi.evaluate(circle.wrap(s0));
        double t1 = lift_above(phi.evaluate(circle.wrap(s1)), t0, Lt);
        std::vector<double> params = {s0};
        for (double s : params_in_arc(circle, s0, s1)) params.push_back(s);
        for (double tv : params_in_arc(target, t0, t1)) {
            double sv = phi.evaluate_inverse(target.wrap(tv));
            double lifted = sv;
            while (lifted < s0 - 1e-12 * Ls) lifted += Ls;
            while (lifted > s1 + 1e-12 * Ls) lifted -= Ls;
            if (lifted > s0 + 1e-12 * Ls && lifted < s1 - 1e-12 * Ls) params.push_back(lifted);
        }
        params.push_back(s1);
        std::sort(params.begin(), params.end());
        SidePair side;
        double prev = -1e300;
        for (double s : params) {
            if (s - prev <= 1e-12 * Ls) continue;
            prev = s;
            side.src.push_back(circle.point_at(circle.wrap(s)));
            side.dst.push_back(target.point_at(phi.evaluate(circle.wrap(s))));
        }
        if (side.src.size() < 2) throw Error("leaf arc degenerated");
        return side;
    };

    Welder weld;
    weld.diam = target.diameter();
    std::vector<std::string> names;
    names.push_back("central");
    for (int g = 0; g < G; ++g) names.push_back("gen " + std::to_string(n0 + g));
    names.push_back("collar");

    auto run_cell = [&](const std::vector<SidePair>& sides, int label, const std::string& id) {
        try {
            weld.add(cell_map(sides), label);
        } catch (const Error& e) {
            throw Error(id + ": " + e.what());
        }
    };

    {
        std::vector<SidePair> sides;
        std::size_t cnt = static_cast<std::size_t>(1) << n0;
        for (std::size_t j = 0; j < cnt; ++j) sides.push_back(iface[0][j]);
        run_cell(sides, 0, "central cell");
    }
    for (int g = 0; g < G; ++g) {
        std::size_t cnt = static_cast<std::size_t>(1) << (n0 + g);
        for (std::size_t j = 0; j < cnt; ++j) {
            std::vector<SidePair> sides = {iface[static_cast<std::size_t>(g) + 1][2 * j],
                                           iface[static_cast<std::size_t>(g) + 1][2 * j + 1],
                                           reversed(iface[static_cast<std::size_t>(g)][j])};
            run_cell(sides, 1 + g,
                     "cell " + std::to_string(n0 + g) + "." + std::to_string(j));
        }
    }
    {
        std::size_t cnt = static_cast<std::size_t>(1) << N;
        for (std::size_t j = 0; j < cnt; ++j) {
            std::vector<SidePair> sides = {leaf_base(j),
                                           reversed(iface[static_cast<std::size_t>(G)][j])};
            run_cell(sides, 1 + G, "collar " + std::to_string(j));
        }
    }

    PLMap h;
    h.mesh.boundary_loop = weld.boundary_loop();
    h.mesh.verts = std::move(weld.verts);
    h.mesh.tris = std::move(weld.tris);
    h.images = std::move(weld.images);
    h.boundary_corr = std::make_shared<BoundaryMap>(phi);
    h.labels = std::move(weld.labels);
    h.label_names = std::move(names);

    Extension ext;
    ext.verdict = verify_homeomorphism(h, 1e-3);
    if (!ext.verdict.pass)
        throw Error("extension failed verification (" + ext.verdict.clause + ": " +
                    ext.verdict.witness + ")");
    ext.energy = pl_energy(h, p);
    ext.map = std::move(h);
    ext.tree = std::move(tree);
    return ext;
}

// ---- exterior by inversion ----

namespace {

Point2 tau_invert(Point2 z) {
    double r2 = z.x * z.x + z.y * z.y;
    return {z.x / r2, z.y / r2};
}

struct PLEval {
    const Mesh& mesh;
    const std::vector<Point2>& img;
    std::vector<std::array<double, 4>> boxes;  // xmin xmax ymin ymax

    PLEval(const Mesh& m, const std::vector<Point2>& i) : mesh(m), img(i) {
        boxes.reserve(mesh.tris.size());
        for (const auto& t : mesh.tris) {
            Point2 A = mesh.verts[static_cast<std::size_t>(t[0])];
            Point2 B = mesh.verts[static_cast<std::size_t>(t[1])];
            Point2 C = mesh.verts[static_cast<std::size_t>(t[2])];
            boxes.push_back({std::min({A.x, B.x, C.x}), std::max({A.x, B.x, C.x}),
                             std::min({A.y, B.y, C.y}), std::max({A.y, B.y, C.y})});
        }
    }

    Point2 operator()(Point2 q) const {
        int best = -1;
        double best_min = -1e300;
        double w0b = 0, w1b = 0;
        double pad = 1e-9 * std::max(std::abs(q.x) + std::abs(q.y), 1.0);
        for (int pass = 0; pass < 2 && best_min < 0.0; ++pass) {
            for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
                if (pass == 0) {
                    const auto& b = boxes[t];
                    if (q.x < b[0] - pad || q.x > b[1] + pad || q.y < b[2] - pad ||
                        q.y > b[3] + pad)
                        continue;
                }
                const auto& tr = mesh.tris[t];
                Point2 A = mesh.verts[static_cast<std::size_t>(tr[0])];
                Point2 B = mesh.verts[static_cast<std::size_t>(tr[1])];
                Point2 C = mesh.verts[static_cast<std::size_t>(tr[2])];
                double den = orient(A, B, C);
                if (den <= 0.0) continue;
                double w0 = orient(q, B, C) / den;
                double w1 = orient(A, q, C) / den;
                double mn = std::min({w0, w1, 1.0 - w0 - w1});
                if (mn > best_min) {
                    best_min = mn;
                    best = static_cast<int>(t);
                    w0b = w0;
                    w1b = w1;
                }
                if (best_min >= 0.0) break;
            }
        }
        if (best < 0) throw Error("evaluation point outside the extension mesh");
        double w2b = 1.0 - w0b - w1b;
        w0b = std::max(w0b, 0.0); w1b = std::max(w1b, 0.0); w2b = std::max(w2b, 0.0);
        double s = w0b + w1b + w2b;
        const auto& tr = mesh.tris[static_cast<std::size_t>(best)];
        return (w0b * img[static_cast<std::size_t>(tr[0])] +
                w1b * img[static_cast<std::size_t>(tr[1])] +
                w2b * img[static_cast<std::size_t>(tr[2])]) /
               s;
    }
};

}  // namespace

PLMap exterior_by_inversion(const PLMap& h, const PolygonDomain& Y, double R, int depth) {
    if (!h.boundary_corr) throw Error("map carries no boundary correspondence");
    const BoundaryMap& phi = *h.boundary_corr;
    if (!(R > 1.0)) throw Error("outer radius must exceed 1");
    const PolyCurve& target = *phi.target;
    double Ls = phi.source->length();
    {
        double clearance = 1e300;
        for (std::size_t k = 0; k < target.size(); ++k)
            clearance = std::min(clearance, dist_point_segment({0.0, 0.0}, target.v[k],
                                                               target.v[(k + 1) % target.size()]));
        if (!Y.contains({0.0, 0.0}) || clearance <= 1e-9 * target.diameter())
            throw Error("origin must be strictly inside the target; translate first");
    }

    // reflected boundary: tau of a densified target polygon, params kept
    std::vector<double> tpar;
    for (std::size_t k = 0; k < target.size(); ++k) {
        double t0 = target.cum[k], t1 = target.cum[k + 1];
        Point2 a = target.v[k], b = target.v[(k + 1) % target.size()];
        double away = std::min(norm(a), norm(b));
        int m = std::clamp(static_cast<int>(std::ceil(dist(a, b) / (0.04 * away))), 1, 64);
        for (int i = 0; i < m; ++i)
            tpar.push_back(t0 + (t1 - t0) * static_cast<double>(i) / m);
    }
    std::vector<Point2> spts;
    for (double t : tpar) spts.push_back(tau_invert(target.point_at(t)));
    auto star = std::make_shared<PolyCurve>(PolyCurve::closed(spts));
    if (star->size() != spts.size()) throw Error("reflected boundary degenerated");
    if (!star->is_ccw()) throw Error("reflected boundary reversed orientation");
    if (!star->is_simple()) throw Error("reflected boundary self-intersects");
    PolygonDomain star_dom{*star};

    std::vector<MapPiece> pieces;
    std::vector<double> spar(tpar.size());
    for (std::size_t k = 0; k < tpar.size(); ++k) spar[k] = phi.evaluate_inverse(tpar[k]);
    for (std::size_t k = 1; k < spar.size(); ++k)
        while (spar[k] <= spar[k - 1]) spar[k] += Ls;
    for (std::size_t k = 0; k < tpar.size(); ++k) {
        std::size_t k1 = k + 1;
        double s1 = k1 < spar.size() ? spar[k1] : spar[0] + Ls;
        double c0 = star->cum[k];
        double c1 = k1 < spar.size() ? star->cum[k1] : star->length();
        pieces.push_back(constant_speed_map(phi.source, spar[k], s1, star, c0, c1));
    }
    BoundaryMap gmap = assemble(std::move(pieces));

    DyadicFamily famR = dyadic_family(phi.source, 2, depth, 0.0);
    Extension inner = extend_disk(star_dom, gmap, famR, 2.0, depth);
    PLEval eval(inner.map.mesh, inner.map.images);

    const PolyCurve& circle = *phi.source;
    std::size_t nt = circle.size();
    int L = std::max(6, static_cast<int>(std::ceil(8.0 * (R - 1.0))));
    PLMap out;
    out.mesh.verts.reserve(nt * static_cast<std::size_t>(L + 1));
    for (int l = 0; l <= L; ++l) {
        double r = 1.0 + (R - 1.0) * static_cast<double>(l) / L;
        for (std::size_t k = 0; k < nt; ++k)
            out.mesh.verts.push_back(l == 0 ? circle.v[k] : r * circle.v[k]);
    }
    auto vid = [&](int l, std::size_t k) {
        return static_cast<int>(static_cast<std::size_t>(l) * nt + (k % nt));
    };
    for (int l = 0; l < L; ++l)
        for (std::size_t k = 0; k < nt; ++k) {
            out.mesh.tris.push_back({vid(l, k), vid(l, k + 1), vid(l + 1, k + 1)});
            out.mesh.tris.push_back({vid(l, k), vid(l + 1, k + 1), vid(l + 1, k)});
        }
    for (std::size_t k = 0; k < nt; ++k) out.mesh.boundary_loop.push_back(vid(L, k));
    {
        std::vector<int> innerloop;
        for (std::size_t k = nt; k-- > 0;) innerloop.push_back(vid(0, k));
        out.mesh.inner_loops.push_back(std::move(innerloop));
    }
    out.images.reserve(out.mesh.verts.size());
    for (Point2 v : out.mesh.verts) out.images.push_back(tau_invert(eval(tau_invert(v))));
    out.boundary_corr = h.boundary_corr;
    return out;
}

// ---- one-sided extension over the model triangle ----

namespace {

double graph_eval(const GraphSamples& g, double x) {
    if (x <= g.xs.front()) return g.ys.front();
    if (x >= g.xs.back()) return g.ys.back();
    std::size_t i = static_cast<std::size_t>(
        std::upper_bound(g.xs.begin(), g.xs.end(), x) - g.xs.begin());
    double t = (x - g.xs[i - 1]) / (g.xs[i] - g.xs[i - 1]);
    return g.ys[i - 1] + t * (g.ys[i] - g.ys[i - 1]);
}

void validate_graph(const GraphSamples& g, const char* name) {
    if (g.xs.size() != g.ys.size() || g.xs.size() < 2)
        throw Error(std::string(name) + ": needs matching xs/ys with at least two samples");
    if (g.xs.front() != 0.0 || std::abs(g.xs.back() - 1.0) > 1e-12)
        throw Error(std::string(name) + ": xs must run from 0 to 1");
    for (std::size_t i = 1; i < g.xs.size(); ++i)
        if (!(g.xs[i] > g.xs[i - 1]))
            throw Error(std::string(name) + ": xs must increase strictly");
    if (g.ys.front() != 0.0) throw Error(std::string(name) + ": graph must start at 0");
}

}  // namespace

OnesidedExtension onesided_quasiconvex(const GraphSamples& Phi, const GraphSamples& Psi,
                                       const BoundaryMap& phi, int J) {
    validate_graph(Phi, "upper graph");
    validate_graph(Psi, "lower graph");
    if (J < 2 || J > 40) throw Error("ladder depth out of range");
    std::string why;
    if (!phi.valid(1e-9, &why)) throw Error("boundary map invalid: " + why);

    std::vector<double> grid = Phi.xs;
    grid.insert(grid.end(), Psi.xs.begin(), Psi.xs.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (double x : grid)
        if (x > 0.0 && !(graph_eval(Phi, x) > graph_eval(Psi, x)))
            throw Error("upper graph must stay strictly above the lower one on (0,1]");

    const PolyCurve& source = *phi.source;
    const PolyCurve& target = *phi.target;
    double Lt = target.length();
    if (dist(source.point_at(0.0), {-1.0, 0.0}) > 1e-12 ||
        dist(source.point_at(1.0), {0.0, 0.0}) > 1e-12 ||
        dist(source.point_at(2.0), {1.0, 0.0}) > 1e-12)
        throw Error("source must be the model triangle with its base first");

    auto gamma = [&](int j, double x) {
        double f = 1.0 / j;
        return f * graph_eval(Phi, x) + (1.0 - f) * graph_eval(Psi, x);
    };

    // ladder anchors: x < 0 half-base onto the upper graph
    std::vector<double> t_top(static_cast<std::size_t>(J) + 1),
        t_bot(static_cast<std::size_t>(J) + 1);
    std::vector<Point2> a_top(static_cast<std::size_t>(J) + 1),
        a_bot(static_cast<std::size_t>(J) + 1);
    for (int j = 0; j <= J; ++j) {
        double xj = std::ldexp(1.0, -j);
        t_top[static_cast<std::size_t>(j)] = phi.evaluate(1.0 - xj);
        t_bot[static_cast<std::size_t>(j)] = phi.evaluate(1.0 + xj);
        a_top[static_cast<std::size_t>(j)] = target.point_at(t_top[static_cast<std::size_t>(j)]);
        a_bot[static_cast<std::size_t>(j)] = target.point_at(t_bot[static_cast<std::size_t>(j)]);
    }
    for (int j = 0; j < J; ++j) {
        double xin = std::max(a_top[static_cast<std::size_t>(j) + 1].x,
                              a_bot[static_cast<std::size_t>(j) + 1].x);
        double xout = std::min(a_top[static_cast<std::size_t>(j)].x,
                               a_bot[static_cast<std::size_t>(j)].x);
        if (!(xin < xout))
            throw Error("boundary parametrization too skewed for the ladder construction");
    }

    // rungs: vertical risers joined along the interpolating graph
    std::vector<std::vector<Point2>> beta(static_cast<std::size_t>(J) + 1);
    beta[0] = {a_bot[0], a_top[0]};
    for (int j = 1; j <= J; ++j) {
        Point2 pb = a_bot[static_cast<std::size_t>(j)], pt = a_top[static_cast<std::size_t>(j)];
        std::vector<Point2> pts = {pb};
        auto push = [&](Point2 q) {
            if (dist(q, pts.back()) > 1e-14) pts.push_back(q);
        };
        push({pb.x, gamma(j, pb.x)});
        if (pb.x < pt.x) {
            for (double x : grid)
                if (x > pb.x && x < pt.x) push({x, gamma(j, x)});
        } else {
            for (std::size_t i = grid.size(); i-- > 0;)
                if (grid[i] > pt.x && grid[i] < pb.x) push({grid[i], gamma(j, grid[i])});
        }
        push({pt.x, gamma(j, pt.x)});
        push(pt);
        if (pts.size() < 2) pts.push_back(pt);
        beta[static_cast<std::size_t>(j)] = std::move(pts);
    }
    for (int j = 1; j < J; ++j)
        for (double x : grid)
            if (x > 0.0 && !(gamma(j, x) >= gamma(j + 1, x)))
                throw Error("interpolating graphs out of order");

    // side arcs and their inward offsets
    auto arc_pts = [&](double ta, double tb) {
        return ArcRef{&target, ta, lift_above(tb, ta, Lt)}.polyline();
    };
    auto offset_impl = [&](const std::vector<Point2>& arc0, const std::vector<Point2>& rung_a,
                           const std::vector<Point2>& rung_b, double gap) {
            std::vector<Point2> arc = arc0;
            if (arc.size() == 2) arc = {arc[0], 0.5 * (arc[0] + arc[1]), arc[1]};
            auto cum = cumlen(arc);
            double len = cum.back();
            double eps = 1e-12 * std::max(len, 1e-300);
            for (double delta = std::min(0.3 * gap, 0.25 * len); delta > 1e-9 * len;
                 delta *= 0.5) {
                std::vector<Point2> c = arc;
                for (std::size_t i = 1; i + 1 < arc.size(); ++i) {
                    Point2 d = unit(arc[i + 1] - arc[i - 1]);
                    Point2 n = perp(d);  // interior is left of CCW travel
                    double taper = std::sin(kPi * cum[i] / len);
                    c[i] = arc[i] + (delta * taper) * n;
                }
                bool ok = polyline_simple(c, eps);
                for (const auto* rung : {&rung_a, &rung_b}) {
                    if (!ok) break;
                    std::vector<Point2> tc = end_trimmed(c);
                    for (std::size_t i = 0; i + 1 < tc.size() && ok; ++i)
                        for (std::size_t k = 0; k + 1 < rung->size() && ok; ++k)
                            if (seg_distance(tc[i], tc[i + 1], (*rung)[k], (*rung)[k + 1]) <= eps)
                                ok = false;
                }
                if (ok) return c;
            }
            throw Error("side arc offset keeps hitting the rungs");
        };

    std::vector<std::vector<Point2>> arc_top(static_cast<std::size_t>(J)),
        arc_bot(static_cast<std::size_t>(J)), alpha_top(static_cast<std::size_t>(J)),
        alpha_bot(static_cast<std::size_t>(J));
    for (int j = 0; j < J; ++j) {
        arc_top[static_cast<std::size_t>(j)] =
            arc_pts(t_top[static_cast<std::size_t>(j)], t_top[static_cast<std::size_t>(j) + 1]);
        arc_bot[static_cast<std::size_t>(j)] =
            arc_pts(t_bot[static_cast<std::size_t>(j) + 1], t_bot[static_cast<std::size_t>(j)]);
        double gap_top = 1e300, gap_bot = 1e300;
        for (Point2 q : arc_top[static_cast<std::size_t>(j)])
            gap_top = std::min(gap_top, q.y - gamma(j + 1, q.x));
        for (Point2 q : arc_bot[static_cast<std::size_t>(j)])
            gap_bot = std::min(gap_bot, gamma(j + 1, q.x) - q.y);
        gap_top = std::max(gap_top, 1e-12);
        gap_bot = std::max(gap_bot, 1e-12);
        alpha_top[static_cast<std::size_t>(j)] =
            offset_impl(arc_top[static_cast<std::size_t>(j)], beta[static_cast<std::size_t>(j)],
                        beta[static_cast<std::size_t>(j) + 1], gap_top);
        alpha_bot[static_cast<std::size_t>(j)] =
            offset_impl(arc_bot[static_cast<std::size_t>(j)], beta[static_cast<std::size_t>(j)],
                        beta[static_cast<std::size_t>(j) + 1], gap_bot);
    }

    // source tents
    const double side_angle = kPi / 8.0;
    auto densify = [](Point2 A, Point2 apex, Point2 B, int K) {
        std::vector<Point2> pts;
        for (int i = 0; i <= K; ++i) pts.push_back(A + (static_cast<double>(i) / K) * (apex - A));
        for (int i = 1; i <= K; ++i)
            pts.push_back(apex + (static_cast<double>(i) / K) * (B - apex));
        return pts;
    };
    auto tau_big = [&](int j) {
        double xj = std::ldexp(1.0, -j);
        return densify({-xj, 0.0}, {0.0, xj}, {xj, 0.0}, std::max(2, 12 >> j));
    };
    auto tent_top = [&](int j) {  // over [-x_j, -x_{j+1}]
        double xj = std::ldexp(1.0, -j), xj1 = std::ldexp(1.0, -(j + 1));
        double m = -0.5 * (xj + xj1), h = 0.5 * (xj - xj1) * std::tan(side_angle);
        return densify({-xj, 0.0}, {m, h}, {-xj1, 0.0}, std::max(3, 10 >> j));
    };
    auto tent_bot = [&](int j) {  // over [x_{j+1}, x_j]
        double xj = std::ldexp(1.0, -j), xj1 = std::ldexp(1.0, -(j + 1));
        double m = 0.5 * (xj + xj1), h = 0.5 * (xj - xj1) * std::tan(side_angle);
        return densify({xj1, 0.0}, {m, h}, {xj, 0.0}, std::max(3, 10 >> j));
    };

    std::vector<SidePair> MT(static_cast<std::size_t>(J) + 1);
    for (int j = 0; j <= J; ++j)
        MT[static_cast<std::size_t>(j)] =
            matched_side(tau_big(j), reversed_pts(beta[static_cast<std::size_t>(j)]));
    std::vector<SidePair> MTT(static_cast<std::size_t>(J)), MTB(static_cast<std::size_t>(J));
    for (int j = 0; j < J; ++j) {
        MTT[static_cast<std::size_t>(j)] =
            matched_side(tent_top(j), alpha_top[static_cast<std::size_t>(j)]);
        MTB[static_cast<std::size_t>(j)] =
            matched_side(tent_bot(j), alpha_bot[static_cast<std::size_t>(j)]);
    }

    // sampled base side: source params from pullbacks of the target vertices
    auto base_side = [&](double s0, double s1, double ta, double tb) {
        double tb_l = lift_above(tb, ta, Lt);
        std::vector<double> params = {s0};
        for (double s : params_in_arc(source, s0, s1)) params.push_back(s);
        for (double tv : params_in_arc(target, ta, tb_l)) {
            double sv = phi.evaluate_inverse(target.wrap(tv));
            if (sv > s0 + 1e-12 && sv < s1 - 1e-12) params.push_back(sv);
        }
        params.push_back(s1);
        std::sort(params.begin(), params.end());
        SidePair side;
        double prev = -1e300;
        for (double s : params) {
            if (s - prev <= 1e-12) continue;
            prev = s;
            Point2 sp = s == s0   ? Point2{s0 - 1.0, 0.0}
                        : s == s1 ? Point2{s1 - 1.0, 0.0}
                                  : source.point_at(s);
            side.src.push_back({sp.x, 0.0});
            side.dst.push_back(target.point_at(phi.evaluate(source.wrap(s))));
        }
        if (side.src.size() < 2) throw Error("base arc degenerated");
        return side;
    };

    Welder weld;
    weld.diam = target.diameter();
    std::vector<std::string> names;
    OnesidedExtension res;

    auto run_cell = [&](const std::vector<SidePair>& sides, const std::string& name) {
        int label = static_cast<int>(names.size());
        names.push_back(name);
        try {
            weld.add(cell_map(sides), label);
        } catch (const Error& e) {
            throw Error(name + ": " + e.what());
        }
    };

    for (int j = 0; j < J; ++j) {
        std::vector<SidePair> sides = {MTT[static_cast<std::size_t>(j)],
                                       MT[static_cast<std::size_t>(j) + 1],
                                       MTB[static_cast<std::size_t>(j)],
                                       reversed(MT[static_cast<std::size_t>(j)])};
        run_cell(sides, "band " + std::to_string(j));
        res.region_perimeter.push_back(
            polyline_length(alpha_top[static_cast<std::size_t>(j)]) +
            polyline_length(alpha_bot[static_cast<std::size_t>(j)]) +
            polyline_length(beta[static_cast<std::size_t>(j)]) +
            polyline_length(beta[static_cast<std::size_t>(j) + 1]));
    }
    for (int j = 0; j < J; ++j) {
        double xj = std::ldexp(1.0, -j), xj1 = std::ldexp(1.0, -(j + 1));
        {
            SidePair base = base_side(1.0 - xj, 1.0 - xj1, t_top[static_cast<std::size_t>(j)],
                                      t_top[static_cast<std::size_t>(j) + 1]);
            std::vector<SidePair> sides = {base, reversed(MTT[static_cast<std::size_t>(j)])};
            run_cell(sides, "flap top " + std::to_string(j));
        }
        {
            SidePair base = base_side(1.0 + xj1, 1.0 + xj, t_bot[static_cast<std::size_t>(j) + 1],
                                      t_bot[static_cast<std::size_t>(j)]);
            std::vector<SidePair> sides = {base, reversed(MTB[static_cast<std::size_t>(j)])};
            run_cell(sides, "flap bottom " + std::to_string(j));
        }
    }
    {
        double xJ = std::ldexp(1.0, -J);
        SidePair base = base_side(1.0 - xJ, 1.0 + xJ, t_top[static_cast<std::size_t>(J)],
                                  t_bot[static_cast<std::size_t>(J)]);
        std::vector<SidePair> sides = {base, reversed(MT[static_cast<std::size_t>(J)])};
        run_cell(sides, "tip");
    }

    PLMap h;
    h.mesh.boundary_loop = weld.boundary_loop();
    h.mesh.verts = std::move(weld.verts);
    h.mesh.tris = std::move(weld.tris);
    h.images = std::move(weld.images);
    h.boundary_corr = std::make_shared<BoundaryMap>(phi);
    h.labels = std::move(weld.labels);
    h.label_names = std::move(names);

    res.verdict = verify_homeomorphism(h, 1e-3);
    if (!res.verdict.pass)
        throw Error("one-sided extension failed verification (" + res.verdict.clause + ": " +
                    res.verdict.witness + ")");
    res.energy = pl_energy(h, 2.0);
    res.map = std::move(h);
    return res;
}

}  // namespace sobex
