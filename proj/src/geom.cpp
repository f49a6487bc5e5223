#include "sobex/geom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <unordered_map>

namespace sobex {

double norm(Point2 a) { return std::hypot(a.x, a.y); }
double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double dist_point_segment(Point2 p, Point2 a, Point2 b) {
    Point2 ab = b - a;
    double len2 = dot(ab, ab);
    if (len2 == 0.0) return dist(p, a);
    double t = dot(p - a, ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return dist(p, a + t * ab);
}

static double seg_seg_distance(Point2 a, Point2 b, Point2 c, Point2 d) {
    // orientations of collinear points carry rounding noise ~ |ab||cd| ulp;
    // the sign test must ignore such values or it reports phantom crossings
    // along straight resampled stretches (a borderline true crossing falls
    // through to the distance bound instead, which is ~0 there anyway)
    double tol = 1e-14 * dist(a, b) * dist(c, d);
    auto opp = [tol](double x, double y) {
        return (x > tol && y < -tol) || (x < -tol && y > tol);
    };
    if (opp(orient(c, d, a), orient(c, d, b)) && opp(orient(a, b, c), orient(a, b, d)))
        return 0.0;
    return std::min(std::min(dist_point_segment(a, c, d), dist_point_segment(b, c, d)),
                    std::min(dist_point_segment(c, a, b), dist_point_segment(d, a, b)));
}

bool segments_cross(Point2 a, Point2 b, Point2 c, Point2 d, double eps) {
    return seg_seg_distance(a, b, c, d) <= eps;
}

// ---- hash grid over segments or points ----

namespace {

struct HashGrid {
    double cell = 1.0;
    std::unordered_map<std::uint64_t, std::vector<int>> buckets;

    static std::uint64_t key(int ix, int iy) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
               static_cast<std::uint32_t>(iy);
    }
    void insert_box(Point2 lo, Point2 hi, int id) {
        int x0 = static_cast<int>(std::floor(lo.x / cell)), x1 = static_cast<int>(std::floor(hi.x / cell));
        int y0 = static_cast<int>(std::floor(lo.y / cell)), y1 = static_cast<int>(std::floor(hi.y / cell));
        for (int ix = x0; ix <= x1; ++ix)
            for (int iy = y0; iy <= y1; ++iy) buckets[key(ix, iy)].push_back(id);
    }
    template <class F>
    void query_box(Point2 lo, Point2 hi, F&& f) const {
        int x0 = static_cast<int>(std::floor(lo.x / cell)), x1 = static_cast<int>(std::floor(hi.x / cell));
        int y0 = static_cast<int>(std::floor(lo.y / cell)), y1 = static_cast<int>(std::floor(hi.y / cell));
        for (int ix = x0; ix <= x1; ++ix)
            for (int iy = y0; iy <= y1; ++iy) {
                auto it = buckets.find(key(ix, iy));
                if (it == buckets.end()) continue;
                for (int id : it->second) f(id);
            }
    }
};

Point2 seg_lo(Point2 a, Point2 b) { return {std::min(a.x, b.x), std::min(a.y, b.y)}; }
Point2 seg_hi(Point2 a, Point2 b) { return {std::max(a.x, b.x), std::max(a.y, b.y)}; }

std::pair<std::vector<Point2>, double> convex_hull_and_diameter(const std::vector<Point2>& pts) {
    std::vector<Point2> p = pts;
    std::sort(p.begin(), p.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    p.erase(std::unique(p.begin(), p.end(), [](Point2 a, Point2 b) { return a == b; }), p.end());
    std::size_t n = p.size();
    if (n < 2) return {p, 0.0};
    std::vector<Point2> h(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && orient(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    for (std::size_t i = n - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && orient(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    h.resize(k - 1);
    double best = 0.0;  // rotating calipers
    std::size_t m = h.size(), j = 1;
    if (m == 1) return {h, 0.0};
    for (std::size_t i = 0; i < m; ++i) {
        Point2 e = h[(i + 1) % m] - h[i];
        while (cross(e, h[(j + 1) % m] - h[j]) > 0) j = (j + 1) % m;
        best = std::max(best, std::max(dist(h[i], h[j]), dist(h[(i + 1) % m], h[j])));
    }
    return {h, best};
}

}  // namespace

// ---- PolyCurve ----

PolyCurve PolyCurve::closed(std::vector<Point2> pts) {
    if (pts.size() >= 2 && pts.front() == pts.back()) pts.pop_back();
    std::vector<Point2> clean;
    clean.reserve(pts.size());
    for (const Point2& q : pts)
        if (clean.empty() || !(q == clean.back())) clean.push_back(q);
    if (clean.size() >= 2 && clean.front() == clean.back()) clean.pop_back();
    if (clean.size() < 3) throw Error("closed curve needs at least 3 distinct vertices");
    PolyCurve c;
    c.v = std::move(clean);
    c.cum.resize(c.v.size() + 1);
    c.cum[0] = 0.0;
    for (std::size_t i = 0; i < c.v.size(); ++i)
        c.cum[i + 1] = c.cum[i] + dist(c.v[i], c.v[(i + 1) % c.v.size()]);
    return c;
}

double PolyCurve::signed_area() const {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point2& a = v[i];
        const Point2& b = v[(i + 1) % v.size()];
        s += cross(a, b);
    }
    return 0.5 * s;
}

PolyCurve PolyCurve::reversed() const {
    std::vector<Point2> r(v.rbegin(), v.rend());
    return closed(std::move(r));
}

double PolyCurve::wrap(double s) const {
    double L = length();
    s = std::fmod(s, L);
    if (s < 0) s += L;
    return s;
}

std::size_t PolyCurve::seg_index(double s) const {
    s = wrap(s);
    auto it = std::upper_bound(cum.begin(), cum.end(), s);
    std::size_t i = static_cast<std::size_t>(it - cum.begin());
    return (i == 0 ? 0 : i - 1) % v.size();
}

Point2 PolyCurve::point_at(double s) const {
    s = wrap(s);
    std::size_t i = seg_index(s);
    double seg = cum[i + 1] - cum[i];
    double t = seg > 0 ? (s - cum[i]) / seg : 0.0;
    return v[i] + t * (v[(i + 1) % v.size()] - v[i]);
}

void PolyCurve::insert_param(double s, double snap_tol) {
    s = wrap(s);
    std::size_t i = seg_index(s);
    if (s - cum[i] <= snap_tol || cum[i + 1] - s <= snap_tol) return;
    Point2 p = point_at(s);
    v.insert(v.begin() + static_cast<std::ptrdiff_t>(i) + 1, p);
    cum.insert(cum.begin() + static_cast<std::ptrdiff_t>(i) + 1, s);
}

double PolyCurve::diameter() const { return convex_hull_and_diameter(v).second; }

Point2 PolyCurve::centroid_vertex_mean() const {
    Point2 c{0, 0};
    for (const Point2& p : v) c = c + p;
    return c / static_cast<double>(v.size());
}

bool PolyCurve::is_simple(double eps_rel) const {
    std::size_t n = v.size();
    double eps = eps_rel * std::max(diameter(), 1e-300);
    double avg = length() / static_cast<double>(n);
    HashGrid grid;
    grid.cell = std::max(avg * 2.0, eps * 8.0);
    for (std::size_t i = 0; i < n; ++i) {
        Point2 a = v[i], b = v[(i + 1) % n];
        grid.insert_box(seg_lo(a, b) - Point2{eps, eps}, seg_hi(a, b) + Point2{eps, eps},
                        static_cast<int>(i));
    }
    for (std::size_t i = 0; i < n; ++i) {
        Point2 a = v[i], b = v[(i + 1) % n];
        bool ok = true;
        grid.query_box(seg_lo(a, b) - Point2{eps, eps}, seg_hi(a, b) + Point2{eps, eps},
                       [&](int jj) {
            std::size_t j = static_cast<std::size_t>(jj);
            if (!ok || j <= i) return;
            Point2 c = v[j], d = v[(j + 1) % n];
            bool adj_fwd = (j == i + 1), adj_bwd = (i == 0 && j == n - 1);
            if (adj_fwd || adj_bwd) {
                // shared endpoint allowed; anything beyond it is a fold
                Point2 shared = adj_fwd ? b : a;
                Point2 far1 = adj_fwd ? a : b;
                Point2 far2 = adj_fwd ? d : c;
                if (dist_point_segment(far1, c, d) <= eps && !(far1 == shared)) ok = false;
                if (dist_point_segment(far2, a, b) <= eps && !(far2 == shared)) ok = false;
                return;
            }
            if (seg_seg_distance(a, b, c, d) <= eps) ok = false;
        });
        if (!ok) return false;
    }
    return true;
}

// ---- ArcRef ----

std::vector<Point2> ArcRef::polyline() const {
    const PolyCurve& c = *curve;
    double L = c.length();
    std::vector<Point2> out{c.point_at(s0)};
    double a = c.wrap(s0);
    std::size_t i = c.seg_index(a);
    double at_vertex = s0 + (c.cum[i + 1] - a);  // param of the next curve vertex
    std::size_t vi = (i + 1) % c.size();
    double tol = 1e-12 * std::max(L, 1e-300);
    while (at_vertex < s1 - tol) {
        Point2 q = c.v[vi];
        if (!(q == out.back())) out.push_back(q);
        at_vertex += c.cum[vi + 1] - c.cum[vi];
        vi = (vi + 1) % c.size();
    }
    Point2 end = c.point_at(s1);
    if (!(end == out.back())) out.push_back(end);
    return out;
}

// ---- PolygonDomain ----

PolygonDomain PolygonDomain::from_points(std::vector<Point2> pts) {
    PolyCurve c = PolyCurve::closed(std::move(pts));
    if (!c.is_ccw()) c = c.reversed();
    if (!c.is_simple(1e-13)) throw Error("polygon boundary self-intersects");
    return PolygonDomain{std::move(c)};
}

bool PolygonDomain::contains(Point2 p) const {
    const auto& v = boundary.v;
    std::size_t n = v.size();
    double eps = 1e-13 * std::max(boundary.diameter(), 1e-300);
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        if (dist_point_segment(p, v[j], v[i]) <= eps) return true;
        if ((v[i].y > p.y) != (v[j].y > p.y)) {
            double xint = v[j].x + (p.y - v[j].y) / (v[i].y - v[j].y) * (v[i].x - v[j].x);
            if (p.x < xint) inside = !inside;
        }
    }
    return inside;
}

// ---- Mesh ----

double Mesh::area() const {
    double s = 0.0;
    for (const auto& t : tris) s += orient(verts[t[0]], verts[t[1]], verts[t[2]]);
    return 0.5 * s;
}

double Mesh::max_edge() const {
    double m = 0.0;
    for (const auto& t : tris)
        for (int k = 0; k < 3; ++k) m = std::max(m, dist(verts[t[k]], verts[t[(k + 1) % 3]]));
    return m;
}

double curve_length(const PolyCurve& c) { return c.length(); }

double polyline_length(const std::vector<Point2>& pts) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) s += dist(pts[i], pts[i + 1]);
    return s;
}

// ---- ear clipping ----

namespace {

bool point_in_tri_closed(Point2 p, Point2 a, Point2 b, Point2 c, double eps) {
    double d1 = orient(a, b, p), d2 = orient(b, c, p), d3 = orient(c, a, p);
    return d1 >= -eps && d2 >= -eps && d3 >= -eps;
}

}  // namespace

std::vector<std::array<int, 3>> triangulate_polygon(const std::vector<Point2>& pts) {
    std::size_t n = pts.size();
    if (n < 3) throw Error("polygon needs at least 3 vertices");
    {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += cross(pts[i], pts[(i + 1) % n]);
        if (s <= 0.0) throw Error("polygon must be counterclockwise");
    }
    double diam = convex_hull_and_diameter(pts).second;
    double area_eps = 1e-24 * diam * diam;

    std::vector<int> nxt(n), prv(n);
    std::vector<char> active(n, 1), reflex(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        nxt[i] = static_cast<int>((i + 1) % n);
        prv[i] = static_cast<int>((i + n - 1) % n);
    }
    auto is_reflex = [&](int i) {
        return orient(pts[prv[i]], pts[i], pts[nxt[i]]) < 0.0;
    };
    for (std::size_t i = 0; i < n; ++i) reflex[i] = is_reflex(static_cast<int>(i)) ? 1 : 0;

    HashGrid grid;
    {
        double avg = 0.0;
        for (std::size_t i = 0; i < n; ++i) avg += dist(pts[i], pts[(i + 1) % n]);
        avg /= static_cast<double>(n);
        grid.cell = std::max(avg * 2.0, diam * 1e-9);
        for (std::size_t i = 0; i < n; ++i)
            grid.insert_box(pts[i], pts[i], static_cast<int>(i));
    }

    auto ear_blocked = [&](int a, int b, int c, double eps) {
        Point2 A = pts[a], B = pts[b], C = pts[c];
        Point2 lo{std::min({A.x, B.x, C.x}), std::min({A.y, B.y, C.y})};
        Point2 hi{std::max({A.x, B.x, C.x}), std::max({A.y, B.y, C.y})};
        bool blocked = false;
        grid.query_box(lo, hi, [&](int q) {
            if (blocked || !active[q] || !reflex[q] || q == a || q == b || q == c) return;
            if (point_in_tri_closed(pts[q], A, B, C, eps)) blocked = true;
        });
        return blocked;
    };

    std::vector<std::array<int, 3>> tris;
    tris.reserve(n - 2);
    std::vector<std::array<int, 3>> dropped;  // {vertex, left, right}
    std::size_t remaining = n;
    int cur = 0;
    std::size_t since_clip = 0;
    bool relaxed = false;
    while (remaining > 3) {
        if (since_clip > remaining + 2) {
            if (!relaxed) {
                relaxed = true;  // tolerate on-edge blockers once strict pass stalls
                since_clip = 0;
                continue;
            }
            throw Error("ear clipping failed; polygon degenerate or not simple");
        }
        int a = prv[cur], b = cur, c = nxt[cur];
        double ar = orient(pts[a], pts[b], pts[c]);
        bool clipped = false;
        if (dist_point_segment(pts[b], pts[a], pts[c]) <= 1e-12 * std::max(diam, 1e-300)) {
            // collinear sliver (the reflex flag is sign noise here): unlink
            // the vertex and reinsert it later
            if (std::getenv("SOBEX_TRACE_TRI"))
                std::fprintf(stderr, "drop %d cover (%d,%d)\n", b, a, c);
            dropped.push_back({b, a, c});
            active[b] = 0;
            nxt[a] = c;
            prv[c] = a;
            --remaining;
            reflex[a] = is_reflex(a) ? 1 : 0;
            reflex[c] = is_reflex(c) ? 1 : 0;
            cur = a;
            clipped = true;
        } else if (!reflex[b] && ar > area_eps &&
                   // apex must clear the base line by the drop margin, or a
                   // noise-positive orientation of a collinear triple whose
                   // middle vertex sits outside the chord becomes a flat ear
                   ar > 1e-12 * std::max(diam, 1e-300) * dist(pts[a], pts[c])) {
            double eps = relaxed ? -1e-12 * diam * diam : 1e-30 * diam * diam;
            if (!ear_blocked(a, b, c, eps)) {
                if (std::getenv("SOBEX_TRACE_TRI"))
                    std::fprintf(stderr, "ear (%d,%d,%d) ar %.3e\n", a, b, c, ar);
                tris.push_back({a, b, c});
                active[b] = 0;
                nxt[a] = c;
                prv[c] = a;
                --remaining;
                reflex[a] = is_reflex(a) ? 1 : 0;
                reflex[c] = is_reflex(c) ? 1 : 0;
                cur = a;
                clipped = true;
            }
        }
        if (clipped) {
            since_clip = 0;
        } else {
            cur = nxt[cur];
            ++since_clip;
        }
    }
    {
        // the last three corners can sit on one straight stretch that was
        // clipped from both ends; keep the middle one for reinsertion below
        // instead of emitting a flat triangle
        int a = cur, b = nxt[cur], c = nxt[nxt[cur]];
        int mid = -1, l = -1, r = -1;
        double low = 1e300;
        for (auto [x, y, z] : {std::array<int, 3>{a, b, c}, std::array<int, 3>{b, c, a},
                               std::array<int, 3>{c, a, b}}) {
            double d = dist_point_segment(pts[y], pts[x], pts[z]);
            if (d < low) { low = d; mid = y; l = x; r = z; }
        }
        if (std::getenv("SOBEX_TRACE_TRI"))
            std::fprintf(stderr, "final chain (%d,%d,%d) low %.3e mid %d cover (%d,%d)\n", a, b,
                         c, low, mid, l, r);
        if (low <= 1e-12 * std::max(diam, 1e-300))
            dropped.push_back({mid, l, r});
        else if (orient(pts[a], pts[b], pts[c]) > 0.0)
            tris.push_back({a, b, c});
        else
            throw Error("ear clipping failed; polygon degenerate or not simple");
    }

    // split the covering edge of each dropped vertex so every vertex is kept
    // and triangles sharing a straight stretch stay edge-adjacent; reverse
    // order resolves drops nested inside longer collapsed edges
    const bool trace = std::getenv("SOBEX_TRACE_TRI") != nullptr;
    for (auto it = dropped.rbegin(); it != dropped.rend(); ++it) {
        int v = (*it)[0], l = (*it)[1], r = (*it)[2];
        bool found = false;
        for (std::size_t t = 0; t < tris.size() && !found; ++t) {
            for (int k = 0; k < 3; ++k) {
                int u0 = tris[t][k], u1 = tris[t][(k + 1) % 3];
                if ((u0 == l && u1 == r) || (u0 == r && u1 == l)) {
                    int w = tris[t][(k + 2) % 3];
                    if (trace)
                        std::fprintf(stderr, "reinsert %d into (%d,%d) owner (%d,%d,%d)%s\n", v,
                                     l, r, u0, u1, w,
                                     dist_point_segment(pts[w], pts[u0], pts[u1]) <=
                                             1e-12 * diam
                                         ? " FLAT"
                                         : "");
                    tris[t] = {u0, v, w};
                    tris.push_back({v, u1, w});
                    found = true;
                    break;
                }
            }
        }
        if (trace && !found) std::fprintf(stderr, "reinsert %d into (%d,%d): NO OWNER\n", v, l, r);
    }
    return tris;
}

// ---- refinement ----

namespace {

std::uint64_t edge_key(int u, int v) {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
           static_cast<std::uint32_t>(v);
}

}  // namespace

Mesh triangulate(const PolygonDomain& d, double h_max) {
    if (h_max <= 0) throw Error("mesh size must be positive");
    Mesh m;
    m.verts = d.boundary.v;
    auto base = triangulate_polygon(m.verts);

    struct Tri {
        std::array<int, 3> v;
        bool alive = true;
    };
    std::vector<Tri> tris;
    tris.reserve(base.size() * 2);
    for (auto& t : base) tris.push_back({t, true});

    std::unordered_map<std::uint64_t, std::vector<int>> by_edge;
    auto reg = [&](int ti) {
        for (int k = 0; k < 3; ++k)
            by_edge[edge_key(tris[ti].v[k], tris[ti].v[(k + 1) % 3])].push_back(ti);
    };
    for (std::size_t i = 0; i < tris.size(); ++i) reg(static_cast<int>(i));

    auto longest = [&](int ti) {
        int bk = 0;
        double bl = -1.0;
        for (int k = 0; k < 3; ++k) {
            double l = dist(m.verts[tris[ti].v[k]], m.verts[tris[ti].v[(k + 1) % 3]]);
            if (l > bl) {
                bl = l;
                bk = k;
            }
        }
        return std::pair<int, double>(bk, bl);
    };

    std::deque<int> work;
    for (std::size_t i = 0; i < tris.size(); ++i)
        if (longest(static_cast<int>(i)).second > h_max) work.push_back(static_cast<int>(i));

    while (!work.empty()) {
        int ti = work.front();
        work.pop_front();
        if (!tris[ti].alive) continue;
        auto [bk, bl] = longest(ti);
        if (bl <= h_max) continue;
        int u = tris[ti].v[bk], v = tris[ti].v[(bk + 1) % 3];
        int mid = static_cast<int>(m.verts.size());
        m.verts.push_back(0.5 * (m.verts[u] + m.verts[v]));
        auto& owners = by_edge[edge_key(u, v)];
        std::vector<int> own;
        for (int t : owners)
            if (tris[t].alive) own.push_back(t);
        for (int t : own) {
            auto tv = tris[t].v;
            tris[t].alive = false;
            int k = 0;
            while (!((tv[k] == u && tv[(k + 1) % 3] == v) || (tv[k] == v && tv[(k + 1) % 3] == u)))
                ++k;
            int p = tv[k], q = tv[(k + 1) % 3], w = tv[(k + 2) % 3];
            int c1 = static_cast<int>(tris.size());
            tris.push_back({{p, mid, w}, true});
            int c2 = static_cast<int>(tris.size());
            tris.push_back({{mid, q, w}, true});
            reg(c1);
            reg(c2);
            if (longest(c1).second > h_max) work.push_back(c1);
            if (longest(c2).second > h_max) work.push_back(c2);
        }
    }

    for (auto& t : tris)
        if (t.alive) m.tris.push_back(t.v);

    // boundary loop: directed edges used exactly once
    std::unordered_map<std::uint64_t, int> count;
    for (auto& t : m.tris)
        for (int k = 0; k < 3; ++k) count[edge_key(t[k], t[(k + 1) % 3])]++;
    std::unordered_map<int, int> succ;
    for (auto& t : m.tris)
        for (int k = 0; k < 3; ++k) {
            int u2 = t[k], v2 = t[(k + 1) % 3];
            if (count[edge_key(u2, v2)] == 1) succ[u2] = v2;
        }
    if (!succ.empty()) {
        int start = succ.begin()->first, at = start;
        do {
            m.boundary_loop.push_back(at);
            at = succ.at(at);
        } while (at != start && m.boundary_loop.size() <= succ.size());
    }
    return m;
}

// ---- geodesic oracle ----

GeodesicOracle::GeodesicOracle(const PolygonDomain& d) {
    pts = d.boundary.v;
    double diam = d.boundary.diameter();
    diam2_ = diam * diam;
    tris = triangulate_polygon(pts);
    adj.assign(tris.size(), {-1, -1, -1});
    std::unordered_map<std::uint64_t, std::pair<int, int>> half;
    for (std::size_t i = 0; i < tris.size(); ++i)
        for (int k = 0; k < 3; ++k) {
            auto key = edge_key(tris[i][k], tris[i][(k + 1) % 3]);
            auto it = half.find(key);
            if (it == half.end()) {
                half[key] = {static_cast<int>(i), k};
            } else {
                adj[i][k] = it->second.first;
                adj[it->second.first][it->second.second] = static_cast<int>(i);
            }
        }
}

int GeodesicOracle::locate(Point2 p) const {
    int best = -1;
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tris.size(); ++i) {
        Point2 a = pts[tris[i][0]], b = pts[tris[i][1]], c = pts[tris[i][2]];
        if (orient(a, b, c) <= 0) continue;
        double v0 = orient(a, b, p), v1 = orient(b, c, p), v2 = orient(c, a, p);
        double mn = std::min({v0, v1, v2});
        if (mn > best_val) {
            best_val = mn;
            best = static_cast<int>(i);
        }
    }
    if (best < 0 || best_val < -1e-12 * diam2_) return -1;
    return best;
}

static double triarea2(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

std::vector<Point2> GeodesicOracle::path(Point2 a, Point2 b) const {
    int ta = locate(a), tb = locate(b);
    if (ta < 0 || tb < 0) throw Error("geodesic endpoint outside domain");
    if (ta == tb) return {a, b};

    std::vector<int> parent(tris.size(), -2);
    std::deque<int> bfs{ta};
    parent[ta] = -1;
    while (!bfs.empty()) {
        int t = bfs.front();
        bfs.pop_front();
        if (t == tb) break;
        for (int k = 0; k < 3; ++k) {
            int nb = adj[t][k];
            if (nb >= 0 && parent[nb] == -2) {
                parent[nb] = t;
                bfs.push_back(nb);
            }
        }
    }
    if (parent[tb] == -2) throw Error("domain triangulation is disconnected");
    std::vector<int> walk;
    for (int t = tb; t != -1; t = parent[t]) walk.push_back(t);
    std::reverse(walk.begin(), walk.end());

    // portals: crossing the directed edge (u,v) of the current triangle puts
    // v on the walker's left and u on the right
    std::vector<std::pair<Point2, Point2>> portals;
    portals.emplace_back(a, a);
    for (std::size_t i = 0; i + 1 < walk.size(); ++i) {
        int t = walk[i], nb = walk[i + 1];
        int k = 0;
        while (adj[t][k] != nb) ++k;
        Point2 u = pts[tris[t][k]], v = pts[tris[t][(k + 1) % 3]];
        portals.emplace_back(v, u);
    }
    portals.emplace_back(b, b);

    // funnel: the wedge from the apex spans CCW from the right edge to the left
    std::vector<Point2> path;
    Point2 apex = portals[0].first, pl = apex, pr = apex;
    std::size_t apexi = 0, li = 0, ri = 0;
    path.push_back(apex);
    for (std::size_t i = 1; i < portals.size(); ++i) {
        Point2 l = portals[i].first, r = portals[i].second;
        if (triarea2(apex, pr, r) >= 0.0) {
            if (pr == apex || triarea2(apex, pl, r) < 0.0) {
                pr = r;
                ri = i;
            } else {
                if (!(path.back() == pl)) path.push_back(pl);
                apex = pl;
                apexi = li;
                pl = pr = apex;
                li = ri = apexi;
                i = apexi;
                continue;
            }
        }
        if (triarea2(apex, pl, l) <= 0.0) {
            if (pl == apex || triarea2(apex, pr, l) > 0.0) {
                pl = l;
                li = i;
            } else {
                if (!(path.back() == pr)) path.push_back(pr);
                apex = pr;
                apexi = ri;
                pl = pr = apex;
                li = ri = apexi;
                i = apexi;
                continue;
            }
        }
    }
    if (!(path.back() == b)) path.push_back(b);
    return path;
}

double GeodesicOracle::distance(Point2 a, Point2 b) const { return polyline_length(path(a, b)); }

std::vector<Point2> internal_path(const PolygonDomain& d, Point2 a, Point2 b) {
    return GeodesicOracle(d).path(a, b);
}

double internal_distance(const PolygonDomain& d, Point2 a, Point2 b) {
    return GeodesicOracle(d).distance(a, b);
}

// ---- curve constants ----

namespace {

std::vector<Point2> sample_curve(const PolyCurve& c, std::size_t samples, double& max_gap) {
    std::vector<double> params;
    if (c.size() * 2 <= samples) {
        for (std::size_t i = 0; i < c.size(); ++i) {
            params.push_back(c.cum[i]);
            params.push_back(0.5 * (c.cum[i] + c.cum[i + 1]));
        }
    } else {
        double L = c.length();
        for (std::size_t i = 0; i < samples; ++i)
            params.push_back(L * static_cast<double>(i) / static_cast<double>(samples));
    }
    std::sort(params.begin(), params.end());
    max_gap = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        double next = (i + 1 < params.size()) ? params[i + 1] : params[0] + c.length();
        max_gap = std::max(max_gap, next - params[i]);
    }
    std::vector<Point2> out;
    out.reserve(params.size());
    for (double s : params) out.push_back(c.point_at(s));
    return out;
}

// windowed diameter tables over the doubled index range
struct DiamTable {
    std::size_t K;
    std::vector<double> M;  // M[a*(K+1)+d] = diameter of P[a..a+d]

    DiamTable(const std::vector<Point2>& P) : K(P.size()), M(2 * K * (K + 1), 0.0) {
        std::vector<double> R(2 * K * (K + 1), 0.0);
        auto pt = [&](std::size_t a) { return P[a % K]; };
        for (std::size_t d = 1; d <= K; ++d)
            for (std::size_t a = 0; a + d < 2 * K; ++a) {
                double r = std::max(R[(a + 1) * (K + 1) + d - 1], dist(pt(a), pt(a + d)));
                R[a * (K + 1) + d] = r;
                M[a * (K + 1) + d] = std::max(M[a * (K + 1) + d - 1], r);
            }
    }
    double diam(std::size_t a, std::size_t d) const { return M[a * (K + 1) + d]; }
};

}  // namespace

CurveConstant ahlfors_constant(const PolyCurve& c, std::size_t samples) {
    double gap = 0.0;
    auto P = sample_curve(c, samples, gap);
    std::size_t K = P.size();
    if (K < 4) throw Error("too few samples");
    DiamTable T(P);
    double best = 0.0;
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t d = 1; d < K; ++d) {
            double chord = dist(P[i], P[(i + d) % K]);
            if (chord <= 0) continue;
            double small = std::min(T.diam(i, d), T.diam(i + d, K - d));
            best = std::max(best, small / chord);
        }
    return {best, K, gap};
}

CurveConstant three_point_constant(const PolyCurve& c, std::size_t samples) {
    double gap = 0.0;
    auto P = sample_curve(c, samples, gap);
    std::size_t K = P.size();
    if (K < 4) throw Error("too few samples");
    double best = 1.0;
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t d = 1; d <= K / 2; ++d) {
            Point2 a = P[i], b = P[(i + d) % K];
            double chord = dist(a, b);
            if (chord <= 0) continue;
            for (std::size_t u = 1; u < d; ++u) {
                Point2 m = P[(i + u) % K];
                best = std::max(best, (dist(a, m) + dist(m, b)) / chord);
            }
        }
    return {best, K, gap};
}

double quasiconvexity_constant(const PolygonDomain& d, std::size_t samples, double cap) {
    GeodesicOracle oracle(d);
    // vertices carry the extremal detours (corners, pinches); fill any
    // remaining budget with uniform arc-length points
    const auto& v = d.boundary.v;
    std::vector<Point2> P;
    if (v.size() <= samples) {
        P = v;
        std::size_t extra = samples - v.size();
        double L = d.boundary.length();
        for (std::size_t k = 0; k < extra; ++k)
            P.push_back(d.boundary.point_at(L * static_cast<double>(k) / static_cast<double>(extra)));
    } else {
        std::size_t stride = (v.size() + samples - 1) / samples;
        for (std::size_t i = 0; i < v.size(); i += stride) P.push_back(v[i]);
    }
    double tiny = 1e-12 * d.boundary.diameter();
    double best = 1.0;
    for (std::size_t i = 0; i < P.size(); ++i)
        for (std::size_t j = i + 1; j < P.size(); ++j) {
            double chord = dist(P[i], P[j]);
            if (chord <= tiny) continue;
            double ratio = oracle.distance(P[i], P[j]) / chord;
            best = std::max(best, ratio);
            if (best > cap) return std::numeric_limits<double>::infinity();
        }
    return best;
}

// ---- generators ----

std::vector<Point2> koch_curve(double tau, int n, Point2 a, Point2 b, bool bump_left) {
    if (!(tau > 0.25 && tau < 0.5)) throw Error("generator ratio must lie in (1/4, 1/2)");
    if (n < 0) throw Error("generation must be nonnegative");
    double h = std::sqrt(tau * tau - (0.5 - tau) * (0.5 - tau));
    std::vector<Point2> pts{a, b};
    for (int g = 0; g < n; ++g) {
        std::vector<Point2> out;
        out.reserve((pts.size() - 1) * 4 + 1);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            Point2 p = pts[i], q = pts[i + 1];
            Point2 u = q - p;
            Point2 nrm = bump_left ? perp(u) : -1.0 * perp(u);
            out.push_back(p);
            out.push_back(p + tau * u);
            out.push_back(p + 0.5 * u + h * nrm);
            out.push_back(p + (1.0 - tau) * u);
        }
        out.push_back(pts.back());
        pts = std::move(out);
    }
    return pts;
}

PolygonDomain koch_snowflake(double tau, int gen) {
    Point2 v0{0, 0}, v1{1, 0}, v2{0.5, std::sqrt(3.0) / 2.0};
    std::vector<Point2> pts;
    for (auto [a, b] : {std::pair{v0, v1}, std::pair{v1, v2}, std::pair{v2, v0}}) {
        auto side = koch_curve(tau, gen, a, b, false);  // outward bumps on a CCW triangle
        pts.insert(pts.end(), side.begin(), side.end() - 1);
    }
    return PolygonDomain::from_points(std::move(pts));
}

namespace {

// miter offset of an open polyline, to the side sign*left
std::vector<Point2> offset_chain(const std::vector<Point2>& s, double eps, double sign) {
    std::size_t n = s.size();
    std::vector<Point2> out(n);
    auto nrm = [&](std::size_t i) {
        Point2 u = s[i + 1] - s[i];
        double l = norm(u);
        return sign * perp(u) / l;
    };
    out[0] = s[0] + eps * nrm(0);
    out[n - 1] = s[n - 1] + eps * nrm(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        Point2 n0 = nrm(i - 1), n1 = nrm(i);
        Point2 p0 = s[i] + eps * n0, p1 = s[i] + eps * n1;
        Point2 d0 = s[i] - s[i - 1], d1 = s[i + 1] - s[i];
        double den = cross(d0, d1);
        if (std::abs(den) < 1e-14 * norm(d0) * norm(d1)) {
            out[i] = 0.5 * (p0 + p1);
        } else {
            double t = cross(p1 - p0, d1) / den;
            out[i] = p0 + t * d0;
        }
    }
    return out;
}

}  // namespace

SnowflakeTube snowflake_tube(double tau, int n, double eps) {
    if (n < 1) throw Error("tube needs at least one generation");
    double cap = std::pow(tau, n) / 20.0;
    if (eps <= 0) eps = cap;
    if (eps > cap * (1 + 1e-12)) throw Error("tube half-width exceeds the simplicity bound");
    auto full = koch_curve(tau, n, {0, 0}, {1, 0}, true);
    std::size_t keep = 3;
    for (int g = 1; g < n; ++g) keep *= 4;
    std::vector<Point2> spine(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(keep) + 1);

    SnowflakeTube t;
    t.spine = spine;
    t.eps = eps;
    t.top = offset_chain(spine, eps, +1.0);
    t.bottom = offset_chain(spine, eps, -1.0);

    std::vector<Point2> poly = t.bottom;
    poly.insert(poly.end(), t.top.rbegin(), t.top.rend());
    PolyCurve c = PolyCurve::closed(std::move(poly));
    if (!c.is_ccw()) throw Error("tube orientation unexpected");
    if (!c.is_simple(1e-13)) throw Error("tube self-intersects; reduce the half-width");
    t.domain = PolygonDomain{std::move(c)};
    return t;
}

TubeChain tube_chain(double tau, int parts, std::size_t segment_budget) {
    if (parts < 1) throw Error("chain needs at least one part");
    if (segment_budget < 3) throw Error("segment budget too small");

    int n_cap = 1;
    {
        std::size_t segs = 3;
        while (segs * 4 <= segment_budget) {
            segs *= 4;
            ++n_cap;
        }
    }

    TubeChain chain;
    chain.tau = tau;
    std::vector<Point2> bot_all, top_all;
    double x0 = 0.0;
    for (int j = 1; j <= parts; ++j) {
        double scale = std::pow(4.0, -(j - 1));
        double required = std::pow(4.0, j);
        // pick n so the scaled spine is at least twice the required traverse
        double target = 2.0 * required / (0.75 * scale);
        int n_req = 1;
        while (std::pow(4.0 * tau, n_req) < target && n_req < 400) ++n_req;
        int n = std::min(n_req, n_cap);

        SnowflakeTube part = snowflake_tube(tau, n, 0.0);
        auto place = [&](std::vector<Point2>& v) {
            for (Point2& p : v) p = Point2{x0, 0} + scale * p;
        };
        place(part.spine);
        place(part.top);
        place(part.bottom);

        TubeChainPart meta;
        meta.n = n;
        meta.n_requested = n_req;
        meta.eps = part.eps;
        meta.scale = scale;
        meta.spine_length = polyline_length(part.spine);
        meta.traverse_required = required;

        {
            // certified traverse: exact geodesic between the end edges of this part
            std::vector<Point2> poly = part.bottom;
            poly.insert(poly.end(), part.top.rbegin(), part.top.rend());
            PolygonDomain pd = PolygonDomain::from_points(std::move(poly));
            Point2 lmid = 0.5 * (part.top.front() + part.bottom.front());
            Point2 rmid = 0.5 * (part.top.back() + part.bottom.back());
            meta.traverse_achieved = internal_distance(pd, lmid, rmid);
            meta.traverse_ok = meta.traverse_achieved >= required;
        }

        meta.top_begin = top_all.size();
        top_all.insert(top_all.end(), part.top.begin(), part.top.end());
        bot_all.insert(bot_all.end(), part.bottom.begin(), part.bottom.end());
        meta.top_end = top_all.size();
        chain.parts.push_back(meta);

        x0 += scale * (1.0 - tau);
    }

    chain.top = top_all;
    chain.bottom = bot_all;
    chain.left_lo = bot_all.front();
    chain.left_hi = top_all.front();
    chain.right_lo = bot_all.back();
    chain.right_hi = top_all.back();

    Point2 right_mid = 0.5 * (chain.right_lo + chain.right_hi);
    std::vector<Point2> poly = bot_all;
    poly.push_back(right_mid);
    poly.insert(poly.end(), top_all.rbegin(), top_all.rend());
    chain.domain = PolygonDomain::from_points(std::move(poly));

    const PolyCurve& b = chain.domain.boundary;
    chain.s_right_mid = b.vertex_param(bot_all.size());
    chain.s_top_end = b.vertex_param(b.size() - 1);
    return chain;
}

PolygonDomain cusp_domain(double beta, CuspKind kind, double x_tip, int pts_per_branch) {
    if (beta <= 1.0) throw Error("cusp exponent must exceed 1");
    if (!(x_tip > 0 && x_tip < 0.5)) throw Error("tip cutoff out of range");
    if (pts_per_branch < 8) throw Error("too few branch points");

    std::vector<double> xs;
    for (int k = 0; k < pts_per_branch; ++k)
        xs.push_back(std::exp(std::log(x_tip) * k / (pts_per_branch - 1)));

    std::vector<Point2> pts;
    for (double x : xs) pts.push_back({x, std::pow(x, beta)});  // upper, inward
    pts.push_back({0, 0});
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) pts.push_back({*it, -std::pow(*it, beta)});

    double R = std::sqrt(2.0);
    int n_arc = 96;
    if (kind == CuspKind::outer) {
        for (int k = 1; k < n_arc; ++k) {
            double th = -M_PI / 4 + (M_PI / 2) * k / n_arc;
            pts.push_back({R * std::cos(th), R * std::sin(th)});
        }
    } else {
        for (int k = 1; k < 4 * n_arc; ++k) {
            double th = -M_PI / 4 - (3 * M_PI / 2) * k / (4 * n_arc);
            pts.push_back({R * std::cos(th), R * std::sin(th)});
        }
    }
    return PolygonDomain::from_points(std::move(pts));
}

}  // namespace sobex
