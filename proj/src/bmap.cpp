#include "sobex/bmap.hpp"

#include <algorithm>
#include <cmath>

namespace sobex {

double MapPiece::map_local(double u) const {
    auto it = std::upper_bound(knots.begin(), knots.end(), u,
                               [](double a, const std::pair<double, double>& k) { return a < k.first; });
    if (it == knots.begin()) return knots.front().second;
    if (it == knots.end()) return knots.back().second;
    auto [u1, w1] = *it;
    auto [u0, w0] = *(it - 1);
    double t = (u1 > u0) ? (u - u0) / (u1 - u0) : 0.0;
    return w0 + t * (w1 - w0);
}

static double lerp_lookup(const std::vector<std::pair<double, double>>& knots, double x,
                          bool by_second) {
    auto key = [&](const std::pair<double, double>& k) { return by_second ? k.second : k.first; };
    auto val = [&](const std::pair<double, double>& k) { return by_second ? k.first : k.second; };
    std::size_t lo = 0, hi = knots.size() - 1;
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (key(knots[mid]) <= x)
            lo = mid;
        else
            hi = mid;
    }
    double x0 = key(knots[lo]), x1 = key(knots[hi]);
    double y0 = val(knots[lo]), y1 = val(knots[hi]);
    double t = (x1 > x0) ? (x - x0) / (x1 - x0) : 0.0;
    return y0 + t * (y1 - y0);
}

double BoundaryMap::evaluate(double s) const {
    double Ls = source->length();
    double s0 = corr.front().first;
    double u = std::fmod(s - s0, Ls);
    if (u < 0) u += Ls;
    double t = lerp_lookup(corr, s0 + u, false);
    return target->wrap(t);
}

double BoundaryMap::evaluate_inverse(double t) const {
    double Lt = target->length();
    double t0 = corr.front().second;
    double w = std::fmod(t - t0, Lt);
    if (w < 0) w += Lt;
    double s = lerp_lookup(corr, t0 + w, true);
    return source->wrap(s);
}

BoundaryMap BoundaryMap::inverse() const {
    BoundaryMap inv;
    inv.source = target;
    inv.target = source;
    inv.corr.reserve(corr.size());
    for (auto& [s, t] : corr) inv.corr.emplace_back(t, s);
    return inv;
}

bool BoundaryMap::valid(double tol_rel, std::string* why) const {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (!source || !target || corr.size() < 2) return fail("correspondence empty");
    double Ls = source->length(), Lt = target->length();
    for (std::size_t i = 1; i < corr.size(); ++i) {
        if (!(corr[i].first > corr[i - 1].first) || !(corr[i].second > corr[i - 1].second))
            return fail("correspondence not strictly increasing at breakpoint " + std::to_string(i));
    }
    if (std::abs(corr.back().first - corr.front().first - Ls) > tol_rel * Ls)
        return fail("source period not covered exactly once");
    if (std::abs(corr.back().second - corr.front().second - Lt) > tol_rel * Lt)
        return fail("target period not covered exactly once");
    return true;
}

MapPiece constant_speed_map(std::shared_ptr<const PolyCurve> src, double s0, double s1,
                            std::shared_ptr<const PolyCurve> dst, double t0, double t1) {
    if (!(s1 > s0) || !(t1 > t0)) throw Error("degenerate arc in correspondence piece");
    MapPiece p;
    p.src_curve = std::move(src);
    p.dst_curve = std::move(dst);
    p.src0 = s0;
    p.src1 = s1;
    p.dst0 = t0;
    p.dst1 = t1;
    p.knots = {{0.0, 0.0}, {s1 - s0, t1 - t0}};
    return p;
}

MapPiece holder_map(double alpha, std::shared_ptr<const PolyCurve> src, double s0, double s1,
                    std::shared_ptr<const PolyCurve> dst, double t0, double t1) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("Holder exponent out of (0,1]");
    if (alpha == 1.0) return constant_speed_map(std::move(src), s0, s1, std::move(dst), t0, t1);
    double Ls = s1 - s0, Lt = t1 - t0;
    if (!(Ls > 0) || !(Lt > 0)) throw Error("degenerate arc in correspondence piece");

    // geometric knots: PL error on [r u, u] is ~ (1-r)^2 alpha(1-alpha)/8 (u/Ls)^alpha Lt,
    // and the innermost linear stretch contributes ~ (u_min/Ls)^alpha Lt
    double step = 0.99 * std::sqrt(8e-6 / (alpha * (1.0 - alpha)));  // 1 - r
    step = std::min(step, 0.25);
    double r = 1.0 - step;
    double bits = std::max(60.0, 6.0 * std::log2(10.0) / alpha);
    double floor_rel = std::pow(2.0, -bits);

    MapPiece p;
    p.src_curve = std::move(src);
    p.dst_curve = std::move(dst);
    p.src0 = s0;
    p.src1 = s1;
    p.dst0 = t0;
    p.dst1 = t1;
    std::vector<std::pair<double, double>> rev;
    double u = 1.0;
    while (u > floor_rel) {
        rev.emplace_back(u * Ls, std::pow(u, alpha) * Lt);
        u *= r;
    }
    p.knots.emplace_back(0.0, 0.0);
    for (auto it = rev.rbegin(); it != rev.rend(); ++it) p.knots.push_back(*it);
    return p;
}

BoundaryMap assemble(std::vector<MapPiece> pieces) {
    if (pieces.empty()) throw Error("no pieces to assemble");
    auto src = pieces.front().src_curve;
    auto dst = pieces.front().dst_curve;
    double Ls = src->length(), Lt = dst->length();
    double span_s = 0.0, span_t = 0.0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const MapPiece& p = pieces[i];
        if (p.src_curve.get() != src.get() || p.dst_curve.get() != dst.get())
            throw Error("pieces reference different curves");
        span_s += p.src1 - p.src0;
        span_t += p.dst1 - p.dst0;
        if (i > 0) {
            double gap = p.src0 - pieces[i - 1].src1;
            if (std::abs(gap) > 1e-9 * Ls) throw Error("pieces leave a gap on the source circle");
            double tgap = std::remainder(p.dst0 - pieces[i - 1].dst1, Lt);
            if (std::abs(tgap) > 1e-9 * Lt) throw Error("piece targets are not endpoint-compatible");
        }
    }
    if (std::abs(span_s - Ls) > 1e-9 * Ls) throw Error("pieces do not cover the source exactly once");
    if (std::abs(span_t - Lt) > 1e-9 * Lt) throw Error("pieces do not cover the target exactly once");

    BoundaryMap m;
    m.source = src;
    m.target = dst;
    double s_base = pieces.front().src0;
    double t_base = pieces.front().dst0;
    double s_off = 0.0, t_off = 0.0;
    for (const MapPiece& p : pieces) {
        for (auto& [u, w] : p.knots) {
            double s = s_base + s_off + u;
            double t = t_base + t_off + w;
            if (!m.corr.empty() && s <= m.corr.back().first + 0.0) {
                continue;  // shared endpoint knot
            }
            m.corr.emplace_back(s, t);
        }
        s_off += p.src1 - p.src0;
        t_off += p.dst1 - p.dst0;
    }
    std::string why;
    if (!m.valid(1e-9, &why)) throw Error("assembled map invalid: " + why);
    return m;
}

BoundaryMap identity_map(std::shared_ptr<const PolyCurve> c) {
    double L = c->length();
    return assemble({constant_speed_map(c, 0.0, L, c, 0.0, L)});
}

double cusp_profile(double x, double eps) {
    return std::pow(1.0 - std::log(x), -eps);  // log(e/x) = 1 - log x
}

MapPiece cusp_trace(double beta, double eps) {
    if (!(eps < 0.5 && beta * eps > 0.5)) throw Error("need eps < 1/2 < beta*eps");

    auto source = std::make_shared<PolyCurve>(
        PolyCurve::closed({{0, 0}, {1, -1}, {1, 1}}));
    // target spike {0<=u<=1, |v|<=u^beta} with geometric density toward the tip
    std::vector<double> us;
    int m = 240;
    for (int k = 0; k < m; ++k) us.push_back(std::exp(std::log(1e-9) * k / (m - 1)));
    std::vector<Point2> tpts{{0, 0}};
    for (auto it = us.rbegin(); it != us.rend(); ++it) tpts.push_back({*it, -std::pow(*it, beta)});
    tpts.push_back({1, 1});
    for (double u : us)
        if (u < 1.0) tpts.push_back({u, std::pow(u, beta)});
    auto target = std::make_shared<PolyCurve>(PolyCurve::closed(std::move(tpts)));

    // source walls through the cusp point: from (1,1) via (0,0) to (1,-1)
    double r2 = std::sqrt(2.0);
    double s_start = source->vertex_param(2);  // (1,1), = 2 + sqrt(2)
    double Ltgt = target->length();

    // vertex layout of the target: 0 = origin, 1..m = lower branch (u ascending),
    // m+1 = (1,1), m+2..2m = upper branch (u descending)
    std::size_t mu = static_cast<std::size_t>(m);
    std::vector<double> lo_u{0.0}, lo_param{0.0}, up_u, up_param;
    for (std::size_t i = 1; i <= mu; ++i) {
        lo_u.push_back(target->v[i].x);
        lo_param.push_back(target->vertex_param(i));
    }
    for (std::size_t i = mu + 1; i <= 2 * mu; ++i) {
        up_u.push_back(target->v[i].x);
        up_param.push_back(target->vertex_param(i));
    }
    up_u.push_back(0.0);
    up_param.push_back(Ltgt);  // origin reached as a lift past the seam

    // lower branch: u ascending with param; upper branch: u descending as param grows
    auto param_of = [&](double u, bool upper) {
        const auto& uu = upper ? up_u : lo_u;
        const auto& pp = upper ? up_param : lo_param;
        // binary search on u (ascending for lower, descending for upper)
        std::size_t lo = 0, hi = uu.size() - 1;
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            bool left = upper ? (uu[mid] >= u) : (uu[mid] <= u);
            if (left)
                lo = mid;
            else
                hi = mid;
        }
        double u0 = uu[lo], u1 = uu[hi];
        double t = (u1 != u0) ? (u - u0) / (u1 - u0) : 0.0;
        return pp[lo] + t * (pp[hi] - pp[lo]);
    };

    MapPiece p;
    p.src_curve = source;
    p.dst_curve = target;
    p.src0 = s_start;
    p.src1 = s_start + 2.0 * r2;  // through (0,0) to (1,-1), wrapping the seam
    p.dst0 = target->vertex_param(mu + 1);  // (1,1)
    double tip_w = Ltgt - p.dst0;           // lift of the tip within the piece

    // knots: x geometric from 1 down to 1e-12 on the upper wall, the exact
    // cusp point, then back out on the lower wall
    std::vector<std::pair<double, double>> kn;
    int nk = 200;
    kn.emplace_back(0.0, 0.0);
    for (int k = 1; k <= nk; ++k) {
        double x = std::exp(std::log(1e-12) * k / nk);
        double u_src = r2 * (1.0 - x);  // arc from (1,1) toward the origin
        kn.emplace_back(u_src, param_of(cusp_profile(x, eps), true) - p.dst0);
    }
    kn.emplace_back(r2, tip_w);  // cusp vertex to spike tip
    for (int k = nk; k >= 1; --k) {
        double x = std::exp(std::log(1e-12) * k / nk);
        double u_src = r2 * (1.0 + x);  // back out from the origin toward (1,-1)
        kn.emplace_back(u_src, tip_w + param_of(cusp_profile(x, eps), false));
    }
    double end_w = tip_w + param_of(1.0, false);
    kn.emplace_back(2.0 * r2, end_w);
    p.dst1 = p.dst0 + end_w;
    p.knots = std::move(kn);
    return p;
}

BoundaryMap snowflake_boundary_map(const TubeChain& chain,
                                   std::shared_ptr<const PolyCurve> circle, double frac_a1,
                                   double frac_a2, double anchor) {
    if (chain.parts.empty()) throw Error("empty tube chain");
    if (!(frac_a1 > 0 && frac_a2 > 0 && frac_a1 + frac_a2 < 1))
        throw Error("circle split fractions invalid");
    auto tgt = std::make_shared<PolyCurve>(chain.domain.boundary);
    const PolyCurve& b = *tgt;
    double Lc = circle->length();
    double A2 = frac_a2 * Lc, A3 = (1 - frac_a1 - frac_a2) * Lc;
    std::size_t J = chain.parts.size();
    std::size_t B = chain.bottom.size();
    std::size_t T = chain.top.size();
    if (B != T) throw Error("inconsistent part structure");
    auto bot_param = [&](std::size_t g) { return b.vertex_param(g); };
    auto top_param = [&](std::size_t g) { return b.vertex_param(B + 1 + (T - 1 - g)); };

    std::vector<MapPiece> pieces;
    double s = anchor;

    // A3 -> bottom side, parts left to right, geometric arcs |b_j| = 4|b_{j+1}|
    for (std::size_t j = 0; j < J; ++j) {
        const TubeChainPart& part = chain.parts[j];
        double arc = 3.0 * A3 * std::pow(4.0, -static_cast<double>(j + 1));
        std::size_t g0 = part.top_begin;
        std::size_t m = part.top_end - part.top_begin - 1;  // segments in this part
        double delta = arc / static_cast<double>(m);
        for (std::size_t i = 0; i < m; ++i) {
            std::size_t gend = g0 + i + 1;
            // fold the junction edge to the next part into the last sub-arc
            if (i + 1 == m && j + 1 < J) gend = g0 + i + 2;
            pieces.push_back(constant_speed_map(circle, s + i * delta, s + (i + 1) * delta, tgt,
                                                bot_param(g0 + i), bot_param(gend)));
        }
        s += arc;
    }
    {   // bottom tail: lower half of the right end edge
        double arc = A3 * std::pow(4.0, -static_cast<double>(J));
        pieces.push_back(
            constant_speed_map(circle, s, s + arc, tgt, bot_param(B - 1), chain.s_right_mid));
        s += arc;
    }
    {   // top tail: upper half of the right end edge
        double arc = A2 * std::pow(4.0, -static_cast<double>(J));
        pieces.push_back(
            constant_speed_map(circle, s, s + arc, tgt, chain.s_right_mid, top_param(T - 1)));
        s += arc;
    }
    // A2 -> top side, parts right to left
    for (std::size_t jj = J; jj-- > 0;) {
        const TubeChainPart& part = chain.parts[jj];
        double arc = 3.0 * A2 * std::pow(4.0, -static_cast<double>(jj + 1));
        std::size_t g0 = part.top_begin;
        std::size_t g1 = part.top_end;
        std::size_t m = g1 - g0 - 1;
        double delta = arc / static_cast<double>(m);
        for (std::size_t i = 0; i < m; ++i) {
            std::size_t gstart = g1 - 1 - i;
            // fold the junction edge from the previous (smaller) part into the
            // first sub-arc
            std::size_t gfrom = (i == 0 && jj + 1 < J) ? g1 : gstart;
            pieces.push_back(constant_speed_map(circle, s + i * delta, s + (i + 1) * delta, tgt,
                                                top_param(gfrom), top_param(gstart - 1)));
        }
        s += arc;
    }
    // A1 -> left end edge
    pieces.push_back(constant_speed_map(circle, s, anchor + Lc, tgt, chain.s_top_end, b.length()));
    return assemble(std::move(pieces));
}

std::size_t DyadicFamily::count() const {
    std::size_t c = 0;
    for (const auto& gen : arcs) c += gen.size();
    return c;
}

DyadicFamily dyadic_family(std::shared_ptr<const PolyCurve> circle, int n0, int N, double anchor) {
    if (n0 > N || n0 < 0) throw Error("bad generation range");
    DyadicFamily f;
    f.circle = std::move(circle);
    f.n0 = n0;
    f.N = N;
    f.anchor = anchor;
    double L = f.circle->length();
    for (int n = n0; n <= N; ++n) {
        std::vector<ArcRef> gen;
        double len = L / std::pow(2.0, n);
        std::size_t cnt = static_cast<std::size_t>(1) << n;
        for (std::size_t j = 0; j < cnt; ++j)
            gen.push_back(ArcRef{f.circle.get(), anchor + static_cast<double>(j) * len,
                                 anchor + static_cast<double>(j + 1) * len});
        f.arcs.push_back(std::move(gen));
    }
    return f;
}

}  // namespace sobex
