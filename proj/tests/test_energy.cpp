#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <memory>
#include <random>

#include "sobex/bmap.hpp"
#include "sobex/energy.hpp"
#include "sobex/engine.hpp"

using namespace sobex;

namespace {

std::shared_ptr<const PolyCurve> circle(int n, double r = 1.0) {
    std::vector<Point2> pts;
    for (int i = 0; i < n; ++i) {
        double a = 2.0 * M_PI * i / n;
        pts.push_back({r * std::cos(a), r * std::sin(a)});
    }
    return std::make_shared<PolyCurve>(PolyCurve::closed(std::move(pts)));
}

PolygonDomain unit_square() {
    return PolygonDomain::from_points({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
}

PLMap identity_pl(double h) {
    PLMap m;
    m.mesh = triangulate(unit_square(), h);
    m.images = m.mesh.verts;
    return m;
}

BoundaryMap holder_on_arc(std::shared_ptr<const PolyCurve> c, double alpha, double frac) {
    double L = c->length(), cut = frac * L;
    std::vector<MapPiece> pieces;
    pieces.push_back(holder_map(alpha, c, 0, cut, c, 0, cut));
    pieces.push_back(constant_speed_map(c, cut, L, c, cut, L));
    return assemble(std::move(pieces));
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double n = static_cast<double>(x.size());
    return (sxy - sx * sy / n) / (sxx - sx * sx / n);
}

}  // namespace

TEST_CASE("affine energies integrate exactly over a square") {
    PLMap id = identity_pl(0.3);
    double area = id.mesh.area();

    EnergyReport r = pl_energy(id, 2.0);
    CHECK(r.norm == MatrixNorm::frobenius);
    CHECK(r.value == doctest::Approx(2.0 * area).epsilon(1e-12));
    REQUIRE(r.lower_bound.has_value());
    CHECK(*r.lower_bound == doctest::Approx(2.0 * area).epsilon(1e-12));

    PLMap stretch = id;
    for (auto& q : stretch.images) q.x *= 2.0;
    EnergyReport f2 = pl_energy(stretch, 2.0, MatrixNorm::frobenius);
    CHECK(f2.value == doctest::Approx(5.0 * area).epsilon(1e-12));
    CHECK(*f2.lower_bound == doctest::Approx(4.0 * area).epsilon(1e-12));
    CHECK(f2.value >= *f2.lower_bound);

    EnergyReport o2 = pl_energy(stretch, 2.0, MatrixNorm::operator_norm);
    CHECK(o2.value == doctest::Approx(4.0 * area).epsilon(1e-12));
    EnergyReport o3 = pl_energy(stretch, 3.0);
    CHECK(o3.norm == MatrixNorm::operator_norm);
    CHECK(o3.value == doctest::Approx(8.0 * area).epsilon(1e-12));

    SUBCASE("per-cell sums add up exactly") {
        PLMap lab = stretch;
        lab.labels.assign(lab.mesh.tris.size(), 0);
        for (std::size_t t = 1; t < lab.labels.size(); t += 2) lab.labels[t] = 1;
        lab.label_names = {"even", "odd"};
        EnergyReport pc = pl_energy(lab, 2.0, MatrixNorm::frobenius);
        REQUIRE(pc.per_cell.size() == 2);
        CHECK(pc.per_cell[0].first == "even");
        CHECK(pc.per_cell[0].second > 0);
        CHECK(pc.per_cell[1].second > 0);
        CHECK(pc.value == pc.per_cell[0].second + pc.per_cell[1].second);
        CHECK(pc.value == doctest::Approx(f2.value).epsilon(1e-12));
    }

    SUBCASE("degenerate source triangles are rejected") {
        PLMap bad;
        bad.mesh.verts = {{0, 0}, {1, 0}, {2, 0}};
        bad.mesh.tris = {{0, 1, 2}};
        bad.mesh.boundary_loop = {0, 1, 2};
        bad.images = bad.mesh.verts;
        CHECK_THROWS_AS(pl_energy(bad, 2.0), Error);
        PLMap sized = identity_pl(0.5);
        sized.images.pop_back();
        CHECK_THROWS_AS(pl_energy(sized, 2.0), Error);
    }
}

TEST_CASE("energy survives scales near the double limits") {
    double s = 1e-300;
    PLMap m;
    m.mesh.verts = {{0, 0}, {s, 0}, {s, s}, {0, s}};
    m.mesh.tris = {{0, 1, 2}, {0, 2, 3}};  // the polygon's area underflows
    m.mesh.boundary_loop = {0, 1, 2, 3};
    for (Point2 q : m.mesh.verts) m.images.push_back({q.x / s, q.y / s});

    EnergyReport up = pl_energy(m, 2.0);
    CHECK(up.value == doctest::Approx(2.0).epsilon(1e-12));
    EnergyReport up3 = pl_energy(m, 3.0);
    CHECK(up3.value == doctest::Approx(1e300).epsilon(1e-9));

    PLMap down;
    down.mesh = triangulate(unit_square(), 0.6);
    for (Point2 q : down.mesh.verts) down.images.push_back({q.x * s, q.y * s});
    EnergyReport d = pl_energy(down, 2.0);
    CHECK(d.value >= 0);
    CHECK(d.value < 1e-290);
}

TEST_CASE("band quadrature reproduces the flat double integral") {
    auto c = circle(768);
    double L = c->length();
    BoundaryMap id = identity_map(c);

    DouglasResult r = douglas_energy(id, 2.0, 1e-12, 14);
    double expect = L * L * (1.0 - std::exp2(-14));
    CHECK(r.depth == 14);
    CHECK_FALSE(r.divergent);
    CHECK(r.value == doctest::Approx(expect).epsilon(1e-9));
    CHECK(std::abs(r.value - 39.47600803297045) < 0.005 * 39.476);
    REQUIRE(r.bands.size() == 14);
    for (int k = 1; k <= 14; ++k)
        CHECK(r.bands[static_cast<std::size_t>(k - 1)] ==
              doctest::Approx(L * L * std::exp2(-k)).epsilon(1e-9));
    CHECK(r.evals > 100000);

    SUBCASE("a lattice rotation leaves the integral unchanged") {
        BoundaryMap rot = assemble({constant_speed_map(c, 0, L, c, L / 3, L / 3 + L)});
        DouglasResult rr = douglas_energy(rot, 2.0, 1e-12, 14);
        CHECK(rr.value == doctest::Approx(r.value).epsilon(1e-9));
    }
}

TEST_CASE("band quadrature separates convergent from divergent power maps") {
    auto c = circle(512);
    double L = c->length();
    BoundaryMap conv = holder_on_arc(c, 0.5, 0.125);
    BoundaryMap dive = holder_on_arc(c, 0.25, 0.125);

    // midpoint-grid double sum over ordered pairs; its increments under grid
    // doubling shrink for the convergent map and grow for the divergent one
    auto brute = [&](const BoundaryMap& phi, int N) {
        double h = L / N, sum = 0;
        std::vector<Point2> P(static_cast<std::size_t>(N)), Q(static_cast<std::size_t>(N));
        for (int i = 0; i < N; ++i) {
            double sarc = (i + 0.5) * h;
            P[static_cast<std::size_t>(i)] = c->point_at(sarc);
            Q[static_cast<std::size_t>(i)] = phi(sarc);
        }
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                if (i == j) continue;
                double num = dist(Q[static_cast<std::size_t>(i)], Q[static_cast<std::size_t>(j)]);
                double den = dist(P[static_cast<std::size_t>(i)], P[static_cast<std::size_t>(j)]);
                double rat = num / den;
                sum += rat * rat * rat * h * h;
            }
        return sum;
    };
    double c1 = brute(conv, 256), c2 = brute(conv, 512), c3 = brute(conv, 1024);
    double d1 = brute(dive, 256), d2 = brute(dive, 512), d3 = brute(dive, 1024);
    CHECK((c3 - c2) / (c2 - c1) < 0.8);
    CHECK((d3 - d2) / (d2 - d1) > 1.05);

    DouglasResult rc = douglas_energy(conv, 3.0, 1e-4, 40);
    CHECK_FALSE(rc.divergent);
    CHECK(rc.stabilized);
    CHECK(rc.value > c2 - 1.0);
    CHECK(rc.value < 45.0);

    DouglasResult rd = douglas_energy(dive, 3.0, 1e-4, 40);
    CHECK(rd.divergent);
    CHECK_FALSE(rd.stabilized);
    CHECK(rd.depth <= 30);
}

TEST_CASE("band quadrature is deterministic across thread counts") {
    auto c = circle(128);
    BoundaryMap phi = holder_on_arc(c, 0.6, 0.25);
    setenv("SOBEX_THREADS", "1", 1);
    DouglasResult r1 = douglas_energy(phi, 2.5, 1e-6, 8);
    setenv("SOBEX_THREADS", "5", 1);
    DouglasResult r5 = douglas_energy(phi, 2.5, 1e-6, 8);
    unsetenv("SOBEX_THREADS");
    CHECK(r1.value == r5.value);
    CHECK(r1.evals == r5.evals);
    REQUIRE(r1.bands.size() == r5.bands.size());
    for (std::size_t k = 0; k < r1.bands.size(); ++k) CHECK(r1.bands[k] == r5.bands[k]);
}

TEST_CASE("modulus of continuity is exact for the identity and tracks a power map") {
    auto c = circle(512);
    BoundaryMap id = identity_map(c);
    std::vector<double> grid{0.5, 0.2, 0.1, 0.05, 0.01};
    auto om = modulus_of_continuity(id, grid);
    REQUIRE(om.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(om[i].first == grid[i]);
        CHECK(om[i].second == doctest::Approx(grid[i]).epsilon(1e-9));
    }

    SUBCASE("square-root boundary map has log-log slope one half") {
        auto cc = circle(1024);
        double L = cc->length();
        BoundaryMap hm = assemble({holder_map(0.5, cc, 0, L, cc, 0, L)});
        std::vector<double> tgrid{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
        auto w = modulus_of_continuity(hm, tgrid);
        std::vector<double> lx, ly;
        for (auto& s : w) {
            lx.push_back(std::log(s.first));
            ly.push_back(std::log(s.second));
        }
        double slope = fit_slope(lx, ly);
        CHECK(slope == doctest::Approx(0.5).epsilon(0.1));
        for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i].second <= w[i - 1].second);
    }

    SUBCASE("bad grids are rejected") {
        CHECK_THROWS_AS(modulus_of_continuity(id, {0.1, 0.2}), Error);
        CHECK_THROWS_AS(modulus_of_continuity(id, {0.1, -1.0}), Error);
        CHECK_THROWS_AS(modulus_of_continuity(id, {}), Error);
    }
}

TEST_CASE("decade ladder flags the borderline Dini integrals") {
    auto samples = [](auto f) {
        std::vector<std::pair<double, double>> s;
        for (int k = 0; k <= 256; ++k) {
            double t = std::pow(10.0, -k / 32.0);
            s.emplace_back(t, f(t));
        }
        return s;
    };
    double U = 1.0 + std::log(1e8);

    SUBCASE("linear modulus integrates to one half") {
        Dini2Result r = dini2_integral(samples([](double t) { return t; }), 1e-8);
        CHECK(r.partials.size() == 8);
        CHECK(r.value == doctest::Approx(0.5).epsilon(0.01));
        CHECK_FALSE(r.divergent);
        CHECK(r.fitted_exponent < -5.0);
        REQUIRE(r.limit_estimate.has_value());
        CHECK(*r.limit_estimate == doctest::Approx(0.5).epsilon(0.02));
    }

    SUBCASE("slowly decaying logarithmic modulus diverges") {
        Dini2Result r = dini2_integral(
            samples([](double t) { return std::pow(1.0 - std::log(t), -0.4); }), 1e-8);
        double exact = 5.0 * (std::pow(U, 0.2) - 1.0);
        CHECK(r.value == doctest::Approx(exact).epsilon(0.01));
        CHECK(r.divergent);
        CHECK(r.fitted_exponent == doctest::Approx(0.2).epsilon(0.1));
        CHECK(r.fit_r2 > 0.99);
        CHECK_FALSE(r.limit_estimate.has_value());
    }

    SUBCASE("faster logarithmic decay converges to its closed-form limit") {
        Dini2Result r = dini2_integral(
            samples([](double t) { return std::pow(1.0 - std::log(t), -0.6); }), 1e-8);
        double exact = 5.0 * (1.0 - std::pow(U, -0.2));
        CHECK(r.value == doctest::Approx(exact).epsilon(0.01));
        CHECK_FALSE(r.divergent);
        CHECK(r.fitted_exponent == doctest::Approx(-0.2).epsilon(0.1));
        REQUIRE(r.limit_estimate.has_value());
        CHECK(*r.limit_estimate == doctest::Approx(5.0).epsilon(0.02));
    }

    SUBCASE("bad inputs are rejected") {
        auto s = samples([](double t) { return t; });
        CHECK_THROWS_AS(dini2_integral(s, 1.5), Error);
        CHECK_THROWS_AS(dini2_integral(s, 0.0), Error);
        CHECK_THROWS_AS(dini2_integral({{0.5, 0.5}}, 1e-4), Error);
        CHECK_THROWS_AS(dini2_integral({{-0.5, 0.5}, {0.5, 0.5}}, 1e-4), Error);
    }
}

TEST_CASE("crosscut sums weight generations dyadically") {
    CrosscutTree tree;
    tree.family = dyadic_family(circle(256), 2, 3);
    tree.cuts = {{{{0, 0}, {1, 0}}, {{0, 0}, {2, 0}}},  // n = 2: lengths 1, 2
                 {{{0, 0}, {0, 0.5}}}};                 // n = 3: length 1/2

    std::vector<double> per_gen;
    double s2 = crosscut_sum(tree, 2.0, &per_gen);
    CHECK(s2 == doctest::Approx(5.25).epsilon(1e-12));
    REQUIRE(per_gen.size() == 2);
    CHECK(per_gen[0] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(per_gen[1] == doctest::Approx(0.25).epsilon(1e-12));

    double s3 = crosscut_sum(tree, 3.0, nullptr);
    CHECK(s3 == doctest::Approx(4.0 * 9.0 + 8.0 * 0.125).epsilon(1e-12));

    CHECK(tree.cut_length(2, 1) == doctest::Approx(2.0).epsilon(1e-12));

    CrosscutTree empty;
    empty.family = tree.family;
    CHECK(crosscut_sum(empty, 2.0, &per_gen) == 0.0);
    CHECK(per_gen.empty());
}

TEST_CASE("homeomorphism verdicts catch flips, crossings, and area loss") {
    PLMap id = identity_pl(0.25);
    HomeoVerdict v = verify_homeomorphism(id, 1e-9);
    CHECK(v.pass);
    CHECK(v.clause.empty());
    CHECK(v.area_mismatch < 1e-12);

    SUBCASE("verdict is stable under refinement") {
        PLMap fine = identity_pl(0.12);
        CHECK(verify_homeomorphism(fine, 1e-9).pass);
    }

    SUBCASE("matching boundary correspondence passes with zero error") {
        PLMap m = id;
        std::vector<Point2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        auto bd = std::make_shared<PolyCurve>(PolyCurve::closed(sq));
        m.boundary_corr = std::make_shared<BoundaryMap>(identity_map(bd));
        HomeoVerdict vb = verify_homeomorphism(m, 1e-6);
        CHECK(vb.pass);
        CHECK(vb.boundary_error < 1e-12);
    }

    SUBCASE("global reflection trips the orientation clause") {
        PLMap r = id;
        for (auto& q : r.images) q.x = -q.x;
        HomeoVerdict vr = verify_homeomorphism(r, 1e-9);
        CHECK_FALSE(vr.pass);
        CHECK(vr.clause == "orientation");
        CHECK(vr.witness.find("triangle") != std::string::npos);
    }

    SUBCASE("drifting off the target curve trips the boundary clause") {
        PLMap m = id;
        for (auto& q : m.images) {
            q.x *= 2;
            q.y *= 2;
        }
        std::vector<Point2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        auto bd = std::make_shared<PolyCurve>(PolyCurve::closed(sq));
        m.boundary_corr = std::make_shared<BoundaryMap>(identity_map(bd));
        HomeoVerdict vb = verify_homeomorphism(m, 0.05);
        CHECK_FALSE(vb.pass);
        CHECK(vb.clause == "boundary");
        CHECK(vb.boundary_error > 0.9);
    }

    SUBCASE("collapsed image triangle is reported with its index") {
        PLMap m = id;
        const auto& tr = m.mesh.tris[0];
        m.images[static_cast<std::size_t>(tr[0])] = m.images[static_cast<std::size_t>(tr[1])];
        HomeoVerdict vc = verify_homeomorphism(m, 1e-9);
        CHECK_FALSE(vc.pass);
        CHECK(vc.clause == "orientation");
    }
}

TEST_CASE("series inequality holds with the frozen constant") {
    std::vector<double> dyadic;
    for (int k = 0; k <= 40; ++k) dyadic.push_back(std::exp2(-k));
    Lemma21Result r = lemma21_check(dyadic, 3.0);
    CHECK(r.input_sum == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(r.output_sum == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(std::abs(r.ratio - 8.0) < 1e-6);
    CHECK_FALSE(r.flagged);

    Lemma21Result z = lemma21_check({0.0, 0.0, 0.0}, 3.0);
    CHECK(z.input_sum == 0.0);
    CHECK(z.output_sum == 0.0);
    CHECK(z.ratio == 0.0);
    CHECK_FALSE(z.flagged);

    double C3 = lemma21_constant(3.0);
    CHECK(C3 == doctest::Approx(134.87478132717902).epsilon(1e-12));

    SUBCASE("two hundred random monotone sequences stay under the constant") {
        std::mt19937 gen(20260814u);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (int trial = 0; trial < 200; ++trial) {
            std::size_t len = 1 + gen() % 60;
            std::vector<double> a(len);
            switch (trial % 4) {
                case 0:
                    for (auto& x : a) x = uni(gen);
                    std::sort(a.rbegin(), a.rend());
                    break;
                case 1: {
                    double rr = 0.3 + 0.69 * uni(gen), v = 1.0;
                    for (auto& x : a) {
                        x = v;
                        v *= rr;
                    }
                    break;
                }
                case 2: {
                    double v = 1.0;
                    for (auto& x : a) {
                        if (uni(gen) < 0.4) v *= 0.5 * uni(gen);
                        x = v;
                    }
                    break;
                }
                default:
                    a.assign(len, 0.0);
                    a[0] = 1.0 + uni(gen);
                    break;
            }
            Lemma21Result t = lemma21_check(a, 3.0);
            CHECK_FALSE(t.flagged);
            if (t.input_sum > 0) CHECK(t.ratio <= C3 * (1.0 + 1e-12));
        }
    }

    SUBCASE("bad sequences and exponents are rejected") {
        CHECK_THROWS_AS(lemma21_check({0.5, 0.7}, 3.0), Error);
        CHECK_THROWS_AS(lemma21_check({-1.0}, 3.0), Error);
        CHECK_THROWS_AS(lemma21_check({1.0, 0.5}, 2.0), Error);
        CHECK_THROWS_AS(lemma21_constant(2.0), Error);
    }
}
