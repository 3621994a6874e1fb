#include <doctest.h>

#include <cmath>
#include <random>

#include "pesin/errors.hpp"
#include "pesin/oseledets.hpp"
#include "pesin/system.hpp"

using namespace pesin;

namespace {

TorusPoint pt2(double a, double b) {
    Vec v(2);
    v << a, b;
    return TorusPoint(v);
}

TorusPoint pt3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return TorusPoint(v);
}

// closed-form exponents
const double kCatExp = std::log((3.0 + std::sqrt(5.0)) / 2.0);

double plastic_root() {
    // real root of t^3 - t - 1 by Newton
    double t = 1.3;
    for (int i = 0; i < 60; ++i) t -= (t * t * t - t - 1.0) / (3.0 * t * t - 1.0);
    return t;
}

// cofactor-expansion determinant; Eigen's LU determinant loses ~cond*eps,
// far too much for ill-conditioned cocycle products with integer entries
double det_small(const Mat& m) {
    const int n = static_cast<int>(m.rows());
    if (n == 1) return m(0, 0);
    if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    double det = 0.0;
    for (int j = 0; j < n; ++j) {
        Mat minor(n - 1, n - 1);
        for (int r = 1; r < n; ++r) {
            int cc = 0;
            for (int c = 0; c < n; ++c)
                if (c != j) minor(r - 1, cc++) = m(r, c);
        }
        det += ((j % 2 == 0) ? 1.0 : -1.0) * m(0, j) * det_small(minor);
    }
    return det;
}

} // namespace

TEST_CASE("torus wrap and distance") {
    Vec v(2);
    v << 1.25, -0.25;
    TorusPoint p(v);
    CHECK(p[0] == doctest::Approx(0.25));
    CHECK(p[1] == doctest::Approx(0.75));
    // wrap-around metric
    CHECK(torus_distance(pt2(0.05, 0.0), pt2(0.95, 0.0)) == doctest::Approx(0.1));
    // upper bound sqrt(d)/2
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 200; ++i) {
        double d = torus_distance(pt2(u(rng), u(rng)), pt2(u(rng), u(rng)));
        CHECK(d <= std::sqrt(2.0) / 2 + 1e-15);
    }
}

TEST_CASE("builtin round trips and chain rule") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0, 1);
    for (auto* name : {"cat2", "plastic3", "pcat2"}) {
        SmoothSystem sys = make_builtin(name, 0.01);
        for (int i = 0; i < 50; ++i) {
            Vec v(sys.dim);
            for (int j = 0; j < sys.dim; ++j) v[j] = u(rng);
            TorusPoint x(v);
            TorusPoint y = sys.map(x);
            CHECK(torus_distance(sys.inverse_map(y), x) < 1e-12);
            Mat chain = sys.inverse_differential(y) * sys.differential(x);
            CHECK((chain - Mat::Identity(sys.dim, sys.dim)).norm() < 1e-10);
            CHECK(sys.differential(x).operatorNorm() <= sys.m_f);
            CHECK(sys.inverse_differential(x).operatorNorm() <= sys.m_f);
        }
    }
}

TEST_CASE("cat2 is a fixed point at 0 with constant differential") {
    SmoothSystem sys = make_cat2();
    TorusPoint z = pt2(0, 0);
    CHECK(torus_distance(sys.map(z), z) == 0.0);
    Mat a(2, 2);
    a << 2, 1, 1, 1;
    CHECK(sys.differential(pt2(0.3, 0.9)) == a);
}

TEST_CASE("pcat2(0) degenerates to cat2") {
    SmoothSystem cat = make_cat2();
    SmoothSystem p0 = make_pcat2(0.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 50; ++i) {
        TorusPoint x = pt2(u(rng), u(rng));
        TorusPoint a = x, b = x;
        for (int k = 0; k < 12; ++k) {
            a = cat.map(a);
            b = p0.map(b);
        }
        CHECK(torus_distance(a, b) < 1e-12);
    }
    CHECK_THROWS_AS(make_pcat2(0.2), ConfigError);
    CHECK_THROWS_AS(make_builtin("nosuch"), ConfigError);
}

TEST_CASE("plastic3 is volume preserving") {
    SmoothSystem sys = make_plastic3();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 50; ++i) {
        TorusPoint x = pt3(u(rng), u(rng), u(rng));
        CHECK(std::abs(std::abs(sys.differential(x).determinant()) - 1.0) < 1e-12);
    }
}

TEST_CASE("cocycle oracle values") {
    SmoothSystem sys = make_cat2();
    TorusPoint x = pt2(0.1, 0.2);
    Mat a3(2, 2);
    a3 << 13, 8, 8, 5;
    CHECK((cocycle(sys, x, 3).matrix - a3).norm() == doctest::Approx(0.0));
    CHECK((cocycle(sys, x, 0).matrix - Mat::Identity(2, 2)).norm() == 0.0);
    Mat ainv(2, 2);
    ainv << 1, -1, -1, 2;
    CHECK((cocycle(sys, x, -1).matrix - ainv).norm() == doctest::Approx(0.0));
}

TEST_CASE("cocycle property and determinant consistency") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 1);
    for (auto* name : {"cat2", "plastic3", "pcat2"}) {
        SmoothSystem sys = make_builtin(name, 0.01);
        Vec v(sys.dim);
        for (int j = 0; j < sys.dim; ++j) v[j] = u(rng);
        TorusPoint x(v);
        OrbitSegment orbit = make_orbit(sys, x, 32, 32);
        for (int m : {-16, -5, 3, 16}) {
            for (int n : {-16, -7, 2, 16}) {
                Mat a = cocycle_on_orbit(sys, orbit, n, m);
                Mat b = cocycle_on_orbit(sys, orbit, 0, n);
                Mat lhs = cocycle_on_orbit(sys, orbit, 0, m + n);
                Mat rhs = a * b;
                // backward-error scale of the product: opposite-sign factors
                // cancel through a conditioning of |a||b|, same-sign ones do not
                const double scale =
                    (m >= 0) == (n >= 0) ? std::max(1.0, rhs.norm()) : std::max(1.0, a.norm() * b.norm());
                CHECK((lhs - rhs).norm() <= 1e-10 * scale);
            }
        }
        if (sys.name != "pcat2") {
            CHECK(std::abs(std::abs(det_small(cocycle(sys, x, 12).matrix)) - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("oseledets exponents match closed forms") {
    SUBCASE("cat2") {
        SmoothSystem sys = make_cat2();
        SplittingData s = oseledets(sys, pt2(0.15, 0.67), 64);
        REQUIRE(s.exponents.size() == 2);
        CHECK(std::abs(s.exponents[0] + kCatExp) < 1e-9);
        CHECK(std::abs(s.exponents[1] - kCatExp) < 1e-9);
        CHECK(s.s_index == 1);
    }
    SUBCASE("plastic3") {
        SmoothSystem sys = make_plastic3();
        SplittingData s = oseledets(sys, pt3(0.3, 0.5, 0.8), 128);
        REQUIRE(s.exponents.size() == 3);
        const double lr = std::log(plastic_root());
        CHECK(std::abs(s.exponents[0] + lr / 2) < 1e-6);
        CHECK(std::abs(s.exponents[1] + lr / 2) < 1e-6);
        CHECK(std::abs(s.exponents[2] - lr) < 1e-6);
        CHECK(s.s_index == 2);
    }
    SUBCASE("pcat2(0) equals cat2") {
        SmoothSystem sys = make_pcat2(0.0);
        SplittingData s = oseledets(sys, pt2(0.15, 0.67), 64);
        CHECK(std::abs(s.exponents[1] - kCatExp) < 1e-9);
    }
}

TEST_CASE("oseledets subspaces: invariance and x-independence") {
    SmoothSystem sys = make_cat2();
    SplittingData s1 = oseledets(sys, pt2(0.15, 0.67), 64);
    SplittingData s2 = oseledets(sys, pt2(0.81, 0.05), 64);
    CHECK(principal_angle(s1.stable_basis, s2.stable_basis) < 1e-9);
    CHECK(principal_angle(s1.unstable_basis, s2.unstable_basis) < 1e-9);
    CHECK(s1.frame_condition < 1e3);
    CHECK(s1.subspace_residual < 1e-9);

    // df(x) . E^s(x) spans E^s(f(x)) (tested on the perturbed system too)
    SmoothSystem psys = make_pcat2(0.01);
    TorusPoint x = pt2(0.23, 0.71);
    SplittingData sx = oseledets(psys, x, 64);
    SplittingData sfx = oseledets(psys, psys.map(x), 64);
    Mat pushed_s = psys.differential(x) * sx.stable_basis;
    Mat pushed_u = psys.differential(x) * sx.unstable_basis;
    Eigen::HouseholderQR<Mat> qs(pushed_s), qu(pushed_u);
    Mat qs_o = qs.householderQ() * Mat::Identity(2, 1);
    Mat qu_o = qu.householderQ() * Mat::Identity(2, 1);
    CHECK(principal_angle(qs_o, sfx.stable_basis) < 1e-6);
    CHECK(principal_angle(qu_o, sfx.unstable_basis) < 1e-6);
}

TEST_CASE("nuh_test thresholds") {
    SmoothSystem sys = make_cat2();
    SplittingData s = oseledets(sys, pt2(0.15, 0.67), 64);
    CHECK(nuh_test(s, 0.9));
    CHECK(!nuh_test(s, 1.0));
    SmoothSystem psys = make_plastic3();
    SplittingData sp = oseledets(psys, pt3(0.3, 0.5, 0.8), 128);
    CHECK(nuh_test(sp, 0.1));
    CHECK(!nuh_test(sp, 0.15));
}
