#include <doctest.h>

#include <cmath>
#include <random>

#include "pesin/coding.hpp"
#include "pesin/errors.hpp"
#include "oracle_support.hpp"

using namespace pesin;

namespace {

TorusPoint pt2(double a, double b) {
    Vec v(2);
    v << a, b;
    return TorusPoint(v);
}

struct ChainSetup {
    SmoothSystem sys;
    Alphabet alphabet;
    Chain chain;
};

ChainSetup build_setup(const char* name, double delta, const TorusPoint& x, int half,
                       double chi, std::uint64_t seed = 0) {
    ChainSetup s{make_builtin(name, delta), Alphabet{}, Chain{}};
    AlphabetOptions aopt;
    aopt.seed = seed;
    s.alphabet = Alphabet{};
    s.alphabet.eps = 0.1;
    s.alphabet.beta = 1.0;
    s.alphabet.scale = ChartScale::practical_default();
    s.alphabet.opt = aopt;
    ChainOptions copt;
    s.chain = orbit_to_chain(s.sys, s.alphabet, x, half, half, chi, copt);
    return s;
}

} // namespace

TEST_CASE("constant chain at the cat2 fixed point codes the fixed point") {
    ChainSetup s = build_setup("cat2", 0.0, pt2(0, 0), 14, 0.5);
    CodingOptions opt;
    opt.chi = 0.5;
    CodedPoint cp = code_point(s.sys, s.chain, opt);
    CHECK(torus_distance(cp.point, pt2(0, 0)) < 1e-12);
    CHECK(cp.residual < 1e-12);
    CHECK(equivariance_defect(s.sys, s.chain, opt) < 1e-12);
}

TEST_CASE("3-periodic cat2 chain codes a period-3 point") {
    TorusPoint p = pt2(0.5, 0.25);
    ChainSetup s = build_setup("cat2", 0.0, p, 14, 0.5);
    CodingOptions opt;
    opt.chi = 0.5;
    CodedPoint cp = code_point(s.sys, s.chain, opt);
    // A^3 pi = pi mod 1, i.e. pi is a period-3 point
    CHECK(torus_distance(s.sys.iterate(cp.point, 3), cp.point) < 1e-10);
    // and it is the exact dyadic point the chain was built from
    CHECK(torus_distance(cp.point, p) < 1e-10);
}

TEST_CASE("pcat2 chain codes a point near the orbit and equivariantly") {
    TorusPoint x0 = pt2(0.31, 0.64);
    ChainSetup s = build_setup("pcat2", 0.01, x0, 16, 0.9);
    CodingOptions opt;
    opt.chi = 0.9;
    CodedPoint cp = code_point(s.sys, s.chain, opt);
    // shadowing: the coded point lies within the practical chart radius
    CHECK(torus_distance(cp.point, x0) <= s.chain.at(0).chart.q_eps.value());
    // equivariance along several shifts
    for (int k = -3; k <= 2; ++k)
        CHECK(equivariance_defect(s.sys, shift_chain(s.chain, k), opt) < 1e-6);
    // characterization: f^k(pi) stays in the Q_eps boxes over the window
    TorusPoint p = cp.point;
    for (int k = 0; k <= s.chain.max_index(); ++k) {
        const DoubleChart& c = s.chain.at(k);
        CHECK(c.chart.frame.chart_inverse(p).lpNorm<Eigen::Infinity>() <=
              c.chart.q_eps.value());
        p = s.sys.map(p);
    }
    p = cp.point;
    for (int k = 0; k >= s.chain.min_index(); --k) {
        const DoubleChart& c = s.chain.at(k);
        CHECK(c.chart.frame.chart_inverse(p).lpNorm<Eigen::Infinity>() <=
              c.chart.q_eps.value());
        p = s.sys.inverse_map(p);
    }
}

TEST_CASE("coded point agrees with the confinement oracle") {
    TorusPoint x0 = pt2(0.47, 0.13);
    ChainSetup s = build_setup("pcat2", 0.01, x0, 16, 0.9);
    CodingOptions opt;
    opt.chi = 0.9;
    CodedPoint cp = code_point(s.sys, s.chain, opt);
    // oracle: bisection over the unstable coordinate on the stable side,
    // then over the stable coordinate of the resulting u-line, or directly:
    // the intersection of the two oracle leaves through the coded point's
    // base coordinates
    Vec base_s(1), base_u(1);
    base_s << cp.chart_coords[0];
    base_u << cp.chart_coords[1];
    const double hu = pesin::testing::leaf_height(s.sys, s.chain.vertices, s.chain.center,
                                                  ManifoldKind::Stable, base_s, 12);
    CHECK(std::abs(hu - cp.chart_coords[1]) < 1e-6);
    const double hs = pesin::testing::leaf_height(s.sys, s.chain.vertices, s.chain.center,
                                                  ManifoldKind::Unstable, base_u, 12);
    CHECK(std::abs(hs - cp.chart_coords[0]) < 1e-6);
}

TEST_CASE("hoelder modulus decay table") {
    // base: constant chain at the fixed point; tail: chain of an orbit that
    // converges to the fixed point (same vertex at index 0)
    SmoothSystem sys = make_pcat2(0.01);
    Alphabet alphabet;
    alphabet.eps = 0.1;
    alphabet.beta = 1.0;
    alphabet.scale = ChartScale::practical_default();
    alphabet.opt = AlphabetOptions{};
    ChainOptions copt;
    const double chi = 0.9;
    const int agree = 10, depth = 10;
    Chain base = orbit_to_chain(sys, alphabet, pt2(0, 0), agree + depth + 2, 2, chi, copt);
    // a tail chain through the fixed-point vertex with a different past:
    // start on the unstable eigenline slightly off the fixed point, iterate
    // backward so the orbit approaches the fixed point, code that orbit
    SplittingData split = oseledets(sys, pt2(0, 0), 64);
    Vec off = split.unstable_basis.col(0) * 1e-7;
    TorusPoint near = pt2(0, 0).shifted(off);
    Chain tail = orbit_to_chain(sys, alphabet, near, depth + 2, 2, chi, copt);
    // vertices at index 0 must coincide (the near-point quantizes to the
    // fixed-point cell)
    REQUIRE(tail.cell_ids[static_cast<size_t>(tail.center)] ==
            base.cell_ids[static_cast<size_t>(base.center)]);
    CodingOptions opt;
    opt.chi = chi;
    opt.iters = depth;
    std::vector<HoelderRow> rows = hoelder_modulus(sys, base, tail, agree, opt);
    REQUIRE(rows.size() == static_cast<size_t>(agree + 1));
    CHECK(rows[0].dist_c0 > 0);
    for (size_t n = 2; n < rows.size(); ++n) {
        if (rows[n - 1].dist_c0 < 1e-14) continue;
        CHECK(rows[n].dist_c0 <= std::exp(-chi / 2) * rows[n - 1].dist_c0 * 1.02);
    }
    const double theta = fitted_decay(rows);
    CHECK(theta <= std::exp(-1.0 * chi / 6.0) + 0.05);
    SUBCASE("identical chains give zero distances") {
        std::vector<HoelderRow> zero = hoelder_modulus(sys, base, base, 3, opt);
        for (const auto& r : zero) {
            CHECK(r.dist_c0 < 1e-14);
            CHECK(r.dist_c1 < 1e-12);
        }
    }
}

TEST_CASE("orthogonal net covers O(d)") {
    const double eps = 0.1;
    for (int dim : {2, 3}) {
        OrthogonalNet net = build_orthogonal_net(dim, eps, 777);
        CHECK(net.elements.size() >= 8);
        std::mt19937_64 rng(999);
        std::normal_distribution<double> g(0, 1);
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            Mat z(dim, dim);
            for (int r = 0; r < dim; ++r)
                for (int c = 0; c < dim; ++c) z(r, c) = g(rng);
            Eigen::HouseholderQR<Mat> qr(z);
            Mat q = qr.householderQ() * Mat::Identity(dim, dim);
            Mat rr = q.transpose() * z;
            for (int c = 0; c < dim; ++c)
                if (rr(c, c) < 0) q.col(c) *= -1.0;
            worst = std::max(worst, net.snap(q).first);
        }
        CHECK(worst <= net.radius + 1e-12);
    }
}

TEST_CASE("inverse diagnostics") {
    SmoothSystem sys = make_pcat2(0.01);
    CodingOptions opt;
    opt.chi = 0.9;
    OrthogonalNet net = build_orthogonal_net(2, 0.1, 123);
    SUBCASE("identical chains: O = Id, a = 0, all ratios 1") {
        ChainSetup s = build_setup("pcat2", 0.01, pt2(0.52, 0.81), 14, 0.9);
        CodedPoint cp = code_point(s.sys, s.chain, opt);
        InverseDiagnostics d =
            inverse_diagnostics(s.sys, s.chain, s.chain, cp, cp, net, opt);
        CHECK(d.all_ok);
        for (const auto& r : d.records) {
            CHECK(r.distance == 0.0);
            CHECK(r.dl_s == 0);
            CHECK(r.dl_u == 0);
            CHECK(std::abs(r.frame_ratio - 1.0) < 1e-12);
            CHECK(r.r_defect < 1e-10);
            CHECK(r.d_delta < 1e-10);
        }
    }
    SUBCASE("two quantization seeds coding the same orbit") {
        TorusPoint x0 = pt2(0.29, 0.57);
        ChainSetup s1 = build_setup("pcat2", 0.01, x0, 14, 0.9, 1);
        ChainSetup s2 = build_setup("pcat2", 0.01, x0, 14, 0.9, 2);
        CodedPoint c1 = code_point(s1.sys, s1.chain, opt);
        CodedPoint c2 = code_point(s2.sys, s2.chain, opt);
        InverseDiagnostics d =
            inverse_diagnostics(s1.sys, s1.chain, s2.chain, c1, c2, net, opt, 1e-4);
        CHECK(d.all_ok);
        for (const auto& r : d.records) CHECK(r.snap_distance <= net.radius + 1e-12);
    }
    SUBCASE("NotSameOrbit when the coded points differ") {
        ChainSetup s1 = build_setup("pcat2", 0.01, pt2(0.11, 0.92), 14, 0.9);
        ChainSetup s2 = build_setup("pcat2", 0.01, pt2(0.73, 0.35), 14, 0.9);
        CodedPoint c1 = code_point(s1.sys, s1.chain, opt);
        CodedPoint c2 = code_point(s2.sys, s2.chain, opt);
        CHECK_THROWS_AS(
            inverse_diagnostics(s1.sys, s1.chain, s2.chain, c1, c2, net, opt, 1e-8),
            NotSameOrbit);
    }
}
