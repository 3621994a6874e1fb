#include "pesin/system.hpp"

#include <cmath>
#include <numbers>

#include "pesin/errors.hpp"

namespace pesin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Mat cat_matrix() {
    Mat a(2, 2);
    a << 2, 1, 1, 1;
    return a;
}

Mat cat_inverse() {
    Mat a(2, 2);
    a << 1, -1, -1, 2;
    return a;
}

Mat plastic_matrix() {
    Mat b(3, 3);
    b << 0, 1, 0,
         0, 0, 1,
         1, 1, 0;
    return b;
}

SmoothSystem make_linear(Mat m, const std::string& name) {
    SmoothSystem sys;
    const int d = static_cast<int>(m.rows());
    Mat minv = m.inverse();
    // entries of m are small integers with |det| = 1, so round the inverse
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) minv(i, j) = std::round(minv(i, j));
    sys.dim = d;
    sys.name = name;
    sys.beta = 1.0;
    sys.map = [m](const TorusPoint& x) { return TorusPoint(m * x.coords()); };
    sys.inverse_map = [minv](const TorusPoint& x) { return TorusPoint(minv * x.coords()); };
    sys.differential = [m](const TorusPoint&) { return m; };
    sys.inverse_differential = [minv](const TorusPoint&) { return minv; };
    sys.m_f = std::max(m.operatorNorm(), minv.operatorNorm()) * (1.0 + 1e-12);
    return sys;
}

} // namespace

TorusPoint SmoothSystem::iterate(const TorusPoint& x, std::int64_t n) const {
    TorusPoint p = x;
    if (n >= 0) {
        for (std::int64_t k = 0; k < n; ++k) p = map(p);
    } else {
        for (std::int64_t k = 0; k < -n; ++k) p = inverse_map(p);
    }
    return p;
}

SmoothSystem make_cat2() { return make_linear(cat_matrix(), "cat2"); }

SmoothSystem make_plastic3() { return make_linear(plastic_matrix(), "plastic3"); }

SmoothSystem make_pcat2(double delta) {
    if (delta < 0.0 || delta > 0.05)
        throw ConfigError("pcat2 delta out of admitted range [0, 0.05]");
    SmoothSystem sys;
    sys.dim = 2;
    sys.name = "pcat2";
    sys.beta = 1.0;
    const Mat a = cat_matrix();
    const Mat ainv = cat_inverse();

    sys.map = [a, delta](const TorusPoint& x) {
        Vec y = a * x.coords();
        y[0] += delta * std::sin(kTwoPi * x[0]);
        return TorusPoint(y);
    };
    // Solve A x + delta*sin(2*pi*x1)*e1 = y (mod 1).  Component 1 decouples:
    //   x1 + delta*sin(2*pi*x1)*(A^{-1}e1)_1 = (A^{-1}y)_1, monotone for
    //   2*pi*delta < 1, solved by Newton on the lift.
    sys.inverse_map = [ainv, delta](const TorusPoint& y) {
        const Vec z = ainv * y.coords();
        const Vec c = ainv.col(0); // A^{-1} e1 = (1,-1)
        double x1 = z[0];
        for (int it = 0; it < 64; ++it) {
            const double g = x1 + delta * std::sin(kTwoPi * x1) * c[0] - z[0];
            const double dg = 1.0 + delta * kTwoPi * std::cos(kTwoPi * x1) * c[0];
            const double step = g / dg;
            x1 -= step;
            if (std::abs(step) < 1e-16) break;
        }
        Vec x(2);
        x[0] = x1;
        x[1] = z[1] - delta * std::sin(kTwoPi * x1) * c[1];
        return TorusPoint(x);
    };
    sys.differential = [a, delta](const TorusPoint& x) {
        Mat d = a;
        d(0, 0) += delta * kTwoPi * std::cos(kTwoPi * x[0]);
        return d;
    };
    auto inv_map = sys.inverse_map;
    auto diff = sys.differential;
    sys.inverse_differential = [inv_map, diff](const TorusPoint& y) {
        return Mat(diff(inv_map(y)).inverse());
    };

    // m_f from a sampled sup with a small safety factor (it is data, not proof)
    double sup = 0.0;
    const int n = 512;
    for (int i = 0; i < n; ++i) {
        Vec p(2);
        p << static_cast<double>(i) / n, 0.37;
        TorusPoint x(p);
        sup = std::max(sup, sys.differential(x).operatorNorm());
        sup = std::max(sup, sys.inverse_differential(x).operatorNorm());
    }
    sys.m_f = sup * 1.01;
    return sys;
}

SmoothSystem make_builtin(const std::string& name, double delta) {
    if (name == "cat2") return make_cat2();
    if (name == "plastic3") return make_plastic3();
    if (name == "pcat2") return make_pcat2(delta);
    throw ConfigError("unknown builtin system '" + name + "'");
}

OrbitSegment make_orbit(const SmoothSystem& sys, const TorusPoint& x, int n_back, int n_fwd) {
    OrbitSegment seg;
    seg.center = n_back;
    seg.pts.resize(static_cast<size_t>(n_back + n_fwd + 1));
    seg.pts[static_cast<size_t>(n_back)] = x;
    TorusPoint p = x;
    for (int k = 1; k <= n_fwd; ++k) {
        p = sys.map(p);
        seg.pts[static_cast<size_t>(n_back + k)] = p;
    }
    p = x;
    for (int k = 1; k <= n_back; ++k) {
        p = sys.inverse_map(p);
        seg.pts[static_cast<size_t>(n_back - k)] = p;
    }
    return seg;
}

Mat cocycle_on_orbit(const SmoothSystem& sys, const OrbitSegment& orbit, int base, int n) {
    Mat m = Mat::Identity(sys.dim, sys.dim);
    if (n >= 0) {
        for (int k = 0; k < n; ++k) m = sys.differential(orbit.at(base + k)) * m;
    } else {
        for (int k = 0; k < -n; ++k)
            m = sys.differential(orbit.at(base - k - 1)).inverse() * m;
    }
    return m;
}

CocycleResult cocycle(const SmoothSystem& sys, const TorusPoint& x, std::int64_t n,
                      std::int64_t max_abs_n) {
    if (std::llabs(n) > max_abs_n)
        throw ConfigError("cocycle length exceeds configured maximum");
    CocycleResult r;
    r.matrix = Mat::Identity(sys.dim, sys.dim);
    TorusPoint p = x;
    for (std::int64_t k = 0; k < std::llabs(n); ++k) {
        if (n > 0) {
            r.matrix = sys.differential(p) * r.matrix;
            p = sys.map(p);
        } else {
            r.matrix = sys.inverse_differential(p) * r.matrix;
            p = sys.inverse_map(p);
        }
        if (r.matrix.cwiseAbs().maxCoeff() > 1e300) r.rescaling_flag = true;
    }
    return r;
}

} // namespace pesin
