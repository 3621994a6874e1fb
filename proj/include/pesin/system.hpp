#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "pesin/torus.hpp"

namespace pesin {

// A C^{1+beta} diffeomorphism of the d-torus with exact differentials.
// Maps are supplied as closures; no sampled data.
struct SmoothSystem {
    int dim = 0;
    std::function<TorusPoint(const TorusPoint&)> map;
    std::function<TorusPoint(const TorusPoint&)> inverse_map;
    // differential(x)        = d_x f
    // inverse_differential(x) = d_x (f^{-1})
    std::function<Mat(const TorusPoint&)> differential;
    std::function<Mat(const TorusPoint&)> inverse_differential;
    double beta = 1.0; // Hoelder exponent of df
    double m_f = 1.0;  // >= sup max{|df|, |df^{-1}|} over sampled points
    std::string name;

    TorusPoint iterate(const TorusPoint& x, std::int64_t n) const;
};

// Built-in test systems:
//   cat2      : x -> Ax mod 1, A = [[2,1],[1,1]]
//   plastic3  : x -> Bx mod 1, B = companion matrix of t^3 - t - 1
//   pcat2(d)  : x -> Ax + d*sin(2*pi*x1)*e1 mod 1
SmoothSystem make_cat2();
SmoothSystem make_plastic3();
SmoothSystem make_pcat2(double delta);

// Dispatch by name; "pcat2" takes delta as parameter (0 <= delta <= 0.05).
SmoothSystem make_builtin(const std::string& name, double delta = 0.0);

// Stored orbit segment pts[center + k] = f^k(x), k in [-n_back, n_fwd].
// Walking differentials along stored points keeps backward/forward passes
// consistent; recomputing f^{-1} iterates from scratch diverges from the
// forward orbit at the rate of the unstable expansion.
struct OrbitSegment {
    std::vector<TorusPoint> pts;
    int center = 0;

    const TorusPoint& at(int k) const { return pts.at(static_cast<size_t>(center + k)); }
    int min_index() const { return -center; }
    int max_index() const { return static_cast<int>(pts.size()) - 1 - center; }
};

OrbitSegment make_orbit(const SmoothSystem& sys, const TorusPoint& x, int n_back, int n_fwd);

struct CocycleResult {
    Mat matrix;
    bool rescaling_flag = false; // any intermediate entry above 1e300
};

// Ordered product of differentials along the orbit segment; n < 0 uses
// inverse differentials, n = 0 gives the identity.
CocycleResult cocycle(const SmoothSystem& sys, const TorusPoint& x, std::int64_t n,
                      std::int64_t max_abs_n = 512);

// Same product evaluated on a stored orbit: d_{f^base(x)} f^n with every
// factor taken at a stored point (negative n inverts the stored forward
// differentials instead of retracing the inverse map).
Mat cocycle_on_orbit(const SmoothSystem& sys, const OrbitSegment& orbit, int base, int n);

} // namespace pesin
