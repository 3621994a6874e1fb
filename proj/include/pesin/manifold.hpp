#pragma once

#include <vector>

#include "pesin/charts.hpp"

namespace pesin {

// A Pesin chart with separate stable/unstable size budgets.
struct DoubleChart {
    PesinChart chart; // chart.eta tracks p_s ^ p_u
    SizeLedger p_s;
    SizeLedger p_u;
    int s_index = 0;

    double min_size() const { return p_s.min_with(p_u).value(); }
    SizeLedger min_ledger() const { return p_s.min_with(p_u); }
};

enum class ManifoldKind { Stable, Unstable };

// Grid-sampled representing function F: [-q,q]^k -> R^{d-k} with multilinear
// interpolation; extrapolation is clamped and flagged.
struct RepresentingFunction {
    ManifoldKind kind = ManifoldKind::Unstable;
    int in_dim = 0;
    int out_dim = 0;
    double radius = 0.0;
    int res = 0;
    std::vector<Vec> values; // res^in_dim nodes, axis 0 fastest

    GridSpec grid() const { return GridSpec{in_dim, res, radius}; }
    std::int64_t node_count() const { return grid().count(); }
    Vec node_coord(std::int64_t flat) const { return grid().node(flat); }

    Vec eval(const Vec& t, bool* clamped = nullptr) const;
    // finite-difference Jacobian of the interpolant at a grid node
    Mat jacobian(std::int64_t flat) const;

    static RepresentingFunction constant(ManifoldKind kind, int in_dim, int out_dim,
                                         double radius, int res, const Vec& value);
};

struct ManifoldParams {
    double sigma = 0.0; // beta/3-norm of dF
    double gamma = 0.0; // |d_0 F|
    double phi = 0.0;   // |F(0)|_inf
    double q = 0.0;
};

struct AdmissibleManifold {
    DoubleChart chart;
    RepresentingFunction repr;
    ManifoldParams params;

    // chart-space coordinates of a graph point: (F(t), t) for u-kind,
    // (t, F(t)) for s-kind
    Vec graph_point(const Vec& t) const;
    TorusPoint embed(const Vec& t) const; // psi_x(graph_point(t))
};

ManifoldParams measure_params(const RepresentingFunction& repr, double beta);

// admissibility of a (u/s, sigma, gamma, phi, q)-manifold in the double
// chart: sigma <= 1/2, gamma <= (1/2)(p^u^p^s)^{beta/3},
// phi <= 1e-3 (p^u^p^s), q = p^{u/s}, sup|F| <= Q_eps, Lip(F) < eps
struct AdmissibilityReport {
    bool ok = false;
    bool sigma_ok = false, gamma_ok = false, phi_ok = false, q_ok = false;
    bool sup_ok = false, lip_ok = false;
    double lip = 0.0;
};
AdmissibilityReport check_admissible(const AdmissibleManifold& m, double beta, double eps);

// Zero-section (or constant-section) admissible manifold in a double chart.
AdmissibleManifold section_manifold(const DoubleChart& chart, ManifoldKind kind, int dim,
                                    int res, const Vec& value, double beta);

// alpha-norm |E|_inf + Hoel_alpha(E) of a matrix field on a grid, plus the
// Neumann bound |(Id+E)^{-1}|_alpha <= 1/(1 - |E|_alpha).
double alpha_norm(const std::vector<Mat>& field, const GridSpec& grid, double alpha);
double neumann_bound(double alpha_norm_value); // throws NotContractive if >= 1

struct IntersectResult {
    Vec w;            // unstable coordinates of the intersection
    Vec v;            // stable coordinates (= F(w))
    TorusPoint point; // psi_x(v, w)
    int iterations = 0;
    double contraction = 0.0; // measured step ratio
    double residual = 0.0;    // final step size
};

// Unique intersection of a u- and an s-admissible manifold in the same
// double chart, by the fixed point of w -> G(F(w)) started at 0.
IntersectResult intersect(const AdmissibleManifold& vu, const AdmissibleManifold& vs,
                          double tol = 1e-12, int max_iters = 200);

struct TransformReport {
    ManifoldParams before;
    ManifoldParams after;
    double sigma_bound = 0.0, gamma_bound = 0.0, phi_bound = 0.0;
    bool sigma_ok = false, gamma_ok = false, phi_ok = false;
    int max_implicit_iters = 0;
};

struct TransformOptions {
    double tol = 1e-12;
    int max_iters = 200;
    double chi = 0.5;
    double eps = 0.1;
    double beta = 1.0;
    bool enforce_recurrences = true; // AdmissibilityLost on violation
};

// Graph transform along the edge v -> w:
//  u-kind: the unique u-manifold inside f[V^u] restricted to radius p^u(w);
//  s-kind: the unique s-manifold inside f^{-1}[V^s] at radius p^s(v); input
//  manifold lives in w, output in v.
AdmissibleManifold graph_transform(const SmoothSystem& sys, const DoubleChart& v,
                                   const DoubleChart& w, const AdmissibleManifold& input,
                                   const TransformOptions& opt, TransformReport* report = nullptr);

double dist_c0(const AdmissibleManifold& a, const AdmissibleManifold& b);
double dist_c1(const AdmissibleManifold& a, const AdmissibleManifold& b);

struct LocalManifoldResult {
    AdmissibleManifold manifold;
    std::vector<double> trace; // sup-distance between consecutive iterates
};

// Iterated graph transform along a window of an eps-chain, starting from a
// seed section in the far chart; returns the manifold at the window center
// and the Cauchy trace.  charts[center + k] holds the chain vertex at k.
LocalManifoldResult local_manifold(const SmoothSystem& sys,
                                   const std::vector<DoubleChart>& charts, int center,
                                   ManifoldKind kind, int iters, const TransformOptions& opt,
                                   const Vec* seed_value = nullptr);

struct WindowCheckResult {
    bool ok = true;
    int fail_index = 0;
    double worst_ratio = 0.0; // max |psi^{-1}(f^k p)|_inf / (10 Q_k)
};

// Verifies f^k(sampled manifold points) stay in psi_{x_k}[R_{10 Q_eps}(0)]
// over the window (forward for s-kind, backward for u-kind).
WindowCheckResult stays_in_windows_check(const SmoothSystem& sys,
                                         const AdmissibleManifold& m,
                                         const std::vector<DoubleChart>& charts, int center);

} // namespace pesin
