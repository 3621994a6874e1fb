#pragma once

#include <cstdint>
#include <vector>

#include "pesin/chains.hpp"
#include "pesin/manifold.hpp"

namespace pesin {

struct CodedPoint {
    TorusPoint point;
    AdmissibleManifold vs; // limit s-manifold of the future half-window
    AdmissibleManifold vu; // limit u-manifold of the past half-window
    Vec chart_coords;      // coordinates of the point in the center chart
    double residual = 0.0; // fixed-point residual of the intersection
    int center_cell = -1;  // alphabet cell of the chain vertex at index 0
    std::int64_t ps_ell = 0, pu_ell = 0;
};

struct CodingOptions {
    int iters = 10;
    double tol = 1e-12;
    double chi = 0.9;
    double eps = 0.1;
    double beta = 1.0;
    int grid_res = 33;
};

// shifted view of a chain window (sigma^k), valid while the window covers
// the requested depths
Chain shift_chain(const Chain& c, int k);

// pi(chain): the unique intersection of V^u((v_i)_{i<=0}) with
// V^s((v_i)_{i>=0}), both window-limited by opt.iters.
CodedPoint code_point(const SmoothSystem& sys, const Chain& chain, const CodingOptions& opt);

// d(pi(sigma^k chain), f^k(pi(chain))) for k = 1: the equivariance defect
double equivariance_defect(const SmoothSystem& sys, const Chain& chain,
                           const CodingOptions& opt);

struct HoelderRow {
    int n = 0;
    double dist_c0 = 0.0;
    double dist_c1 = 0.0;
};

// Splice-constructed decay table: for each n, the chain that equals `base`
// on i > -n and continues with `tail` for i <= -n (tail_0 must equal
// base_{-n} as a graph vertex); rows compare V^u of base against V^u of the
// splice.  Throws SplicingImpossible when the splice vertex mismatches.
std::vector<HoelderRow> hoelder_modulus(const SmoothSystem& sys, const Chain& base,
                                        const Chain& tail, int max_agreement,
                                        const CodingOptions& opt);

// least-squares decay exponent of a log-distance table
double fitted_decay(const std::vector<HoelderRow>& rows);

struct OrthogonalNet {
    std::vector<Mat> elements;
    double radius = 0.0; // target covering radius

    // operator-norm distance to the nearest element and its index
    std::pair<double, int> snap(const Mat& o) const;
};

// random-rotation net with greedy thinning to covering radius
// (1/2) eps^{1/3}; deterministic for a fixed seed
OrthogonalNet build_orthogonal_net(int dim, double eps, std::uint64_t seed, int samples = 4096);

struct InverseRecord {
    int index = 0;
    double distance = 0.0;       // d(x_i, y_i)
    double distance_bound = 0.0; // 25^{-1} max{p^s^p^u, q^s^q^u}
    bool distance_ok = false;
    std::int64_t dl_s = 0, dl_u = 0; // ledger differences
    std::int64_t dl_bound = 0;       // ceil(3 eps^{-2/3})
    bool ledger_ok = false;
    double r_defect = 0.0; // |R - Id|
    bool r_ok = false;     // <= 8 sqrt(eps)
    double a_norm = 0.0;   // |a|_inf
    bool a_ok = false;     // <= 10^{-1} (q^u^q^s)
    double d_delta = 0.0;  // sup |d Delta| over the sampling grid
    bool delta_ok = false; // < (1/2) eps^{1/3}
    double frame_ratio = 0.0;
    bool frame_ok = false; // within e^{+-5 sqrt(eps)}
    double snap_distance = 0.0;
    int snap_index = -1;
};

struct InverseDiagnostics {
    std::vector<InverseRecord> records;
    bool all_ok = false;
};

// Per-index comparison of two chains that code the same point (throws
// NotSameOrbit if the coded points disagree beyond tol).
InverseDiagnostics inverse_diagnostics(const SmoothSystem& sys, const Chain& a, const Chain& b,
                                       const CodedPoint& coded_a, const CodedPoint& coded_b,
                                       const OrthogonalNet& net, const CodingOptions& opt,
                                       double same_tol = 1e-6);

} // namespace pesin
