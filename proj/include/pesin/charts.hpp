#pragma once

#include <optional>
#include <vector>

#include "pesin/ledger.hpp"
#include "pesin/lyapunov.hpp"

namespace pesin {

// operator norm w.r.t. the sup norm on both sides (max absolute row sum)
double inf_op_norm(const Mat& a);

// Pesin chart psi_x restricted to the sup-norm box R_eta(0).
struct PesinChart {
    ChartFrame frame;
    SizeLedger q_eps; // Q_eps(x)
    SizeLedger eta;   // chart radius, eta <= Q_eps

    const TorusPoint& point() const { return frame.point; }
};

// Q_eps(x) as a ledger index: l = ceil(-3 log(Q~)/eps) with
// log Q~ = -(6/b)ln3 + (90/b)ln eps - (48/b)ln|C^{-1}|  (or the practical
// substitutes); all arithmetic in log space.
SizeLedger q_size(const ChartFrame& frame, double eps, double beta,
                  const ChartScale& scale = ChartScale::literal());

struct TemperedSizes {
    std::vector<SizeLedger> ledger; // one per interior index
    std::vector<double> log_raw;    // exact log q_eps before grid rounding
    int first_index = 0;            // orbit index of ledger[0]
};

// Tempering kernel over a symmetric window W:
//   1/q_eps(x) = (1/eps) sum_{|k|<=W} e^{-|k| eps} / Q_eps(f^k x)
// computed by log-sum-exp on the ledger logs; defined for indices with the
// full window inside the segment.
TemperedSizes tempered_size(const std::vector<SizeLedger>& q_eps_along_orbit, double eps,
                            int window = 32);

struct OverlapReport {
    bool overlaps = false;
    bool ratio_ok = false;    // e^{-eps} < eta1/eta2 < e^{eps}, strict
    bool distance_ok = false; // d(x1,x2) + |C1 - C2| below the threshold
    double measured_log_lhs = 0.0;  // log of the measured left side (-inf if 0)
    double threshold_log = 0.0;     // log eta1^4 eta2^4 (or practical power)
    double margin_log = 0.0;        // threshold_log - measured_log_lhs
};

// eps-overlap of two Pesin charts.  The size-ratio clause is the exact
// integer comparison |l1 - l2| < 3 (ratio e^{eps} itself fails the strict
// inequality); the closeness clause is evaluated in log space.
OverlapReport overlap_test(const PesinChart& a, const PesinChart& b,
                           const ChartScale& scale = ChartScale::literal());

struct GridSpec {
    int dim = 0;
    int res = 0;       // nodes per axis, odd so 0 is a node
    double radius = 0; // box half-width

    std::int64_t count() const;
    Vec node(std::int64_t flat) const;
};

// Exact chart-to-chart map g = psi_b^{-1} o phi o psi_a with phi = f or
// f^{-1}, split into its diagonal block-linear part and the remainder h.
// Evaluations and differentials are exact (closures, not interpolation).
struct ChartTransition {
    const SmoothSystem* sys = nullptr;
    ChartFrame from;
    ChartFrame to;
    bool forward = true;
    Mat lin;   // C_to^{-1} dphi(from.point) C_from
    Mat block; // diagonal blocks of lin

    Vec eval(const Vec& v) const;   // g(v)
    Vec h(const Vec& v) const;      // g(v) - block v
    Mat dh(const Vec& v) const;     // d_v g - block
    Mat ds() const;                 // stable block of lin
    Mat du() const;                 // unstable block

    static ChartTransition make(const SmoothSystem& sys, const ChartFrame& from,
                                const ChartFrame& to, bool forward);
};

struct TransitionDecomposition {
    Mat d_s;
    Mat d_u;
    Vec h_origin;
    double dh_origin_norm = 0.0;   // inf-op norm of dh(0)
    double hoelder_estimate = 0.0; // Hoel_{beta/3}(dh) over the grid
    GridSpec grid;
    double eta = 0.0;
    // literal bound flags: |h(0)| < eps*eta, |dh(0)| < eps*eta^{beta/3},
    // Hoel_{beta/3}(dh) <= eps
    bool h0_ok = false;
    bool dh0_ok = false;
    bool hoelder_ok = false;
};

// Samples f_xy = psi_y^{-1} o f o psi_x over a grid on R_eta(0), subtracts
// the block-linear part, and measures the three smallness bounds.  eta and
// the escape radius are the practical-scale values of the charts.
// Throws DomainEscape if a grid image leaves R_{Q_eps(y)}(0).
TransitionDecomposition transition_decompose(const SmoothSystem& sys, const PesinChart& at_x,
                                             const PesinChart& at_y, int grid_res, double beta,
                                             double eps);

// Hoelder seminorm of a matrix field sampled on a grid: max difference
// quotient over node pairs at l-infinity distance >= 2 grid cells.
double grid_hoelder(const std::vector<Mat>& field, const GridSpec& grid, double alpha);

} // namespace pesin
