#pragma once

#include "pesin/oseledets.hpp"
#include "pesin/system.hpp"

namespace pesin {

// kappa(chi, f) bound on the reduced blocks:
//   max{ e^chi (1 - 1/(1 + M_f^{-2} e^{2chi}))^{-1/2}, e^chi (1 + M_f^2)^{1/2} }
double kappa_bound(double chi, double m_f);

// Frame-norm ratio bound F0 assembled from the one-step S/U comparison
// (factor bounded by e^{2chi} + M_f^2 two-sided) and the M_f bound on
// |df^{-1}|:  F0 = M_f * sqrt(e^{2chi} + M_f^2).
double frame_ratio_bound(double chi, double m_f);

struct SeriesOptions {
    double tol = 1e-12;  // relative tail target
    int min_terms = 32;
    int max_terms = 4096;
};

struct SeriesResult {
    double value = 0.0; // S^2 or U^2
    int terms = 0;
    double tail_ratio = 0.0; // measured per-term ratio at truncation
};

// Restricted-cocycle ladder along the orbit of x: orthonormal bases of the
// stable (forward) or unstable (backward) subspace at f^{+-k}(x) and the
// cocycle expressed in those bases.  Running the weighted series through the
// restricted factors keeps the complementary-subspace contamination of
// finite precision from being amplified by e^{(lambda+chi)m}.
class SeriesLadder {
public:
    SeriesLadder(const SmoothSystem& sys, const TorusPoint& x, int sub_dim, bool forward,
                 int window);

    // B_k, the k-th restricted cocycle factor (extends on demand)
    const Mat& factor(int k);
    const Mat& basis0() const { return bases_[0]; }
    int sub_dim() const { return sub_dim_; }

private:
    void extend(int upto);

    const SmoothSystem* sys_;
    bool forward_;
    int sub_dim_;
    int window_;
    std::vector<TorusPoint> pts_; // f^{+-k}(x), k = 0.. (direction by forward_)
    std::vector<Mat> bases_;
    std::vector<Mat> factors_;
};

// S^2(x,xi) = 2 sum_{m>=0} |d_x f^m xi|^2 e^{2 chi m} for xi in the stable
// span (U^2 symmetric with f^{-1} for the unstable span), evaluated through
// the restricted ladder with adaptive truncation.
SeriesResult weighted_series(SeriesLadder& ladder, const Vec& xi, double chi,
                             const SeriesOptions& opt = {});

double s_norm2(const SmoothSystem& sys, const SplittingData& split, const Vec& xi, double chi,
               double tol = 1e-12);
double u_norm2(const SmoothSystem& sys, const SplittingData& split, const Vec& xi, double chi,
               double tol = 1e-12);

// The Lyapunov change of coordinates at x: C maps the standard splitting of
// R^d onto H^s + H^u, isometric for the weighted inner products.
struct ChartFrame {
    TorusPoint point;
    double chi = 0.0;
    Mat c_matrix;   // C_chi(x)
    Mat c_inverse;  // C_chi^{-1}(x)
    double c_inv_norm = 1.0; // operator 2-norm, >= 1
    int s_index = 0;
    double kappa = 0.0;
    int truncation = 0; // longest series length used

    int dim() const { return static_cast<int>(c_matrix.rows()); }

    // chart map psi_x(v) = exp_x(C v) and its inverse (flat torus)
    TorusPoint chart(const Vec& v) const;
    Vec chart_inverse(const TorusPoint& y) const;
};

// C_chi(x) from the weighted Gram matrices of the splitting bases: the
// stable block is orthonormalized in increasing-exponent order, the
// unstable in decreasing order (Cholesky = classical Gram-Schmidt in that
// order); signs fixed so the first nonzero component of each column is
// positive.
ChartFrame chart_frame(const SmoothSystem& sys, const SplittingData& split, double chi,
                       double tol = 1e-12);

// |C^{-1}(f(x))| / |C^{-1}(x)|; the caller checks it against F0.
double frame_norm_ratio(const ChartFrame& at_x, const ChartFrame& at_fx);

// Reduced cocycle D_chi(x) = C^{-1}(f(x)) df(x) C(x).
Mat reduced_cocycle(const SmoothSystem& sys, const ChartFrame& at_x, const ChartFrame& at_fx);

// Frobenius mass of the off-diagonal blocks relative to |D|_F.
double off_block_mass(const Mat& d_chi, int s_index);

} // namespace pesin
