#include "pesin/oseledets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pesin/errors.hpp"

namespace pesin {

namespace {

// Thin QR with positive diagonal of R.
void qr_positive(const Mat& z, Mat& q, Vec& rdiag) {
    Eigen::HouseholderQR<Mat> qr(z);
    Mat qfull = qr.householderQ() * Mat::Identity(z.rows(), z.cols());
    Mat r = qfull.transpose() * z;
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        if (r(j, j) < 0) qfull.col(j) *= -1.0;
        rdiag[j] = std::abs(r(j, j));
    }
    q = qfull;
}

// Push an orthonormal k-frame along stored differentials:
//   forward: frame at orbit(from) transported to orbit(from + n)
//   backward: frame at orbit(from) transported to orbit(from - n) using the
//   inverted stored forward differentials.
Mat push_frame(const SmoothSystem& sys, const OrbitSegment& orbit, int from, int n, int k,
               bool forward) {
    const int d = sys.dim;
    Mat q = Mat::Identity(d, k);
    Vec rdiag(k);
    for (int i = 0; i < n; ++i) {
        Mat m = forward ? sys.differential(orbit.at(from + i))
                        : Mat(sys.differential(orbit.at(from - i - 1)).inverse());
        qr_positive(m * q, q, rdiag);
    }
    return q;
}

void fix_signs(Mat& basis) {
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        for (Eigen::Index i = 0; i < basis.rows(); ++i) {
            if (std::abs(basis(i, j)) > 1e-14) {
                if (basis(i, j) < 0) basis.col(j) *= -1.0;
                break;
            }
        }
    }
}

} // namespace

double principal_angle(const Mat& a, const Mat& b) {
    if (a.cols() != b.cols()) return std::numbers::pi / 2;
    // sin of the largest principal angle; stable for nearly equal spans
    Mat residual = a - b * (b.transpose() * a);
    Eigen::JacobiSVD<Mat> svd(residual);
    double s = std::clamp(svd.singularValues().maxCoeff(), 0.0, 1.0);
    return std::asin(s);
}

SplittingData oseledets(const SmoothSystem& sys, const TorusPoint& x, int window,
                        const OseledetsOptions& opt) {
    if (window < 8) throw ConfigError("oseledets window must be >= 8");
    const int d = sys.dim;
    const OrbitSegment orbit = make_orbit(sys, x, window, window);

    // QR accumulation along the forward orbit; the transient before the
    // pushed flag aligns would pollute the averages, so skip a quarter burn-in.
    const int burn = window / 4;
    Mat q = Mat::Identity(d, d);
    Vec rdiag(d);
    Vec sums = Vec::Zero(d);
    for (int k = 0; k < window; ++k) {
        qr_positive(sys.differential(orbit.at(k)) * q, q, rdiag);
        if (k >= burn)
            for (int i = 0; i < d; ++i) sums[i] += std::log(rdiag[i]);
    }
    const double n_eff = window - burn;
    std::vector<double> lam(d); // diagonal order: nonincreasing for generic data
    for (int i = 0; i < d; ++i) lam[i] = sums[i] / n_eff;

    // Partial volume sums converge wherever there is a spectral gap; average
    // the rates inside each gap-free block (individual QR diagonals oscillate
    // for complex eigenvalue pairs while block volumes do not).
    std::vector<double> partial(d + 1, 0.0);
    for (int i = 0; i < d; ++i) partial[i + 1] = partial[i] + lam[i];
    std::vector<double> averaged(d);
    int a = 0;
    while (a < d) {
        int b = a;
        while (b + 1 < d && std::abs(lam[b] - lam[b + 1]) < opt.group_gap) ++b;
        const double mean = (partial[b + 1] - partial[a]) / (b - a + 1);
        for (int i = a; i <= b; ++i) averaged[i] = mean;
        a = b + 1;
    }

    std::vector<double> expo(averaged.rbegin(), averaged.rend()); // ascending
    int s = 0;
    for (double e : expo)
        if (e < 0) ++s;

    double min_abs = 1e300;
    for (double e : expo) min_abs = std::min(min_abs, std::abs(e));
    if (min_abs < opt.chi_floor || s < 1 || s > d - 1)
        throw DegenerateSplitting("min |exponent| = " + std::to_string(min_abs) +
                                  ", s_index = " + std::to_string(s));

    SplittingData out;
    out.point = x;
    out.window = window;
    out.exponents = expo;
    out.s_index = s;

    // E^u(x): push a generic (d-s)-frame forward from f^{-window}(x);
    // E^s(x): transport a generic s-frame backward from f^{window}(x).
    out.unstable_basis = push_frame(sys, orbit, -window, window, d - s, true);
    out.stable_basis = push_frame(sys, orbit, window, window, s, false);
    fix_signs(out.unstable_basis);
    fix_signs(out.stable_basis);

    const int w34 = std::max(1, (3 * window) / 4);
    Mat u34 = push_frame(sys, orbit, -w34, w34, d - s, true);
    Mat s34 = push_frame(sys, orbit, w34, w34, s, false);
    out.subspace_residual =
        std::max(principal_angle(out.unstable_basis, u34), principal_angle(out.stable_basis, s34));

    Mat stacked(d, d);
    stacked.leftCols(s) = out.stable_basis;
    stacked.rightCols(d - s) = out.unstable_basis;
    Eigen::JacobiSVD<Mat> svd(stacked);
    out.frame_condition = svd.singularValues().maxCoeff() / svd.singularValues().minCoeff();
    return out;
}

bool nuh_test(const SplittingData& s, double chi) {
    if (chi <= 0) throw ConfigError("nuh_test needs chi > 0");
    double min_abs = 1e300;
    for (double e : s.exponents) min_abs = std::min(min_abs, std::abs(e));
    const int d = static_cast<int>(s.exponents.size());
    return min_abs > chi && s.s_index >= 1 && s.s_index <= d - 1;
}

} // namespace pesin
