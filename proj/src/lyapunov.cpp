#include "pesin/lyapunov.hpp"

#include <cmath>

#include "pesin/errors.hpp"

namespace pesin {

double kappa_bound(double chi, double m_f) {
    const double a = std::exp(chi) / std::sqrt(1.0 - 1.0 / (1.0 + std::exp(2 * chi) / (m_f * m_f)));
    const double b = std::exp(chi) * std::sqrt(1.0 + m_f * m_f);
    return std::max(a, b);
}

double frame_ratio_bound(double chi, double m_f) {
    return m_f * std::sqrt(std::exp(2 * chi) + m_f * m_f);
}

namespace {

Mat orthonormalize(const Mat& m) {
    Eigen::HouseholderQR<Mat> qr(m);
    return qr.householderQ() * Mat::Identity(m.rows(), m.cols());
}

} // namespace

SeriesLadder::SeriesLadder(const SmoothSystem& sys, const TorusPoint& x, int sub_dim,
                           bool forward, int window)
    : sys_(&sys), forward_(forward), sub_dim_(sub_dim), window_(window) {
    pts_.push_back(x);
    extend(0);
}

void SeriesLadder::extend(int upto) {
    // grow the point list so that bases up to index upto can be pushed over
    // a full window
    const size_t need_pts = static_cast<size_t>(upto + window_ + 1);
    while (pts_.size() < need_pts) {
        const TorusPoint& last = pts_.back();
        pts_.push_back(forward_ ? sys_->map(last) : sys_->inverse_map(last));
    }
    const int d = sys_->dim;
    while (static_cast<int>(bases_.size()) <= upto) {
        const int k = static_cast<int>(bases_.size());
        Mat q = Mat::Identity(d, sub_dim_);
        if (forward_) {
            // E^s at f^k(x) = pts_[k]: transport a generic frame with df^{-1}
            // along stored points from pts_[k+window] down
            for (int j = window_; j >= 1; --j)
                q = orthonormalize(sys_->differential(pts_[static_cast<size_t>(k + j - 1)])
                                       .inverse() *
                                   q);
        } else {
            // E^u at f^{-k}(x) = pts_[k]: transport with df along stored
            // points from pts_[k+window] (= f^{-k-window}(x)) up
            for (int j = window_; j >= 1; --j)
                q = orthonormalize(sys_->differential(pts_[static_cast<size_t>(k + j)]) * q);
        }
        bases_.push_back(q);
    }
    while (static_cast<int>(factors_.size()) < upto) {
        const int k = static_cast<int>(factors_.size());
        Mat dphi;
        if (forward_) {
            dphi = sys_->differential(pts_[static_cast<size_t>(k)]);
        } else {
            // d(f^{-1}) at f^{-k}x via the stored next point f^{-k-1}x
            dphi = sys_->differential(pts_[static_cast<size_t>(k + 1)]).inverse();
        }
        factors_.push_back(bases_[static_cast<size_t>(k + 1)].transpose() * dphi *
                           bases_[static_cast<size_t>(k)]);
    }
}

const Mat& SeriesLadder::factor(int k) {
    if (static_cast<int>(factors_.size()) <= k) extend(k + 1);
    return factors_[static_cast<size_t>(k)];
}

SeriesResult weighted_series(SeriesLadder& ladder, const Vec& xi, double chi,
                             const SeriesOptions& opt) {
    SeriesResult r;
    // carry e^{chi m} inside the iterated vector: the weight alone overflows
    // long before the weighted term does
    const double step_scale = std::exp(chi);
    Vec c = ladder.basis0().transpose() * xi;
    const double residual = (xi - ladder.basis0() * c).norm();
    if (residual > 1e-8 * xi.norm())
        throw InfeasibleInput("vector is not in the requested subspace (residual " +
                              std::to_string(residual) + ")");
    double term = c.squaredNorm();
    double sum = term;
    int flat_run = 0;
    for (int m = 1; m < opt.max_terms; ++m) {
        c = step_scale * (ladder.factor(m - 1) * c);
        const double next = c.squaredNorm();
        const double ratio = term > 0 ? next / term : 0.0;
        if (ratio >= 1.0 - 1e-6) {
            if (++flat_run >= 16)
                throw NonSummable("series ratio stuck at " + std::to_string(ratio) +
                                  " (chi too close to the exponent)");
        } else {
            flat_run = 0;
        }
        sum += next;
        term = next;
        r.terms = m + 1;
        r.tail_ratio = ratio;
        if (m >= opt.min_terms && ratio < 1.0) {
            const double tail = next * ratio / (1.0 - ratio);
            if (tail < opt.tol * sum) break;
        }
    }
    r.value = 2.0 * sum;
    return r;
}

double s_norm2(const SmoothSystem& sys, const SplittingData& split, const Vec& xi, double chi,
               double tol) {
    SeriesLadder ladder(sys, split.point, split.s_index, true, split.window);
    SeriesOptions opt;
    opt.tol = tol;
    return weighted_series(ladder, xi, chi, opt).value;
}

double u_norm2(const SmoothSystem& sys, const SplittingData& split, const Vec& xi, double chi,
               double tol) {
    SeriesLadder ladder(sys, split.point, sys.dim - split.s_index, false, split.window);
    SeriesOptions opt;
    opt.tol = tol;
    return weighted_series(ladder, xi, chi, opt).value;
}

TorusPoint ChartFrame::chart(const Vec& v) const { return point.shifted(c_matrix * v); }

Vec ChartFrame::chart_inverse(const TorusPoint& y) const {
    return c_inverse * wrap_diff(point, y);
}

namespace {

// weighted Gram matrix G_ij = 2 sum_m <df^m b_i, df^m b_j> e^{2chi m} of the
// columns of `basis`, via the restricted ladder
Mat weighted_gram(SeriesLadder& ladder, const Mat& basis, double chi, double tol,
                  int min_terms, int max_terms, int& terms_used) {
    const double step_scale = std::exp(chi);
    Mat m0 = ladder.basis0().transpose() * basis;
    const double residual = (basis - ladder.basis0() * m0).norm();
    if (residual > 1e-8 * basis.norm())
        throw InfeasibleInput("basis is not in the ladder subspace");
    Mat g = m0.transpose() * m0;
    Mat cur = m0;
    double term = g.norm();
    int flat_run = 0;
    for (int m = 1; m < max_terms; ++m) {
        cur = step_scale * (ladder.factor(m - 1) * cur);
        Mat t = cur.transpose() * cur;
        const double tn = t.norm();
        const double ratio = term > 0 ? tn / term : 0.0;
        if (ratio >= 1.0 - 1e-6) {
            if (++flat_run >= 16)
                throw NonSummable("Gram series ratio stuck at " + std::to_string(ratio));
        } else {
            flat_run = 0;
        }
        g += t;
        term = tn;
        terms_used = std::max(terms_used, m + 1);
        if (m >= min_terms && ratio < 1.0) {
            if (tn * ratio / (1.0 - ratio) < tol * g.norm()) break;
        }
    }
    return 2.0 * g;
}

} // namespace

ChartFrame chart_frame(const SmoothSystem& sys, const SplittingData& split, double chi,
                       double tol) {
    const int d = sys.dim;
    const int s = split.s_index;
    ChartFrame f;
    f.point = split.point;
    f.chi = chi;
    f.s_index = s;
    f.kappa = kappa_bound(chi, sys.m_f);

    int terms = 0;
    Mat cols(d, d);
    for (int block = 0; block < 2; ++block) {
        const bool forward = (block == 0);
        // stable columns already in increasing-exponent order; unstable
        // processed in decreasing order (rowwise reverse = reversed columns)
        const Mat basis =
            forward ? split.stable_basis : Mat(split.unstable_basis.rowwise().reverse());
        const int k = static_cast<int>(basis.cols());
        SeriesLadder ladder(sys, split.point, k, forward, split.window);
        Mat g = weighted_gram(ladder, basis, chi, tol, 32, 4096, terms);
        Eigen::JacobiSVD<Mat> svd(g);
        if (svd.singularValues().maxCoeff() / svd.singularValues().minCoeff() > 1e12)
            throw IllConditioned("Gram matrix condition exceeds 1e12");
        Eigen::LLT<Mat> llt(g);
        if (llt.info() != Eigen::Success)
            throw IllConditioned("weighted Gram matrix is not positive definite");
        // V = basis * L^{-T}: classical Gram-Schmidt in column order
        Mat v = llt.matrixL().transpose().solve<Eigen::OnTheRight>(basis);
        for (int j = 0; j < k; ++j) {
            Vec col = v.col(j);
            for (int i = 0; i < d; ++i) {
                if (std::abs(col[i]) > 1e-14) {
                    if (col[i] < 0) col = -col;
                    break;
                }
            }
            // undo the processing order for the unstable block
            const int dst = forward ? j : k - 1 - j;
            cols.col((forward ? 0 : s) + dst) = col;
        }
    }
    f.c_matrix = cols;
    f.c_inverse = cols.inverse();
    f.c_inv_norm = f.c_inverse.operatorNorm();
    f.truncation = terms;
    if (f.c_inv_norm < 1.0 - 1e-9) throw IllConditioned("|C^{-1}| must be >= 1");
    f.c_inv_norm = std::max(f.c_inv_norm, 1.0);
    return f;
}

double frame_norm_ratio(const ChartFrame& at_x, const ChartFrame& at_fx) {
    return at_fx.c_inv_norm / at_x.c_inv_norm;
}

Mat reduced_cocycle(const SmoothSystem& sys, const ChartFrame& at_x, const ChartFrame& at_fx) {
    return at_fx.c_inverse * sys.differential(at_x.point) * at_x.c_matrix;
}

double off_block_mass(const Mat& d_chi, int s_index) {
    const int d = static_cast<int>(d_chi.rows());
    const int s = s_index;
    double off = d_chi.topRightCorner(s, d - s).squaredNorm() +
                 d_chi.bottomLeftCorner(d - s, s).squaredNorm();
    return std::sqrt(off) / d_chi.norm();
}

} // namespace pesin
