#include "pesin/charts.hpp"

#include <cmath>
#include <limits>

#include "pesin/errors.hpp"

namespace pesin {

double inf_op_norm(const Mat& a) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) best = std::max(best, a.row(i).cwiseAbs().sum());
    return best;
}

SizeLedger q_size(const ChartFrame& frame, double eps, double beta, const ChartScale& scale) {
    if (!(eps > 0.0) || eps >= 1.0) throw ConfigError("q_size needs eps in (0,1)");
    return ledger_from_log(scale.log_q_tilde(eps, beta, frame.c_inv_norm), eps);
}

TemperedSizes tempered_size(const std::vector<SizeLedger>& q, double eps, int window) {
    const int n = static_cast<int>(q.size());
    if (n < 2 * window + 1)
        throw WindowTooShort("need >= 2W+1 = " + std::to_string(2 * window + 1) +
                             " frames, got " + std::to_string(n));
    TemperedSizes out;
    out.first_index = window;
    for (int i = window; i < n - window; ++i) {
        // log-sum-exp of log(e^{-|k|eps} / Q(i+k))
        double m = -std::numeric_limits<double>::infinity();
        std::vector<double> logs;
        logs.reserve(2 * window + 1);
        for (int k = -window; k <= window; ++k) {
            double lg = -std::abs(k) * eps - q[static_cast<size_t>(i + k)].log_value();
            logs.push_back(lg);
            m = std::max(m, lg);
        }
        double acc = 0.0;
        for (double lg : logs) acc += std::exp(lg - m);
        const double log_inv_q = -std::log(eps) + m + std::log(acc);
        out.log_raw.push_back(-log_inv_q);
        out.ledger.push_back(ledger_from_log(-log_inv_q, eps));
    }
    return out;
}

OverlapReport overlap_test(const PesinChart& a, const PesinChart& b, const ChartScale& scale) {
    OverlapReport r;
    const std::int64_t dl = std::llabs(a.eta.ell() - b.eta.ell());
    r.ratio_ok = dl < 3; // |l1-l2| = 3 is exactly e^{eps}, strict bound fails
    const double dist = torus_distance(a.point(), b.point());
    const double dc = (a.frame.c_matrix - b.frame.c_matrix).operatorNorm();
    const double lhs = dist + dc;
    r.threshold_log = scale.log_overlap_threshold(a.eta.log_value(), b.eta.log_value());
    if (lhs == 0.0) {
        r.distance_ok = true;
        r.measured_log_lhs = -std::numeric_limits<double>::infinity();
        r.margin_log = std::numeric_limits<double>::infinity();
    } else {
        r.measured_log_lhs = std::log(lhs);
        r.margin_log = r.threshold_log - r.measured_log_lhs;
        r.distance_ok = r.measured_log_lhs < r.threshold_log;
    }
    r.overlaps = r.ratio_ok && r.distance_ok;
    return r;
}

std::int64_t GridSpec::count() const {
    std::int64_t c = 1;
    for (int i = 0; i < dim; ++i) c *= res;
    return c;
}

Vec GridSpec::node(std::int64_t flat) const {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) {
        const int idx = static_cast<int>(flat % res);
        flat /= res;
        v[i] = res == 1 ? 0.0 : -radius + 2.0 * radius * idx / (res - 1);
    }
    return v;
}

ChartTransition ChartTransition::make(const SmoothSystem& sys, const ChartFrame& from,
                                      const ChartFrame& to, bool forward) {
    ChartTransition t;
    t.sys = &sys;
    t.from = from;
    t.to = to;
    t.forward = forward;
    const Mat dphi = forward ? sys.differential(from.point)
                             : sys.inverse_differential(from.point);
    t.lin = to.c_inverse * dphi * from.c_matrix;
    t.block = Mat::Zero(t.lin.rows(), t.lin.cols());
    const int s = from.s_index;
    const int d = static_cast<int>(t.lin.rows());
    t.block.topLeftCorner(s, s) = t.lin.topLeftCorner(s, s);
    t.block.bottomRightCorner(d - s, d - s) = t.lin.bottomRightCorner(d - s, d - s);
    return t;
}

Vec ChartTransition::eval(const Vec& v) const {
    const TorusPoint image =
        forward ? sys->map(from.chart(v)) : sys->inverse_map(from.chart(v));
    return to.chart_inverse(image);
}

Vec ChartTransition::h(const Vec& v) const { return eval(v) - block * v; }

Mat ChartTransition::dh(const Vec& v) const {
    const TorusPoint p = from.chart(v);
    const Mat dphi = forward ? sys->differential(p) : sys->inverse_differential(p);
    return to.c_inverse * dphi * from.c_matrix - block;
}

Mat ChartTransition::ds() const {
    const int s = from.s_index;
    return lin.topLeftCorner(s, s);
}

Mat ChartTransition::du() const {
    const int s = from.s_index;
    const int d = static_cast<int>(lin.rows());
    return lin.bottomRightCorner(d - s, d - s);
}

double grid_hoelder(const std::vector<Mat>& field, const GridSpec& grid, double alpha) {
    const std::int64_t n = grid.count();
    const double cell = grid.res > 1 ? 2.0 * grid.radius / (grid.res - 1) : 1.0;
    double best = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const Vec vi = grid.node(i);
        for (std::int64_t j = i + 1; j < n; ++j) {
            const Vec vj = grid.node(j);
            const double dist = (vi - vj).lpNorm<Eigen::Infinity>();
            if (dist < 2.0 * cell - 1e-12) continue;
            const double q =
                inf_op_norm(field[static_cast<size_t>(i)] - field[static_cast<size_t>(j)]) /
                std::pow(dist, alpha);
            best = std::max(best, q);
        }
    }
    return best;
}

TransitionDecomposition transition_decompose(const SmoothSystem& sys, const PesinChart& at_x,
                                             const PesinChart& at_y, int grid_res, double beta,
                                             double eps) {
    TransitionDecomposition out;
    const ChartTransition tr = ChartTransition::make(sys, at_x.frame, at_y.frame, true);
    out.d_s = tr.ds();
    out.d_u = tr.du();
    out.eta = at_x.eta.value();

    out.grid.dim = sys.dim;
    out.grid.res = grid_res;
    out.grid.radius = out.eta;

    const std::int64_t n = out.grid.count();
    std::vector<Mat> dhs(static_cast<size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const Vec v = out.grid.node(i);
        // the chart expression for f_xy is only the honest lift while the
        // image stays inside the injectivity region around y
        const TorusPoint image = sys.map(at_x.frame.chart(v));
        const double dist = torus_distance(image, at_y.point());
        if (dist > 0.9 * kInjectivityRadius)
            throw DomainEscape("grid image leaves the target chart domain: d = " +
                               std::to_string(dist));
        dhs[static_cast<size_t>(i)] = tr.dh(v);
    }
    out.h_origin = tr.h(Vec::Zero(sys.dim));
    out.dh_origin_norm = inf_op_norm(tr.dh(Vec::Zero(sys.dim)));
    out.hoelder_estimate = grid_hoelder(dhs, out.grid, beta / 3.0);

    out.h0_ok = out.h_origin.lpNorm<Eigen::Infinity>() < eps * out.eta;
    out.dh0_ok = out.dh_origin_norm < eps * std::pow(out.eta, beta / 3.0);
    out.hoelder_ok = out.hoelder_estimate <= eps;
    return out;
}

} // namespace pesin
