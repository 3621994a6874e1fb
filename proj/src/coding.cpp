#include "pesin/coding.hpp"

#include <cmath>
#include <random>

#include "pesin/errors.hpp"

namespace pesin {

Chain shift_chain(const Chain& c, int k) {
    if (c.center + k < 0 || c.center + k >= static_cast<int>(c.vertices.size()))
        throw WindowTooShort("shift leaves the chain window");
    Chain out = c;
    out.center += k;
    return out;
}

namespace {

TransformOptions transform_opts(const CodingOptions& opt) {
    TransformOptions t;
    t.tol = opt.tol;
    t.chi = opt.chi;
    t.eps = opt.eps;
    t.beta = opt.beta;
    return t;
}

} // namespace

CodedPoint code_point(const SmoothSystem& sys, const Chain& chain, const CodingOptions& opt) {
    if (chain.min_index() > -opt.iters || chain.max_index() < opt.iters)
        throw WindowTooShort("chain window shorter than 2*iters");
    const TransformOptions topt = transform_opts(opt);
    LocalManifoldResult vu =
        local_manifold(sys, chain.vertices, chain.center, ManifoldKind::Unstable, opt.iters, topt);
    LocalManifoldResult vs =
        local_manifold(sys, chain.vertices, chain.center, ManifoldKind::Stable, opt.iters, topt);
    IntersectResult r = intersect(vu.manifold, vs.manifold, opt.tol);
    CodedPoint out;
    out.point = r.point;
    out.vs = std::move(vs.manifold);
    out.vu = std::move(vu.manifold);
    out.residual = r.residual;
    Vec full(sys.dim);
    full.head(out.vu.repr.out_dim) = r.v;
    full.tail(out.vu.repr.in_dim) = r.w;
    out.chart_coords = full;
    out.center_cell = chain.cell_ids.at(static_cast<size_t>(chain.center));
    out.ps_ell = chain.at(0).p_s.ell();
    out.pu_ell = chain.at(0).p_u.ell();
    return out;
}

double equivariance_defect(const SmoothSystem& sys, const Chain& chain,
                           const CodingOptions& opt) {
    CodedPoint here = code_point(sys, chain, opt);
    CodedPoint next = code_point(sys, shift_chain(chain, 1), opt);
    return torus_distance(next.point, sys.map(here.point));
}

std::vector<HoelderRow> hoelder_modulus(const SmoothSystem& sys, const Chain& base,
                                        const Chain& tail, int max_agreement,
                                        const CodingOptions& opt) {
    const TransformOptions topt = transform_opts(opt);
    const int depth = opt.iters;
    if (tail.min_index() > -depth)
        throw WindowTooShort("tail chain past shorter than iters");
    if (base.min_index() > -(max_agreement))
        throw WindowTooShort("base chain past shorter than max_agreement");

    LocalManifoldResult vu_base =
        local_manifold(sys, base.vertices, base.center, ManifoldKind::Unstable,
                       std::min(-base.min_index(), max_agreement + depth), topt);

    std::vector<HoelderRow> rows;
    for (int n = 0; n <= max_agreement; ++n) {
        // splice: base on i > -n, tail shifted to end at -n
        const DoubleChart& at_splice = base.at(-n);
        const DoubleChart& tail0 = tail.at(0);
        const bool same_vertex =
            base.cell_ids.at(static_cast<size_t>(base.center - n)) ==
                tail.cell_ids.at(static_cast<size_t>(tail.center)) &&
            at_splice.p_s.ell() == tail0.p_s.ell() && at_splice.p_u.ell() == tail0.p_u.ell();
        if (!same_vertex)
            throw SplicingImpossible("no common vertex at agreement depth " + std::to_string(n));
        Chain spliced;
        spliced.center = depth + n;
        for (int i = -depth; i <= 0; ++i) {
            spliced.vertices.push_back(tail.at(i));
            spliced.cell_ids.push_back(tail.cell_ids.at(static_cast<size_t>(tail.center + i)));
        }
        for (int i = -n + 1; i <= 0; ++i) {
            spliced.vertices.push_back(base.at(i));
            spliced.cell_ids.push_back(base.cell_ids.at(static_cast<size_t>(base.center + i)));
        }
        LocalManifoldResult vu_spliced = local_manifold(
            sys, spliced.vertices, spliced.center, ManifoldKind::Unstable, depth + n, topt);
        HoelderRow row;
        row.n = n;
        row.dist_c0 = dist_c0(vu_base.manifold, vu_spliced.manifold);
        row.dist_c1 = dist_c1(vu_base.manifold, vu_spliced.manifold);
        rows.push_back(row);
    }
    return rows;
}

double fitted_decay(const std::vector<HoelderRow>& rows) {
    // least squares on log dist_c1 against n; returns e^{slope}
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const HoelderRow& r : rows) {
        if (r.dist_c1 <= 0) continue;
        const double x = r.n, y = std::log(r.dist_c1);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) return 0.0;
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return std::exp(slope);
}

std::pair<double, int> OrthogonalNet::snap(const Mat& o) const {
    double best = 1e300;
    int idx = -1;
    for (size_t i = 0; i < elements.size(); ++i) {
        const double d = (o - elements[i]).operatorNorm();
        if (d < best) {
            best = d;
            idx = static_cast<int>(i);
        }
    }
    return {best, idx};
}

OrthogonalNet build_orthogonal_net(int dim, double eps, std::uint64_t seed, int samples) {
    OrthogonalNet net;
    net.radius = 0.5 * std::cbrt(eps);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0, 1);
    std::vector<Mat> pool;
    pool.reserve(static_cast<size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        Mat z(dim, dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) z(r, c) = g(rng);
        Eigen::HouseholderQR<Mat> qr(z);
        Mat q = qr.householderQ() * Mat::Identity(dim, dim);
        Mat rr = q.transpose() * z;
        for (int c = 0; c < dim; ++c)
            if (rr(c, c) < 0) q.col(c) *= -1.0; // Haar correction
        pool.push_back(std::move(q));
    }
    // farthest-point thinning in the Frobenius metric (which dominates the
    // operator norm) until the pool is covered with a margin that absorbs
    // the sampling gap of the Haar draw
    const double select_radius = 0.55 * net.radius;
    std::vector<double> dist(pool.size(), 1e300);
    size_t next = 0;
    while (true) {
        net.elements.push_back(pool[next]);
        double far = 0.0;
        for (size_t i = 0; i < pool.size(); ++i) {
            dist[i] = std::min(dist[i], (pool[i] - pool[next]).norm());
            if (dist[i] > far) {
                far = dist[i];
                next = i;
            }
        }
        if (far <= select_radius) break;
    }
    return net;
}

InverseDiagnostics inverse_diagnostics(const SmoothSystem& sys, const Chain& a, const Chain& b,
                                       const CodedPoint& coded_a, const CodedPoint& coded_b,
                                       const OrthogonalNet& net, const CodingOptions& opt,
                                       double same_tol) {
    if (torus_distance(coded_a.point, coded_b.point) > same_tol)
        throw NotSameOrbit("coded points differ by " +
                           std::to_string(torus_distance(coded_a.point, coded_b.point)));
    InverseDiagnostics out;
    const int lo = std::max(a.min_index(), b.min_index());
    const int hi = std::min(a.max_index(), b.max_index());
    const double eps = opt.eps;
    const std::int64_t dl_bound =
        static_cast<std::int64_t>(std::ceil(3.0 * std::pow(eps, -2.0 / 3.0)));
    bool all = true;
    for (int i = lo; i <= hi; ++i) {
        const DoubleChart& va = a.at(i);
        const DoubleChart& vb = b.at(i);
        InverseRecord r;
        r.index = i;
        r.distance = torus_distance(va.chart.point(), vb.chart.point());
        r.distance_bound = std::max(va.min_size(), vb.min_size()) / 25.0;
        r.distance_ok = r.distance < r.distance_bound;

        r.dl_s = std::llabs(va.p_s.ell() - vb.p_s.ell());
        r.dl_u = std::llabs(va.p_u.ell() - vb.p_u.ell());
        r.dl_bound = dl_bound;
        r.ledger_ok = r.dl_s <= dl_bound && r.dl_u <= dl_bound;

        // psi_y^{-1} o psi_x is affine on the flat torus: linear part
        // C_y^{-1} C_x = O R (polar), translation a = psi_y^{-1}(x)
        const Mat lin = vb.chart.frame.c_inverse * va.chart.frame.c_matrix;
        Eigen::JacobiSVD<Mat> svd(lin, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Mat o = svd.matrixU() * svd.matrixV().transpose();
        const Mat rot = svd.matrixV() * svd.singularValues().asDiagonal() *
                        svd.matrixV().transpose();
        r.r_defect = (rot - Mat::Identity(sys.dim, sys.dim)).operatorNorm();
        r.r_ok = r.r_defect <= 8.0 * std::sqrt(eps);

        const Vec ai = vb.chart.frame.chart_inverse(va.chart.point());
        r.a_norm = ai.lpNorm<Eigen::Infinity>();
        r.a_ok = r.a_norm <= 0.1 * vb.min_size();

        // remainder Delta(u) = (lin - O) u; its differential is constant
        r.d_delta = (lin - o).operatorNorm();
        r.delta_ok = r.d_delta < 0.5 * std::cbrt(eps);

        r.frame_ratio = va.chart.frame.c_inv_norm / vb.chart.frame.c_inv_norm;
        const double fb = std::exp(5.0 * std::sqrt(eps));
        r.frame_ok = r.frame_ratio <= fb && r.frame_ratio >= 1.0 / fb;

        auto [snap_d, snap_i] = net.snap(o);
        r.snap_distance = snap_d;
        r.snap_index = snap_i;

        all = all && r.distance_ok && r.ledger_ok && r.r_ok && r.a_ok && r.delta_ok && r.frame_ok;
        out.records.push_back(r);
    }
    out.all_ok = all;
    return out;
}

} // namespace pesin
