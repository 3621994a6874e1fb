#include "pesin/manifold.hpp"

#include <cmath>

#include "pesin/errors.hpp"

namespace pesin {

namespace {

double grid_cell(const GridSpec& g) {
    return g.res > 1 ? 2.0 * g.radius / (g.res - 1) : 1.0;
}

} // namespace

Vec RepresentingFunction::eval(const Vec& t, bool* clamped) const {
    if (clamped) *clamped = false;
    const double cell = grid_cell(grid());
    std::vector<int> base(static_cast<size_t>(in_dim));
    std::vector<double> frac(static_cast<size_t>(in_dim));
    for (int i = 0; i < in_dim; ++i) {
        double u = (t[i] + radius) / cell;
        if (u < 0.0) {
            u = 0.0;
            if (clamped) *clamped = true;
        }
        if (u > res - 1) {
            u = res - 1;
            if (clamped) *clamped = true;
        }
        int b = static_cast<int>(std::floor(u));
        if (b > res - 2) b = res - 2;
        if (b < 0) b = 0;
        base[static_cast<size_t>(i)] = b;
        frac[static_cast<size_t>(i)] = u - b;
    }
    Vec out = Vec::Zero(out_dim);
    const int corners = 1 << in_dim;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        std::int64_t flat = 0;
        std::int64_t stride = 1;
        for (int i = 0; i < in_dim; ++i) {
            const int bit = (c >> i) & 1;
            w *= bit ? frac[static_cast<size_t>(i)] : 1.0 - frac[static_cast<size_t>(i)];
            flat += stride * (base[static_cast<size_t>(i)] + bit);
            stride *= res;
        }
        if (w != 0.0) out += w * values[static_cast<size_t>(flat)];
    }
    return out;
}

Mat RepresentingFunction::jacobian(std::int64_t flat) const {
    Mat j(out_dim, in_dim);
    const double cell = grid_cell(grid());
    std::int64_t stride = 1;
    std::int64_t rem = flat;
    for (int i = 0; i < in_dim; ++i) {
        const int idx = static_cast<int>(rem % res);
        rem /= res;
        const bool lo = idx == 0;
        const bool hi = idx == res - 1;
        const std::int64_t up = flat + (hi ? 0 : stride);
        const std::int64_t dn = flat - (lo ? 0 : stride);
        const double span = cell * ((hi ? 0 : 1) + (lo ? 0 : 1));
        j.col(i) = (values[static_cast<size_t>(up)] - values[static_cast<size_t>(dn)]) / span;
        stride *= res;
    }
    return j;
}

RepresentingFunction RepresentingFunction::constant(ManifoldKind kind, int in_dim, int out_dim,
                                                    double radius, int res, const Vec& value) {
    RepresentingFunction f;
    f.kind = kind;
    f.in_dim = in_dim;
    f.out_dim = out_dim;
    f.radius = radius;
    f.res = res;
    f.values.assign(static_cast<size_t>(f.node_count()), value);
    return f;
}

Vec AdmissibleManifold::graph_point(const Vec& t) const {
    const int d = repr.in_dim + repr.out_dim;
    Vec full(d);
    const Vec ft = repr.eval(t);
    if (repr.kind == ManifoldKind::Unstable) {
        full.head(repr.out_dim) = ft;
        full.tail(repr.in_dim) = t;
    } else {
        full.head(repr.in_dim) = t;
        full.tail(repr.out_dim) = ft;
    }
    return full;
}

TorusPoint AdmissibleManifold::embed(const Vec& t) const {
    return chart.chart.frame.chart(graph_point(t));
}

ManifoldParams measure_params(const RepresentingFunction& repr, double beta) {
    ManifoldParams p;
    p.q = repr.radius;
    const std::int64_t n = repr.node_count();
    std::vector<Mat> jac(static_cast<size_t>(n));
    double max_j = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        jac[static_cast<size_t>(i)] = repr.jacobian(i);
        max_j = std::max(max_j, inf_op_norm(jac[static_cast<size_t>(i)]));
    }
    p.sigma = max_j + grid_hoelder(jac, repr.grid(), beta / 3.0);
    const std::int64_t center = (n - 1) / 2; // res odd: 0 is the middle node
    p.gamma = inf_op_norm(jac[static_cast<size_t>(center)]);
    p.phi = repr.values[static_cast<size_t>(center)].lpNorm<Eigen::Infinity>();
    return p;
}

AdmissibilityReport check_admissible(const AdmissibleManifold& m, double beta, double eps) {
    AdmissibilityReport r;
    const double eta = m.chart.min_size();
    const ManifoldParams& p = m.params;
    r.sigma_ok = p.sigma <= 0.5 + 1e-12;
    r.gamma_ok = p.gamma <= 0.5 * std::pow(eta, beta / 3.0) + 1e-12;
    r.phi_ok = p.phi <= 1e-3 * eta + 1e-15;
    const double want_q = m.repr.kind == ManifoldKind::Unstable ? m.chart.p_u.value()
                                                                : m.chart.p_s.value();
    r.q_ok = std::abs(p.q - want_q) <= 1e-12 * want_q;
    double sup = 0.0;
    for (const Vec& v : m.repr.values) sup = std::max(sup, v.lpNorm<Eigen::Infinity>());
    r.sup_ok = sup <= m.chart.chart.q_eps.value() + 1e-15;
    // grid Lipschitz constant
    const GridSpec g = m.repr.grid();
    const std::int64_t n = g.count();
    double lip = 0.0;
    for (std::int64_t i = 0; i < n; ++i)
        lip = std::max(lip, inf_op_norm(m.repr.jacobian(i)));
    r.lip = lip;
    r.lip_ok = lip < eps;
    r.ok = r.sigma_ok && r.gamma_ok && r.phi_ok && r.q_ok && r.sup_ok && r.lip_ok;
    return r;
}

AdmissibleManifold section_manifold(const DoubleChart& chart, ManifoldKind kind, int dim,
                                    int res, const Vec& value, double beta) {
    const int s = chart.s_index;
    const int in_dim = kind == ManifoldKind::Unstable ? dim - s : s;
    const int out_dim = dim - in_dim;
    const double q =
        kind == ManifoldKind::Unstable ? chart.p_u.value() : chart.p_s.value();
    AdmissibleManifold m;
    m.chart = chart;
    m.repr = RepresentingFunction::constant(kind, in_dim, out_dim, q, res, value);
    m.params = measure_params(m.repr, beta);
    return m;
}

double alpha_norm(const std::vector<Mat>& field, const GridSpec& grid, double alpha) {
    if (!(alpha > 0.0) || alpha > 1.0) throw ConfigError("alpha must lie in (0,1]");
    double sup = 0.0;
    for (const Mat& m : field) sup = std::max(sup, inf_op_norm(m));
    return sup + grid_hoelder(field, grid, alpha);
}

double neumann_bound(double alpha_norm_value) {
    if (alpha_norm_value >= 1.0)
        throw NotContractive("alpha-norm " + std::to_string(alpha_norm_value) + " >= 1");
    return 1.0 / (1.0 - alpha_norm_value);
}

IntersectResult intersect(const AdmissibleManifold& vu, const AdmissibleManifold& vs,
                          double tol, int max_iters) {
    if (vu.repr.kind != ManifoldKind::Unstable || vs.repr.kind != ManifoldKind::Stable)
        throw ConfigError("intersect expects (u-manifold, s-manifold)");
    IntersectResult r;
    Vec w = Vec::Zero(vu.repr.in_dim);
    double prev_step = 0.0;
    for (int it = 1; it <= max_iters; ++it) {
        const Vec v = vu.repr.eval(w);
        const Vec next = vs.repr.eval(v);
        const double step = (next - w).lpNorm<Eigen::Infinity>();
        r.iterations = it;
        if (prev_step > 0.0) r.contraction = step / prev_step;
        prev_step = step;
        w = next;
        r.residual = step;
        if (step < tol) break;
    }
    if (r.residual >= tol && r.residual > 0)
        throw NoConvergence("intersection fixed point stalled at step " +
                            std::to_string(r.residual));
    r.w = w;
    r.v = vu.repr.eval(w);
    Vec full(vu.repr.in_dim + vu.repr.out_dim);
    full.head(vu.repr.out_dim) = r.v;
    full.tail(vu.repr.in_dim) = r.w;
    if (full.lpNorm<Eigen::Infinity>() > 1e-2 * vu.chart.min_size())
        throw NoConvergence("intersection left the 10^{-2}(p^s^p^u) box");
    r.point = vu.chart.chart.frame.chart(full);
    return r;
}

namespace {

struct ActiveSplit {
    // index ranges of the active (graph domain) and passive blocks in chart
    // coordinates
    int act_off, act_dim, pas_off, pas_dim;
};

Vec assemble(const ActiveSplit& sp, const Vec& active, const Vec& passive) {
    Vec full(sp.act_dim + sp.pas_dim);
    full.segment(sp.act_off, sp.act_dim) = active;
    full.segment(sp.pas_off, sp.pas_dim) = passive;
    return full;
}

} // namespace

AdmissibleManifold graph_transform(const SmoothSystem& sys, const DoubleChart& v,
                                   const DoubleChart& w, const AdmissibleManifold& input,
                                   const TransformOptions& opt, TransformReport* report) {
    const int d = sys.dim;
    const int s = v.s_index;
    const bool u_kind = input.repr.kind == ManifoldKind::Unstable;

    // u-kind: push forward along the edge, input in v, output in w;
    // s-kind: pull back, input in w, output in v.
    const DoubleChart& src = u_kind ? v : w;
    const DoubleChart& dst = u_kind ? w : v;
    const ChartTransition tr =
        ChartTransition::make(sys, src.chart.frame, dst.chart.frame, u_kind);

    ActiveSplit sp;
    if (u_kind) {
        sp = ActiveSplit{s, d - s, 0, s};
    } else {
        sp = ActiveSplit{0, s, s, d - s};
    }
    const Mat a_act = tr.lin.block(sp.act_off, sp.act_off, sp.act_dim, sp.act_dim);
    const Mat a_pas = tr.lin.block(sp.pas_off, sp.pas_off, sp.pas_dim, sp.pas_dim);
    const Mat a_act_inv = a_act.inverse();

    const double q_in = input.repr.radius;
    const double q_out = u_kind ? dst.p_u.value() : dst.p_s.value();

    RepresentingFunction out = input.repr;
    out.radius = q_out;
    out.values.assign(static_cast<size_t>(out.node_count()), Vec::Zero(sp.pas_dim));

    int worst_iters = 0;
    const std::int64_t n = out.node_count();
    for (std::int64_t node = 0; node < n; ++node) {
        const Vec tau = out.node_coord(node);
        // solve A_act t + h_act(F(t), t) = tau by t <- A_act^{-1}(tau - h_act)
        Vec t = a_act_inv * tau;
        double prev_step = 0.0;
        int stall = 0;
        bool done = false;
        for (int it = 1; it <= opt.max_iters; ++it) {
            bool clamped = false;
            Vec ft = input.repr.eval(t, &clamped);
            if (clamped) {
                // the implicit solution must stay inside the source box
                const double over = t.lpNorm<Eigen::Infinity>() / q_in;
                if (over > 1.05)
                    throw ImplicitSolveFailure("implicit solution left the source box (|t| = " +
                                               std::to_string(over) + " q)");
            }
            const Vec h = tr.h(assemble(sp, t, ft));
            const Vec next = a_act_inv * (tau - h.segment(sp.act_off, sp.act_dim));
            const double step = (next - t).lpNorm<Eigen::Infinity>();
            t = next;
            worst_iters = std::max(worst_iters, it);
            if (step < opt.tol) {
                done = true;
                break;
            }
            if (prev_step > 0.0 && step > 0.999 * prev_step) {
                if (++stall >= 20)
                    throw ImplicitSolveFailure("node solve stalled, step ratio " +
                                               std::to_string(step / prev_step));
            } else {
                stall = 0;
            }
            prev_step = step;
        }
        if (!done) throw ImplicitSolveFailure("node solve did not converge");
        const Vec ft = input.repr.eval(t);
        const Vec h = tr.h(assemble(sp, t, ft));
        out.values[static_cast<size_t>(node)] =
            a_pas * ft + h.segment(sp.pas_off, sp.pas_dim);
    }

    AdmissibleManifold result;
    result.chart = dst;
    result.repr = out;
    result.params = measure_params(out, opt.beta);

    // (q^s ^ q^u) of the transform's target chart (w for u-kind, v for s-kind)
    const double qmin = dst.min_size();
    const double contraction = std::exp(std::sqrt(opt.eps)) * std::exp(-2.0 * opt.chi);
    TransformReport rep;
    rep.before = input.params;
    rep.after = result.params;
    rep.max_implicit_iters = worst_iters;
    rep.sigma_bound = contraction * (input.params.sigma + std::sqrt(opt.eps));
    rep.gamma_bound = contraction * (input.params.gamma +
                                     std::pow(opt.eps, opt.beta / 3.0) *
                                         std::pow(qmin, opt.beta / 3.0));
    rep.phi_bound = contraction * (input.params.phi + std::sqrt(opt.eps) * qmin);
    rep.sigma_ok = result.params.sigma <= rep.sigma_bound + 1e-12;
    rep.gamma_ok = result.params.gamma <= rep.gamma_bound + 1e-12;
    rep.phi_ok = result.params.phi <= rep.phi_bound + 1e-12;
    if (report) *report = rep;
    if (opt.enforce_recurrences) {
        if (!rep.sigma_ok)
            throw AdmissibilityLost("sigma recurrence violated: " +
                                    std::to_string(result.params.sigma) + " > " +
                                    std::to_string(rep.sigma_bound));
        if (!rep.gamma_ok)
            throw AdmissibilityLost("gamma recurrence violated: " +
                                    std::to_string(result.params.gamma) + " > " +
                                    std::to_string(rep.gamma_bound));
        if (!rep.phi_ok)
            throw AdmissibilityLost("phi recurrence violated: " +
                                    std::to_string(result.params.phi) + " > " +
                                    std::to_string(rep.phi_bound));
    }
    return result;
}

namespace {

// resample b onto a's grid if radii differ by at most one ledger step
const RepresentingFunction& align_or_throw(const RepresentingFunction& a,
                                           const RepresentingFunction& b,
                                           RepresentingFunction& storage) {
    if (std::abs(a.radius - b.radius) <= 1e-12 * std::max(a.radius, b.radius) && a.res == b.res)
        return b;
    const double ratio = a.radius / b.radius;
    if (ratio > std::exp(1.0 / 3.0) || ratio < std::exp(-1.0 / 3.0))
        throw InfeasibleInput("manifold radii differ by more than one ledger step");
    if (a.radius > b.radius * (1.0 + 1e-12))
        throw InfeasibleInput("refusing to extrapolate: resample target must be smaller");
    storage = b;
    storage.radius = a.radius;
    storage.res = a.res;
    storage.values.assign(static_cast<size_t>(storage.node_count()), Vec());
    for (std::int64_t i = 0; i < storage.node_count(); ++i)
        storage.values[static_cast<size_t>(i)] = b.eval(storage.node_coord(i));
    return storage;
}

} // namespace

double dist_c0(const AdmissibleManifold& a, const AdmissibleManifold& b) {
    RepresentingFunction tmp;
    const RepresentingFunction& bb = align_or_throw(a.repr, b.repr, tmp);
    double best = 0.0;
    for (std::int64_t i = 0; i < a.repr.node_count(); ++i)
        best = std::max(best, (a.repr.values[static_cast<size_t>(i)] -
                               bb.values[static_cast<size_t>(i)])
                                  .lpNorm<Eigen::Infinity>());
    return best;
}

double dist_c1(const AdmissibleManifold& a, const AdmissibleManifold& b) {
    RepresentingFunction tmp;
    const RepresentingFunction& bb = align_or_throw(a.repr, b.repr, tmp);
    double dj = 0.0;
    for (std::int64_t i = 0; i < a.repr.node_count(); ++i)
        dj = std::max(dj, inf_op_norm(a.repr.jacobian(i) - bb.jacobian(i)));
    return dist_c0(a, b) + dj;
}

LocalManifoldResult local_manifold(const SmoothSystem& sys,
                                   const std::vector<DoubleChart>& charts, int center,
                                   ManifoldKind kind, int iters, const TransformOptions& opt,
                                   const Vec* seed_value) {
    const bool u_kind = kind == ManifoldKind::Unstable;
    const int last = static_cast<int>(charts.size()) - 1;
    if (u_kind && center - iters < 0) throw WindowTooShort("past window shorter than iters");
    if (!u_kind && center + iters > last) throw WindowTooShort("future window shorter than iters");

    LocalManifoldResult out;
    AdmissibleManifold prev;
    for (int n = 1; n <= iters; ++n) {
        const int far = u_kind ? center - n : center + n;
        const DoubleChart& seed_chart = charts[static_cast<size_t>(far)];
        const int in_dim =
            u_kind ? sys.dim - seed_chart.s_index : seed_chart.s_index;
        Vec value = seed_value ? *seed_value : Vec::Zero(sys.dim - in_dim);
        AdmissibleManifold m = section_manifold(seed_chart, kind, sys.dim,
                                                /*res*/ 33, value, opt.beta);
        for (int k = 0; k < n; ++k) {
            const int i = u_kind ? far + k : far - k;
            const DoubleChart& cv = charts[static_cast<size_t>(u_kind ? i : i - 1)];
            const DoubleChart& cw = charts[static_cast<size_t>(u_kind ? i + 1 : i)];
            m = graph_transform(sys, cv, cw, m, opt);
        }
        if (n > 1) out.trace.push_back(dist_c0(prev, m));
        prev = m;
    }
    out.manifold = prev;
    return out;
}

WindowCheckResult stays_in_windows_check(const SmoothSystem& sys, const AdmissibleManifold& m,
                                         const std::vector<DoubleChart>& charts, int center) {
    WindowCheckResult r;
    const bool s_kind = m.repr.kind == ManifoldKind::Stable;
    const int last = static_cast<int>(charts.size()) - 1;
    const std::int64_t n = m.repr.node_count();
    for (std::int64_t node = 0; node < n; ++node) {
        TorusPoint p = m.embed(m.repr.node_coord(node));
        int k = 0;
        while (true) {
            const int idx = center + k;
            if (idx < 0 || idx > last) break;
            const DoubleChart& c = charts[static_cast<size_t>(idx)];
            const double bound = 10.0 * c.chart.q_eps.value();
            const double coord =
                c.chart.frame.chart_inverse(p).lpNorm<Eigen::Infinity>();
            r.worst_ratio = std::max(r.worst_ratio, coord / bound);
            if (coord > bound) {
                r.ok = false;
                r.fail_index = k;
                return r;
            }
            p = s_kind ? sys.map(p) : sys.inverse_map(p);
            k += s_kind ? 1 : -1;
        }
    }
    return r;
}

} // namespace pesin
