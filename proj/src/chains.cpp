#include "pesin/chains.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pesin/errors.hpp"

namespace pesin {

namespace {

// eta for an overlap clause: requested size capped at the chart's own Q_eps
PesinChart with_eta(const PesinChart& c, const SizeLedger& eta) {
    PesinChart out = c;
    out.eta = eta.min_with(c.q_eps);
    return out;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double unit_double(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace

EdgeReport edge_test(const DoubleChart& v, const DoubleChart& w, const PesinChart& fwd_of_v,
                     const PesinChart& bwd_of_w, const ChartScale& scale) {
    EdgeReport r;
    r.s_match = v.s_index == w.s_index;

    const SizeLedger want_qu = v.p_u.times_e_eps().min_with(w.chart.q_eps);
    r.ledger_u = want_qu.ell() == w.p_u.ell();
    const SizeLedger want_ps = w.p_s.times_e_eps().min_with(v.chart.q_eps);
    r.ledger_s = want_ps.ell() == v.p_s.ell();

    const SizeLedger p_min = v.min_ledger();
    const SizeLedger q_min = w.min_ledger();
    r.overlap_tail =
        overlap_test(with_eta(v.chart, p_min), with_eta(bwd_of_w, p_min), scale).overlaps;
    r.overlap_head =
        overlap_test(with_eta(fwd_of_v, q_min), with_eta(w.chart, q_min), scale).overlaps;

    r.ok = r.s_match && r.ledger_u && r.ledger_s && r.overlap_tail && r.overlap_head;
    return r;
}

int Alphabet::census_above(double log_t) const {
    int n = 0;
    for (const Entry& e : entries)
        if (e.chart.q_eps.log_value() > log_t) ++n;
    return n;
}

std::int64_t Alphabet::vertex_census_at_least(const SizeLedger& threshold) const {
    std::int64_t total = 0;
    for (const Entry& e : entries) {
        // pairs (p^s, p^u) with offsets in [0, D] and min value >= threshold,
        // i.e. max offset <= l(threshold) - l(Q)
        const std::int64_t room = threshold.ell() - e.chart.q_eps.ell();
        if (room < 0) continue;
        const std::int64_t d = std::min<std::int64_t>(room, opt.pair_depth);
        total += (d + 1) * (d + 1);
    }
    return total;
}

std::optional<int> Alphabet::find_cell(const CellKey& key) const {
    for (size_t i = 0; i < entries.size(); ++i)
        if (entries[i].key == key) return static_cast<int>(i);
    return std::nullopt;
}

CellKey Alphabet::quantize(const PesinChart& chart) const {
    CellKey key;
    std::uint64_t state = opt.seed;
    const double shift_x = unit_double(splitmix64(state));
    const double shift_c = unit_double(splitmix64(state));
    const double dx = opt.delta_x > 0 ? opt.delta_x : std::pow(eps, 4) / 4.0;
    const double dc = opt.delta_c > 0 ? opt.delta_c : eps * eps;
    const Vec& x = chart.frame.point.coords();
    for (int i = 0; i < chart.frame.dim(); ++i)
        key.pos.push_back(static_cast<std::int64_t>(std::floor((x[i] + shift_x * dx) / dx)));
    const Mat& c = chart.frame.c_matrix;
    for (int i = 0; i < c.rows(); ++i)
        for (int j = 0; j < c.cols(); ++j)
            key.frame.push_back(
                static_cast<std::int64_t>(std::floor((c(i, j) + shift_c * dc) / dc)));
    key.q_ell = chart.q_eps.ell();
    key.s_index = chart.frame.s_index;
    return key;
}

namespace {

PesinChart chart_at(const SmoothSystem& sys, const TorusPoint& x, double eps, double chi,
                    double beta, const ChartScale& scale, int window, double tol) {
    SplittingData split = oseledets(sys, x, window);
    if (!nuh_test(split, chi))
        throw DegenerateSplitting("point fails the chi-hyperbolicity test");
    ChartFrame frame = chart_frame(sys, split, chi, tol);
    PesinChart chart;
    chart.frame = frame;
    chart.q_eps = q_size(frame, eps, beta, scale);
    chart.eta = chart.q_eps;
    return chart;
}

} // namespace

Alphabet build_alphabet(const SmoothSystem& sys, const std::vector<TorusPoint>& samples,
                        double eps, double chi, double beta, const ChartScale& scale,
                        const AlphabetOptions& opt) {
    Alphabet a;
    a.eps = eps;
    a.beta = beta;
    a.scale = scale;
    a.opt = opt;
    for (const TorusPoint& x : samples) {
        PesinChart chart;
        try {
            chart = chart_at(sys, x, eps, chi, beta, scale, opt.window, opt.tol);
        } catch (const DegenerateSplitting&) {
            continue;
        }
        const CellKey key = a.quantize(chart);
        if (a.find_cell(key)) continue;
        Alphabet::Entry e;
        e.key = key;
        e.chart = chart;
        e.fwd = chart_at(sys, sys.map(x), eps, chi, beta, scale, opt.window, opt.tol);
        e.bwd = chart_at(sys, sys.inverse_map(x), eps, chi, beta, scale, opt.window, opt.tol);
        a.entries.push_back(std::move(e));
    }
    if (a.entries.empty()) throw EmptyAlphabet("no sample produced a valid chart");
    return a;
}

namespace {

// the two min/clamp passes without the seed-ratio validation
SubordinatedPair fill_passes(const std::vector<SizeLedger>& q_cap,
                             const std::vector<SizeLedger>& q_seed) {
    const size_t n = q_cap.size();
    SubordinatedPair out;
    out.p_u.resize(n);
    out.p_s.resize(n);
    out.p_u[0] = q_seed[0];
    for (size_t k = 1; k < n; ++k)
        out.p_u[k] = out.p_u[k - 1].times_e_eps().min_with(q_cap[k]);
    out.p_s[n - 1] = q_seed[n - 1];
    for (size_t k = n - 1; k > 0; --k)
        out.p_s[k - 1] = out.p_s[k].times_e_eps().min_with(q_cap[k - 1]);
    return out;
}

} // namespace

SubordinatedPair subordinate_fill(const std::vector<SizeLedger>& q_cap,
                                  const std::vector<SizeLedger>& q_seed) {
    const size_t n = q_cap.size();
    if (n == 0 || q_seed.size() != n)
        throw InfeasibleInput("subordinate_fill needs matching nonempty sequences");
    for (size_t k = 0; k < n; ++k) {
        if (!(q_seed[k] <= q_cap[k]))
            throw InfeasibleInput("q exceeds Q at index " + std::to_string(k));
        if (k + 1 < n && std::llabs(q_seed[k].ell() - q_seed[k + 1].ell()) > 3)
            throw InfeasibleInput("q ratio exceeds e^eps at index " + std::to_string(k));
    }
    SubordinatedPair out = fill_passes(q_cap, q_seed);
    for (size_t k = 0; k < n; ++k) {
        if (!(q_seed[k] <= out.p_s[k].min_with(out.p_u[k])))
            throw InfeasibleInput("subordination lost p >= q at index " + std::to_string(k));
    }
    const size_t half = n / 2;
    auto saturates = [&](const std::vector<SizeLedger>& p, size_t lo, size_t hi) {
        for (size_t k = lo; k < hi; ++k)
            if (p[k].ell() == q_cap[k].ell()) return true;
        return false;
    };
    out.u_saturates = saturates(out.p_u, 0, half) && saturates(out.p_u, half, n);
    out.s_saturates = saturates(out.p_s, 0, half) && saturates(out.p_s, half, n);
    return out;
}

bool Chain::recurrent() const {
    auto count_repeat = [&](int lo, int hi) {
        std::map<std::tuple<int, std::int64_t, std::int64_t>, int> seen;
        for (int k = lo; k <= hi; ++k) {
            const DoubleChart& c = at(k);
            auto key = std::make_tuple(cell_ids.at(static_cast<size_t>(center + k)),
                                       c.p_s.ell(), c.p_u.ell());
            if (++seen[key] >= 2) return true;
        }
        return false;
    };
    return count_repeat(min_index(), 0) && count_repeat(0, max_index());
}

Chain orbit_to_chain(const SmoothSystem& sys, Alphabet& alphabet, const TorusPoint& x,
                     int n_back, int n_fwd, double chi, const ChainOptions& opt) {
    const double eps = alphabet.eps;
    const double beta = alphabet.beta;
    const int w_temper = opt.tempering_window;

    // phase 1: charts and tempered sizes on a window extended by the
    // tempering radius
    int burn = opt.burn_in;
    for (int attempt = 0; attempt < 6; ++attempt) {
        const int lo = -n_back - burn - w_temper;
        const int hi = n_fwd + burn + w_temper;
        const OrbitSegment orbit = make_orbit(sys, x, -lo, hi);

        std::vector<PesinChart> charts;
        std::vector<SizeLedger> q_orbit;
        charts.reserve(static_cast<size_t>(hi - lo + 1));
        for (int k = lo; k <= hi; ++k) {
            PesinChart c = chart_at(sys, orbit.at(k), eps, chi, beta, alphabet.scale,
                                    opt.oseledets_window, opt.tol);
            q_orbit.push_back(c.q_eps);
            charts.push_back(std::move(c));
        }
        const TemperedSizes tempered = tempered_size(q_orbit, eps, w_temper);
        // interior indices [lo + w_temper, hi - w_temper]
        const int ilo = lo + w_temper;
        const int ihi = hi - w_temper;

        // representative per interior index
        std::vector<int> cells;
        std::vector<SizeLedger> q_cap, q_seed;
        for (int k = ilo; k <= ihi; ++k) {
            const size_t oi = static_cast<size_t>(k - lo);
            const PesinChart& pc = charts[oi];
            const CellKey key = alphabet.quantize(pc);
            std::optional<int> cell = alphabet.find_cell(key);
            if (!cell) {
                if (!opt.extend_alphabet)
                    throw NoVertexFound("no representative at index " + std::to_string(k));
                Alphabet::Entry e;
                e.key = key;
                e.chart = pc;
                e.fwd = chart_at(sys, sys.map(pc.point()), eps, chi, beta, alphabet.scale,
                                 opt.oseledets_window, opt.tol);
                e.bwd = chart_at(sys, sys.inverse_map(pc.point()), eps, chi, beta,
                                 alphabet.scale, opt.oseledets_window, opt.tol);
                alphabet.entries.push_back(std::move(e));
                cell = static_cast<int>(alphabet.entries.size()) - 1;
            }
            const Alphabet::Entry& e = alphabet.entries[static_cast<size_t>(*cell)];
            // discreteness sufficiency checks: s-index, Q ratio, overlap
            if (e.chart.frame.s_index != pc.frame.s_index)
                throw NoVertexFound("s-index mismatch at index " + std::to_string(k));
            if (std::llabs(e.chart.q_eps.ell() - pc.q_eps.ell()) > 3)
                throw NoVertexFound("Q ratio exceeds e^eps at index " + std::to_string(k));
            const SizeLedger eta = tempered.ledger[static_cast<size_t>(k - ilo)];
            if (!overlap_test(with_eta(e.chart, eta), with_eta(pc, eta), alphabet.scale)
                     .overlaps)
                throw NoVertexFound("representative chart does not overlap orbit chart at " +
                                    std::to_string(k));
            cells.push_back(*cell);
            q_cap.push_back(e.chart.q_eps);
            q_seed.push_back(eta.min_with(e.chart.q_eps));
        }

        SubordinatedPair fill = subordinate_fill(q_cap, q_seed);
        // maximal (Q-seeded) fill for the burn-in stability check
        SubordinatedPair max_fill = fill_passes(q_cap, q_cap);

        const int keep_lo = -n_back - ilo; // offset of kept window inside interior
        const int keep_hi = n_fwd - ilo;
        bool stable = true;
        for (int j = keep_lo; j <= keep_hi && stable; ++j) {
            if (fill.p_u[static_cast<size_t>(j)].ell() !=
                    max_fill.p_u[static_cast<size_t>(j)].ell() ||
                fill.p_s[static_cast<size_t>(j)].ell() !=
                    max_fill.p_s[static_cast<size_t>(j)].ell())
                stable = false;
        }
        if (!stable) {
            // ramp from the q-seeded window edges still inside: widen and redo
            std::int64_t worst = 0;
            for (size_t j = 0; j < q_cap.size(); ++j)
                worst = std::max(worst, q_seed[j].ell() - q_cap[j].ell());
            burn += static_cast<int>(worst / 3 + 8);
            continue;
        }

        Chain chain;
        chain.center = n_back;
        for (int j = keep_lo; j <= keep_hi; ++j) {
            const int cell = cells[static_cast<size_t>(j)];
            const Alphabet::Entry& e = alphabet.entries[static_cast<size_t>(cell)];
            DoubleChart dc;
            dc.chart = e.chart;
            dc.p_s = fill.p_s[static_cast<size_t>(j)];
            dc.p_u = fill.p_u[static_cast<size_t>(j)];
            dc.chart.eta = dc.min_ledger();
            dc.s_index = e.chart.frame.s_index;
            chain.vertices.push_back(dc);
            chain.cell_ids.push_back(cell);
        }
        // consecutive edges must verify
        for (int k = chain.min_index(); k < chain.max_index(); ++k) {
            const int ci = chain.cell_ids[static_cast<size_t>(chain.center + k)];
            const int cj = chain.cell_ids[static_cast<size_t>(chain.center + k + 1)];
            const EdgeReport er =
                edge_test(chain.at(k), chain.at(k + 1), alphabet.entries[static_cast<size_t>(ci)].fwd,
                          alphabet.entries[static_cast<size_t>(cj)].bwd, alphabet.scale);
            if (!er.ok)
                throw NoVertexFound("edge check failed between indices " + std::to_string(k) +
                                    " and " + std::to_string(k + 1));
        }
        return chain;
    }
    throw NoVertexFound("burn-in did not stabilize the subordinated sizes");
}

DoubleChart ChartGraph::materialize(const Alphabet& alphabet, int vertex_id) const {
    const Vertex& v = vertices.at(static_cast<size_t>(vertex_id));
    const Alphabet::Entry& e = alphabet.entries.at(static_cast<size_t>(v.cell));
    DoubleChart dc;
    dc.chart = e.chart;
    dc.p_s = SizeLedger(v.ps_ell, eps);
    dc.p_u = SizeLedger(v.pu_ell, eps);
    dc.chart.eta = dc.min_ledger();
    dc.s_index = e.chart.frame.s_index;
    return dc;
}

ChartGraph build_graph(const Alphabet& alphabet) {
    ChartGraph g;
    g.eps = alphabet.eps;
    const std::int64_t depth = alphabet.opt.pair_depth;
    std::map<ChartGraph::Vertex, int> index;
    for (size_t c = 0; c < alphabet.entries.size(); ++c) {
        const std::int64_t q_ell = alphabet.entries[c].chart.q_eps.ell();
        for (std::int64_t a = 0; a <= depth; ++a)
            for (std::int64_t b = 0; b <= depth; ++b)
                g.vertices.push_back({static_cast<int>(c), q_ell + a, q_ell + b});
    }
    std::sort(g.vertices.begin(), g.vertices.end());
    for (size_t i = 0; i < g.vertices.size(); ++i) index[g.vertices[i]] = static_cast<int>(i);
    g.out_edges.assign(g.vertices.size(), {});
    g.in_edges.assign(g.vertices.size(), {});

    const int ncells = static_cast<int>(alphabet.entries.size());
    for (int ci = 0; ci < ncells; ++ci) {
        const Alphabet::Entry& ei = alphabet.entries[static_cast<size_t>(ci)];
        for (int cj = 0; cj < ncells; ++cj) {
            const Alphabet::Entry& ej = alphabet.entries[static_cast<size_t>(cj)];
            if (ei.key.s_index != ej.key.s_index) continue;
            // size-independent overlap left sides; thresholds grow with eta,
            // so failing at the largest admitted size rules the pair out
            const double lhs_tail = torus_distance(ei.chart.point(), ej.bwd.point()) +
                                    (ei.chart.frame.c_matrix - ej.bwd.frame.c_matrix)
                                        .operatorNorm();
            const double lhs_head = torus_distance(ei.fwd.point(), ej.chart.point()) +
                                    (ei.fwd.frame.c_matrix - ej.chart.frame.c_matrix)
                                        .operatorNorm();
            const double log_eta_max =
                std::min(ei.chart.q_eps.log_value(), ej.chart.q_eps.log_value());
            const double loosest =
                alphabet.scale.log_overlap_threshold(log_eta_max, log_eta_max);
            if (lhs_tail > 0 && std::log(lhs_tail) >= loosest) continue;
            if (lhs_head > 0 && std::log(lhs_head) >= loosest) continue;

            const std::int64_t qi = ei.chart.q_eps.ell();
            const std::int64_t qj = ej.chart.q_eps.ell();
            for (std::int64_t au = 0; au <= depth; ++au) {     // p^u offset in cell i
                for (std::int64_t bs = 0; bs <= depth; ++bs) { // q^s offset in cell j
                    const std::int64_t pu = qi + au;
                    const std::int64_t qs = qj + bs;
                    const std::int64_t qu = std::max(std::max<std::int64_t>(1, pu - 3), qj);
                    const std::int64_t ps = std::max(std::max<std::int64_t>(1, qs - 3), qi);
                    if (qu - qj > depth || ps - qi > depth) continue;
                    const auto vi = index.find({ci, ps, pu});
                    const auto wi = index.find({cj, qs, qu});
                    if (vi == index.end() || wi == index.end()) continue;
                    const DoubleChart v = g.materialize(alphabet, vi->second);
                    const DoubleChart w = g.materialize(alphabet, wi->second);
                    const EdgeReport er = edge_test(v, w, ei.fwd, ej.bwd, alphabet.scale);
                    if (er.ok) {
                        g.out_edges[static_cast<size_t>(vi->second)].push_back(wi->second);
                        g.in_edges[static_cast<size_t>(wi->second)].push_back(vi->second);
                    }
                }
            }
        }
    }
    for (auto& e : g.out_edges) {
        std::sort(e.begin(), e.end());
        e.erase(std::unique(e.begin(), e.end()), e.end());
    }
    for (auto& e : g.in_edges) {
        std::sort(e.begin(), e.end());
        e.erase(std::unique(e.begin(), e.end()), e.end());
    }
    return g;
}

void prune_graph(ChartGraph& g) {
    std::vector<bool> alive(g.vertices.size(), true);
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < g.vertices.size(); ++i) {
            if (!alive[i]) continue;
            auto live_count = [&](const std::vector<int>& edges) {
                int n = 0;
                for (int j : edges)
                    if (alive[static_cast<size_t>(j)]) ++n;
                return n;
            };
            if (live_count(g.out_edges[i]) == 0 || live_count(g.in_edges[i]) == 0) {
                alive[i] = false;
                changed = true;
            }
        }
    }
    // compact
    std::vector<int> remap(g.vertices.size(), -1);
    ChartGraph out;
    out.eps = g.eps;
    for (size_t i = 0; i < g.vertices.size(); ++i) {
        if (!alive[i]) continue;
        remap[i] = static_cast<int>(out.vertices.size());
        out.vertices.push_back(g.vertices[i]);
    }
    out.out_edges.assign(out.vertices.size(), {});
    out.in_edges.assign(out.vertices.size(), {});
    for (size_t i = 0; i < g.vertices.size(); ++i) {
        if (!alive[i]) continue;
        for (int j : g.out_edges[i]) {
            if (!alive[static_cast<size_t>(j)]) continue;
            out.out_edges[static_cast<size_t>(remap[i])].push_back(remap[static_cast<size_t>(j)]);
            out.in_edges[static_cast<size_t>(remap[j])].push_back(remap[i]);
        }
    }
    g = std::move(out);
}

std::string graph_to_dot(const ChartGraph& g, const Alphabet& alphabet) {
    (void)alphabet;
    std::ostringstream os;
    os << "digraph chart_graph {\n";
    for (size_t i = 0; i < g.vertices.size(); ++i) {
        const auto& v = g.vertices[i];
        os << "  v" << i << " [label=\"c" << v.cell << " ps=" << v.ps_ell
           << " pu=" << v.pu_ell << "\"];\n";
    }
    for (size_t i = 0; i < g.vertices.size(); ++i)
        for (int j : g.out_edges[i]) os << "  v" << i << " -> v" << j << ";\n";
    os << "}\n";
    return os.str();
}

std::string graph_to_json(const ChartGraph& g, const Alphabet& alphabet) {
    (void)alphabet;
    nlohmann::json j;
    j["epsilon"] = g.eps;
    j["vertices"] = nlohmann::json::array();
    for (const auto& v : g.vertices)
        j["vertices"].push_back({{"cell", v.cell}, {"ps_ell", v.ps_ell}, {"pu_ell", v.pu_ell}});
    j["edges"] = nlohmann::json::array();
    for (size_t i = 0; i < g.vertices.size(); ++i)
        for (int e : g.out_edges[i]) j["edges"].push_back({static_cast<int>(i), e});
    return j.dump(2);
}

ChartGraph graph_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ChartGraph g;
    g.eps = j.at("epsilon").get<double>();
    for (const auto& v : j.at("vertices"))
        g.vertices.push_back({v.at("cell").get<int>(), v.at("ps_ell").get<std::int64_t>(),
                              v.at("pu_ell").get<std::int64_t>()});
    g.out_edges.assign(g.vertices.size(), {});
    g.in_edges.assign(g.vertices.size(), {});
    for (const auto& e : j.at("edges")) {
        const int a = e.at(0).get<int>();
        const int b = e.at(1).get<int>();
        g.out_edges[static_cast<size_t>(a)].push_back(b);
        g.in_edges[static_cast<size_t>(b)].push_back(a);
    }
    return g;
}

bool graph_equal(const ChartGraph& a, const ChartGraph& b) {
    if (a.vertices != b.vertices) return false;
    if (a.out_edges != b.out_edges) return false;
    return a.eps == b.eps;
}

} // namespace pesin
