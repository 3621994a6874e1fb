#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pesin/manifold.hpp"

namespace pesin {

struct EdgeReport {
    bool ok = false;
    bool overlap_tail = false; // psi_x^{p^s^p^u} with psi_{f^-1(y)}
    bool overlap_head = false; // psi_{f(x)}^{q^s^q^u} with psi_y
    bool ledger_u = false;     // l(q^u) = max{l(p^u)-3, l(Q_eps(y))}
    bool ledger_s = false;     // l(p^s) = max{l(q^s)-3, l(Q_eps(x))}
    bool s_match = false;
};

// Edge relation between double charts (four clauses; the ledger clauses are
// exact integer identities).  bwd_of_w is the Pesin chart at f^{-1}(y),
// fwd_of_v the chart at f(x); both etas are capped at their own Q_eps.
EdgeReport edge_test(const DoubleChart& v, const DoubleChart& w, const PesinChart& fwd_of_v,
                     const PesinChart& bwd_of_w, const ChartScale& scale);

// Quantization cell key: position lattice, frame lattice, Q-ledger, s-index.
struct CellKey {
    std::vector<std::int64_t> pos;
    std::vector<std::int64_t> frame;
    std::int64_t q_ell = 0;
    int s_index = 0;
    auto operator<=>(const CellKey&) const = default;
};

struct AlphabetOptions {
    double delta_x = 0.0;  // position lattice spacing (0: eps^4/4)
    double delta_c = 0.0;  // frame lattice spacing (0: eps^2)
    std::int64_t pair_depth = 8; // admitted ledger offsets above l(Q) per side
    std::uint64_t seed = 0;      // lattice shift seed
    int window = 64;             // oseledets window for representative frames
    double tol = 1e-12;
};

// One representative Pesin chart per visited quantization cell, plus the
// census data needed for the finiteness checks.  Vertices are (cell, ledger
// pair) with pair offsets in [0, pair_depth].
class Alphabet {
public:
    struct Entry {
        CellKey key;
        PesinChart chart; // eta initialized to Q_eps
        PesinChart fwd;   // chart at f(x), for edge clause (ii)
        PesinChart bwd;   // chart at f^{-1}(x), for edge clause (i)
    };

    std::vector<Entry> entries;
    double eps = 0.0;
    double beta = 1.0;
    ChartScale scale;
    AlphabetOptions opt;

    // census: number of charts with Q_eps value > t
    int census_above(double log_t) const;
    // number of vertices (chart, p^s, p^u) with p^s^p^u >= given ledger value
    std::int64_t vertex_census_at_least(const SizeLedger& threshold) const;

    std::optional<int> find_cell(const CellKey& key) const;
    CellKey quantize(const PesinChart& chart) const;
};

// Builds the truncated coarse-grained alphabet from sampled orbit points.
Alphabet build_alphabet(const SmoothSystem& sys,
                        const std::vector<TorusPoint>& samples, double eps, double chi,
                        double beta, const ChartScale& scale, const AlphabetOptions& opt);

// eps-subordinated size pairs over a finite window: forward pass
// p^u_{k+1} = min{e^eps p^u_k, Q_{k+1}} initialized at q on the left end,
// backward pass for p^s initialized at q on the right end.
struct SubordinatedPair {
    std::vector<SizeLedger> p_s;
    std::vector<SizeLedger> p_u;
    bool u_saturates = false; // p^u hits Q somewhere in each half-window
    bool s_saturates = false;
};
SubordinatedPair subordinate_fill(const std::vector<SizeLedger>& q_cap,
                                  const std::vector<SizeLedger>& q_seed);

// A finite-window eps-chain of alphabet vertices.
struct Chain {
    std::vector<DoubleChart> vertices;
    int center = 0; // index of chain position 0
    std::vector<int> cell_ids; // alphabet entry per vertex (-1 if ad hoc)

    const DoubleChart& at(int k) const {
        return vertices.at(static_cast<size_t>(center + k));
    }
    int min_index() const { return -center; }
    int max_index() const { return static_cast<int>(vertices.size()) - 1 - center; }

    // recurrence tags: a vertex repeated >= 2 times in each half-window
    bool recurrent() const;
};

struct ChainOptions {
    int tempering_window = 16;
    int oseledets_window = 64;
    int burn_in = 0; // extra indices computed then trimmed on both sides (0: auto)
    double tol = 1e-12;
    bool extend_alphabet = true; // false: NoVertexFound on missing cells
};

// Converts a finite orbit into an eps-chain through the alphabet: selects a
// representative per index (overlap + Q-ratio + s-index), sizes by
// subordinate_fill of the tempered sizes, consecutive edges verified.
Chain orbit_to_chain(const SmoothSystem& sys, Alphabet& alphabet, const TorusPoint& x,
                     int n_back, int n_fwd, double chi, const ChainOptions& opt);

// The finite truncated double-chart graph.
struct ChartGraph {
    struct Vertex {
        int cell = 0; // alphabet entry
        std::int64_t ps_ell = 0;
        std::int64_t pu_ell = 0;
        auto operator<=>(const Vertex&) const = default;
    };
    std::vector<Vertex> vertices;
    std::vector<std::vector<int>> out_edges;
    std::vector<std::vector<int>> in_edges;
    double eps = 0.0;

    DoubleChart materialize(const Alphabet& alphabet, int vertex_id) const;
};

// Materializes vertices = cells x admitted ledger pairs (offsets within
// pair_depth) and connects them with edge_test.
ChartGraph build_graph(const Alphabet& alphabet);

// Iteratively removes vertices with zero in- or out-degree; idempotent.
void prune_graph(ChartGraph& g);

std::string graph_to_dot(const ChartGraph& g, const Alphabet& alphabet);
std::string graph_to_json(const ChartGraph& g, const Alphabet& alphabet);
ChartGraph graph_from_json(const std::string& text);
bool graph_equal(const ChartGraph& a, const ChartGraph& b);

} // namespace pesin
