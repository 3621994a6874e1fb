#pragma once

#include <vector>

#include "pesin/system.hpp"

namespace pesin {

// Numerically computed Oseledets data at a point: exponent estimates from a
// finite forward window and invariant subspace estimates from pushed frames.
struct SplittingData {
    TorusPoint point;
    Mat stable_basis;   // d x s, columns ordered by increasing exponent
    Mat unstable_basis; // d x (d-s)
    int s_index = 0;
    std::vector<double> exponents; // sorted ascending, nats per iterate
    int window = 0;
    double subspace_residual = 0.0; // angle drift over the last quarter window
    double frame_condition = 0.0;   // condition number of [stable|unstable]
};

struct OseledetsOptions {
    double chi_floor = 0.02;   // DegenerateSplitting below this magnitude
    double group_gap = 0.1;    // exponents closer than this share a block
};

// Lyapunov exponents by QR accumulation over the forward window (burn-in
// discarded), with block averaging of nearly equal rates: inside a block the
// individual QR diagonals oscillate (complex eigenvalue pairs), but the block
// volume sums converge, so each member gets the block mean.  Stable subspace
// is pulled back under f from the far end of the window, unstable pushed
// forward from the far past.
SplittingData oseledets(const SmoothSystem& sys, const TorusPoint& x, int window,
                        const OseledetsOptions& opt = {});

// True iff min |exponent| > chi and s_index in {1,...,d-1}.
bool nuh_test(const SplittingData& s, double chi);

// Largest principal angle between the column spans of two orthonormal frames.
double principal_angle(const Mat& a, const Mat& b);

} // namespace pesin
