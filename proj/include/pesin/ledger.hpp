#pragma once

#include <cstdint>
#include <string>

namespace pesin {

// Chart sizes live on the exponential grid I_eps = {e^{-l*eps/3} : l >= 1}.
// The literal-constants chart radius underflows any float (eps = 0.05 gives
// ~1e-117), so every size is carried as the integer exponent l plus eps;
// comparisons, the e^eps step, and the min/clamp recursions are exact
// integer operations.
class SizeLedger {
public:
    SizeLedger() = default;
    SizeLedger(std::int64_t ell, double epsilon);

    std::int64_t ell() const { return ell_; }
    double epsilon() const { return eps_; }

    // exact: -ell*eps/3
    double log_value() const { return -static_cast<double>(ell_) * eps_ / 3.0; }
    // e^{-ell*eps/3}; may underflow to 0 for literal-mode ledgers
    double value() const;

    // multiplication by e^eps moves three grid steps up, clamped at l = 1
    SizeLedger times_e_eps() const;
    // min of represented values = max of indices
    SizeLedger min_with(const SizeLedger& o) const;

    bool operator==(const SizeLedger& o) const { return ell_ == o.ell_; }
    bool operator!=(const SizeLedger& o) const { return ell_ != o.ell_; }
    // value comparison (reversed index order)
    bool operator<(const SizeLedger& o) const { return ell_ > o.ell_; }
    bool operator<=(const SizeLedger& o) const { return ell_ >= o.ell_; }

    std::string str() const;

private:
    std::int64_t ell_ = 1;
    double eps_ = 0.0;
};

// Largest grid element with value <= e^{log_q}: l = max(1, ceil(-3*log_q/eps)).
SizeLedger ledger_from_log(double log_q, double epsilon);

// Scale constants for chart sizes.  Literal mode carries the exact values
// (Q~ = 3^{-6/beta} * eps^{90/beta} * |C^{-1}|^{-48/beta}, overlap threshold
// eta1^4*eta2^4).  Practical mode substitutes configurable exponents so the
// chart geometry has usable float extent; the inequalities BETWEEN the
// resulting quantities are still checked with the verbatim constants.
struct ChartScale {
    bool practical = false;
    // practical substitutions for (90/beta, 48/beta, 3^{6/beta}) and the
    // overlap-threshold exponent 4
    double a_eps = 2.0;
    double a_c = 2.0;
    double c0 = 1.0;
    double overlap_pow = 0.25;

    // log Q~ given eps, beta and |C_chi^{-1}(x)|
    double log_q_tilde(double eps, double beta, double c_inv_norm) const;
    // log of the overlap threshold given two chart radii (log values)
    double log_overlap_threshold(double log_eta1, double log_eta2) const;

    static ChartScale literal() { return ChartScale{}; }
    static ChartScale practical_default() {
        ChartScale s;
        s.practical = true;
        return s;
    }
};

} // namespace pesin
