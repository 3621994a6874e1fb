#include "pesin/ledger.hpp"

#include <cmath>

#include "pesin/errors.hpp"

namespace pesin {

SizeLedger::SizeLedger(std::int64_t ell, double epsilon) : ell_(ell), eps_(epsilon) {
    if (ell_ < 1) throw InfeasibleInput("ledger index must be >= 1");
    if (!(epsilon > 0.0) || epsilon >= 1.0)
        throw InfeasibleInput("ledger epsilon must lie in (0,1)");
}

double SizeLedger::value() const { return std::exp(log_value()); }

SizeLedger SizeLedger::times_e_eps() const {
    return SizeLedger(std::max<std::int64_t>(1, ell_ - 3), eps_);
}

SizeLedger SizeLedger::min_with(const SizeLedger& o) const {
    return SizeLedger(std::max(ell_, o.ell_), eps_);
}

std::string SizeLedger::str() const {
    return "e^{-" + std::to_string(ell_) + "*eps/3}";
}

SizeLedger ledger_from_log(double log_q, double epsilon) {
    const double raw = -3.0 * log_q / epsilon;
    // absorb the few-ulp rounding of the log/ratio so grid values round-trip
    const double nudge = 1e-12 + 1e-14 * std::abs(raw);
    std::int64_t ell = static_cast<std::int64_t>(std::ceil(raw - nudge));
    if (ell < 1) ell = 1;
    return SizeLedger(ell, epsilon);
}

double ChartScale::log_q_tilde(double eps, double beta, double c_inv_norm) const {
    if (practical)
        return -std::log(c0) + a_eps * std::log(eps) - a_c * std::log(c_inv_norm);
    return -(6.0 / beta) * std::log(3.0) + (90.0 / beta) * std::log(eps) -
           (48.0 / beta) * std::log(c_inv_norm);
}

double ChartScale::log_overlap_threshold(double log_eta1, double log_eta2) const {
    const double p = practical ? overlap_pow : 4.0;
    return p * (log_eta1 + log_eta2);
}

} // namespace pesin
