#include "ssqr/fidelity.hpp"

#include <cmath>
#include <stdexcept>

namespace ssqr::fidelity {

void MemoryModel::validate() const {
    if (!(dephasing_time_s > 0.0)) throw std::invalid_argument("dephasing_time_s must be > 0");
    if (!(efficiency > 0.0 && efficiency <= 1.0)) throw std::invalid_argument("efficiency must lie in (0, 1]");
}

double dephasing_lambda(double t, double tau) {
    if (!(t >= 0.0)) throw std::domain_error("storage time must be >= 0");
    if (!(tau > 0.0)) throw std::domain_error("dephasing time must be > 0");
    if (std::isinf(tau)) return 0.0;
    return -0.5 * std::expm1(-t / tau);
}

BellDiagonal swapped_state(double t_a, double t_b, double tau) {
    dephasing_lambda(t_a, tau);
    dephasing_lambda(t_b, tau);
    BellDiagonal s;
    if (std::isinf(tau)) return s;
    // l_a l_b + (1 - l_a)(1 - l_b) with 1 - 2 l = exp(-t / tau); this form
    // cannot round below 1/2.
    s.phi_minus = -0.5 * std::expm1(-(t_a + t_b) / tau);
    s.phi_plus = 1.0 - s.phi_minus;
    return s;
}

double swap_fidelity(double t_a, double t_b, double tau) { return swapped_state(t_a, t_b, tau).phi_plus; }

}  // namespace ssqr::fidelity
