#pragma once

// Dephasing of satellite-held memory qubits and the fidelity of the
// Alice-Bob pair produced by swapping two dephased Bell pairs.

#include "ssqr/constants.hpp"

namespace ssqr::fidelity {

struct MemoryModel {
    double dephasing_time_s = kInfinity;  ///< 1/e time; infinity = no dephasing
    double efficiency = 1.0;              ///< storage/retrieval efficiency

    void validate() const;
};

/// Phase-flip probability after storage time t: (1 - exp(-t/tau)) / 2.
/// Throws std::domain_error for t < 0.
double dephasing_lambda(double t_s, double dephasing_time_s);

/// Weights of the Bell-diagonal post-swap state; phi_plus + phi_minus = 1.
struct BellDiagonal {
    double phi_plus = 1.0;
    double phi_minus = 0.0;
};

BellDiagonal swapped_state(double t_a_s, double t_b_s, double dephasing_time_s);
double swap_fidelity(double t_a_s, double t_b_s, double dephasing_time_s);

/// A two-qubit state with fidelity above 1/2 is entangled.
constexpr bool is_entangled(double fidelity) { return fidelity > 0.5; }

}  // namespace ssqr::fidelity
