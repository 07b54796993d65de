#pragma once

// Instantaneous pair distribution rates for direct dual downlink (DDDL) and
// the single-satellite repeater (SSQR), their integrals over an overpass
// (pair distribution volume, PDV), the static memory split and crossover
// capacities.

#include "ssqr/geometry.hpp"
#include "ssqr/linkbudget.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace ssqr::rates {

enum class Protocol { dddl, ssqr };

/// How an SSQR memory of N_sat slots is divided between the two links.
///  equal: N/2 each; optimal_static: brute-force best split for the pass;
///  fixed: use ProtocolParams::slots_a/slots_b as given.
enum class AllocationPolicy { equal, optimal_static, fixed };

struct ProtocolParams {
    double source_rate_dddl = 5.9e6;  ///< pairs/s
    int memory_slots = 200;           ///< N_sat
    int slots_a = 100;
    int slots_b = 100;
    double bsm_success = 0.5;

    void validate() const;
    /// Same parameters with allocation (slots_a, memory_slots - slots_a).
    ProtocolParams with_split(int slots_a) const;
    /// Capacity n split evenly (A gets the floor).
    ProtocolParams with_capacity(int n) const;
};

struct RateSample {
    double t = 0.0;
    double dddl = 0.0;
    double link_a = 0.0;
    double link_b = 0.0;
    double ssqr = 0.0;
};

struct PdvResult {
    double pdv = 0.0;
    std::optional<geo::VisibilityWindow> window;
    int slots_a = 0;
    int slots_b = 0;
};

struct SplitResult {
    int slots_a = 0;
    int slots_b = 0;
    PdvResult result;
};

struct IntegrationOptions {
    double max_step_s = 1.0;
    double rel_tol = 1e-6;
};

double one_way_delay(double range_km);
double dddl_rate(double eta_a, double eta_b, double source_rate);
/// Mean successes per round over the round-trip time: N eta / (2 tau).
double ssqr_link_rate(int slots, double eta, double one_way_delay_s);
/// Same with an explicit attempt rate per slot instead of 1/(2 tau).
double ssqr_link_rate_at(int slots, double eta, double attempt_rate);
/// p_BSM * min(R_A, R_B) with tau from the sample ranges. The sample must
/// carry transmittances (link::attach_transmittance).
double ssqr_rate(const geo::LinkSample& sample, const ProtocolParams& params);
RateSample rate_sample(const geo::LinkSample& sample, const ProtocolParams& params);

/// Adaptive Simpson quadrature on panels no wider than max_step_s.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const IntegrationOptions& opts = {});

/// Caches the visibility window and a uniform sampling of per-slot link
/// rates for one overpass so that many allocations can be scored cheaply.
class PassEvaluator {
public:
    PassEvaluator(const geo::OverpassSpec& spec, const link::OpticsParams& optics,
                  double grid_step_s = 0.25, IntegrationOptions opts = {});
    PassEvaluator(geo::PassGeometry geometry, const link::OpticsParams& optics,
                  double grid_step_s = 0.25, IntegrationOptions opts = {});

    const std::optional<geo::VisibilityWindow>& window() const { return window_; }
    const geo::PassGeometry& geometry() const { return geometry_; }
    const link::OpticsParams& optics() const { return optics_; }

    geo::LinkSample sample(double t) const;

    double dddl_pdv(double source_rate) const;
    double ssqr_pdv(int slots_a, int slots_b, double bsm_success) const;
    double pdv(const ProtocolParams& params, Protocol protocol) const;

    /// Trapezoid PDV on the cached grid, for ranking allocations.
    double ssqr_pdv_grid(int slots_a, int slots_b, double bsm_success) const;
    /// Brute force over slots_a in [0, n]; ties go to the split nearest n/2.
    int best_split_grid(int n) const;

    SplitResult optimize_split(const ProtocolParams& params) const;

private:
    void build_grid(double grid_step_s);

    geo::PassGeometry geometry_;
    link::OpticsParams optics_;
    IntegrationOptions opts_;
    std::optional<geo::VisibilityWindow> window_;
    std::vector<double> unit_a_;  // eta_a / (2 tau_a) on the grid
    std::vector<double> unit_b_;
    std::vector<double> weights_;  // trapezoid weights
};

PdvResult pdv(const geo::OverpassSpec& spec, const link::OpticsParams& optics,
              const ProtocolParams& params, Protocol protocol);

SplitResult optimize_static_split(const geo::OverpassSpec& spec, const link::OpticsParams& optics,
                                  const ProtocolParams& params);

/// Smallest N_sat (optimal split) with SSQR PDV >= DDDL PDV, or nullopt
/// when no such N exists up to max_slots. Throws std::domain_error if the
/// DDDL PDV is zero.
std::optional<int> crossover_capacity(const geo::OverpassSpec& spec, const link::OpticsParams& optics,
                                      const ProtocolParams& params, int max_slots = 1 << 17);
std::optional<int> crossover_capacity(const PassEvaluator& pass, const ProtocolParams& params,
                                      int max_slots = 1 << 17);

/// Normalised crossover capacity in modes per MHz of DDDL source rate,
/// rounded up to an even integer. Uses the optimal split at memory_slots.
int nu_c(const geo::OverpassSpec& spec, const link::OpticsParams& optics, const ProtocolParams& params);
int nu_c(const PassEvaluator& pass, const ProtocolParams& params);
int round_up_even(double x);

/// System loss metric at which DDDL and SSQR (optimal split) PDVs are equal.
/// Below it DDDL wins. nullopt if there is no sign change in [lo_db, hi_db].
std::optional<double> loss_crossover_db(const geo::OverpassSpec& spec, const link::OpticsParams& optics,
                                        const ProtocolParams& params, double lo_db = 20.0,
                                        double hi_db = 40.0);

}  // namespace ssqr::rates
