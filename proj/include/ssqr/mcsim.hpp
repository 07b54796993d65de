#pragma once

// Round-based Monte Carlo model of the repeater satellite's memory during an
// overpass. Each register is updated only when a classical confirmation
// arrives from its ground station, i.e. every round trip 2*tau. After every
// arrival the satellite swaps youngest-with-youngest until one side is empty,
// then trims both registers to the buffer size by discarding the oldest
// qubits.

#include "ssqr/fidelity.hpp"
#include "ssqr/geometry.hpp"
#include "ssqr/linkbudget.hpp"
#include "ssqr/rates.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace ssqr::mc {

using Rng = std::mt19937_64;

/// One memory register: occupancy M[i] and loading time T[i] per slot. An
/// empty slot has M = 0 and T = 0. Occupied slots are also kept in a short
/// index list since occupancy stays near the buffer size in practice.
class Register {
public:
    explicit Register(int slots = 0);

    int size() const { return static_cast<int>(occupied_.size()); }
    int count() const { return static_cast<int>(held_.size()); }
    int empty_slots() const { return size() - count(); }
    bool occupied(int i) const { return occupied_[i] != 0; }
    double load_time(int i) const { return load_time_[i]; }
    const std::vector<int>& held() const { return held_; }

    /// Fills up to k empty slots, lowest index first; returns how many.
    int fill(int k, double load_time);
    void clear(int i);
    void clear_all();

    /// Slot with the largest (youngest) / smallest (oldest) loading time,
    /// lowest index on ties; nullopt when empty.
    std::optional<int> youngest() const;
    std::optional<int> oldest() const;

private:
    std::vector<std::uint8_t> occupied_;
    std::vector<double> load_time_;
    std::vector<int> held_;
};

/// Memory registers plus the per-step event clocks (relative to the step
/// start t0).
struct MemoryState {
    Register a;
    Register b;
    double time_a = 0.0;
    double time_b = 0.0;
    double t_internal = 0.0;

    MemoryState(int slots_a, int slots_b) : a(slots_a), b(slots_b) {}
};

/// Channel parameters frozen for one time step.
struct StepLink {
    double eta_a = 0.0;
    double eta_b = 0.0;
    double tau_a = 0.0;  ///< one-way delay, s
    double tau_b = 0.0;

    static StepLink from_sample(const geo::LinkSample& sample);
};

struct SwapEvent {
    double t = 0.0;
    double wait_a = 0.0;
    double wait_b = 0.0;
    double fidelity = 0.0;
    bool bsm_success = false;
};

struct McConfig {
    double dt_s = 1.0;
    int buffer_size = 5;
    int trials = 1000;
    std::uint64_t seed = 1;
    rates::AllocationPolicy allocation = rates::AllocationPolicy::optimal_static;
    fidelity::MemoryModel memory;
    double coincidence_s = 1e-9;  ///< arrivals closer than this are simultaneous
    unsigned threads = 0;

    void validate() const;
};

/// Confirmed loads of one generation event.
struct GenerationResult {
    int filled_a = 0;
    int filled_b = 0;
    bool arrived_a = false;
    bool arrived_b = false;
};

/// Advances t_internal to the next classical arrival. Each arriving side
/// draws Binomial(empty slots, eta * eta_mem) successes, fills them with
/// loading time t0 + t_internal - 2 tau and advances its clock by 2 tau.
GenerationResult entanglement_generation(MemoryState& state, const StepLink& link, double t0, double eta_mem,
                                         double coincidence_s, Rng& rng);

/// Swaps youngest-with-youngest at time `now` while both registers hold a
/// qubit. Each swap consumes both qubits; the BSM succeeds with probability
/// bsm_success. Appends one event per swap and returns the number of swaps.
int entanglement_swapping(MemoryState& state, double now, double bsm_success, double dephasing_time_s, Rng& rng,
                          std::vector<SwapEvent>& events);

/// Discards oldest qubits until count() <= buffer; returns how many.
int trim_to_buffer(Register& reg, int buffer);

struct StepOutput {
    int swaps = 0;
    int successes = 0;  ///< N_SSQR
    int confirmed_a = 0;
    int confirmed_b = 0;
    int discarded_a = 0;
    int discarded_b = 0;
    double t_end = 0.0;  ///< t0 + final t_internal; start of the next step
};

/// Algorithm 1: swap, trim A, trim B, generate, until t_internal > dt.
StepOutput run_time_step(MemoryState& state, const StepLink& link, double t0, const McConfig& cfg,
                         double bsm_success, Rng& rng, std::vector<SwapEvent>& events);

struct StepSummary {
    double t_start = 0.0;
    double eta_a = 0.0;
    double eta_b = 0.0;
    double tau_a = 0.0;
    double tau_b = 0.0;
    StepOutput out;
};

struct TrialRecord {
    int trial_id = 0;
    std::uint64_t seed = 0;
    int slots_a = 0;
    int slots_b = 0;
    std::vector<SwapEvent> events;
    std::vector<StepSummary> steps;
    long long n_ssqr = 0;  ///< successful swaps
    long long swaps = 0;
};

/// Simulates one overpass with a fixed allocation.
class OverpassSimulator {
public:
    OverpassSimulator(const geo::OverpassSpec& spec, const link::OpticsParams& optics,
                      const rates::ProtocolParams& params, McConfig cfg);

    int slots_a() const { return slots_a_; }
    int slots_b() const { return slots_b_; }
    const std::optional<geo::VisibilityWindow>& window() const { return pass_.window(); }
    const McConfig& config() const { return cfg_; }

    StepLink link_at(double t) const;
    /// Empty record when there is no dual visibility. Trial i uses an
    /// independent generator seeded with cfg.seed + i.
    TrialRecord run_trial(int trial_id) const;

private:
    rates::PassEvaluator pass_;
    rates::ProtocolParams params_;
    McConfig cfg_;
    int slots_a_ = 0;
    int slots_b_ = 0;
};

TrialRecord run_overpass(const geo::OverpassSpec& spec, const link::OpticsParams& optics,
                         const rates::ProtocolParams& params, const McConfig& cfg, int trial_id = 0);

/// Runs cfg.trials trials in parallel. `sink` receives each record exactly
/// once, serialized (never concurrently), in completion order. Returns the
/// per-trial successful swap counts indexed by trial.
std::vector<long long> run_trials(const OverpassSimulator& sim, const std::function<void(TrialRecord&&)>& sink);

}  // namespace ssqr::mc
