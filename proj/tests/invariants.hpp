#pragma once

// Randomised micro-step driver for the memory state machine. Each
// micro-step is one pass of the Algorithm 1 loop body (swap, trim A, trim B,
// generate) and is checked against sort-based oracles. Shared by the unit
// tests and the acceptance binary.

#include "ssqr/fidelity.hpp"
#include "ssqr/mcsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace ssqr::testing {

struct InvariantReport {
    long long micro_steps = 0;
    long long swaps = 0;
    long long violations = 0;
    std::string first_violation;
    bool deterministic = true;
};

namespace detail {

inline std::vector<double> loads(const mc::Register& r) {
    std::vector<double> v;
    for (int i : r.held()) v.push_back(r.load_time(i));
    std::sort(v.begin(), v.end());
    return v;
}

inline bool consistent(const mc::Register& r) {
    int held = 0;
    for (int i = 0; i < r.size(); ++i) {
        if (r.occupied(i)) {
            ++held;
        } else if (r.load_time(i) != 0.0) {
            return false;
        }
    }
    return held == r.count() && r.count() <= r.size();
}

// Floor 2 tau recorded per loading time; lookup tolerates rounding.
inline double floor_for(const std::map<double, double>& floors, double load) {
    auto it = floors.lower_bound(load - 1e-9);
    if (it == floors.end() || std::abs(it->first - load) > 1e-9) return -1.0;
    return it->second;
}

struct Run {
    std::vector<mc::SwapEvent> events;
};

}  // namespace detail

/// Runs `scenarios` random configurations of `steps` micro-steps each. The
/// link is redrawn every `steps_per_link` micro-steps, resetting the clocks
/// as at the start of a time step.
inline InvariantReport check_micro_steps(int scenarios, int steps, std::uint64_t seed, int steps_per_link = 10) {
    InvariantReport rep;
    auto fail = [&](const std::string& what) {
        if (rep.violations++ == 0) rep.first_violation = what;
    };

    auto run_scenario = [&](std::uint64_t s, bool check, detail::Run& out) {
        std::mt19937_64 pick(s);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const int na = 1 + static_cast<int>(u(pick) * 30);
        const int nb = 1 + static_cast<int>(u(pick) * 30);
        const int buffer = static_cast<int>(u(pick) * 9);
        const double p_bsm = 0.2 + 0.8 * u(pick);
        const double tau_mem = u(pick) < 0.2 ? kInfinity : std::pow(10.0, -3.0 + 3.0 * u(pick));
        mc::Rng rng(s ^ 0x9e3779b97f4a7c15ULL);
        mc::MemoryState st(na, nb);
        std::map<double, double> floor_a, floor_b;
        mc::StepLink link;
        double t0 = 0.0;
        for (int k = 0; k < steps; ++k) {
            if (k % steps_per_link == 0) {
                t0 += st.t_internal;
                link.eta_a = u(pick) < 0.1 ? 0.0 : std::pow(10.0, -3.0 * u(pick));
                link.eta_b = u(pick) < 0.1 ? 0.0 : std::pow(10.0, -3.0 * u(pick));
                link.tau_a = 1e-3 + 5e-3 * u(pick);
                link.tau_b = 1e-3 + 5e-3 * u(pick);
                st.t_internal = 0.0;
                st.time_a = 2 * link.tau_a;
                st.time_b = 2 * link.tau_b;
            }
            const double now = t0 + st.t_internal;

            // Swap: k-th youngest on A pairs with k-th youngest on B.
            const auto la = detail::loads(st.a);
            const auto lb = detail::loads(st.b);
            const auto before = out.events.size();
            mc::entanglement_swapping(st, now, p_bsm, tau_mem, rng, out.events);
            if (check) {
                ++rep.micro_steps;
                const auto m = std::min(la.size(), lb.size());
                if (out.events.size() - before != m) fail("swap count differs from min(count_A, count_B)");
                if (std::min(st.a.count(), st.b.count()) != 0) fail("both registers nonempty after swapping");
                for (std::size_t j = 0; j < m && before + j < out.events.size(); ++j) {
                    const auto& e = out.events[before + j];
                    ++rep.swaps;
                    if (e.wait_a != now - la[la.size() - 1 - j] || e.wait_b != now - lb[lb.size() - 1 - j])
                        fail("swap did not take the youngest qubits");
                    const double fa = detail::floor_for(floor_a, la[la.size() - 1 - j]);
                    const double fb = detail::floor_for(floor_b, lb[lb.size() - 1 - j]);
                    if (!(e.wait_a >= fa - 1e-12) || !(e.wait_b >= fb - 1e-12)) fail("wait below round trip");
                    if (std::isinf(tau_mem) ? e.fidelity != 1.0 : !(e.fidelity >= 0.5 && e.fidelity < 1.0))
                        fail("fidelity outside [1/2, 1)");
                    if (e.fidelity != fidelity::swap_fidelity(e.wait_a, e.wait_b, tau_mem))
                        fail("fidelity differs from the closed form");
                }
            }

            // Trim: survivors are the `buffer` largest loading times.
            for (auto* reg : {&st.a, &st.b}) {
                auto expect = detail::loads(*reg);
                if (static_cast<int>(expect.size()) > buffer)
                    expect.erase(expect.begin(), expect.end() - buffer);
                mc::trim_to_buffer(*reg, buffer);
                if (check && (detail::loads(*reg) != expect || reg->count() > buffer))
                    fail("trim did not keep the youngest qubits");
            }

            // Generate.
            const int ca = st.a.count();
            const int cb = st.b.count();
            const double prev = st.t_internal;
            const auto g = mc::entanglement_generation(st, link, t0, 1.0, 1e-9, rng);
            if (g.arrived_a) floor_a[t0 + st.t_internal - 2 * link.tau_a] = 2 * link.tau_a;
            if (g.arrived_b) floor_b[t0 + st.t_internal - 2 * link.tau_b] = 2 * link.tau_b;
            if (check) {
                if (!(st.t_internal > prev)) fail("clock did not advance");
                if (st.a.count() != ca + g.filled_a || st.b.count() != cb + g.filled_b) fail("fill count mismatch");
                if (!g.arrived_a && g.filled_a) fail("filled without an arrival");
                if (!detail::consistent(st.a) || !detail::consistent(st.b)) fail("occupancy/time arrays disagree");
            }
        }
    };

    for (int i = 0; i < scenarios; ++i) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
        detail::Run first, second;
        run_scenario(s, true, first);
        if (i % 10 == 0) {
            run_scenario(s, false, second);
            const bool same = first.events.size() == second.events.size() &&
                              std::equal(first.events.begin(), first.events.end(), second.events.begin(),
                                         [](const auto& x, const auto& y) {
                                             return x.t == y.t && x.wait_a == y.wait_a && x.wait_b == y.wait_b &&
                                                    x.fidelity == y.fidelity && x.bsm_success == y.bsm_success;
                                         });
            if (!same) rep.deterministic = false;
        }
    }
    return rep;
}

struct AsymmetryReport {
    long long swap_instants = 0;  ///< instants with a rate ratio >= 1.5
    long long slower_surplus = 0;  ///< ... after which the slower side still holds qubits
    long long faster_surplus = 0;

    double slower_fraction() const { return swap_instants ? double(slower_surplus) / swap_instants : 0.0; }
    double faster_fraction() const { return swap_instants ? double(faster_surplus) / swap_instants : 0.0; }
};

/// Replays run_time_step's loop over a real overpass and records, after
/// every swap phase, which side kept a surplus.
inline AsymmetryReport accumulation_asymmetry(const mc::OverpassSimulator& sim, int trials, double bsm_success) {
    AsymmetryReport rep;
    const auto& cfg = sim.config();
    for (int trial = 0; trial < trials; ++trial) {
        mc::Rng rng(cfg.seed + static_cast<std::uint64_t>(trial));
        mc::MemoryState st(sim.slots_a(), sim.slots_b());
        std::vector<mc::SwapEvent> events;
        double t0 = sim.window()->t_start;
        while (t0 < sim.window()->t_end) {
            const auto link = sim.link_at(t0);
            const double ra = sim.slots_a() * link.eta_a / (2 * link.tau_a);
            const double rb = sim.slots_b() * link.eta_b / (2 * link.tau_b);
            st.t_internal = 0.0;
            st.time_a = 2 * link.tau_a;
            st.time_b = 2 * link.tau_b;
            while (st.t_internal <= cfg.dt_s) {
                const int k = mc::entanglement_swapping(st, t0 + st.t_internal, bsm_success,
                                                        cfg.memory.dephasing_time_s, rng, events);
                if (k > 0 && (ra * 1.5 <= rb || rb * 1.5 <= ra)) {
                    ++rep.swap_instants;
                    if ((ra < rb ? st.a : st.b).count() > 0) ++rep.slower_surplus;
                    if ((ra < rb ? st.b : st.a).count() > 0) ++rep.faster_surplus;
                }
                mc::trim_to_buffer(st.a, cfg.buffer_size);
                mc::trim_to_buffer(st.b, cfg.buffer_size);
                mc::entanglement_generation(st, link, t0, cfg.memory.efficiency, cfg.coincidence_s, rng);
            }
            t0 += st.t_internal;
        }
    }
    return rep;
}

}  // namespace ssqr::testing
