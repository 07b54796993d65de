#include "ssqr/mcsim.hpp"

#include "ssqr/parallel.hpp"

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace ssqr::mc {

Register::Register(int slots) {
    if (slots < 0) throw std::invalid_argument("register size must be >= 0");
    occupied_.assign(static_cast<std::size_t>(slots), 0);
    load_time_.assign(static_cast<std::size_t>(slots), 0.0);
}

int Register::fill(int k, double t) {
    int filled = 0;
    for (int i = 0; i < size() && filled < k; ++i) {
        if (occupied_[i]) continue;
        occupied_[i] = 1;
        load_time_[i] = t;
        held_.push_back(i);
        ++filled;
    }
    return filled;
}

void Register::clear(int i) {
    if (!occupied_[i]) return;
    occupied_[i] = 0;
    load_time_[i] = 0.0;
    auto it = std::find(held_.begin(), held_.end(), i);
    *it = held_.back();
    held_.pop_back();
}

void Register::clear_all() {
    for (int i : held_) {
        occupied_[i] = 0;
        load_time_[i] = 0.0;
    }
    held_.clear();
}

std::optional<int> Register::youngest() const {
    std::optional<int> best;
    for (int i : held_) {
        if (!best || load_time_[i] > load_time_[*best] || (load_time_[i] == load_time_[*best] && i < *best))
            best = i;
    }
    return best;
}

std::optional<int> Register::oldest() const {
    std::optional<int> best;
    for (int i : held_) {
        if (!best || load_time_[i] < load_time_[*best] || (load_time_[i] == load_time_[*best] && i < *best))
            best = i;
    }
    return best;
}

StepLink StepLink::from_sample(const geo::LinkSample& s) {
    return {s.eta_a, s.eta_b, rates::one_way_delay(s.range_a_km), rates::one_way_delay(s.range_b_km)};
}

void McConfig::validate() const {
    if (!(dt_s > 0.0)) throw std::invalid_argument("dt_s must be > 0");
    if (buffer_size < 0) throw std::invalid_argument("buffer_size must be >= 0");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (!(coincidence_s >= 0.0)) throw std::invalid_argument("coincidence_s must be >= 0");
    memory.validate();
}

namespace {

int draw_successes(int trials, double p, Rng& rng) {
    if (trials <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return trials;
    return std::binomial_distribution<int>(trials, p)(rng);
}

}  // namespace

GenerationResult entanglement_generation(MemoryState& s, const StepLink& link, double t0, double eta_mem,
                                         double coincidence_s, Rng& rng) {
    GenerationResult r;
    const double next = std::min(s.time_a, s.time_b);
    s.t_internal = next;
    r.arrived_a = s.time_a <= next + coincidence_s;
    r.arrived_b = s.time_b <= next + coincidence_s;
    if (r.arrived_a) {
        const int k = draw_successes(s.a.empty_slots(), link.eta_a * eta_mem, rng);
        r.filled_a = s.a.fill(k, t0 + s.t_internal - 2.0 * link.tau_a);
        s.time_a += 2.0 * link.tau_a;
    }
    if (r.arrived_b) {
        const int k = draw_successes(s.b.empty_slots(), link.eta_b * eta_mem, rng);
        r.filled_b = s.b.fill(k, t0 + s.t_internal - 2.0 * link.tau_b);
        s.time_b += 2.0 * link.tau_b;
    }
    return r;
}

int entanglement_swapping(MemoryState& s, double now, double bsm_success, double dephasing_time_s, Rng& rng,
                          std::vector<SwapEvent>& events) {
    int swaps = 0;
    std::bernoulli_distribution bsm(bsm_success);
    while (s.a.count() > 0 && s.b.count() > 0) {
        const int ia = *s.a.youngest();
        const int ib = *s.b.youngest();
        SwapEvent e;
        e.t = now;
        e.wait_a = now - s.a.load_time(ia);
        e.wait_b = now - s.b.load_time(ib);
        e.fidelity = fidelity::swap_fidelity(e.wait_a, e.wait_b, dephasing_time_s);
        e.bsm_success = bsm(rng);
        s.a.clear(ia);
        s.b.clear(ib);
        events.push_back(e);
        ++swaps;
    }
    return swaps;
}

int trim_to_buffer(Register& reg, int buffer) {
    if (buffer < 0) throw std::invalid_argument("buffer size must be >= 0");
    int discarded = 0;
    while (reg.count() > buffer) {
        reg.clear(*reg.oldest());
        ++discarded;
    }
    return discarded;
}

StepOutput run_time_step(MemoryState& s, const StepLink& link, double t0, const McConfig& cfg, double bsm_success,
                         Rng& rng, std::vector<SwapEvent>& events) {
    if (!(link.tau_a > 0.0 && link.tau_b > 0.0)) throw std::invalid_argument("link delays must be > 0");
    StepOutput out;
    s.t_internal = 0.0;
    s.time_a = 2.0 * link.tau_a;
    s.time_b = 2.0 * link.tau_b;
    const auto first = events.size();
    while (s.t_internal <= cfg.dt_s) {
        out.swaps += entanglement_swapping(s, t0 + s.t_internal, bsm_success, cfg.memory.dephasing_time_s, rng,
                                           events);
        out.discarded_a += trim_to_buffer(s.a, cfg.buffer_size);
        out.discarded_b += trim_to_buffer(s.b, cfg.buffer_size);
        const auto g = entanglement_generation(s, link, t0, cfg.memory.efficiency, cfg.coincidence_s, rng);
        out.confirmed_a += g.filled_a;
        out.confirmed_b += g.filled_b;
    }
    for (auto i = first; i < events.size(); ++i) out.successes += events[i].bsm_success ? 1 : 0;
    out.t_end = t0 + s.t_internal;
    return out;
}

OverpassSimulator::OverpassSimulator(const geo::OverpassSpec& spec, const link::OpticsParams& optics,
                                     const rates::ProtocolParams& params, McConfig cfg)
    : pass_(spec, optics), params_(params), cfg_(cfg) {
    params_.validate();
    cfg_.validate();
    const int n = params_.memory_slots;
    switch (cfg_.allocation) {
        case rates::AllocationPolicy::equal:
            slots_a_ = n / 2;
            slots_b_ = n - n / 2;
            break;
        case rates::AllocationPolicy::fixed:
            slots_a_ = params_.slots_a;
            slots_b_ = params_.slots_b;
            break;
        case rates::AllocationPolicy::optimal_static:
            if (pass_.window()) {
                const auto split = pass_.optimize_split(params_);
                slots_a_ = split.slots_a;
                slots_b_ = split.slots_b;
            } else {
                slots_a_ = n / 2;
                slots_b_ = n - n / 2;
            }
            break;
    }
}

StepLink OverpassSimulator::link_at(double t) const { return StepLink::from_sample(pass_.sample(t)); }

TrialRecord OverpassSimulator::run_trial(int trial_id) const {
    TrialRecord rec;
    rec.trial_id = trial_id;
    rec.seed = cfg_.seed + static_cast<std::uint64_t>(trial_id);
    rec.slots_a = slots_a_;
    rec.slots_b = slots_b_;
    const auto& window = pass_.window();
    if (!window) return rec;

    Rng rng(rec.seed);
    MemoryState state(slots_a_, slots_b_);
    double t0 = window->t_start;
    while (t0 < window->t_end) {
        const StepLink link = link_at(t0);
        StepSummary step{t0, link.eta_a, link.eta_b, link.tau_a, link.tau_b, {}};
        step.out = run_time_step(state, link, t0, cfg_, params_.bsm_success, rng, rec.events);
        rec.n_ssqr += step.out.successes;
        rec.swaps += step.out.swaps;
        t0 = step.out.t_end;
        rec.steps.push_back(step);
    }
    return rec;
}

TrialRecord run_overpass(const geo::OverpassSpec& spec, const link::OpticsParams& optics,
                         const rates::ProtocolParams& params, const McConfig& cfg, int trial_id) {
    return OverpassSimulator(spec, optics, params, cfg).run_trial(trial_id);
}

std::vector<long long> run_trials(const OverpassSimulator& sim, const std::function<void(TrialRecord&&)>& sink) {
    const auto n = static_cast<std::size_t>(sim.config().trials);
    std::vector<long long> counts(n, 0);
    std::mutex sink_mutex;
    parallel_for(n, sim.config().threads, [&](std::size_t i) {
        TrialRecord rec = sim.run_trial(static_cast<int>(i));
        counts[i] = rec.n_ssqr;
        if (sink) {
            std::lock_guard lock(sink_mutex);
            sink(std::move(rec));
        }
    });
    return counts;
}

}  // namespace ssqr::mc
