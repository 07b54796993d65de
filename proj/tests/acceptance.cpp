// Acceptance run: one PASS/FAIL line per criterion, with the measured values
// and the wall time. Exits nonzero if a criterion fails that is not listed in
// kKnownGaps (or any criterion with --strict).

#include "invariants.hpp"
#include "oracles.hpp"

#include "ssqr/annual.hpp"
#include "ssqr/constants.hpp"
#include "ssqr/fidelity.hpp"
#include "ssqr/linkbudget.hpp"
#include "ssqr/mcsim.hpp"
#include "ssqr/rates.hpp"
#include "ssqr/stats.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace ssqr;

namespace {

// Criterion 9 cannot be met by this model; see the decisions ledger.
const std::set<int> kKnownGaps = {9};

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Detail {
public:
    template <class... Args>
    void add(bool ok, const char* fmt, Args... args) {
        char buf[512];
        std::snprintf(buf, sizeof buf, fmt, args...);
        add(ok, std::string(buf));
    }
    void add(bool ok, const std::string& text) {
        if (!text_.empty()) text_ += "; ";
        text_ += text;
        if (!ok) {
            text_ += " <-";
            pass_ = false;
        }
    }
    Outcome done() const { return {pass_, text_}; }

private:
    std::string text_;
    bool pass_ = true;
};

bool within(double x, double target, double tol) { return std::abs(x - target) <= tol; }

struct PassCase {
    const char* name;
    geo::OverpassSpec spec;
};

std::vector<PassCase> reference_passes() {
    return {{"zenith-zenith", geo::zenith_zenith_pass()},
            {"symmetric", geo::symmetric_pass()},
            {"zenith-a-90", geo::zenith_a90_pass()},
            {"zenith-a-45", geo::zenith_a45_pass()}};
}

Outcome c1_link_budget() {
    const link::OpticsParams o;
    Detail d;
    const double sys = link::system_loss_metric(o, 500.0);
    const double diff = link::to_db(link::diffraction_eta(500.0, o));
    d.add(within(sys, 25.9, 0.2), "system loss %.3f dB (25.9 +- 0.2)", sys);
    d.add(within(diff, 14.9, 0.2), "diffraction %.3f dB (14.9 +- 0.2)", diff);
    return d.done();
}

Outcome c2_latency() {
    Detail d;
    const double rt = 2 * rates::one_way_delay(500.0) * 1e3;
    const double r = rates::ssqr_link_rate(1, 1.0, rates::one_way_delay(500.0));
    d.add(within(rt, 3.33, 0.01), "round trip %.4f ms (3.33 +- 0.01)", rt);
    d.add(within(r, 300.0, 1.0), "single-slot attempt rate %.2f /s (300 +- 1)", r);
    return d.done();
}

Outcome c3_toy_rates() {
    Detail d;
    const double dddl = rates::dddl_rate(1e-3, 1e-3, 5.9e6);
    const double link = rates::ssqr_link_rate_at(1, 1e-3, 5.9e6);
    d.add(std::abs(dddl - 5.9) < 1e-9, "DDDL %.12g pairs/s (5.9)", dddl);
    d.add(std::abs(link - 5900.0) < 1e-9, "per-link %.12g pairs/s (5900)", link);
    return d.done();
}

Outcome c4_crossover_capacity() {
    const link::OpticsParams o;
    const rates::ProtocolParams p;
    const double nc_ref[] = {270, 100, 170, 196};
    const int nu_ref[] = {46, 18, 30, 34};
    Detail d;
    int i = 0;
    for (const auto& pc : reference_passes()) {
        const rates::PassEvaluator pass(pc.spec, o);
        const auto nc = rates::crossover_capacity(pass, p);
        const int nu = rates::nu_c(pass, p);
        d.add(nc && std::abs(*nc - nc_ref[i]) <= 0.1 * nc_ref[i], "%s N_c %d (%g +-10%%)", pc.name, nc ? *nc : -1,
              nc_ref[i]);
        d.add(std::abs(nu - nu_ref[i]) <= 4, "nu_c %d (%d +-4)", nu, nu_ref[i]);
        ++i;
    }
    return d.done();
}

Outcome c5_allocations() {
    const link::OpticsParams o;
    const rates::ProtocolParams p;
    const int ref200[] = {100, 100, 32, 71};
    const int ref2000[] = {1000, 1000, 323, 709};
    Detail d;
    int i = 0;
    for (const auto& pc : reference_passes()) {
        const rates::PassEvaluator pass(pc.spec, o);
        const int tol = i < 2 ? 0 : 10;
        const auto s200 = pass.optimize_split(p.with_capacity(200));
        const auto s2000 = pass.optimize_split(p.with_capacity(2000));
        d.add(std::abs(s200.slots_a - ref200[i]) <= tol, "%s (%d,%d) vs (%d,%d)", pc.name, s200.slots_a,
              s200.slots_b, ref200[i], 200 - ref200[i]);
        d.add(std::abs(s2000.slots_a - ref2000[i]) <= tol, "(%d,%d) vs (%d,%d)", s2000.slots_a, s2000.slots_b,
              ref2000[i], 2000 - ref2000[i]);
        ++i;
    }
    return d.done();
}

Outcome c6_loss_crossover() {
    const link::OpticsParams o;
    const rates::ProtocolParams p;
    const double ref[] = {28, 23, 26, 26};
    Detail d;
    int i = 0;
    for (const auto& pc : reference_passes()) {
        const auto x = rates::loss_crossover_db(pc.spec, o, p);
        bool sides = false;
        if (x) {
            sides = true;
            for (double off : {-1.0, 1.0}) {
                const rates::PassEvaluator pass(pc.spec, link::pin_to_system_loss(o, pc.spec.altitude_km, *x + off));
                const double dddl = pass.dddl_pdv(p.source_rate_dddl);
                const double ssqr = pass.optimize_split(p).result.pdv;
                sides = sides && (off < 0 ? dddl > ssqr : ssqr > dddl);
            }
        }
        d.add(x && within(*x, ref[i], 1.5) && sides, "%s %.2f dB (%g +- 1.5)", pc.name, x ? *x : std::nan(""), ref[i]);
        ++i;
    }
    return d.done();
}

Outcome c7_annual() {
    struct Ref {
        const char* a;
        const char* b;
        double dddl, equal, optimal, gain, gain_tol;
    };
    const Ref refs[] = {{"Paris", "Nice", 596e3, 387e3, 401e3, 4, 4},
                        {"London", "Berlin", 330e3, 294e3, 386e3, 31, 8},
                        {"Seoul", "Tokyo", 144e3, 163e3, 209e3, 29, 8},
                        {"Madrid", "Brussels", 120e3, 154e3, 158e3, 2, 4}};
    const auto catalog = annual::load_station_catalog(annual::default_catalog_path());
    const link::OpticsParams o;
    const rates::ProtocolParams p;
    annual::AnnualOptions opt;
    opt.longitude_samples = 360;
    Detail d;
    bool ordered = true;
    for (const auto& r : refs) {
        const annual::OgsPair pair(annual::find_station(catalog, r.a), annual::find_station(catalog, r.b));
        double best[3] = {0, 0, 0};
        double h_best[3] = {0, 0, 0};
        for (int h = 200; h <= 880; h += 20) {
            const auto c = annual::annual_comparison(pair, h, o, p, opt);
            const double v[3] = {c.dddl.annual, c.ssqr_equal.annual, c.ssqr_optimal.annual};
            ordered = ordered && c.ssqr_optimal.annual >= c.ssqr_equal.annual * (1 - 1e-12);
            for (int k = 0; k < 3; ++k) {
                if (v[k] > best[k]) {
                    best[k] = v[k];
                    h_best[k] = h;
                }
            }
        }
        const double gain = 100.0 * (best[2] / best[1] - 1.0);
        const double ref_v[3] = {r.dddl, r.equal, r.optimal};
        bool peaks = true;
        for (int k = 0; k < 3; ++k) peaks = peaks && std::abs(best[k] / ref_v[k] - 1.0) <= 0.25;
        d.add(h_best[1] > h_best[0] && h_best[2] > h_best[0], "%s h_opt DDDL %.0f < SSQR %.0f/%.0f km",
              pair.name().c_str(), h_best[0], h_best[1], h_best[2]);
        d.add(within(gain, r.gain, r.gain_tol), "gain %.1f%% (%g +- %g)", gain, r.gain, r.gain_tol);
        d.add(peaks, "peaks %.0fk/%.0fk/%.0fk (%.0fk/%.0fk/%.0fk +-25%%)", best[0] / 1e3, best[1] / 1e3,
              best[2] / 1e3, r.dddl / 1e3, r.equal / 1e3, r.optimal / 1e3);
    }
    d.add(ordered, std::string("optimal-static >= equal at every altitude"));
    return d.done();
}

// Monte Carlo runs shared by criteria 8, 9 and 14.
struct McRun {
    std::string pass;
    int slots = 0;
    stats::McStatistics stats;
    double f_min = 1.0;
    double f_max = 0.0;
    long long events = 0;
};

struct McResults {
    std::vector<McRun> runs;
};

McResults run_monte_carlo(int trials) {
    McResults out;
    const link::OpticsParams o;
    for (int slots : {200, 2000}) {
        for (const auto& pc : reference_passes()) {
            mc::McConfig cfg;
            cfg.trials = trials;
            cfg.memory.dephasing_time_s = 0.1;
            const mc::OverpassSimulator sim(pc.spec, o, rates::ProtocolParams{}.with_capacity(slots), cfg);
            stats::StatsOptions so;
            so.bin_s = 1.0;
            if (slots == 200 && std::string(pc.name) == "zenith-a-90")
                for (int k = -3; k <= 4; ++k) so.dephasing_times_s.push_back(std::pow(10.0, k));
            stats::Accumulator acc(*sim.window(), so);
            McRun run;
            run.pass = pc.name;
            run.slots = slots;
            mc::run_trials(sim, [&](mc::TrialRecord&& r) {
                for (const auto& e : r.events) {
                    run.f_min = std::min(run.f_min, e.fidelity);
                    run.f_max = std::max(run.f_max, e.fidelity);
                }
                run.events += static_cast<long long>(r.events.size());
                acc.add(r);
            });
            run.stats = acc.finish();
            std::fprintf(stderr, "  mc %-13s N=%-4d PDV %.1f +- %.1f\n", pc.name, slots, run.stats.pdv.mean,
                         run.stats.pdv.sd);
            out.runs.push_back(std::move(run));
        }
    }
    return out;
}

Outcome c8_monte_carlo(const McResults& mc) {
    const double mean_ref[] = {900, 1632, 661, 749, 8896, 16459, 6619, 7485};
    const double sd_ref[] = {20, 22, 18, 18, 68, 70, 55, 59};
    Detail d;
    for (std::size_t i = 0; i < mc.runs.size(); ++i) {
        const auto& r = mc.runs[i];
        const double m = r.stats.pdv.mean;
        const double sd = std::hypot(sd_ref[i], r.stats.pdv.sd);
        const double tol = std::max(0.05 * mean_ref[i], 5.0 * sd);
        d.add(within(m, mean_ref[i], tol), "%s N=%d %.1f+-%.1f (%g+-%g)", r.pass.c_str(), r.slots, m, r.stats.pdv.sd,
              mean_ref[i], sd_ref[i]);
    }
    return d.done();
}

Outcome c9_waiting_ratios(const McResults& mc) {
    const double ref_a[] = {2.1, 2.1, 4.1, 2.8};
    const double ref_b[] = {1.4, 1.4, 3.4, 3.2};
    Detail d;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& lo = mc.runs[i].stats;
        const auto& hi = mc.runs[i + 4].stats;
        const double fa = lo.binned_median_wait_a / hi.binned_median_wait_a;
        const double fb = lo.binned_median_wait_b / hi.binned_median_wait_b;
        const double pa = lo.wait_a.median / hi.wait_a.median;
        const double pb = lo.wait_b.median / hi.wait_b.median;
        d.add(std::abs(fa / ref_a[i] - 1) <= 0.3, "%s A %.2f (%g +-30%%, pooled %.2f)", mc.runs[i].pass.c_str(), fa,
              ref_a[i], pa);
        d.add(std::abs(fb / ref_b[i] - 1) <= 0.3, "B %.2f (%g +-30%%, pooled %.2f)", fb, ref_b[i], pb);
    }
    return d.done();
}

Outcome c10_binomial() {
    double worst = 0.0;
    bool zero_ok = true;
    for (int n = 0; n <= 64; ++n) {
        for (double eta : {0.0, 1e-4, 1e-3, 0.1, 1.0}) {
            const double closed = rates::ssqr_link_rate(n, eta, 2e-3);
            const double brute = testing::binomial_sum_rate(n, eta, 2e-3);
            if (brute == 0.0)
                zero_ok = zero_ok && closed == 0.0;
            else
                worst = std::max(worst, std::abs(closed - brute) / brute);
        }
    }
    Detail d;
    d.add(worst < 1e-9 && zero_ok, "max relative error %.2e over N<=64 (< 1e-9)", worst);
    return d.done();
}

Outcome c11_density_matrix() {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto rho0 = testing::two_pair_state();
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double tau = std::pow(10.0, -4.0 + 5.0 * u(rng));
        const double ta = tau * 5.0 * u(rng);
        const double tb = tau * 5.0 * u(rng);
        const auto rho = testing::dephase(testing::dephase(rho0, 1, fidelity::dephasing_lambda(ta, tau)), 2,
                                          fidelity::dephasing_lambda(tb, tau));
        const double oracle = testing::bell_weight(testing::swap_outcome(rho, 1.0), 1.0);
        worst = std::max(worst, std::abs(oracle - fidelity::swap_fidelity(ta, tb, tau)));
    }
    Detail d;
    d.add(worst < 1e-12, "max |F - oracle| %.2e over 1000 draws (< 1e-12)", worst);
    return d.done();
}

Outcome c12_far_field() {
    link::OpticsParams o;
    o.zenith_transmittance = 1.0;
    o.clipping = link::ClippingModel::none;
    o.rx_aperture_mm = 10.0;
    const rates::ProtocolParams p;
    const rates::PassEvaluator pass(geo::symmetric_pass(), o);
    const auto w = *pass.window();
    double lo[2] = {kInfinity, kInfinity};
    double hi[2] = {0, 0};
    for (int i = 0; i <= 200; ++i) {
        const auto s = pass.sample(w.t_start + w.duration() * i / 200);
        const auto r = rates::rate_sample(s, p);
        const double v[2] = {r.dddl * std::pow(s.range_a_km * s.range_b_km, 2), r.ssqr * std::pow(s.range_a_km, 3)};
        for (int k = 0; k < 2; ++k) {
            lo[k] = std::min(lo[k], v[k]);
            hi[k] = std::max(hi[k], v[k]);
        }
    }
    Detail d;
    d.add(hi[0] / lo[0] - 1 < 0.01, "R_dddl L_A^2 L_B^2 spread %.2e (< 1%%)", hi[0] / lo[0] - 1);
    d.add(hi[1] / lo[1] - 1 < 0.01, "R_ssqr L^3 spread %.2e (< 1%%)", hi[1] / lo[1] - 1);
    return d.done();
}

Outcome c13_invariants() {
    const auto rep = testing::check_micro_steps(1000, 100, 7);
    Detail d;
    d.add(rep.violations == 0, "%lld micro-steps, %lld swaps, %lld violations%s%s", rep.micro_steps, rep.swaps,
          rep.violations, rep.violations ? ": " : "", rep.first_violation.c_str());
    d.add(rep.deterministic, std::string("seeded replays identical"));
    mc::McConfig cfg;
    cfg.trials = 20;
    for (const auto& pc : reference_passes()) {
        if (pc.spec.offset_km == 0.0) continue;
        const mc::OverpassSimulator sim(pc.spec, link::OpticsParams{}, rates::ProtocolParams{}, cfg);
        const auto a = testing::accumulation_asymmetry(sim, cfg.trials, 0.5);
        d.add(a.slower_fraction() < 0.03 && a.faster_fraction() > 0.9,
              "%s surplus after swap: slower side %.3f, faster side %.3f", pc.name, a.slower_fraction(),
              a.faster_fraction());
    }
    return d.done();
}

Outcome c14_fidelity(const McResults& mc) {
    Detail d;
    double f_min = 1.0, f_max = 0.0;
    long long events = 0;
    for (const auto& r : mc.runs) {
        f_min = std::min(f_min, r.f_min);
        f_max = std::max(f_max, r.f_max);
        events += r.events;
    }
    d.add(f_min >= 0.5 && f_max < 1.0, "%lld emitted fidelities in [%.6f, %.15f]", events, f_min, f_max);
    const auto& sweep = mc.runs[2].stats.dephasing;
    bool monotone = !sweep.empty();
    for (std::size_t i = 1; i < sweep.size(); ++i)
        monotone = monotone && sweep[i].fidelity.median >= sweep[i - 1].fidelity.median;
    std::ostringstream os;
    for (const auto& s : sweep) os << ' ' << s.dephasing_time_s << ':' << s.fidelity.median;
    d.add(monotone, "median F vs tau_mem nondecreasing (zenith-a-90, N=200):%s", os.str().c_str());
    const double last = sweep.empty() ? 0.0 : sweep.back().fidelity.median;
    d.add(1.0 - last < 1e-4, "1 - F at tau_mem=1e4 s: %.2e", 1.0 - last);
    d.add(fidelity::swap_fidelity(1.0, 1.0, kInfinity) == 1.0, std::string("tau_mem=inf gives F=1 exactly"));
    return d.done();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    int trials = 1000;
    bool strict = false;
    std::vector<int> only;
    app.add_option("--trials", trials, "Monte Carlo trials per pass")->check(CLI::PositiveNumber);
    app.add_flag("--strict", strict, "Exit nonzero on any failure");
    app.add_option("--only", only, "Run only these criteria")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    std::optional<McResults> mc;
    auto monte_carlo = [&]() -> const McResults& {
        if (!mc) mc = run_monte_carlo(trials);
        return *mc;
    };

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"link-budget anchor", c1_link_budget},
        {"latency anchor", c2_latency},
        {"toy rates", c3_toy_rates},
        {"crossover capacities", c4_crossover_capacity},
        {"optimal static allocations", c5_allocations},
        {"system-loss crossovers", c6_loss_crossover},
        {"annual analysis", c7_annual},
        {"Monte Carlo PDVs", [&] { return c8_monte_carlo(monte_carlo()); }},
        {"waiting-time ratios", [&] { return c9_waiting_ratios(monte_carlo()); }},
        {"closed form vs binomial sum", c10_binomial},
        {"fidelity vs density-matrix oracle", c11_density_matrix},
        {"far-field scaling", c12_far_field},
        {"state-machine invariants", c13_invariants},
        {"fidelity bounds and dephasing sweep", [&] { return c14_fidelity(monte_carlo()); }},
    };

    int unexpected = 0;
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        const auto out = criteria[i].second();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %2d %s [%.2f s]: %s\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), secs,
                    out.detail.c_str());
        std::fflush(stdout);
        if (!out.pass) {
            ++failed;
            if (strict || !kKnownGaps.count(id)) ++unexpected;
        }
    }
    std::printf("%d failed, %d unexpected\n", failed, unexpected);
    return unexpected ? 1 : 0;
}
