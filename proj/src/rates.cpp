#include "ssqr/rates.hpp"

#include "ssqr/constants.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ssqr::rates {

void ProtocolParams::validate() const {
    if (!(source_rate_dddl >= 0.0)) throw std::invalid_argument("source_rate_dddl must be >= 0");
    if (memory_slots < 0) throw std::invalid_argument("memory_slots must be >= 0");
    if (slots_a < 0 || slots_b < 0) throw std::invalid_argument("slot allocations must be >= 0");
    if (slots_a + slots_b != memory_slots)
        throw std::invalid_argument("slots_a + slots_b must equal memory_slots");
    if (!(bsm_success > 0.0 && bsm_success <= 1.0))
        throw std::invalid_argument("bsm_success must lie in (0, 1]");
}

ProtocolParams ProtocolParams::with_split(int a) const {
    ProtocolParams p = *this;
    p.slots_a = a;
    p.slots_b = memory_slots - a;
    return p;
}

ProtocolParams ProtocolParams::with_capacity(int n) const {
    ProtocolParams p = *this;
    p.memory_slots = n;
    p.slots_a = n / 2;
    p.slots_b = n - n / 2;
    return p;
}

double one_way_delay(double range_km) { return range_km / kSpeedOfLightKmPerS; }

double dddl_rate(double eta_a, double eta_b, double source_rate) { return eta_a * eta_b * source_rate; }

double ssqr_link_rate(int slots, double eta, double one_way_delay_s) {
    if (!(one_way_delay_s > 0.0)) throw std::invalid_argument("one-way delay must be > 0");
    return ssqr_link_rate_at(slots, eta, 1.0 / (2.0 * one_way_delay_s));
}

double ssqr_link_rate_at(int slots, double eta, double attempt_rate) {
    if (slots < 0) throw std::invalid_argument("slots must be >= 0");
    // Binomial mean of successes over the N slots attempted in one round.
    return static_cast<double>(slots) * eta * attempt_rate;
}

RateSample rate_sample(const geo::LinkSample& s, const ProtocolParams& p) {
    RateSample r;
    r.t = s.t;
    r.dddl = dddl_rate(s.eta_a, s.eta_b, p.source_rate_dddl);
    r.link_a = ssqr_link_rate(p.slots_a, s.eta_a, one_way_delay(s.range_a_km));
    r.link_b = ssqr_link_rate(p.slots_b, s.eta_b, one_way_delay(s.range_b_km));
    r.ssqr = p.bsm_success * std::min(r.link_a, r.link_b);
    return r;
}

double ssqr_rate(const geo::LinkSample& s, const ProtocolParams& p) { return rate_sample(s, p).ssqr; }

namespace {

struct SimpsonPanel {
    const std::function<double(double)>& f;

    double refine(double a, double b, double fa, double fm, double fb, double whole, double tol,
                  int depth) const {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const double diff = left + right - whole;
        if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
        return refine(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
               refine(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
};

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, const IntegrationOptions& opts) {
    if (!(b > a)) return 0.0;
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / opts.max_step_s)));
    const double h = (b - a) / panels;

    std::vector<double> fx(2 * panels + 1);
    for (int i = 0; i <= 2 * panels; ++i) fx[i] = f(a + 0.5 * h * i);
    double coarse = 0.0;
    for (int i = 0; i < panels; ++i) coarse += h / 6.0 * (fx[2 * i] + 4.0 * fx[2 * i + 1] + fx[2 * i + 2]);

    const double abs_tol = std::max(opts.rel_tol * std::abs(coarse), 1e-300);
    const double panel_tol = abs_tol / panels;
    SimpsonPanel sp{f};
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double x0 = a + h * i;
        const double whole = h / 6.0 * (fx[2 * i] + 4.0 * fx[2 * i + 1] + fx[2 * i + 2]);
        total += sp.refine(x0, x0 + h, fx[2 * i], fx[2 * i + 1], fx[2 * i + 2], whole, panel_tol, 40);
    }
    return total;
}

PassEvaluator::PassEvaluator(const geo::OverpassSpec& spec, const link::OpticsParams& optics,
                             double grid_step_s, IntegrationOptions opts)
    : PassEvaluator(geo::PassGeometry(spec), optics, grid_step_s, opts) {}

PassEvaluator::PassEvaluator(geo::PassGeometry geometry, const link::OpticsParams& optics, double grid_step_s,
                             IntegrationOptions opts)
    : geometry_(geometry), optics_(optics), opts_(opts) {
    optics_.validate();
    if (!(grid_step_s > 0.0)) throw std::invalid_argument("grid step must be > 0");
    window_ = geometry_.visibility_window();
    build_grid(grid_step_s);
}

geo::LinkSample PassEvaluator::sample(double t) const {
    return link::attach_transmittance(geometry_.sample(t), optics_);
}

void PassEvaluator::build_grid(double step) {
    if (!window_ || window_->duration() <= 0.0) return;
    const int n = std::max(1, static_cast<int>(std::ceil(window_->duration() / step)));
    const double h = window_->duration() / n;
    unit_a_.resize(n + 1);
    unit_b_.resize(n + 1);
    weights_.assign(n + 1, h);
    weights_.front() = weights_.back() = 0.5 * h;
    for (int i = 0; i <= n; ++i) {
        const geo::LinkSample s = sample(window_->t_start + h * i);
        unit_a_[i] = ssqr_link_rate(1, s.eta_a, one_way_delay(s.range_a_km));
        unit_b_[i] = ssqr_link_rate(1, s.eta_b, one_way_delay(s.range_b_km));
    }
}

double PassEvaluator::dddl_pdv(double source_rate) const {
    if (!window_) return 0.0;
    return integrate(
        [&](double t) {
            const geo::LinkSample s = sample(t);
            return dddl_rate(s.eta_a, s.eta_b, source_rate);
        },
        window_->t_start, window_->t_end, opts_);
}

double PassEvaluator::ssqr_pdv(int slots_a, int slots_b, double bsm_success) const {
    if (!window_ || slots_a == 0 || slots_b == 0) return 0.0;
    ProtocolParams p;
    p.memory_slots = slots_a + slots_b;
    p.slots_a = slots_a;
    p.slots_b = slots_b;
    p.bsm_success = bsm_success;
    return integrate([&](double t) { return ssqr_rate(sample(t), p); }, window_->t_start, window_->t_end,
                     opts_);
}

double PassEvaluator::pdv(const ProtocolParams& params, Protocol protocol) const {
    return protocol == Protocol::dddl ? dddl_pdv(params.source_rate_dddl)
                                      : ssqr_pdv(params.slots_a, params.slots_b, params.bsm_success);
}

double PassEvaluator::ssqr_pdv_grid(int slots_a, int slots_b, double bsm_success) const {
    const double na = slots_a;
    const double nb = slots_b;
    double sum = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i)
        sum += weights_[i] * std::min(na * unit_a_[i], nb * unit_b_[i]);
    return bsm_success * sum;
}

int PassEvaluator::best_split_grid(int n) const {
    if (n < 0) throw std::invalid_argument("capacity must be >= 0");
    const int centre = n / 2;
    int best = centre;
    double best_score = ssqr_pdv_grid(centre, n - centre, 1.0);
    // Visit candidates in order of distance from n/2 so that ties keep the
    // most balanced split.
    for (int k = 1; k <= n; ++k) {
        for (int cand : {centre - k, centre + k}) {
            if (cand < 0 || cand > n) continue;
            const double s = ssqr_pdv_grid(cand, n - cand, 1.0);
            if (s > best_score * (1.0 + 1e-12)) {
                best_score = s;
                best = cand;
            }
        }
    }
    return best;
}

SplitResult PassEvaluator::optimize_split(const ProtocolParams& params) const {
    if (params.memory_slots < 2) throw std::invalid_argument("optimisation needs memory_slots >= 2");
    const int n = params.memory_slots;
    SplitResult out;
    if (!window_) {
        out.slots_a = n / 2;
        out.slots_b = n - n / 2;
        out.result.slots_a = out.slots_a;
        out.result.slots_b = out.slots_b;
        return out;
    }
    int chosen = best_split_grid(n);
    double value = ssqr_pdv(chosen, n - chosen, params.bsm_success);
    // Never report less than the equal split under the adaptive integral.
    if (chosen != n / 2) {
        const double equal = ssqr_pdv(n / 2, n - n / 2, params.bsm_success);
        if (equal >= value) {
            chosen = n / 2;
            value = equal;
        }
    }
    out.slots_a = chosen;
    out.slots_b = n - chosen;
    out.result = PdvResult{value, window_, out.slots_a, out.slots_b};
    return out;
}

PdvResult pdv(const geo::OverpassSpec& spec, const link::OpticsParams& optics, const ProtocolParams& params,
              Protocol protocol) {
    params.validate();
    const PassEvaluator pass(spec, optics);
    PdvResult r;
    r.window = pass.window();
    r.slots_a = params.slots_a;
    r.slots_b = params.slots_b;
    r.pdv = pass.pdv(params, protocol);
    return r;
}

SplitResult optimize_static_split(const geo::OverpassSpec& spec, const link::OpticsParams& optics,
                                  const ProtocolParams& params) {
    return PassEvaluator(spec, optics).optimize_split(params);
}

std::optional<int> crossover_capacity(const PassEvaluator& pass, const ProtocolParams& params, int max_slots) {
    const double target = pass.dddl_pdv(params.source_rate_dddl);
    if (!(target > 0.0)) throw std::domain_error("crossover undefined: DDDL PDV is zero");
    auto ssqr_at = [&](int n) { return pass.optimize_split(params.with_capacity(n)).result.pdv; };

    int lo = 1;  // a single slot cannot serve both links
    int hi = 2;
    while (ssqr_at(hi) < target) {
        if (hi >= max_slots) return std::nullopt;
        lo = hi;
        hi = std::min(2 * hi, max_slots);
    }
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        if (ssqr_at(mid) >= target)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

std::optional<int> crossover_capacity(const geo::OverpassSpec& spec, const link::OpticsParams& optics,
                                      const ProtocolParams& params, int max_slots) {
    return crossover_capacity(PassEvaluator(spec, optics), params, max_slots);
}

int round_up_even(double x) {
    const int n = static_cast<int>(std::ceil(x));
    return n % 2 == 0 ? n : n + 1;
}

int nu_c(const PassEvaluator& pass, const ProtocolParams& params) {
    const double ssqr = pass.optimize_split(params).result.pdv;
    if (!(ssqr > 0.0)) throw std::domain_error("nu_c undefined: SSQR PDV is zero");
    const double dddl = pass.dddl_pdv(params.source_rate_dddl);
    return round_up_even(dddl / ssqr * params.memory_slots / (params.source_rate_dddl / 1e6));
}

int nu_c(const geo::OverpassSpec& spec, const link::OpticsParams& optics, const ProtocolParams& params) {
    return nu_c(PassEvaluator(spec, optics), params);
}

std::optional<double> loss_crossover_db(const geo::OverpassSpec& spec, const link::OpticsParams& optics,
                                        const ProtocolParams& params, double lo_db, double hi_db) {
    // log(DDDL/SSQR) falls as the system loss grows.
    auto gap = [&](double loss_db) {
        const PassEvaluator pass(spec, link::pin_to_system_loss(optics, spec.altitude_km, loss_db));
        const double d = pass.dddl_pdv(params.source_rate_dddl);
        const double s = pass.optimize_split(params).result.pdv;
        return std::log(d / s);
    };
    double glo = gap(lo_db);
    double ghi = gap(hi_db);
    if (!(glo >= 0.0 && ghi <= 0.0)) return std::nullopt;
    while (hi_db - lo_db > 1e-4) {
        const double mid = 0.5 * (lo_db + hi_db);
        if (gap(mid) > 0.0)
            lo_db = mid;
        else
            hi_db = mid;
    }
    return 0.5 * (lo_db + hi_db);
}

}  // namespace ssqr::rates
