#include "ssqr/stats.hpp"

#include "ssqr/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ssqr::stats {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> widen(const std::vector<float>& v) { return {v.begin(), v.end()}; }
}  // namespace

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Quartiles quartiles(std::vector<double> values) {
    Quartiles q;
    q.count = values.size();
    if (values.empty()) {
        q.q1 = q.median = q.q3 = kNaN;
        return q;
    }
    std::sort(values.begin(), values.end());
    q.q1 = quantile_sorted(values, 0.25);
    q.median = quantile_sorted(values, 0.5);
    q.q3 = quantile_sorted(values, 0.75);
    return q;
}

void Histogram::add(double x) {
    if (!(x >= lo && x <= hi) || counts.empty()) return;
    auto i = static_cast<std::size_t>((x - lo) / width());
    counts[std::min(i, counts.size() - 1)] += 1;
}

long long Histogram::total() const {
    long long n = 0;
    for (auto c : counts) n += c;
    return n;
}

Histogram make_histogram(const std::vector<double>& values, double lo, double hi, int bins) {
    if (bins < 1 || !(hi > lo)) throw std::invalid_argument("histogram needs bins >= 1 and hi > lo");
    Histogram h{lo, hi, std::vector<long long>(static_cast<std::size_t>(bins), 0)};
    for (double x : values) h.add(x);
    return h;
}

MeanSd mean_sd(const std::vector<double>& values) {
    MeanSd r;
    if (values.empty()) return r;
    double sum = 0.0;
    for (double v : values) sum += v;
    r.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - r.mean) * (v - r.mean);
        r.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return r;
}

std::vector<double> default_infidelity_thresholds() {
    std::vector<double> out;
    const double lo = std::log10(1e-4);
    const double hi = std::log10(0.5);
    for (int i = 0; i <= 40; ++i) out.push_back(std::pow(10.0, lo + (hi - lo) * i / 40.0));
    return out;
}

Accumulator::Accumulator(const geo::VisibilityWindow& window, StatsOptions options)
    : window_(window), options_(std::move(options)) {
    if (!(options_.bin_s > 0.0)) throw std::invalid_argument("bin_s must be > 0");
    if (options_.fidelity_bins < 1) throw std::invalid_argument("fidelity_bins must be >= 1");
    if (options_.infidelity_thresholds.empty()) options_.infidelity_thresholds = default_infidelity_thresholds();
    bins_.resize(static_cast<std::size_t>(std::ceil(window_.duration() / options_.bin_s)) + 1);
}

std::size_t Accumulator::bin_of(double t) const {
    const double x = std::max(0.0, (t - window_.t_start) / options_.bin_s);
    return static_cast<std::size_t>(x);
}

void Accumulator::add(const mc::TrialRecord& record) {
    std::vector<long long> per_bin(bins_.size(), 0);
    for (const auto& e : record.events) {
        const std::size_t i = bin_of(e.t);
        if (i >= bins_.size()) {
            bins_.resize(i + 1);
            per_bin.resize(i + 1, 0);
        }
        auto& bin = bins_[i];
        bin.wait_a.push_back(static_cast<float>(e.wait_a));
        bin.wait_b.push_back(static_cast<float>(e.wait_b));
        if (e.bsm_success) {
            bin.fidelity.push_back(static_cast<float>(e.fidelity));
            ++per_bin[i];
            if (!options_.dephasing_times_s.empty())
                success_waits_.emplace_back(static_cast<float>(e.wait_a), static_cast<float>(e.wait_b));
        }
    }
    per_bin.resize(bins_.size(), 0);
    for (std::size_t i = 0; i < bins_.size(); ++i) {
        bins_[i].successes += per_bin[i];
        bins_[i].successes_sq += per_bin[i] * per_bin[i];
    }
    trial_counts_.emplace_back(record.trial_id, record.n_ssqr);
}

McStatistics Accumulator::finish() const {
    if (trial_counts_.empty()) throw std::invalid_argument("no trial records to aggregate");
    McStatistics s;
    s.trials = static_cast<int>(trial_counts_.size());

    auto counts = trial_counts_;
    std::sort(counts.begin(), counts.end());
    std::vector<double> pdv;
    for (const auto& [id, n] : counts) pdv.push_back(static_cast<double>(n));
    s.pdv = mean_sd(pdv);

    const double n_trials = static_cast<double>(s.trials);
    std::vector<double> all_a;
    std::vector<double> all_b;
    std::vector<double> all_f;
    std::vector<double> medians_a;
    std::vector<double> medians_b;
    for (std::size_t i = 0; i < bins_.size(); ++i) {
        const auto& bin = bins_[i];
        TimeBin tb;
        tb.t_start = window_.t_start + options_.bin_s * static_cast<double>(i);
        tb.t_end = tb.t_start + options_.bin_s;
        tb.wait_a = quartiles(widen(bin.wait_a));
        tb.wait_b = quartiles(widen(bin.wait_b));
        tb.fidelity = quartiles(widen(bin.fidelity));
        tb.successes.mean = static_cast<double>(bin.successes) / n_trials;
        if (s.trials > 1) {
            const double var = (static_cast<double>(bin.successes_sq) - n_trials * tb.successes.mean * tb.successes.mean) /
                               (n_trials - 1.0);
            tb.successes.sd = std::sqrt(std::max(0.0, var));
        }
        if (tb.wait_a.count > 0) {
            medians_a.push_back(tb.wait_a.median);
            medians_b.push_back(tb.wait_b.median);
        }
        all_a.insert(all_a.end(), bin.wait_a.begin(), bin.wait_a.end());
        all_b.insert(all_b.end(), bin.wait_b.begin(), bin.wait_b.end());
        all_f.insert(all_f.end(), bin.fidelity.begin(), bin.fidelity.end());
        s.bins.push_back(tb);
    }
    while (!s.bins.empty() && s.bins.back().wait_a.count == 0 && s.bins.back().t_start >= window_.t_end)
        s.bins.pop_back();

    s.wait_a = quartiles(std::move(all_a));
    s.wait_b = quartiles(std::move(all_b));
    s.binned_median_wait_a = medians_a.empty() ? kNaN : quartiles(medians_a).median;
    s.binned_median_wait_b = medians_b.empty() ? kNaN : quartiles(medians_b).median;

    s.fidelity_histogram = make_histogram(all_f, 0.5, 1.0, options_.fidelity_bins);
    std::vector<double> infidelity;
    infidelity.reserve(all_f.size());
    for (double f : all_f) infidelity.push_back(1.0 - f);
    std::sort(infidelity.begin(), infidelity.end());
    for (double x : options_.infidelity_thresholds) {
        const auto n = std::upper_bound(infidelity.begin(), infidelity.end(), x) - infidelity.begin();
        s.cumulative.push_back({x, static_cast<double>(n) / n_trials});
    }
    s.fidelity = quartiles(std::move(all_f));

    if (!options_.dephasing_times_s.empty()) {
        std::vector<std::pair<double, double>> waits(success_waits_.begin(), success_waits_.end());
        s.dephasing = fidelity_vs_dephasing(waits, options_.dephasing_times_s);
    }
    return s;
}

McStatistics aggregate_stats(const std::vector<mc::TrialRecord>& records, const geo::VisibilityWindow& window,
                             const StatsOptions& options) {
    if (records.empty()) throw std::invalid_argument("no trial records to aggregate");
    Accumulator acc(window, options);
    for (const auto& r : records) acc.add(r);
    return acc.finish();
}

std::vector<DephasingPoint> fidelity_vs_dephasing(const std::vector<std::pair<double, double>>& waits,
                                                  const std::vector<double>& dephasing_times_s) {
    std::vector<DephasingPoint> out;
    std::vector<double> f(waits.size());
    for (double tau : dephasing_times_s) {
        for (std::size_t i = 0; i < waits.size(); ++i)
            f[i] = fidelity::swap_fidelity(waits[i].first, waits[i].second, tau);
        out.push_back({tau, quartiles(f)});
    }
    return out;
}

}  // namespace ssqr::stats
