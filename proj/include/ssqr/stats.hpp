#pragma once

// Summary statistics of Monte Carlo trials: waiting-time and fidelity
// quartiles per time bin and pooled, PDV spread across trials, the fidelity
// histogram, cumulative pairs against infidelity, and median fidelity as a
// function of the memory dephasing time.

#include "ssqr/geometry.hpp"
#include "ssqr/mcsim.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace ssqr::stats {

/// Linear-interpolation quantile (R type 7) of an ascending range.
double quantile_sorted(const std::vector<double>& sorted, double p);

struct Quartiles {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    std::size_t count = 0;  ///< 0 means no data; the values are then NaN

    double iqr() const { return q3 - q1; }
};

Quartiles quartiles(std::vector<double> values);

struct Histogram {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<long long> counts;

    double width() const { return (hi - lo) / static_cast<double>(counts.size()); }
    double edge(std::size_t i) const { return lo + width() * static_cast<double>(i); }
    /// Bins are [edge_i, edge_i+1); the last one also holds x == hi. Values
    /// outside [lo, hi] are ignored.
    void add(double x);
    long long total() const;
};

Histogram make_histogram(const std::vector<double>& values, double lo, double hi, int bins);

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;  ///< sample standard deviation, 0 for a single value
};

MeanSd mean_sd(const std::vector<double>& values);

struct TimeBin {
    double t_start = 0.0;
    double t_end = 0.0;
    Quartiles wait_a;
    Quartiles wait_b;
    Quartiles fidelity;     ///< successful swaps only
    MeanSd successes;       ///< successful swaps per trial in this bin
};

struct CumulativePoint {
    double infidelity = 0.0;
    double pairs_per_pass = 0.0;  ///< mean delivered pairs with 1 - F <= infidelity
};

struct DephasingPoint {
    double dephasing_time_s = 0.0;
    Quartiles fidelity;
};

struct StatsOptions {
    double bin_s = 1.0;
    int fidelity_bins = 50;
    std::vector<double> infidelity_thresholds;  ///< empty: 41 log-spaced points in [1e-4, 0.5]
    std::vector<double> dephasing_times_s;      ///< empty: no dephasing sweep
};

struct McStatistics {
    int trials = 0;
    MeanSd pdv;
    Quartiles wait_a;  ///< pooled over all swaps and trials
    Quartiles wait_b;
    Quartiles fidelity;
    /// Median over time bins of the per-bin median wait.
    double binned_median_wait_a = 0.0;
    double binned_median_wait_b = 0.0;
    std::vector<TimeBin> bins;
    Histogram fidelity_histogram;
    std::vector<CumulativePoint> cumulative;
    std::vector<DephasingPoint> dephasing;
};

/// Incremental reduction over TrialRecords. Swap events are bucketed by time
/// into bins of width bin_s starting at the window start. Results do not
/// depend on the order in which records are added.
class Accumulator {
public:
    Accumulator(const geo::VisibilityWindow& window, StatsOptions options);

    void add(const mc::TrialRecord& record);
    std::size_t trials() const { return trial_counts_.size(); }
    McStatistics finish() const;

private:
    struct Bin {
        std::vector<float> wait_a;
        std::vector<float> wait_b;
        std::vector<float> fidelity;
        long long successes = 0;
        long long successes_sq = 0;
    };

    std::size_t bin_of(double t) const;

    geo::VisibilityWindow window_;
    StatsOptions options_;
    std::vector<Bin> bins_;
    std::vector<std::pair<int, long long>> trial_counts_;  // (trial id, successes)
    std::vector<std::pair<float, float>> success_waits_;
};

/// Throws std::invalid_argument for an empty record list.
McStatistics aggregate_stats(const std::vector<mc::TrialRecord>& records, const geo::VisibilityWindow& window,
                             const StatsOptions& options = {});

/// Median and quartiles of F(wait_a, wait_b, tau) over recorded wait pairs,
/// for each dephasing time.
std::vector<DephasingPoint> fidelity_vs_dephasing(const std::vector<std::pair<double, double>>& waits,
                                                  const std::vector<double>& dephasing_times_s);

std::vector<double> default_infidelity_thresholds();

}  // namespace ssqr::stats
