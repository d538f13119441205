// Spike-train statistics: per-neuron rates and rate classes, windowed
// participation, sliding-window Fano factors, raster export.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "io.hpp"

namespace hhnet {

struct SpikeTrain {
    double duration = 0.0;  // s
    std::uint32_t n_neurons = 0;
    std::vector<Spike> spikes;

    /// Sorts into canonical (time, neuron) order and checks ranges.
    void normalize() {
        std::sort(spikes.begin(), spikes.end());
        for (const auto& s : spikes) {
            if (s.neuron >= n_neurons)
                throw std::invalid_argument("spike train: neuron id " + std::to_string(s.neuron) + " out of range");
            if (s.time_ms < 0 || s.time_ms > duration * 1000.0)
                throw std::invalid_argument("spike train: spike time " + std::to_string(s.time_ms) +
                                            " ms outside [0, duration]");
        }
    }
};

enum class RateClass { below_1hz, from_1_to_5hz, above_5hz };

/// <1 Hz, [1, 5] Hz, >5 Hz.
inline RateClass classify_rate(double hz) {
    if (hz < 1.0) return RateClass::below_1hz;
    if (hz <= 5.0) return RateClass::from_1_to_5hz;
    return RateClass::above_5hz;
}

struct RateStats {
    std::vector<double> rates;  // Hz per neuron
    std::size_t n_below_1hz = 0, n_1_to_5hz = 0, n_above_5hz = 0;
    double mean_hz = 0.0;
    double std_hz = 0.0;  // n denominator

    double fraction(RateClass c) const {
        const double n = static_cast<double>(rates.size());
        if (n == 0) return 0.0;
        switch (c) {
            case RateClass::below_1hz: return static_cast<double>(n_below_1hz) / n;
            case RateClass::from_1_to_5hz: return static_cast<double>(n_1_to_5hz) / n;
            case RateClass::above_5hz: return static_cast<double>(n_above_5hz) / n;
        }
        return 0.0;
    }
};

inline RateStats mean_rates(const SpikeTrain& train) {
    if (!(train.duration > 0)) throw std::invalid_argument("mean_rates: duration must be > 0");
    std::vector<std::uint64_t> counts(train.n_neurons, 0);
    for (const auto& s : train.spikes) ++counts.at(s.neuron);

    RateStats r;
    r.rates.resize(train.n_neurons);
    double sum = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        r.rates[i] = static_cast<double>(counts[i]) / train.duration;
        sum += r.rates[i];
        switch (classify_rate(r.rates[i])) {
            case RateClass::below_1hz: ++r.n_below_1hz; break;
            case RateClass::from_1_to_5hz: ++r.n_1_to_5hz; break;
            case RateClass::above_5hz: ++r.n_above_5hz; break;
        }
    }
    if (!counts.empty()) {
        r.mean_hz = sum / static_cast<double>(counts.size());
        double ss = 0.0;
        for (double x : r.rates) ss += (x - r.mean_hz) * (x - r.mean_hz);
        r.std_hz = std::sqrt(ss / static_cast<double>(counts.size()));
    }
    return r;
}

struct ParticipationStats {
    double window = 0.0;  // s
    std::vector<double> per_window_pct;
    double mean_pct = 0.0;
    double std_pct = 0.0;  // n denominator
};

namespace detail {
/// floor(a / b) with a tolerance so that exact multiples survive rounding.
inline std::size_t whole_multiples(double a, double b) {
    return static_cast<std::size_t>(std::floor(a / b + 1e-9));
}
}  // namespace detail

/// Consecutive non-overlapping windows from t = 0; a trailing partial window
/// is dropped.
inline ParticipationStats participation(const SpikeTrain& train, double window) {
    if (!(window > 0)) throw std::invalid_argument("participation: window must be > 0");
    if (window > train.duration + 1e-12) throw std::invalid_argument("participation: window longer than the train");
    const std::size_t n_windows = detail::whole_multiples(train.duration, window);

    std::vector<std::vector<bool>> active(n_windows, std::vector<bool>(train.n_neurons, false));
    for (const auto& s : train.spikes) {
        const auto w = static_cast<std::size_t>(std::floor(s.time_ms / 1000.0 / window));
        if (w < n_windows) active[w][s.neuron] = true;
    }

    ParticipationStats p;
    p.window = window;
    p.per_window_pct.reserve(n_windows);
    for (const auto& a : active) {
        const auto k = std::count(a.begin(), a.end(), true);
        p.per_window_pct.push_back(train.n_neurons ? 100.0 * static_cast<double>(k) / train.n_neurons : 0.0);
    }
    if (n_windows > 0) {
        double sum = 0.0;
        for (double x : p.per_window_pct) sum += x;
        p.mean_pct = sum / static_cast<double>(n_windows);
        double ss = 0.0;
        for (double x : p.per_window_pct) ss += (x - p.mean_pct) * (x - p.mean_pct);
        p.std_pct = std::sqrt(ss / static_cast<double>(n_windows));
    }
    return p;
}

struct FanoPoint {
    double t_start = 0.0;  // s
    double t_end = 0.0;    // s
    // Empty when no neuron had a nonzero mean count in the window.
    std::optional<double> mean, min, max;
    std::size_t neurons = 0;  // neurons included in the statistics
};

struct FanoSeries {
    double window = 0.0;  // s
    double bin = 1.0;     // s
    std::vector<FanoPoint> points;

    /// Average of the per-position population means, skipping empty positions.
    std::optional<double> population_mean() const {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& p : points) {
            if (p.mean) {
                sum += *p.mean;
                ++n;
            }
        }
        if (n == 0) return std::nullopt;
        return sum / static_cast<double>(n);
    }
};

/// Per-neuron Fano factor (unbiased variance / mean of per-bin counts) in
/// windows sliding by one bin. Neurons with zero mean count are excluded.
inline FanoSeries fano(const SpikeTrain& train, double window, double bin = 1.0) {
    if (!(bin > 0 && window > 0)) throw std::invalid_argument("fano: window and bin must be > 0");
    const double ratio = window / bin;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) throw std::invalid_argument("fano: bin must divide window");
    const auto bins_per_window = static_cast<std::size_t>(std::llround(ratio));
    if (bins_per_window < 2) throw std::invalid_argument("fano: window must span at least two bins");
    if (window > train.duration + 1e-12) throw std::invalid_argument("fano: window longer than the train");

    const std::size_t n_bins = detail::whole_multiples(train.duration, bin);
    std::vector<std::vector<std::uint32_t>> counts(train.n_neurons, std::vector<std::uint32_t>(n_bins, 0));
    for (const auto& s : train.spikes) {
        auto b = static_cast<std::size_t>(std::floor(s.time_ms / 1000.0 / bin));
        if (b == n_bins && s.time_ms >= train.duration * 1000.0) b = n_bins - 1;  // spike exactly at the end
        if (b < n_bins) ++counts[s.neuron][b];
    }

    FanoSeries series;
    series.window = window;
    series.bin = bin;
    const double k = static_cast<double>(bins_per_window);
    for (std::size_t start = 0; start + bins_per_window <= n_bins; ++start) {
        FanoPoint pt;
        pt.t_start = static_cast<double>(start) * bin;
        pt.t_end = static_cast<double>(start + bins_per_window) * bin;
        double sum_f = 0.0;
        double lo = 0.0, hi = 0.0;
        for (std::uint32_t i = 0; i < train.n_neurons; ++i) {
            const auto* c = counts[i].data() + start;
            double s = 0.0;
            for (std::size_t j = 0; j < bins_per_window; ++j) s += c[j];
            if (s == 0.0) continue;
            const double mean = s / k;
            double ss = 0.0;
            for (std::size_t j = 0; j < bins_per_window; ++j) ss += (c[j] - mean) * (c[j] - mean);
            const double f = (ss / (k - 1.0)) / mean;
            if (pt.neurons == 0) {
                lo = hi = f;
            } else {
                lo = std::min(lo, f);
                hi = std::max(hi, f);
            }
            sum_f += f;
            ++pt.neurons;
        }
        if (pt.neurons > 0) {
            pt.mean = sum_f / static_cast<double>(pt.neurons);
            pt.min = lo;
            pt.max = hi;
        }
        series.points.push_back(pt);
    }
    return series;
}

/// Rows for a raster plot. With `max_per_second`, each one-second slot keeps
/// at most that many spikes, evenly spaced through the slot's sorted spikes.
inline std::vector<Spike> raster_rows(const SpikeTrain& train, std::optional<std::size_t> max_per_second = {}) {
    std::vector<Spike> sorted = train.spikes;
    std::sort(sorted.begin(), sorted.end());
    if (!max_per_second) return sorted;

    std::vector<Spike> out;
    const std::size_t k = *max_per_second;
    std::size_t i = 0;
    while (i < sorted.size()) {
        const auto slot = static_cast<std::int64_t>(std::floor(sorted[i].time_ms / 1000.0));
        std::size_t j = i;
        while (j < sorted.size() && static_cast<std::int64_t>(std::floor(sorted[j].time_ms / 1000.0)) == slot) ++j;
        const std::size_t count = j - i;
        if (count <= k) {
            out.insert(out.end(), sorted.begin() + static_cast<std::ptrdiff_t>(i), sorted.begin() + static_cast<std::ptrdiff_t>(j));
        } else {
            for (std::size_t r = 0; r < k; ++r) out.push_back(sorted[i + r * count / k]);
        }
        i = j;
    }
    return out;
}

inline void raster_export(const SpikeTrain& train, std::ostream& out, std::optional<std::size_t> max_per_second = {}) {
    write_spike_csv(out, raster_rows(train, max_per_second));
}

}  // namespace hhnet
