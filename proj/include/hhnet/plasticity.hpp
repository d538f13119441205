// Pair-based STDP on receptor counts with soft normalization and hard
// bounds. delta_t = t_pre - t_post throughout; delta_t <= 0 is causal.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "synapse.hpp"

namespace hhnet {

enum class SynapseType { excitatory, inhibitory };

enum class PairingScheme { nearest, all_pairs };

struct StdpParams {
    double window = 50.0;     // ms
    double tau = 4.0;         // ms
    double amplitude = 1e7;
    bool enabled_exc = true;
    bool enabled_inh = true;
    PairingScheme pairing = PairingScheme::nearest;

    void validate() const {
        if (!(window > 0)) throw std::invalid_argument("stdp: window must be > 0");
        if (!(tau > 0)) throw std::invalid_argument("stdp: tau must be > 0");
        if (!(amplitude >= 0)) throw std::invalid_argument("stdp: amplitude must be >= 0");
    }
};

struct PairEvent {
    std::size_t synapse_id = 0;
    double delta_t = 0.0;  // t_pre - t_post, ms
    bool causal = true;

    friend bool operator==(const PairEvent&, const PairEvent&) = default;
};

inline constexpr double receptor_bound_margin = 1e-3;

/// f(R) = 1 / (R - 1) for R > 5, else 0.25.
inline double soft_norm(double receptors) {
    return receptors > 5.0 ? 1.0 / (receptors - 1.0) : 0.25;
}

/// Same sign rule for both receptor types: causal pairs add receptors,
/// acausal pairs remove them, with magnitude decaying in |delta_t|.
inline double stdp_delta(SynapseType, double receptors, double delta_t, const StdpParams& p) {
    const double gap = std::abs(delta_t);
    if (gap > p.window) return 0.0;
    const double magnitude = p.amplitude * soft_norm(receptors) * std::exp(-gap / p.tau);
    return delta_t <= 0.0 ? magnitude : -magnitude;
}

/// Adds dR and keeps 0 < receptors < 2 * receptors_initial strictly.
inline SynapseState apply_plasticity(SynapseState syn, double dR) {
    const double lo = receptor_bound_margin;
    const double hi = 2.0 * syn.receptors_initial - receptor_bound_margin;
    syn.receptors = std::clamp(syn.receptors + dR, lo, std::max(lo, hi));
    return syn;
}

/// Spike-pair events for one synapse, considering only spikes in (since, now].
///
/// Nearest scheme: every postsynaptic spike pairs with the latest presynaptic
/// spike at or before it (causal); every presynaptic spike pairs with the
/// latest postsynaptic spike strictly before it (acausal). All-pairs scheme:
/// every in-window pair whose later spike is new. Spike lists must be sorted.
inline std::vector<PairEvent> collect_pairs(std::span<const double> pre, std::span<const double> post, double now,
                                            const StdpParams& p, std::size_t synapse_id = 0,
                                            double since = -std::numeric_limits<double>::infinity()) {
    std::vector<PairEvent> events;
    auto emit = [&](double t_pre, double t_post) {
        const double dt = t_pre - t_post;
        if (std::abs(dt) <= p.window) events.push_back({synapse_id, dt, dt <= 0.0});
    };
    for (double t_post : post) {
        if (t_post <= since || t_post > now) continue;
        // pre spikes at or before t_post
        const auto end = std::upper_bound(pre.begin(), pre.end(), t_post);
        if (p.pairing == PairingScheme::nearest) {
            if (end != pre.begin()) emit(*(end - 1), t_post);
        } else {
            for (auto it = pre.begin(); it != end; ++it) emit(*it, t_post);
        }
    }
    for (double t_pre : pre) {
        if (t_pre <= since || t_pre > now) continue;
        // post spikes strictly before t_pre
        const auto end = std::lower_bound(post.begin(), post.end(), t_pre);
        if (p.pairing == PairingScheme::nearest) {
            if (end != post.begin()) emit(t_pre, *(end - 1));
        } else {
            for (auto it = post.begin(); it != end; ++it) emit(t_pre, *it);
        }
    }
    return events;
}

}  // namespace hhnet
