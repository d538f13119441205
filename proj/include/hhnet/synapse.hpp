// Stochastic vesicle-release synapse with receptor-scaled current.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "rng.hpp"

namespace hhnet {

struct SynapseParams {
    double p_ap_release = 0.5;
    double p_spont_ap_release = 0.001;
    double mean_N_AP = 10.0;
    double var_N_AP = 2.0;
    double mean_N_notAP = 1.0;
    double var_N_notAP = 0.25;
    double decay_rate = 100.0;  // 1/s
    double du_per_ves = 1.0 / 150.0;
    double g_AMPA = 1.0;
    double g_GABA = 1.0;
    double I_syn_max = 40.0;    // uA
    double thres_inh = -70.0;   // mV
    double atten_coeff = 0.5;   // per mV
    double atten_floor = 0.08;
    double T_lookback_AP = 100.0;      // ms
    double T_ves_release_base = 50.0;  // ms
    double T_update = 1.0;             // ms

    void validate() const {
        auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (!prob(p_ap_release) || !prob(p_spont_ap_release))
            throw std::invalid_argument("synapse: release probabilities must lie in [0, 1]");
        if (var_N_AP < 0 || var_N_notAP < 0) throw std::invalid_argument("synapse: vesicle variances must be >= 0");
        if (!(decay_rate > 0 && du_per_ves > 0 && g_AMPA > 0 && g_GABA > 0 && I_syn_max > 0))
            throw std::invalid_argument("synapse: decay_rate, du_per_ves, conductances and I_syn_max must be > 0");
        if (!(atten_coeff >= 0)) throw std::invalid_argument("synapse: atten_coeff must be >= 0");
        if (!(atten_floor > 0 && atten_floor <= 1)) throw std::invalid_argument("synapse: atten_floor must lie in (0, 1]");
        if (!(T_lookback_AP >= 0 && T_ves_release_base > 0 && T_update > 0))
            throw std::invalid_argument("synapse: periods must be positive");
    }
};

struct SynapseState {
    std::uint32_t pre_id = 0;
    std::uint32_t post_id = 0;
    bool pre_is_excitatory = true;
    double receptors = 0.0;
    double receptors_initial = 0.0;
    double pool = 0.0;
    double next_spont_time = 0.0;  // ms

    friend bool operator==(const SynapseState&, const SynapseState&) = default;
};

/// Release lottery for an arriving action potential: N_AP vesicles with
/// probability p_ap_release, else none.
template <UniformGaussianSource Rng>
double on_ap_arrival(const SynapseState&, const SynapseParams& p, Rng& rng) {
    if (rng.uniform() >= p.p_ap_release) return 0.0;
    return std::max(0.0, static_cast<double>(rng.gaussian(p.mean_N_AP, p.var_N_AP)));
}

/// Spontaneous window: rarely an AP-sized release, otherwise N_notAP.
template <UniformGaussianSource Rng>
double on_spontaneous_window(const SynapseState&, const SynapseParams& p, Rng& rng) {
    if (rng.uniform() < p.p_spont_ap_release)
        return std::max(0.0, static_cast<double>(rng.gaussian(p.mean_N_AP, p.var_N_AP)));
    return std::max(0.0, static_cast<double>(rng.gaussian(p.mean_N_notAP, p.var_N_notAP)));
}

/// Next spontaneous window; the period stretches linearly with recent
/// presynaptic activity.
inline double spontaneous_period(int recent_ap_count, const SynapseParams& p) {
    return p.T_ves_release_base * (1.0 + recent_ap_count);
}

inline SynapseState schedule_next_spontaneous(SynapseState syn, int recent_ap_count, double now,
                                              const SynapseParams& p) {
    syn.next_spont_time = now + spontaneous_period(recent_ap_count, p);
    return syn;
}

/// (pool + new) * exp(-decay_rate * dt), dt in seconds.
inline double decay_and_accumulate(double pool, double new_vesicles, double dt_s, const SynapseParams& p) {
    return (pool + new_vesicles) * std::exp(-p.decay_rate * dt_s);
}

inline double inhibitory_attenuation(double u_post, const SynapseParams& p) {
    if (u_post >= p.thres_inh) return 1.0;
    return std::max(std::exp(-p.atten_coeff * (p.thres_inh - u_post)), p.atten_floor);
}

/// Current with the inhibitory attenuation factor already evaluated for the
/// postsynaptic voltage. Clamped to +-I_syn_max.
inline double synaptic_current_with_attenuation(const SynapseState& s, double attenuation, const SynapseParams& p) {
    double i;
    if (s.pre_is_excitatory) {
        i = s.receptors * s.pool * p.du_per_ves * p.g_AMPA;
    } else {
        i = -s.receptors * s.pool * p.du_per_ves * p.g_GABA;
        if (i < 0.0) i *= attenuation;
    }
    return std::clamp(i, -p.I_syn_max, p.I_syn_max);
}

inline double synaptic_current(const SynapseState& s, double u_post, const SynapseParams& p) {
    return synaptic_current_with_attenuation(s, inhibitory_attenuation(u_post, p), p);
}

}  // namespace hhnet
