// Random recurrent network construction and the initiating stimulus.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "rng.hpp"
#include "synapse.hpp"

namespace hhnet {

enum class NeuronType : std::uint8_t { inhibitory = 0, excitatory = 1 };

struct NetworkConfig {
    std::uint32_t n_neurons = 200;
    std::uint32_t n_inhibitory = 40;
    double connection_prob = 0.8;
    double ampa_init_mean = 120.0;
    double ampa_init_var = 12.0;
    double gaba_init_mean = 200.0;
    double gaba_init_var = 6.0;
    // When set, the *_var fields are read as standard deviations.
    bool receptor_spread_is_std = false;
    double delay_min = 0.5;  // ms
    double delay_max = 2.0;  // ms

    void validate() const {
        if (n_neurons == 0) throw std::invalid_argument("network: n_neurons must be > 0");
        if (n_inhibitory >= n_neurons) throw std::invalid_argument("network: n_inhibitory must be < n_neurons");
        if (!(connection_prob >= 0 && connection_prob <= 1))
            throw std::invalid_argument("network: connection_prob must lie in [0, 1]");
        if (!(ampa_init_mean > 0 && gaba_init_mean > 0))
            throw std::invalid_argument("network: receptor means must be > 0");
        if (ampa_init_var < 0 || gaba_init_var < 0) throw std::invalid_argument("network: receptor spreads must be >= 0");
        if (!(delay_min >= 0 && delay_min <= delay_max))
            throw std::invalid_argument("network: require 0 <= delay_min <= delay_max");
    }
};

struct Topology {
    std::vector<NeuronType> neuron_types;
    // Sorted by (pre_id, post_id); the index in this vector is the synapse id.
    std::vector<SynapseState> synapses;
    std::vector<double> delays;  // ms, per presynaptic neuron

    std::size_t n_neurons() const { return neuron_types.size(); }
    bool is_excitatory(std::size_t i) const { return neuron_types[i] == NeuronType::excitatory; }

    friend bool operator==(const Topology&, const Topology&) = default;
};

struct StimulusConfig {
    std::uint32_t n_targets = 30;
    double amplitude = 80.0;    // uA
    double duration = 200.0;    // ms
    double onset_min = 300.0;   // ms
    double onset_max = 500.0;   // ms

    void validate() const {
        if (!(duration >= 0)) throw std::invalid_argument("stimulus: duration must be >= 0");
        if (!(onset_min >= 0 && onset_min <= onset_max))
            throw std::invalid_argument("stimulus: require 0 <= onset_min <= onset_max");
    }
};

struct StimulusProtocol {
    std::vector<std::uint32_t> targets;  // ascending
    double amplitude = 0.0;
    double duration = 0.0;
    std::vector<double> start_times;  // aligned with targets

    /// External current seen by `neuron` at time t (ms).
    double current(std::uint32_t neuron, double t) const {
        const auto it = std::lower_bound(targets.begin(), targets.end(), neuron);
        if (it == targets.end() || *it != neuron) return 0.0;
        const double onset = start_times[static_cast<std::size_t>(it - targets.begin())];
        return (t >= onset && t < onset + duration) ? amplitude : 0.0;
    }

    friend bool operator==(const StimulusProtocol&, const StimulusProtocol&) = default;
};

/// Inhibitory neurons take ids [0, n_inhibitory), excitatory the rest. Each
/// ordered pair i != j is connected independently with connection_prob.
template <UniformGaussianSource Rng>
Topology build_topology(const NetworkConfig& cfg, Rng& rng) {
    cfg.validate();
    Topology topo;
    topo.neuron_types.resize(cfg.n_neurons, NeuronType::excitatory);
    std::fill_n(topo.neuron_types.begin(), cfg.n_inhibitory, NeuronType::inhibitory);

    auto variance = [&](double spread) { return cfg.receptor_spread_is_std ? spread * spread : spread; };
    const double ampa_var = variance(cfg.ampa_init_var);
    const double gaba_var = variance(cfg.gaba_init_var);

    topo.synapses.reserve(static_cast<std::size_t>(cfg.n_neurons * (cfg.n_neurons - 1.0) * cfg.connection_prob * 1.05));
    for (std::uint32_t pre = 0; pre < cfg.n_neurons; ++pre) {
        const bool exc = topo.is_excitatory(pre);
        for (std::uint32_t post = 0; post < cfg.n_neurons; ++post) {
            if (pre == post) continue;
            if (rng.uniform() >= cfg.connection_prob) continue;
            const double r = exc ? rng.gaussian(cfg.ampa_init_mean, ampa_var) : rng.gaussian(cfg.gaba_init_mean, gaba_var);
            SynapseState s;
            s.pre_id = pre;
            s.post_id = post;
            s.pre_is_excitatory = exc;
            s.receptors = std::max(1.0, r);
            s.receptors_initial = s.receptors;
            topo.synapses.push_back(s);
        }
    }
    topo.delays.resize(cfg.n_neurons);
    for (auto& d : topo.delays) d = cfg.delay_min + (cfg.delay_max - cfg.delay_min) * rng.uniform();
    return topo;
}

/// Picks n_targets distinct excitatory neurons with onsets uniform in
/// [onset_min, onset_max].
inline StimulusProtocol build_stimulus(const StimulusConfig& cfg, const Topology& topo, RandomStream& rng) {
    cfg.validate();
    std::vector<std::uint32_t> pool;
    for (std::uint32_t i = 0; i < topo.n_neurons(); ++i)
        if (topo.is_excitatory(i)) pool.push_back(i);
    if (pool.size() < cfg.n_targets)
        throw std::invalid_argument("stimulus: fewer excitatory neurons than requested targets");

    // partial Fisher-Yates
    for (std::size_t k = 0; k < cfg.n_targets; ++k) {
        const auto j = k + static_cast<std::size_t>(rng.below(pool.size() - k));
        std::swap(pool[k], pool[j]);
    }
    std::vector<std::uint32_t> chosen(pool.begin(), pool.begin() + cfg.n_targets);
    std::sort(chosen.begin(), chosen.end());

    StimulusProtocol proto;
    proto.targets = std::move(chosen);
    proto.amplitude = cfg.amplitude;
    proto.duration = cfg.duration;
    proto.start_times.resize(proto.targets.size());
    for (auto& t : proto.start_times) t = cfg.onset_min + (cfg.onset_max - cfg.onset_min) * rng.uniform();
    return proto;
}

}  // namespace hhnet
