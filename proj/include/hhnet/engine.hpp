// Clock-driven network engine.
//
// Two rates: membranes advance every dt_membrane (10 us by default); all
// synaptic work (delivery of delayed action potentials, spontaneous release,
// pool decay, current evaluation, STDP) happens on the synaptic tick (1 ms)
// and the resulting per-neuron current is held constant until the next tick.
//
// Outputs are a pure function of (parameters, seed). Each synapse draws from
// its own counter-based stream, per-neuron current sums run in synapse-id
// order, and spikes are merged in (time, neuron) order, so the worker count
// only changes wall time.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hh.hpp"
#include "plasticity.hpp"
#include "rng.hpp"
#include "synapse.hpp"
#include "topology.hpp"
#include "workers.hpp"

namespace hhnet {

/// Non-finite state detected during integration.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimConfig {
    double dt_membrane = 0.01;      // ms
    double t_synaptic_tick = 1.0;   // ms
    double duration = 60.0;         // s
    bool record_voltage = false;
    double voltage_sample_period = 1.0;  // ms
    std::uint64_t seed = 1;
    std::uint32_t worker_count = 1;
    std::optional<double> checkpoint_period;  // s

    static std::int64_t ratio(double a, double b) { return std::llround(a / b); }
    static bool is_multiple(double a, double b) {
        const double r = a / b;
        return std::abs(r - std::round(r)) < 1e-9 * std::max(1.0, std::abs(r));
    }

    std::int64_t steps_per_tick() const { return ratio(t_synaptic_tick, dt_membrane); }
    std::int64_t steps_per_sample() const { return ratio(voltage_sample_period, dt_membrane); }
    std::int64_t total_steps() const { return ratio(duration * 1000.0, dt_membrane); }

    void validate() const {
        if (!(dt_membrane > 0)) throw std::invalid_argument("sim: dt_membrane must be > 0");
        if (!(t_synaptic_tick > 0) || !is_multiple(t_synaptic_tick, dt_membrane) || steps_per_tick() < 1)
            throw std::invalid_argument("sim: t_synaptic_tick must be a positive integer multiple of dt_membrane");
        if (!(duration >= 0)) throw std::invalid_argument("sim: duration must be >= 0");
        if (!is_multiple(duration * 1000.0, dt_membrane))
            throw std::invalid_argument("sim: duration must be a multiple of dt_membrane");
        if (!(voltage_sample_period >= dt_membrane) || !is_multiple(voltage_sample_period, dt_membrane))
            throw std::invalid_argument("sim: voltage_sample_period must be a multiple of dt_membrane and >= it");
        if (worker_count == 0) throw std::invalid_argument("sim: worker_count must be >= 1");
        if (checkpoint_period && !(*checkpoint_period > 0))
            throw std::invalid_argument("sim: checkpoint_period must be > 0");
    }
};

struct ModelParams {
    NeuronParams neuron;
    SynapseParams synapse;
    StdpParams stdp;

    void validate() const {
        neuron.validate();
        synapse.validate();
        stdp.validate();
    }
};

struct SpikeEvent {
    std::int64_t step = 0;  // membrane step at which the spike was detected
    std::uint32_t neuron = 0;

    friend bool operator==(const SpikeEvent&, const SpikeEvent&) = default;
    friend auto operator<=>(const SpikeEvent&, const SpikeEvent&) = default;
};

struct PendingArrival {
    std::int64_t tick = 0;  // first synaptic tick at or after spike time + delay
    std::uint32_t neuron = 0;

    friend bool operator==(const PendingArrival&, const PendingArrival&) = default;
    friend auto operator<=>(const PendingArrival&, const PendingArrival&) = default;
};

/// Complete mutable simulation state. Parameters live outside.
struct World {
    std::uint64_t seed = 0;
    std::int64_t step = 0;
    Topology topology;
    StimulusProtocol stimulus;
    std::vector<NeuronState> neurons;
    std::vector<double> i_syn;                     // held per-neuron synaptic current
    std::vector<std::uint64_t> synapse_counters;  // per-synapse RNG stream position
    std::vector<PendingArrival> pending;          // sorted
    std::vector<std::vector<double>> spike_history;  // recent somatic spike times, ms
    std::uint64_t spike_count = 0;

    friend bool operator==(const World&, const World&) = default;
};

/// Builds topology, stimulus and initial state from the seed. Neurons start
/// at rest with steady-state gates; each synapse's first spontaneous window
/// is uniform in [0, T_ves_release_base).
inline World make_world(const ModelParams& params, const NetworkConfig& net, const StimulusConfig& stim,
                        std::uint64_t seed) {
    params.validate();
    World w;
    w.seed = seed;
    RandomStream topo_rng(seed, StreamKind::topology, 0);
    w.topology = build_topology(net, topo_rng);
    RandomStream stim_rng(seed, StreamKind::stimulus, 0);
    w.stimulus = build_stimulus(stim, w.topology, stim_rng);

    const auto n = w.topology.n_neurons();
    w.neurons.assign(n, resting_state(params.neuron));
    w.i_syn.assign(n, 0.0);
    w.spike_history.assign(n, {});

    const auto n_syn = w.topology.synapses.size();
    w.synapse_counters.assign(n_syn, 0);
    for (std::size_t s = 0; s < n_syn; ++s) {
        RandomStream rng(seed, StreamKind::synapse, static_cast<std::uint32_t>(s));
        w.topology.synapses[s].next_spont_time = params.synapse.T_ves_release_base * rng.uniform();
        w.synapse_counters[s] = rng.counter();
    }
    return w;
}

class Recorder {
public:
    void reset_voltage(std::size_t neurons, std::size_t samples, std::int64_t first_sample_step) {
        voltage_.assign(neurons, std::vector<float>(samples, 0.0f));
        first_sample_step_ = first_sample_step;
    }

    std::vector<SpikeEvent>& spikes() { return spikes_; }
    const std::vector<SpikeEvent>& spikes() const { return spikes_; }
    std::vector<std::vector<float>>& voltage() { return voltage_; }
    const std::vector<std::vector<float>>& voltage() const { return voltage_; }
    std::int64_t first_sample_step() const { return first_sample_step_; }

private:
    std::vector<SpikeEvent> spikes_;
    std::vector<std::vector<float>> voltage_;  // neuron-major
    std::int64_t first_sample_step_ = 0;
};

struct RunSummary {
    std::uint64_t spike_count = 0;
    double wall_seconds = 0.0;
    double steps_per_second = 0.0;
    double neuron_updates_per_second = 0.0;
};

class Engine {
public:
    Engine(ModelParams params, SimConfig sim, World world)
        : params_(std::move(params)), sim_(std::move(sim)), world_(std::move(world)), pool_(sim_.worker_count), kernel_(params_.neuron, sim_.dt_membrane) {
        params_.validate();
        sim_.validate();
        dt_ = sim_.dt_membrane;
        steps_per_tick_ = sim_.steps_per_tick();
        phi_ = temperature_factor(params_.neuron);
        decay_factor_ = std::exp(-params_.synapse.decay_rate * params_.synapse.T_update / 1000.0);
        index_topology();
    }

    const World& world() const { return world_; }
    const ModelParams& params() const { return params_; }
    const SimConfig& sim() const { return sim_; }
    Recorder& recorder() { return recorder_; }
    const Recorder& recorder() const { return recorder_; }

    double time_ms() const { return static_cast<double>(world_.step) * dt_; }
    bool on_tick() const { return world_.step % steps_per_tick_ == 0; }

    /// Advances one membrane substep, doing the synaptic work first when the
    /// current step sits on a tick.
    void step() {
        if (on_tick()) synaptic_phase();
        membrane_phase(1);
    }

    /// Runs to `target_step`; `on_tick` fires at every tick boundary reached
    /// after the start (before that tick's synaptic work).
    void run_until(std::int64_t target_step, const std::function<void(const Engine&)>& on_tick_cb = {}) {
        while (world_.step < target_step) {
            if (on_tick()) {
                synaptic_phase();
                const std::int64_t n = std::min(steps_per_tick_, target_step - world_.step);
                membrane_phase(n);
            } else {
                const std::int64_t to_tick = steps_per_tick_ - world_.step % steps_per_tick_;
                membrane_phase(std::min(to_tick, target_step - world_.step));
            }
            if (on_tick_cb && on_tick() && world_.step < target_step) on_tick_cb(*this);
        }
    }

    /// Runs the configured duration from step 0 (or from the restored step up
    /// to the configured end) and reports throughput.
    RunSummary run(const std::function<void(const Engine&)>& on_tick_cb = {}) {
        const std::int64_t target = sim_.total_steps();
        if (sim_.record_voltage) {
            const std::int64_t sps = sim_.steps_per_sample();
            const std::int64_t first = (world_.step + sps - 1) / sps;
            const std::int64_t last = target > 0 ? (target - 1) / sps : -1;
            recorder_.reset_voltage(world_.neurons.size(), static_cast<std::size_t>(std::max<std::int64_t>(0, last - first + 1)),
                                    first * sps);
        }
        const auto start_step = world_.step;
        const auto t0 = std::chrono::steady_clock::now();
        run_until(target, on_tick_cb);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        RunSummary sum;
        sum.spike_count = world_.spike_count;
        sum.wall_seconds = wall;
        const double steps = static_cast<double>(world_.step - start_step);
        sum.steps_per_second = wall > 0 ? steps / wall : 0.0;
        sum.neuron_updates_per_second = sum.steps_per_second * static_cast<double>(world_.neurons.size());
        return sum;
    }

private:
    void index_topology() {
        const auto n = world_.topology.n_neurons();
        const auto& syn = world_.topology.synapses;
        out_begin_.assign(n + 1, 0);
        for (const auto& s : syn) ++out_begin_[s.pre_id + 1];
        for (std::size_t i = 0; i < n; ++i) out_begin_[i + 1] += out_begin_[i];
        for (std::size_t k = 1; k < syn.size(); ++k)
            if (syn[k - 1].pre_id > syn[k].pre_id)
                throw std::invalid_argument("engine: synapses must be sorted by presynaptic neuron");

        in_lists_.assign(n, {});
        for (std::size_t k = 0; k < syn.size(); ++k) in_lists_[syn[k].post_id].push_back(static_cast<std::uint32_t>(k));

        stim_on_.assign(n, 0.0);
        stim_off_.assign(n, 0.0);
        stim_amp_.assign(n, 0.0);
        const auto& st = world_.stimulus;
        for (std::size_t k = 0; k < st.targets.size(); ++k) {
            stim_on_[st.targets[k]] = st.start_times[k];
            stim_off_[st.targets[k]] = st.start_times[k] + st.duration;
            stim_amp_[st.targets[k]] = st.amplitude;
        }
        arrivals_.assign(n, 0);
        atten_.assign(n, 1.0);
        recent_counts_.assign(n, 0);
        local_spikes_.assign(n, {});
    }

    void synaptic_phase() {
        const std::int64_t tick = world_.step / steps_per_tick_;
        const double now = time_ms();
        const auto& sp = params_.synapse;
        const auto n = world_.neurons.size();

        // Deliveries due at this tick.
        std::fill(arrivals_.begin(), arrivals_.end(), 0);
        auto& pending = world_.pending;
        auto due_end = std::find_if(pending.begin(), pending.end(), [&](const PendingArrival& a) { return a.tick > tick; });
        for (auto it = pending.begin(); it != due_end; ++it) ++arrivals_[it->neuron];
        pending.erase(pending.begin(), due_end);

        const double keep = std::max(params_.stdp.window, sp.T_lookback_AP) + sim_.t_synaptic_tick;
        for (std::size_t i = 0; i < n; ++i) {
            auto& h = world_.spike_history[i];
            h.erase(h.begin(), std::lower_bound(h.begin(), h.end(), now - keep));
            recent_counts_[i] = static_cast<int>(h.end() - std::lower_bound(h.begin(), h.end(), now - sp.T_lookback_AP));
        }

        auto& syns = world_.topology.synapses;
        auto release = [&](std::size_t k) {
            auto& s = syns[k];
            const int aps = arrivals_[s.pre_id];
            const bool spont_due = now >= s.next_spont_time;
            if (aps == 0 && !spont_due) {
                s.pool *= decay_factor_;
                return;
            }
            RandomStream rng(world_.seed, StreamKind::synapse, static_cast<std::uint32_t>(k), world_.synapse_counters[k]);
            double released = 0.0;
            for (int a = 0; a < aps; ++a) released += on_ap_arrival(s, sp, rng);
            if (spont_due) {
                // A window coinciding with an arriving AP is consumed without release.
                if (aps == 0) released += on_spontaneous_window(s, sp, rng);
                s = schedule_next_spontaneous(s, recent_counts_[s.pre_id], now, sp);
            }
            world_.synapse_counters[k] = rng.counter();
            s.pool = (s.pool + released) * decay_factor_;
        };

        if (pool_.size() == 1) {
            // One pass in synapse-id order. Each neuron's sum sees its inputs in
            // the same order as the in_lists_ walk below; empty pools add +0.
            for (std::size_t i = 0; i < n; ++i) {
                atten_[i] = inhibitory_attenuation(world_.neurons[i].u, sp);
                world_.i_syn[i] = 0.0;
            }
            for (std::size_t k = 0; k < syns.size(); ++k) {
                release(k);
                const auto& s = syns[k];
                if (s.pool != 0.0) world_.i_syn[s.post_id] += synaptic_current_with_attenuation(s, atten_[s.post_id], sp);
            }
            for (std::size_t i = 0; i < n; ++i) world_.i_syn[i] = std::clamp(world_.i_syn[i], -sp.I_syn_max, sp.I_syn_max);
        } else {
            pool_.parallel_for(syns.size(), [&](std::size_t begin, std::size_t end) {
                for (std::size_t k = begin; k < end; ++k) release(k);
            });
            // Per-neuron current, summed in synapse-id order.
            pool_.parallel_for(n, [&](std::size_t begin, std::size_t end) {
                for (std::size_t i = begin; i < end; ++i) {
                    const double att = inhibitory_attenuation(world_.neurons[i].u, sp);
                    double total = 0.0;
                    for (auto k : in_lists_[i]) {
                        if (syns[k].pool != 0.0) total += synaptic_current_with_attenuation(syns[k], att, sp);
                    }
                    world_.i_syn[i] = std::clamp(total, -sp.I_syn_max, sp.I_syn_max);
                }
            });
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(world_.i_syn[i])) {
                std::ostringstream msg;
                msg << "non-finite synaptic current at neuron " << i << ", t = " << now << " ms";
                throw NumericError(msg.str());
            }
        }

        plasticity_phase(now);
    }

    void plasticity_phase(double now) {
        const auto& stdp = params_.stdp;
        if ((!stdp.enabled_exc && !stdp.enabled_inh) || stdp.amplitude == 0.0) return;
        if (world_.step == 0) return;
        const double since = now - sim_.t_synaptic_tick;
        auto& syns = world_.topology.synapses;

        touched_.clear();
        for (std::size_t i = 0; i < world_.neurons.size(); ++i) {
            const auto& h = world_.spike_history[i];
            if (h.empty() || h.back() <= since) continue;
            for (auto k = out_begin_[i]; k < out_begin_[i + 1]; ++k) touched_.push_back(static_cast<std::uint32_t>(k));
            touched_.insert(touched_.end(), in_lists_[i].begin(), in_lists_[i].end());
        }
        if (touched_.empty()) return;
        std::sort(touched_.begin(), touched_.end());
        touched_.erase(std::unique(touched_.begin(), touched_.end()), touched_.end());

        for (auto k : touched_) {
            auto& s = syns[k];
            if (s.pre_is_excitatory ? !stdp.enabled_exc : !stdp.enabled_inh) continue;
            const auto type = s.pre_is_excitatory ? SynapseType::excitatory : SynapseType::inhibitory;
            const auto events = collect_pairs(world_.spike_history[s.pre_id], world_.spike_history[s.post_id], now,
                                              stdp, k, since);
            for (const auto& e : events) s = apply_plasticity(s, stdp_delta(type, s.receptors, e.delta_t, stdp));
        }
    }

    /// Advances every neuron `substeps` membrane steps without crossing a
    /// synaptic tick, then merges the spikes in (step, neuron) order.
    void membrane_phase(std::int64_t substeps) {
        const std::int64_t first = world_.step;
        const auto n = world_.neurons.size();
        const bool record_v = sim_.record_voltage && !recorder_.voltage().empty();
        const std::int64_t sps = sim_.steps_per_sample();

        // Substep-outer order keeps many independent neurons in flight.
        pool_.parallel_for(n, [&](std::size_t begin, std::size_t end) {
            const NeuronKernel kernel = kernel_;
            for (std::int64_t k = first; k < first + substeps; ++k) {
                const double t = static_cast<double>(k) * dt_;
                const double t_after = static_cast<double>(k + 1) * dt_;
                const bool sample = record_v && k % sps == 0;
                for (std::size_t i = begin; i < end; ++i) {
                    auto& s = world_.neurons[i];
                    if (sample) {
                        const auto idx = static_cast<std::size_t>((k - recorder_.first_sample_step()) / sps);
                        if (idx < recorder_.voltage()[i].size()) recorder_.voltage()[i][idx] = static_cast<float>(s.u);
                    }
                    const double i_ext = (t >= stim_on_[i] && t < stim_off_[i]) ? stim_amp_[i] : 0.0;
                    if (kernel.advance(s, world_.i_syn[i], i_ext, t_after))
                        local_spikes_[i].push_back(k + 1);
                }
            }
        });
        world_.step = first + substeps;

        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(world_.neurons[i].u)) {
                std::ostringstream msg;
                msg << "non-finite membrane voltage at neuron " << i << ", t = " << time_ms() << " ms";
                throw NumericError(msg.str());
            }
        }

        merged_.clear();
        for (std::size_t i = 0; i < n; ++i) {
            for (auto k : local_spikes_[i]) merged_.push_back({k, static_cast<std::uint32_t>(i)});
            local_spikes_[i].clear();
        }
        if (merged_.empty()) return;
        std::sort(merged_.begin(), merged_.end());

        const double tick_ms = sim_.t_synaptic_tick;
        for (const auto& e : merged_) {
            const double t = static_cast<double>(e.step) * dt_;
            world_.spike_history[e.neuron].push_back(t);
            const auto arrival = static_cast<std::int64_t>(std::ceil((t + world_.topology.delays[e.neuron]) / tick_ms));
            const PendingArrival pa{arrival, e.neuron};
            world_.pending.insert(std::upper_bound(world_.pending.begin(), world_.pending.end(), pa), pa);
            recorder_.spikes().push_back(e);
        }
        world_.spike_count += merged_.size();
    }

    ModelParams params_;
    SimConfig sim_;
    World world_;
    WorkerPool pool_;
    NeuronKernel kernel_;
    Recorder recorder_;

    double dt_ = 0.01;
    std::int64_t steps_per_tick_ = 100;
    double phi_ = 1.0;
    double decay_factor_ = 1.0;

    std::vector<std::size_t> out_begin_;
    std::vector<std::vector<std::uint32_t>> in_lists_;
    std::vector<double> stim_on_, stim_off_, stim_amp_;
    std::vector<int> arrivals_;
    std::vector<double> atten_;
    std::vector<int> recent_counts_;
    std::vector<std::vector<std::int64_t>> local_spikes_;
    std::vector<SpikeEvent> merged_;
    std::vector<std::uint32_t> touched_;
};

}  // namespace hhnet
