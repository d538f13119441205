// Checkpoint image: "HHCK", u32 format version, u64 payload length, then the
// payload. All integers and floats are little-endian; doubles are stored as
// their IEEE-754 bit patterns so a restore is exact.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "engine.hpp"

namespace hhnet {

static_assert(std::endian::native == std::endian::little, "checkpoint encoding assumes a little-endian host");

inline constexpr char checkpoint_magic[4] = {'H', 'H', 'C', 'K'};
inline constexpr std::uint32_t checkpoint_version = 1;

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

class ByteWriter {
public:
    template <class T>
        requires std::is_arithmetic_v<T>
    void put(T v) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
        bytes_.insert(bytes_.end(), p, p + sizeof(T));
    }
    void put_bool(bool b) { put<std::uint8_t>(b ? 1 : 0); }
    std::vector<std::uint8_t>& bytes() { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <class T>
        requires std::is_arithmetic_v<T>
    T get() {
        if (pos_ + sizeof(T) > bytes_.size()) throw CheckpointError("checkpoint: truncated payload");
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    bool get_bool() {
        const auto b = get<std::uint8_t>();
        if (b > 1) throw CheckpointError("checkpoint: corrupt boolean");
        return b == 1;
    }
    /// Element count guarded against the bytes actually remaining.
    std::size_t get_count(std::size_t min_element_bytes) {
        const auto n = get<std::uint64_t>();
        if (min_element_bytes > 0 && n > (bytes_.size() - pos_) / min_element_bytes)
            throw CheckpointError("checkpoint: element count exceeds payload");
        return static_cast<std::size_t>(n);
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Serializes a world sitting on a synaptic-tick boundary.
inline std::vector<std::uint8_t> checkpoint(const Engine& engine) {
    if (!engine.on_tick()) throw CheckpointError("checkpoint: world is not on a synaptic-tick boundary");
    const World& w = engine.world();
    detail::ByteWriter out;
    out.put<std::uint64_t>(w.seed);
    out.put<std::int64_t>(w.step);
    out.put<double>(engine.sim().dt_membrane);
    out.put<double>(engine.sim().t_synaptic_tick);
    out.put<std::uint64_t>(w.spike_count);

    const auto& topo = w.topology;
    out.put<std::uint64_t>(topo.n_neurons());
    for (std::size_t i = 0; i < topo.n_neurons(); ++i) {
        out.put<std::uint8_t>(static_cast<std::uint8_t>(topo.neuron_types[i]));
        out.put<double>(topo.delays[i]);
        const auto& s = w.neurons[i];
        out.put<double>(s.u);
        out.put<double>(s.gates.m);
        out.put<double>(s.gates.h);
        out.put<double>(s.gates.n);
        out.put_bool(s.last_spike_time.has_value());
        out.put<double>(s.last_spike_time.value_or(0.0));
        out.put_bool(s.is_above_threshold);
        out.put<double>(w.i_syn[i]);
        out.put<std::uint64_t>(w.spike_history[i].size());
        for (double t : w.spike_history[i]) out.put<double>(t);
    }

    out.put<std::uint64_t>(topo.synapses.size());
    for (std::size_t k = 0; k < topo.synapses.size(); ++k) {
        const auto& s = topo.synapses[k];
        out.put<std::uint32_t>(s.pre_id);
        out.put<std::uint32_t>(s.post_id);
        out.put_bool(s.pre_is_excitatory);
        out.put<double>(s.receptors);
        out.put<double>(s.receptors_initial);
        out.put<double>(s.pool);
        out.put<double>(s.next_spont_time);
        out.put<std::uint64_t>(w.synapse_counters[k]);
    }

    const auto& st = w.stimulus;
    out.put<double>(st.amplitude);
    out.put<double>(st.duration);
    out.put<std::uint64_t>(st.targets.size());
    for (std::size_t k = 0; k < st.targets.size(); ++k) {
        out.put<std::uint32_t>(st.targets[k]);
        out.put<double>(st.start_times[k]);
    }

    out.put<std::uint64_t>(w.pending.size());
    for (const auto& a : w.pending) {
        out.put<std::int64_t>(a.tick);
        out.put<std::uint32_t>(a.neuron);
    }

    const auto& payload = out.bytes();
    detail::ByteWriter image;
    for (char c : checkpoint_magic) image.put<char>(c);
    image.put<std::uint32_t>(checkpoint_version);
    image.put<std::uint64_t>(payload.size());
    auto bytes = std::move(image.bytes());
    bytes.insert(bytes.end(), payload.begin(), payload.end());
    return bytes;
}

struct RestoredCheckpoint {
    World world;
    double dt_membrane = 0.0;
    double t_synaptic_tick = 0.0;
};

inline RestoredCheckpoint restore(std::span<const std::uint8_t> image) {
    if (image.size() < 16 || std::memcmp(image.data(), checkpoint_magic, 4) != 0)
        throw CheckpointError("checkpoint: bad magic (not an HHCK file)");
    detail::ByteReader header(image.subspan(4, 12));
    const auto version = header.get<std::uint32_t>();
    if (version != checkpoint_version)
        throw CheckpointError("checkpoint: unsupported format version " + std::to_string(version));
    const auto length = header.get<std::uint64_t>();
    if (length != image.size() - 16) throw CheckpointError("checkpoint: payload length mismatch");

    detail::ByteReader in(image.subspan(16));
    RestoredCheckpoint rc;
    World& w = rc.world;
    w.seed = in.get<std::uint64_t>();
    w.step = in.get<std::int64_t>();
    rc.dt_membrane = in.get<double>();
    rc.t_synaptic_tick = in.get<double>();
    w.spike_count = in.get<std::uint64_t>();

    const auto n = in.get_count(67);
    w.topology.neuron_types.resize(n);
    w.topology.delays.resize(n);
    w.neurons.resize(n);
    w.i_syn.resize(n);
    w.spike_history.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto type = in.get<std::uint8_t>();
        if (type > 1) throw CheckpointError("checkpoint: corrupt neuron type");
        w.topology.neuron_types[i] = static_cast<NeuronType>(type);
        w.topology.delays[i] = in.get<double>();
        auto& s = w.neurons[i];
        s.u = in.get<double>();
        s.gates.m = in.get<double>();
        s.gates.h = in.get<double>();
        s.gates.n = in.get<double>();
        const bool has_last = in.get_bool();
        const double last = in.get<double>();
        if (has_last) s.last_spike_time = last;
        s.is_above_threshold = in.get_bool();
        w.i_syn[i] = in.get<double>();
        const auto h = in.get_count(8);
        w.spike_history[i].resize(h);
        for (auto& t : w.spike_history[i]) t = in.get<double>();
    }

    const auto n_syn = in.get_count(49);
    w.topology.synapses.resize(n_syn);
    w.synapse_counters.resize(n_syn);
    for (std::size_t k = 0; k < n_syn; ++k) {
        auto& s = w.topology.synapses[k];
        s.pre_id = in.get<std::uint32_t>();
        s.post_id = in.get<std::uint32_t>();
        if (s.pre_id >= n || s.post_id >= n) throw CheckpointError("checkpoint: synapse endpoint out of range");
        s.pre_is_excitatory = in.get_bool();
        s.receptors = in.get<double>();
        s.receptors_initial = in.get<double>();
        s.pool = in.get<double>();
        s.next_spont_time = in.get<double>();
        w.synapse_counters[k] = in.get<std::uint64_t>();
    }

    auto& st = w.stimulus;
    st.amplitude = in.get<double>();
    st.duration = in.get<double>();
    const auto n_targets = in.get_count(12);
    st.targets.resize(n_targets);
    st.start_times.resize(n_targets);
    for (std::size_t k = 0; k < n_targets; ++k) {
        st.targets[k] = in.get<std::uint32_t>();
        st.start_times[k] = in.get<double>();
    }

    const auto n_pending = in.get_count(12);
    w.pending.resize(n_pending);
    for (auto& a : w.pending) {
        a.tick = in.get<std::int64_t>();
        a.neuron = in.get<std::uint32_t>();
    }
    if (!in.done()) throw CheckpointError("checkpoint: trailing bytes after payload");
    return rc;
}

/// Restored world ready to run under `sim`; rejects a grid mismatch.
inline World restore_for(std::span<const std::uint8_t> image, const SimConfig& sim) {
    auto rc = restore(image);
    if (rc.dt_membrane != sim.dt_membrane || rc.t_synaptic_tick != sim.t_synaptic_tick)
        throw CheckpointError("checkpoint: time grid differs from the current configuration");
    return std::move(rc.world);
}

inline void write_checkpoint_file(const std::string& path, const std::vector<std::uint8_t>& image) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw CheckpointError("checkpoint: cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(image.data()), static_cast<std::streamsize>(image.size()));
    if (!f) throw CheckpointError("checkpoint: write failed for " + path);
}

inline std::vector<std::uint8_t> read_checkpoint_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CheckpointError("checkpoint: cannot open " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace hhnet
