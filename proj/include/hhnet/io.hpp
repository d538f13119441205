// Spike CSV and binary voltage file formats.
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "engine.hpp"

namespace hhnet {

struct Spike {
    double time_ms = 0.0;
    std::uint32_t neuron = 0;

    friend bool operator==(const Spike&, const Spike&) = default;
    friend auto operator<=>(const Spike&, const Spike&) = default;
};

/// Malformed spike file row.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

inline constexpr std::string_view spike_csv_header = "time_ms,neuron_id";

inline void write_spike_row(std::ostream& out, double time_ms, std::uint32_t neuron) {
    char buf[64];
    const int len = std::snprintf(buf, sizeof buf, "%.3f,%u\n", time_ms, neuron);
    out.write(buf, len);
}

inline void write_spike_csv(std::ostream& out, const std::vector<Spike>& spikes) {
    out << spike_csv_header << '\n';
    for (const auto& s : spikes) write_spike_row(out, s.time_ms, s.neuron);
}

inline void write_spike_csv(std::ostream& out, const std::vector<SpikeEvent>& events, double dt_ms) {
    out << spike_csv_header << '\n';
    for (const auto& e : events) write_spike_row(out, static_cast<double>(e.step) * dt_ms, e.neuron);
}

namespace detail {
inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}
}  // namespace detail

/// Reads a spike CSV in file order. Blank lines are skipped; anything else
/// that is not `<time>,<id>` raises ParseError with the 1-based line number.
inline std::vector<Spike> read_spike_csv(std::istream& in) {
    std::vector<Spike> spikes;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("missing header", 1);
    ++lineno;
    if (detail::trim(line) != spike_csv_header) throw ParseError("expected header 'time_ms,neuron_id'", lineno);
    while (std::getline(in, line)) {
        ++lineno;
        const auto row = detail::trim(line);
        if (row.empty()) continue;
        const auto comma = row.find(',');
        if (comma == std::string_view::npos) throw ParseError("expected two comma-separated fields", lineno);
        const auto t_field = detail::trim(row.substr(0, comma));
        const auto id_field = detail::trim(row.substr(comma + 1));
        Spike s;
        auto [tp, tec] = std::from_chars(t_field.data(), t_field.data() + t_field.size(), s.time_ms);
        if (tec != std::errc{} || tp != t_field.data() + t_field.size() || !std::isfinite(s.time_ms) || s.time_ms < 0)
            throw ParseError("bad time value '" + std::string(t_field) + "'", lineno);
        auto [ip, iec] = std::from_chars(id_field.data(), id_field.data() + id_field.size(), s.neuron);
        if (iec != std::errc{} || ip != id_field.data() + id_field.size())
            throw ParseError("bad neuron id '" + std::string(id_field) + "'", lineno);
        spikes.push_back(s);
    }
    return spikes;
}

inline std::vector<Spike> read_spike_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open spike file " + path);
    return read_spike_csv(f);
}

inline std::vector<Spike> to_spikes(const std::vector<SpikeEvent>& events, double dt_ms) {
    std::vector<Spike> out;
    out.reserve(events.size());
    for (const auto& e : events) out.push_back({static_cast<double>(e.step) * dt_ms, e.neuron});
    return out;
}

inline constexpr char voltage_magic[4] = {'H', 'H', 'V', '1'};

/// Binary voltage dump: magic, u32 neuron count, u32 sample count, then f32
/// samples neuron-major. A text sidecar at `<path>.txt` records the sample
/// period and the time of the first sample.
inline void write_voltage_file(const std::string& path, const std::vector<std::vector<float>>& samples,
                               double sample_period_ms, double first_sample_ms) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    const auto neurons = static_cast<std::uint32_t>(samples.size());
    const auto count = static_cast<std::uint32_t>(samples.empty() ? 0 : samples.front().size());
    f.write(voltage_magic, 4);
    f.write(reinterpret_cast<const char*>(&neurons), 4);
    f.write(reinterpret_cast<const char*>(&count), 4);
    for (const auto& row : samples) f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
    if (!f) throw std::runtime_error("write failed for " + path);

    std::ofstream side(path + ".txt", std::ios::trunc);
    side << "format = HHV1\n"
         << "neuron_count = " << neurons << '\n'
         << "sample_count = " << count << '\n'
         << "sample_period_ms = " << sample_period_ms << '\n'
         << "first_sample_ms = " << first_sample_ms << '\n'
         << "layout = neuron-major, little-endian f32, mV\n";
}

struct VoltageFile {
    std::uint32_t neurons = 0;
    std::uint32_t samples = 0;
    std::vector<float> data;  // neuron-major

    float at(std::uint32_t neuron, std::uint32_t sample) const {
        return data[static_cast<std::size_t>(neuron) * samples + sample];
    }
};

inline VoltageFile read_voltage_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    char magic[4];
    VoltageFile v;
    f.read(magic, 4);
    if (!f || std::string_view(magic, 4) != std::string_view(voltage_magic, 4))
        throw std::runtime_error(path + ": not an HHV1 file");
    f.read(reinterpret_cast<char*>(&v.neurons), 4);
    f.read(reinterpret_cast<char*>(&v.samples), 4);
    v.data.resize(static_cast<std::size_t>(v.neurons) * v.samples);
    f.read(reinterpret_cast<char*>(v.data.data()), static_cast<std::streamsize>(v.data.size() * 4));
    if (!f) throw std::runtime_error(path + ": truncated voltage file");
    return v;
}

}  // namespace hhnet
