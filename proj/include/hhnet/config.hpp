// Run configuration: every model, network, stimulus and simulation knob
// under a named section, loaded from a flat sectioned key = value file
// (TOML-compatible subset) or from the JSON echo in a run manifest.
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "engine.hpp"

namespace hhnet {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    ModelParams model;
    NetworkConfig network;
    StimulusConfig stimulus;
    SimConfig sim;

    /// Synaptic tick comes from the synapse update period.
    SimConfig resolved_sim() const {
        SimConfig s = sim;
        s.t_synaptic_tick = model.synapse.T_update;
        return s;
    }

    void validate() const {
        model.validate();
        network.validate();
        stimulus.validate();
        resolved_sim().validate();
    }
};

namespace detail {

using FieldRef = std::variant<double*, bool*, std::uint32_t*, std::uint64_t*, PairingScheme*,
                              std::optional<double>*>;

/// Visits every (section, key, field) in canonical order.
template <class F>
void for_each_field(RunConfig& c, F&& f) {
    auto& n = c.model.neuron;
    f("neuron", "u_rest", FieldRef{&n.u_rest});
    f("neuron", "u_thres", FieldRef{&n.u_thres});
    f("neuron", "u_max", FieldRef{&n.u_max});
    f("neuron", "u_min", FieldRef{&n.u_min});
    f("neuron", "E_Na", FieldRef{&n.E_Na});
    f("neuron", "E_K", FieldRef{&n.E_K});
    f("neuron", "E_L", FieldRef{&n.E_L});
    f("neuron", "g_Na", FieldRef{&n.g_Na});
    f("neuron", "g_K", FieldRef{&n.g_K});
    f("neuron", "g_L", FieldRef{&n.g_L});
    f("neuron", "C_m", FieldRef{&n.C_m});
    f("neuron", "T_celsius", FieldRef{&n.T_celsius});
    f("neuron", "tau_m", FieldRef{&n.tau_m});
    f("neuron", "tau_n", FieldRef{&n.tau_n});
    f("neuron", "tau_h", FieldRef{&n.tau_h});
    f("neuron", "epsilon", FieldRef{&n.epsilon});
    f("neuron", "min_isi", FieldRef{&n.min_isi});

    auto& s = c.model.synapse;
    f("synapse", "p_ap_release", FieldRef{&s.p_ap_release});
    f("synapse", "p_spont_ap_release", FieldRef{&s.p_spont_ap_release});
    f("synapse", "mean_N_AP", FieldRef{&s.mean_N_AP});
    f("synapse", "var_N_AP", FieldRef{&s.var_N_AP});
    f("synapse", "mean_N_notAP", FieldRef{&s.mean_N_notAP});
    f("synapse", "var_N_notAP", FieldRef{&s.var_N_notAP});
    f("synapse", "decay_rate", FieldRef{&s.decay_rate});
    f("synapse", "du_per_ves", FieldRef{&s.du_per_ves});
    f("synapse", "g_AMPA", FieldRef{&s.g_AMPA});
    f("synapse", "g_GABA", FieldRef{&s.g_GABA});
    f("synapse", "I_syn_max", FieldRef{&s.I_syn_max});
    f("synapse", "thres_inh", FieldRef{&s.thres_inh});
    f("synapse", "atten_coeff", FieldRef{&s.atten_coeff});
    f("synapse", "atten_floor", FieldRef{&s.atten_floor});
    f("synapse", "T_lookback_AP", FieldRef{&s.T_lookback_AP});
    f("synapse", "T_ves_release_base", FieldRef{&s.T_ves_release_base});
    f("synapse", "T_update", FieldRef{&s.T_update});

    auto& p = c.model.stdp;
    f("stdp", "window", FieldRef{&p.window});
    f("stdp", "tau", FieldRef{&p.tau});
    f("stdp", "amplitude", FieldRef{&p.amplitude});
    f("stdp", "enabled_exc", FieldRef{&p.enabled_exc});
    f("stdp", "enabled_inh", FieldRef{&p.enabled_inh});
    f("stdp", "pairing", FieldRef{&p.pairing});

    auto& w = c.network;
    f("network", "n_neurons", FieldRef{&w.n_neurons});
    f("network", "n_inhibitory", FieldRef{&w.n_inhibitory});
    f("network", "connection_prob", FieldRef{&w.connection_prob});
    f("network", "ampa_init_mean", FieldRef{&w.ampa_init_mean});
    f("network", "ampa_init_var", FieldRef{&w.ampa_init_var});
    f("network", "gaba_init_mean", FieldRef{&w.gaba_init_mean});
    f("network", "gaba_init_var", FieldRef{&w.gaba_init_var});
    f("network", "receptor_spread_is_std", FieldRef{&w.receptor_spread_is_std});
    f("network", "delay_min", FieldRef{&w.delay_min});
    f("network", "delay_max", FieldRef{&w.delay_max});

    auto& st = c.stimulus;
    f("stimulus", "n_targets", FieldRef{&st.n_targets});
    f("stimulus", "amplitude", FieldRef{&st.amplitude});
    f("stimulus", "duration", FieldRef{&st.duration});
    f("stimulus", "onset_min", FieldRef{&st.onset_min});
    f("stimulus", "onset_max", FieldRef{&st.onset_max});

    auto& sim = c.sim;
    f("sim", "dt_membrane", FieldRef{&sim.dt_membrane});
    f("sim", "duration", FieldRef{&sim.duration});
    f("sim", "record_voltage", FieldRef{&sim.record_voltage});
    f("sim", "voltage_sample_period", FieldRef{&sim.voltage_sample_period});
    f("sim", "seed", FieldRef{&sim.seed});
    f("sim", "worker_count", FieldRef{&sim.worker_count});
    f("sim", "checkpoint_period", FieldRef{&sim.checkpoint_period});
}

inline std::string_view strip(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

/// Drops a trailing `# comment` that is not inside a quoted string.
inline std::string_view drop_comment(std::string_view s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

inline double parse_double(std::string_view v, const std::string& where) {
    std::string cleaned;
    for (char ch : v)
        if (ch != '_') cleaned.push_back(ch);
    double d = 0;
    const char* b = cleaned.data();
    const char* e = b + cleaned.size();
    if (!cleaned.empty() && cleaned.front() == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, d);
    if (ec != std::errc{} || p != e || !std::isfinite(d)) throw ConfigError(where + ": expected a number, got '" + std::string(v) + "'");
    return d;
}

template <class Int>
Int parse_int(std::string_view v, const std::string& where) {
    const double d = parse_double(v, where);
    if (d < 0 || d != std::floor(d) || d > static_cast<double>(std::numeric_limits<Int>::max()))
        throw ConfigError(where + ": expected a non-negative integer, got '" + std::string(v) + "'");
    return static_cast<Int>(d);
}

inline bool parse_bool(std::string_view v, const std::string& where) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(where + ": expected true or false, got '" + std::string(v) + "'");
}

inline PairingScheme parse_pairing(std::string_view v, const std::string& where) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
    if (v == "nearest") return PairingScheme::nearest;
    if (v == "all_pairs") return PairingScheme::all_pairs;
    throw ConfigError(where + ": expected \"nearest\" or \"all_pairs\", got '" + std::string(v) + "'");
}

inline void assign_text(FieldRef ref, std::string_view v, const std::string& where) {
    std::visit(
        [&](auto* p) {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, double>) *p = parse_double(v, where);
            else if constexpr (std::is_same_v<T, bool>) *p = parse_bool(v, where);
            else if constexpr (std::is_same_v<T, PairingScheme>) *p = parse_pairing(v, where);
            else if constexpr (std::is_same_v<T, std::optional<double>>) *p = parse_double(v, where);
            else *p = parse_int<T>(v, where);
        },
        ref);
}

inline void assign_json(FieldRef ref, const nlohmann::json& v, const std::string& where) {
    std::visit(
        [&](auto* p) {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw ConfigError(where + ": expected a boolean");
                *p = v.get<bool>();
            } else if constexpr (std::is_same_v<T, PairingScheme>) {
                if (!v.is_string()) throw ConfigError(where + ": expected a string");
                *p = parse_pairing(v.get<std::string>(), where);
            } else if constexpr (std::is_same_v<T, std::optional<double>>) {
                if (v.is_null()) *p = std::nullopt;
                else if (v.is_number()) *p = v.get<double>();
                else throw ConfigError(where + ": expected a number or null");
            } else if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw ConfigError(where + ": expected a number");
                *p = v.get<double>();
            } else {
                if (!v.is_number_unsigned()) throw ConfigError(where + ": expected a non-negative integer");
                *p = v.get<T>();
            }
        },
        ref);
}

}  // namespace detail

/// Parses the sectioned key = value format. Unknown sections or keys,
/// duplicates and malformed values are rejected with the line number.
inline RunConfig parse_config_text(std::string_view text, const std::string& origin = "config") {
    RunConfig cfg;
    std::map<std::string, detail::FieldRef> fields;
    detail::for_each_field(cfg, [&](std::string_view sec, std::string_view key, detail::FieldRef ref) {
        fields.emplace(std::string(sec) + "." + std::string(key), ref);
    });
    std::set<std::string> sections;
    for (const auto& [k, _] : fields) sections.insert(k.substr(0, k.find('.')));

    std::set<std::string> seen;
    std::string section;
    std::size_t lineno = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno);
        const auto line = detail::strip(detail::drop_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header");
            section = std::string(detail::strip(line.substr(1, line.size() - 2)));
            if (!sections.count(section)) throw ConfigError(where + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
        if (section.empty()) throw ConfigError(where + ": key outside of any section");
        const std::string key = section + "." + std::string(detail::strip(line.substr(0, eq)));
        const auto value = detail::strip(line.substr(eq + 1));
        const auto it = fields.find(key);
        if (it == fields.end()) throw ConfigError(where + ": unknown key '" + key + "'");
        if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
        detail::assign_text(it->second, value, where + " (" + key + ")");
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

/// Accepts either a bare sectioned object or a run manifest carrying one
/// under "config".
inline RunConfig parse_config_json(const nlohmann::json& doc, const std::string& origin = "config") {
    const nlohmann::json& root = doc.contains("config") ? doc.at("config") : doc;
    if (!root.is_object()) throw ConfigError(origin + ": expected a JSON object");
    RunConfig cfg;
    std::map<std::string, std::map<std::string, detail::FieldRef>> fields;
    detail::for_each_field(cfg, [&](std::string_view sec, std::string_view key, detail::FieldRef ref) {
        fields[std::string(sec)].emplace(std::string(key), ref);
    });
    for (const auto& [sec, obj] : root.items()) {
        const auto fs = fields.find(sec);
        if (fs == fields.end()) throw ConfigError(origin + ": unknown section '" + sec + "'");
        if (!obj.is_object()) throw ConfigError(origin + ": section '" + sec + "' must be an object");
        for (const auto& [key, v] : obj.items()) {
            const auto f = fs->second.find(key);
            if (f == fs->second.end()) throw ConfigError(origin + ": unknown key '" + sec + "." + key + "'");
            detail::assign_json(f->second, v, origin + " (" + sec + "." + key + ")");
        }
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(path + ": " + e.what());
        }
        return parse_config_json(doc, path);
    }
    return parse_config_text(text, path);
}

/// Fully resolved configuration as a sectioned JSON object.
inline nlohmann::json config_to_json(const RunConfig& cfg) {
    RunConfig copy = cfg;
    nlohmann::json out = nlohmann::json::object();
    detail::for_each_field(copy, [&](std::string_view sec, std::string_view key, detail::FieldRef ref) {
        auto& slot = out[std::string(sec)][std::string(key)];
        std::visit(
            [&](auto* p) {
                using T = std::remove_pointer_t<decltype(p)>;
                if constexpr (std::is_same_v<T, PairingScheme>)
                    slot = *p == PairingScheme::nearest ? "nearest" : "all_pairs";
                else if constexpr (std::is_same_v<T, std::optional<double>>)
                    slot = *p ? nlohmann::json(**p) : nlohmann::json(nullptr);
                else
                    slot = *p;
            },
            ref);
    });
    return out;
}

}  // namespace hhnet
