// Single-compartment Hodgkin-Huxley neuron: rate functions, gating and
// membrane integration, threshold-crossing spike detection.
//
// Units: mV, ms, uA, uF, mS. Rates are per ms.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace hhnet {

struct NeuronParams {
    double u_rest = -65.0;
    double u_thres = -35.0;
    double u_max = 700.0;
    double u_min = -100.0;
    double E_Na = 50.0;
    double E_K = -77.0;
    double E_L = -60.0;
    double g_Na = 120.0;
    double g_K = 50.0;
    double g_L = 0.3;
    double C_m = 0.1;
    double T_celsius = 20.0;
    double tau_m = 0.3;
    double tau_n = 0.32;
    double tau_h = 0.6;
    double epsilon = 1e-6;
    double min_isi = 2.0;  // ms, spike double-count guard

    void validate() const {
        if (!(u_min < u_rest && u_rest < u_thres && u_thres < u_max))
            throw std::invalid_argument("neuron: require u_min < u_rest < u_thres < u_max");
        if (g_Na < 0 || g_K < 0 || g_L < 0) throw std::invalid_argument("neuron: conductances must be >= 0");
        if (!(C_m > 0)) throw std::invalid_argument("neuron: C_m must be > 0");
        if (!(tau_m > 0 && tau_n > 0 && tau_h > 0)) throw std::invalid_argument("neuron: tau_* must be > 0");
        if (!(epsilon > 0)) throw std::invalid_argument("neuron: epsilon must be > 0");
        if (!(min_isi >= 0)) throw std::invalid_argument("neuron: min_isi must be >= 0");
    }
};

struct GatingState {
    double m = 0.0;
    double h = 0.0;
    double n = 0.0;

    friend bool operator==(const GatingState&, const GatingState&) = default;
};

struct NeuronState {
    double u = -65.0;
    GatingState gates;
    std::optional<double> last_spike_time;
    bool is_above_threshold = false;

    friend bool operator==(const NeuronState&, const NeuronState&) = default;
};

struct RateConstants {
    double alpha_m, beta_m;
    double alpha_n, beta_n;
    double alpha_h, beta_h;
};

/// Temperature factor 3^((T - 6.3) / 10).
inline double temperature_factor(const NeuronParams& p) {
    return std::pow(3.0, (p.T_celsius - 6.3) / 10.0);
}

/// Rate functions with a precomputed temperature factor. The epsilon terms
/// keep alpha_m and alpha_n finite near their removable singularities
/// (du = 25 and du = 10); within 200 eps of them the limit is used.
///
/// exp(-0.1 du) is shared by alpha_m, alpha_n, beta_h and (through its square
/// root) alpha_h; this changes results only at the rounding level.
inline RateConstants rate_constants(double u, const NeuronParams& p, double phi) {
    constexpr double e1 = 2.718281828459045235;   // e
    constexpr double e25 = 12.18249396070347343;  // e^2.5
    constexpr double e3 = 20.08553692318766774;   // e^3
    const double du = u - p.u_rest;
    const double eps = p.epsilon;
    const double x = std::exp(-0.1 * du);
    RateConstants r;
    // Inside the band the guarded quotients misbehave: for alpha_n the zeros
    // of numerator (du = 10 + 100 eps) and denominator (du = 10 + 10 eps)
    // differ, leaving a pole and a negative stretch. Use the limit series
    // s / (e^s - 1) ~ 1 - s/2 there instead.
    const double band = 200.0 * eps;
    const double ym = du - 25.0, yn = du - 10.0;
    r.alpha_m = std::abs(ym) < band ? phi * (1.0 + 0.05 * ym) : phi * (eps + 2.5 - 0.1 * du) / (eps + e25 * x - 1.0);
    r.alpha_n = std::abs(yn) < band ? 0.1 * phi * (1.0 + 0.05 * yn)
                                    : phi * (eps + 0.1 - 0.01 * du) / (eps + e1 * x - 1.0);
    r.alpha_h = 0.07 * phi * std::sqrt(x);
    r.beta_m = 4.0 * phi * std::exp(-du / 18.0);
    r.beta_n = 0.125 * phi * std::sqrt(std::sqrt(std::sqrt(x)));
    r.beta_h = phi / (e3 * x + 1.0);
    return r;
}

inline RateConstants rate_constants(double u, const NeuronParams& p) {
    return rate_constants(u, p, temperature_factor(p));
}

namespace detail {
inline double euler_gate(double x, double alpha, double beta, double tau, double dt) {
    return std::clamp(x + dt * (1.0 / tau) * (alpha * (1.0 - x) - beta * x), 0.0, 1.0);
}
}  // namespace detail

/// Forward-Euler gating update, clamped to [0, 1].
inline GatingState gating_step(const GatingState& g, const RateConstants& r, const NeuronParams& p, double dt) {
    return {detail::euler_gate(g.m, r.alpha_m, r.beta_m, p.tau_m, dt),
            detail::euler_gate(g.h, r.alpha_h, r.beta_h, p.tau_h, dt),
            detail::euler_gate(g.n, r.alpha_n, r.beta_n, p.tau_n, dt)};
}

/// Steady-state gates alpha / (alpha + beta) at voltage u.
inline GatingState steady_state_gates(double u, const NeuronParams& p) {
    const auto r = rate_constants(u, p);
    return {r.alpha_m / (r.alpha_m + r.beta_m), r.alpha_h / (r.alpha_h + r.beta_h),
            r.alpha_n / (r.alpha_n + r.beta_n)};
}

inline NeuronState resting_state(const NeuronParams& p) {
    NeuronState s;
    s.u = p.u_rest;
    s.gates = steady_state_gates(p.u_rest, p);
    return s;
}

/// Ionic current I_Na + I_K + I_L at voltage u under the given gates.
inline double ionic_current(double u, const GatingState& g, const NeuronParams& p) {
    const double m3 = g.m * g.m * g.m;
    const double n2 = g.n * g.n;
    const double i_na = p.g_Na * (u - p.E_Na) * m3 * g.h;
    const double i_k = p.g_K * (u - p.E_K) * n2 * n2;
    const double i_l = p.g_L * (u - p.E_L);
    return i_na + i_k + i_l;
}

/// Euler membrane update using the already-advanced gates; u is clamped to
/// [u_min, u_max]. Spike bookkeeping fields are carried over unchanged.
inline NeuronState membrane_step(const NeuronState& s, const GatingState& gates_next, double i_syn, double i_ext,
                                 const NeuronParams& p, double dt) {
    NeuronState out = s;
    const double du_dt = (-ionic_current(s.u, gates_next, p) + i_syn + i_ext) * (1.0 / p.C_m);
    out.u = std::clamp(s.u + dt * du_dt, p.u_min, p.u_max);
    out.gates = gates_next;
    return out;
}

/// Upward crossing of u_thres, subject to the min_isi guard. Updates the
/// spike bookkeeping of `after` and returns the spike time if one fired.
inline std::optional<double> detect_spike(const NeuronState& before, NeuronState& after, const NeuronParams& p,
                                          double t) {
    const bool above = after.u >= p.u_thres;
    const bool crossed = before.u < p.u_thres && above;
    after.is_above_threshold = above;
    if (!crossed) return std::nullopt;
    if (before.last_spike_time && t - *before.last_spike_time < p.min_isi) return std::nullopt;
    after.last_spike_time = t;
    return t;
}

/// One full substep: rates at the current voltage, gates, then membrane.
/// Returns the spike time if the step produced one.
inline std::optional<double> advance_neuron(NeuronState& s, double i_syn, double i_ext, const NeuronParams& p,
                                            double phi, double dt, double t_after) {
    const auto rates = rate_constants(s.u, p, phi);
    const auto gates = gating_step(s.gates, rates, p, dt);
    NeuronState next = membrane_step(s, gates, i_syn, i_ext, p, dt);
    const auto spike = detect_spike(s, next, p, t_after);
    s = next;
    return spike;
}

/// advance_neuron with the loop-invariant coefficients hoisted. Produces
/// bit-identical results; used by the engine's inner loop.
class NeuronKernel {
public:
    NeuronKernel(const NeuronParams& p, double dt)
        : p_(p), phi_(temperature_factor(p)), dt_(dt),
          c_m_(dt * (1.0 / p.tau_m)), c_h_(dt * (1.0 / p.tau_h)), c_n_(dt * (1.0 / p.tau_n)), inv_c_(1.0 / p.C_m) {}

    bool advance(NeuronState& s, double i_syn, double i_ext, double t_after) const {
        const auto r = rate_constants(s.u, p_, phi_);
        const double u = s.u;
        const double m = std::clamp(s.gates.m + c_m_ * (r.alpha_m * (1.0 - s.gates.m) - r.beta_m * s.gates.m), 0.0, 1.0);
        const double h = std::clamp(s.gates.h + c_h_ * (r.alpha_h * (1.0 - s.gates.h) - r.beta_h * s.gates.h), 0.0, 1.0);
        const double n = std::clamp(s.gates.n + c_n_ * (r.alpha_n * (1.0 - s.gates.n) - r.beta_n * s.gates.n), 0.0, 1.0);
        s.gates = {m, h, n};
        const double du_dt = (-ionic_current(u, s.gates, p_) + i_syn + i_ext) * inv_c_;
        s.u = std::clamp(u + dt_ * du_dt, p_.u_min, p_.u_max);

        const bool above = s.u >= p_.u_thres;
        const bool crossed = u < p_.u_thres && above;
        s.is_above_threshold = above;
        if (!crossed) return false;
        if (s.last_spike_time && t_after - *s.last_spike_time < p_.min_isi) return false;
        s.last_spike_time = t_after;
        return true;
    }

    const NeuronParams& params() const { return p_; }
    double phi() const { return phi_; }

private:
    NeuronParams p_;
    double phi_, dt_;
    double c_m_, c_h_, c_n_;
    double inv_c_;
};

}  // namespace hhnet
