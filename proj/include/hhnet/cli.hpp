// Command implementations behind the hhnet executable. Each returns the
// process exit code: 0 success, 1 validation or input error, 2 numeric abort.
#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "checkpoint.hpp"
#include "config.hpp"
#include "engine.hpp"
#include "io.hpp"
#include "report.hpp"
#include "version.hpp"

namespace hhnet::cli {

enum ExitCode : int { ok = 0, validation_error = 1, numeric_abort = 2 };

struct SimulateOptions {
    std::string config;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> duration;  // s
    std::optional<std::uint32_t> workers;
    std::optional<double> checkpoint_every;  // s
    std::optional<std::string> resume;
};

struct AnalyzeOptions {
    std::string spikes;
    double duration = 0.0;  // s
    std::uint32_t neurons = 200;
    std::vector<double> windows{1.0, 10.0, 50.0};
    std::vector<double> fano_windows{5.0, 10.0, 50.0};
    double fano_bin = 1.0;
    std::string out;
};

struct RasterOptions {
    std::string spikes;
    std::string out;
    std::optional<std::size_t> downsample;
};

/// HHNET_THREADS, when set to a positive integer, wins over --workers.
inline std::optional<std::uint32_t> env_threads() {
    const char* v = std::getenv("HHNET_THREADS");
    if (!v || !*v) return std::nullopt;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1) return std::nullopt;
    return static_cast<std::uint32_t>(n);
}

namespace detail {

inline void write_text_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << text;
}

inline std::string format_time_tag(double ms) {
    std::ostringstream s;
    s << static_cast<long long>(std::llround(ms)) << "ms";
    return s.str();
}

}  // namespace detail

inline int cmd_simulate(const SimulateOptions& opt, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    namespace fs = std::filesystem;
    RunConfig cfg;
    try {
        cfg = load_config(opt.config);
        if (opt.seed) cfg.sim.seed = *opt.seed;
        if (opt.duration) cfg.sim.duration = *opt.duration;
        if (opt.workers) cfg.sim.worker_count = *opt.workers;
        if (auto t = env_threads()) cfg.sim.worker_count = *t;
        if (opt.checkpoint_every) cfg.sim.checkpoint_period = *opt.checkpoint_every;
        cfg.validate();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return validation_error;
    }
    const SimConfig sim = cfg.resolved_sim();

    std::optional<std::int64_t> checkpoint_steps;
    if (sim.checkpoint_period) {
        const double ms = *sim.checkpoint_period * 1000.0;
        if (!SimConfig::is_multiple(ms, sim.t_synaptic_tick)) {
            err << "error: checkpoint period must be a multiple of the synaptic tick\n";
            return validation_error;
        }
        checkpoint_steps = SimConfig::ratio(ms, sim.dt_membrane);
    }

    World world;
    try {
        if (opt.resume) {
            world = restore_for(read_checkpoint_file(*opt.resume), sim);
            if (world.seed != sim.seed)
                log << "note: continuing the checkpoint's seed " << world.seed << " (config seed " << sim.seed << ")\n";
            if (world.step > sim.total_steps()) {
                err << "error: checkpoint time is past the requested duration\n";
                return validation_error;
            }
        } else {
            world = make_world(cfg.model, cfg.network, cfg.stimulus, sim.seed);
        }
        fs::create_directories(opt.out_dir);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return validation_error;
    }

    const fs::path out(opt.out_dir);
    const std::int64_t start_step = world.step;
    Engine engine(cfg.model, sim, std::move(world));

    std::string status = "ok";
    std::string diagnostic;
    RunSummary summary;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        auto save = [&](const Engine& e) {
            if (checkpoint_steps && e.world().step % *checkpoint_steps == 0) {
                const auto name = "checkpoint_" + detail::format_time_tag(e.time_ms()) + ".hhck";
                write_checkpoint_file((out / name).string(), checkpoint(e));
            }
        };
        summary = engine.run(save);
        // the end state too, so a run can be extended later
        if (engine.world().step > start_step) save(engine);
    } catch (const NumericError& e) {
        status = "numeric_abort";
        diagnostic = e.what();
        err << "numeric abort: " << e.what() << '\n';
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    {
        std::ofstream f(out / "spikes.csv", std::ios::trunc);
        write_spike_csv(f, engine.recorder().spikes(), sim.dt_membrane);
    }
    if (status != "ok") detail::write_text_file(out / "spikes.csv.invalid", diagnostic + '\n');
    else fs::remove(out / "spikes.csv.invalid");

    if (sim.record_voltage && status == "ok")
        write_voltage_file((out / "voltages.hhv").string(), engine.recorder().voltage(), sim.voltage_sample_period,
                           static_cast<double>(engine.recorder().first_sample_step()) * sim.dt_membrane);

    RunConfig resolved = cfg;
    resolved.sim.seed = engine.world().seed;
    nlohmann::json manifest;
    manifest["config"] = config_to_json(resolved);
    manifest["seed"] = engine.world().seed;
    manifest["code_version"] = version;
    manifest["status"] = status;
    if (!diagnostic.empty()) manifest["diagnostic"] = diagnostic;
    manifest["wall_time_s"] = wall;
    manifest["start_time_ms"] = static_cast<double>(start_step) * sim.dt_membrane;
    manifest["end_time_ms"] = engine.time_ms();
    manifest["spike_count"] = engine.recorder().spikes().size();
    manifest["steps_per_second"] = summary.steps_per_second;
    manifest["neuron_updates_per_second"] = summary.neuron_updates_per_second;
    manifest["resumed_from"] = opt.resume ? nlohmann::json(*opt.resume) : nlohmann::json(nullptr);
    detail::write_text_file(out / "run_manifest.json", manifest.dump(2) + '\n');

    log << "spikes: " << engine.recorder().spikes().size() << ", simulated " << engine.time_ms() / 1000.0
        << " s in " << wall << " s wall (" << summary.neuron_updates_per_second << " neuron updates/s)\n";
    return status == "ok" ? ok : ExitCode::numeric_abort;
}

inline int cmd_analyze(const AnalyzeOptions& opt, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    namespace fs = std::filesystem;
    try {
        SpikeTrain train;
        train.duration = opt.duration;
        train.n_neurons = opt.neurons;
        if (!(opt.duration > 0)) throw std::invalid_argument("--duration must be > 0");
        train.spikes = read_spike_csv(opt.spikes);
        train.normalize();
        const auto report = analyze(train, opt.windows, opt.fano_windows, opt.fano_bin);

        const fs::path out(opt.out);
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        detail::write_text_file(out, report_to_json(report).dump(2) + '\n');
        const auto stem = (out.parent_path() / out.stem()).string();
        {
            std::ofstream f(stem + "_rates.csv");
            write_rates_csv(f, report.rates);
        }
        {
            std::ofstream f(stem + "_participation.csv");
            write_participation_csv(f, report.participation);
        }
        {
            std::ofstream f(stem + "_fano.csv");
            write_fano_csv(f, report.fano);
        }
        print_summary(log, report);
    } catch (const ParseError& e) {
        err << "error: " << opt.spikes << ": " << e.what() << '\n';
        return validation_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return validation_error;
    }
    return ok;
}

inline int cmd_raster(const RasterOptions& opt, std::ostream& err = std::cerr) {
    try {
        SpikeTrain train;
        train.spikes = read_spike_csv(opt.spikes);
        if (opt.downsample && *opt.downsample == 0) throw std::invalid_argument("--downsample must be >= 1");
        std::ofstream f(opt.out, std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + opt.out);
        raster_export(train, f, opt.downsample);
        if (!f) throw std::runtime_error("write failed for " + opt.out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return validation_error;
    }
    return ok;
}

/// Re-renders the console summary from a report written by `analyze`.
inline int cmd_report(const std::string& report_path, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    try {
        std::ifstream f(report_path);
        if (!f) throw std::runtime_error("cannot read " + report_path);
        const auto doc = nlohmann::json::parse(f);
        AnalysisReport r;
        r.rates.rates = doc.at("rates").get<std::vector<double>>();
        for (double x : r.rates.rates) {
            switch (classify_rate(x)) {
                case RateClass::below_1hz: ++r.rates.n_below_1hz; break;
                case RateClass::from_1_to_5hz: ++r.rates.n_1_to_5hz; break;
                case RateClass::above_5hz: ++r.rates.n_above_5hz; break;
            }
        }
        r.rates.mean_hz = doc.at("population_rate_mean_hz").get<double>();
        r.rates.std_hz = doc.at("population_rate_std_hz").get<double>();
        for (const auto& [key, v] : doc.at("participation").items()) {
            ParticipationStats p;
            p.window = std::stod(key);
            p.mean_pct = v.at("mean_pct").get<double>();
            p.std_pct = v.at("std_pct").get<double>();
            r.participation.push_back(p);
        }
        std::sort(r.participation.begin(), r.participation.end(),
                  [](const auto& a, const auto& b) { return a.window < b.window; });
        for (const auto& [key, v] : doc.at("fano").items()) {
            FanoSeries s;
            s.window = std::stod(key);
            s.bin = v.at("bin_s").get<double>();
            for (const auto& pt : v.at("series")) {
                FanoPoint p;
                p.t_start = pt.at("t_start_s").get<double>();
                p.t_end = pt.at("t_end_s").get<double>();
                if (!pt.contains("empty")) {
                    p.mean = pt.at("mean").get<double>();
                    p.min = pt.at("min").get<double>();
                    p.max = pt.at("max").get<double>();
                    p.neurons = pt.at("neurons").get<std::size_t>();
                }
                s.points.push_back(p);
            }
            r.fano.push_back(s);
        }
        std::sort(r.fano.begin(), r.fano.end(), [](const auto& a, const auto& b) { return a.window < b.window; });
        print_summary(log, r);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return validation_error;
    }
    return ok;
}

}  // namespace hhnet::cli
