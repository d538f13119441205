#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hhnet/cli.hpp"

namespace {

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw CLI::ValidationError("bad list item '" + item + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hodgkin-Huxley recurrent network simulator and spike-train analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(hhnet::version));

    hhnet::cli::SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Run a network simulation");
    simulate->add_option("--config", sim.config, "Config file (sectioned key = value, or a run_manifest.json)")->required();
    simulate->add_option("--out", sim.out_dir, "Output directory")->required();
    simulate->add_option("--seed", sim.seed, "Override sim.seed");
    simulate->add_option("--duration", sim.duration, "Override sim.duration (s)");
    simulate->add_option("--workers", sim.workers, "Worker threads (HHNET_THREADS takes precedence)");
    simulate->add_option("--checkpoint-every", sim.checkpoint_every, "Write a checkpoint every N seconds");
    simulate->add_option("--resume", sim.resume, "Continue from a checkpoint file");

    hhnet::cli::AnalyzeOptions an;
    std::string windows = "1,10,50";
    std::string fano_windows = "5,10,50";
    auto* analyze = app.add_subcommand("analyze", "Rate, participation and Fano statistics of a spike file");
    analyze->add_option("--spikes", an.spikes, "Spike CSV")->required();
    analyze->add_option("--duration", an.duration, "Recording duration (s)")->required();
    analyze->add_option("--neurons", an.neurons, "Neuron count")->capture_default_str();
    analyze->add_option("--windows", windows, "Participation windows (s), comma separated")->capture_default_str();
    analyze->add_option("--fano-windows", fano_windows, "Fano windows (s), comma separated")->capture_default_str();
    analyze->add_option("--fano-bin", an.fano_bin, "Fano count bin (s)")->capture_default_str();
    analyze->add_option("--out", an.out, "Report JSON path; plot CSVs are written next to it")->required();

    hhnet::cli::RasterOptions ra;
    auto* raster = app.add_subcommand("raster", "Export raster rows, optionally down-sampled");
    raster->add_option("--spikes", ra.spikes, "Spike CSV")->required();
    raster->add_option("--out", ra.out, "Output CSV")->required();
    raster->add_option("--downsample", ra.downsample, "Keep at most K spikes per second");

    std::string report_path;
    auto* report = app.add_subcommand("report", "Print the summary tables of an analysis report");
    report->add_option("--report", report_path, "Report JSON written by analyze")->required();

    try {
        app.parse(argc, argv);
        if (*analyze) {
            an.windows = parse_list(windows);
            an.fano_windows = parse_list(fano_windows);
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : hhnet::cli::validation_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return hhnet::cli::validation_error;
    }

    if (*simulate) return hhnet::cli::cmd_simulate(sim);
    if (*analyze) return hhnet::cli::cmd_analyze(an);
    if (*raster) return hhnet::cli::cmd_raster(ra);
    return hhnet::cli::cmd_report(report_path);
}
