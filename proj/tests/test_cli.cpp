#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "engine_fixtures.hpp"
#include "hhnet/checkpoint.hpp"
#include "hhnet/cli.hpp"

namespace fs = std::filesystem;
using namespace hhnet;

namespace {

const std::string cli = HHNET_CLI_PATH;

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("hhnet_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    int run(const std::string& args, const std::string& env = "") const {
        const std::string cmd = env + " '" + cli + "' " + args + " > '" + path("stdout.txt") + "' 2> '" +
                                path("stderr.txt") + "'";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string slurp(const std::string& p) const {
        std::ifstream f(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    }

    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path(name)) << text;
        return path(name);
    }

    // 40-neuron network, short run
    std::string small_config(double duration = 0.3) const {
        std::ostringstream s;
        s << "[network]\nn_neurons = 40\nn_inhibitory = 8\nconnection_prob = 0.3\n"
          << "[stimulus]\nn_targets = 8\nonset_min = 5\nonset_max = 30\nduration = 50\n"
          << "[stdp]\namplitude = 10\n"
          << "[sim]\nduration = " << duration << "\nseed = 3\n";
        return write("small.cfg", s.str());
    }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateWritesOutputs) {
    const auto cfg = small_config();
    ASSERT_EQ(run("simulate --config " + cfg + " --out " + path("out")), 0) << slurp(path("stderr.txt"));
    const auto spikes = slurp(path("out/spikes.csv"));
    EXPECT_EQ(spikes.rfind("time_ms,neuron_id\n", 0), 0u);
    EXPECT_GT(std::count(spikes.begin(), spikes.end(), '\n'), 1);
    const auto manifest = nlohmann::json::parse(slurp(path("out/run_manifest.json")));
    EXPECT_EQ(manifest["status"], "ok");
    EXPECT_EQ(manifest["seed"], 3);
    EXPECT_EQ(manifest["code_version"], std::string(version));
    EXPECT_TRUE(manifest.contains("wall_time_s"));
    EXPECT_EQ(manifest["config"]["network"]["n_neurons"], 40);
    EXPECT_FALSE(fs::exists(path("out/voltages.hhv")));
}

TEST_F(Cli, DurationZeroGivesEmptySpikeFile) {
    const auto cfg = small_config();
    ASSERT_EQ(run("simulate --config " + cfg + " --out " + path("out") + " --duration 0"), 0);
    EXPECT_EQ(slurp(path("out/spikes.csv")), "time_ms,neuron_id\n");
}

TEST_F(Cli, MissingConfigIsValidationError) {
    EXPECT_EQ(run("simulate --config " + path("missing.cfg") + " --out " + path("out")), 1);
    EXPECT_NE(slurp(path("stderr.txt")).find(path("missing.cfg")), std::string::npos);
}

TEST_F(Cli, InvalidConfigIsValidationError) {
    const auto cfg = write("bad.cfg", "[neuron]\nC_m = -1\n");
    EXPECT_EQ(run("simulate --config " + cfg + " --out " + path("out")), 1);
    const auto cfg2 = write("bad2.cfg", "[neuron]\nwhat = 1\n");
    EXPECT_EQ(run("simulate --config " + cfg2 + " --out " + path("out")), 1);
    EXPECT_NE(slurp(path("stderr.txt")).find("bad2.cfg:2"), std::string::npos);
}

TEST_F(Cli, BadFlagsAreValidationErrors) {
    EXPECT_EQ(run("simulate --out x"), 1);
    EXPECT_EQ(run("frobnicate"), 1);
    EXPECT_EQ(run("simulate --config " + small_config() + " --out " + path("o") + " --workers zero"), 1);
}

TEST_F(Cli, SameSeedByteIdentical) {
    const auto cfg = small_config();
    ASSERT_EQ(run("simulate --config " + cfg + " --out " + path("a") + " --seed 7"), 0);
    ASSERT_EQ(run("simulate --config " + cfg + " --out " + path("b") + " --seed 7"), 0);
    EXPECT_EQ(slurp(path("a/spikes.csv")), slurp(path("b/spikes.csv")));
    ASSERT_EQ(run("simulate --config " + cfg + " --out " + path("c") + " --seed 7 --workers 3"), 0);
    EXPECT_EQ(slurp(path("a/spikes.csv")), slurp(path("c/spikes.csv")));
    ASSERT_EQ(run("simulate --config " + cfg + " --out " + path("d") + " --seed 8"), 0);
    EXPECT_NE(slurp(path("a/spikes.csv")), slurp(path("d/spikes.csv")));
}

TEST_F(Cli, EnvThreadsOverridesWorkers) {
    const auto cfg = small_config(0.05);
    ASSERT_EQ(run("simulate --config " + cfg + " --out " + path("a") + " --workers 1", "HHNET_THREADS=3"), 0);
    const auto manifest = nlohmann::json::parse(slurp(path("a/run_manifest.json")));
    EXPECT_EQ(manifest["config"]["sim"]["worker_count"], 3);
}

TEST_F(Cli, ManifestConfigReproducesRun) {
    const auto cfg = small_config();
    ASSERT_EQ(run("simulate --config " + cfg + " --out " + path("a") + " --seed 11"), 0);
    ASSERT_EQ(run("simulate --config " + path("a/run_manifest.json") + " --out " + path("b")), 0)
        << slurp(path("stderr.txt"));
    EXPECT_EQ(slurp(path("a/spikes.csv")), slurp(path("b/spikes.csv")));
    auto ma = nlohmann::json::parse(slurp(path("a/run_manifest.json")));
    auto mb = nlohmann::json::parse(slurp(path("b/run_manifest.json")));
    EXPECT_EQ(ma["config"], mb["config"]);
}

TEST_F(Cli, CheckpointAndResume) {
    const auto cfg = small_config(0.4);
    ASSERT_EQ(run("simulate --config " + cfg + " --out " + path("full")), 0);
    ASSERT_EQ(run("simulate --config " + cfg + " --out " + path("part") + " --duration 0.2 --checkpoint-every 0.1"), 0);
    ASSERT_TRUE(fs::exists(path("part/checkpoint_100ms.hhck")));
    ASSERT_TRUE(fs::exists(path("part/checkpoint_200ms.hhck")));
    ASSERT_EQ(run("simulate --config " + cfg + " --out " + path("rest") + " --resume " +
                  path("part/checkpoint_200ms.hhck")),
              0)
        << slurp(path("stderr.txt"));
    const auto rest = slurp(path("rest/spikes.csv"));
    const auto joined = slurp(path("part/spikes.csv")) + rest.substr(rest.find('\n') + 1);
    EXPECT_EQ(joined, slurp(path("full/spikes.csv")));
    const auto manifest = nlohmann::json::parse(slurp(path("rest/run_manifest.json")));
    EXPECT_EQ(manifest["resumed_from"], path("part/checkpoint_200ms.hhck"));
    EXPECT_EQ(manifest["start_time_ms"], 200.0);
}

TEST_F(Cli, CheckpointPeriodMustAlignWithTick) {
    EXPECT_EQ(run("simulate --config " + small_config() + " --out " + path("o") + " --checkpoint-every 0.0005"), 1);
}

TEST_F(Cli, CorruptCheckpointRejected) {
    write("junk.hhck", "not a checkpoint");
    EXPECT_EQ(run("simulate --config " + small_config() + " --out " + path("o") + " --resume " + path("junk.hhck")), 1);
}

TEST_F(Cli, NumericAbortExitsTwoAndFlagsOutput) {
    // a checkpoint whose state holds a NaN voltage
    ModelParams params;
    auto world = small_world(params, 3, 40, 8, 8);
    world.neurons[5].u = std::nan("");
    Engine e(params, short_sim(0.3), std::move(world));
    write_checkpoint_file(path("nan.hhck"), checkpoint(e));
    const auto cfg = small_config();
    EXPECT_EQ(run("simulate --config " + cfg + " --out " + path("o") + " --resume " + path("nan.hhck")), 2);
    EXPECT_TRUE(fs::exists(path("o/spikes.csv.invalid")));
    const auto manifest = nlohmann::json::parse(slurp(path("o/run_manifest.json")));
    EXPECT_EQ(manifest["status"], "numeric_abort");
    EXPECT_NE(slurp(path("stderr.txt")).find("non-finite"), std::string::npos);
}

TEST_F(Cli, VoltageFile) {
    const auto cfg = write("v.cfg",
                           "[network]\nn_neurons = 40\nn_inhibitory = 8\n[stimulus]\nn_targets = 3\n"
                           "[sim]\nduration = 0.05\nrecord_voltage = true\n");
    ASSERT_EQ(run("simulate --config " + cfg + " --out " + path("o")), 0) << slurp(path("stderr.txt"));
    const auto v = read_voltage_file(path("o/voltages.hhv"));
    EXPECT_EQ(v.neurons, 40u);
    EXPECT_EQ(v.samples, 50u);
    EXPECT_FLOAT_EQ(v.at(0, 0), -65.0f);
    EXPECT_NE(slurp(path("o/voltages.hhv.txt")).find("sample_period_ms"), std::string::npos);
}

TEST_F(Cli, AnalyzeHeaderOnly) {
    write("s.csv", "time_ms,neuron_id\n");
    ASSERT_EQ(run("analyze --spikes " + path("s.csv") + " --duration 60 --neurons 200 --out " + path("r.json")), 0)
        << slurp(path("stderr.txt"));
    const auto doc = nlohmann::json::parse(slurp(path("r.json")));
    EXPECT_EQ(doc["population_rate_mean_hz"], 0.0);
    EXPECT_EQ(doc["rates"].size(), 200u);
    for (const auto& r : doc["rates"]) EXPECT_EQ(r, 0.0);
    EXPECT_TRUE(fs::exists(path("r_rates.csv")));
    EXPECT_TRUE(fs::exists(path("r_participation.csv")));
    EXPECT_TRUE(fs::exists(path("r_fano.csv")));
    EXPECT_NE(slurp(path("stdout.txt")).find("Participation"), std::string::npos);
}

TEST_F(Cli, AnalyzeWindowsList) {
    write("s.csv", "time_ms,neuron_id\n10.000,1\n2000.500,3\n");
    ASSERT_EQ(run("analyze --spikes " + path("s.csv") + " --duration 60 --neurons 10 --windows 1,10,50 --out " +
                  path("r.json")),
              0);
    const auto doc = nlohmann::json::parse(slurp(path("r.json")));
    EXPECT_EQ(doc["participation"].size(), 3u);
}

TEST_F(Cli, AnalyzeRejectsBadRowWithLineNumber) {
    write("s.csv", "time_ms,neuron_id\n1.0,2\n3.0;4\n");
    EXPECT_EQ(run("analyze --spikes " + path("s.csv") + " --duration 10 --out " + path("r.json")), 1);
    EXPECT_NE(slurp(path("stderr.txt")).find("line 3"), std::string::npos) << slurp(path("stderr.txt"));
}

TEST_F(Cli, AnalyzeRejectsSpikeAfterDuration) {
    write("s.csv", "time_ms,neuron_id\n61000.000,2\n");
    EXPECT_EQ(run("analyze --spikes " + path("s.csv") + " --duration 60 --out " + path("r.json")), 1);
}

TEST_F(Cli, ReportRerendersSummary) {
    write("s.csv", "time_ms,neuron_id\n10.000,1\n2000.500,3\n5000,3\n");
    ASSERT_EQ(run("analyze --spikes " + path("s.csv") + " --duration 60 --neurons 10 --out " + path("r.json")), 0);
    const auto from_analyze = slurp(path("stdout.txt"));
    ASSERT_EQ(run("report --report " + path("r.json")), 0);
    EXPECT_EQ(slurp(path("stdout.txt")), from_analyze);
}

TEST_F(Cli, RasterIdentityAndDownsample) {
    write("empty.csv", "time_ms,neuron_id\n");
    ASSERT_EQ(run("raster --spikes " + path("empty.csv") + " --out " + path("e.csv")), 0);
    EXPECT_EQ(slurp(path("e.csv")), "time_ms,neuron_id\n");

    std::ostringstream dense;
    dense << "time_ms,neuron_id\n";
    for (int k = 2999; k >= 0; --k) dense << k << ".000," << k % 17 << "\n";  // 1000 per second, reversed
    write("dense.csv", dense.str());
    ASSERT_EQ(run("raster --spikes " + path("dense.csv") + " --out " + path("all.csv")), 0);
    const auto all = read_spike_csv(path("all.csv"));
    EXPECT_EQ(all.size(), 3000u);
    EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));

    ASSERT_EQ(run("raster --spikes " + path("dense.csv") + " --out " + path("ds.csv") + " --downsample 10"), 0);
    const auto ds = read_spike_csv(path("ds.csv"));
    EXPECT_EQ(ds.size(), 30u);
    for (const auto& s : ds) EXPECT_TRUE(std::binary_search(all.begin(), all.end(), s));
}

TEST(CliInProcess, SimulateAnalyzePipeline) {
    const auto dir = fs::temp_directory_path() / "hhnet_cli_inproc";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "c.cfg") << "[network]\nn_neurons = 40\nn_inhibitory = 8\n[stimulus]\nn_targets = 5\n"
                                    "[sim]\nduration = 0.2\n";
    std::ostringstream log, err;
    cli::SimulateOptions so;
    so.config = (dir / "c.cfg").string();
    so.out_dir = (dir / "o").string();
    ASSERT_EQ(cli::cmd_simulate(so, log, err), 0) << err.str();
    cli::AnalyzeOptions ao;
    ao.spikes = (dir / "o/spikes.csv").string();
    ao.duration = 0.2;
    ao.neurons = 40;
    ao.windows = {0.1};
    ao.fano_windows = {0.2};
    ao.fano_bin = 0.05;
    ao.out = (dir / "r.json").string();
    EXPECT_EQ(cli::cmd_analyze(ao, log, err), 0) << err.str();
    fs::remove_all(dir);
}
