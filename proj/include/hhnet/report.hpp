// Analysis report document (JSON), plot-ready CSVs and the console summary.
#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"

namespace hhnet {

struct AnalysisReport {
    RateStats rates;
    std::vector<ParticipationStats> participation;
    std::vector<FanoSeries> fano;
};

inline AnalysisReport analyze(const SpikeTrain& train, const std::vector<double>& windows,
                              const std::vector<double>& fano_windows, double fano_bin = 1.0) {
    AnalysisReport r;
    r.rates = mean_rates(train);
    for (double w : windows) r.participation.push_back(participation(train, w));
    for (double w : fano_windows) r.fano.push_back(fano(train, w, fano_bin));
    return r;
}

/// Window length as a JSON key: "1", "10", "0.5".
inline std::string window_key(double seconds) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", seconds);
    return buf;
}

inline nlohmann::json report_to_json(const AnalysisReport& r) {
    using nlohmann::json;
    json doc;
    doc["rates"] = r.rates.rates;
    doc["rate_classes"] = {
        {"lt_1hz", {{"count", r.rates.n_below_1hz}, {"fraction", r.rates.fraction(RateClass::below_1hz)}}},
        {"1_to_5hz", {{"count", r.rates.n_1_to_5hz}, {"fraction", r.rates.fraction(RateClass::from_1_to_5hz)}}},
        {"gt_5hz", {{"count", r.rates.n_above_5hz}, {"fraction", r.rates.fraction(RateClass::above_5hz)}}},
    };
    doc["population_rate_mean_hz"] = r.rates.mean_hz;
    doc["population_rate_std_hz"] = r.rates.std_hz;

    json part = json::object();
    for (const auto& p : r.participation)
        part[window_key(p.window)] = {{"mean_pct", p.mean_pct}, {"std_pct", p.std_pct}, {"windows", p.per_window_pct.size()}};
    doc["participation"] = part;

    json fano_doc = json::object();
    for (const auto& f : r.fano) {
        json series = json::array();
        for (const auto& pt : f.points) {
            if (!pt.mean) {
                series.push_back({{"t_start_s", pt.t_start}, {"t_end_s", pt.t_end}, {"empty", true}});
                continue;
            }
            series.push_back({{"t_start_s", pt.t_start},
                              {"t_end_s", pt.t_end},
                              {"mean", *pt.mean},
                              {"min", *pt.min},
                              {"max", *pt.max},
                              {"neurons", pt.neurons}});
        }
        const auto pm = f.population_mean();
        fano_doc[window_key(f.window)] = {{"bin_s", f.bin},
                                          {"population_mean", pm ? json(*pm) : json(nullptr)},
                                          {"series", series}};
    }
    doc["fano"] = fano_doc;
    return doc;
}

inline void write_rates_csv(std::ostream& out, const RateStats& r) {
    out << "neuron_id,rate_hz,class\n";
    for (std::size_t i = 0; i < r.rates.size(); ++i) {
        const char* cls = "lt_1hz";
        if (classify_rate(r.rates[i]) == RateClass::from_1_to_5hz) cls = "1_to_5hz";
        if (classify_rate(r.rates[i]) == RateClass::above_5hz) cls = "gt_5hz";
        out << i << ',' << r.rates[i] << ',' << cls << '\n';
    }
}

inline void write_participation_csv(std::ostream& out, const std::vector<ParticipationStats>& ps) {
    out << "window_s,window_index,t_start_s,participation_pct\n";
    for (const auto& p : ps)
        for (std::size_t k = 0; k < p.per_window_pct.size(); ++k)
            out << window_key(p.window) << ',' << k << ',' << static_cast<double>(k) * p.window << ','
                << p.per_window_pct[k] << '\n';
}

inline void write_fano_csv(std::ostream& out, const std::vector<FanoSeries>& fs) {
    out << "window_s,t_start_s,t_end_s,mean,min,max,neurons\n";
    for (const auto& f : fs)
        for (const auto& pt : f.points) {
            out << window_key(f.window) << ',' << pt.t_start << ',' << pt.t_end << ',';
            if (pt.mean) out << *pt.mean << ',' << *pt.min << ',' << *pt.max;
            else out << ",,";
            out << ',' << pt.neurons << '\n';
        }
}

/// Rate-class and participation tables, plus population Fano means.
inline void print_summary(std::ostream& out, const AnalysisReport& r) {
    char buf[160];
    out << "Rate distribution (" << r.rates.rates.size() << " neurons)\n";
    std::snprintf(buf, sizeof buf, "  <1Hz     %6.1f%%\n  1-5Hz    %6.1f%%\n  >5Hz     %6.1f%%\n  Mean+-std %.2fHz+-%.2f\n",
                  100 * r.rates.fraction(RateClass::below_1hz), 100 * r.rates.fraction(RateClass::from_1_to_5hz),
                  100 * r.rates.fraction(RateClass::above_5hz), r.rates.mean_hz, r.rates.std_hz);
    out << buf;
    if (!r.participation.empty()) out << "Participation\n";
    for (const auto& p : r.participation) {
        std::snprintf(buf, sizeof buf, "  %5ss window  %6.2f+-%.2f %%\n", window_key(p.window).c_str(), p.mean_pct, p.std_pct);
        out << buf;
    }
    if (!r.fano.empty()) out << "Fano factor (population mean over windows)\n";
    for (const auto& f : r.fano) {
        const auto pm = f.population_mean();
        if (pm) std::snprintf(buf, sizeof buf, "  %5ss window  %.3f\n", window_key(f.window).c_str(), *pm);
        else std::snprintf(buf, sizeof buf, "  %5ss window  (no active neurons)\n", window_key(f.window).c_str());
        out << buf;
    }
}

}  // namespace hhnet
