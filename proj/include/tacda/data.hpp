#pragma once

// C-MAPSS ingestion, preprocessing (sensor subset, min-max, RUL capping),
// and fixed-length windowing.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tacda/error.hpp"
#include "tacda/tensor.hpp"

namespace tacda {

inline constexpr std::size_t kCmapssColumns = 26;
inline constexpr std::size_t kCmapssSensors = 21;

// the standard 14-sensor selection, 1-based sensor ids
inline const std::vector<int>& default_sensor_subset() {
    static const std::vector<int> subset{2, 3, 4, 7, 8, 9, 11, 12, 13, 14, 15, 17, 20, 21};
    return subset;
}

struct UnitRecord {
    long unit = 0;
    std::vector<long> cycles;
    std::vector<double> settings;  // T x 3, row-major
    std::vector<double> sensors;   // T x 21, row-major
    std::size_t total_cycles() const { return cycles.size(); }
};

enum class DomainTag { source, target };

inline const char* domain_name(DomainTag d) {
    return d == DomainTag::source ? "source" : "target";
}

struct SensorWindow {
    Tensor values;  // M x L
    std::optional<double> rul_label;      // normalized to [0,1] by the cap
    std::optional<double> life_fraction;  // final-cycle position in the unit's life
    long unit = 0;
    std::size_t end_cycle = 0;
};

struct PreprocManifest {
    std::vector<int> sensor_subset;
    std::vector<double> sensor_min;
    std::vector<double> sensor_max;
    std::vector<int> constant_sensors;  // subset positions with max == min
    double rul_cap = 125.0;
    std::size_t window_len = 30;
    std::size_t stride = 1;
    std::size_t skipped_units = 0;
    std::uint64_t seed = 0;
};

struct Dataset {
    DomainTag domain = DomainTag::source;
    std::vector<SensorWindow> windows;
    std::vector<std::string> sensor_names;
    PreprocManifest manifest;

    std::size_t size() const { return windows.size(); }
    std::size_t input_dim() const { return windows.empty() ? 0 : windows[0].values.rows(); }
    std::size_t window_len() const { return windows.empty() ? 0 : windows[0].values.cols(); }

    void validate() const {
        for (const SensorWindow& w : windows) {
            require(w.values.rank() == 2, "Dataset: window must be rank 2");
            require(w.values.rows() == input_dim() && w.values.cols() == window_len(),
                    "Dataset: ragged window shapes");
            const bool labeled = w.rul_label.has_value();
            require(labeled == (domain == DomainTag::source),
                    "Dataset: labels must be present exactly on source windows");
            if (labeled) {
                require(*w.rul_label >= 0.0 && *w.rul_label <= 1.0,
                        "Dataset: rul_label out of [0,1]");
                require(w.life_fraction && *w.life_fraction >= 0.0 && *w.life_fraction <= 1.0,
                        "Dataset: life_fraction out of [0,1]");
            }
        }
    }
};

// evaluation-only ground truth for unlabeled (target) windows
struct TruthTable {
    std::vector<double> rul_label;
    std::vector<double> life_fraction;
};

inline std::vector<UnitRecord> load_cmapss(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_cmapss: cannot open " + path);
    std::map<long, UnitRecord> by_unit;
    std::string line;
    std::size_t line_no = 0;
    std::size_t records = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::vector<double> fields;
        double v;
        while (ls >> v) fields.push_back(v);
        if (fields.empty()) continue;  // C-MAPSS files end with blank-ish lines
        if (fields.size() != kCmapssColumns)
            throw ParseError("load_cmapss: line " + std::to_string(line_no) + " has " +
                             std::to_string(fields.size()) + " fields, expected 26");
        const long unit = static_cast<long>(fields[0]);
        const long cycle = static_cast<long>(fields[1]);
        UnitRecord& u = by_unit[unit];
        u.unit = unit;
        u.cycles.push_back(cycle);
        for (int s = 0; s < 3; ++s) u.settings.push_back(fields[2 + s]);
        for (std::size_t s = 0; s < kCmapssSensors; ++s) u.sensors.push_back(fields[5 + s]);
        ++records;
    }
    if (records == 0) throw ParseError("load_cmapss: no records in " + path);
    std::vector<UnitRecord> units;
    units.reserve(by_unit.size());
    for (auto& [id, u] : by_unit) {
        for (std::size_t t = 0; t < u.cycles.size(); ++t)
            if (u.cycles[t] != static_cast<long>(t) + 1)
                throw ParseError("load_cmapss: unit " + std::to_string(id) +
                                 " has non-consecutive cycles at position " + std::to_string(t));
        units.push_back(std::move(u));
    }
    return units;
}

// normalized per-unit series plus per-cycle labels
struct UnitSeries {
    long unit = 0;
    Tensor values;  // M x T
    std::vector<double> rul;        // min(T - cycle, cap) / cap
    std::vector<double> life_frac;  // cycle / T
};

namespace detail {

inline std::vector<UnitSeries> normalize_units(const std::vector<UnitRecord>& units,
                                               const PreprocManifest& man) {
    const std::size_t M = man.sensor_subset.size();
    std::vector<UnitSeries> out;
    out.reserve(units.size());
    for (const UnitRecord& u : units) {
        const std::size_t T = u.total_cycles();
        UnitSeries s;
        s.unit = u.unit;
        s.values = Tensor({M, T});
        for (std::size_t m = 0; m < M; ++m) {
            const std::size_t col = static_cast<std::size_t>(man.sensor_subset[m]) - 1;
            const double lo = man.sensor_min[m];
            const double hi = man.sensor_max[m];
            for (std::size_t t = 0; t < T; ++t) {
                const double raw = u.sensors[t * kCmapssSensors + col];
                s.values.at(m, t) = hi > lo ? (raw - lo) / (hi - lo) : 0.0;
            }
        }
        s.rul.resize(T);
        s.life_frac.resize(T);
        for (std::size_t t = 0; t < T; ++t) {
            const double remaining = static_cast<double>(T) - static_cast<double>(t + 1);
            s.rul[t] = std::min(remaining, man.rul_cap) / man.rul_cap;
            s.life_frac[t] = static_cast<double>(t + 1) / static_cast<double>(T);
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace detail

// Fits min/max over this unit collection (per-domain normalization), then
// normalizes. The returned manifest reproduces the result bit-exactly via
// preprocess_with.
inline std::pair<std::vector<UnitSeries>, PreprocManifest> preprocess(
    const std::vector<UnitRecord>& units, const std::vector<int>& sensor_subset,
    double rul_cap) {
    require(!units.empty(), "preprocess: no units");
    require(!sensor_subset.empty(), "preprocess: empty sensor subset");
    require(rul_cap > 0.0, "preprocess: rul_cap must be positive");
    for (int s : sensor_subset)
        require(s >= 1 && s <= static_cast<int>(kCmapssSensors),
                "preprocess: sensor index out of 1..21");

    PreprocManifest man;
    man.sensor_subset = sensor_subset;
    man.rul_cap = rul_cap;
    const std::size_t M = sensor_subset.size();
    man.sensor_min.assign(M, 0.0);
    man.sensor_max.assign(M, 0.0);
    for (std::size_t m = 0; m < M; ++m) {
        const std::size_t col = static_cast<std::size_t>(sensor_subset[m]) - 1;
        double lo = 0.0, hi = 0.0;
        bool first = true;
        for (const UnitRecord& u : units) {
            for (std::size_t t = 0; t < u.total_cycles(); ++t) {
                const double v = u.sensors[t * kCmapssSensors + col];
                if (first) {
                    lo = hi = v;
                    first = false;
                } else {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
        }
        man.sensor_min[m] = lo;
        man.sensor_max[m] = hi;
        if (hi <= lo) man.constant_sensors.push_back(static_cast<int>(m));
    }
    return {detail::normalize_units(units, man), man};
}

inline std::vector<UnitSeries> preprocess_with(const std::vector<UnitRecord>& units,
                                               const PreprocManifest& man) {
    require(man.sensor_subset.size() == man.sensor_min.size() &&
                man.sensor_subset.size() == man.sensor_max.size(),
            "preprocess_with: manifest arrays disagree");
    return detail::normalize_units(units, man);
}

// Labeled (source-style) windows; call detach_labels for a target dataset.
inline Dataset make_windows(const std::vector<UnitSeries>& series, PreprocManifest man,
                            std::size_t window_len, std::size_t stride) {
    require(window_len >= 1 && stride >= 1, "make_windows: window_len and stride must be >= 1");
    man.window_len = window_len;
    man.stride = stride;
    man.skipped_units = 0;
    Dataset ds;
    ds.domain = DomainTag::source;
    for (const UnitSeries& s : series) {
        const std::size_t T = s.values.cols();
        if (T < window_len) {
            ++man.skipped_units;
            continue;
        }
        const std::size_t M = s.values.rows();
        for (std::size_t start = 0; start + window_len <= T; start += stride) {
            SensorWindow w;
            w.values = Tensor({M, window_len});
            for (std::size_t m = 0; m < M; ++m)
                for (std::size_t t = 0; t < window_len; ++t)
                    w.values.at(m, t) = s.values.at(m, start + t);
            const std::size_t last = start + window_len - 1;
            w.rul_label = s.rul[last];
            w.life_fraction = s.life_frac[last];
            w.unit = s.unit;
            w.end_cycle = last + 1;
            ds.windows.push_back(std::move(w));
        }
    }
    for (int id : man.sensor_subset) ds.sensor_names.push_back("s" + std::to_string(id));
    ds.manifest = std::move(man);
    ds.validate();
    return ds;
}

// Strips labels into a TruthTable and flips the domain tag to target.
inline TruthTable detach_labels(Dataset& ds) {
    TruthTable truth;
    truth.rul_label.reserve(ds.size());
    truth.life_fraction.reserve(ds.size());
    for (SensorWindow& w : ds.windows) {
        require(w.rul_label && w.life_fraction, "detach_labels: window already unlabeled");
        truth.rul_label.push_back(*w.rul_label);
        truth.life_fraction.push_back(*w.life_fraction);
        w.rul_label.reset();
        w.life_fraction.reset();
    }
    ds.domain = DomainTag::target;
    ds.validate();
    return truth;
}

}  // namespace tacda
