#pragma once

// Synthetic domain-shift generator: per-unit monotone degradation trends
// mixed through a shared sensor loading, with the target domain distorted
// by an affine sensor shift and a time-axis warp. Unit-level draws come
// from substreams shared across domains, so an identity shift with zero
// noise reproduces the source trends exactly.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tacda/data.hpp"
#include "tacda/error.hpp"
#include "tacda/rng.hpp"
#include "tacda/tensor.hpp"

namespace tacda {

struct DomainShift {
    double sensor_scale = 1.0;
    double sensor_offset = 0.0;
    double time_warp = 1.0;  // exponent applied to normalized time
};

struct SynthConfig {
    std::size_t units_per_domain = 24;
    std::size_t sensors = 6;
    std::size_t mean_life = 90;
    double noise_scale = 0.02;
    DomainShift shift{1.5, 0.0, 1.3};
    std::uint64_t seed = 1;
    std::size_t window_len = 24;
    std::size_t stride = 2;
    double rul_cap = 125.0;

    void validate() const {
        require(units_per_domain > 0 && sensors > 0 && mean_life > 0,
                "SynthConfig: counts must be positive");
        require(noise_scale >= 0.0, "SynthConfig: noise_scale must be >= 0");
        require(shift.sensor_scale > 0.0 && shift.time_warp > 0.0,
                "SynthConfig: scale and time_warp must be positive");
        require(window_len >= 1 && stride >= 1 && rul_cap > 0.0,
                "SynthConfig: window parameters out of range");
    }
};

struct RawUnit {
    long unit = 0;
    Tensor values;  // M x T, unnormalized
    std::vector<double> life_frac;
};

namespace detail {

struct SensorLoading {
    std::vector<double> coeff;
    std::vector<double> baseline;
};

inline SensorLoading synth_loading(const SynthConfig& cfg) {
    Rng rng = Rng(cfg.seed).split("synth.loading");
    SensorLoading ld;
    for (std::size_t m = 0; m < cfg.sensors; ++m) {
        const double magnitude = rng.uniform(0.6, 1.4);
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        ld.coeff.push_back(sign * magnitude);
        ld.baseline.push_back(rng.uniform(0.0, 0.5));
    }
    return ld;
}

}  // namespace detail

// Unnormalized per-unit series for one domain. Unit life and trend shape
// are drawn from streams shared by both domains; noise has its own
// per-domain stream.
inline std::vector<RawUnit> synth_raw(const SynthConfig& cfg, DomainTag domain) {
    cfg.validate();
    const detail::SensorLoading ld = detail::synth_loading(cfg);
    const bool is_target = domain == DomainTag::target;
    const double scale = is_target ? cfg.shift.sensor_scale : 1.0;
    const double offset = is_target ? cfg.shift.sensor_offset : 0.0;
    const double warp = is_target ? cfg.shift.time_warp : 1.0;

    std::vector<RawUnit> units;
    units.reserve(cfg.units_per_domain);
    for (std::size_t u = 0; u < cfg.units_per_domain; ++u) {
        Rng shared = Rng(cfg.seed).split("synth.unit", u);
        const double life_lo = 0.7 * static_cast<double>(cfg.mean_life);
        const double life_hi = 1.3 * static_cast<double>(cfg.mean_life);
        const std::size_t T = std::max<std::size_t>(2, static_cast<std::size_t>(
                                                           shared.uniform(life_lo, life_hi)));
        const double p = shared.uniform(1.5, 1.9);
        Rng noise = Rng(cfg.seed).split(std::string("synth.noise.") + domain_name(domain), u);

        RawUnit ru;
        ru.unit = static_cast<long>(u) + 1;
        ru.values = Tensor({cfg.sensors, T});
        ru.life_frac.resize(T);
        for (std::size_t t = 0; t < T; ++t) {
            const double tau = static_cast<double>(t + 1) / static_cast<double>(T);
            ru.life_frac[t] = tau;
            const double h = 1.0 - std::pow(std::pow(tau, warp), p);
            for (std::size_t m = 0; m < cfg.sensors; ++m) {
                double v = offset + scale * (ld.baseline[m] + ld.coeff[m] * h);
                if (cfg.noise_scale > 0.0) v += cfg.noise_scale * noise.normal();
                ru.values.at(m, t) = v;
            }
        }
        units.push_back(std::move(ru));
    }
    return units;
}

namespace detail {

inline std::vector<UnitSeries> normalize_raw(const std::vector<RawUnit>& raw, double rul_cap,
                                             PreprocManifest& man) {
    const std::size_t M = raw.empty() ? 0 : raw[0].values.rows();
    man.sensor_min.assign(M, 0.0);
    man.sensor_max.assign(M, 0.0);
    man.constant_sensors.clear();
    for (std::size_t m = 0; m < M; ++m) {
        bool first = true;
        double lo = 0.0, hi = 0.0;
        for (const RawUnit& u : raw)
            for (std::size_t t = 0; t < u.values.cols(); ++t) {
                const double v = u.values.at(m, t);
                if (first) {
                    lo = hi = v;
                    first = false;
                } else {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
        man.sensor_min[m] = lo;
        man.sensor_max[m] = hi;
        if (hi <= lo) man.constant_sensors.push_back(static_cast<int>(m));
    }
    std::vector<UnitSeries> series;
    series.reserve(raw.size());
    for (const RawUnit& u : raw) {
        const std::size_t T = u.values.cols();
        UnitSeries s;
        s.unit = u.unit;
        s.values = Tensor({M, T});
        for (std::size_t m = 0; m < M; ++m) {
            const double lo = man.sensor_min[m];
            const double hi = man.sensor_max[m];
            for (std::size_t t = 0; t < T; ++t)
                s.values.at(m, t) = hi > lo ? (u.values.at(m, t) - lo) / (hi - lo) : 0.0;
        }
        s.rul.resize(T);
        s.life_frac = u.life_frac;
        for (std::size_t t = 0; t < T; ++t) {
            const double remaining = static_cast<double>(T) - static_cast<double>(t + 1);
            s.rul[t] = std::min(remaining, rul_cap) / rul_cap;
        }
        series.push_back(std::move(s));
    }
    return series;
}

}  // namespace detail

struct SynthResult {
    Dataset source;           // labeled
    Dataset target;           // unlabeled
    TruthTable source_truth;  // copies of the source labels, window-aligned
    TruthTable target_truth;  // evaluation-only target ground truth
};

inline SynthResult synth_generate(const SynthConfig& cfg) {
    cfg.validate();
    SynthResult out;
    for (DomainTag domain : {DomainTag::source, DomainTag::target}) {
        const std::vector<RawUnit> raw = synth_raw(cfg, domain);
        PreprocManifest man;
        man.rul_cap = cfg.rul_cap;
        man.seed = cfg.seed;
        for (std::size_t m = 0; m < cfg.sensors; ++m)
            man.sensor_subset.push_back(static_cast<int>(m) + 1);
        std::vector<UnitSeries> series = detail::normalize_raw(raw, cfg.rul_cap, man);
        Dataset ds = make_windows(series, man, cfg.window_len, cfg.stride);
        ds.sensor_names.clear();
        for (std::size_t m = 0; m < cfg.sensors; ++m)
            ds.sensor_names.push_back("synth" + std::to_string(m + 1));
        if (domain == DomainTag::source) {
            for (const SensorWindow& w : ds.windows) {
                out.source_truth.rul_label.push_back(*w.rul_label);
                out.source_truth.life_fraction.push_back(*w.life_fraction);
            }
            out.source = std::move(ds);
        } else {
            out.target_truth = detach_labels(ds);
            out.target = std::move(ds);
        }
    }
    require(!out.source.windows.empty() && !out.target.windows.empty(),
            "synth_generate: configuration produced no windows");
    return out;
}

}  // namespace tacda
