#pragma once

// Degradation-stage machinery: health index regression, the binned
// second-derivative curve, lifecycle stage labeling, soft-DTW k-means,
// variance-based stage ranking, and source/target stage pairing.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tacda/data.hpp"
#include "tacda/error.hpp"
#include "tacda/rng.hpp"
#include "tacda/softdtw.hpp"
#include "tacda/tensor.hpp"

namespace tacda {

enum class Stage { sluggish = 0, accelerated = 1, terminal = 2 };

inline constexpr double kSluggishBoundary = 0.33;
inline constexpr double kTerminalBoundary = 0.85;

inline const char* stage_name(Stage s) {
    switch (s) {
        case Stage::sluggish: return "sluggish";
        case Stage::accelerated: return "accelerated";
        case Stage::terminal: return "terminal";
    }
    return "?";
}

inline Stage stage_from_name(const std::string& name) {
    if (name == "sluggish") return Stage::sluggish;
    if (name == "accelerated") return Stage::accelerated;
    if (name == "terminal") return Stage::terminal;
    throw ContractViolation("stage_from_name: unknown stage '" + name + "'");
}

// [0, 0.33] -> sluggish, (0.33, 0.85] -> accelerated, (0.85, 1] -> terminal
inline Stage stage_of_life_fraction(double lf, double sluggish = kSluggishBoundary,
                                    double terminal = kTerminalBoundary) {
    require(sluggish > 0.0 && sluggish < terminal && terminal <= 1.0,
            "stage_of_life_fraction: boundaries must satisfy 0 < sluggish < terminal <= 1");
    require(lf >= 0.0 && lf <= 1.0, "stage_of_life_fraction: life fraction out of [0,1]");
    if (lf <= sluggish) return Stage::sluggish;
    if (lf <= terminal) return Stage::accelerated;
    return Stage::terminal;
}

struct StageAssignment {
    std::size_t window = 0;
    Stage stage = Stage::sluggish;
    enum class Provenance { label_threshold, cluster_variance } provenance =
        Provenance::label_threshold;
};

inline std::vector<StageAssignment> label_source_stages(const Dataset& src,
                                                        double sluggish = kSluggishBoundary,
                                                        double terminal = kTerminalBoundary) {
    std::vector<StageAssignment> out;
    out.reserve(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
        require(src.windows[i].life_fraction.has_value(),
                "label_source_stages: window lacks life_fraction");
        out.push_back({i, stage_of_life_fraction(*src.windows[i].life_fraction, sluggish, terminal),
                       StageAssignment::Provenance::label_threshold});
    }
    return out;
}

// ---- health index ----

struct HiModel {
    std::vector<double> weights;  // per sensor, window-final reading
    double intercept = 0.0;
    double r2 = 0.0;
    bool ridge_fallback = false;
    bool low_fit = false;  // r2 below 0.2
    double hi_min = 0.0;   // raw-HI range used for the [0,1] rescale
    double hi_max = 1.0;
};

namespace detail {

// Gaussian elimination with partial pivoting; returns false on a pivot
// below threshold (rank deficiency).
inline bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                         std::vector<double>& x) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12) return false;
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return true;
}

}  // namespace detail

// Least squares of the window-final sensor vector onto the normalized RUL,
// with an intercept; HI rescaled to [0,1] over this split.
inline std::pair<HiModel, std::vector<double>> fit_health_index(const Dataset& src) {
    require(src.domain == DomainTag::source && !src.windows.empty(),
            "fit_health_index: labeled source windows required");
    const std::size_t N = src.size();
    const std::size_t M = src.input_dim();
    const std::size_t L = src.window_len();
    const std::size_t D = M + 1;  // intercept last

    std::vector<std::vector<double>> ata(D, std::vector<double>(D, 0.0));
    std::vector<double> aty(D, 0.0);
    std::vector<double> feat(D, 1.0);
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t m = 0; m < M; ++m) feat[m] = src.windows[i].values.at(m, L - 1);
        const double y = *src.windows[i].rul_label;
        for (std::size_t r = 0; r < D; ++r) {
            for (std::size_t c = r; c < D; ++c) ata[r][c] += feat[r] * feat[c];
            aty[r] += feat[r] * y;
        }
    }
    for (std::size_t r = 0; r < D; ++r)
        for (std::size_t c = 0; c < r; ++c) ata[r][c] = ata[c][r];

    HiModel model;
    std::vector<double> coef;
    if (!detail::solve_linear(ata, aty, coef)) {
        model.ridge_fallback = true;
        for (std::size_t d = 0; d < D; ++d) ata[d][d] += 1e-6;
        require(detail::solve_linear(ata, aty, coef),
                "fit_health_index: ridge-regularized system still singular");
    }
    model.weights.assign(coef.begin(), coef.begin() + static_cast<std::ptrdiff_t>(M));
    model.intercept = coef[M];

    std::vector<double> raw(N);
    double mean_y = 0.0;
    for (std::size_t i = 0; i < N; ++i) mean_y += *src.windows[i].rul_label;
    mean_y /= static_cast<double>(N);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double v = model.intercept;
        for (std::size_t m = 0; m < M; ++m)
            v += model.weights[m] * src.windows[i].values.at(m, L - 1);
        raw[i] = v;
        const double y = *src.windows[i].rul_label;
        ss_res += (y - v) * (y - v);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    model.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    model.low_fit = model.r2 < 0.2;

    model.hi_min = *std::min_element(raw.begin(), raw.end());
    model.hi_max = *std::max_element(raw.begin(), raw.end());
    const double span = model.hi_max - model.hi_min;
    std::vector<double> hi(N);
    for (std::size_t i = 0; i < N; ++i)
        hi[i] = span > 0.0 ? (raw[i] - model.hi_min) / span : 0.0;
    return {std::move(model), std::move(hi)};
}

// ---- binned, smoothed second derivative of the health index ----

struct HealthIndexCurve {
    std::size_t bin_count = 0;
    std::vector<double> averaged_hi;
    std::vector<double> smoothed_hi;
    std::vector<double> second_derivative;  // length K-2
    std::vector<int> empty_bins;
    std::size_t smoothing_radius = 0;  // edge bins to exclude from analysis
};

inline HealthIndexCurve hi_second_derivative(const std::vector<double>& y,
                                             const std::vector<double>& h, std::size_t K = 100,
                                             double sigma = 2.0) {
    require(K >= 3, "hi_second_derivative: K must be at least 3");
    require(y.size() == h.size(), "hi_second_derivative: y and h lengths disagree");
    require(sigma > 0.0, "hi_second_derivative: sigma must be positive");

    HealthIndexCurve curve;
    curve.bin_count = K;
    std::vector<double> sum(K, 0.0);
    std::vector<std::size_t> count(K, 0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        require(y[i] >= 0.0 && y[i] <= 1.0, "hi_second_derivative: y out of [0,1]");
        std::size_t k = static_cast<std::size_t>(y[i] * static_cast<double>(K));
        if (k >= K) k = K - 1;
        sum[k] += h[i];
        ++count[k];
    }
    bool any = false;
    curve.averaged_hi.assign(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        if (count[k] > 0) {
            curve.averaged_hi[k] = sum[k] / static_cast<double>(count[k]);
            any = true;
        } else {
            curve.empty_bins.push_back(static_cast<int>(k));
        }
    }
    require(any, "hi_second_derivative: every bin is empty");

    // fill empty bins by linear interpolation between non-empty neighbors
    if (!curve.empty_bins.empty()) {
        std::ptrdiff_t prev = -1;
        for (std::size_t k = 0; k < K; ++k) {
            if (count[k] > 0) {
                prev = static_cast<std::ptrdiff_t>(k);
                continue;
            }
            std::size_t next = k;
            while (next < K && count[next] == 0) ++next;
            if (prev < 0) {
                curve.averaged_hi[k] = curve.averaged_hi[next];
            } else if (next >= K) {
                curve.averaged_hi[k] = curve.averaged_hi[static_cast<std::size_t>(prev)];
            } else {
                const double a = curve.averaged_hi[static_cast<std::size_t>(prev)];
                const double b = curve.averaged_hi[next];
                const double t = static_cast<double>(k - static_cast<std::size_t>(prev)) /
                                 static_cast<double>(next - static_cast<std::size_t>(prev));
                curve.averaged_hi[k] = a + t * (b - a);
            }
        }
    }

    // Gaussian smoothing, reflective boundary
    const std::size_t radius = static_cast<std::size_t>(std::ceil(3.0 * sigma));
    curve.smoothing_radius = radius;
    std::vector<double> kernel(2 * radius + 1);
    double ksum = 0.0;
    for (std::size_t i = 0; i < kernel.size(); ++i) {
        const double d = static_cast<double>(i) - static_cast<double>(radius);
        kernel[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        ksum += kernel[i];
    }
    for (double& w : kernel) w /= ksum;
    curve.smoothed_hi.assign(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < kernel.size(); ++i) {
            std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(k + i) -
                                 static_cast<std::ptrdiff_t>(radius);
            while (idx < 0 || idx >= static_cast<std::ptrdiff_t>(K)) {
                if (idx < 0) idx = -idx - 1;
                if (idx >= static_cast<std::ptrdiff_t>(K))
                    idx = 2 * static_cast<std::ptrdiff_t>(K) - 1 - idx;
            }
            acc += kernel[i] * curve.averaged_hi[static_cast<std::size_t>(idx)];
        }
        curve.smoothed_hi[k] = acc;
    }

    curve.second_derivative.assign(K - 2, 0.0);
    for (std::size_t k = 2; k < K; ++k)
        curve.second_derivative[k - 2] = curve.smoothed_hi[k] - 2.0 * curve.smoothed_hi[k - 1] +
                                         curve.smoothed_hi[k - 2];
    return curve;
}

// ---- soft-DTW k-means ----

struct ClusterResult {
    std::size_t k = 0;
    std::vector<std::size_t> assignments;
    std::vector<Tensor> centroids;
    std::size_t iterations_run = 0;
    std::size_t distance_evals = 0;
    std::vector<int> reseeded_clusters;
};

inline ClusterResult kmeans_softdtw(const std::vector<Tensor>& windows, std::size_t k,
                                    double gamma, std::size_t max_iter, std::uint64_t seed) {
    const std::size_t N = windows.size();
    require(k >= 1 && N >= k, "kmeans_softdtw: need at least k windows");
    require(gamma > 0.0, "kmeans_softdtw: gamma must be positive");
    require(max_iter >= 1, "kmeans_softdtw: max_iter must be at least 1");
    for (const Tensor& w : windows)
        require(w.rank() == 2 && w.same_shape(windows[0]),
                "kmeans_softdtw: windows must share one shape");

    Rng rng = Rng(seed).split("kmeans.seed");
    ClusterResult res;
    res.k = k;

    // k-means++ style seeding; these evaluations are not counted
    std::vector<std::size_t> seeds;
    seeds.push_back(rng.uniform_index(N));
    std::vector<double> best(N, 0.0);
    for (std::size_t i = 0; i < N; ++i)
        best[i] = soft_dtw(windows[i], windows[seeds[0]], gamma).value;
    while (seeds.size() < k) {
        double lo = *std::min_element(best.begin(), best.end());
        std::vector<double> weight(N);
        double total = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            weight[i] = best[i] - lo;  // soft-DTW can be negative; shift to >= 0
            total += weight[i];
        }
        std::size_t chosen;
        if (total <= 0.0) {
            chosen = rng.uniform_index(N);
        } else {
            double r = rng.uniform() * total;
            chosen = N - 1;
            for (std::size_t i = 0; i < N; ++i) {
                if (r < weight[i]) {
                    chosen = i;
                    break;
                }
                r -= weight[i];
            }
        }
        seeds.push_back(chosen);
        for (std::size_t i = 0; i < N; ++i)
            best[i] = std::min(best[i], soft_dtw(windows[i], windows[chosen], gamma).value);
    }
    for (std::size_t c = 0; c < k; ++c) res.centroids.push_back(windows[seeds[c]]);

    res.assignments.assign(N, 0);
    std::vector<double> dist_to_assigned(N, 0.0);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        ++res.iterations_run;
        for (std::size_t i = 0; i < N; ++i) {
            std::size_t arg = 0;
            double bestd = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                const double d = soft_dtw(windows[i], res.centroids[c], gamma).value;
                ++res.distance_evals;
                if (c == 0 || d < bestd) {
                    bestd = d;
                    arg = c;
                }
            }
            if (res.assignments[i] != arg || iter == 0) {
                if (res.assignments[i] != arg) changed = true;
                res.assignments[i] = arg;
            }
            dist_to_assigned[i] = bestd;
        }
        if (iter > 0 && !changed) break;

        // centroid update: per-timestep, per-sensor mean of members
        std::vector<std::size_t> members(k, 0);
        std::vector<Tensor> next(k, Tensor(windows[0].shape()));
        for (std::size_t i = 0; i < N; ++i) {
            const std::size_t c = res.assignments[i];
            ++members[c];
            for (std::size_t j = 0; j < windows[i].size(); ++j) next[c][j] += windows[i][j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (members[c] == 0) {
                // reseed from the cached assignment distances, no extra evals
                std::size_t far = 0;
                for (std::size_t i = 1; i < N; ++i)
                    if (dist_to_assigned[i] > dist_to_assigned[far]) far = i;
                next[c] = windows[far];
                res.reseeded_clusters.push_back(static_cast<int>(c));
                continue;
            }
            for (std::size_t j = 0; j < next[c].size(); ++j)
                next[c][j] /= static_cast<double>(members[c]);
        }
        res.centroids = std::move(next);
    }
    return res;
}

// ---- cluster variance and ranking ----

struct ClusterStats {
    std::vector<double> per_sensor_var;
    std::vector<double> per_sensor_mean;
    double total_var = 0.0;
    std::size_t member_count = 0;
};

inline ClusterStats cluster_variance(const std::vector<const Tensor*>& members) {
    require(!members.empty(), "cluster_variance: empty cluster");
    const std::size_t M = members[0]->rows();
    const std::size_t L = members[0]->cols();
    ClusterStats st;
    st.member_count = members.size();
    st.per_sensor_var.assign(M, 0.0);
    st.per_sensor_mean.assign(M, 0.0);
    const double n = static_cast<double>(members.size() * L);
    for (std::size_t m = 0; m < M; ++m) {
        double mu = 0.0;
        for (const Tensor* w : members)
            for (std::size_t t = 0; t < L; ++t) mu += w->at(m, t);
        mu /= n;
        double var = 0.0;
        for (const Tensor* w : members)
            for (std::size_t t = 0; t < L; ++t) {
                const double d = w->at(m, t) - mu;
                var += d * d;
            }
        st.per_sensor_mean[m] = mu;
        st.per_sensor_var[m] = var / n;
        st.total_var += st.per_sensor_var[m];
    }
    return st;
}

inline std::vector<ClusterStats> per_cluster_stats(const std::vector<Tensor>& windows,
                                                   const ClusterResult& clusters) {
    std::vector<ClusterStats> out;
    for (std::size_t c = 0; c < clusters.k; ++c) {
        std::vector<const Tensor*> members;
        for (std::size_t i = 0; i < windows.size(); ++i)
            if (clusters.assignments[i] == c) members.push_back(&windows[i]);
        require(!members.empty(), "per_cluster_stats: cluster " + std::to_string(c) + " empty");
        out.push_back(cluster_variance(members));
    }
    return out;
}

struct StageRanking {
    std::vector<Stage> stage_of_cluster;  // indexed by cluster id
    bool tie_break = false;
};

// ascending variance -> sluggish, accelerated, terminal
inline StageRanking rank_stages(const std::vector<double>& variances) {
    require(variances.size() == 3, "rank_stages: exactly 3 clusters expected");
    for (double v : variances)
        require(std::isfinite(v) && v >= 0.0, "rank_stages: variances must be finite and >= 0");
    std::vector<std::size_t> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return variances[a] < variances[b]; });
    StageRanking r;
    r.stage_of_cluster.assign(3, Stage::sluggish);
    r.stage_of_cluster[order[0]] = Stage::sluggish;
    r.stage_of_cluster[order[1]] = Stage::accelerated;
    r.stage_of_cluster[order[2]] = Stage::terminal;
    r.tie_break = variances[order[0]] == variances[order[1]] ||
                  variances[order[1]] == variances[order[2]];
    return r;
}

inline std::vector<StageAssignment> cluster_stage_assignments(const ClusterResult& clusters,
                                                              const StageRanking& ranking) {
    std::vector<StageAssignment> out;
    out.reserve(clusters.assignments.size());
    for (std::size_t i = 0; i < clusters.assignments.size(); ++i)
        out.push_back({i, ranking.stage_of_cluster[clusters.assignments[i]],
                       StageAssignment::Provenance::cluster_variance});
    return out;
}

// ---- pairing ----

struct StagePair {
    Stage stage = Stage::sluggish;
    std::vector<std::size_t> source_windows;
    std::vector<std::size_t> target_windows;
};

struct StagePairing {
    std::vector<StagePair> pairs;          // fixed order sluggish -> terminal
    std::vector<Stage> skipped;            // stages missing on either side
};

inline StagePairing pair_stages(const std::vector<StageAssignment>& source,
                                const std::vector<StageAssignment>& target) {
    StagePairing out;
    for (Stage s : {Stage::sluggish, Stage::accelerated, Stage::terminal}) {
        StagePair p;
        p.stage = s;
        for (const StageAssignment& a : source)
            if (a.stage == s) p.source_windows.push_back(a.window);
        for (const StageAssignment& a : target)
            if (a.stage == s) p.target_windows.push_back(a.window);
        if (p.source_windows.empty() || p.target_windows.empty())
            out.skipped.push_back(s);
        else
            out.pairs.push_back(std::move(p));
    }
    return out;
}

// ---- clustering agreement (evaluation utility) ----

inline double adjusted_rand_index(const std::vector<std::size_t>& a,
                                  const std::vector<std::size_t>& b) {
    require(a.size() == b.size() && !a.empty(), "adjusted_rand_index: label lengths disagree");
    const std::size_t ka = 1 + *std::max_element(a.begin(), a.end());
    const std::size_t kb = 1 + *std::max_element(b.begin(), b.end());
    std::vector<std::vector<std::size_t>> table(ka, std::vector<std::size_t>(kb, 0));
    for (std::size_t i = 0; i < a.size(); ++i) ++table[a[i]][b[i]];
    auto choose2 = [](std::size_t n) {
        return static_cast<double>(n) * static_cast<double>(n ? n - 1 : 0) / 2.0;
    };
    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (std::size_t i = 0; i < ka; ++i) {
        std::size_t row = 0;
        for (std::size_t j = 0; j < kb; ++j) {
            sum_ij += choose2(table[i][j]);
            row += table[i][j];
        }
        sum_a += choose2(row);
    }
    for (std::size_t j = 0; j < kb; ++j) {
        std::size_t col = 0;
        for (std::size_t i = 0; i < ka; ++i) col += table[i][j];
        sum_b += choose2(col);
    }
    const double total = choose2(a.size());
    const double expected = sum_a * sum_b / total;
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;  // degenerate single-cluster case
    return (sum_ij - expected) / (max_index - expected);
}

}  // namespace tacda
