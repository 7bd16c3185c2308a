#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "tacda/error.hpp"
#include "tacda/tensor.hpp"

namespace tacda {

// Soft dynamic time warping between two equal-length multivariate series
// (M sensors x L steps), its gradient with respect to the first series, and
// a literal all-paths oracle. Ground cost is the squared Euclidean distance
// between time-step vectors. All dynamic programming runs in real64.

// Finite stand-in for +inf on the DP boundary; operands at or above
// kInfCutoff are treated as absent by the soft minimum, which avoids
// inf - inf NaNs inside the log-sum-exp.
inline constexpr double kInfGuard = 1e30;
inline constexpr double kInfCutoff = 1e29;

struct CostMatrix {
    std::size_t len = 0;
    Tensor delta;  // L x L, delta(i,j) = sum_m (x(m,i) - y(m,j))^2
};

struct SoftDtwResult {
    double value = 0.0;
    Tensor r_table;    // (L+1) x (L+1) accumulated costs, kept for backward
    Tensor alignment;  // L x L soft alignment matrix E (filled by soft_dtw_grad)
    Tensor grad_x;     // M x L gradient of value w.r.t. the first series
};

inline CostMatrix cost_matrix(const Tensor& x, const Tensor& y) {
    require(x.rank() == 2 && y.rank() == 2, "cost_matrix: series must be M x L matrices");
    require(x.same_shape(y), "cost_matrix: series shapes differ " + x.shape_str() + " vs " + y.shape_str());
    const std::size_t m = x.rows(), len = x.cols();
    CostMatrix cm;
    cm.len = len;
    cm.delta = Tensor::matrix(len, len);
    for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t j = 0; j < len; ++j) {
            double acc = 0.0;
            for (std::size_t s = 0; s < m; ++s) {
                const double d = x.at(s, i) - y.at(s, j);
                acc += d * d;
            }
            cm.delta.at(i, j) = acc;
        }
    }
    return cm;
}

// softmin_gamma over up to three operands, max-shifted; guarded operands are
// dropped from the sum.
inline double softmin3(double a, double b, double c, double gamma) {
    double lo = kInfGuard;
    if (a < lo) lo = a;
    if (b < lo) lo = b;
    if (c < lo) lo = c;
    if (lo >= kInfCutoff) return kInfGuard;
    double sum = 0.0;
    if (a < kInfCutoff) sum += std::exp(-(a - lo) / gamma);
    if (b < kInfCutoff) sum += std::exp(-(b - lo) / gamma);
    if (c < kInfCutoff) sum += std::exp(-(c - lo) / gamma);
    return lo - gamma * std::log(sum);
}

namespace detail {

inline void check_softdtw_inputs(const Tensor& x, const Tensor& y, double gamma) {
    require(gamma > 0.0, "soft_dtw: gamma must be positive");
    require(x.rank() == 2 && y.rank() == 2 && x.same_shape(y), "soft_dtw: series must share an M x L shape");
    require(x.all_finite() && y.all_finite(), "soft_dtw: non-finite input");
}

inline Tensor forward_r_table(const CostMatrix& cm, double gamma) {
    const std::size_t len = cm.len;
    Tensor r = Tensor::matrix(len + 1, len + 1);
    r.fill(kInfGuard);
    r.at(0, 0) = 0.0;
    for (std::size_t i = 1; i <= len; ++i)
        for (std::size_t j = 1; j <= len; ++j)
            r.at(i, j) = cm.delta.at(i - 1, j - 1) +
                         softmin3(r.at(i - 1, j), r.at(i, j - 1), r.at(i - 1, j - 1), gamma);
    return r;
}

}  // namespace detail

inline SoftDtwResult soft_dtw(const Tensor& x, const Tensor& y, double gamma) {
    detail::check_softdtw_inputs(x, y, gamma);
    SoftDtwResult res;
    const CostMatrix cm = cost_matrix(x, y);
    res.r_table = detail::forward_r_table(cm, gamma);
    res.value = res.r_table.at(cm.len, cm.len);
    return res;
}

// Backward recursion: alignment weights E(i,j) = d value / d delta(i,j),
// then the chain rule through the squared-Euclidean ground cost gives
// d value / d x(:,i) = sum_j E(i,j) * 2 (x(:,i) - y(:,j)).
inline SoftDtwResult soft_dtw_grad(const Tensor& x, const Tensor& y, double gamma) {
    detail::check_softdtw_inputs(x, y, gamma);
    const std::size_t m = x.rows(), len = x.cols();
    const CostMatrix cm = cost_matrix(x, y);

    SoftDtwResult res;
    res.r_table = detail::forward_r_table(cm, gamma);
    res.value = res.r_table.at(len, len);

    const Tensor& r = res.r_table;
    Tensor e = Tensor::matrix(len, len);  // 0-based over grid cells
    auto rv = [&](std::size_t i, std::size_t j) { return r.at(i, j); };
    // Transition weight from cell (i,j) into successor (i2,j2), 1-based grid.
    auto weight = [&](std::size_t i, std::size_t j, std::size_t i2, std::size_t j2) {
        return std::exp((rv(i2, j2) - rv(i, j) - cm.delta.at(i2 - 1, j2 - 1)) / gamma);
    };
    for (std::size_t ii = len; ii >= 1; --ii) {
        for (std::size_t jj = len; jj >= 1; --jj) {
            if (ii == len && jj == len) {
                e.at(ii - 1, jj - 1) = 1.0;
                continue;
            }
            double acc = 0.0;
            if (ii < len) acc += e.at(ii, jj - 1) * weight(ii, jj, ii + 1, jj);
            if (jj < len) acc += e.at(ii - 1, jj) * weight(ii, jj, ii, jj + 1);
            if (ii < len && jj < len) acc += e.at(ii, jj) * weight(ii, jj, ii + 1, jj + 1);
            e.at(ii - 1, jj - 1) = acc;
        }
    }

    res.grad_x = Tensor::matrix(m, len);
    for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t j = 0; j < len; ++j) {
            const double w = 2.0 * e.at(i, j);
            if (w == 0.0) continue;
            for (std::size_t s = 0; s < m; ++s) res.grad_x.at(s, i) += w * (x.at(s, i) - y.at(s, j));
        }
    }
    res.alignment = std::move(e);
    return res;
}

// Classic min-path DTW (the gamma -> 0 limit); shares nothing with the soft
// recursion beyond the cost matrix.
inline double hard_dtw(const Tensor& x, const Tensor& y) {
    const CostMatrix cm = cost_matrix(x, y);
    const std::size_t len = cm.len;
    Tensor r = Tensor::matrix(len + 1, len + 1);
    r.fill(kInfGuard);
    r.at(0, 0) = 0.0;
    for (std::size_t i = 1; i <= len; ++i) {
        for (std::size_t j = 1; j <= len; ++j) {
            double best = r.at(i - 1, j);
            if (r.at(i, j - 1) < best) best = r.at(i, j - 1);
            if (r.at(i - 1, j - 1) < best) best = r.at(i - 1, j - 1);
            r.at(i, j) = cm.delta.at(i - 1, j - 1) + best;
        }
    }
    return r.at(len, len);
}

// All monotone paths from (1,1) to (L,L) using down/right/diagonal moves.
// Path count is the central Delannoy number, so enumeration is gated at L<=8.
inline constexpr std::size_t kBruteForceMaxLen = 8;

namespace detail {

inline void enumerate_paths(const Tensor& delta, std::size_t i, std::size_t j, double cost,
                            std::vector<double>& costs) {
    const std::size_t len = delta.rows();
    cost += delta.at(i, j);
    if (i == len - 1 && j == len - 1) {
        costs.push_back(cost);
        return;
    }
    if (i + 1 < len) enumerate_paths(delta, i + 1, j, cost, costs);
    if (j + 1 < len) enumerate_paths(delta, i, j + 1, cost, costs);
    if (i + 1 < len && j + 1 < len) enumerate_paths(delta, i + 1, j + 1, cost, costs);
}

}  // namespace detail

inline std::vector<double> enumerate_warping_path_costs(const Tensor& x, const Tensor& y) {
    require(x.cols() <= kBruteForceMaxLen, "brute_force_soft_dtw: refusing L > 8 (path count blows up)");
    const CostMatrix cm = cost_matrix(x, y);
    std::vector<double> costs;
    detail::enumerate_paths(cm.delta, 0, 0, 0.0, costs);
    return costs;
}

// Literal evaluation of the smoothed-min over every warping path:
// -gamma * log sum_A exp(-<A, Delta> / gamma), min-shifted for stability.
inline double brute_force_soft_dtw(const Tensor& x, const Tensor& y, double gamma) {
    detail::check_softdtw_inputs(x, y, gamma);
    const std::vector<double> costs = enumerate_warping_path_costs(x, y);
    double lo = costs.front();
    for (double c : costs)
        if (c < lo) lo = c;
    double sum = 0.0;
    for (double c : costs) sum += std::exp(-(c - lo) / gamma);
    return lo - gamma * std::log(sum);
}

inline std::size_t warping_path_count(std::size_t len) {
    require(len >= 1 && len <= kBruteForceMaxLen, "warping_path_count: L out of enumeration range");
    // Central Delannoy recurrence on the alignment grid.
    std::vector<std::vector<std::size_t>> d(len, std::vector<std::size_t>(len, 0));
    d[0][0] = 1;
    for (std::size_t i = 0; i < len; ++i)
        for (std::size_t j = 0; j < len; ++j) {
            if (i == 0 && j == 0) continue;
            std::size_t v = 0;
            if (i > 0) v += d[i - 1][j];
            if (j > 0) v += d[i][j - 1];
            if (i > 0 && j > 0) v += d[i - 1][j - 1];
            d[i][j] = v;
        }
    return d[len - 1][len - 1];
}

}  // namespace tacda
