#pragma once

// RUL evaluation metrics: RMSE and the asymmetric scoring function that
// penalizes late predictions harder than early ones.

#include <cmath>
#include <cstddef>
#include <vector>

#include <json.hpp>

#include "tacda/error.hpp"

namespace tacda {

inline double rmse(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
    require(!y_true.empty() && y_true.size() == y_pred.size(),
            "rmse: inputs must be non-empty and equal length");
    double acc = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double d = y_pred[i] - y_true[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(y_true.size()));
}

// Per-window score of a cycle-valued residual d = prediction - truth.
// Early (d < 0) decays with /13, late (d > 0) with /10, and d = 0 scores 0,
// the common limit of both branches.
inline double score_item(double d) {
    if (d < 0.0) return std::exp(-d / 13.0) - 1.0;
    if (d > 0.0) return std::exp(d / 10.0) - 1.0;
    return 0.0;
}

// Inputs are denormalized cycle-valued RULs; the /13 and /10 constants are
// cycle-scaled.
inline double score(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
    require(!y_true.empty() && y_true.size() == y_pred.size(),
            "score: inputs must be non-empty and equal length");
    double acc = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) acc += score_item(y_pred[i] - y_true[i]);
    return acc;
}

struct EvalReport {
    double rmse = 0.0;   // cycles
    double score = 0.0;  // cycles
    std::size_t n = 0;
    std::vector<double> residuals;  // prediction - truth, cycles
    double rul_cap = 0.0;           // cap used to denormalize
};

// Both inputs are normalized RULs in [0,1]; rul_cap converts them to cycles.
inline EvalReport evaluate_rul(const std::vector<double>& y_true_norm,
                               const std::vector<double>& y_pred_norm, double rul_cap) {
    require(rul_cap > 0.0, "evaluate_rul: rul_cap must be positive");
    require(!y_true_norm.empty() && y_true_norm.size() == y_pred_norm.size(),
            "evaluate_rul: inputs must be non-empty and equal length");
    EvalReport rep;
    rep.n = y_true_norm.size();
    rep.rul_cap = rul_cap;
    std::vector<double> yt(rep.n), yp(rep.n);
    rep.residuals.resize(rep.n);
    for (std::size_t i = 0; i < rep.n; ++i) {
        yt[i] = y_true_norm[i] * rul_cap;
        yp[i] = y_pred_norm[i] * rul_cap;
        rep.residuals[i] = yp[i] - yt[i];
    }
    rep.rmse = rmse(yt, yp);
    rep.score = score(yt, yp);
    return rep;
}

inline nlohmann::json eval_report_json(const EvalReport& rep) {
    return nlohmann::json{{"rmse", rep.rmse},
                          {"score", rep.score},
                          {"n", rep.n},
                          {"residuals", rep.residuals},
                          {"rul_cap", rep.rul_cap}};
}

}  // namespace tacda
