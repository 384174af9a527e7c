// SPDX-License-Identifier: Apache-2.0
//
// Training losses as pure scalar/plane functions with analytic gradients.
// Predictions are double precision; callers widen float planes before use.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace rotp {

struct FocalParams {
    double alpha = 2.0;
    double beta = 4.0;
    double eps = 1e-12;  // predictions clamped to [eps, 1-eps] before log
};

enum class NposRule {
    TruthPositiveCells,  // count of cells with truth > 0 (literal reading)
    PeakCount,           // count of cells with truth == 1 (per-object norm)
};

struct LossWeights {
    double lambda0 = 1.0;  // vertex heatmap
    double lambda1 = 1.0;  // center heatmap
    double lambda2 = 1.0;  // size regression
    double lambda3 = 0.1;  // offsets
    double lambda4 = 1.0;  // direction
};

struct ValueGrad {
    double value = 0.0;
    double grad = 0.0;
};

inline ValueGrad smooth_l1(double x) {
    if (std::abs(x) < 1.0) return {0.5 * x * x, x};
    return {std::abs(x) - 0.5, x > 0.0 ? 1.0 : -1.0};
}

inline std::size_t count_npos(std::span<const double> truth, NposRule rule) {
    std::size_t n = 0;
    for (double t : truth) {
        if (rule == NposRule::TruthPositiveCells ? t > 0.0 : t == 1.0) ++n;
    }
    return n;
}

struct FocalResult {
    double value = 0.0;
    std::vector<double> grad;
    bool npos_flagged = false;  // n_pos was 0, treated as 1
};

// Variant focal loss over a heatmap plane. Cells with truth exactly 1 are
// the positives; everything else is weighted down by (1-truth)^beta.
inline FocalResult heatmap_focal_loss(std::span<const double> pred, std::span<const double> truth,
                                      std::size_t n_pos, const FocalParams& params = {}) {
    FocalResult out;
    out.grad.assign(pred.size(), 0.0);
    if (n_pos == 0) {
        out.npos_flagged = true;
        n_pos = 1;
    }
    const double inv_n = 1.0 / static_cast<double>(n_pos);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool clamped_lo = pred[i] < params.eps;
        const bool clamped_hi = pred[i] > 1.0 - params.eps;
        const double rho = clamped_lo ? params.eps : (clamped_hi ? 1.0 - params.eps : pred[i]);
        const double rho_t = truth[i];
        double term, dterm;
        if (rho_t == 1.0) {
            const double one_m = 1.0 - rho;
            term = std::pow(one_m, params.alpha) * std::log(rho);
            dterm = -params.alpha * std::pow(one_m, params.alpha - 1.0) * std::log(rho) +
                    std::pow(one_m, params.alpha) / rho;
        } else {
            const double w = std::pow(1.0 - rho_t, params.beta);
            term = w * std::pow(rho, params.alpha) * std::log(1.0 - rho);
            dterm = w * (params.alpha * std::pow(rho, params.alpha - 1.0) * std::log(1.0 - rho) -
                         std::pow(rho, params.alpha) / (1.0 - rho));
        }
        sum += term;
        out.grad[i] = (clamped_lo || clamped_hi) ? 0.0 : -inv_n * dterm;
    }
    out.value = -inv_n * sum;
    return out;
}

namespace detail {
inline double wrap_residual(double r) {
    r = std::fmod(r, 360.0);
    if (r >= 180.0) r -= 360.0;
    if (r < -180.0) r += 360.0;
    return r;
}
}  // namespace detail

// Mean smooth-L1 over supervised peaks; residuals are raw degree differences
// unless wrap_degrees folds them into [-180, 180).
inline double direction_loss(std::span<const double> pred_theta, std::span<const double> true_theta,
                             bool wrap_degrees = false) {
    if (pred_theta.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < pred_theta.size(); ++i) {
        double r = true_theta[i] - pred_theta[i];
        if (wrap_degrees) r = detail::wrap_residual(r);
        sum += smooth_l1(r).value;
    }
    return sum / static_cast<double>(pred_theta.size());
}

inline double offset_loss(std::span<const std::array<double, 4>> pred,
                          std::span<const std::array<double, 4>> truth) {
    if (pred.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        for (int k = 0; k < 4; ++k) sum += smooth_l1(truth[i][k] - pred[i][k]).value;
    }
    return sum / static_cast<double>(pred.size());
}

inline double size_loss(std::span<const std::array<double, 2>> pred,
                        std::span<const std::array<double, 2>> truth) {
    if (pred.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        sum += smooth_l1(truth[i][0] - pred[i][0]).value;
        sum += smooth_l1(truth[i][1] - pred[i][1]).value;
    }
    return sum / static_cast<double>(pred.size());
}

struct LossComponents {
    double l_ht = 0.0;       // vertex heatmap focal
    double l_hc = 0.0;       // center heatmap focal
    double l_reg = 0.0;      // size
    double l_offsets = 0.0;  // offsets
    double l_d = 0.0;        // direction
};

inline double total_loss(const LossComponents& c, const LossWeights& w = {}) {
    return w.lambda0 * c.l_ht + w.lambda1 * c.l_hc + w.lambda2 * c.l_reg +
           w.lambda3 * c.l_offsets + w.lambda4 * c.l_d;
}

}  // namespace rotp
