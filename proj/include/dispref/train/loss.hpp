#pragma once

#include <span>
#include <vector>

#include "dispref/autodiff/tensor.hpp"

namespace dispref {

/// Standard deviation of the classification target, in bins.
inline const double kTargetSigma = 1.4142135623730951;

/// Normalized weights exp(-(d - d_star)^2 / (2 sigma^2)) over bins 0..d_bins-1.
/// Evaluated relative to the closest bin so tiny sigma still yields a one-hot.
std::vector<double> gaussian_target(double d_star, double sigma, int d_bins);

/// -sum p log p (0 log 0 = 0).
double entropy(std::span<const double> p);

struct LossBreakdown {
    double ce_term = 0.0;
    double offset_term = 0.0;
    double total = 0.0;
    /// Share of points whose D*_s fell outside [-1, 1].
    double masked_fraction = 0.0;
    /// Mean entropy of the targets (lower bound of ce_term).
    double target_entropy = 0.0;
};

struct RefinementLoss {
    ad::Tensor total;  // differentiable, shape [1]
    LossBreakdown breakdown;
};

/// Batched loss averaged over N points. logits [N, B], offset [N, 1], d_star
/// in bins (N values, each within [0, B-1]). Per point:
///   ce = -sum_d target_d log softmax(logits)_d
///   D*_s = d_star - argmax(logits); offset term |offset - D*_s| if |D*_s| <= 1, else exactly 0.
RefinementLoss refinement_loss(const ad::Tensor& logits, const ad::Tensor& offset, std::span<const double> d_star,
                               double sigma = kTargetSigma);

/// Single point, no graph.
LossBreakdown refinement_loss(std::span<const double> logits, double offset, double d_star,
                              double sigma = kTargetSigma);

/// Baseline head: mean |max_disp * regression - d_star| in bins. ce_term stays 0.
RefinementLoss l1_regression_loss(const ad::Tensor& regression, std::span<const double> d_star, double max_disp);

}  // namespace dispref
