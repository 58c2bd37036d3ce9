#pragma once

#include <cstdint>
#include <span>

#include "forestseg/nn/tensor.hpp"

namespace forestseg {

/// Probability clamp inside the logarithms.
inline constexpr double kBceEpsilon = 1e-7;

/// Non-forest pixels are the minority class and weigh more.
inline constexpr double kForestWeight = 0.3;
inline constexpr double kNonForestWeight = 0.7;

/// mean_i -[w_pos * y_i * log(p_i) + w_neg * (1 - y_i) * log(1 - p_i)], with
/// p clamped to [eps, 1 - eps]. Throws DataError on size mismatch, non-binary
/// targets, or probabilities that are NaN or outside [0, 1].
double weighted_bce(std::span<const double> probs, std::span<const std::uint8_t> target, double w_pos = kForestWeight,
                    double w_neg = kNonForestWeight);

/// Same loss evaluated on logits (sigmoid applied internally); writes
/// d loss / d logit into `grad` (shape of `logits`).
double weighted_bce_with_grad(const nn::Tensor& logits, std::span<const std::uint8_t> target, double w_pos,
                              double w_neg, nn::Tensor& grad);

}  // namespace forestseg
