#include "forestseg/loss.hpp"

#include <algorithm>
#include <cmath>

#include "forestseg/errors.hpp"

namespace forestseg {

namespace {

inline double pixel_loss(double p, bool y, double w_pos, double w_neg) {
    p = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
    return y ? -w_pos * std::log(p) : -w_neg * std::log(1.0 - p);
}

}  // namespace

double weighted_bce(std::span<const double> probs, std::span<const std::uint8_t> target, double w_pos, double w_neg) {
    if (probs.size() != target.size()) throw DataError("weighted_bce: prediction and target sizes differ");
    if (probs.empty()) throw DataError("weighted_bce: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = probs[i];
        if (!(p >= 0.0 && p <= 1.0)) throw DataError("weighted_bce: prediction outside [0, 1]");
        if (target[i] > 1) throw DataError("weighted_bce: target must be binary");
        sum += pixel_loss(p, target[i] != 0, w_pos, w_neg);
    }
    return sum / static_cast<double>(probs.size());
}

double weighted_bce_with_grad(const nn::Tensor& logits, std::span<const std::uint8_t> target, double w_pos,
                              double w_neg, nn::Tensor& grad) {
    if (logits.size() != target.size()) throw DataError("weighted_bce: logits and target sizes differ");
    grad = nn::Tensor(logits.n, logits.c, logits.h, logits.w);
    const double inv_m = 1.0 / static_cast<double>(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double p = 1.0 / (1.0 + std::exp(-logits.data[i]));
        const bool y = target[i] != 0;
        sum += pixel_loss(p, y, w_pos, w_neg);
        grad.data[i] = (y ? -w_pos * (1.0 - p) : w_neg * p) * inv_m;
    }
    return sum * inv_m;
}

}  // namespace forestseg
