#pragma once

#include <vector>

#include "forestseg/nn/layers.hpp"

namespace forestseg {

/// Adam with bias correction.
class Adam {
public:
    explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-7)
        : lr_(learning_rate), b1_(beta1), b2_(beta2), eps_(epsilon) {}

    void step(std::vector<nn::ParamRef>& params);
    [[nodiscard]] long steps() const { return t_; }

private:
    double lr_, b1_, b2_, eps_;
    long t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

}  // namespace forestseg
