#pragma once

// Layers with explicit backward passes. Each layer caches what its backward
// pass needs during forward(), so an instance serves one forward/backward
// pair at a time. Parameter gradients accumulate until zeroed.

#include <cstdint>
#include <string>
#include <vector>

#include "forestseg/nn/tensor.hpp"

namespace forestseg::nn {

enum class ParamKind { Weight, Bias, Gamma, Beta };

struct ParamRef {
    std::string name;
    std::vector<double>* value = nullptr;
    std::vector<double>* grad = nullptr;
    ParamKind kind = ParamKind::Weight;
    int fan_in = 1;
};

struct BufferRef {
    std::string name;
    std::vector<double>* value = nullptr;
};

struct Registry {
    std::vector<ParamRef> params;
    std::vector<BufferRef> buffers;

    void param(const std::string& name, std::vector<double>& v, std::vector<double>& g, ParamKind kind, int fan_in = 1) {
        params.push_back({name, &v, &g, kind, fan_in});
    }
    void buffer(const std::string& name, std::vector<double>& v) { buffers.push_back({name, &v}); }
};

/// Square-kernel convolution, stride 1, "same" zero padding (odd kernels).
class Conv2d {
public:
    Conv2d() = default;
    /// with_bias = false drops the bias term (for convolutions feeding batch-norm).
    Conv2d(int in_channels, int out_channels, int kernel, bool with_bias = true);

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy);
    void collect(const std::string& prefix, Registry& reg);

    [[nodiscard]] int in_channels() const { return cin_; }
    [[nodiscard]] int out_channels() const { return cout_; }
    [[nodiscard]] bool has_bias() const { return has_bias_; }

    std::vector<double> weight, bias;  // weight: cout x (cin*k*k), row-major
    std::vector<double> dweight, dbias;

private:
    int cin_ = 0, cout_ = 0, k_ = 1;
    bool has_bias_ = true;
    Tensor input_;
    std::vector<double> cols_;
};

/// Per-channel batch normalisation. Training mode normalises with batch
/// statistics and updates running estimates; inference uses the running ones.
class BatchNorm2d {
public:
    BatchNorm2d() = default;
    explicit BatchNorm2d(int channels);

    Tensor forward(const Tensor& x, bool train);
    Tensor backward(const Tensor& dy);
    void collect(const std::string& prefix, Registry& reg);

    std::vector<double> gamma, beta, dgamma, dbeta;
    std::vector<double> running_mean, running_var;

    static constexpr double kEps = 1e-5;
    static constexpr double kMomentum = 0.1;

private:
    int c_ = 0;
    Tensor xhat_;
    std::vector<double> inv_std_;
};

/// While alive, ReLU masks and max-pool winners computed on this thread are
/// folded into a digest. Two forward passes with equal digests took the same
/// piecewise-linear branch.
class ActivationTrace {
public:
    ActivationTrace();
    ~ActivationTrace();
    ActivationTrace(const ActivationTrace&) = delete;
    ActivationTrace& operator=(const ActivationTrace&) = delete;

    [[nodiscard]] std::uint64_t digest() const { return digest_; }
    void reset() { digest_ = kSeed; }

    static void record(std::uint64_t v);

private:
    static constexpr std::uint64_t kSeed = 1469598103934665603ULL;
    std::uint64_t digest_ = kSeed;
    ActivationTrace* prev_ = nullptr;
};

class ReLU {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy) const;

private:
    std::vector<unsigned char> active_;
};

class Sigmoid {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy) const;

private:
    Tensor out_;
};

/// 2x2 max pooling, stride 2. Requires even spatial dims.
class MaxPool2 {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy) const;

private:
    int in_h_ = 0, in_w_ = 0;
    std::vector<std::size_t> argmax_;
};

/// Learned 2x upsampling: transposed convolution, kernel 2, stride 2.
class ConvTranspose2x2 {
public:
    ConvTranspose2x2() = default;
    ConvTranspose2x2(int in_channels, int out_channels);

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy);
    void collect(const std::string& prefix, Registry& reg);

    std::vector<double> weight, bias;  // weight: (cout*4) x cin, rows ordered (co, dy, dx)
    std::vector<double> dweight, dbias;

private:
    int cin_ = 0, cout_ = 0;
    Tensor input_;
};

/// Fixed bilinear upsampling by an integer factor (half-pixel centres,
/// edge clamped). Linear, so backward applies the transpose.
class BilinearUpsample {
public:
    BilinearUpsample() = default;
    explicit BilinearUpsample(int factor) : factor_(factor) {}

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy) const;

private:
    int factor_ = 1;
    int in_h_ = 0, in_w_ = 0;
    std::vector<double> ah_, aw_;  // interpolation matrices, row-major
};

/// Nearest 2x upsampling.
class NearestUpsample2 {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy) const;
};

}  // namespace forestseg::nn
