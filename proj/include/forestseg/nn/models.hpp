#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "forestseg/nn/layers.hpp"
#include "forestseg/nn/tensor.hpp"

namespace forestseg::nn {

enum class Architecture { UNet, AttentionUNet, SegNetResNet50, FCN32VGG16 };

std::string to_string(Architecture a);
Architecture parse_architecture(const std::string& s);
const std::vector<Architecture>& all_architectures();

struct ModelConfig {
    Architecture arch = Architecture::UNet;
    int in_channels = 2;
    int base_width = 16;  // 64 gives the full-size widths
    int depth = 4;        // number of 2x downsamplings
    std::uint64_t seed = 0;
    /// Full block stacks (ResNet50 [3,4,6,3] bottlenecks, VGG16 [2,2,3,3,3]
    /// convs). Off: one bottleneck per stage and at most two convs per VGG stage.
    bool full_backbone = false;

    /// Throws ConfigError when a field is out of range.
    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

/// Trainable graph: logits out, explicit backward.
class Network {
public:
    virtual ~Network() = default;
    /// N x C x H x W input to N x 1 x H x W logits.
    virtual Tensor forward(const Tensor& x, bool train) = 0;
    /// Gradient of the loss w.r.t. logits in; accumulates parameter
    /// gradients and returns the gradient w.r.t. the input.
    virtual Tensor backward(const Tensor& dlogits) = 0;
    virtual void collect(Registry& reg) = 0;
    [[nodiscard]] virtual std::unique_ptr<Network> clone() const = 0;
};

std::unique_ptr<Network> make_network(const ModelConfig& config);

/// Additive attention on a skip connection:
///   alpha = sigmoid(psi(relu(Wg * gate + Wx * skip))),  out = skip * alpha
/// Wg, Wx and psi are 1x1 convolutions. A gate at half the skip resolution
/// is projected and then upsampled (nearest) to the skip grid.
class AttentionGate {
public:
    AttentionGate() = default;
    AttentionGate(int gate_channels, int skip_channels, int inter_channels);

    Tensor forward(const Tensor& skip, const Tensor& gate);
    /// Returns {d_skip, d_gate}.
    std::pair<Tensor, Tensor> backward(const Tensor& dout);
    void collect(const std::string& prefix, Registry& reg);

    /// Attention coefficients of the last forward, N x 1 x H x W.
    [[nodiscard]] const Tensor& alpha() const { return alpha_; }

    Conv2d wg, wx, psi;

private:
    Sigmoid sigmoid_;
    ReLU relu_;
    NearestUpsample2 up_;
    bool upsampled_ = false;
    Tensor skip_, alpha_;
};

/// A built model: configuration, parameters and the forward function.
/// Not safe for concurrent calls on one instance; predict() works on a
/// private copy and may be called from several threads at once.
class SegmentationModel {
public:
    static constexpr double kProbabilityFloor = 1e-12;

    explicit SegmentationModel(const ModelConfig& config);
    SegmentationModel(const SegmentationModel& other);
    SegmentationModel& operator=(const SegmentationModel& other);
    SegmentationModel(SegmentationModel&&) noexcept = default;
    SegmentationModel& operator=(SegmentationModel&&) noexcept = default;

    [[nodiscard]] const ModelConfig& config() const { return config_; }

    /// Inference-mode probabilities (N x 1 x H x W, sigmoid head), kept in
    /// [kProbabilityFloor, 1 - kProbabilityFloor]. Checks channel count and
    /// divisibility of H, W by 2^depth.
    Tensor forward(const Tensor& batch);
    [[nodiscard]] Tensor predict(const Tensor& batch) const;

    /// Raw logits; train = true uses batch statistics and caches for backward.
    Tensor forward_logits(const Tensor& batch, bool train);
    Tensor backward(const Tensor& dlogits);

    [[nodiscard]] std::vector<ParamRef>& parameters() { return registry_.params; }
    [[nodiscard]] const std::vector<ParamRef>& parameters() const { return registry_.params; }
    [[nodiscard]] std::vector<BufferRef>& buffers() { return registry_.buffers; }
    [[nodiscard]] const std::vector<BufferRef>& buffers() const { return registry_.buffers; }

    void zero_grad();
    [[nodiscard]] std::size_t parameter_count() const;
    /// FNV-1a over parameter and buffer bytes.
    [[nodiscard]] std::uint64_t checksum() const;

    void check_input(const Tensor& batch) const;

private:
    void rebind();
    void initialize();

    ModelConfig config_;
    std::unique_ptr<Network> net_;
    Registry registry_;
};

SegmentationModel build_model(const ModelConfig& config);

}  // namespace forestseg::nn
