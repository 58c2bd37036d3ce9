#include "forestseg/nn/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "forestseg/errors.hpp"

namespace forestseg::nn {

namespace {

struct ConvBnRelu {
    Conv2d conv;
    BatchNorm2d bn;
    ReLU relu;

    ConvBnRelu() = default;
    ConvBnRelu(int cin, int cout, int k = 3) : conv(cin, cout, k, false), bn(cout) {}

    Tensor forward(const Tensor& x, bool train) { return relu.forward(bn.forward(conv.forward(x), train)); }
    Tensor backward(const Tensor& dy) { return conv.backward(bn.backward(relu.backward(dy))); }
    void collect(const std::string& p, Registry& reg) {
        conv.collect(p + ".conv", reg);
        bn.collect(p + ".bn", reg);
    }
};

struct DoubleConv {
    ConvBnRelu a, b;

    DoubleConv() = default;
    DoubleConv(int cin, int cout) : a(cin, cout), b(cout, cout) {}

    Tensor forward(const Tensor& x, bool train) { return b.forward(a.forward(x, train), train); }
    Tensor backward(const Tensor& dy) { return a.backward(b.backward(dy)); }
    void collect(const std::string& p, Registry& reg) {
        a.collect(p + ".0", reg);
        b.collect(p + ".1", reg);
    }
};

// ResNet bottleneck: 1x1 reduce, 3x3, 1x1 expand, projection shortcut when widths differ.
struct Bottleneck {
    ConvBnRelu reduce, spatial;
    Conv2d expand;
    BatchNorm2d expand_bn;
    bool project = false;
    Conv2d shortcut;
    BatchNorm2d shortcut_bn;
    ReLU out;

    Bottleneck() = default;
    Bottleneck(int cin, int cout)
        : reduce(cin, std::max(1, cout / 4), 1),
          spatial(std::max(1, cout / 4), std::max(1, cout / 4), 3),
          expand(std::max(1, cout / 4), cout, 1, false),
          expand_bn(cout),
          project(cin != cout) {
        if (project) {
            shortcut = Conv2d(cin, cout, 1, false);
            shortcut_bn = BatchNorm2d(cout);
        }
    }

    Tensor forward(const Tensor& x, bool train) {
        Tensor main = expand_bn.forward(expand.forward(spatial.forward(reduce.forward(x, train), train)), train);
        if (project) {
            main += shortcut_bn.forward(shortcut.forward(x), train);
        } else {
            main += x;
        }
        return out.forward(main);
    }
    Tensor backward(const Tensor& dy) {
        const Tensor g = out.backward(dy);
        Tensor dx = reduce.backward(spatial.backward(expand.backward(expand_bn.backward(g))));
        if (project) {
            dx += shortcut.backward(shortcut_bn.backward(g));
        } else {
            dx += g;
        }
        return dx;
    }
    void collect(const std::string& p, Registry& reg) {
        reduce.collect(p + ".reduce", reg);
        spatial.collect(p + ".spatial", reg);
        expand.collect(p + ".expand", reg);
        expand_bn.collect(p + ".expand_bn", reg);
        if (project) {
            shortcut.collect(p + ".shortcut", reg);
            shortcut_bn.collect(p + ".shortcut_bn", reg);
        }
    }
};

int width_at(int base, int level) { return base << level; }

// --- U-Net / Attention U-Net ---------------------------------------------------------

class UNet final : public Network {
public:
    UNet(const ModelConfig& cfg, bool attention) : attention_(attention), depth_(cfg.depth) {
        int cin = cfg.in_channels;
        for (int i = 0; i < depth_; ++i) {
            enc_.emplace_back(cin, width_at(cfg.base_width, i));
            cin = width_at(cfg.base_width, i);
        }
        pools_.resize(depth_);
        bottleneck_ = DoubleConv(cin, width_at(cfg.base_width, depth_));
        ups_.resize(depth_);
        dec_.resize(depth_);
        if (attention_) gates_.resize(depth_);
        for (int i = 0; i < depth_; ++i) {
            const int w = width_at(cfg.base_width, i);
            ups_[i] = ConvTranspose2x2(width_at(cfg.base_width, i + 1), w);
            dec_[i] = DoubleConv(2 * w, w);
            if (attention_) gates_[i] = AttentionGate(w, w, std::max(1, w / 2));
        }
        head_ = Conv2d(cfg.base_width, 1, 1);
    }

    Tensor forward(const Tensor& x, bool train) override {
        skips_.assign(depth_, Tensor());
        Tensor h = x;
        for (int i = 0; i < depth_; ++i) {
            h = enc_[i].forward(h, train);
            skips_[i] = h;
            h = pools_[i].forward(h);
        }
        h = bottleneck_.forward(h, train);
        for (int i = depth_ - 1; i >= 0; --i) {
            Tensor u = ups_[i].forward(h);
            Tensor s = attention_ ? gates_[i].forward(skips_[i], u) : skips_[i];
            h = dec_[i].forward(concat_channels(u, s), train);
        }
        skips_.clear();
        return head_.forward(h);
    }

    Tensor backward(const Tensor& dlogits) override {
        Tensor g = head_.backward(dlogits);
        std::vector<Tensor> dskip(depth_);
        for (int i = 0; i < depth_; ++i) {
            const Tensor gc = dec_[i].backward(g);
            Tensor gu, gs;
            split_channels(gc, gc.c / 2, gu, gs);
            if (attention_) {
                auto [d_skip, d_gate] = gates_[i].backward(gs);
                dskip[i] = std::move(d_skip);
                gu += d_gate;
            } else {
                dskip[i] = std::move(gs);
            }
            g = ups_[i].backward(gu);
        }
        g = bottleneck_.backward(g);
        for (int i = depth_ - 1; i >= 0; --i) {
            g = pools_[i].backward(g);
            g += dskip[i];
            g = enc_[i].backward(g);
        }
        return g;
    }

    void collect(Registry& reg) override {
        for (int i = 0; i < depth_; ++i) enc_[i].collect("enc" + std::to_string(i), reg);
        bottleneck_.collect("bottleneck", reg);
        for (int i = depth_ - 1; i >= 0; --i) {
            ups_[i].collect("up" + std::to_string(i), reg);
            if (attention_) gates_[i].collect("gate" + std::to_string(i), reg);
            dec_[i].collect("dec" + std::to_string(i), reg);
        }
        head_.collect("head", reg);
    }

    [[nodiscard]] std::unique_ptr<Network> clone() const override { return std::make_unique<UNet>(*this); }

private:
    bool attention_;
    int depth_;
    std::vector<DoubleConv> enc_;
    std::vector<MaxPool2> pools_;
    DoubleConv bottleneck_;
    std::vector<ConvTranspose2x2> ups_;
    std::vector<AttentionGate> gates_;
    std::vector<DoubleConv> dec_;
    Conv2d head_;
    std::vector<Tensor> skips_;
};

// --- SegNet with a residual (ResNet-50 style) encoder ------------------------------

class SegNetResNet final : public Network {
public:
    explicit SegNetResNet(const ModelConfig& cfg) : depth_(cfg.depth) {
        static constexpr int kResNet50Blocks[] = {3, 4, 6, 3};
        stem_ = ConvBnRelu(cfg.in_channels, cfg.base_width);
        int cin = cfg.base_width;
        stages_.resize(depth_);
        pools_.resize(depth_);
        for (int i = 0; i < depth_; ++i) {
            const int w = width_at(cfg.base_width, i);
            const int blocks = cfg.full_backbone ? kResNet50Blocks[std::min(i, 3)] : 1;
            for (int b = 0; b < blocks; ++b) {
                stages_[i].emplace_back(cin, w);
                cin = w;
            }
        }
        ups_.resize(depth_);
        dec_.resize(depth_);
        for (int i = depth_ - 1; i >= 0; --i) {
            const int w = width_at(cfg.base_width, i);
            ups_[i] = ConvTranspose2x2(cin, w);
            dec_[i] = ConvBnRelu(w, w);
            cin = w;
        }
        head_ = Conv2d(cfg.base_width, 1, 1);
    }

    Tensor forward(const Tensor& x, bool train) override {
        Tensor h = stem_.forward(x, train);
        for (int i = 0; i < depth_; ++i) {
            for (auto& blk : stages_[i]) h = blk.forward(h, train);
            h = pools_[i].forward(h);
        }
        for (int i = depth_ - 1; i >= 0; --i) h = dec_[i].forward(ups_[i].forward(h), train);
        return head_.forward(h);
    }

    Tensor backward(const Tensor& dlogits) override {
        Tensor g = head_.backward(dlogits);
        for (int i = 0; i < depth_; ++i) g = ups_[i].backward(dec_[i].backward(g));
        for (int i = depth_ - 1; i >= 0; --i) {
            g = pools_[i].backward(g);
            for (auto it = stages_[i].rbegin(); it != stages_[i].rend(); ++it) g = it->backward(g);
        }
        return stem_.backward(g);
    }

    void collect(Registry& reg) override {
        stem_.collect("stem", reg);
        for (int i = 0; i < depth_; ++i) {
            for (std::size_t b = 0; b < stages_[i].size(); ++b) {
                stages_[i][b].collect("stage" + std::to_string(i) + ".block" + std::to_string(b), reg);
            }
        }
        for (int i = depth_ - 1; i >= 0; --i) {
            ups_[i].collect("up" + std::to_string(i), reg);
            dec_[i].collect("dec" + std::to_string(i), reg);
        }
        head_.collect("head", reg);
    }

    [[nodiscard]] std::unique_ptr<Network> clone() const override { return std::make_unique<SegNetResNet>(*this); }

private:
    int depth_;
    ConvBnRelu stem_;
    std::vector<std::vector<Bottleneck>> stages_;
    std::vector<MaxPool2> pools_;
    std::vector<ConvTranspose2x2> ups_;
    std::vector<ConvBnRelu> dec_;
    Conv2d head_;
};

// --- FCN-32s with a VGG-16 style encoder -----------------------------------------

class FCN32VGG final : public Network {
public:
    explicit FCN32VGG(const ModelConfig& cfg) : depth_(cfg.depth), upsample_(1 << cfg.depth) {
        static constexpr int kVgg16Convs[] = {2, 2, 3, 3, 3};
        int cin = cfg.in_channels;
        stages_.resize(depth_);
        pools_.resize(depth_);
        for (int i = 0; i < depth_; ++i) {
            const int w = width_at(cfg.base_width, std::min(i, 3));
            const int convs = cfg.full_backbone ? kVgg16Convs[std::min(i, 4)] : std::min(kVgg16Convs[std::min(i, 4)], 2);
            for (int c = 0; c < convs; ++c) {
                stages_[i].emplace_back(cin, w);
                cin = w;
            }
        }
        // fc6 / fc7 as 1x1 convolutions
        fc6_ = ConvBnRelu(cin, 2 * cin, 1);
        fc7_ = ConvBnRelu(2 * cin, 2 * cin, 1);
        score_ = Conv2d(2 * cin, 1, 1);
    }

    Tensor forward(const Tensor& x, bool train) override {
        Tensor h = x;
        for (int i = 0; i < depth_; ++i) {
            for (auto& c : stages_[i]) h = c.forward(h, train);
            h = pools_[i].forward(h);
        }
        h = fc7_.forward(fc6_.forward(h, train), train);
        return upsample_.forward(score_.forward(h));
    }

    Tensor backward(const Tensor& dlogits) override {
        Tensor g = score_.backward(upsample_.backward(dlogits));
        g = fc6_.backward(fc7_.backward(g));
        for (int i = depth_ - 1; i >= 0; --i) {
            g = pools_[i].backward(g);
            for (auto it = stages_[i].rbegin(); it != stages_[i].rend(); ++it) g = it->backward(g);
        }
        return g;
    }

    void collect(Registry& reg) override {
        for (int i = 0; i < depth_; ++i) {
            for (std::size_t c = 0; c < stages_[i].size(); ++c) {
                stages_[i][c].collect("block" + std::to_string(i) + ".conv" + std::to_string(c), reg);
            }
        }
        fc6_.collect("fc6", reg);
        fc7_.collect("fc7", reg);
        score_.collect("score", reg);
    }

    [[nodiscard]] std::unique_ptr<Network> clone() const override { return std::make_unique<FCN32VGG>(*this); }

private:
    int depth_;
    std::vector<std::vector<ConvBnRelu>> stages_;
    std::vector<MaxPool2> pools_;
    ConvBnRelu fc6_, fc7_;
    Conv2d score_;
    BilinearUpsample upsample_;
};

}  // namespace

// --- public API ---------------------------------------------------------------------

std::string to_string(Architecture a) {
    switch (a) {
        case Architecture::UNet: return "unet";
        case Architecture::AttentionUNet: return "attention_unet";
        case Architecture::SegNetResNet50: return "segnet_resnet50";
        case Architecture::FCN32VGG16: return "fcn32_vgg16";
    }
    return "?";
}

Architecture parse_architecture(const std::string& s) {
    for (Architecture a : all_architectures()) {
        if (to_string(a) == s) return a;
    }
    throw ConfigError("unknown architecture '" + s + "' (unet|attention_unet|segnet_resnet50|fcn32_vgg16)");
}

const std::vector<Architecture>& all_architectures() {
    static const std::vector<Architecture> all = {Architecture::UNet, Architecture::AttentionUNet,
                                                  Architecture::SegNetResNet50, Architecture::FCN32VGG16};
    return all;
}

void ModelConfig::validate() const {
    if (in_channels != 2 && in_channels != 4 && in_channels != 6 && in_channels != 7) {
        throw ConfigError("model: in_channels must be a scenario arity (2, 4, 6 or 7), got " + std::to_string(in_channels));
    }
    if (base_width < 4) throw ConfigError("model: base_width must be >= 4");
    if (depth < 2 || depth > 8) throw ConfigError("model: depth must lie in [2, 8]");
}

std::unique_ptr<Network> make_network(const ModelConfig& cfg) {
    cfg.validate();
    switch (cfg.arch) {
        case Architecture::UNet: return std::make_unique<UNet>(cfg, false);
        case Architecture::AttentionUNet: return std::make_unique<UNet>(cfg, true);
        case Architecture::SegNetResNet50: return std::make_unique<SegNetResNet>(cfg);
        case Architecture::FCN32VGG16: return std::make_unique<FCN32VGG>(cfg);
    }
    throw ConfigError("unknown architecture");
}

// --- AttentionGate -------------------------------------------------------------------

AttentionGate::AttentionGate(int gate_channels, int skip_channels, int inter_channels)
    : wg(gate_channels, inter_channels, 1), wx(skip_channels, inter_channels, 1), psi(inter_channels, 1, 1) {}

Tensor AttentionGate::forward(const Tensor& skip, const Tensor& gate) {
    if (wg.out_channels() != wx.out_channels()) {
        throw DataError("attention gate: projected gate has " + std::to_string(wg.out_channels()) +
                        " channels but projected skip has " + std::to_string(wx.out_channels()));
    }
    Tensor g = wg.forward(gate);
    upsampled_ = false;
    if (g.h != skip.h || g.w != skip.w) {
        if (2 * g.h != skip.h || 2 * g.w != skip.w || g.n != skip.n) {
            throw DataError("attention gate: gate " + gate.shape_string() + " not alignable with skip " + skip.shape_string());
        }
        g = up_.forward(g);
        upsampled_ = true;
    }
    Tensor s = wx.forward(skip);
    s += g;
    alpha_ = sigmoid_.forward(psi.forward(relu_.forward(s)));
    skip_ = skip;
    Tensor out = skip;
    const std::size_t plane = skip.plane();
    for (int i = 0; i < skip.n; ++i) {
        const double* a = alpha_.channel(i, 0);
        for (int ch = 0; ch < skip.c; ++ch) {
            double* o = out.channel(i, ch);
            for (std::size_t k = 0; k < plane; ++k) o[k] *= a[k];
        }
    }
    return out;
}

std::pair<Tensor, Tensor> AttentionGate::backward(const Tensor& dout) {
    Tensor dskip = dout;
    Tensor dalpha(alpha_.n, 1, alpha_.h, alpha_.w);
    const std::size_t plane = skip_.plane();
    for (int i = 0; i < skip_.n; ++i) {
        const double* a = alpha_.channel(i, 0);
        double* da = dalpha.channel(i, 0);
        for (int ch = 0; ch < skip_.c; ++ch) {
            const double* s = skip_.channel(i, ch);
            double* ds = dskip.channel(i, ch);
            for (std::size_t k = 0; k < plane; ++k) {
                da[k] += ds[k] * s[k];
                ds[k] *= a[k];
            }
        }
    }
    const Tensor dsum = relu_.backward(psi.backward(sigmoid_.backward(dalpha)));
    dskip += wx.backward(dsum);
    Tensor dg = upsampled_ ? up_.backward(dsum) : dsum;
    return {std::move(dskip), wg.backward(dg)};
}

void AttentionGate::collect(const std::string& prefix, Registry& reg) {
    wg.collect(prefix + ".wg", reg);
    wx.collect(prefix + ".wx", reg);
    psi.collect(prefix + ".psi", reg);
}

// --- SegmentationModel ---------------------------------------------------------------

SegmentationModel::SegmentationModel(const ModelConfig& config) : config_(config), net_(make_network(config)) {
    rebind();
    initialize();
}

SegmentationModel::SegmentationModel(const SegmentationModel& other)
    : config_(other.config_), net_(other.net_->clone()) {
    rebind();
}

SegmentationModel& SegmentationModel::operator=(const SegmentationModel& other) {
    if (this != &other) {
        config_ = other.config_;
        net_ = other.net_->clone();
        rebind();
    }
    return *this;
}

void SegmentationModel::rebind() {
    registry_ = Registry{};
    net_->collect(registry_);
}

void SegmentationModel::initialize() {
    std::mt19937_64 rng(config_.seed);
    for (auto& p : registry_.params) {
        switch (p.kind) {
            case ParamKind::Weight: {
                std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / p.fan_in));
                for (double& v : *p.value) v = normal(rng);
                break;
            }
            case ParamKind::Gamma: std::fill(p.value->begin(), p.value->end(), 1.0); break;
            case ParamKind::Bias:
            case ParamKind::Beta: std::fill(p.value->begin(), p.value->end(), 0.0); break;
        }
    }
}

void SegmentationModel::check_input(const Tensor& batch) const {
    const int div = 1 << config_.depth;
    std::ostringstream os;
    if (batch.n < 1 || batch.c != config_.in_channels) {
        os << "model input: expected N x " << config_.in_channels << " x H x W, got " << batch.shape_string();
        throw DataError(os.str());
    }
    if (batch.h < div || batch.w < div || batch.h % div || batch.w % div) {
        os << "model input: H and W must be positive multiples of " << div << " (2^depth), got " << batch.h << "x"
           << batch.w;
        throw DataError(os.str());
    }
}

Tensor SegmentationModel::forward_logits(const Tensor& batch, bool train) {
    check_input(batch);
    return net_->forward(batch, train);
}

Tensor SegmentationModel::forward(const Tensor& batch) {
    Tensor z = forward_logits(batch, false);
    for (double& v : z.data) v = std::clamp(1.0 / (1.0 + std::exp(-v)), kProbabilityFloor, 1.0 - kProbabilityFloor);
    return z;
}

Tensor SegmentationModel::predict(const Tensor& batch) const {
    SegmentationModel copy(*this);
    return copy.forward(batch);
}

Tensor SegmentationModel::backward(const Tensor& dlogits) { return net_->backward(dlogits); }

void SegmentationModel::zero_grad() {
    for (auto& p : registry_.params) std::fill(p.grad->begin(), p.grad->end(), 0.0);
}

std::size_t SegmentationModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : registry_.params) n += p.value->size();
    return n;
}

std::uint64_t SegmentationModel::checksum() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto feed = [&h](const std::vector<double>& v) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
        for (std::size_t i = 0; i < v.size() * sizeof(double); ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    for (const auto& p : registry_.params) feed(*p.value);
    for (const auto& b : registry_.buffers) feed(*b.value);
    return h;
}

SegmentationModel build_model(const ModelConfig& config) { return SegmentationModel(config); }

}  // namespace forestseg::nn
