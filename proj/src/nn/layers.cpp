#include "forestseg/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <Eigen/Core>

#include "forestseg/errors.hpp"

namespace forestseg::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

void check_channels(const Tensor& x, int expected, const char* layer) {
    if (x.c != expected) {
        throw DataError(std::string(layer) + ": expected " + std::to_string(expected) + " channels, got " +
                        std::to_string(x.c));
    }
}

// Unfolds one sample (cin x h x w) into a (cin*k*k) x (h*w) patch matrix.
void im2col(const double* x, int cin, int h, int w, int k, double* cols) {
    const int pad = k / 2;
    const std::size_t hw = static_cast<std::size_t>(h) * w;
    for (int ci = 0; ci < cin; ++ci) {
        const double* plane = x + ci * hw;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                double* row = cols + ((static_cast<std::size_t>(ci) * k + ky) * k + kx) * hw;
                const int x0 = std::max(0, pad - kx);
                const int x1 = std::min(w, w + pad - kx);
                for (int y = 0; y < h; ++y) {
                    double* dst = row + static_cast<std::size_t>(y) * w;
                    const int sy = y + ky - pad;
                    if (sy < 0 || sy >= h) {
                        std::fill(dst, dst + w, 0.0);
                        continue;
                    }
                    std::fill(dst, dst + x0, 0.0);
                    if (x1 > x0) std::memcpy(dst + x0, plane + static_cast<std::size_t>(sy) * w + x0 + kx - pad, sizeof(double) * (x1 - x0));
                    std::fill(dst + std::max(x0, x1), dst + w, 0.0);
                }
            }
        }
    }
}

void col2im(const double* cols, int cin, int h, int w, int k, double* dx) {
    const int pad = k / 2;
    const std::size_t hw = static_cast<std::size_t>(h) * w;
    for (int ci = 0; ci < cin; ++ci) {
        double* plane = dx + ci * hw;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const double* row = cols + ((static_cast<std::size_t>(ci) * k + ky) * k + kx) * hw;
                const int x0 = std::max(0, pad - kx);
                const int x1 = std::min(w, w + pad - kx);
                for (int y = 0; y < h; ++y) {
                    const int sy = y + ky - pad;
                    if (sy < 0 || sy >= h) continue;
                    const double* src = row + static_cast<std::size_t>(y) * w;
                    double* dst = plane + static_cast<std::size_t>(sy) * w + kx - pad;
                    for (int xx = x0; xx < x1; ++xx) dst[xx] += src[xx];
                }
            }
        }
    }
}

// Row-major (out x in) linear interpolation matrix, half-pixel centres.
std::vector<double> bilinear_matrix(int in, int factor) {
    const int out = in * factor;
    std::vector<double> a(static_cast<std::size_t>(out) * in, 0.0);
    for (int i = 0; i < out; ++i) {
        double src = (i + 0.5) / factor - 0.5;
        src = std::clamp(src, 0.0, static_cast<double>(in - 1));
        const int i0 = static_cast<int>(std::floor(src));
        const int i1 = std::min(i0 + 1, in - 1);
        const double t = src - i0;
        a[static_cast<std::size_t>(i) * in + i0] += 1.0 - t;
        a[static_cast<std::size_t>(i) * in + i1] += t;
    }
    return a;
}

}  // namespace

// --- Conv2d ------------------------------------------------------------------

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, bool with_bias)
    : weight(static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel, 0.0),
      bias(out_channels, 0.0),
      dweight(weight.size(), 0.0),
      dbias(out_channels, 0.0),
      cin_(in_channels),
      cout_(out_channels),
      k_(kernel),
      has_bias_(with_bias) {
    if (kernel % 2 != 1) throw ConfigError("Conv2d: kernel must be odd");
}

Tensor Conv2d::forward(const Tensor& x) {
    check_channels(x, cin_, "Conv2d");
    input_ = x;
    const int hw = x.h * x.w;
    const int kdim = cin_ * k_ * k_;
    Tensor y(x.n, cout_, x.h, x.w);
    ConstMapMat wm(weight.data(), cout_, kdim);
    Eigen::Map<const Eigen::VectorXd> b(bias.data(), cout_);
    if (k_ > 1) cols_.resize(static_cast<std::size_t>(kdim) * hw);
    for (int i = 0; i < x.n; ++i) {
        const double* colsp = x.sample(i);
        if (k_ > 1) {
            im2col(x.sample(i), cin_, x.h, x.w, k_, cols_.data());
            colsp = cols_.data();
        }
        MapMat out(y.sample(i), cout_, hw);
        out.noalias() = wm * ConstMapMat(colsp, kdim, hw);
        if (has_bias_) out.colwise() += b;
    }
    return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
    const Tensor& x = input_;
    const int hw = x.h * x.w;
    const int kdim = cin_ * k_ * k_;
    Tensor dx(x.n, cin_, x.h, x.w);
    ConstMapMat wm(weight.data(), cout_, kdim);
    MapMat dw(dweight.data(), cout_, kdim);
    std::vector<double> dcols(k_ > 1 ? static_cast<std::size_t>(kdim) * hw : 0);
    for (int i = 0; i < x.n; ++i) {
        ConstMapMat g(dy.sample(i), cout_, hw);
        const double* colsp = x.sample(i);
        if (k_ > 1) {
            im2col(x.sample(i), cin_, x.h, x.w, k_, cols_.data());
            colsp = cols_.data();
        }
        dw.noalias() += g * ConstMapMat(colsp, kdim, hw).transpose();
        // Plain loop: Eigen's vectorised reduction order depends on buffer alignment.
        if (has_bias_) {
            for (int co = 0; co < cout_; ++co) {
                const double* row = dy.sample(i) + static_cast<std::size_t>(co) * hw;
                double acc = 0.0;
                for (int j = 0; j < hw; ++j) acc += row[j];
                dbias[co] += acc;
            }
        }
        if (k_ > 1) {
            MapMat dc(dcols.data(), kdim, hw);
            dc.noalias() = wm.transpose() * g;
            col2im(dcols.data(), cin_, x.h, x.w, k_, dx.sample(i));
        } else {
            MapMat(dx.sample(i), cin_, hw).noalias() = wm.transpose() * g;
        }
    }
    return dx;
}

void Conv2d::collect(const std::string& prefix, Registry& reg) {
    reg.param(prefix + ".weight", weight, dweight, ParamKind::Weight, cin_ * k_ * k_);
    if (has_bias_) reg.param(prefix + ".bias", bias, dbias, ParamKind::Bias);
}

// --- BatchNorm2d -------------------------------------------------------------

BatchNorm2d::BatchNorm2d(int channels)
    : gamma(channels, 1.0),
      beta(channels, 0.0),
      dgamma(channels, 0.0),
      dbeta(channels, 0.0),
      running_mean(channels, 0.0),
      running_var(channels, 1.0),
      c_(channels) {}

Tensor BatchNorm2d::forward(const Tensor& x, bool train) {
    check_channels(x, c_, "BatchNorm2d");
    Tensor y(x.n, x.c, x.h, x.w);
    const std::size_t plane = x.plane();
    const double m = static_cast<double>(x.n) * static_cast<double>(plane);
    if (train) {
        xhat_ = Tensor(x.n, x.c, x.h, x.w);
        inv_std_.assign(c_, 0.0);
    }
    for (int ch = 0; ch < c_; ++ch) {
        double mean, var;
        if (train) {
            double s = 0.0;
            for (int i = 0; i < x.n; ++i) {
                const double* p = x.channel(i, ch);
                for (std::size_t k = 0; k < plane; ++k) s += p[k];
            }
            mean = s / m;
            double ss = 0.0;
            for (int i = 0; i < x.n; ++i) {
                const double* p = x.channel(i, ch);
                for (std::size_t k = 0; k < plane; ++k) ss += (p[k] - mean) * (p[k] - mean);
            }
            var = ss / m;
            const double unbiased = m > 1 ? ss / (m - 1) : var;
            running_mean[ch] = (1 - kMomentum) * running_mean[ch] + kMomentum * mean;
            running_var[ch] = (1 - kMomentum) * running_var[ch] + kMomentum * unbiased;
        } else {
            mean = running_mean[ch];
            var = running_var[ch];
        }
        const double inv = 1.0 / std::sqrt(var + kEps);
        if (train) inv_std_[ch] = inv;
        for (int i = 0; i < x.n; ++i) {
            const double* p = x.channel(i, ch);
            double* q = y.channel(i, ch);
            double* xh = train ? xhat_.channel(i, ch) : nullptr;
            for (std::size_t k = 0; k < plane; ++k) {
                const double h = (p[k] - mean) * inv;
                if (xh) xh[k] = h;
                q[k] = gamma[ch] * h + beta[ch];
            }
        }
    }
    return y;
}

Tensor BatchNorm2d::backward(const Tensor& dy) {
    if (!xhat_.same_shape(dy)) throw DataError("BatchNorm2d::backward without a matching training forward");
    Tensor dx(dy.n, dy.c, dy.h, dy.w);
    const std::size_t plane = dy.plane();
    const double m = static_cast<double>(dy.n) * static_cast<double>(plane);
    for (int ch = 0; ch < c_; ++ch) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int i = 0; i < dy.n; ++i) {
            const double* g = dy.channel(i, ch);
            const double* xh = xhat_.channel(i, ch);
            for (std::size_t k = 0; k < plane; ++k) {
                sum_dy += g[k];
                sum_dy_xhat += g[k] * xh[k];
            }
        }
        dgamma[ch] += sum_dy_xhat;
        dbeta[ch] += sum_dy;
        const double scale = gamma[ch] * inv_std_[ch] / m;
        for (int i = 0; i < dy.n; ++i) {
            const double* g = dy.channel(i, ch);
            const double* xh = xhat_.channel(i, ch);
            double* d = dx.channel(i, ch);
            for (std::size_t k = 0; k < plane; ++k) d[k] = scale * (m * g[k] - sum_dy - xh[k] * sum_dy_xhat);
        }
    }
    return dx;
}

void BatchNorm2d::collect(const std::string& prefix, Registry& reg) {
    reg.param(prefix + ".gamma", gamma, dgamma, ParamKind::Gamma);
    reg.param(prefix + ".beta", beta, dbeta, ParamKind::Beta);
    reg.buffer(prefix + ".running_mean", running_mean);
    reg.buffer(prefix + ".running_var", running_var);
}

// --- activation trace ------------------------------------------------------------

namespace {
thread_local ActivationTrace* g_trace = nullptr;
}

ActivationTrace::ActivationTrace() : prev_(g_trace) { g_trace = this; }

ActivationTrace::~ActivationTrace() { g_trace = prev_; }

void ActivationTrace::record(std::uint64_t v) {
    if (!g_trace) return;
    std::uint64_t& d = g_trace->digest_;
    d = (d ^ v) * 1099511628211ULL;
}

// --- activations ---------------------------------------------------------------

Tensor ReLU::forward(const Tensor& x) {
    Tensor y = x;
    active_.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        active_[i] = x.data[i] > 0.0;
        if (x.data[i] <= 0.0) y.data[i] = 0.0;  // NaN passes through
    }
    if (g_trace) {
        for (std::size_t i = 0; i < active_.size(); ++i) ActivationTrace::record(active_[i]);
    }
    return y;
}

Tensor ReLU::backward(const Tensor& dy) const {
    Tensor dx = dy;
    for (std::size_t i = 0; i < dx.size(); ++i) {
        if (!active_[i]) dx.data[i] = 0.0;
    }
    return dx;
}

Tensor Sigmoid::forward(const Tensor& x) {
    out_ = x;
    for (double& v : out_.data) v = 1.0 / (1.0 + std::exp(-v));
    return out_;
}

Tensor Sigmoid::backward(const Tensor& dy) const {
    Tensor dx = dy;
    for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] *= out_.data[i] * (1.0 - out_.data[i]);
    return dx;
}

// --- pooling / resampling --------------------------------------------------------

Tensor MaxPool2::forward(const Tensor& x) {
    if (x.h % 2 || x.w % 2) throw DataError("MaxPool2: spatial dims must be even, got " + x.shape_string());
    in_h_ = x.h;
    in_w_ = x.w;
    Tensor y(x.n, x.c, x.h / 2, x.w / 2);
    argmax_.resize(y.size());
    std::size_t o = 0;
    for (int i = 0; i < x.n; ++i) {
        for (int ch = 0; ch < x.c; ++ch) {
            const double* p = x.channel(i, ch);
            const std::size_t base = static_cast<std::size_t>(i * x.c + ch) * x.plane();
            for (int yy = 0; yy < y.h; ++yy) {
                for (int xx = 0; xx < y.w; ++xx, ++o) {
                    std::size_t best = static_cast<std::size_t>(2 * yy) * x.w + 2 * xx;
                    for (std::size_t cand : {best + 1, best + x.w, best + x.w + 1}) {
                        if (p[cand] > p[best] || std::isnan(p[cand])) best = cand;
                    }
                    y.data[o] = p[best];
                    argmax_[o] = base + best;
                }
            }
        }
    }
    if (g_trace) {
        for (std::size_t a : argmax_) ActivationTrace::record(a);
    }
    return y;
}

Tensor MaxPool2::backward(const Tensor& dy) const {
    Tensor dx(dy.n, dy.c, in_h_, in_w_);
    for (std::size_t o = 0; o < dy.size(); ++o) dx.data[argmax_[o]] += dy.data[o];
    return dx;
}

ConvTranspose2x2::ConvTranspose2x2(int in_channels, int out_channels)
    : weight(static_cast<std::size_t>(out_channels) * 4 * in_channels, 0.0),
      bias(out_channels, 0.0),
      dweight(weight.size(), 0.0),
      dbias(out_channels, 0.0),
      cin_(in_channels),
      cout_(out_channels) {}

Tensor ConvTranspose2x2::forward(const Tensor& x) {
    check_channels(x, cin_, "ConvTranspose2x2");
    input_ = x;
    const int hw = x.h * x.w;
    Tensor y(x.n, cout_, 2 * x.h, 2 * x.w);
    ConstMapMat wm(weight.data(), 4 * cout_, cin_);
    RowMat z(4 * cout_, hw);
    for (int i = 0; i < x.n; ++i) {
        z.noalias() = wm * ConstMapMat(x.sample(i), cin_, hw);
        for (int co = 0; co < cout_; ++co) {
            double* out = y.channel(i, co);
            for (int d = 0; d < 4; ++d) {
                const int dyo = d / 2, dxo = d % 2;
                const double* row = z.data() + static_cast<std::size_t>(co * 4 + d) * hw;
                for (int yy = 0; yy < x.h; ++yy) {
                    for (int xx = 0; xx < x.w; ++xx) {
                        out[static_cast<std::size_t>(2 * yy + dyo) * y.w + 2 * xx + dxo] = row[yy * x.w + xx] + bias[co];
                    }
                }
            }
        }
    }
    return y;
}

Tensor ConvTranspose2x2::backward(const Tensor& dy) {
    const Tensor& x = input_;
    const int hw = x.h * x.w;
    Tensor dx(x.n, cin_, x.h, x.w);
    ConstMapMat wm(weight.data(), 4 * cout_, cin_);
    MapMat dw(dweight.data(), 4 * cout_, cin_);
    RowMat dz(4 * cout_, hw);
    for (int i = 0; i < x.n; ++i) {
        for (int co = 0; co < cout_; ++co) {
            const double* g = dy.channel(i, co);
            for (int d = 0; d < 4; ++d) {
                const int dyo = d / 2, dxo = d % 2;
                double* row = dz.data() + static_cast<std::size_t>(co * 4 + d) * hw;
                for (int yy = 0; yy < x.h; ++yy) {
                    for (int xx = 0; xx < x.w; ++xx) {
                        const double v = g[static_cast<std::size_t>(2 * yy + dyo) * dy.w + 2 * xx + dxo];
                        row[yy * x.w + xx] = v;
                        dbias[co] += v;
                    }
                }
            }
        }
        ConstMapMat xs(x.sample(i), cin_, hw);
        dw.noalias() += dz * xs.transpose();
        MapMat(dx.sample(i), cin_, hw).noalias() = wm.transpose() * dz;
    }
    return dx;
}

void ConvTranspose2x2::collect(const std::string& prefix, Registry& reg) {
    reg.param(prefix + ".weight", weight, dweight, ParamKind::Weight, cin_);
    reg.param(prefix + ".bias", bias, dbias, ParamKind::Bias);
}

Tensor BilinearUpsample::forward(const Tensor& x) {
    if (x.h != in_h_ || x.w != in_w_) {
        in_h_ = x.h;
        in_w_ = x.w;
        ah_ = bilinear_matrix(x.h, factor_);
        aw_ = bilinear_matrix(x.w, factor_);
    }
    Tensor y(x.n, x.c, x.h * factor_, x.w * factor_);
    ConstMapMat ah(ah_.data(), y.h, x.h), aw(aw_.data(), y.w, x.w);
    for (int i = 0; i < x.n; ++i) {
        for (int ch = 0; ch < x.c; ++ch) {
            MapMat(y.channel(i, ch), y.h, y.w).noalias() = ah * ConstMapMat(x.channel(i, ch), x.h, x.w) * aw.transpose();
        }
    }
    return y;
}

Tensor BilinearUpsample::backward(const Tensor& dy) const {
    Tensor dx(dy.n, dy.c, in_h_, in_w_);
    ConstMapMat ah(ah_.data(), dy.h, in_h_), aw(aw_.data(), dy.w, in_w_);
    for (int i = 0; i < dy.n; ++i) {
        for (int ch = 0; ch < dy.c; ++ch) {
            MapMat(dx.channel(i, ch), in_h_, in_w_).noalias() =
                ah.transpose() * ConstMapMat(dy.channel(i, ch), dy.h, dy.w) * aw;
        }
    }
    return dx;
}

Tensor NearestUpsample2::forward(const Tensor& x) {
    Tensor y(x.n, x.c, 2 * x.h, 2 * x.w);
    for (int i = 0; i < x.n; ++i) {
        for (int ch = 0; ch < x.c; ++ch) {
            const double* p = x.channel(i, ch);
            double* q = y.channel(i, ch);
            for (int yy = 0; yy < y.h; ++yy) {
                for (int xx = 0; xx < y.w; ++xx) q[static_cast<std::size_t>(yy) * y.w + xx] = p[(yy / 2) * x.w + xx / 2];
            }
        }
    }
    return y;
}

Tensor NearestUpsample2::backward(const Tensor& dy) const {
    Tensor dx(dy.n, dy.c, dy.h / 2, dy.w / 2);
    for (int i = 0; i < dy.n; ++i) {
        for (int ch = 0; ch < dy.c; ++ch) {
            const double* g = dy.channel(i, ch);
            double* d = dx.channel(i, ch);
            for (int yy = 0; yy < dy.h; ++yy) {
                for (int xx = 0; xx < dy.w; ++xx) d[(yy / 2) * dx.w + xx / 2] += g[static_cast<std::size_t>(yy) * dy.w + xx];
            }
        }
    }
    return dx;
}

}  // namespace forestseg::nn
