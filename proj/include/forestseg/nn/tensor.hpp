#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace forestseg::nn {

/// Dense NCHW tensor of doubles.
struct Tensor {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_, double fill = 0.0)
        : n(n_), c(c_), h(h_), w(w_), data(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {}

    [[nodiscard]] std::size_t size() const { return data.size(); }
    [[nodiscard]] std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
    [[nodiscard]] std::size_t sample_size() const { return static_cast<std::size_t>(c) * h * w; }

    [[nodiscard]] double* sample(int i) { return data.data() + i * sample_size(); }
    [[nodiscard]] const double* sample(int i) const { return data.data() + i * sample_size(); }
    [[nodiscard]] double* channel(int i, int ch) { return sample(i) + ch * plane(); }
    [[nodiscard]] const double* channel(int i, int ch) const { return sample(i) + ch * plane(); }

    [[nodiscard]] double& at(int i, int ch, int y, int x) {
        return data[((static_cast<std::size_t>(i) * c + ch) * h + y) * w + x];
    }
    [[nodiscard]] double at(int i, int ch, int y, int x) const {
        return data[((static_cast<std::size_t>(i) * c + ch) * h + y) * w + x];
    }

    [[nodiscard]] bool same_shape(const Tensor& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }
    [[nodiscard]] std::string shape_string() const;

    void zero() { std::fill(data.begin(), data.end(), 0.0); }
    Tensor& operator+=(const Tensor& o);
};

/// Channel-wise concatenation of two tensors with equal n, h, w.
Tensor concat_channels(const Tensor& a, const Tensor& b);
/// Inverse of concat_channels for gradients: first `ca` channels to `a`, the rest to `b`.
void split_channels(const Tensor& g, int ca, Tensor& a, Tensor& b);

}  // namespace forestseg::nn
