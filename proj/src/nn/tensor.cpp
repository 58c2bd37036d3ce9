#include "forestseg/nn/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "forestseg/errors.hpp"

namespace forestseg::nn {

std::string Tensor::shape_string() const {
    std::ostringstream os;
    os << n << "x" << c << "x" << h << "x" << w;
    return os.str();
}

Tensor& Tensor::operator+=(const Tensor& o) {
    if (!same_shape(o)) throw DataError("tensor add: shape " + shape_string() + " vs " + o.shape_string());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
    return *this;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.n != b.n || a.h != b.h || a.w != b.w) {
        throw DataError("concat: shape " + a.shape_string() + " vs " + b.shape_string());
    }
    Tensor out(a.n, a.c + b.c, a.h, a.w);
    for (int i = 0; i < a.n; ++i) {
        std::copy_n(a.sample(i), a.sample_size(), out.sample(i));
        std::copy_n(b.sample(i), b.sample_size(), out.sample(i) + a.sample_size());
    }
    return out;
}

void split_channels(const Tensor& g, int ca, Tensor& a, Tensor& b) {
    a = Tensor(g.n, ca, g.h, g.w);
    b = Tensor(g.n, g.c - ca, g.h, g.w);
    for (int i = 0; i < g.n; ++i) {
        std::copy_n(g.sample(i), a.sample_size(), a.sample(i));
        std::copy_n(g.sample(i) + a.sample_size(), b.sample_size(), b.sample(i));
    }
}

}  // namespace forestseg::nn
