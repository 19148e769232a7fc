#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "loomgen/nn/tensor.hpp"

namespace loomgen::nn {

template <typename T>
using MatrixMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

namespace detail {

template <typename T>
void require_same_shape(const Var<T>& a, const Var<T>& b, const char* op) {
    if (a.shape() != b.shape())
        fail(ErrorKind::DimensionMismatch,
             std::string(op) + ": shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
}

template <typename T>
void accumulate(Node<T>& parent, const Tensor<T>& g) {
    if (!parent.requires_grad) return;
    auto& buf = parent.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
}

template <typename T, typename F>
Var<T> unary(const Var<T>& a, F&& f, std::function<T(T x, T y)> df) {
    Tensor<T> out(a.shape());
    const auto& av = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i]);
    return make_result<T>(std::move(out), {a}, [df = std::move(df)](Node<T>& self) {
        auto& p = *self.parents[0];
        auto& g = p.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * df(p.value[i], self.value[i]);
    });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
    detail::require_same_shape(a, b, "add");
    Tensor<T> out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
    return make_result<T>(std::move(out), {a, b}, [](Node<T>& self) {
        detail::accumulate(*self.parents[0], self.grad);
        detail::accumulate(*self.parents[1], self.grad);
    });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
    detail::require_same_shape(a, b, "sub");
    Tensor<T> out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
    return make_result<T>(std::move(out), {a, b}, [](Node<T>& self) {
        detail::accumulate(*self.parents[0], self.grad);
        if (self.parents[1]->requires_grad) {
            auto& g = self.parents[1]->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
        }
    });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
    detail::require_same_shape(a, b, "mul");
    Tensor<T> out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
    return make_result<T>(std::move(out), {a, b}, [](Node<T>& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.requires_grad) {
            auto& g = pa.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb.value[i];
        }
        if (pb.requires_grad) {
            auto& g = pb.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa.value[i];
        }
    });
}

template <typename T>
Var<T> scale(const Var<T>& a, T s) {
    Tensor<T> out = a.value();
    for (auto& v : out.values()) v *= s;
    return make_result<T>(std::move(out), {a}, [s](Node<T>& self) {
        auto& g = self.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * s;
    });
}

template <typename T>
Var<T> add_scalar(const Var<T>& a, T s) {
    Tensor<T> out = a.value();
    for (auto& v : out.values()) v += s;
    return make_result<T>(std::move(out), {a}, [](Node<T>& self) { detail::accumulate(*self.parents[0], self.grad); });
}

template <typename T>
Var<T> relu(const Var<T>& a) {
    return detail::unary<T>(
        a, [](T x) { return x > T{0} ? x : T{0}; }, [](T x, T) { return x > T{0} ? T{1} : T{0}; });
}

template <typename T>
Var<T> leaky_relu(const Var<T>& a, T slope = T(0.2)) {
    return detail::unary<T>(
        a, [slope](T x) { return x > T{0} ? x : slope * x; }, [slope](T x, T) { return x > T{0} ? T{1} : slope; });
}

template <typename T>
Var<T> sigmoid(const Var<T>& a) {
    return detail::unary<T>(
        a, [](T x) { return T{1} / (T{1} + std::exp(-x)); }, [](T, T y) { return y * (T{1} - y); });
}

template <typename T>
Var<T> tanh(const Var<T>& a) {
    return detail::unary<T>(
        a, [](T x) { return std::tanh(x); }, [](T, T y) { return T{1} - y * y; });
}

template <typename T>
Var<T> exp(const Var<T>& a) {
    return detail::unary<T>(
        a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Var<T> reshape(const Var<T>& a, Shape shape) {
    return make_result<T>(a.value().reshaped(std::move(shape)), {a},
                          [](Node<T>& self) { detail::accumulate(*self.parents[0], self.grad); });
}

// ---------------------------------------------------------------------------
// Reductions and losses (all return a 1-element tensor)

template <typename T>
Var<T> sum(const Var<T>& a) {
    T acc{0};
    for (T v : a.value().values()) acc += v;
    return make_result<T>(Tensor<T>({1}, acc), {a}, [](Node<T>& self) {
        auto& g = self.parents[0]->grad_buffer();
        for (auto& v : g.values()) v += self.grad[0];
    });
}

template <typename T>
Var<T> mean(const Var<T>& a) {
    return scale(sum(a), T{1} / static_cast<T>(a.size()));
}

/// Mean of squared differences.
template <typename T>
Var<T> mse(const Var<T>& a, const Var<T>& b) {
    detail::require_same_shape(a, b, "mse");
    const std::size_t n = a.size();
    T acc{0};
    for (std::size_t i = 0; i < n; ++i) {
        const T d = a.value()[i] - b.value()[i];
        acc += d * d;
    }
    return make_result<T>(Tensor<T>({1}, acc / static_cast<T>(n)), {a, b}, [n](Node<T>& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        const T k = T{2} * self.grad[0] / static_cast<T>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const T d = k * (pa.value[i] - pb.value[i]);
            if (pa.requires_grad) pa.grad_buffer()[i] += d;
            if (pb.requires_grad) pb.grad_buffer()[i] -= d;
        }
    });
}

/// Mean of squared differences to a constant target value.
template <typename T>
Var<T> mse_to(const Var<T>& a, T target) {
    return mse(a, Var<T>::constant(Tensor<T>(a.shape(), target)));
}

/// Mean absolute difference. The subgradient at zero is 0.
template <typename T>
Var<T> l1(const Var<T>& a, const Var<T>& b) {
    detail::require_same_shape(a, b, "l1");
    const std::size_t n = a.size();
    T acc{0};
    for (std::size_t i = 0; i < n; ++i) acc += std::abs(a.value()[i] - b.value()[i]);
    return make_result<T>(Tensor<T>({1}, acc / static_cast<T>(n)), {a, b}, [n](Node<T>& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        const T k = self.grad[0] / static_cast<T>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const T diff = pa.value[i] - pb.value[i];
            const T s = diff > T{0} ? k : (diff < T{0} ? -k : T{0});
            if (pa.requires_grad) pa.grad_buffer()[i] += s;
            if (pb.requires_grad) pb.grad_buffer()[i] -= s;
        }
    });
}

/// Mean binary cross-entropy of logits against a constant label.
template <typename T>
Var<T> bce_with_logits(const Var<T>& logits, T target) {
    const std::size_t n = logits.size();
    T acc{0};
    for (T x : logits.value().values())
        acc += std::max(x, T{0}) - x * target + std::log1p(std::exp(-std::abs(x)));
    return make_result<T>(Tensor<T>({1}, acc / static_cast<T>(n)), {logits}, [n, target](Node<T>& self) {
        auto& p = *self.parents[0];
        auto& g = p.grad_buffer();
        const T k = self.grad[0] / static_cast<T>(n);
        for (std::size_t i = 0; i < n; ++i) g[i] += k * (T{1} / (T{1} + std::exp(-p.value[i])) - target);
    });
}

/// Squared total variation: sum of squared horizontal and vertical
/// neighbour differences, divided by the batch size.
template <typename T>
Var<T> tv_loss(const Var<T>& x) {
    const auto& v = x.value();
    const int n = v.dim(0), c = v.dim(1), h = v.dim(2), w = v.dim(3);
    T acc{0};
    for (int b = 0; b < n; ++b)
        for (int ch = 0; ch < c; ++ch)
            for (int y = 0; y < h; ++y)
                for (int xx = 0; xx < w; ++xx) {
                    if (xx + 1 < w) {
                        const T d = v.at(b, ch, y, xx + 1) - v.at(b, ch, y, xx);
                        acc += d * d;
                    }
                    if (y + 1 < h) {
                        const T d = v.at(b, ch, y + 1, xx) - v.at(b, ch, y, xx);
                        acc += d * d;
                    }
                }
    return make_result<T>(Tensor<T>({1}, acc / static_cast<T>(n)), {x}, [n, c, h, w](Node<T>& self) {
        auto& p = *self.parents[0];
        auto& g = p.grad_buffer();
        const T k = T{2} * self.grad[0] / static_cast<T>(n);
        for (int b = 0; b < n; ++b)
            for (int ch = 0; ch < c; ++ch)
                for (int y = 0; y < h; ++y)
                    for (int xx = 0; xx < w; ++xx) {
                        if (xx + 1 < w) {
                            const T d = k * (p.value.at(b, ch, y, xx + 1) - p.value.at(b, ch, y, xx));
                            g.at(b, ch, y, xx + 1) += d;
                            g.at(b, ch, y, xx) -= d;
                        }
                        if (y + 1 < h) {
                            const T d = k * (p.value.at(b, ch, y + 1, xx) - p.value.at(b, ch, y, xx));
                            g.at(b, ch, y + 1, xx) += d;
                            g.at(b, ch, y, xx) -= d;
                        }
                    }
    });
}

/// KL(N(mu, exp(logvar)) || N(0, I)) in closed form, summed over latent
/// dimensions and averaged over the batch. Inputs are N x D.
template <typename T>
Var<T> kl_standard_normal(const Var<T>& mu, const Var<T>& logvar) {
    detail::require_same_shape(mu, logvar, "kl_standard_normal");
    const int n = mu.dim(0);
    T acc{0};
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const T m = mu.value()[i], lv = logvar.value()[i];
        acc += T(0.5) * (m * m + std::exp(lv) - T{1} - lv);
    }
    return make_result<T>(Tensor<T>({1}, acc / static_cast<T>(n)), {mu, logvar}, [n](Node<T>& self) {
        auto& pm = *self.parents[0];
        auto& pl = *self.parents[1];
        const T k = self.grad[0] / static_cast<T>(n);
        for (std::size_t i = 0; i < pm.value.size(); ++i) {
            if (pm.requires_grad) pm.grad_buffer()[i] += k * pm.value[i];
            if (pl.requires_grad) pl.grad_buffer()[i] += k * T(0.5) * (std::exp(pl.value[i]) - T{1});
        }
    });
}

// ---------------------------------------------------------------------------
// Convolution

enum class PadMode { Zero, Reflect, Replicate };

namespace detail {

inline int pad_index(int i, int n, PadMode mode) {
    if (i >= 0 && i < n) return i;
    switch (mode) {
        case PadMode::Zero: return -1;
        case PadMode::Reflect:
            if (n == 1) return 0;
            if (i < 0) i = -i;
            if (i >= n) i = 2 * n - 2 - i;
            return std::clamp(i, 0, n - 1);
        case PadMode::Replicate: return std::clamp(i, 0, n - 1);
    }
    return -1;
}

struct ConvGeometry {
    int cin = 0, h = 0, w = 0, k = 0, stride = 1, pad = 0, ho = 0, wo = 0;
    // Source pixel (y * w + x) for each (kernel tap, output pixel), -1 for zero padding.
    std::vector<int> source;

    ConvGeometry(int cin_, int h_, int w_, int k_, int stride_, int pad_, PadMode mode)
        : cin(cin_), h(h_), w(w_), k(k_), stride(stride_), pad(pad_) {
        ho = (h + 2 * pad - k) / stride + 1;
        wo = (w + 2 * pad - k) / stride + 1;
        if (ho < 1 || wo < 1) fail(ErrorKind::DimensionMismatch, "convolution input smaller than kernel");
        source.resize(static_cast<std::size_t>(k) * k * ho * wo);
        std::size_t idx = 0;
        for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx)
                for (int oy = 0; oy < ho; ++oy)
                    for (int ox = 0; ox < wo; ++ox) {
                        const int y = pad_index(oy * stride + ky - pad, h, mode);
                        const int x = pad_index(ox * stride + kx - pad, w, mode);
                        source[idx++] = (y < 0 || x < 0) ? -1 : y * w + x;
                    }
    }

    int taps() const { return k * k; }
    int out_pixels() const { return ho * wo; }
};

template <typename T>
void im2col(const T* x, const ConvGeometry& g, T* col) {
    const std::size_t plane = static_cast<std::size_t>(g.h) * g.w;
    const std::size_t op = g.out_pixels();
    for (int c = 0; c < g.cin; ++c) {
        const T* xc = x + c * plane;
        for (int t = 0; t < g.taps(); ++t) {
            const int* src = g.source.data() + t * op;
            T* dst = col + (static_cast<std::size_t>(c) * g.taps() + t) * op;
            for (std::size_t o = 0; o < op; ++o) dst[o] = src[o] < 0 ? T{0} : xc[src[o]];
        }
    }
}

template <typename T>
void col2im(const T* col, const ConvGeometry& g, T* dx) {
    const std::size_t plane = static_cast<std::size_t>(g.h) * g.w;
    const std::size_t op = g.out_pixels();
    for (int c = 0; c < g.cin; ++c) {
        T* dxc = dx + c * plane;
        for (int t = 0; t < g.taps(); ++t) {
            const int* src = g.source.data() + t * op;
            const T* s = col + (static_cast<std::size_t>(c) * g.taps() + t) * op;
            for (std::size_t o = 0; o < op; ++o)
                if (src[o] >= 0) dxc[src[o]] += s[o];
        }
    }
}

}  // namespace detail

/// 2-D convolution. x: N x Cin x H x W, weight: Cout x Cin x k x k,
/// bias: Cout (may be an invalid Var for no bias).
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride, int pad,
              PadMode mode = PadMode::Zero) {
    const auto& xv = x.value();
    const auto& wv = weight.value();
    if (xv.rank() != 4 || wv.rank() != 4 || wv.dim(1) != xv.dim(1) || wv.dim(2) != wv.dim(3))
        fail(ErrorKind::DimensionMismatch,
             "conv2d: input " + shape_string(xv.shape()) + " vs weight " + shape_string(wv.shape()));
    const int n = xv.dim(0), cout = wv.dim(0);
    auto geom = std::make_shared<detail::ConvGeometry>(xv.dim(1), xv.dim(2), xv.dim(3), wv.dim(2), stride, pad, mode);
    const int rows = geom->cin * geom->taps();
    const int op = geom->out_pixels();
    const std::size_t in_stride = static_cast<std::size_t>(geom->cin) * geom->h * geom->w;
    const std::size_t out_stride = static_cast<std::size_t>(cout) * op;

    Tensor<T> out({n, cout, geom->ho, geom->wo});
    Buffer<T> col(static_cast<std::size_t>(rows) * op);
    ConstMatrixMap<T> wmat(wv.data(), cout, rows);
    for (int b = 0; b < n; ++b) {
        detail::im2col(xv.data() + b * in_stride, *geom, col.data());
        MatrixMap<T> omat(out.data() + b * out_stride, cout, op);
        omat.noalias() = wmat * ConstMatrixMap<T>(col.data(), rows, op);
        if (bias.valid())
            for (int c = 0; c < cout; ++c) omat.row(c).array() += bias.value()[c];
    }

    std::vector<Var<T>> inputs{x, weight};
    if (bias.valid()) inputs.push_back(bias);
    return make_result<T>(std::move(out), inputs, [geom, n, cout, rows, op, in_stride, out_stride](Node<T>& self) {
        auto& px = *self.parents[0];
        auto& pw = *self.parents[1];
        Node<T>* pb = self.parents.size() > 2 ? self.parents[2].get() : nullptr;
        Buffer<T> col(static_cast<std::size_t>(rows) * op);
        ConstMatrixMap<T> wmat(pw.value.data(), cout, rows);
        for (int b = 0; b < n; ++b) {
            ConstMatrixMap<T> gout(self.grad.data() + b * out_stride, cout, op);
            if (pw.requires_grad) {
                detail::im2col(px.value.data() + b * in_stride, *geom, col.data());
                MatrixMap<T> gw(pw.grad_buffer().data(), cout, rows);
                gw.noalias() += gout * ConstMatrixMap<T>(col.data(), rows, op).transpose();
            }
            if (pb && pb->requires_grad) {
                auto& gb = pb->grad_buffer();
                for (int c = 0; c < cout; ++c) gb[c] += gout.row(c).sum();
            }
            if (px.requires_grad) {
                MatrixMap<T> gcol(col.data(), rows, op);
                gcol.noalias() = wmat.transpose() * gout;
                detail::col2im(col.data(), *geom, px.grad_buffer().data() + b * in_stride);
            }
        }
    });
}

/// Nearest-neighbour 2x upsampling.
template <typename T>
Var<T> upsample2x(const Var<T>& x) {
    const auto& v = x.value();
    const int n = v.dim(0), c = v.dim(1), h = v.dim(2), w = v.dim(3);
    Tensor<T> out({n, c, 2 * h, 2 * w});
    for (int b = 0; b < n; ++b)
        for (int ch = 0; ch < c; ++ch)
            for (int y = 0; y < 2 * h; ++y)
                for (int xx = 0; xx < 2 * w; ++xx) out.at(b, ch, y, xx) = v.at(b, ch, y / 2, xx / 2);
    return make_result<T>(std::move(out), {x}, [n, c, h, w](Node<T>& self) {
        auto& g = self.parents[0]->grad_buffer();
        for (int b = 0; b < n; ++b)
            for (int ch = 0; ch < c; ++ch)
                for (int y = 0; y < 2 * h; ++y)
                    for (int xx = 0; xx < 2 * w; ++xx) g.at(b, ch, y / 2, xx / 2) += self.grad.at(b, ch, y, xx);
    });
}

/// 2x2 average pooling (odd trailing rows/columns are dropped).
template <typename T>
Var<T> avg_pool2(const Var<T>& x) {
    const auto& v = x.value();
    const int n = v.dim(0), c = v.dim(1), h = v.dim(2) / 2, w = v.dim(3) / 2;
    if (h < 1 || w < 1) fail(ErrorKind::DimensionMismatch, "avg_pool2 input smaller than 2x2");
    Tensor<T> out({n, c, h, w});
    for (int b = 0; b < n; ++b)
        for (int ch = 0; ch < c; ++ch)
            for (int y = 0; y < h; ++y)
                for (int xx = 0; xx < w; ++xx)
                    out.at(b, ch, y, xx) = T(0.25) * (v.at(b, ch, 2 * y, 2 * xx) + v.at(b, ch, 2 * y, 2 * xx + 1) +
                                                      v.at(b, ch, 2 * y + 1, 2 * xx) + v.at(b, ch, 2 * y + 1, 2 * xx + 1));
    return make_result<T>(std::move(out), {x}, [n, c, h, w](Node<T>& self) {
        auto& g = self.parents[0]->grad_buffer();
        for (int b = 0; b < n; ++b)
            for (int ch = 0; ch < c; ++ch)
                for (int y = 0; y < h; ++y)
                    for (int xx = 0; xx < w; ++xx) {
                        const T d = T(0.25) * self.grad.at(b, ch, y, xx);
                        g.at(b, ch, 2 * y, 2 * xx) += d;
                        g.at(b, ch, 2 * y, 2 * xx + 1) += d;
                        g.at(b, ch, 2 * y + 1, 2 * xx) += d;
                        g.at(b, ch, 2 * y + 1, 2 * xx + 1) += d;
                    }
    });
}

// ---------------------------------------------------------------------------
// Normalization

/// Per-sample, per-channel normalization with affine gamma/beta (length C).
template <typename T>
Var<T> instance_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps = T(1e-5)) {
    const auto& v = x.value();
    const int n = v.dim(0), c = v.dim(1);
    const std::size_t hw = static_cast<std::size_t>(v.dim(2)) * v.dim(3);
    Tensor<T> out(v.shape());
    auto xhat = std::make_shared<Tensor<T>>(v.shape());
    auto inv_std = std::make_shared<std::vector<T>>(static_cast<std::size_t>(n) * c);
    for (int b = 0; b < n; ++b)
        for (int ch = 0; ch < c; ++ch) {
            const std::size_t base = (static_cast<std::size_t>(b) * c + ch) * hw;
            T m{0};
            for (std::size_t i = 0; i < hw; ++i) m += v[base + i];
            m /= static_cast<T>(hw);
            T var{0};
            for (std::size_t i = 0; i < hw; ++i) var += (v[base + i] - m) * (v[base + i] - m);
            var /= static_cast<T>(hw);
            const T is = T{1} / std::sqrt(var + eps);
            (*inv_std)[static_cast<std::size_t>(b) * c + ch] = is;
            const T gm = gamma.value()[ch], bt = beta.value()[ch];
            for (std::size_t i = 0; i < hw; ++i) {
                const T xh = (v[base + i] - m) * is;
                (*xhat)[base + i] = xh;
                out[base + i] = gm * xh + bt;
            }
        }
    return make_result<T>(std::move(out), {x, gamma, beta}, [n, c, hw, xhat, inv_std](Node<T>& self) {
        auto& px = *self.parents[0];
        auto& pg = *self.parents[1];
        auto& pb = *self.parents[2];
        for (int b = 0; b < n; ++b)
            for (int ch = 0; ch < c; ++ch) {
                const std::size_t base = (static_cast<std::size_t>(b) * c + ch) * hw;
                T sum_g{0}, sum_gx{0};
                for (std::size_t i = 0; i < hw; ++i) {
                    sum_g += self.grad[base + i];
                    sum_gx += self.grad[base + i] * (*xhat)[base + i];
                }
                if (pg.requires_grad) pg.grad_buffer()[ch] += sum_gx;
                if (pb.requires_grad) pb.grad_buffer()[ch] += sum_g;
                if (px.requires_grad) {
                    auto& gx = px.grad_buffer();
                    const T gm = pg.value[ch];
                    const T k = gm * (*inv_std)[static_cast<std::size_t>(b) * c + ch] / static_cast<T>(hw);
                    for (std::size_t i = 0; i < hw; ++i)
                        gx[base + i] +=
                            k * (static_cast<T>(hw) * self.grad[base + i] - sum_g - (*xhat)[base + i] * sum_gx);
                }
            }
    });
}

/// Batch normalization over (N, H, W) per channel. In training mode the
/// batch statistics are used and the running buffers are updated; otherwise
/// the running buffers are used.
template <typename T>
Var<T> batch_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, Tensor<T>& running_mean,
                  Tensor<T>& running_var, bool training, T momentum = T(0.1), T eps = T(1e-5)) {
    const auto& v = x.value();
    const int n = v.dim(0), c = v.dim(1);
    const std::size_t hw = v.rank() == 4 ? static_cast<std::size_t>(v.dim(2)) * v.dim(3) : 1;
    const std::size_t count = static_cast<std::size_t>(n) * hw;
    Tensor<T> out(v.shape());
    auto xhat = std::make_shared<Tensor<T>>(v.shape());
    auto inv_std = std::make_shared<std::vector<T>>(c);
    const auto at = [&](int b, int ch, std::size_t i) { return (static_cast<std::size_t>(b) * c + ch) * hw + i; };
    for (int ch = 0; ch < c; ++ch) {
        T m, var;
        if (training) {
            m = T{0};
            for (int b = 0; b < n; ++b)
                for (std::size_t i = 0; i < hw; ++i) m += v[at(b, ch, i)];
            m /= static_cast<T>(count);
            var = T{0};
            for (int b = 0; b < n; ++b)
                for (std::size_t i = 0; i < hw; ++i) var += (v[at(b, ch, i)] - m) * (v[at(b, ch, i)] - m);
            var /= static_cast<T>(count);
            const T unbiased = count > 1 ? var * static_cast<T>(count) / static_cast<T>(count - 1) : var;
            running_mean[ch] = (T{1} - momentum) * running_mean[ch] + momentum * m;
            running_var[ch] = (T{1} - momentum) * running_var[ch] + momentum * unbiased;
        } else {
            m = running_mean[ch];
            var = running_var[ch];
        }
        const T is = T{1} / std::sqrt(var + eps);
        (*inv_std)[ch] = is;
        for (int b = 0; b < n; ++b)
            for (std::size_t i = 0; i < hw; ++i) {
                const T xh = (v[at(b, ch, i)] - m) * is;
                (*xhat)[at(b, ch, i)] = xh;
                out[at(b, ch, i)] = gamma.value()[ch] * xh + beta.value()[ch];
            }
    }
    return make_result<T>(std::move(out), {x, gamma, beta}, [n, c, hw, count, training, xhat, inv_std](Node<T>& self) {
        auto& px = *self.parents[0];
        auto& pg = *self.parents[1];
        auto& pb = *self.parents[2];
        const auto at = [&](int b, int ch, std::size_t i) { return (static_cast<std::size_t>(b) * c + ch) * hw + i; };
        for (int ch = 0; ch < c; ++ch) {
            T sum_g{0}, sum_gx{0};
            for (int b = 0; b < n; ++b)
                for (std::size_t i = 0; i < hw; ++i) {
                    sum_g += self.grad[at(b, ch, i)];
                    sum_gx += self.grad[at(b, ch, i)] * (*xhat)[at(b, ch, i)];
                }
            if (pg.requires_grad) pg.grad_buffer()[ch] += sum_gx;
            if (pb.requires_grad) pb.grad_buffer()[ch] += sum_g;
            if (!px.requires_grad) continue;
            auto& gx = px.grad_buffer();
            const T gm = pg.value[ch], is = (*inv_std)[ch];
            for (int b = 0; b < n; ++b)
                for (std::size_t i = 0; i < hw; ++i) {
                    const std::size_t j = at(b, ch, i);
                    if (training)
                        gx[j] += gm * is / static_cast<T>(count) *
                                 (static_cast<T>(count) * self.grad[j] - sum_g - (*xhat)[j] * sum_gx);
                    else
                        gx[j] += gm * is * self.grad[j];
                }
        }
    });
}

// ---------------------------------------------------------------------------
// Dense layers and texture statistics

/// x: N x F, weight: O x F, bias: O.
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
    const int n = x.dim(0), f = x.dim(1), o = weight.dim(0);
    if (weight.dim(1) != f) fail(ErrorKind::DimensionMismatch, "linear: feature size mismatch");
    Tensor<T> out({n, o});
    MatrixMap<T> omat(out.data(), n, o);
    omat.noalias() = ConstMatrixMap<T>(x.value().data(), n, f) * ConstMatrixMap<T>(weight.value().data(), o, f).transpose();
    for (int b = 0; b < n; ++b)
        for (int j = 0; j < o; ++j) omat(b, j) += bias.value()[j];
    return make_result<T>(std::move(out), {x, weight, bias}, [n, f, o](Node<T>& self) {
        auto& px = *self.parents[0];
        auto& pw = *self.parents[1];
        auto& pb = *self.parents[2];
        ConstMatrixMap<T> g(self.grad.data(), n, o);
        if (px.requires_grad)
            MatrixMap<T>(px.grad_buffer().data(), n, f).noalias() += g * ConstMatrixMap<T>(pw.value.data(), o, f);
        if (pw.requires_grad)
            MatrixMap<T>(pw.grad_buffer().data(), o, f).noalias() +=
                g.transpose() * ConstMatrixMap<T>(px.value.data(), n, f);
        if (pb.requires_grad) {
            auto& gb = pb.grad_buffer();
            for (int j = 0; j < o; ++j) gb[j] += g.col(j).sum();
        }
    });
}

/// Gram matrix per sample: G = F F^T / (C H W) with F the C x (H W)
/// unrolled feature map. Returns N x C x C.
template <typename T>
Var<T> gram(const Var<T>& x) {
    const auto& v = x.value();
    const int n = v.dim(0), c = v.dim(1);
    const int hw = v.dim(2) * v.dim(3);
    const T norm = T{1} / static_cast<T>(static_cast<std::size_t>(c) * hw);
    Tensor<T> out({n, c, c});
    for (int b = 0; b < n; ++b) {
        ConstMatrixMap<T> f(v.data() + static_cast<std::size_t>(b) * c * hw, c, hw);
        MatrixMap<T> g(out.data() + static_cast<std::size_t>(b) * c * c, c, c);
        g.noalias() = (f * f.transpose()) * norm;
    }
    return make_result<T>(std::move(out), {x}, [n, c, hw, norm](Node<T>& self) {
        auto& px = *self.parents[0];
        for (int b = 0; b < n; ++b) {
            ConstMatrixMap<T> f(px.value.data() + static_cast<std::size_t>(b) * c * hw, c, hw);
            ConstMatrixMap<T> dg(self.grad.data() + static_cast<std::size_t>(b) * c * c, c, c);
            MatrixMap<T> df(px.grad_buffer().data() + static_cast<std::size_t>(b) * c * hw, c, hw);
            df.noalias() += ((dg + dg.transpose()) * f) * norm;
        }
    });
}

/// Squared Frobenius distance between each sample's matrix in `batch`
/// (N x C x C) and a fixed target (C x C), averaged over the batch.
template <typename T>
Var<T> frobenius_sq_to(const Var<T>& batch, const Tensor<T>& target) {
    const int n = batch.dim(0);
    const std::size_t cc = target.size();
    if (batch.size() != cc * static_cast<std::size_t>(n))
        fail(ErrorKind::DimensionMismatch, "frobenius_sq_to: target size mismatch");
    T acc{0};
    for (int b = 0; b < n; ++b)
        for (std::size_t i = 0; i < cc; ++i) {
            const T d = batch.value()[b * cc + i] - target[i];
            acc += d * d;
        }
    return make_result<T>(Tensor<T>({1}, acc / static_cast<T>(n)), {batch}, [n, cc, target](Node<T>& self) {
        auto& p = *self.parents[0];
        auto& g = p.grad_buffer();
        const T k = T{2} * self.grad[0] / static_cast<T>(n);
        for (int b = 0; b < n; ++b)
            for (std::size_t i = 0; i < cc; ++i) g[b * cc + i] += k * (p.value[b * cc + i] - target[i]);
    });
}

}  // namespace loomgen::nn
