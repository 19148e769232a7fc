#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <new>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

#include "loomgen/error.hpp"
#include "loomgen/image.hpp"
#include "loomgen/rng.hpp"

namespace loomgen::nn {

using Shape = std::vector<int>;

/// 64-byte aligned storage. Eigen's vectorized kernels peel to alignment, so
/// unaligned buffers would make summation order (and results) depend on
/// where malloc happened to place them.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t kAlignment{64};

    AlignedAllocator() = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

    template <typename U>
    bool operator==(const AlignedAllocator<U>&) const noexcept {
        return true;
    }
};

template <typename T>
using Buffer = std::vector<T, AlignedAllocator<T>>;

inline std::size_t shape_size(const Shape& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1},
                           [](std::size_t a, int d) { return a * static_cast<std::size_t>(d); });
}

inline std::string shape_string(const Shape& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
    return out + "]";
}

/// Dense row-major tensor. Image batches use NCHW.
template <typename T>
class Tensor {
public:
    using value_type = T;

    Tensor() = default;
    explicit Tensor(Shape shape, T fill = T{0}) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}
    Tensor(Shape shape, const std::vector<T>& data) : Tensor(std::move(shape), Buffer<T>(data.begin(), data.end())) {}
    Tensor(Shape shape, Buffer<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != shape_size(shape_)) fail(ErrorKind::InvalidArgument, "tensor data/shape size mismatch");
    }

    const Shape& shape() const noexcept { return shape_; }
    int dim(std::size_t i) const { return shape_.at(i); }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }
    Buffer<T>& values() noexcept { return data_; }
    const Buffer<T>& values() const noexcept { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    T operator[](std::size_t i) const { return data_[i]; }

    T& at(int n, int c, int h, int w) { return data_[offset(n, c, h, w)]; }
    T at(int n, int c, int h, int w) const { return data_[offset(n, c, h, w)]; }

    Tensor reshaped(Shape s) const {
        if (shape_size(s) != data_.size()) fail(ErrorKind::InvalidArgument, "reshape changes element count");
        return Tensor(std::move(s), data_);
    }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    template <typename U>
    Tensor<U> cast() const {
        return Tensor<U>(shape_, Buffer<U>(data_.begin(), data_.end()));
    }

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::size_t offset(int n, int c, int h, int w) const {
        return ((static_cast<std::size_t>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w;
    }

    Shape shape_;
    Buffer<T> data_;
};

template <typename T>
Tensor<T> randn(Shape shape, Rng& rng, double stddev) {
    Tensor<T> t(std::move(shape));
    for (auto& v : t.values()) v = static_cast<T>(rng.normal() * stddev);
    return t;
}

template <typename T>
Tensor<T> rand_uniform(Shape shape, Rng& rng, double lo, double hi) {
    Tensor<T> t(std::move(shape));
    for (auto& v : t.values()) v = static_cast<T>(rng.uniform(lo, hi));
    return t;
}

/// Packs images (all the same shape) into an N x 3 x H x W tensor.
template <typename T>
Tensor<T> to_tensor(const std::vector<RasterImage>& images) {
    if (images.empty()) fail(ErrorKind::InvalidArgument, "empty image batch");
    const int h = images[0].height(), w = images[0].width();
    Tensor<T> t({static_cast<int>(images.size()), 3, h, w});
    for (std::size_t n = 0; n < images.size(); ++n) {
        if (images[n].height() != h || images[n].width() != w)
            fail(ErrorKind::DimensionMismatch, "batch images differ in shape");
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) t.at(static_cast<int>(n), c, y, x) = static_cast<T>(images[n].at(y, x, c));
    }
    return t;
}

template <typename T>
Tensor<T> to_tensor(const RasterImage& image) {
    return to_tensor<T>(std::vector<RasterImage>{image});
}

template <typename T>
RasterImage to_image(const Tensor<T>& t, int n = 0) {
    if (t.rank() != 4 || t.dim(1) != 3) fail(ErrorKind::InvalidArgument, "expected N x 3 x H x W tensor");
    RasterImage img(t.dim(2), t.dim(3));
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < t.dim(2); ++y)
            for (int x = 0; x < t.dim(3); ++x)
                img.at(y, x, c) = std::clamp(static_cast<float>(t.at(n, c, y, x)), 0.0f, 1.0f);
    return img;
}

// ---------------------------------------------------------------------------
// Reverse-mode automatic differentiation.

namespace detail {
inline bool& grad_enabled_flag() {
    thread_local bool enabled = true;
    return enabled;
}
}  // namespace detail

inline bool grad_enabled() { return detail::grad_enabled_flag(); }

/// Disables graph recording for the current thread while alive.
class NoGradGuard {
public:
    NoGradGuard() : previous_(detail::grad_enabled_flag()) { detail::grad_enabled_flag() = false; }
    ~NoGradGuard() { detail::grad_enabled_flag() = previous_; }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

template <typename T>
struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    // Reads this node's grad and accumulates into parents' grads.
    std::function<void(Node&)> backward;

    Tensor<T>& grad_buffer() {
        if (grad.empty()) grad = Tensor<T>(value.shape());
        return grad;
    }
};

template <typename T>
class Var {
public:
    Var() = default;
    explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

    static Var constant(Tensor<T> value) {
        auto n = std::make_shared<Node<T>>();
        n->value = std::move(value);
        return Var(std::move(n));
    }

    static Var parameter(Tensor<T> value) {
        auto n = std::make_shared<Node<T>>();
        n->value = std::move(value);
        n->requires_grad = true;
        return Var(std::move(n));
    }

    const Tensor<T>& value() const { return node_->value; }
    Tensor<T>& mutable_value() { return node_->value; }
    const Tensor<T>& grad() const { return node_->grad; }
    Tensor<T>& grad_buffer() { return node_->grad_buffer(); }
    void zero_grad() { node_->grad = Tensor<T>(); }
    bool requires_grad() const { return node_ && node_->requires_grad; }
    const Shape& shape() const { return node_->value.shape(); }
    int dim(std::size_t i) const { return node_->value.dim(i); }
    std::size_t size() const { return node_->value.size(); }
    T item() const { return node_->value[0]; }
    bool valid() const noexcept { return static_cast<bool>(node_); }
    const std::shared_ptr<Node<T>>& node() const { return node_; }

private:
    std::shared_ptr<Node<T>> node_;
};

/// Creates the result node of an op. The backward closure is attached only
/// when recording is enabled and at least one input requires a gradient.
template <typename T>
Var<T> make_result(Tensor<T> value, const std::vector<Var<T>>& inputs, std::function<void(Node<T>&)> backward) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    if (grad_enabled()) {
        for (const auto& in : inputs)
            if (in.requires_grad()) n->requires_grad = true;
        if (n->requires_grad) {
            for (const auto& in : inputs) n->parents.push_back(in.node());
            n->backward = std::move(backward);
        }
    }
    return Var<T>(std::move(n));
}

template <typename T>
bool needs_grad(const Var<T>& v) {
    return v.requires_grad();
}

/// Back-propagates from a scalar root. Parameter gradients accumulate.
template <typename T>
void backward(const Var<T>& root) {
    if (root.size() != 1) fail(ErrorKind::InvalidArgument, "backward requires a scalar root");
    if (!root.requires_grad()) return;
    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> seen;
    std::vector<std::pair<Node<T>*, std::size_t>> stack{{root.node().get(), 0}};
    seen.insert(root.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node<T>* p = node->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    root.node()->grad_buffer()[0] += T{1};
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node<T>* node = *it;
        if (node->backward && !node->grad.empty()) node->backward(*node);
    }
    // Intermediate gradients are no longer needed; leaves keep theirs.
    for (Node<T>* node : order)
        if (node->backward) node->grad = Tensor<T>();
}

template <typename T>
Var<T> detach(const Var<T>& v) {
    return Var<T>::constant(v.value());
}

}  // namespace loomgen::nn
