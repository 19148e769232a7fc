#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "loomgen/nn/ops.hpp"

namespace loomgen::nn {

/// Named, ordered collection of a network's tensors. Trainable entries are
/// optimized; the rest are state buffers (e.g. batch-norm running stats).
template <typename T>
class ParameterSet {
public:
    struct Entry {
        std::string name;
        Var<T> var;
        bool trainable;
    };

    Var<T> add(const std::string& name, Tensor<T> init, bool trainable = true) {
        for (const auto& e : entries_)
            if (e.name == name) fail(ErrorKind::InvalidArgument, "duplicate parameter " + name);
        Var<T> v = trainable ? Var<T>::parameter(std::move(init)) : Var<T>::constant(std::move(init));
        entries_.push_back({name, v, trainable});
        return v;
    }

    const std::vector<Entry>& entries() const { return entries_; }

    std::vector<Var<T>> trainable() const {
        std::vector<Var<T>> out;
        for (const auto& e : entries_)
            if (e.trainable) out.push_back(e.var);
        return out;
    }

    void zero_grad() {
        for (auto& e : entries_) e.var.zero_grad();
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& e : entries_)
            if (e.trainable) n += e.var.size();
        return n;
    }

    std::map<std::string, Tensor<T>> snapshot() const {
        std::map<std::string, Tensor<T>> out;
        for (const auto& e : entries_) out.emplace(e.name, e.var.value());
        return out;
    }

    /// Overwrites every entry from `tensors`; names and shapes must match exactly.
    void restore(const std::map<std::string, Tensor<T>>& tensors, const std::string& prefix = "") {
        for (auto& e : entries_) {
            auto it = tensors.find(prefix + e.name);
            if (it == tensors.end()) fail(ErrorKind::ModelLoadError, "missing tensor " + prefix + e.name);
            if (it->second.shape() != e.var.shape())
                fail(ErrorKind::ModelLoadError, "shape mismatch for " + prefix + e.name + ": stored " +
                                                    shape_string(it->second.shape()) + ", expected " +
                                                    shape_string(e.var.shape()));
            auto v = e.var;
            v.mutable_value() = it->second;
        }
    }

private:
    std::vector<Entry> entries_;
};

// ---------------------------------------------------------------------------
// Tensor file format: "LGTN", u32 version, u32 count, then per tensor
// u32 name length, name bytes, u8 element size, u32 rank, i32 dims, raw data.

namespace detail {
template <typename V>
void put(std::ostream& os, V v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(V));
}
template <typename V>
V get(std::istream& is) {
    V v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(V));
    if (!is) fail(ErrorKind::ModelLoadError, "truncated tensor file");
    return v;
}
}  // namespace detail

template <typename T>
std::string serialize_tensors(const std::map<std::string, Tensor<T>>& tensors) {
    std::ostringstream os(std::ios::binary);
    os.write("LGTN", 4);
    detail::put<std::uint32_t>(os, 1);
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        detail::put<std::uint8_t>(os, sizeof(T));
        detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(t.rank()));
        for (int d : t.shape()) detail::put<std::int32_t>(os, d);
        os.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(T)));
    }
    return os.str();
}

template <typename T>
std::map<std::string, Tensor<T>> deserialize_tensors(const std::string& bytes) {
    std::istringstream is(bytes, std::ios::binary);
    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "LGTN", 4) != 0) fail(ErrorKind::ModelLoadError, "not a tensor file");
    if (detail::get<std::uint32_t>(is) != 1) fail(ErrorKind::ModelLoadError, "unsupported tensor file version");
    const auto count = detail::get<std::uint32_t>(is);
    std::map<std::string, Tensor<T>> out;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto len = detail::get<std::uint32_t>(is);
        if (len > 4096) fail(ErrorKind::ModelLoadError, "corrupt tensor name");
        std::string name(len, '\0');
        is.read(name.data(), len);
        if (detail::get<std::uint8_t>(is) != sizeof(T))
            fail(ErrorKind::ModelLoadError, "element type mismatch for " + name);
        const auto rank = detail::get<std::uint32_t>(is);
        if (rank > 8) fail(ErrorKind::ModelLoadError, "corrupt tensor rank");
        Shape shape(rank);
        for (auto& d : shape) {
            d = detail::get<std::int32_t>(is);
            if (d < 0) fail(ErrorKind::ModelLoadError, "negative tensor dimension");
        }
        Tensor<T> t(shape);
        is.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(T)));
        if (!is) fail(ErrorKind::ModelLoadError, "truncated tensor data for " + name);
        out.emplace(std::move(name), std::move(t));
    }
    return out;
}

template <typename T>
void save_tensors(const std::filesystem::path& path, const std::map<std::string, Tensor<T>>& tensors) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
    const auto bytes = serialize_tensors(tensors);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

template <typename T>
std::map<std::string, Tensor<T>> load_tensors(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::ModelLoadError, "cannot open " + path.string());
    return deserialize_tensors<T>({std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()});
}

// ---------------------------------------------------------------------------
// Layers

template <typename T>
struct Conv2d {
    Var<T> weight, bias;
    int stride = 1, pad = 0;
    PadMode mode = PadMode::Zero;

    Conv2d() = default;
    /// `init_std` <= 0 selects He-normal scaling.
    Conv2d(ParameterSet<T>& ps, const std::string& name, int cin, int cout, int k, int stride_, int pad_,
           PadMode mode_, Rng& rng, double init_std = 0.0, bool with_bias = true)
        : stride(stride_), pad(pad_), mode(mode_) {
        const double sd = init_std > 0 ? init_std : std::sqrt(2.0 / (cin * k * k));
        weight = ps.add(name + ".weight", randn<T>({cout, cin, k, k}, rng, sd));
        if (with_bias) bias = ps.add(name + ".bias", Tensor<T>({cout}));
    }

    Var<T> operator()(const Var<T>& x) const { return conv2d(x, weight, bias, stride, pad, mode); }
};

template <typename T>
struct InstanceNorm {
    Var<T> gamma, beta;

    InstanceNorm() = default;
    InstanceNorm(ParameterSet<T>& ps, const std::string& name, int channels) {
        gamma = ps.add(name + ".gamma", Tensor<T>({channels}, T{1}));
        beta = ps.add(name + ".beta", Tensor<T>({channels}));
    }

    Var<T> operator()(const Var<T>& x) const { return instance_norm(x, gamma, beta); }
};

template <typename T>
struct BatchNorm {
    Var<T> gamma, beta, running_mean, running_var;

    BatchNorm() = default;
    BatchNorm(ParameterSet<T>& ps, const std::string& name, int channels) {
        gamma = ps.add(name + ".gamma", Tensor<T>({channels}, T{1}));
        beta = ps.add(name + ".beta", Tensor<T>({channels}));
        running_mean = ps.add(name + ".running_mean", Tensor<T>({channels}), false);
        running_var = ps.add(name + ".running_var", Tensor<T>({channels}, T{1}), false);
    }

    Var<T> operator()(const Var<T>& x, bool training) const {
        auto rm = running_mean;
        auto rv = running_var;
        return batch_norm(x, gamma, beta, rm.mutable_value(), rv.mutable_value(), training);
    }
};

template <typename T>
struct Linear {
    Var<T> weight, bias;

    Linear() = default;
    Linear(ParameterSet<T>& ps, const std::string& name, int in, int out, Rng& rng, double init_std = 0.0) {
        const double sd = init_std > 0 ? init_std : std::sqrt(1.0 / in);
        weight = ps.add(name + ".weight", randn<T>({out, in}, rng, sd));
        bias = ps.add(name + ".bias", Tensor<T>({out}));
    }

    Var<T> operator()(const Var<T>& x) const { return linear(x, weight, bias); }
};

/// conv -> instance norm -> relu -> conv -> instance norm, plus the input.
template <typename T>
struct ResidualBlock {
    Conv2d<T> conv1, conv2;
    InstanceNorm<T> norm1, norm2;

    ResidualBlock() = default;
    ResidualBlock(ParameterSet<T>& ps, const std::string& name, int channels, Rng& rng, double init_std = 0.0)
        : conv1(ps, name + ".conv1", channels, channels, 3, 1, 1, PadMode::Reflect, rng, init_std),
          conv2(ps, name + ".conv2", channels, channels, 3, 1, 1, PadMode::Reflect, rng, init_std),
          norm1(ps, name + ".norm1", channels),
          norm2(ps, name + ".norm2", channels) {}

    Var<T> operator()(const Var<T>& x) const { return add(x, norm2(conv2(relu(norm1(conv1(x)))))); }
};

// ---------------------------------------------------------------------------
// Optimizer

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <typename T>
class Adam {
public:
    Adam(std::vector<Var<T>> params, AdamConfig config) : params_(std::move(params)), config_(config) {
        for (const auto& p : params_) {
            m_.emplace_back(p.shape());
            v_.emplace_back(p.shape());
        }
    }

    /// Applies one update from the accumulated gradients (missing gradients count as zero).
    void step() {
        ++t_;
        const T b1 = static_cast<T>(config_.beta1), b2 = static_cast<T>(config_.beta2);
        const T c1 = T{1} - static_cast<T>(std::pow(config_.beta1, static_cast<double>(t_)));
        const T c2 = T{1} - static_cast<T>(std::pow(config_.beta2, static_cast<double>(t_)));
        const T lr = static_cast<T>(config_.learning_rate), eps = static_cast<T>(config_.eps);
        for (std::size_t i = 0; i < params_.size(); ++i) {
            auto& p = params_[i];
            const auto& g = p.grad();
            auto& w = p.mutable_value();
            for (std::size_t j = 0; j < w.size(); ++j) {
                const T gj = g.empty() ? T{0} : g[j];
                m_[i][j] = b1 * m_[i][j] + (T{1} - b1) * gj;
                v_[i][j] = b2 * v_[i][j] + (T{1} - b2) * gj * gj;
                const T mhat = m_[i][j] / c1;
                const T vhat = v_[i][j] / c2;
                w[j] -= lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
    }

    void zero_grad() {
        for (auto& p : params_) p.zero_grad();
    }

    std::int64_t steps_taken() const { return t_; }

    void save_state(std::map<std::string, Tensor<T>>& out, const std::string& prefix) const {
        out.emplace(prefix + "t", Tensor<T>({1}, static_cast<T>(t_)));
        for (std::size_t i = 0; i < params_.size(); ++i) {
            out.emplace(prefix + "m." + std::to_string(i), m_[i]);
            out.emplace(prefix + "v." + std::to_string(i), v_[i]);
        }
    }

    void load_state(const std::map<std::string, Tensor<T>>& in, const std::string& prefix) {
        const auto find = [&](const std::string& key) -> const Tensor<T>& {
            auto it = in.find(prefix + key);
            if (it == in.end()) fail(ErrorKind::ModelLoadError, "missing optimizer tensor " + prefix + key);
            return it->second;
        };
        t_ = static_cast<std::int64_t>(find("t")[0]);
        for (std::size_t i = 0; i < params_.size(); ++i) {
            const auto& m = find("m." + std::to_string(i));
            const auto& v = find("v." + std::to_string(i));
            if (m.shape() != m_[i].shape() || v.shape() != v_[i].shape())
                fail(ErrorKind::ModelLoadError, "optimizer state shape mismatch");
            m_[i] = m;
            v_[i] = v;
        }
    }

private:
    std::vector<Var<T>> params_;
    AdamConfig config_;
    std::vector<Tensor<T>> m_, v_;
    std::int64_t t_ = 0;
};

}  // namespace loomgen::nn
