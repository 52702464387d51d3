#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "revsent/common.hpp"

namespace revsent {

class Tensor;
using NamedParams = std::vector<std::pair<std::string, Tensor>>;

using Shape = std::vector<int>;

inline std::size_t numel(const Shape& s) {
    std::size_t n = 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ']';
    return os.str();
}

struct TensorImpl;
using TensorPtr = std::shared_ptr<TensorImpl>;

struct TensorImpl {
    Shape shape;
    std::vector<real> data;
    std::vector<real> grad;  // sized lazily on first backward touch
    bool requires_grad = false;
    bool needs_grad = false;  // requires_grad or has an ancestor that does
    std::vector<TensorPtr> parents;
    std::function<void(TensorImpl&)> backward_fn;

    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), real(0));
    }
};

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(TensorPtr p) : p_(std::move(p)) {}

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        auto p = std::make_shared<TensorImpl>();
        p->shape = std::move(shape);
        p->data.assign(numel(p->shape), real(0));
        p->requires_grad = p->needs_grad = requires_grad;
        return Tensor(p);
    }

    static Tensor full(Shape shape, real value, bool requires_grad = false) {
        Tensor t = zeros(std::move(shape), requires_grad);
        std::fill(t.data().begin(), t.data().end(), value);
        return t;
    }

    static Tensor from(std::vector<real> values, Shape shape, bool requires_grad = false) {
        auto p = std::make_shared<TensorImpl>();
        if (values.size() != numel(shape))
            throw ShapeError("tensor data size " + std::to_string(values.size()) +
                             " does not match shape " + shape_str(shape));
        p->shape = std::move(shape);
        p->data = std::move(values);
        p->requires_grad = p->needs_grad = requires_grad;
        return Tensor(p);
    }

    static Tensor scalar(real v, bool requires_grad = false) {
        return from({v}, {1}, requires_grad);
    }

    // Uniform init in [-bound, bound], the standard +-1/sqrt(fan_in) scheme.
    static Tensor uniform(Shape shape, real bound, Rng& rng, bool requires_grad = true) {
        Tensor t = zeros(std::move(shape), requires_grad);
        std::uniform_real_distribution<double> dist(-double(bound), double(bound));
        for (auto& v : t.data()) v = real(dist(rng));
        return t;
    }

    const Shape& shape() const { return p_->shape; }
    std::vector<real>& data() { return p_->data; }
    const std::vector<real>& data() const { return p_->data; }
    std::vector<real>& grad() { p_->ensure_grad(); return p_->grad; }
    bool requires_grad() const { return p_->requires_grad; }
    bool defined() const { return p_ != nullptr; }
    std::size_t size() const { return p_->data.size(); }
    int dim(int i) const { return p_->shape[static_cast<std::size_t>(i)]; }
    int ndim() const { return static_cast<int>(p_->shape.size()); }
    real item() const {
        if (p_->data.size() != 1) throw ShapeError("item() on non-scalar tensor " + shape_str(p_->shape));
        return p_->data[0];
    }
    TensorPtr impl() const { return p_; }

    void zero_grad() { p_->grad.clear(); }

    // Value copy detached from the graph.
    Tensor detached() const {
        auto p = std::make_shared<TensorImpl>();
        p->shape = p_->shape;
        p->data = p_->data;
        return Tensor(p);
    }

private:
    TensorPtr p_;
};

namespace detail {

inline Tensor make_node(Shape shape, std::vector<TensorPtr> parents,
                        std::function<void(TensorImpl&)> backward_fn) {
    bool needs = false;
    for (const auto& p : parents)
        if (p->needs_grad) needs = true;
    Tensor out = Tensor::zeros(std::move(shape));
    if (needs) {
        out.impl()->needs_grad = true;
        out.impl()->parents = std::move(parents);
        out.impl()->backward_fn = std::move(backward_fn);
    }
    return out;
}

// True when `small` matches the trailing dims of `big` (bias-style broadcast).
inline bool suffix_broadcastable(const Shape& big, const Shape& small) {
    if (small.size() > big.size()) return false;
    for (std::size_t i = 0; i < small.size(); ++i)
        if (small[small.size() - 1 - i] != big[big.size() - 1 - i]) return false;
    return true;
}

}  // namespace detail

// ---- elementwise and broadcast arithmetic -------------------------------

inline Tensor add(const Tensor& a, const Tensor& b) {
    if (a.shape() == b.shape()) {
        Tensor out = detail::make_node(a.shape(), {a.impl(), b.impl()}, [](TensorImpl& self) {
            for (int side = 0; side < 2; ++side) {
                auto& p = *self.parents[static_cast<std::size_t>(side)];
                if (!p.needs_grad) continue;
                p.ensure_grad();
                for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i];
            }
        });
        for (std::size_t i = 0; i < out.size(); ++i)
            out.data()[i] = a.data()[i] + b.data()[i];
        return out;
    }
    if (!detail::suffix_broadcastable(a.shape(), b.shape()))
        throw ShapeError("add: incompatible shapes " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    std::size_t bn = b.size();
    Tensor out = detail::make_node(a.shape(), {a.impl(), b.impl()}, [bn](TensorImpl& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.needs_grad) {
            pa.ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
        }
        if (pb.needs_grad) {
            pb.ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) pb.grad[i % bn] += self.grad[i];
        }
    });
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data()[i] = a.data()[i] + b.data()[i % bn];
    return out;
}

inline Tensor scale(const Tensor& a, real c) {
    Tensor out = detail::make_node(a.shape(), {a.impl()}, [c](TensorImpl& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += c * self.grad[i];
    });
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = c * a.data()[i];
    return out;
}

inline Tensor sub(const Tensor& a, const Tensor& b) { return add(a, scale(b, real(-1))); }

inline Tensor mul(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw ShapeError("mul: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    Tensor out = detail::make_node(a.shape(), {a.impl(), b.impl()}, [](TensorImpl& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.needs_grad) {
            pa.ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += pb.data[i] * self.grad[i];
        }
        if (pb.needs_grad) {
            pb.ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] += pa.data[i] * self.grad[i];
        }
    });
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
    return out;
}

// ---- unary ops -----------------------------------------------------------

namespace detail {

inline Tensor unary(const Tensor& a, const std::function<real(real)>& f,
                    const std::function<real(real, real)>& dfdx_from_x_y) {
    Tensor out = detail::make_node(a.shape(), {a.impl()}, [dfdx_from_x_y](TensorImpl& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
            p.grad[i] += dfdx_from_x_y(p.data[i], self.data[i]) * self.grad[i];
    });
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = f(a.data()[i]);
    return out;
}

}  // namespace detail

inline Tensor relu(const Tensor& a) {
    return detail::unary(a, [](real x) { return x > 0 ? x : real(0); },
                         [](real x, real) { return x > 0 ? real(1) : real(0); });
}

inline Tensor tanh_op(const Tensor& a) {
    return detail::unary(a, [](real x) { return std::tanh(x); },
                         [](real, real y) { return real(1) - y * y; });
}

inline Tensor sigmoid(const Tensor& a) {
    return detail::unary(a, [](real x) { return real(1) / (real(1) + std::exp(-x)); },
                         [](real, real y) { return y * (real(1) - y); });
}

inline Tensor log_op(const Tensor& a) {
    return detail::unary(a, [](real x) { return std::log(x); },
                         [](real x, real) { return real(1) / x; });
}

inline Tensor exp_op(const Tensor& a) {
    return detail::unary(a, [](real x) { return std::exp(x); },
                         [](real, real y) { return y; });
}

// ---- matmul --------------------------------------------------------------

inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0))
        throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor out = detail::make_node({m, n}, {a.impl(), b.impl()}, [m, k, n](TensorImpl& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.needs_grad) {
            pa.ensure_grad();  // dA = dC * B^T
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j) {
                    real g = self.grad[std::size_t(i) * n + j];
                    if (g == real(0)) continue;
                    for (int l = 0; l < k; ++l)
                        pa.grad[std::size_t(i) * k + l] += g * pb.data[std::size_t(l) * n + j];
                }
        }
        if (pb.needs_grad) {
            pb.ensure_grad();  // dB = A^T * dC
            for (int i = 0; i < m; ++i)
                for (int l = 0; l < k; ++l) {
                    real av = pa.data[std::size_t(i) * k + l];
                    if (av == real(0)) continue;
                    for (int j = 0; j < n; ++j)
                        pb.grad[std::size_t(l) * n + j] += av * self.grad[std::size_t(i) * n + j];
                }
        }
    });
    for (int i = 0; i < m; ++i)
        for (int l = 0; l < k; ++l) {
            real av = a.data()[std::size_t(i) * k + l];
            if (av == real(0)) continue;
            for (int j = 0; j < n; ++j)
                out.data()[std::size_t(i) * n + j] += av * b.data()[std::size_t(l) * n + j];
        }
    return out;
}

// ---- shape ops -----------------------------------------------------------

inline Tensor reshape(const Tensor& a, Shape shape) {
    if (numel(shape) != a.size())
        throw ShapeError("reshape: cannot view " + shape_str(a.shape()) + " as " + shape_str(shape));
    Tensor out = detail::make_node(std::move(shape), {a.impl()}, [](TensorImpl& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i];
    });
    out.data() = a.data();
    return out;
}

// Slice of a 2D tensor along axis 0 (rows) or 1 (cols), [begin, end).
inline Tensor slice(const Tensor& a, int axis, int begin, int end) {
    if (a.ndim() != 2) throw ShapeError("slice: expects 2D tensor, got " + shape_str(a.shape()));
    const int rows = a.dim(0), cols = a.dim(1);
    const int extent = axis == 0 ? rows : cols;
    if (axis < 0 || axis > 1 || begin < 0 || end > extent || begin >= end)
        throw ShapeError("slice: bad range [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") on axis " + std::to_string(axis) + " of " + shape_str(a.shape()));
    Shape oshape = axis == 0 ? Shape{end - begin, cols} : Shape{rows, end - begin};
    Tensor out = detail::make_node(oshape, {a.impl()}, [axis, begin, rows, cols](TensorImpl& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        const int orows = self.shape[0], ocols = self.shape[1];
        for (int i = 0; i < orows; ++i)
            for (int j = 0; j < ocols; ++j) {
                int si = axis == 0 ? i + begin : i;
                int sj = axis == 0 ? j : j + begin;
                p.grad[std::size_t(si) * cols + sj] += self.grad[std::size_t(i) * ocols + j];
            }
        (void)rows;
    });
    const int orows = oshape[0], ocols = oshape[1];
    for (int i = 0; i < orows; ++i)
        for (int j = 0; j < ocols; ++j) {
            int si = axis == 0 ? i + begin : i;
            int sj = axis == 0 ? j : j + begin;
            out.data()[std::size_t(i) * ocols + j] = a.data()[std::size_t(si) * cols + sj];
        }
    return out;
}

inline Tensor concat(const std::vector<Tensor>& parts, int axis) {
    if (parts.empty()) throw ShapeError("concat: no inputs");
    if (parts[0].ndim() == 1) {
        if (axis != 0) throw ShapeError("concat: 1D tensors concat on axis 0 only");
        int total = 0;
        std::vector<TensorPtr> parents;
        for (const auto& t : parts) {
            if (t.ndim() != 1) throw ShapeError("concat: rank mismatch");
            total += t.dim(0);
            parents.push_back(t.impl());
        }
        Tensor out = detail::make_node({total}, parents, [](TensorImpl& self) {
            std::size_t off = 0;
            for (auto& pp : self.parents) {
                auto& p = *pp;
                if (p.needs_grad) {
                    p.ensure_grad();
                    for (std::size_t i = 0; i < p.data.size(); ++i) p.grad[i] += self.grad[off + i];
                }
                off += p.data.size();
            }
        });
        std::size_t off = 0;
        for (const auto& t : parts) {
            std::copy(t.data().begin(), t.data().end(), out.data().begin() + long(off));
            off += t.size();
        }
        return out;
    }
    // 2D case
    const int rows = parts[0].dim(0), cols = parts[0].dim(1);
    std::vector<TensorPtr> parents;
    int total = 0;
    for (const auto& t : parts) {
        if (t.ndim() != 2) throw ShapeError("concat: rank mismatch");
        if (axis == 0 && t.dim(1) != cols)
            throw ShapeError("concat axis 0: column mismatch " + shape_str(t.shape()));
        if (axis == 1 && t.dim(0) != rows)
            throw ShapeError("concat axis 1: row mismatch " + shape_str(t.shape()));
        total += t.dim(axis);
        parents.push_back(t.impl());
    }
    Shape oshape = axis == 0 ? Shape{total, cols} : Shape{rows, total};
    Tensor out = detail::make_node(oshape, parents, [axis, oshape](TensorImpl& self) {
        const int ocols = oshape[1];
        int off = 0;
        for (auto& pp : self.parents) {
            auto& p = *pp;
            const int prows = p.shape[0], pcols = p.shape[1];
            if (p.needs_grad) {
                p.ensure_grad();
                for (int i = 0; i < prows; ++i)
                    for (int j = 0; j < pcols; ++j) {
                        std::size_t oi = axis == 0 ? std::size_t(i + off) * ocols + j
                                                   : std::size_t(i) * ocols + (j + off);
                        p.grad[std::size_t(i) * pcols + j] += self.grad[oi];
                    }
            }
            off += axis == 0 ? prows : pcols;
        }
    });
    const int ocols = oshape[1];
    int off = 0;
    for (const auto& t : parts) {
        const int prows = t.dim(0), pcols = t.dim(1);
        for (int i = 0; i < prows; ++i)
            for (int j = 0; j < pcols; ++j) {
                std::size_t oi = axis == 0 ? std::size_t(i + off) * ocols + j
                                           : std::size_t(i) * ocols + (j + off);
                out.data()[oi] = t.data()[std::size_t(i) * pcols + j];
            }
        off += axis == 0 ? prows : pcols;
    }
    return out;
}

// ---- reductions ----------------------------------------------------------

inline Tensor sum_all(const Tensor& a) {
    std::size_t n = a.size();
    Tensor out = detail::make_node({1}, {a.impl()}, [n](TensorImpl& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        for (std::size_t i = 0; i < n; ++i) p.grad[i] += self.grad[0];
    });
    real s = 0;
    for (real v : a.data()) s += v;
    out.data()[0] = s;
    return out;
}

inline Tensor mean_all(const Tensor& a) { return scale(sum_all(a), real(1) / real(a.size())); }

// Mean over one axis of a 2D tensor.
inline Tensor mean_axis(const Tensor& a, int axis) {
    if (a.ndim() != 2) throw ShapeError("mean_axis: expects 2D tensor, got " + shape_str(a.shape()));
    const int rows = a.dim(0), cols = a.dim(1);
    Shape oshape = axis == 0 ? Shape{cols} : Shape{rows};
    const real inv = real(1) / real(axis == 0 ? rows : cols);
    Tensor out = detail::make_node(oshape, {a.impl()}, [axis, rows, cols, inv](TensorImpl& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                p.grad[std::size_t(i) * cols + j] += inv * self.grad[std::size_t(axis == 0 ? j : i)];
    });
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            out.data()[std::size_t(axis == 0 ? j : i)] += inv * a.data()[std::size_t(i) * cols + j];
    return out;
}

// ---- softmax -------------------------------------------------------------

// Softmax along the last axis of a 1D or 2D tensor, shift-stabilized.
inline Tensor softmax(const Tensor& a) {
    const int rows = a.ndim() == 2 ? a.dim(0) : 1;
    const int cols = a.ndim() == 2 ? a.dim(1) : a.dim(0);
    Tensor out = detail::make_node(a.shape(), {a.impl()}, [rows, cols](TensorImpl& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        for (int i = 0; i < rows; ++i) {
            const std::size_t base = std::size_t(i) * cols;
            real dot = 0;
            for (int j = 0; j < cols; ++j) dot += self.grad[base + j] * self.data[base + j];
            for (int j = 0; j < cols; ++j)
                p.grad[base + j] += self.data[base + j] * (self.grad[base + j] - dot);
        }
    });
    for (int i = 0; i < rows; ++i) {
        const std::size_t base = std::size_t(i) * cols;
        real mx = a.data()[base];
        for (int j = 1; j < cols; ++j) mx = std::max(mx, a.data()[base + j]);
        real denom = 0;
        for (int j = 0; j < cols; ++j) {
            real e = std::exp(a.data()[base + j] - mx);
            out.data()[base + j] = e;
            denom += e;
        }
        for (int j = 0; j < cols; ++j) out.data()[base + j] /= denom;
    }
    return out;
}

// ---- dropout -------------------------------------------------------------

// Inverted dropout: survivors scaled by 1/(1-p) so inference is a plain pass.
inline Tensor dropout(const Tensor& a, real p, Rng& rng) {
    if (p < 0 || p >= 1) throw RevsentError("dropout: p must be in [0,1), got " + std::to_string(double(p)));
    if (p == 0) return scale(a, real(1));
    auto mask = std::make_shared<std::vector<real>>(a.size());
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    const real keep = real(1) - p;
    for (auto& m : *mask) m = dist(rng) < double(keep) ? real(1) / keep : real(0);
    Tensor out = detail::make_node(a.shape(), {a.impl()}, [mask](TensorImpl& self) {
        auto& pa = *self.parents[0];
        if (!pa.needs_grad) return;
        pa.ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += (*mask)[i] * self.grad[i];
    });
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = (*mask)[i] * a.data()[i];
    return out;
}

// ---- embedding lookup ----------------------------------------------------

// table: [V, D]; returns [|ids|, D] with scatter-add gradients into the table.
inline Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids) {
    if (table.ndim() != 2) throw ShapeError("embedding_lookup: table must be 2D");
    const int V = table.dim(0), D = table.dim(1);
    for (int id : ids)
        if (id < 0 || id >= V)
            throw ShapeError("embedding_lookup: id " + std::to_string(id) + " outside vocab of " + std::to_string(V));
    auto ids_copy = std::make_shared<std::vector<int>>(ids);
    Tensor out = detail::make_node({int(ids.size()), D}, {table.impl()}, [ids_copy, D](TensorImpl& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        for (std::size_t i = 0; i < ids_copy->size(); ++i) {
            const std::size_t src = i * std::size_t(D);
            const std::size_t dst = std::size_t((*ids_copy)[i]) * D;
            for (int d = 0; d < D; ++d) p.grad[dst + d] += self.grad[src + d];
        }
    });
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (int d = 0; d < D; ++d)
            out.data()[i * std::size_t(D) + d] = table.data()[std::size_t(ids[i]) * D + d];
    return out;
}

// ---- conv1d + max-over-time ---------------------------------------------

// input: [T, D]; weight: [K, W*D] (filter k, window offset w, channel d).
// Output [T_out, K] with T_out = (T - W)/stride + 1. Bias is added separately.
inline Tensor conv1d(const Tensor& input, const Tensor& weight, int window, int stride = 1) {
    if (input.ndim() != 2 || weight.ndim() != 2)
        throw ShapeError("conv1d: expects 2D input and weight");
    const int T = input.dim(0), D = input.dim(1), K = weight.dim(0);
    if (weight.dim(1) != window * D)
        throw ShapeError("conv1d: weight cols " + std::to_string(weight.dim(1)) +
                         " != window*channels " + std::to_string(window * D));
    if (T < window)
        throw ShapeError("conv1d: sequence length " + std::to_string(T) +
                         " shorter than window " + std::to_string(window));
    const int T_out = (T - window) / stride + 1;
    Tensor out = detail::make_node({T_out, K}, {input.impl(), weight.impl()},
                                   [T_out, K, D, window, stride](TensorImpl& self) {
        auto& pi = *self.parents[0];
        auto& pw = *self.parents[1];
        const int WD = window * D;
        if (pi.needs_grad) pi.ensure_grad();
        if (pw.needs_grad) pw.ensure_grad();
        for (int t = 0; t < T_out; ++t)
            for (int k = 0; k < K; ++k) {
                real g = self.grad[std::size_t(t) * K + k];
                if (g == real(0)) continue;
                const std::size_t in0 = std::size_t(t) * stride * D;
                const std::size_t w0 = std::size_t(k) * WD;
                if (pi.needs_grad)
                    for (int j = 0; j < WD; ++j) pi.grad[in0 + j] += g * pw.data[w0 + j];
                if (pw.needs_grad)
                    for (int j = 0; j < WD; ++j) pw.grad[w0 + j] += g * pi.data[in0 + j];
            }
    });
    const int WD = window * D;
    for (int t = 0; t < T_out; ++t)
        for (int k = 0; k < K; ++k) {
            const std::size_t in0 = std::size_t(t) * stride * D;
            const std::size_t w0 = std::size_t(k) * WD;
            real s = 0;
            for (int j = 0; j < WD; ++j) s += input.data()[in0 + j] * weight.data()[w0 + j];
            out.data()[std::size_t(t) * K + k] = s;
        }
    return out;
}

// Per-column max over rows of [T, K] -> [K]; gradient flows to the argmax
// winner, lowest index on ties.
inline Tensor max_over_time(const Tensor& a) {
    if (a.ndim() != 2) throw ShapeError("max_over_time: expects 2D tensor, got " + shape_str(a.shape()));
    const int T = a.dim(0), K = a.dim(1);
    auto argmax = std::make_shared<std::vector<int>>(K, 0);
    Tensor out = detail::make_node({K}, {a.impl()}, [argmax, K](TensorImpl& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        for (int k = 0; k < K; ++k)
            p.grad[std::size_t((*argmax)[k]) * K + k] += self.grad[std::size_t(k)];
    });
    for (int k = 0; k < K; ++k) {
        real best = a.data()[std::size_t(k)];
        int bi = 0;
        for (int t = 1; t < T; ++t) {
            real v = a.data()[std::size_t(t) * K + k];
            if (v > best) { best = v; bi = t; }
        }
        (*argmax)[k] = bi;
        out.data()[std::size_t(k)] = best;
    }
    return out;
}

// ---- losses --------------------------------------------------------------

// Mean cross-entropy over a batch of logits [B, C] (or a single row [C])
// against integer class labels, computed through a stable log-sum-exp.
inline Tensor cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    const int B = logits.ndim() == 2 ? logits.dim(0) : 1;
    const int C = logits.ndim() == 2 ? logits.dim(1) : logits.dim(0);
    if (int(labels.size()) != B)
        throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for batch of " + std::to_string(B));
    for (int y : labels)
        if (y < 0 || y >= C)
            throw RevsentError("cross_entropy: class index " + std::to_string(y) + " outside [0," + std::to_string(C) + ")");
    auto labs = std::make_shared<std::vector<int>>(labels);
    Tensor out = detail::make_node({1}, {logits.impl()}, [labs, B, C](TensorImpl& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        const real g = self.grad[0] / real(B);
        for (int i = 0; i < B; ++i) {
            const std::size_t base = std::size_t(i) * C;
            real mx = p.data[base];
            for (int j = 1; j < C; ++j) mx = std::max(mx, p.data[base + j]);
            real denom = 0;
            for (int j = 0; j < C; ++j) denom += std::exp(p.data[base + j] - mx);
            for (int j = 0; j < C; ++j) {
                real sm = std::exp(p.data[base + j] - mx) / denom;
                p.grad[base + j] += g * (sm - real(j == (*labs)[std::size_t(i)]));
            }
        }
    });
    real total = 0;
    for (int i = 0; i < B; ++i) {
        const std::size_t base = std::size_t(i) * C;
        real mx = logits.data()[base];
        for (int j = 1; j < C; ++j) mx = std::max(mx, logits.data()[base + j]);
        real lse = 0;
        for (int j = 0; j < C; ++j) lse += std::exp(logits.data()[base + j] - mx);
        lse = std::log(lse) + mx;
        total += lse - logits.data()[base + std::size_t(labels[std::size_t(i)])];
    }
    out.data()[0] = total / real(B);
    return out;
}

// Mean squared error against a constant target.
inline Tensor mse(const Tensor& pred, const std::vector<real>& target) {
    if (pred.size() != target.size())
        throw ShapeError("mse: " + std::to_string(pred.size()) + " predictions vs " +
                         std::to_string(target.size()) + " targets");
    auto tgt = std::make_shared<std::vector<real>>(target);
    const std::size_t n = pred.size();
    Tensor out = detail::make_node({1}, {pred.impl()}, [tgt, n](TensorImpl& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        const real g = self.grad[0] * real(2) / real(n);
        for (std::size_t i = 0; i < n; ++i) p.grad[i] += g * (p.data[i] - (*tgt)[i]);
    });
    real s = 0;
    for (std::size_t i = 0; i < n; ++i) {
        real d = pred.data()[i] - target[i];
        s += d * d;
    }
    out.data()[0] = s / real(n);
    return out;
}

// ---- backward ------------------------------------------------------------

inline void backward(const Tensor& loss) {
    if (loss.size() != 1)
        throw ShapeError("backward: loss must be scalar, got " + shape_str(loss.shape()));
    // Topological order by iterative DFS, then reverse sweep.
    std::vector<TensorImpl*> order;
    std::unordered_set<TensorImpl*> seen;
    struct Frame { TensorImpl* node; std::size_t next; };
    std::vector<Frame> stack{{loss.impl().get(), 0}};
    seen.insert(loss.impl().get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next < f.node->parents.size()) {
            TensorImpl* p = f.node->parents[f.next++].get();
            if (p->needs_grad && !seen.count(p)) {
                seen.insert(p);
                stack.push_back({p, 0});
            }
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }
    loss.impl()->ensure_grad();
    loss.impl()->grad[0] = real(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        TensorImpl* n = *it;
        if (n->backward_fn) {
            n->ensure_grad();
            n->backward_fn(*n);
        }
    }
}

}  // namespace revsent
