#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "claimgat/errors.hpp"
#include "claimgat/rng.hpp"

namespace claimgat {

using Shape = std::vector<int>;
using BoolVec = std::vector<std::uint8_t>;  // 0/1 mask vector

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << ']';
  return os.str();
}

inline std::int64_t numel(const Shape& s) {
  std::int64_t n = 1;
  for (int d : s) n *= d;
  return n;
}

class Tape;

namespace detail {

struct TensorData {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until first needed; always numel-sized once allocated
  bool requires_grad = false;
  Tape* producer = nullptr;  // tape that recorded the op producing this tensor, if any

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }
};

}  // namespace detail

// Dense 64-bit tensor handle. Copies are shallow; the payload (values, grad)
// is shared. Ops record their adjoint rule on the active Tape when any input
// requires gradients.
class Tensor {
 public:
  Tensor() : d_(std::make_shared<detail::TensorData>()) {}

  static Tensor from(Shape shape, std::vector<double> values) {
    if (static_cast<std::int64_t>(values.size()) != numel(shape))
      throw DimensionError("tensor values length " + std::to_string(values.size()) +
                           " does not match shape " + shape_str(shape));
    Tensor t;
    t.d_->shape = std::move(shape);
    t.d_->values = std::move(values);
    return t;
  }

  static Tensor zeros(Shape shape) {
    std::vector<double> v(static_cast<std::size_t>(numel(shape)), 0.0);
    return from(std::move(shape), std::move(v));
  }

  static Tensor full(Shape shape, double fill) {
    std::vector<double> v(static_cast<std::size_t>(numel(shape)), fill);
    return from(std::move(shape), std::move(v));
  }

  static Tensor scalar(double v) { return from({1}, {v}); }

  // Trainable leaf.
  static Tensor param(Shape shape, std::vector<double> values) {
    Tensor t = from(std::move(shape), std::move(values));
    t.d_->requires_grad = true;
    return t;
  }

  const Shape& shape() const { return d_->shape; }
  int rank() const { return static_cast<int>(d_->shape.size()); }
  int dim(int i) const { return d_->shape[static_cast<std::size_t>(i)]; }
  std::int64_t size() const { return static_cast<std::int64_t>(d_->values.size()); }

  std::vector<double>& values() { return d_->values; }
  const std::vector<double>& values() const { return d_->values; }
  std::vector<double>& grad() {
    d_->ensure_grad();
    return d_->grad;
  }
  const std::vector<double>& grad() const {
    d_->ensure_grad();
    return d_->grad;
  }
  bool has_grad() const { return !d_->grad.empty(); }

  bool requires_grad() const { return d_->requires_grad; }
  void set_requires_grad(bool rg) { d_->requires_grad = rg; }

  void zero_grad() {
    d_->ensure_grad();
    std::fill(d_->grad.begin(), d_->grad.end(), 0.0);
  }

  double item() const {
    if (size() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
    return d_->values[0];
  }

  // 2-D accessors (row-major).
  double at(int r, int c) const { return d_->values[static_cast<std::size_t>(r) * dim(1) + c]; }
  int rows() const { return rank() == 2 ? dim(0) : 1; }
  int cols() const { return rank() == 2 ? dim(1) : dim(0); }

  std::shared_ptr<detail::TensorData> data() const { return d_; }

 private:
  std::shared_ptr<detail::TensorData> d_;
};

// Ordered record of executed operations. Replaying the recorded adjoint
// closures in reverse execution order visits each operation exactly once and
// accumulates exact adjoints into every requires_grad ancestor of the loss.
class Tape {
 public:
  // RAII activation: ops record onto the innermost active tape of this thread.
  class Scope {
   public:
    explicit Scope(Tape& t) : prev_(current_), mine_(&t) { current_ = &t; }
    ~Scope() { current_ = prev_; }
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Tape* prev_;
    Tape* mine_;
  };

  static Tape* current() { return current_; }

  void record(const std::shared_ptr<detail::TensorData>& out, std::function<void()> back) {
    out->requires_grad = true;
    out->producer = this;
    nodes_.push_back({out, std::move(back)});
  }

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  // Seeds d(loss)/d(loss) = 1 and replays all adjoints in reverse order.
  // Output grads are reset first so repeated backward calls are idempotent
  // given the caller zeroes parameter grads in between.
  void backward(const Tensor& loss) {
    if (loss.size() != 1) throw ContractError("backward: loss must be scalar, got " + shape_str(loss.shape()));
    if (loss.data()->producer != this)
      throw ContractError("backward: loss was not computed on this tape");
    for (auto& n : nodes_) {
      n.out->ensure_grad();
      std::fill(n.out->grad.begin(), n.out->grad.end(), 0.0);
    }
    loss.data()->grad[0] = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->back();
  }

 private:
  struct Node {
    std::shared_ptr<detail::TensorData> out;
    std::function<void()> back;
  };
  std::vector<Node> nodes_;
  inline static thread_local Tape* current_ = nullptr;
};

namespace detail {

inline bool tracking(std::initializer_list<const Tensor*> inputs) {
  if (Tape::current() == nullptr) return false;
  for (const Tensor* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

// b may equal a's shape, or broadcast as a row vector ([n] or [1xn]) over the
// rows of a 2-D a. Returns true when broadcasting applies.
inline bool row_broadcast(const Shape& a, const Shape& b) {
  if (a == b) return false;
  if (a.size() == 2 && b.size() == 1 && b[0] == a[1]) return true;
  if (a.size() == 2 && b.size() == 2 && b[0] == 1 && b[1] == a[1]) return true;
  throw DimensionError("incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Binary elementwise ops (add, sub, hadamard), exact-shape or row broadcast.
// ---------------------------------------------------------------------------

namespace detail {

template <typename Fwd, typename BackA, typename BackB>
Tensor binary_op(const Tensor& a, const Tensor& b, Fwd fwd, BackA back_a, BackB back_b) {
  bool bcast = row_broadcast(a.shape(), b.shape());
  Tensor out = Tensor::zeros(a.shape());
  const auto& av = a.values();
  const auto& bv = b.values();
  auto& ov = out.values();
  const std::size_t n = av.size();
  const std::size_t bn = bv.size();
  for (std::size_t i = 0; i < n; ++i) ov[i] = fwd(av[i], bv[bcast ? i % bn : i]);
  if (tracking({&a, &b})) {
    auto ad = a.data();
    auto bd = b.data();
    auto od = out.data();
    bool arg = a.requires_grad(), brg = b.requires_grad();
    Tape::current()->record(od, [ad, bd, od, bcast, arg, brg, back_a, back_b]() {
      const std::size_t n = od->values.size();
      const std::size_t bn = bd->values.size();
      if (arg) {
        ad->ensure_grad();
        for (std::size_t i = 0; i < n; ++i)
          ad->grad[i] += back_a(ad->values[i], bd->values[bcast ? i % bn : i]) * od->grad[i];
      }
      if (brg) {
        bd->ensure_grad();
        for (std::size_t i = 0; i < n; ++i)
          bd->grad[bcast ? i % bn : i] += back_b(ad->values[i], bd->values[bcast ? i % bn : i]) * od->grad[i];
      }
    });
  }
  return out;
}

}  // namespace detail

inline Tensor add(const Tensor& a, const Tensor& b) {
  return detail::binary_op(
      a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  return detail::binary_op(
      a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

inline Tensor hadamard(const Tensor& a, const Tensor& b) {
  return detail::binary_op(
      a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

// ---------------------------------------------------------------------------
// Unary elementwise ops. The adjoint is expressed in terms of input x and
// output y so saturating functions reuse their forward result.
// ---------------------------------------------------------------------------

namespace detail {

template <typename Fwd, typename Back>
Tensor unary_op(const Tensor& a, Fwd fwd, Back back) {
  Tensor out = Tensor::zeros(a.shape());
  const auto& av = a.values();
  auto& ov = out.values();
  for (std::size_t i = 0; i < av.size(); ++i) ov[i] = fwd(av[i]);
  if (tracking({&a})) {
    auto ad = a.data();
    auto od = out.data();
    Tape::current()->record(od, [ad, od, back]() {
      ad->ensure_grad();
      for (std::size_t i = 0; i < od->values.size(); ++i)
        ad->grad[i] += back(ad->values[i], od->values[i]) * od->grad[i];
    });
  }
  return out;
}

}  // namespace detail

inline Tensor sigmoid(const Tensor& a) {
  return detail::unary_op(
      a,
      [](double x) {
        // split form avoids overflow for large |x|
        return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
      },
      [](double, double y) { return y * (1.0 - y); });
}

inline Tensor tanh(const Tensor& a) {
  return detail::unary_op(a, [](double x) { return std::tanh(x); },
                          [](double, double y) { return 1.0 - y * y; });
}

inline Tensor relu(const Tensor& a) {
  return detail::unary_op(a, [](double x) { return x > 0.0 ? x : 0.0; },
                          [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

inline Tensor leaky_relu(const Tensor& a, double slope = 0.2) {
  return detail::unary_op(a, [slope](double x) { return x > 0.0 ? x : slope * x; },
                          [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

inline Tensor abs(const Tensor& a) {
  return detail::unary_op(a, [](double x) { return std::fabs(x); },
                          [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

inline Tensor scale(const Tensor& a, double c) {
  return detail::unary_op(a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

// ---------------------------------------------------------------------------
// matmul
// ---------------------------------------------------------------------------

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
    throw DimensionError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out = Tensor::zeros({m, n});
  const double* av = a.values().data();
  const double* bv = b.values().data();
  double* ov = out.values().data();
  for (int i = 0; i < m; ++i)
    for (int p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = bv + p * n;
      double* orow = ov + i * n;
      for (int j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  if (detail::tracking({&a, &b})) {
    auto ad = a.data();
    auto bd = b.data();
    auto od = out.data();
    bool arg = a.requires_grad(), brg = b.requires_grad();
    Tape::current()->record(od, [ad, bd, od, m, k, n, arg, brg]() {
      const double* g = od->grad.data();
      if (arg) {
        ad->ensure_grad();
        // dA = dC * B^T
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) {
            const double gij = g[i * n + j];
            if (gij == 0.0) continue;
            for (int p = 0; p < k; ++p) ad->grad[i * k + p] += gij * bd->values[p * n + j];
          }
      }
      if (brg) {
        bd->ensure_grad();
        // dB = A^T * dC
        for (int i = 0; i < m; ++i)
          for (int p = 0; p < k; ++p) {
            const double aip = ad->values[i * k + p];
            if (aip == 0.0) continue;
            for (int j = 0; j < n; ++j) bd->grad[p * n + j] += aip * g[i * n + j];
          }
      }
    });
  }
  return out;
}

inline Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) throw DimensionError("transpose: expected rank-2, got " + shape_str(a.shape()));
  const int m = a.dim(0), n = a.dim(1);
  Tensor out = Tensor::zeros({n, m});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.values()[j * m + i] = a.values()[i * n + j];
  if (detail::tracking({&a})) {
    auto ad = a.data();
    auto od = out.data();
    Tape::current()->record(od, [ad, od, m, n]() {
      ad->ensure_grad();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) ad->grad[i * n + j] += od->grad[j * m + i];
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// concat / slice / reshape
// ---------------------------------------------------------------------------

inline Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw ContractError("concat: no inputs");
  const int rank = parts[0].rank();
  if (axis < 0 || axis >= rank)
    throw DimensionError("concat: axis " + std::to_string(axis) + " out of range for rank " +
                         std::to_string(rank));
  for (const Tensor& p : parts) {
    if (p.rank() != rank) throw DimensionError("concat: mixed ranks");
    for (int d = 0; d < rank; ++d)
      if (d != axis && p.dim(d) != parts[0].dim(d))
        throw DimensionError("concat: shape mismatch " + shape_str(parts[0].shape()) + " vs " +
                             shape_str(p.shape()));
  }
  Shape out_shape = parts[0].shape();
  out_shape[static_cast<std::size_t>(axis)] = 0;
  for (const Tensor& p : parts) out_shape[static_cast<std::size_t>(axis)] += p.dim(axis);
  Tensor out = Tensor::zeros(out_shape);

  // Row-major copy in (outer, part, inner) order; works for rank 1 and 2.
  const int rows = rank == 2 ? out_shape[0] : 1;
  const int out_cols = rank == 2 ? out_shape[1] : out_shape[0];
  if (axis == 0 && rank <= 1) {
    std::size_t off = 0;
    for (const Tensor& p : parts) {
      std::copy(p.values().begin(), p.values().end(), out.values().begin() + static_cast<std::ptrdiff_t>(off));
      off += p.values().size();
    }
  } else if (axis == 0) {  // rank 2, stack rows
    std::size_t off = 0;
    for (const Tensor& p : parts) {
      std::copy(p.values().begin(), p.values().end(), out.values().begin() + static_cast<std::ptrdiff_t>(off));
      off += p.values().size();
    }
  } else {  // rank 2, axis 1: interleave row blocks
    for (int r = 0; r < rows; ++r) {
      int col = 0;
      for (const Tensor& p : parts) {
        const int pc = p.dim(1);
        std::copy(p.values().begin() + static_cast<std::ptrdiff_t>(r) * pc,
                  p.values().begin() + static_cast<std::ptrdiff_t>(r + 1) * pc,
                  out.values().begin() + static_cast<std::ptrdiff_t>(r) * out_cols + col);
        col += pc;
      }
    }
  }

  bool track = false;
  if (Tape::current()) {
    for (const Tensor& p : parts)
      if (p.requires_grad()) track = true;
  }
  if (track) {
    std::vector<std::shared_ptr<detail::TensorData>> pd;
    std::vector<std::uint8_t> prg;
    pd.reserve(parts.size());
    for (const Tensor& p : parts) {
      pd.push_back(p.data());
      prg.push_back(p.requires_grad() ? 1 : 0);
    }
    auto od = out.data();
    Tape::current()->record(od, [pd, prg, od, axis, rank, rows, out_cols]() {
      if (axis == 0) {
        std::size_t off = 0;
        for (std::size_t pi = 0; pi < pd.size(); ++pi) {
          const std::size_t n = pd[pi]->values.size();
          if (prg[pi]) {
            pd[pi]->ensure_grad();
            for (std::size_t i = 0; i < n; ++i) pd[pi]->grad[i] += od->grad[off + i];
          }
          off += n;
        }
      } else {
        for (int r = 0; r < rows; ++r) {
          int col = 0;
          for (std::size_t pi = 0; pi < pd.size(); ++pi) {
            const int pc = pd[pi]->shape[1];
            if (prg[pi]) {
              pd[pi]->ensure_grad();
              for (int c = 0; c < pc; ++c)
                pd[pi]->grad[static_cast<std::size_t>(r) * pc + c] +=
                    od->grad[static_cast<std::size_t>(r) * out_cols + col + c];
            }
            col += pc;
          }
        }
      }
      (void)rank;
    });
  }
  return out;
}

inline Tensor slice_rows(const Tensor& a, int start, int count) {
  if (a.rank() != 2) throw DimensionError("slice_rows: expected rank-2, got " + shape_str(a.shape()));
  if (start < 0 || count < 1 || start + count > a.dim(0))
    throw DimensionError("slice_rows: range [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") out of " + std::to_string(a.dim(0)) + " rows");
  const int n = a.dim(1);
  Tensor out = Tensor::zeros({count, n});
  std::copy(a.values().begin() + static_cast<std::ptrdiff_t>(start) * n,
            a.values().begin() + static_cast<std::ptrdiff_t>(start + count) * n, out.values().begin());
  if (detail::tracking({&a})) {
    auto ad = a.data();
    auto od = out.data();
    Tape::current()->record(od, [ad, od, start, count, n]() {
      ad->ensure_grad();
      for (int r = 0; r < count; ++r)
        for (int c = 0; c < n; ++c)
          ad->grad[static_cast<std::size_t>(start + r) * n + c] += od->grad[static_cast<std::size_t>(r) * n + c];
    });
  }
  return out;
}

inline Tensor reshape(const Tensor& a, Shape shape) {
  if (numel(shape) != a.size())
    throw DimensionError("reshape: cannot view " + shape_str(a.shape()) + " as " + shape_str(shape));
  Tensor out = Tensor::from(std::move(shape), a.values());
  if (detail::tracking({&a})) {
    auto ad = a.data();
    auto od = out.data();
    Tape::current()->record(od, [ad, od]() {
      ad->ensure_grad();
      for (std::size_t i = 0; i < od->grad.size(); ++i) ad->grad[i] += od->grad[i];
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// masked_softmax
// ---------------------------------------------------------------------------

// Softmax over the unmasked entries of a vector ([n] or [1xn]). Masked
// entries are exactly zero; unmasked entries are positive and sum to 1.
// Stabilized by max-subtraction over the unmasked support.
inline Tensor masked_softmax(const Tensor& logits, const BoolVec& mask) {
  const bool vec_ok = logits.rank() == 1 || (logits.rank() == 2 && logits.dim(0) == 1);
  if (!vec_ok) throw DimensionError("masked_softmax: expected a vector, got " + shape_str(logits.shape()));
  const std::size_t n = logits.values().size();
  if (mask.size() != n)
    throw DimensionError("masked_softmax: mask length " + std::to_string(mask.size()) +
                         " does not match logits length " + std::to_string(n));
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    if (mask[i] && logits.values()[i] > mx) mx = logits.values()[i];
  if (mx == -std::numeric_limits<double>::infinity())
    throw ContractError("masked_softmax: empty neighborhood (all-false mask)");
  Tensor out = Tensor::zeros(logits.shape());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    const double e = std::exp(logits.values()[i] - mx);
    out.values()[i] = e;
    sum += e;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (mask[i]) out.values()[i] /= sum;
  if (detail::tracking({&logits})) {
    auto ld = logits.data();
    auto od = out.data();
    BoolVec m = mask;
    Tape::current()->record(od, [ld, od, m]() {
      ld->ensure_grad();
      double dot = 0.0;
      for (std::size_t i = 0; i < od->values.size(); ++i)
        if (m[i]) dot += od->grad[i] * od->values[i];
      for (std::size_t i = 0; i < od->values.size(); ++i)
        if (m[i]) ld->grad[i] += od->values[i] * (od->grad[i] - dot);
    });
  }
  return out;
}

inline Tensor softmax(const Tensor& logits) {
  return masked_softmax(logits, BoolVec(logits.values().size(), 1));
}

// ---------------------------------------------------------------------------
// reductions (keep-dims)
// ---------------------------------------------------------------------------

namespace detail {

inline Tensor reduce_impl(const Tensor& a, int axis, bool mean) {
  if (a.rank() == 1) {
    if (axis != 0) throw DimensionError("reduce: axis " + std::to_string(axis) + " out of range for rank 1");
    const std::size_t n = a.values().size();
    double s = 0.0;
    for (double v : a.values()) s += v;
    const double denom = mean ? static_cast<double>(n) : 1.0;
    Tensor out = Tensor::scalar(s / denom);
    if (tracking({&a})) {
      auto ad = a.data();
      auto od = out.data();
      Tape::current()->record(od, [ad, od, denom]() {
        ad->ensure_grad();
        for (std::size_t i = 0; i < ad->values.size(); ++i) ad->grad[i] += od->grad[0] / denom;
      });
    }
    return out;
  }
  if (a.rank() != 2 || (axis != 0 && axis != 1))
    throw DimensionError("reduce: axis " + std::to_string(axis) + " out of range for shape " +
                         shape_str(a.shape()));
  const int m = a.dim(0), n = a.dim(1);
  const double denom = mean ? static_cast<double>(axis == 0 ? m : n) : 1.0;
  Tensor out = axis == 0 ? Tensor::zeros({1, n}) : Tensor::zeros({m, 1});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = a.values()[static_cast<std::size_t>(i) * n + j] / denom;
      out.values()[axis == 0 ? static_cast<std::size_t>(j) : static_cast<std::size_t>(i)] += v;
    }
  if (tracking({&a})) {
    auto ad = a.data();
    auto od = out.data();
    Tape::current()->record(od, [ad, od, m, n, axis, denom]() {
      ad->ensure_grad();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
          ad->grad[static_cast<std::size_t>(i) * n + j] +=
              od->grad[axis == 0 ? static_cast<std::size_t>(j) : static_cast<std::size_t>(i)] / denom;
    });
  }
  return out;
}

}  // namespace detail

inline Tensor sum(const Tensor& a, int axis) { return detail::reduce_impl(a, axis, /*mean=*/false); }
inline Tensor mean(const Tensor& a, int axis) { return detail::reduce_impl(a, axis, /*mean=*/true); }

inline Tensor sum_all(const Tensor& a) {
  return sum(reshape(a, {static_cast<int>(a.size())}), 0);
}

// ---------------------------------------------------------------------------
// dropout (inverted: survivors scaled by 1/(1-p); evaluation is the identity)
// ---------------------------------------------------------------------------

inline Tensor dropout(const Tensor& a, double p, bool training, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout: p must lie in [0, 1), got " + std::to_string(p));
  if (!training || p == 0.0) return a;
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(a.values().size());
  for (double& m : mask) m = rng.uniform() >= p ? keep_scale : 0.0;
  Tensor out = Tensor::zeros(a.shape());
  for (std::size_t i = 0; i < mask.size(); ++i) out.values()[i] = a.values()[i] * mask[i];
  if (detail::tracking({&a})) {
    auto ad = a.data();
    auto od = out.data();
    Tape::current()->record(od, [ad, od, mask = std::move(mask)]() {
      ad->ensure_grad();
      for (std::size_t i = 0; i < mask.size(); ++i) ad->grad[i] += mask[i] * od->grad[i];
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// losses
// ---------------------------------------------------------------------------

// -log softmax(logits)[target], numerically stable (log-sum-exp).
inline Tensor cross_entropy(const Tensor& logits, int target) {
  const bool vec_ok = logits.rank() == 1 || (logits.rank() == 2 && logits.dim(0) == 1);
  if (!vec_ok) throw DimensionError("cross_entropy: expected a logits vector, got " + shape_str(logits.shape()));
  const int classes = static_cast<int>(logits.values().size());
  if (target < 0 || target >= classes)
    throw ContractError("cross_entropy: target " + std::to_string(target) + " out of range for " +
                        std::to_string(classes) + " classes");
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : logits.values()) mx = std::max(mx, v);
  double se = 0.0;
  for (double v : logits.values()) se += std::exp(v - mx);
  const double lse = mx + std::log(se);
  Tensor out = Tensor::scalar(lse - logits.values()[static_cast<std::size_t>(target)]);
  if (detail::tracking({&logits})) {
    auto ld = logits.data();
    auto od = out.data();
    Tape::current()->record(od, [ld, od, target, lse]() {
      ld->ensure_grad();
      for (std::size_t i = 0; i < ld->values.size(); ++i) {
        const double p = std::exp(ld->values[i] - lse);
        ld->grad[i] += (p - (static_cast<int>(i) == target ? 1.0 : 0.0)) * od->grad[0];
      }
    });
  }
  return out;
}

// lambda * sum of squared entries over the given tensors, built from
// primitive ops so its adjoints ride the same machinery.
inline Tensor l2_penalty(const std::vector<Tensor>& weights, double lambda) {
  if (lambda < 0.0) throw ConfigError("l2_penalty: lambda must be >= 0");
  Tensor acc = Tensor::scalar(0.0);
  for (const Tensor& w : weights) acc = add(acc, sum_all(hadamard(w, w)));
  return scale(acc, lambda);
}

inline Tensor cross_entropy_with_l2(const Tensor& logits, int target, const std::vector<Tensor>& weights,
                                    double lambda) {
  Tensor loss = cross_entropy(logits, target);
  if (lambda == 0.0 || weights.empty()) return loss;
  return add(loss, l2_penalty(weights, lambda));
}

}  // namespace claimgat
