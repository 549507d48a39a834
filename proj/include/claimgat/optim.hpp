#pragma once

#include <string>
#include <vector>

#include "claimgat/errors.hpp"
#include "claimgat/tensor.hpp"

namespace claimgat {

// Ordered registry of named trainable tensors. Ordering is the registration
// order, which makes optimizer state, checkpoints and L2 sums deterministic.
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
    bool decay;  // participates in the L2 penalty (weights yes, biases no)
  };

  Tensor add(const std::string& name, Tensor t, bool decay) {
    if (find(name) != nullptr) throw ContractError("ParamSet: duplicate parameter name " + name);
    t.set_requires_grad(true);
    entries_.push_back({name, t, decay});
    return t;
  }

  const Tensor* find(const std::string& name) const {
    for (const Entry& e : entries_)
      if (e.name == name) return &e.tensor;
    return nullptr;
  }

  Tensor get(const std::string& name) const {
    const Tensor* t = find(name);
    if (t == nullptr) throw ContractError("ParamSet: no parameter named " + name);
    return *t;
  }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  void zero_grad() {
    for (Entry& e : entries_) e.tensor.zero_grad();
  }

  std::vector<Tensor> decayed_weights() const {
    std::vector<Tensor> out;
    for (const Entry& e : entries_)
      if (e.decay) out.push_back(e.tensor);
    return out;
  }

  std::int64_t scalar_count() const {
    std::int64_t n = 0;
    for (const Entry& e : entries_) n += e.tensor.size();
    return n;
  }

  // Deep copy of current values, for best-epoch snapshots.
  std::vector<std::vector<double>> snapshot() const {
    std::vector<std::vector<double>> vals;
    vals.reserve(entries_.size());
    for (const Entry& e : entries_) vals.push_back(e.tensor.values());
    return vals;
  }

  void restore(const std::vector<std::vector<double>>& vals) {
    if (vals.size() != entries_.size()) throw ContractError("ParamSet::restore: size mismatch");
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (vals[i].size() != entries_[i].tensor.values().size())
        throw ContractError("ParamSet::restore: shape mismatch for " + entries_[i].name);
      entries_[i].tensor.values() = vals[i];
    }
  }

 private:
  std::vector<Entry> entries_;
};

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moment buffers are keyed by registration order.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }
  long step_count() const { return step_; }

  void step(ParamSet& params) {
    if (m_.empty()) {
      m_.resize(params.size());
      v_.resize(params.size());
      for (std::size_t i = 0; i < params.size(); ++i) {
        const std::size_t n = params.entries()[i].tensor.values().size();
        m_[i].assign(n, 0.0);
        v_[i].assign(n, 0.0);
      }
    }
    if (m_.size() != params.size()) throw ContractError("Adam: parameter set changed size");
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor t = params.entries()[i].tensor;
      if (!t.has_grad())
        throw ContractError("Adam: missing gradient for parameter " + params.entries()[i].name);
      auto& vals = t.values();
      const auto& g = t.grad();
      for (std::size_t j = 0; j < vals.size(); ++j) {
        m_[i][j] = cfg_.beta1 * m_[i][j] + (1.0 - cfg_.beta1) * g[j];
        v_[i][j] = cfg_.beta2 * v_[i][j] + (1.0 - cfg_.beta2) * g[j] * g[j];
        const double mhat = m_[i][j] / bc1;
        const double vhat = v_[i][j] / bc2;
        vals[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
    }
  }

 private:
  AdamConfig cfg_;
  long step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace claimgat
