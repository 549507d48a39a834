#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "claimgat/encoder.hpp"
#include "claimgat/graph.hpp"
#include "claimgat/optim.hpp"
#include "claimgat/tensor.hpp"

namespace claimgat {

enum class PostAttentionMode { On, Off, SimpleConcat };
enum class GnnKind { Gat, Gcn };

inline std::string to_string(PostAttentionMode m) {
  switch (m) {
    case PostAttentionMode::On: return "on";
    case PostAttentionMode::Off: return "off";
    case PostAttentionMode::SimpleConcat: return "simple-concat";
  }
  return "?";
}

inline PostAttentionMode post_attention_from_string(const std::string& s) {
  if (s == "on") return PostAttentionMode::On;
  if (s == "off") return PostAttentionMode::Off;
  if (s == "simple-concat") return PostAttentionMode::SimpleConcat;
  throw ConfigError("unknown post-attention mode '" + s + "' (expected on|off|simple-concat)");
}

inline std::string to_string(GnnKind g) { return g == GnnKind::Gat ? "gat" : "gcn"; }

inline GnnKind gnn_from_string(const std::string& s) {
  if (s == "gat") return GnnKind::Gat;
  if (s == "gcn") return GnnKind::Gcn;
  throw ConfigError("unknown gnn kind '" + s + "' (expected gat|gcn)");
}

struct ModelConfig {
  int layers = 2;
  int heads = 4;
  int node_dim = 128;  // node width d; must equal the encoder output width
  int classes = 2;
  int lstm_hidden = 64;  // per direction; node_dim = 2 * lstm_hidden
  double leaky_slope = 0.2;
  double dropout = 0.2;
  bool use_bias = true;
  PostAttentionMode post_attention = PostAttentionMode::On;
  bool event_attention = true;
  GnnKind gnn = GnnKind::Gat;
  StructureVariant structure;

  void validate() const {
    if (layers < 1) throw ConfigError("model: layers must be >= 1");
    if (heads < 1) throw ConfigError("model: heads must be >= 1");
    if (classes < 2) throw ConfigError("model: classes must be >= 2");
    if (node_dim != 2 * lstm_hidden)
      throw ConfigError("model: node_dim must equal 2*lstm_hidden");
    if (layers > 1 && node_dim % heads != 0)
      throw ConfigError("model: node_dim must be divisible by heads for concat layers");
  }

  // Per-head output width: d/K on concatenating layers, d on the final
  // (head-averaged) layer.
  int head_dim(int layer) const { return layer < layers - 1 ? node_dim / heads : node_dim; }

  // Width of the representation fed to the per-head transform. The gate (or
  // the simple-concat variant) doubles it; the plain backbone does not.
  int attention_input_dim() const {
    const bool doubled = gnn == GnnKind::Gat && post_attention != PostAttentionMode::Off;
    return doubled ? 2 * node_dim : node_dim;
  }
};

// Per-layer attention snapshot for inspection and export: the head-averaged
// refined attention (zero outside neighborhoods, pre-dropout) and the
// event-level weights beta.
struct AttentionTrace {
  std::vector<std::string> node_order;
  std::vector<std::vector<double>> layer_attention;  // layers x (n*n row-major)
  std::vector<double> beta;                          // empty when event attention is off
};

class Model {
 public:
  Model() = default;

  Model(const ModelConfig& cfg, std::shared_ptr<const EmbeddingTable> table, std::uint64_t init_seed)
      : cfg_(cfg), table_(std::move(table)) {
    cfg_.validate();
    Rng root(init_seed);
    encoder_ = PostEncoder(params_, *table_, cfg_.lstm_hidden, root.split("encoder"));
    Rng rng = root.split("layers");
    const int d = cfg_.node_dim;
    for (int l = 0; l < cfg_.layers; ++l) {
      Layer layer;
      const int din = cfg_.attention_input_dim();
      const int dh = cfg_.head_dim(l);
      for (int k = 0; k < cfg_.heads; ++k) {
        const std::string base = "gat/l" + std::to_string(l) + "/h" + std::to_string(k);
        layer.w.push_back(params_.add(base + "/W", uniform_mat(rng, din, dh), true));
        layer.a1.push_back(params_.add(base + "/a1", uniform_mat(rng, dh, 1), true));
        layer.a2.push_back(params_.add(base + "/a2", uniform_mat(rng, dh, 1), true));
      }
      const std::string gbase = "gate/l" + std::to_string(l);
      layer.wg = params_.add(gbase + "/Wg", uniform_mat(rng, d, d), true);
      layer.ug = params_.add(gbase + "/Ug", uniform_mat(rng, d, d), true);
      layer.bg = params_.add(gbase + "/b", Tensor::zeros({1, d}), false);
      layers_.push_back(layer);
    }
    fc_match_w_ = params_.add("event/match/W", uniform_mat(rng, 4 * d, d), true);
    fc_match_b_ = params_.add("event/match/b", Tensor::zeros({1, d}), false);
    fc_score_w_ = params_.add("event/score/W", uniform_mat(rng, d, 1), true);
    fc_score_b_ = params_.add("event/score/b", Tensor::zeros({1, 1}), false);
    fc_out_w_ = params_.add("out/W", uniform_mat(rng, 2 * d, cfg_.classes), true);
    fc_out_b_ = params_.add("out/b", Tensor::zeros({1, cfg_.classes}), false);
    fc_pool_w_ = params_.add("out_pool/W", uniform_mat(rng, d, cfg_.classes), true);
    fc_pool_b_ = params_.add("out_pool/b", Tensor::zeros({1, cfg_.classes}), false);
  }

  const ModelConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }
  const PostEncoder& encoder() const { return encoder_; }
  const EmbeddingTable& table() const { return *table_; }
  std::shared_ptr<const EmbeddingTable> table_ptr() const { return table_; }

  struct Output {
    Tensor logits;       // [1 x classes], pre-softmax
    Tensor y;            // [1 x classes], softmax of logits
    Tensor node_repr;    // H^(L), [n x d]
    AttentionTrace trace;
  };

  // Claim-aware gate: g = sigmoid(Wg h + Ug h_c [+ b]), blended
  // representation g*h + (1-g)*h_c. Row 0 gates against itself.
  Tensor claim_gate(const Tensor& h, int layer_index) const {
    const Layer& layer = layers_.at(static_cast<std::size_t>(layer_index));
    Tensor hc_rep = replicate_claim_row(h);
    Tensor pre = add(matmul(h, layer.wg), matmul(hc_rep, layer.ug));
    if (cfg_.use_bias) pre = add(pre, layer.bg);
    Tensor g = sigmoid(pre);
    Tensor ones = Tensor::full(g.shape(), 1.0);
    return add(hadamard(g, h), hadamard(sub(ones, g), hc_rep));
  }

  // Full forward pass over one event. `dropout_rng` must be non-null when
  // training with a nonzero dropout rate.
  Output forward(const Event& e, const InteractionGraph& g, bool training, Rng* dropout_rng = nullptr) const {
    Tensor x = encoder_.encode_event(e);
    return forward_features(x, g, training, dropout_rng);
  }

  // Forward pass from precomputed node features X (row 0 = claim).
  Output forward_features(const Tensor& x, const InteractionGraph& g, bool training,
                          Rng* dropout_rng = nullptr) const {
    if (x.rank() != 2 || x.dim(0) != g.n || x.dim(1) != cfg_.node_dim)
      throw DimensionError("forward: features " + shape_str(x.shape()) + " do not match graph with " +
                           std::to_string(g.n) + " nodes and width " + std::to_string(cfg_.node_dim));
    const bool drop = training && cfg_.dropout > 0.0;
    if (drop && dropout_rng == nullptr) throw ContractError("forward: training with dropout requires an rng");

    Output out;
    out.trace.node_order = g.node_order;
    const auto masks = neighborhood_masks(g);
    const int n = g.n;

    std::vector<double> gcn_weights;
    if (cfg_.gnn == GnnKind::Gcn) gcn_weights = gcn_propagation_weights(g, masks);

    Tensor h = x;
    for (int l = 0; l < cfg_.layers; ++l) {
      const Layer& layer = layers_[static_cast<std::size_t>(l)];
      Tensor hin = drop ? dropout(h, cfg_.dropout, true, *dropout_rng) : h;

      Tensor attn_in;
      if (cfg_.gnn == GnnKind::Gcn || cfg_.post_attention == PostAttentionMode::Off) {
        attn_in = hin;
      } else if (cfg_.post_attention == PostAttentionMode::SimpleConcat) {
        attn_in = concat({replicate_claim_row(hin), hin}, 1);
      } else {
        attn_in = concat({claim_gate(hin, l), hin}, 1);
      }

      std::vector<double> attn_avg(static_cast<std::size_t>(n) * n, 0.0);
      std::vector<Tensor> head_out;
      head_out.reserve(static_cast<std::size_t>(cfg_.heads));
      const bool average_layer = l == cfg_.layers - 1;
      for (int k = 0; k < cfg_.heads; ++k) {
        Tensor p = matmul(attn_in, layer.w[static_cast<std::size_t>(k)]);
        Tensor alpha;
        if (cfg_.gnn == GnnKind::Gat) {
          alpha = attention_rows(p, layer.a1[static_cast<std::size_t>(k)], layer.a2[static_cast<std::size_t>(k)],
                                 masks);
        } else {
          alpha = Tensor::from({n, n}, gcn_weights);
        }
        for (std::size_t i = 0; i < attn_avg.size(); ++i)
          attn_avg[i] += alpha.values()[i] / static_cast<double>(cfg_.heads);
        Tensor alpha_used = drop ? dropout(alpha, cfg_.dropout, true, *dropout_rng) : alpha;
        Tensor m = matmul(alpha_used, p);
        head_out.push_back(average_layer ? m : relu(m));
      }
      out.trace.layer_attention.push_back(std::move(attn_avg));

      if (average_layer) {
        Tensor acc = head_out[0];
        for (int k = 1; k < cfg_.heads; ++k) acc = add(acc, head_out[static_cast<std::size_t>(k)]);
        h = relu(scale(acc, 1.0 / static_cast<double>(cfg_.heads)));
      } else {
        h = concat(head_out, 1);
      }
    }
    out.node_repr = h;

    Tensor sbar = mean(h, 0);  // [1 x d]
    Tensor logits;
    if (cfg_.event_attention) {
      Tensor beta;
      Tensor shat = event_attention(h, &beta);
      out.trace.beta = beta.values();
      Tensor joint = concat({shat, sbar}, 1);
      logits = matmul(joint, fc_out_w_);
      if (cfg_.use_bias) logits = add(logits, fc_out_b_);
    } else {
      logits = matmul(sbar, fc_pool_w_);
      if (cfg_.use_bias) logits = add(logits, fc_pool_b_);
    }
    out.logits = logits;
    out.y = softmax(logits);
    return out;
  }

  // Inference-guided event attention: per node, match against the claim with
  // [h_c || h || h_c*h || |h_c-h|], score, softmax over all nodes, and pool.
  Tensor event_attention(const Tensor& h, Tensor* beta_out) const {
    const int n = h.dim(0);
    Tensor hc_rep = replicate_claim_row(h);
    Tensor prod = hadamard(h, hc_rep);
    Tensor diff = claimgat::abs(sub(h, hc_rep));
    Tensor match_in = concat({hc_rep, h, prod, diff}, 1);  // [n x 4d]
    Tensor match_pre = matmul(match_in, fc_match_w_);
    if (cfg_.use_bias) match_pre = add(match_pre, fc_match_b_);
    Tensor matched = claimgat::tanh(match_pre);  // [n x d]
    Tensor score_pre = matmul(matched, fc_score_w_);
    if (cfg_.use_bias) score_pre = add(score_pre, fc_score_b_);
    Tensor b = claimgat::tanh(score_pre);           // [n x 1]
    Tensor beta = softmax(reshape(b, {n}));         // over all nodes, claim included
    if (beta_out != nullptr) *beta_out = beta;
    return matmul(reshape(beta, {1, n}), h);        // [1 x d]
  }

 private:
  struct Layer {
    std::vector<Tensor> w, a1, a2;  // per head
    Tensor wg, ug, bg;
  };

  static Tensor uniform_mat(Rng& rng, int r, int c) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(r));
    std::vector<double> v(static_cast<std::size_t>(r) * c);
    for (double& x : v) x = rng.uniform(-bound, bound);
    return Tensor::from({r, c}, std::move(v));
  }

  static Tensor replicate_claim_row(const Tensor& h) {
    Tensor hc = slice_rows(h, 0, 1);
    Tensor ones = Tensor::full({h.dim(0), 1}, 1.0);
    return matmul(ones, hc);
  }

  // Per-node attention rows: e_ij = LeakyReLU(a1.P_i + a2.P_j) masked to the
  // neighborhood and softmax-normalized.
  Tensor attention_rows(const Tensor& p, const Tensor& a1, const Tensor& a2,
                        const std::vector<BoolVec>& masks) const {
    const int n = p.dim(0);
    Tensor u = matmul(p, a1);  // [n x 1]
    Tensor v = matmul(p, a2);  // [n x 1]
    Tensor ones_row = Tensor::full({1, n}, 1.0);
    Tensor ones_col = Tensor::full({n, 1}, 1.0);
    Tensor logits = leaky_relu(add(matmul(u, ones_row), matmul(ones_col, transpose(v))), cfg_.leaky_slope);
    std::vector<Tensor> rows;
    rows.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      rows.push_back(masked_softmax(slice_rows(logits, i, 1), masks[static_cast<std::size_t>(i)]));
    return concat(rows, 0);
  }

  // Symmetric-normalized propagation weights 1/sqrt(deg_i*deg_j) over the
  // self-inclusive neighborhood; the no-attention baseline.
  static std::vector<double> gcn_propagation_weights(const InteractionGraph& g,
                                                     const std::vector<BoolVec>& masks) {
    const int n = g.n;
    std::vector<double> deg(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) deg[static_cast<std::size_t>(i)] += masks[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (masks[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
          w[static_cast<std::size_t>(i) * n + j] = 1.0 / std::sqrt(deg[static_cast<std::size_t>(i)] * deg[static_cast<std::size_t>(j)]);
    return w;
  }

  ModelConfig cfg_;
  std::shared_ptr<const EmbeddingTable> table_;
  ParamSet params_;
  PostEncoder encoder_;
  std::vector<Layer> layers_;
  Tensor fc_match_w_, fc_match_b_;
  Tensor fc_score_w_, fc_score_b_;
  Tensor fc_out_w_, fc_out_b_;
  Tensor fc_pool_w_, fc_pool_b_;
};

}  // namespace claimgat
