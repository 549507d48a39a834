#pragma once

#include <string>
#include <vector>

#include "claimgat/conversation.hpp"
#include "claimgat/embedding.hpp"
#include "claimgat/optim.hpp"
#include "claimgat/tensor.hpp"
#include "claimgat/text.hpp"

namespace claimgat {

// Single-layer bidirectional LSTM over frozen word vectors. A post's vector
// is the concatenation of the forward direction's final hidden state and the
// backward direction's final state after consuming the reversed sequence,
// giving a 2*hidden wide output (128 with the default hidden size of 64).
class PostEncoder {
 public:
  PostEncoder() = default;

  PostEncoder(ParamSet& params, const EmbeddingTable& table, int hidden, Rng init_rng)
      : table_(&table), input_(table.dim()), hidden_(hidden) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    auto mat = [&](int r, int c) {
      std::vector<double> v(static_cast<std::size_t>(r) * c);
      for (double& x : v) x = init_rng.uniform(-bound, bound);
      return Tensor::from({r, c}, std::move(v));
    };
    const char* dirs[2] = {"fw", "bw"};
    static const char* gates[4] = {"i", "f", "o", "c"};
    for (int d = 0; d < 2; ++d) {
      for (int gi = 0; gi < 4; ++gi) {
        const std::string base = std::string("enc/") + dirs[d] + "/" + gates[gi];
        wx_[d][gi] = params.add(base + "/Wx", mat(input_, hidden_), /*decay=*/true);
        wh_[d][gi] = params.add(base + "/Wh", mat(hidden_, hidden_), /*decay=*/true);
        // forget gate bias starts at 1
        wb_[d][gi] = params.add(base + "/b", Tensor::full({1, hidden_}, gi == 1 ? 1.0 : 0.0),
                                /*decay=*/false);
      }
    }
    if (!table.is_random()) {
      std::vector<double> unk = table.unk_init();
      unk_ = params.add("enc/unk", Tensor::from({1, input_}, std::move(unk)), /*decay=*/false);
      has_unk_ = true;
    }
  }

  int output_dim() const { return 2 * hidden_; }
  int hidden() const { return hidden_; }
  const EmbeddingTable& table() const { return *table_; }

  Tensor token_vector(const std::string& token) const {
    if (!table_->contains(token)) return unk_;
    return Tensor::from({1, input_}, table_->row(token));
  }

  // [1 x 2*hidden] vector for one token sequence.
  Tensor encode_tokens(const std::vector<std::string>& tokens) const {
    if (tokens.empty()) throw ContractError("encode_tokens: empty token list");
    std::vector<Tensor> xs;
    xs.reserve(tokens.size());
    for (const std::string& t : tokens) xs.push_back(token_vector(t));
    Tensor fwd = run_direction(xs, 0, /*reversed=*/false);
    Tensor bwd = run_direction(xs, 1, /*reversed=*/true);
    return concat({fwd, bwd}, 1);
  }

  Tensor encode_post(const std::string& text) const { return encode_tokens(tokenize(text)); }

  // Node-feature matrix X: row 0 is the claim, responses follow in canonical
  // order. Each row depends only on its own post's tokens.
  Tensor encode_event(const Event& e) const {
    std::vector<Tensor> rows;
    rows.reserve(e.post_count());
    for (std::size_t i = 0; i < e.post_count(); ++i) rows.push_back(encode_post(e.post(i).text));
    return concat(rows, 0);
  }

 private:
  Tensor run_direction(const std::vector<Tensor>& xs, int dir, bool reversed) const {
    Tensor h = Tensor::zeros({1, hidden_});
    Tensor c = Tensor::zeros({1, hidden_});
    const std::size_t n = xs.size();
    for (std::size_t step = 0; step < n; ++step) {
      const Tensor& x = xs[reversed ? n - 1 - step : step];
      Tensor ig = sigmoid(gate_preact(x, h, dir, 0));
      Tensor fg = sigmoid(gate_preact(x, h, dir, 1));
      Tensor og = sigmoid(gate_preact(x, h, dir, 2));
      Tensor cand = claimgat::tanh(gate_preact(x, h, dir, 3));
      c = add(hadamard(fg, c), hadamard(ig, cand));
      h = hadamard(og, claimgat::tanh(c));
    }
    return h;
  }

  Tensor gate_preact(const Tensor& x, const Tensor& h, int dir, int gate) const {
    return add(add(matmul(x, wx_[dir][gate]), matmul(h, wh_[dir][gate])), wb_[dir][gate]);
  }

  const EmbeddingTable* table_ = nullptr;
  int input_ = 0;
  int hidden_ = 0;
  Tensor wx_[2][4], wh_[2][4], wb_[2][4];
  Tensor unk_;
  bool has_unk_ = false;
};

}  // namespace claimgat
