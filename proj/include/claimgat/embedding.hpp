#pragma once

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "claimgat/errors.hpp"
#include "claimgat/rng.hpp"

namespace claimgat {

// Frozen word-vector table. Two modes:
//   file    rows loaded from a text embedding file (token followed by dim
//           reals per line); out-of-vocabulary tokens fall back to a
//           trainable UNK vector owned by the encoder.
//   random  every token gets a deterministic hash-derived vector; there is
//           no out-of-vocabulary case.
class EmbeddingTable {
 public:
  static EmbeddingTable load(const std::string& path, const std::set<std::string>& vocab, int dim,
                             std::uint64_t unk_seed) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open embedding file: " + path);
    EmbeddingTable t;
    t.dim_ = dim;
    t.mode_ = Mode::File;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream iss(line);
      std::string token;
      if (!(iss >> token)) throw ParseError("embedding line " + std::to_string(line_no) + ": missing token");
      if (!vocab.empty() && !vocab.count(token)) continue;
      if (t.vocab_.count(token)) continue;  // first occurrence wins
      std::vector<double> row(static_cast<std::size_t>(dim));
      for (int d = 0; d < dim; ++d)
        if (!(iss >> row[static_cast<std::size_t>(d)]))
          throw ParseError("embedding line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                           " values for token '" + token + "'");
      double extra;
      if (iss >> extra)
        throw DimensionError("embedding line " + std::to_string(line_no) + ": more than " + std::to_string(dim) +
                             " values for token '" + token + "'");
      t.vocab_[token] = static_cast<int>(t.vocab_.size());
      t.tokens_.push_back(token);
      t.matrix_.insert(t.matrix_.end(), row.begin(), row.end());
    }
    Rng rng(unk_seed);
    t.unk_init_.resize(static_cast<std::size_t>(dim));
    for (double& v : t.unk_init_) v = rng.uniform(-0.05, 0.05);
    return t;
  }

  static EmbeddingTable random(int dim, std::uint64_t seed) {
    if (dim < 1) throw ConfigError("random embeddings: dim must be >= 1");
    EmbeddingTable t;
    t.dim_ = dim;
    t.mode_ = Mode::Random;
    t.seed_ = seed;
    return t;
  }

  int dim() const { return dim_; }
  bool is_random() const { return mode_ == Mode::Random; }
  std::uint64_t seed() const { return seed_; }
  std::size_t vocab_size() const { return tokens_.size(); }
  const std::vector<double>& unk_init() const { return unk_init_; }

  bool contains(const std::string& token) const {
    return mode_ == Mode::Random || vocab_.count(token) != 0;
  }

  // Returns the frozen vector for a known token. In random mode the row is
  // synthesized from the token hash, so lookups never fail.
  std::vector<double> row(const std::string& token) const {
    if (mode_ == Mode::Random) {
      Rng rng(token_stream_seed(token, seed_));
      std::vector<double> v(static_cast<std::size_t>(dim_));
      for (double& x : v) x = rng.uniform(-0.5, 0.5);
      return v;
    }
    auto it = vocab_.find(token);
    if (it == vocab_.end()) throw ContractError("EmbeddingTable::row: unknown token '" + token + "'");
    auto begin = matrix_.begin() + static_cast<std::ptrdiff_t>(it->second) * dim_;
    return std::vector<double>(begin, begin + dim_);
  }

  // Full-precision text round-trip (same line format as load()).
  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    char buf[64];
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      out << tokens_[i];
      for (int d = 0; d < dim_; ++d) {
        std::snprintf(buf, sizeof(buf), "%.17g", matrix_[i * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(d)]);
        out << ' ' << buf;
      }
      out << '\n';
    }
  }

  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<double>& matrix() const { return matrix_; }

  // Rebuild a file-mode table from checkpointed contents.
  static EmbeddingTable from_contents(int dim, std::vector<std::string> tokens, std::vector<double> matrix,
                                      std::vector<double> unk_init) {
    EmbeddingTable t;
    t.dim_ = dim;
    t.mode_ = Mode::File;
    t.tokens_ = std::move(tokens);
    t.matrix_ = std::move(matrix);
    t.unk_init_ = std::move(unk_init);
    for (std::size_t i = 0; i < t.tokens_.size(); ++i) t.vocab_[t.tokens_[i]] = static_cast<int>(i);
    return t;
  }

 private:
  enum class Mode { File, Random };
  Mode mode_ = Mode::Random;
  int dim_ = 0;
  std::uint64_t seed_ = 0;
  std::unordered_map<std::string, int> vocab_;
  std::vector<std::string> tokens_;   // index order
  std::vector<double> matrix_;        // vocab x dim
  std::vector<double> unk_init_;
};

}  // namespace claimgat
