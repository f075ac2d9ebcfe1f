#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "secgate/vet/tokenizer.hpp"

namespace secgate::vet {

struct ModelDims {
  std::size_t vocab = 300;   // V
  std::size_t width = 64;    // d
  std::size_t blocks = 2;    // B
  std::size_t context = 64;  // C

  bool operator==(const ModelDims&) const = default;
};

struct ParamInfo {
  std::string name;
  std::size_t count;
  bool trainable;
};

// Offsets of one residual block's tensors inside FrozenBody::params.
struct BlockLayout {
  std::size_t ln1_gain, ln1_bias;
  std::size_t wq, wk, wv, wo;  // d x d each, row-major (in x out)
  std::size_t ln2_gain, ln2_bias;
  std::size_t w1, b1;  // d x 4d, 4d
  std::size_t w2, b2;  // 4d x d, d
};

// Everything between the token embedding and the output projection. Never
// touched by training; the flag is checked by the trainer.
struct FrozenBody {
  std::vector<float> params;
  std::vector<BlockLayout> layout;
  std::size_t lnf_gain = 0, lnf_bias = 0;
  bool frozen = true;

  std::string digest() const;
};

// Gradients of the loss with respect to the trainable tensors only.
struct Gradients {
  std::vector<double> embed;    // V x d
  std::vector<double> project;  // d x V

  static std::vector<std::string> names() { return {"embed", "project"}; }
};

// Tiny decoder-only transformer: token embedding, B pre-norm residual blocks
// (single-head causal attention + GELU MLP), final layer norm, untied output
// projection. Parameters are stored as float32; all arithmetic is double.
class VetModel {
 public:
  static VetModel init(const ModelDims& dims, std::uint64_t seed);

  const ModelDims& dims() const noexcept { return dims_; }
  std::vector<float>& embed() noexcept { return embed_; }
  const std::vector<float>& embed() const noexcept { return embed_; }
  std::vector<float>& project() noexcept { return project_; }
  const std::vector<float>& project() const noexcept { return project_; }
  const FrozenBody& body() const noexcept { return body_; }

  std::vector<ParamInfo> parameters() const;
  std::size_t total_parameters() const;
  std::size_t trainable_parameters() const;

  // Mean next-token NLL (nats) over all causal positions of all sequences.
  // Each sequence needs 2..C+1 tokens, all < V.
  double loss(const std::vector<std::vector<TokenId>>& batch) const;
  double loss_and_grads(const std::vector<std::vector<TokenId>>& batch, Gradients& grads) const;

  // Next-token distribution after `context` (1..C tokens).
  std::vector<double> next_token_distribution(std::span<const TokenId> context) const;

  // Grows the vocabulary: old rows/columns kept bit-exact, new embedding rows
  // are the mean old row plus N(0, 0.01^2) noise, new projection columns are
  // zero. Throws ShrinkNotSupported.
  VetModel resized(std::size_t new_vocab, std::uint64_t seed) const;

  // Flat little-endian float32 file plus a JSON sidecar (path + ".json").
  void save(const std::string& path) const;
  static VetModel load(const std::string& path);

  bool operator==(const VetModel& o) const {
    return dims_ == o.dims_ && embed_ == o.embed_ && project_ == o.project_ &&
           body_.params == o.body_.params;
  }

 private:
  struct Workspace;
  double run(const std::vector<TokenId>& seq, Gradients* grads, double scale,
             Workspace& ws) const;
  void check_batch(const std::vector<std::vector<TokenId>>& batch) const;

  ModelDims dims_;
  std::vector<float> embed_;    // V x d
  FrozenBody body_;
  std::vector<float> project_;  // d x V
};

// Fraction of parameters trained when only the (untied) embedding and output
// projection are learnable: 2*V*d / total. Throws InvalidArgument unless all
// inputs are positive.
double trainable_fraction(double vocab, double width, double total_params);

}  // namespace secgate::vet
