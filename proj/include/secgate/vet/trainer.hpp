#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "secgate/vet/model.hpp"
#include "secgate/vet/tokenizer.hpp"

namespace secgate::vet {

struct OptimizerConfig {
  enum class Kind { Sgd, Adam };
  Kind kind = Kind::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t steps = 500;
  std::size_t batch_size = 4;
  std::uint64_t seed = 0;
  OptimizerConfig optimizer;

  void validate() const;  // throws InvalidArgument
};

struct TrainReport {
  std::vector<double> loss_curve;  // mean NLL per step, nats/token
  double initial_heldout_nll = 0.0;
  double final_heldout_nll = 0.0;
  std::string frozen_checksum_before;
  std::string frozen_checksum_after;
};

nlohmann::json to_json(const TrainReport& r);

// Mean next-token NLL over consecutive windows of C+1 tokens (stride C), so
// every token after the first is predicted once.
double heldout_nll(const VetModel& model, const std::vector<TokenId>& stream);

// Updates only the embedding and projection. Batches are random windows of
// C+1 tokens drawn with `cfg.seed`. Throws InvalidArgument when either stream
// is shorter than C+1 tokens or the body is not marked frozen, and
// NonFiniteLossError on divergence.
TrainReport train(VetModel& model, const std::vector<TokenId>& corpus,
                  const std::vector<TokenId>& heldout, const TrainConfig& cfg);

// Same, tokenizing the text first.
TrainReport train(VetModel& model, const Tokenizer& tok, const std::string& corpus,
                  const std::string& heldout, const TrainConfig& cfg);

}  // namespace secgate::vet
