#include "secgate/vet/trainer.hpp"

#include <cmath>

#include "secgate/core/error.hpp"
#include "secgate/core/rng.hpp"

namespace secgate::vet {

namespace {

struct AdamState {
  std::vector<double> m, v;
};

void step_tensor(std::vector<float>& param, const std::vector<double>& grad, AdamState& state,
                 const TrainConfig& cfg, std::size_t t) {
  const auto& opt = cfg.optimizer;
  if (opt.kind == OptimizerConfig::Kind::Sgd) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      param[i] = static_cast<float>(param[i] - cfg.learning_rate * grad[i]);
    }
    return;
  }
  if (state.m.empty()) {
    state.m.assign(param.size(), 0.0);
    state.v.assign(param.size(), 0.0);
  }
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    state.m[i] = opt.beta1 * state.m[i] + (1.0 - opt.beta1) * grad[i];
    state.v[i] = opt.beta2 * state.v[i] + (1.0 - opt.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    param[i] = static_cast<float>(param[i] - cfg.learning_rate * mhat / (std::sqrt(vhat) + opt.epsilon));
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning_rate must be positive");
  if (batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch_size must be positive");
  if (optimizer.kind == OptimizerConfig::Kind::Adam &&
      !(optimizer.beta1 >= 0 && optimizer.beta1 < 1 && optimizer.beta2 >= 0 &&
        optimizer.beta2 < 1 && optimizer.epsilon > 0)) {
    throw Error(ErrorCode::InvalidArgument, "Adam needs beta1, beta2 in [0,1) and epsilon > 0");
  }
}

nlohmann::json to_json(const TrainReport& r) {
  return {{"loss_curve", r.loss_curve},
          {"initial_heldout_nll", r.initial_heldout_nll},
          {"final_heldout_nll", r.final_heldout_nll},
          {"frozen_checksum_before", r.frozen_checksum_before},
          {"frozen_checksum_after", r.frozen_checksum_after},
          {"units", "nats/token"}};
}

double heldout_nll(const VetModel& model, const std::vector<TokenId>& stream) {
  const std::size_t C = model.dims().context;
  if (stream.size() < C + 1) {
    throw Error(ErrorCode::InvalidArgument, "held-out stream shorter than C+1 tokens");
  }
  std::vector<std::vector<TokenId>> windows;
  for (std::size_t start = 0; start + 1 < stream.size(); start += C) {
    const std::size_t end = std::min(stream.size(), start + C + 1);
    windows.emplace_back(stream.begin() + static_cast<std::ptrdiff_t>(start),
                         stream.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return model.loss(windows);
}

TrainReport train(VetModel& model, const std::vector<TokenId>& corpus,
                  const std::vector<TokenId>& heldout, const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t C = model.dims().context;
  if (corpus.size() < C + 1) {
    throw Error(ErrorCode::InvalidArgument, "training stream shorter than C+1 tokens");
  }
  if (!model.body().frozen) {
    throw Error(ErrorCode::InvalidArgument, "model body must be frozen");
  }

  TrainReport report;
  report.frozen_checksum_before = model.body().digest();
  report.initial_heldout_nll = heldout_nll(model, heldout);

  Rng rng(cfg.seed);
  AdamState embed_state, project_state;
  Gradients grads;
  std::vector<std::vector<TokenId>> batch(cfg.batch_size);
  const std::size_t max_start = corpus.size() - (C + 1);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    for (auto& seq : batch) {
      const auto start = static_cast<std::ptrdiff_t>(rng.below(max_start + 1));
      seq.assign(corpus.begin() + start, corpus.begin() + start + static_cast<std::ptrdiff_t>(C + 1));
    }
    const double loss = model.loss_and_grads(batch, grads);
    if (!std::isfinite(loss)) throw NonFiniteLossError(step);
    report.loss_curve.push_back(loss);
    step_tensor(model.embed(), grads.embed, embed_state, cfg, step + 1);
    step_tensor(model.project(), grads.project, project_state, cfg, step + 1);
  }

  report.final_heldout_nll = cfg.steps == 0 ? report.initial_heldout_nll : heldout_nll(model, heldout);
  report.frozen_checksum_after = model.body().digest();
  return report;
}

TrainReport train(VetModel& model, const Tokenizer& tok, const std::string& corpus,
                  const std::string& heldout, const TrainConfig& cfg) {
  return train(model, tok.encode(corpus), tok.encode(heldout), cfg);
}

}  // namespace secgate::vet
