#pragma once

// Independent reference computations shared by unit tests and the acceptance
// binary. None of these call into the code they check.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "secgate/quiz/quiz.hpp"
#include "secgate/vet/model.hpp"

namespace oracle {

// |{i : v_i > tau_i}|
inline int count_exceeded(const std::vector<double>& v, const std::vector<double>& tau) {
  int n = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > tau[i]) ++n;
  }
  return n;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::size_t worst_index = 0;
  std::string worst_tensor;
};

// Central differences over every embed and project coordinate. The realised
// step is taken from the float32 parameter itself, since x+h rounds.
inline GradCheck finite_difference_check(secgate::vet::VetModel model,
                                         const std::vector<std::vector<secgate::vet::TokenId>>& batch,
                                         double h = 1e-4) {
  secgate::vet::Gradients g;
  model.loss_and_grads(batch, g);
  GradCheck out;
  auto sweep = [&](std::vector<float>& params, const std::vector<double>& analytic,
                   const char* tensor) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const float orig = params[i];
      const float up = static_cast<float>(orig + h);
      const float down = static_cast<float>(orig - h);
      params[i] = up;
      const double lp = model.loss(batch);
      params[i] = down;
      const double lm = model.loss(batch);
      params[i] = orig;
      const double numeric = (lp - lm) / (static_cast<double>(up) - static_cast<double>(down));
      const double rel = std::abs(analytic[i] - numeric) / (std::abs(analytic[i]) + 1e-8);
      ++out.coordinates;
      if (rel > out.max_rel_error) {
        out.max_rel_error = rel;
        out.worst_index = i;
        out.worst_tensor = tensor;
      }
    }
  };
  sweep(model.embed(), g.embed, "embed");
  sweep(model.project(), g.project, "project");
  return out;
}

// Returns a description of the first violated item invariant, if any.
inline std::optional<std::string> item_violation(const secgate::quiz::QuizItem& item,
                                                 const std::vector<secgate::QAPair>& corpus,
                                                 std::size_t k) {
  const auto src = std::find_if(corpus.begin(), corpus.end(),
                                [&](const auto& p) { return p.id == item.question_id; });
  if (src == corpus.end()) return "unknown question id " + item.question_id;
  if (item.options.size() != k) return "wrong option count";
  if (item.correct_index >= k) return "correct_index out of range";
  if (item.options[item.correct_index] != src->answer) return "correct option is not the answer";
  std::set<std::string> distinct(item.options.begin(), item.options.end());
  if (distinct.size() != k) return "options not distinct";
  std::set<std::string> answers;
  for (const auto& p : corpus) answers.insert(p.answer);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (item.options[i] == src->answer) ++matches;
    if (i != item.correct_index &&
        (item.options[i] == src->answer || answers.count(item.options[i]) == 0)) {
      return "distractor outside the answer set minus the correct answer";
    }
  }
  if (matches != 1) return "not exactly one correct option";
  return std::nullopt;
}

struct Recount {
  std::size_t answered = 0;
  std::size_t correct = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> by_topic;  // answered, correct
  std::set<std::size_t> wrong_items;
};

inline Recount recount(const secgate::quiz::QuizSession& s) {
  Recount r;
  for (std::size_t i = 0; i < s.items.size(); ++i) {
    const auto it = s.responses.find(i);
    if (it == s.responses.end()) continue;
    ++r.answered;
    auto& t = r.by_topic[s.items[i].topic];
    ++t.first;
    if (it->second == s.items[i].correct_index) {
      ++r.correct;
      ++t.second;
    } else {
      r.wrong_items.insert(i);
    }
  }
  return r;
}

}  // namespace oracle
