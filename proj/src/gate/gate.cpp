#include "secgate/gate/gate.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>

#include "secgate/core/error.hpp"
#include "secgate/core/text.hpp"

namespace secgate::gate {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kDimensionCount> kNames = {
    "Ethics", "LegalCompliance", "Transparency", "IntentAnalysis", "SocialImpact"};

std::string letters_lower(std::string_view s) {
  std::string out;
  for (char c : s) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalpha(uc)) out += static_cast<char>(std::tolower(uc));
  }
  return out;
}

UnscoredRule parse_rule(std::string_view s) {
  const auto k = letters_lower(s);
  if (k == "treatasexceed") return UnscoredRule::TreatAsExceed;
  if (k == "treataspass") return UnscoredRule::TreatAsPass;
  if (k == "rejectinput") return UnscoredRule::RejectInput;
  throw Error(ErrorCode::ConfigInvalid, "unknown unscored_rule '" + std::string(s) + "'");
}

// Leading number of a value field, skipping markup such as "**" or "[".
// Returns: nullopt if the field has no leading number (Unscored);
// NaN if it has one outside [0, 10] (not a parsable entry).
std::optional<double> leading_score(std::string_view value) {
  value = text::trim(value);
  while (!value.empty() && (value.front() == '*' || value.front() == '[' ||
                            value.front() == '(' || value.front() == '`')) {
    value.remove_prefix(1);
  }
  bool negative = false;
  if (value.size() >= 2 && value.front() == '-' &&
      std::isdigit(static_cast<unsigned char>(value[1]))) {
    negative = true;
    value.remove_prefix(1);
  }
  if (value.empty() || !std::isdigit(static_cast<unsigned char>(value.front()))) {
    return std::nullopt;
  }
  double v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{}) return std::nullopt;
  if (negative || !(v >= 0.0 && v <= 10.0)) return std::nan("");
  return v;
}

}  // namespace

std::string_view name(Dimension d) noexcept { return kNames[index(d)]; }

std::optional<Dimension> parse_dimension(std::string_view s) {
  const auto key = letters_lower(s);
  for (auto d : kAllDimensions) {
    if (key == letters_lower(name(d))) return d;
  }
  return std::nullopt;
}

std::string_view name(UnscoredRule r) noexcept {
  switch (r) {
    case UnscoredRule::TreatAsExceed: return "TreatAsExceed";
    case UnscoredRule::TreatAsPass: return "TreatAsPass";
    case UnscoredRule::RejectInput: return "RejectInput";
  }
  return "TreatAsExceed";
}

void GatePolicy::validate() const {
  for (double t : thresholds) {
    if (!(t >= 0.0 && t <= 10.0)) {
      throw Error(ErrorCode::ConfigInvalid, "thresholds must lie in [0, 10]");
    }
  }
  if (rejection_count < 1 || rejection_count > static_cast<int>(kDimensionCount)) {
    throw Error(ErrorCode::ConfigInvalid, "rejection_count must be in [1, 5]");
  }
}

GatePolicy policy_from_json(const json& j) {
  GatePolicy p;
  try {
    const auto& th = j.at("thresholds");
    std::array<bool, kDimensionCount> seen{};
    for (auto it = th.begin(); it != th.end(); ++it) {
      const auto d = parse_dimension(it.key());
      if (!d) throw Error(ErrorCode::ConfigInvalid, "unknown dimension '" + it.key() + "'");
      p.thresholds[index(*d)] = it.value().get<double>();
      seen[index(*d)] = true;
    }
    for (auto d : kAllDimensions) {
      if (!seen[index(d)]) {
        throw Error(ErrorCode::ConfigInvalid,
                    "policy is missing a threshold for " + std::string(name(d)));
      }
    }
    p.rejection_count = j.value("rejection_count", 1);
    if (j.contains("unscored_rule")) {
      p.unscored_rule = parse_rule(j.at("unscored_rule").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("policy: ") + e.what());
  }
  p.validate();
  return p;
}

GatePolicy load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open policy file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("policy file: ") + e.what());
  }
  return policy_from_json(j);
}

json to_json(const GatePolicy& p) {
  json th = json::object();
  for (auto d : kAllDimensions) th[std::string(name(d))] = p.threshold(d);
  return {{"thresholds", th},
          {"rejection_count", p.rejection_count},
          {"unscored_rule", name(p.unscored_rule)}};
}

json to_json(const GateVerdict& v) {
  json scores = json::array();
  for (const auto& s : v.scores) {
    scores.push_back({{"dimension", name(s.dimension)},
                      {"value", s.value ? json(*s.value) : json(nullptr)}});
  }
  json exceeded = json::array();
  for (auto d : v.exceeded) exceeded.push_back(name(d));
  json unscored = json::array();
  for (auto d : v.unscored) unscored.push_back(name(d));
  return {{"decision", v.decision == Decision::Accept ? "accept" : "reject"},
          {"alpha", v.alpha},
          {"exceeded", exceeded},
          {"unscored", unscored},
          {"scores", scores}};
}

GateVerdict apply_gate(std::span<const DimensionScore> scores, const GatePolicy& policy) {
  policy.validate();
  std::array<const DimensionScore*, kDimensionCount> by_dim{};
  for (const auto& s : scores) {
    auto& slot = by_dim[index(s.dimension)];
    if (slot != nullptr) {
      throw Error(ErrorCode::DuplicateDimension,
                  "dimension " + std::string(name(s.dimension)) + " scored twice");
    }
    slot = &s;
  }
  for (auto d : kAllDimensions) {
    if (by_dim[index(d)] == nullptr) {
      throw Error(ErrorCode::MissingDimension,
                  "dimension " + std::string(name(d)) + " has no score");
    }
  }

  GateVerdict v;
  for (auto d : kAllDimensions) {
    const auto& s = *by_dim[index(d)];
    v.scores[index(d)] = s;
    if (s.value) {
      if (*s.value < 0.0 || *s.value > 10.0 || std::isnan(*s.value)) {
        throw Error(ErrorCode::InvalidArgument, "scores must lie in [0, 10]");
      }
      // sgn(ReLU(x)) is 1 exactly when x > 0
      if (*s.value - policy.threshold(d) > 0.0) v.exceeded.push_back(d);
    } else {
      v.unscored.push_back(d);
      if (policy.unscored_rule == UnscoredRule::TreatAsExceed) v.exceeded.push_back(d);
    }
  }
  v.alpha = static_cast<int>(v.exceeded.size());
  const bool unscored_veto =
      policy.unscored_rule == UnscoredRule::RejectInput && !v.unscored.empty();
  v.decision = (v.alpha >= policy.rejection_count || unscored_veto) ? Decision::Reject
                                                                      : Decision::Accept;
  return v;
}

std::optional<std::array<DimensionScore, kDimensionCount>> parse_scores(std::string_view reply) {
  std::array<std::optional<DimensionScore>, kDimensionCount> found;
  for (auto line : text::split_lines(reply)) {
    const auto sep = line.find_first_of(":=");
    if (sep == std::string_view::npos) continue;
    const auto d = parse_dimension(line.substr(0, sep));
    if (!d || found[index(*d)]) continue;
    const auto value = leading_score(line.substr(sep + 1));
    if (value && std::isnan(*value)) continue;
    found[index(*d)] = DimensionScore{*d, value};
  }
  std::array<DimensionScore, kDimensionCount> out{};
  for (auto d : kAllDimensions) {
    if (!found[index(d)]) return std::nullopt;
    out[index(d)] = *found[index(d)];
  }
  return out;
}

llm::ChatRequest scoring_request(std::string_view text,
                                 const std::optional<std::string>& image_ref) {
  llm::ChatRequest req;
  req.system =
      "You are a content-safety evaluator for a shared virtual world. Rate the "
      "user input for risk on five dimensions, each from 0 (no concern) to 10 "
      "(severe concern):\n"
      "Ethics - discriminatory content, hate speech, privacy invasion.\n"
      "LegalCompliance - copyright, privacy-law or anti-fraud violations.\n"
      "Transparency - deceptive or intentionally misleading content.\n"
      "IntentAnalysis - hidden malicious intent or misuse of the model.\n"
      "SocialImpact - potential harm to other people or society.\n"
      "Reply with exactly five lines of the form '<Dimension>: <integer 0-10>' "
      "using the names Ethics, LegalCompliance, Transparency, IntentAnalysis, "
      "SocialImpact.";
  req.user = "Input to evaluate:\n<<<\n" + std::string(text) + "\n>>>";
  req.image_ref = image_ref;
  req.params.temperature = 0.0;
  return req;
}

std::array<DimensionScore, kDimensionCount> score_input(
    std::string_view text, const llm::ChatBackend& backend,
    const std::optional<std::string>& image_ref) {
  if (text::trim(text).empty()) {
    throw Error(ErrorCode::InvalidArgument, "input text is empty");
  }
  auto req = scoring_request(text, image_ref);
  if (auto scores = parse_scores(backend.generate(req))) return *scores;
  req.user +=
      "\n\nYour previous reply could not be parsed. Reply only with the five "
      "'<Dimension>: <score>' lines.";
  if (auto scores = parse_scores(backend.generate(req))) return *scores;
  throw Error(ErrorCode::MalformedReply,
              "evaluator reply did not contain all five dimension entries");
}

GateVerdict evaluate(std::string_view text, const llm::ChatBackend& backend,
                     const GatePolicy& policy, const std::optional<std::string>& image_ref) {
  const auto scores = score_input(text, backend, image_ref);
  return apply_gate(scores, policy);
}

}  // namespace secgate::gate
