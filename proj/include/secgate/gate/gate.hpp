#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "secgate/llm/backend.hpp"

namespace secgate::gate {

// Canonical order matches the evaluation table columns.
enum class Dimension { Ethics, LegalCompliance, Transparency, IntentAnalysis, SocialImpact };

inline constexpr std::size_t kDimensionCount = 5;
inline constexpr std::array<Dimension, kDimensionCount> kAllDimensions = {
    Dimension::Ethics, Dimension::LegalCompliance, Dimension::Transparency,
    Dimension::IntentAnalysis, Dimension::SocialImpact};

std::string_view name(Dimension d) noexcept;
std::optional<Dimension> parse_dimension(std::string_view s);

inline std::size_t index(Dimension d) noexcept { return static_cast<std::size_t>(d); }

// Risk severity in [0, 10]; 0 means no concern. An empty value is Unscored,
// which is never the same thing as 0.
struct DimensionScore {
  Dimension dimension;
  std::optional<double> value;

  bool scored() const noexcept { return value.has_value(); }
  bool operator==(const DimensionScore&) const = default;
};

enum class UnscoredRule { TreatAsExceed, TreatAsPass, RejectInput };

std::string_view name(UnscoredRule r) noexcept;

struct GatePolicy {
  std::array<double, kDimensionCount> thresholds{5, 5, 5, 5, 5};
  int rejection_count = 1;
  UnscoredRule unscored_rule = UnscoredRule::TreatAsExceed;

  // Throws ConfigInvalid.
  void validate() const;
  double threshold(Dimension d) const { return thresholds[index(d)]; }
};

GatePolicy policy_from_json(const nlohmann::json& j);
GatePolicy load_policy(const std::string& path);
nlohmann::json to_json(const GatePolicy& p);

enum class Decision { Accept, Reject };

struct GateVerdict {
  std::array<DimensionScore, kDimensionCount> scores;  // canonical order
  int alpha = 0;
  std::vector<Dimension> exceeded;  // canonical order
  std::vector<Dimension> unscored;
  Decision decision = Decision::Accept;

  bool operator==(const GateVerdict&) const = default;
};

nlohmann::json to_json(const GateVerdict& v);

// Applies the threshold count: dimension i counts when v_i - tau_i > 0
// (equality does not count); Unscored entries follow the policy's rule.
// Throws DuplicateDimension / MissingDimension.
GateVerdict apply_gate(std::span<const DimensionScore> scores, const GatePolicy& policy);

// Reply parser: one "<Dimension>: <score>" entry per line, case-insensitive,
// tolerant of prose around it. A named dimension with no number is Unscored.
// Returns nullopt unless all five dimensions are present.
std::optional<std::array<DimensionScore, kDimensionCount>> parse_scores(std::string_view reply);

llm::ChatRequest scoring_request(std::string_view text,
                                 const std::optional<std::string>& image_ref = std::nullopt);

// Queries the evaluator backend; retries once on an unparsable reply.
// Throws InvalidArgument (blank text), MalformedReply, or backend errors.
std::array<DimensionScore, kDimensionCount> score_input(
    std::string_view text, const llm::ChatBackend& backend,
    const std::optional<std::string>& image_ref = std::nullopt);

GateVerdict evaluate(std::string_view text, const llm::ChatBackend& backend,
                     const GatePolicy& policy,
                     const std::optional<std::string>& image_ref = std::nullopt);

}  // namespace secgate::gate
