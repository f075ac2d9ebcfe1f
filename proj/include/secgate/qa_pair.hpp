#pragma once

#include <string>

namespace secgate {

// One corpus entry: question x^(q), answer x^(a), plus the remediation text
// shown when a learner answers it wrong.
struct QAPair {
  std::string id;
  std::string question;
  std::string answer;
  std::string topic;
  std::string suggestion;

  bool operator==(const QAPair&) const = default;
};

}  // namespace secgate
