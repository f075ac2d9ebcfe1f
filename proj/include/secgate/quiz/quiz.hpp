#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "secgate/qa_pair.hpp"

namespace secgate::quiz {

// One multiple-choice item. Question text, topic and suggestion are copied
// from the source pair so a stored session is self-contained.
struct QuizItem {
  std::string question_id;
  std::string question;
  std::string topic;
  std::string suggestion;
  std::vector<std::string> options;
  std::size_t correct_index = 0;

  bool operator==(const QuizItem&) const = default;
};

struct WrongRecord {
  std::size_t item_index;
  std::string question_id;
  std::size_t chosen;
  std::int64_t timestamp_ms;  // unix epoch

  bool operator==(const WrongRecord&) const = default;
};

struct QuizSession {
  std::string session_id;
  std::uint64_t seed = 0;
  std::vector<QuizItem> items;
  std::map<std::size_t, std::size_t> responses;  // item index -> chosen option
  std::vector<WrongRecord> wrong_records;

  bool operator==(const QuizSession&) const = default;
};

struct GradeResult {
  bool correct = false;
  std::optional<std::string> suggestion;
};

struct WrongAnswer {
  std::string question_id;
  std::string question;
  std::string chosen;
  std::string correct;
  std::string suggestion;
};

struct TopicAccuracy {
  std::size_t answered = 0;
  std::size_t correct = 0;
  double accuracy() const { return answered ? static_cast<double>(correct) / answered : 0.0; }
};

struct SessionReport {
  std::size_t answered = 0;
  std::size_t correct = 0;
  double score = 0.0;  // correct / answered; 0 when nothing was answered
  std::vector<WrongAnswer> wrong;
  std::map<std::string, TopicAccuracy> by_topic;
};

struct Feedback {
  std::optional<std::string> session_id;
  std::string content_ref;
  int rating = 0;  // 1..5
  std::string comment;
};

// Corpus is JSON-lines with id/question/answer/topic/suggestion. Blank lines
// are skipped. Throws Io, MalformedLineError, DuplicateId.
std::vector<QAPair> load_corpus(const std::string& path);
std::vector<QAPair> parse_corpus(const std::string& jsonl);
std::string to_jsonl(const std::vector<QAPair>& pairs);

// Samples n questions without replacement and k-1 distractors per item from
// the distinct answers other than the correct one, then shuffles options.
// Throws InvalidArgument (k < 2, n == 0) or CorpusTooSmall.
QuizSession make_quiz(const std::vector<QAPair>& corpus, std::size_t n, std::size_t k,
                      std::uint64_t seed);

// Scores the learner's choice. Wrong answers are appended to wrong_records.
// Throws OutOfRange or AlreadyAnswered; leaves the session untouched on error.
GradeResult grade(QuizSession& session, std::size_t item_index, std::size_t choice,
                  std::optional<std::int64_t> timestamp_ms = std::nullopt);

SessionReport session_report(const QuizSession& session);

// Throws InvalidArgument when the rating is outside 1..5 or content_ref is empty.
void validate(const Feedback& f);

nlohmann::json to_json(const QuizSession& s);
QuizSession session_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SessionReport& r);
nlohmann::json to_json(const Feedback& f);
Feedback feedback_from_json(const nlohmann::json& j);

// Learner-facing view: no correct_index for unanswered items.
nlohmann::json public_view(const QuizSession& s);

}  // namespace secgate::quiz
