#include "secgate/llm/qa.hpp"

#include <cctype>
#include <cstdio>

#include "secgate/core/error.hpp"
#include "secgate/core/text.hpp"

namespace secgate::llm {

namespace {

enum class Field { None, Question, Answer, Suggestion };

std::string slug(std::string_view topic) {
  std::string out;
  for (char c : topic) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      out += static_cast<char>(std::tolower(uc));
    } else if (!out.empty() && out.back() != '-') {
      out += '-';
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out.empty() ? "qa" : out;
}

// Strips "12." / "3)" / "-" / "*" decorations ahead of a field marker.
std::string_view strip_decoration(std::string_view line) {
  line = text::trim(line);
  while (!line.empty() && (line.front() == '*' || line.front() == '-' || line.front() == '#')) {
    line.remove_prefix(1);
  }
  std::size_t i = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) line.remove_prefix(i + 1);
  return text::trim(line);
}

Field marker(std::string_view line, std::string_view& rest) {
  if (line.size() < 2 || line[1] != ':') return Field::None;
  rest = text::trim(line.substr(2));
  switch (std::toupper(static_cast<unsigned char>(line[0]))) {
    case 'Q': return Field::Question;
    case 'A': return Field::Answer;
    case 'S': return Field::Suggestion;
    default: return Field::None;
  }
}

}  // namespace

ChatRequest qa_corpus_request(std::string_view topic, std::size_t n) {
  ChatRequest req;
  req.system =
      "You write training material for a cybersecurity awareness course aimed "
      "at users of virtual worlds and LLM-backed applications.";
  req.user = "Write " + std::to_string(n) +
             " distinct question/answer pairs about: " + std::string(topic) +
             ".\nFormat every pair as a numbered block:\n"
             "1. Q: <question>\n"
             "   A: <one-sentence answer>\n"
             "   S: <one-sentence study suggestion for someone who got it wrong>\n"
             "Do not add any other text.";
  return req;
}

std::vector<QAPair> parse_qa_blocks(std::string_view reply, std::string_view topic) {
  std::vector<QAPair> pairs;
  QAPair current;
  Field field = Field::None;
  const std::string prefix = slug(topic);

  const auto flush = [&] {
    current.question = std::string(text::trim(current.question));
    current.answer = std::string(text::trim(current.answer));
    current.suggestion = std::string(text::trim(current.suggestion));
    if (!current.question.empty() && !current.answer.empty()) {
      char id[16];
      std::snprintf(id, sizeof id, "%03zu", pairs.size() + 1);
      current.id = prefix + "-" + id;
      current.topic = std::string(topic);
      pairs.push_back(std::move(current));
    }
    current = QAPair{};
    field = Field::None;
  };

  for (auto raw : text::split_lines(reply)) {
    std::string_view rest;
    const Field m = marker(strip_decoration(raw), rest);
    if (m == Field::Question) {
      flush();
      current.question = std::string(rest);
      field = Field::Question;
    } else if (m == Field::Answer && field != Field::None) {
      current.answer = std::string(rest);
      field = Field::Answer;
    } else if (m == Field::Suggestion && field != Field::None) {
      current.suggestion = std::string(rest);
      field = Field::Suggestion;
    } else if (text::trim(raw).empty()) {
      continue;
    } else if (field != Field::None) {
      std::string& target = field == Field::Question ? current.question
                            : field == Field::Answer ? current.answer
                                                     : current.suggestion;
      target += ' ';
      target += text::trim(raw);
    }
  }
  flush();
  return pairs;
}

std::vector<QAPair> generate_qa(std::string_view topic, std::size_t n,
                                const ChatBackend& backend) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  auto pairs = parse_qa_blocks(backend.generate(qa_corpus_request(topic, n)), topic);
  if (pairs.empty()) {
    throw Error(ErrorCode::MalformedReply, "no Q/A blocks could be parsed from the reply");
  }
  if (pairs.size() > n) pairs.resize(n);
  return pairs;
}

std::vector<QAPair> generate_qa(std::string_view topic, std::size_t n,
                                const BackendConfig& cfg) {
  return generate_qa(topic, n, *make_backend(cfg));
}

}  // namespace secgate::llm
