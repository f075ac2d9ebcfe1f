#include "secgate/quiz/quiz.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "secgate/core/error.hpp"
#include "secgate/core/rng.hpp"
#include "secgate/core/text.hpp"

namespace secgate::quiz {

using nlohmann::json;

std::vector<QAPair> parse_corpus(const std::string& jsonl) {
  std::vector<QAPair> pairs;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::istringstream in(jsonl);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw MalformedLineError(line_no, e.what());
    }
    if (!j.is_object()) throw MalformedLineError(line_no, "expected a JSON object");
    QAPair p;
    for (const char* field : {"id", "question", "answer"}) {
      if (!j.contains(field) || !j[field].is_string() || j[field].get<std::string>().empty()) {
        throw MalformedLineError(line_no, std::string("missing or empty \"") + field + "\"");
      }
    }
    p.id = j["id"].get<std::string>();
    p.question = j["question"].get<std::string>();
    p.answer = j["answer"].get<std::string>();
    if (j.contains("topic") && j["topic"].is_string()) p.topic = j["topic"].get<std::string>();
    if (j.contains("suggestion") && j["suggestion"].is_string()) {
      p.suggestion = j["suggestion"].get<std::string>();
    }
    if (!ids.insert(p.id).second) {
      throw Error(ErrorCode::DuplicateId,
                  "duplicate id '" + p.id + "' on line " + std::to_string(line_no));
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<QAPair> load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open corpus " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str());
}

std::string to_jsonl(const std::vector<QAPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += json{{"id", p.id},
                {"question", p.question},
                {"answer", p.answer},
                {"topic", p.topic},
                {"suggestion", p.suggestion}}
               .dump();
    out += '\n';
  }
  return out;
}

QuizSession make_quiz(const std::vector<QAPair>& corpus, std::size_t n, std::size_t k,
                      std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "k must be at least 2");
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  if (corpus.size() < std::max(n, k)) {
    throw Error(ErrorCode::CorpusTooSmall, "corpus has " + std::to_string(corpus.size()) +
                                               " pairs, need " + std::to_string(std::max(n, k)));
  }

  // X^(a) as distinct strings, in corpus order
  std::vector<std::string> answers;
  std::set<std::string> seen;
  for (const auto& p : corpus) {
    if (seen.insert(p.answer).second) answers.push_back(p.answer);
  }

  Rng rng(seed);
  QuizSession session;
  session.session_id = "quiz-" + text::hex_u64(seed);
  session.seed = seed;
  for (auto qi : rng.sample_indices(corpus.size(), n)) {
    const auto& pair = corpus[qi];
    std::vector<std::size_t> candidates;
    for (std::size_t a = 0; a < answers.size(); ++a) {
      if (answers[a] != pair.answer) candidates.push_back(a);
    }
    if (candidates.size() < k - 1) {
      throw Error(ErrorCode::CorpusTooSmall,
                  "not enough distinct answers for " + std::to_string(k) + " options");
    }
    QuizItem item;
    item.question_id = pair.id;
    item.question = pair.question;
    item.topic = pair.topic;
    item.suggestion = pair.suggestion;
    item.options.push_back(pair.answer);
    for (auto ci : rng.sample_indices(candidates.size(), k - 1)) {
      item.options.push_back(answers[candidates[ci]]);
    }
    rng.shuffle(item.options);
    item.correct_index = static_cast<std::size_t>(
        std::find(item.options.begin(), item.options.end(), pair.answer) - item.options.begin());
    session.items.push_back(std::move(item));
  }
  return session;
}

GradeResult grade(QuizSession& session, std::size_t item_index, std::size_t choice,
                  std::optional<std::int64_t> timestamp_ms) {
  if (item_index >= session.items.size()) {
    throw Error(ErrorCode::OutOfRange, "no item " + std::to_string(item_index));
  }
  const auto& item = session.items[item_index];
  if (choice >= item.options.size()) {
    throw Error(ErrorCode::OutOfRange, "choice " + std::to_string(choice) + " out of range");
  }
  if (session.responses.count(item_index) != 0) {
    throw Error(ErrorCode::AlreadyAnswered, "item " + std::to_string(item_index) + " already answered");
  }
  session.responses[item_index] = choice;
  if (choice == item.correct_index) return {true, std::nullopt};

  const auto now = timestamp_ms.value_or(
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
  session.wrong_records.push_back({item_index, item.question_id, choice, now});
  return {false, item.suggestion};
}

SessionReport session_report(const QuizSession& session) {
  SessionReport r;
  for (const auto& [index, choice] : session.responses) {
    const auto& item = session.items.at(index);
    const bool ok = choice == item.correct_index;
    ++r.answered;
    auto& topic = r.by_topic[item.topic];
    ++topic.answered;
    if (ok) {
      ++r.correct;
      ++topic.correct;
    } else {
      r.wrong.push_back({item.question_id, item.question, item.options[choice],
                         item.options[item.correct_index], item.suggestion});
    }
  }
  r.score = r.answered ? static_cast<double>(r.correct) / static_cast<double>(r.answered) : 0.0;
  return r;
}

void validate(const Feedback& f) {
  if (f.rating < 1 || f.rating > 5) {
    throw Error(ErrorCode::InvalidArgument, "rating must be between 1 and 5");
  }
  if (f.content_ref.empty()) throw Error(ErrorCode::InvalidArgument, "content_ref is required");
}

json to_json(const QuizSession& s) {
  json items = json::array();
  for (const auto& it : s.items) {
    items.push_back({{"question_id", it.question_id},
                     {"question", it.question},
                     {"topic", it.topic},
                     {"suggestion", it.suggestion},
                     {"options", it.options},
                     {"correct_index", it.correct_index}});
  }
  json responses = json::object();
  for (const auto& [i, c] : s.responses) responses[std::to_string(i)] = c;
  json wrong = json::array();
  for (const auto& w : s.wrong_records) {
    wrong.push_back({{"item_index", w.item_index},
                     {"question_id", w.question_id},
                     {"chosen", w.chosen},
                     {"timestamp_ms", w.timestamp_ms}});
  }
  return {{"session_id", s.session_id},
          {"seed", s.seed},
          {"items", items},
          {"responses", responses},
          {"wrong_records", wrong}};
}

QuizSession session_from_json(const json& j) {
  QuizSession s;
  s.session_id = j.at("session_id").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& it : j.at("items")) {
    s.items.push_back({it.at("question_id").get<std::string>(),
                       it.at("question").get<std::string>(),
                       it.value("topic", std::string{}),
                       it.value("suggestion", std::string{}),
                       it.at("options").get<std::vector<std::string>>(),
                       it.at("correct_index").get<std::size_t>()});
  }
  for (auto it = j.at("responses").begin(); it != j.at("responses").end(); ++it) {
    s.responses[std::stoul(it.key())] = it.value().get<std::size_t>();
  }
  for (const auto& w : j.at("wrong_records")) {
    s.wrong_records.push_back({w.at("item_index").get<std::size_t>(),
                               w.at("question_id").get<std::string>(),
                               w.at("chosen").get<std::size_t>(),
                               w.at("timestamp_ms").get<std::int64_t>()});
  }
  return s;
}

json to_json(const SessionReport& r) {
  json wrong = json::array();
  for (const auto& w : r.wrong) {
    wrong.push_back({{"question_id", w.question_id},
                     {"question", w.question},
                     {"chosen", w.chosen},
                     {"correct", w.correct},
                     {"suggestion", w.suggestion}});
  }
  json topics = json::object();
  for (const auto& [name, t] : r.by_topic) {
    topics[name] = {{"answered", t.answered}, {"correct", t.correct}, {"accuracy", t.accuracy()}};
  }
  return {{"answered", r.answered},
          {"correct", r.correct},
          {"score", r.score},
          {"wrong", wrong},
          {"by_topic", topics}};
}

json to_json(const Feedback& f) {
  return {{"session_id", f.session_id ? json(*f.session_id) : json(nullptr)},
          {"content_ref", f.content_ref},
          {"rating", f.rating},
          {"comment", f.comment}};
}

Feedback feedback_from_json(const json& j) {
  Feedback f;
  if (j.contains("session_id") && j["session_id"].is_string()) {
    f.session_id = j["session_id"].get<std::string>();
  }
  f.content_ref = j.value("content_ref", std::string{});
  f.rating = j.value("rating", 0);
  f.comment = j.value("comment", std::string{});
  validate(f);
  return f;
}

json public_view(const QuizSession& s) {
  json items = json::array();
  for (std::size_t i = 0; i < s.items.size(); ++i) {
    const auto& it = s.items[i];
    json view = {{"index", i},
                 {"question_id", it.question_id},
                 {"question", it.question},
                 {"topic", it.topic},
                 {"options", it.options}};
    if (auto r = s.responses.find(i); r != s.responses.end()) {
      view["answered"] = r->second;
      view["correct"] = r->second == it.correct_index;
    }
    items.push_back(std::move(view));
  }
  return {{"session_id", s.session_id}, {"items", items}};
}

}  // namespace secgate::quiz
