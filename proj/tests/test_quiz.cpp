#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "secgate/core/error.hpp"
#include "secgate/quiz/quiz.hpp"
#include "support.hpp"

using namespace secgate;
using namespace secgate::quiz;

namespace {

const std::vector<QAPair>& seed_corpus() {
  static const auto corpus =
      load_corpus((testsupport::source_dir() / "data/corpus/seed_qa.jsonl").string());
  return corpus;
}

std::vector<QAPair> small_corpus() {
  return {{"q1", "Q one", "A one", "t1", "S one"},
          {"q2", "Q two", "A two", "t1", "S two"},
          {"q3", "Q three", "A three", "t2", "S three"},
          {"q4", "Q four", "A four", "t2", "S four"},
          {"q5", "Q five", "A five", "t2", "S five"}};
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Corpus, BundledSeedLoads) {
  const auto lines = testsupport::read_lines(testsupport::source_dir() / "data/corpus/seed_qa.jsonl");
  EXPECT_EQ(seed_corpus().size(), lines.size());
  EXPECT_EQ(seed_corpus().size(), 50u);
  for (const auto& p : seed_corpus()) {
    EXPECT_FALSE(p.question.empty());
    EXPECT_FALSE(p.answer.empty());
  }
}

TEST(Corpus, EmptyMalformedDuplicate) {
  EXPECT_TRUE(parse_corpus("").empty());
  EXPECT_TRUE(parse_corpus("\n\n").empty());
  try {
    parse_corpus(R"({"id":"a","question":"q","answer":"x"})" "\n"
                 R"({"id":"b","question":"q"})" "\n");
    FAIL();
  } catch (const MalformedLineError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_EQ(code_of([] {
              parse_corpus(R"({"id":"a","question":"q","answer":"x"})" "\n"
                           R"({"id":"a","question":"r","answer":"y"})");
            }),
            ErrorCode::DuplicateId);
  EXPECT_EQ(code_of([] { load_corpus("/nonexistent/corpus.jsonl"); }), ErrorCode::Io);
}

TEST(Corpus, JsonlRoundTrip) {
  EXPECT_EQ(parse_corpus(to_jsonl(seed_corpus())), seed_corpus());
}

TEST(MakeQuiz, ExhaustsCorpus) {
  const auto s = make_quiz(small_corpus(), 5, 3, 1);
  std::set<std::string> ids;
  for (const auto& it : s.items) ids.insert(it.question_id);
  EXPECT_EQ(ids.size(), 5u);
}

TEST(MakeQuiz, SeededDeterminism) {
  EXPECT_EQ(make_quiz(seed_corpus(), 5, 4, 42), make_quiz(seed_corpus(), 5, 4, 42));
}

TEST(MakeQuiz, DistinctSeedsDiffer) {
  int differing = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = make_quiz(seed_corpus(), 10, 4, 1000 + s);
    const auto b = make_quiz(seed_corpus(), 10, 4, 2000 + s);
    for (std::size_t i = 0; i < a.items.size(); ++i) {
      if (!(a.items[i] == b.items[i])) {
        ++differing;
        break;
      }
    }
  }
  EXPECT_GE(differing, 1);
}

TEST(MakeQuiz, InvariantsOverRandomSessions) {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng() % 20;
    const std::size_t k = 2 + rng() % 5;
    const auto s = make_quiz(seed_corpus(), n, k, rng());
    ASSERT_EQ(s.items.size(), n);
    for (const auto& item : s.items) {
      const auto v = oracle::item_violation(item, seed_corpus(), k);
      EXPECT_FALSE(v.has_value()) << *v;
    }
  }
}

TEST(MakeQuiz, DuplicateAnswersNeverDistractors) {
  auto corpus = small_corpus();
  corpus[1].answer = corpus[0].answer;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = make_quiz(corpus, 5, 3, seed);
    for (const auto& item : s.items) {
      EXPECT_FALSE(oracle::item_violation(item, corpus, 3).has_value());
    }
  }
}

TEST(MakeQuiz, Errors) {
  EXPECT_EQ(code_of([] { make_quiz(small_corpus(), 6, 2, 1); }), ErrorCode::CorpusTooSmall);
  EXPECT_EQ(code_of([] { make_quiz(small_corpus(), 2, 6, 1); }), ErrorCode::CorpusTooSmall);
  EXPECT_EQ(code_of([] { make_quiz(small_corpus(), 2, 1, 1); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { make_quiz(small_corpus(), 0, 2, 1); }), ErrorCode::InvalidArgument);
  auto same = small_corpus();
  for (auto& p : same) p.answer = "same";
  EXPECT_EQ(code_of([&] { make_quiz(same, 2, 2, 1); }), ErrorCode::CorpusTooSmall);
}

TEST(Grade, CorrectWrongTwice) {
  auto s = make_quiz(small_corpus(), 3, 3, 9);
  const auto items = s.items;
  const auto ok = grade(s, 0, s.items[0].correct_index);
  EXPECT_TRUE(ok.correct);
  EXPECT_FALSE(ok.suggestion.has_value());
  EXPECT_TRUE(s.wrong_records.empty());

  const std::size_t wrong = (s.items[1].correct_index + 1) % 3;
  const auto bad = grade(s, 1, wrong, 12345);
  EXPECT_FALSE(bad.correct);
  EXPECT_EQ(bad.suggestion, s.items[1].suggestion);
  ASSERT_EQ(s.wrong_records.size(), 1u);
  EXPECT_EQ(s.wrong_records[0],
            (WrongRecord{1, s.items[1].question_id, wrong, 12345}));

  const auto snapshot = s;
  EXPECT_EQ(code_of([&] { grade(s, 1, 0); }), ErrorCode::AlreadyAnswered);
  EXPECT_EQ(code_of([&] { grade(s, 2, 3); }), ErrorCode::OutOfRange);
  EXPECT_EQ(code_of([&] { grade(s, 7, 0); }), ErrorCode::OutOfRange);
  EXPECT_EQ(s, snapshot);
  EXPECT_EQ(s.items, items);
}

TEST(Report, ArithmeticCases) {
  auto s = make_quiz(small_corpus(), 5, 3, 4);
  for (std::size_t i = 0; i < 5; ++i) grade(s, i, s.items[i].correct_index);
  auto r = session_report(s);
  EXPECT_DOUBLE_EQ(r.score, 1.0);
  EXPECT_TRUE(r.wrong.empty());

  auto p = make_quiz(small_corpus(), 5, 3, 4);
  grade(p, 0, p.items[0].correct_index);
  grade(p, 2, p.items[2].correct_index);
  grade(p, 4, (p.items[4].correct_index + 1) % 3);
  r = session_report(p);
  EXPECT_EQ(r.answered, 3u);
  EXPECT_DOUBLE_EQ(r.score, 2.0 / 3.0);
  ASSERT_EQ(r.wrong.size(), 1u);
  EXPECT_EQ(r.wrong[0].suggestion, p.items[4].suggestion);
  EXPECT_EQ(r.wrong[0].correct, p.items[4].options[p.items[4].correct_index]);

  EXPECT_DOUBLE_EQ(session_report(make_quiz(small_corpus(), 2, 2, 1)).score, 0.0);
}

TEST(Report, MatchesRecountOracle) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 100; ++t) {
    auto s = make_quiz(seed_corpus(), 1 + rng() % 15, 4, rng());
    for (std::size_t i = 0; i < s.items.size(); ++i) {
      if (rng() % 3 == 0) continue;
      grade(s, i, rng() % 4);
    }
    const auto r = session_report(s);
    const auto o = oracle::recount(s);
    EXPECT_EQ(r.answered, o.answered);
    EXPECT_EQ(r.correct, o.correct);
    EXPECT_DOUBLE_EQ(r.score, o.answered ? static_cast<double>(o.correct) / o.answered : 0.0);
    ASSERT_EQ(r.by_topic.size(), o.by_topic.size());
    for (const auto& [topic, counts] : o.by_topic) {
      EXPECT_EQ(r.by_topic.at(topic).answered, counts.first);
      EXPECT_EQ(r.by_topic.at(topic).correct, counts.second);
    }
    std::set<std::size_t> recorded;
    for (const auto& w : s.wrong_records) recorded.insert(w.item_index);
    EXPECT_EQ(recorded, o.wrong_items);
    EXPECT_EQ(s.wrong_records.size(), o.wrong_items.size());
  }
}

TEST(Session, JsonRoundTrip) {
  auto s = make_quiz(seed_corpus(), 6, 4, 5);
  grade(s, 0, 1, 100);
  grade(s, 3, 2, 200);
  EXPECT_EQ(session_from_json(to_json(s)), s);
}

TEST(Session, PublicViewHidesAnswers) {
  auto s = make_quiz(seed_corpus(), 3, 4, 5);
  grade(s, 1, 0);
  const auto v = public_view(s);
  const auto dumped = v.dump();
  EXPECT_EQ(dumped.find("correct_index"), std::string::npos);
  EXPECT_FALSE(v["items"][0].contains("correct"));
  EXPECT_TRUE(v["items"][1].contains("correct"));
  EXPECT_EQ(v["items"][1]["answered"], 0);
}

TEST(Feedback, Validation) {
  EXPECT_NO_THROW(feedback_from_json({{"content_ref", "quiz-1"}, {"rating", 5}}));
  EXPECT_THROW(feedback_from_json({{"content_ref", "quiz-1"}, {"rating", 6}}), Error);
  EXPECT_THROW(feedback_from_json({{"content_ref", "quiz-1"}, {"rating", 0}}), Error);
  EXPECT_THROW(feedback_from_json({{"content_ref", ""}, {"rating", 3}}), Error);
  const auto f = feedback_from_json({{"session_id", "s1"}, {"content_ref", "x"}, {"rating", 2},
                                     {"comment", "ok"}});
  EXPECT_EQ(to_json(f)["session_id"], "s1");
  EXPECT_EQ(to_json(f)["comment"], "ok");
}
