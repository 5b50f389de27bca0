#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "quizmaster/errors.hpp"
#include "quizmaster/nlg.hpp"
#include "support.hpp"

using namespace quizmaster;
using quizmaster::testing::shipped;

namespace {

const Question kQ{"CX", {"CX", "MS", "CZ", "AG"}, 0};

AgentAction confirm(const std::string& code) {
  AgentAction a;
  a.act = ActKind::confirm_answer;
  a.candidate = code;
  return a;
}

TemplateSet templates_from(const std::string& json_text) {
  std::istringstream in(json_text);
  return load_templates(in);
}

std::string template_error(const std::string& json_text) {
  try {
    templates_from(json_text);
  } catch (const TemplateError& e) {
    return e.what();
  } catch (const LoadError& e) {
    return std::string("load: ") + e.what();
  }
  return "";
}

// One fully populated action per act.
std::vector<AgentAction> sample_actions() {
  std::vector<AgentAction> out;
  for (int i = 0; i <= static_cast<int>(ActKind::announce_result); ++i) {
    AgentAction a;
    a.act = static_cast<ActKind>(i);
    a.question = kQ;
    a.candidate = "MS";
    a.answer = "CX";
    a.clue = "It lies in the Indian Ocean.";
    a.score = 2;
    a.win = false;
    out.push_back(a);
  }
  return out;
}

}  // namespace

TEST(Realize, SingleTemplateConfirmation) {
  const TemplateSet set({{ActKind::confirm_answer, {"So, is {candidate} your final answer?"}}});
  Rng rng(1);
  NlgHistory history;
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(realize(confirm("CX"), set, *shipped().registry, rng, history),
              "So, is Christmas Island your final answer?");
  }
}

TEST(Realize, NoConsecutiveRepeatAndFullCoverage) {
  const TemplateSet set({{ActKind::confirm_answer, {"A {candidate}", "B {candidate}", "C {candidate}"}}});
  Rng rng(2);
  NlgHistory history;
  std::string previous;
  std::set<std::string> seen;
  for (int i = 0; i < 100; ++i) {
    const auto s = realize(confirm("FR"), set, *shipped().registry, rng, history);
    EXPECT_NE(s, previous);
    seen.insert(s);
    previous = s;
  }
  EXPECT_EQ(seen, (std::set<std::string>{"A France", "B France", "C France"}));
}

TEST(Realize, HistoryIsPerAct) {
  const TemplateSet set({{ActKind::confirm_answer, {"x {candidate}", "y {candidate}"}},
                         {ActKind::prompt_continue, {"go on", "keep going"}}});
  Rng rng(3);
  NlgHistory history;
  const auto first = realize(confirm("FR"), set, *shipped().registry, rng, history);
  AgentAction p;
  p.act = ActKind::prompt_continue;
  realize(p, set, *shipped().registry, rng, history);
  // With two variants the next confirmation must be the other one.
  EXPECT_NE(realize(confirm("FR"), set, *shipped().registry, rng, history), first);
}

TEST(Realize, ShippedAskQuestionListsOptionsInOrder) {
  const auto& set = *shipped().templates;
  AgentAction a;
  a.act = ActKind::ask_question;
  a.question = kQ;
  Rng rng(4);
  NlgHistory history;
  const std::string options = "Christmas Island, Montserrat, Czechia or Antigua and Barbuda";
  for (int i = 0; i < 20; ++i) {
    const auto s = realize(a, set, *shipped().registry, rng, history);
    EXPECT_NE(s.find(options), std::string::npos) << s;
  }
}

TEST(Realize, ShippedTemplatesFillEveryPlaceholder) {
  const auto& set = *shipped().templates;
  Rng rng(5);
  for (const auto& a : sample_actions()) {
    const auto* pool = set.pool(a.act);
    ASSERT_NE(pool, nullptr) << to_string(a.act);
    EXPECT_GE(pool->size(), 3u) << to_string(a.act);
    NlgHistory history;
    for (std::size_t i = 0; i < 3 * pool->size(); ++i) {
      const auto s = realize(a, set, *shipped().registry, rng, history);
      EXPECT_EQ(s.find('{'), std::string::npos) << s;
      EXPECT_FALSE(s.empty());
    }
  }
}

TEST(Realize, MissingPayloadIsTemplateError) {
  const TemplateSet set({{ActKind::confirm_answer, {"So, {candidate}?"}}});
  Rng rng(1);
  NlgHistory history;
  AgentAction a;
  a.act = ActKind::confirm_answer;
  EXPECT_THROW(realize(a, set, *shipped().registry, rng, history), TemplateError);
  a.act = ActKind::give_clue;
  a.clue = "c";
  EXPECT_THROW(realize(a, set, *shipped().registry, rng, history), TemplateError);
}

TEST(FormatOptions, CommaSeparatedWithOr) {
  EXPECT_EQ(format_options(Question{"FR", {"FR", "DE", "IT", "ES"}, 0}, *shipped().registry),
            "France, Germany, Italy or Spain");
}

TEST(LoadTemplates, Errors) {
  EXPECT_NE(template_error(R"({"confirm_answer": ["{nope}"]})").find("unknown placeholder {nope}"), std::string::npos);
  EXPECT_NE(template_error(R"({"give_clue": ["{candidate}"]})").find("cannot be filled"), std::string::npos);
  EXPECT_NE(template_error(R"({"give_clue": []})").find("empty"), std::string::npos);
  EXPECT_NE(template_error(R"({"give_clue": ["{clue"]})").find("unterminated"), std::string::npos);
  EXPECT_NE(template_error(R"({"shout": ["x"]})").find("unknown act"), std::string::npos);
  EXPECT_NE(template_error(R"(["x"])").find("load:"), std::string::npos);
  EXPECT_NE(template_error("{").find("not valid JSON"), std::string::npos);
  EXPECT_EQ(template_error(R"({"give_clue": ["Hint: {clue}"]})"), "");
}
