#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "quizmaster/errors.hpp"
#include "quizmaster/simulation.hpp"
#include "support.hpp"

using namespace quizmaster;
using quizmaster::testing::fixture;
using quizmaster::testing::shipped;
using quizmaster::testing::example_dialogue;

namespace {

Transcript parse(const std::string& text) {
  std::istringstream in(text);
  return parse_transcript(in);
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

const std::string kMeta =
    R"({"type":"meta","group_id":"g","game_id":"x","questions":[{"target":"CX","options":["CX","MS","CZ","AG"]}]})";

// Long two-speaker transcript for noise statistics.
Transcript alternating(std::size_t n) {
  Transcript t;
  t.meta.group_id = "g";
  t.meta.game_id = "long";
  for (std::size_t i = 0; i < n; ++i) {
    TranscriptTurn turn;
    turn.turn_id = static_cast<int>(i) + 1;
    turn.true_speaker = turn.observed_speaker = i % 2 ? "P2" : "P1";
    turn.text = "hmm";
    t.turns.push_back(turn);
  }
  return t;
}

double flip_fraction(const Transcript& a, const Transcript& b) {
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < a.turns.size(); ++i) flipped += a.turns[i].observed_speaker != b.turns[i].observed_speaker;
  return static_cast<double>(flipped) / static_cast<double>(a.turns.size());
}

SessionConfig config_for(StrategyKind kind, int threshold = 3) {
  SessionConfig c;
  c.strategy = kind;
  c.agreement_threshold = threshold;
  return c;
}

std::vector<LogEntry> run_replay(const Transcript& t, StrategyKind kind, int threshold = 3) {
  return replay(t, config_for(kind, threshold), shipped().registry, shipped().nlu);
}

// (turn id, candidate) for every confirmation asked during a replay.
std::vector<std::pair<int, std::string>> confirmations(const std::vector<LogEntry>& log) {
  std::vector<std::pair<int, std::string>> out;
  for (const auto& e : log) {
    for (const auto& a : e.actions) {
      if (a.act == ActKind::confirm_answer) out.emplace_back(e.turn_id, *a.candidate);
    }
  }
  return out;
}

}  // namespace

TEST(Transcript, ParsesExampleFixture) {
  const auto t = example_dialogue();
  EXPECT_EQ(t.meta.game_id, "table1");
  EXPECT_EQ(t.meta.strategy_hint, StrategyKind::procedural);
  ASSERT_EQ(t.turns.size(), 5u);
  EXPECT_TRUE(t.turns[0].is_system());
  EXPECT_EQ(t.turns[1].observed_speaker, "P1");
  EXPECT_EQ(t.turns[4].gold_event, (GoldEvent{GoldEventKind::agreement, "CX"}));
  EXPECT_EQ(t.speakers(), (std::vector<std::string>{"P1", "P2"}));
}

TEST(Transcript, RoundTrips) {
  const auto t = example_dialogue();
  std::ostringstream out;
  write_transcript(out, t);
  EXPECT_EQ(parse(out.str()), t);
}

TEST(Transcript, SchemaErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error(""), "empty transcript");
  EXPECT_NE(parse_error(R"({"turn_id":1,"true_speaker":"P1","text":"x"})").find("line 1: first record must be the meta"),
            std::string::npos);
  EXPECT_NE(parse_error(kMeta + "\n" + R"({"turn_id":2,"true_speaker":"P1","text":"a"})" + "\n" +
                        R"({"turn_id":2,"true_speaker":"P2","text":"b"})")
                .find("line 3: turn_id must be strictly increasing"),
            std::string::npos);
  EXPECT_NE(parse_error(kMeta + "\n" + R"({"turn_id":1,"true_speaker":"P1"})").find("line 2: missing string field 'text'"),
            std::string::npos);
  EXPECT_NE(parse_error(kMeta + "\n{nope").find("line 2: invalid JSON"), std::string::npos);
  EXPECT_NE(parse_error(kMeta + "\n" +
                        R"({"turn_id":1,"true_speaker":"P1","text":"a","gold_intent":"agree","gold_entity":"CX"})")
                .find("gold_entity requires gold_intent give_answer"),
            std::string::npos);
  EXPECT_NE(parse_error(kMeta + "\n" + R"({"turn_id":1,"true_speaker":"P1","text":"a","gold_intent":"dance"})")
                .find("line 2"),
            std::string::npos);
  EXPECT_NE(parse_error(kMeta + "\n" + R"({"turn_id":1,"true_speaker":"P1","text":"a","round":3})")
                .find("round out of range"),
            std::string::npos);
  EXPECT_EQ(parse_error(kMeta + "\n\n" + R"({"turn_id":1,"true_speaker":"P1","text":"a"})"), "");
}

TEST(Transcript, MissingFileIsIoError) {
  EXPECT_THROW(parse_transcript_file("/nonexistent/transcript.jsonl"), IoError);
}

TEST(Noise, ZeroIsIdentity) {
  const auto t = alternating(1000);
  EXPECT_EQ(apply_noise(t, NoiseModel{0.0, 1}), t);
}

TEST(Noise, OneFlipsEveryPlayerTurn) {
  const auto t = example_dialogue();
  const auto noisy = apply_noise(t, NoiseModel{1.0, 1});
  EXPECT_EQ(noisy.turns[0].observed_speaker, "System");
  for (std::size_t i = 1; i < t.turns.size(); ++i) {
    EXPECT_NE(noisy.turns[i].observed_speaker, t.turns[i].observed_speaker);
    EXPECT_EQ(noisy.turns[i].true_speaker, t.turns[i].true_speaker);
  }
}

TEST(Noise, FlipRateMatchesProbability) {
  const auto t = alternating(10000);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    EXPECT_NEAR(flip_fraction(t, apply_noise(t, NoiseModel{0.3, seed})), 0.3, 0.02);
  }
}

TEST(Noise, GoldFieldsUntouchedAndDeterministic) {
  const auto t = example_dialogue();
  const auto a = apply_noise(t, NoiseModel{0.5, 9});
  EXPECT_EQ(a, apply_noise(t, NoiseModel{0.5, 9}));
  for (std::size_t i = 0; i < t.turns.size(); ++i) {
    auto stripped = a.turns[i];
    stripped.observed_speaker = t.turns[i].observed_speaker;
    EXPECT_EQ(stripped, t.turns[i]);
  }
}

TEST(Noise, ComposesLikeIndependentFlips) {
  // Two passes flip a label iff exactly one of them fires.
  const double p1 = 0.2, p2 = 0.3;
  const auto t = alternating(10000);
  const auto twice = apply_noise(apply_noise(t, NoiseModel{p1, 4}), NoiseModel{p2, 5});
  EXPECT_NEAR(flip_fraction(t, twice), p1 * (1 - p2) + p2 * (1 - p1), 0.02);

  const auto once = apply_noise(t, NoiseModel{p2, 6});
  EXPECT_EQ(apply_noise(once, NoiseModel{0.0, 7}), once);
}

TEST(Noise, Errors) {
  auto t = example_dialogue();
  EXPECT_THROW(apply_noise(t, NoiseModel{1.5, 1}), ArgumentError);
  EXPECT_THROW(apply_noise(t, NoiseModel{-0.1, 1}), ArgumentError);
  t.turns.back().true_speaker = t.turns.back().observed_speaker = "P3";
  EXPECT_THROW(apply_noise(t, NoiseModel{0.1, 1}), UnsupportedError);
}

TEST(Replay, ExampleProcedural) {
  using V = std::vector<std::pair<int, std::string>>;
  EXPECT_EQ(confirmations(run_replay(example_dialogue(), StrategyKind::procedural)), (V{{5, "CX"}}));
  EXPECT_EQ(confirmations(run_replay(example_dialogue(), StrategyKind::procedural, 2)), (V{{3, "AG"}, {5, "CX"}}));
  EXPECT_EQ(confirmations(run_replay(example_dialogue(), StrategyKind::procedural, 5)), V{});
}

TEST(Replay, ExampleDiarisedAsksEarlyAndIsToldNo) {
  const auto log = run_replay(example_dialogue(), StrategyKind::diarised);
  using V = std::vector<std::pair<int, std::string>>;
  EXPECT_EQ(confirmations(log), (V{{3, "AG"}, {5, "CX"}}));
  std::vector<std::string> replies;
  for (const auto& e : log) {
    if (e.source == EntrySource::auto_reply) replies.push_back(e.text);
  }
  EXPECT_EQ(replies, (std::vector<std::string>{"no", "yes"}));
  EXPECT_EQ(log.back().state.score, 1);
}

TEST(Replay, UsesObservedSpeaker) {
  // Both AG mentions heard from P1: the diarised strategy no longer fires on turn 3.
  auto t = example_dialogue();
  t.turns[2].observed_speaker = "P1";
  using V = std::vector<std::pair<int, std::string>>;
  EXPECT_EQ(confirmations(run_replay(t, StrategyKind::diarised)), (V{{5, "CX"}}));
}

TEST(Replay, LaterRoundForcesSkipEarlierRoundOnlyObserved) {
  const auto t = parse(
      R"({"type":"meta","group_id":"g","game_id":"r","questions":[{"target":"CX","options":["CX","MS","CZ","AG"]},{"target":"FR","options":["FR","DE","IT","ES"]}]})"
      "\n"
      R"({"turn_id":1,"true_speaker":"P1","text":"Montserrat?","round":0})"
      "\n"
      R"({"turn_id":2,"true_speaker":"P2","text":"France","round":1})"
      "\n"
      R"({"turn_id":3,"true_speaker":"P1","text":"France","round":1})"
      "\n"
      R"({"turn_id":4,"true_speaker":"P2","text":"France!","round":1})");
  const auto log = run_replay(t, StrategyKind::procedural);
  std::vector<EntrySource> sources;
  for (const auto& e : log) sources.push_back(e.source);
  ASSERT_GE(log.size(), 4u);
  EXPECT_EQ(log[2].source, EntrySource::replay);
  EXPECT_TRUE(log[2].has_action(ActKind::acknowledge_skip));
  EXPECT_EQ(log[2].turn_id, 2);
  EXPECT_EQ(log[3].turn_id, 2);
  EXPECT_EQ(log[3].round, 1);
  EXPECT_EQ(confirmations(log), (std::vector<std::pair<int, std::string>>{{4, "FR"}}));

  // Going back to round 0 after the engine moved on.
  const auto back = parse(
      R"({"type":"meta","group_id":"g","game_id":"b","questions":[{"target":"CX","options":["CX","MS","CZ","AG"]}]})"
      "\n"
      R"({"turn_id":1,"true_speaker":"P1","text":"skip","round":0})"
      "\n"
      R"({"turn_id":2,"true_speaker":"P2","text":"wait, it was Montserrat","round":0})");
  const auto log2 = run_replay(back, StrategyKind::procedural);
  EXPECT_FALSE(log2.back().handled);
  EXPECT_EQ(log2.back().nlu->entity()->code, "MS");
}

TEST(Replay, ScriptConflictIsConfigError) {
  auto c = config_for(StrategyKind::procedural);
  c.script = {Question{"FR", {"FR", "DE", "IT", "ES"}, 0}};
  EXPECT_THROW(replay(example_dialogue(), c, shipped().registry, shipped().nlu), ConfigError);
}

// Hand-counted expectations for the metric fixtures.
struct MetricCase {
  const char* file;
  StrategyKind strategy;
  MetricsReport expected;
};

TEST(Metrics, FixturesMatchHandCounts) {
  const std::vector<MetricCase> cases{
      {"metrics/explicit_agree.jsonl", StrategyKind::procedural, {4, {1, 1}, {0, 0}, {2, 2}, {1, 1}}},
      {"metrics/ten_turns.jsonl", StrategyKind::procedural, {10, {2, 3}, {0, 0}, {1, 1}, {6, 6}}},
      {"metrics/disagreements.jsonl", StrategyKind::procedural, {8, {1, 1}, {3, 4}, {1, 2}, {5, 5}}},
      {"metrics/homophones.jsonl", StrategyKind::diarised, {6, {1, 1}, {1, 1}, {0, 0}, {4, 5}}},
      {"table1.jsonl", StrategyKind::procedural, {5, {1, 1}, {0, 0}, {0, 0}, {4, 4}}},
  };
  for (const auto& c : cases) {
    const auto t = parse_transcript_file(fixture(c.file));
    const auto log = run_replay(t, c.strategy);
    const auto m = compute_metrics(log, t);
    EXPECT_EQ(m, c.expected) << c.file << ": agreement " << m.agreement.correct << "/" << m.agreement.actual
                             << " disagreement " << m.disagreement.correct << "/" << m.disagreement.actual
                             << " explicit " << m.explicit_intent.correct << "/" << m.explicit_intent.actual
                             << " entity " << m.entity.correct << "/" << m.entity.actual;
  }
}

TEST(Metrics, ExampleDiarisedStillCountsTheAgreement) {
  const auto t = example_dialogue();
  EXPECT_EQ(compute_metrics(run_replay(t, StrategyKind::diarised), t).agreement, (Rate{1, 1}));
  EXPECT_EQ(compute_metrics(run_replay(t, StrategyKind::procedural, 5), t).agreement, (Rate{0, 1}));
}

TEST(Metrics, UndefinedRates) {
  EXPECT_FALSE(Rate{}.value());
  EXPECT_DOUBLE_EQ(*(Rate{2, 3}.value()), 2.0 / 3.0);
}

TEST(Metrics, MismatchedLogIsArgumentError) {
  const auto t = example_dialogue();
  auto log = run_replay(t, StrategyKind::procedural);
  auto other = t;
  other.turns.pop_back();
  EXPECT_THROW(compute_metrics(log, other), ArgumentError);
  for (auto& e : log) {
    if (e.turn_id == 3) e.turn_id = 99;
  }
  EXPECT_THROW(compute_metrics(log, t), ArgumentError);
}

TEST(Metrics, SummarizeSkipsUndefined) {
  std::vector<MetricsReport> reports{{4, {1, 1}, {0, 0}, {1, 2}, {1, 1}}, {6, {0, 1}, {1, 2}, {0, 0}, {3, 4}}};
  const auto s = summarize(reports);
  EXPECT_EQ(s.games, 2u);
  EXPECT_DOUBLE_EQ(s.mean_turns, 5.0);
  EXPECT_DOUBLE_EQ(*s.agreement, 0.5);
  EXPECT_DOUBLE_EQ(*s.disagreement, 0.5);
  EXPECT_DOUBLE_EQ(*s.explicit_intent, 0.5);
  EXPECT_DOUBLE_EQ(*s.entity, (1.0 + 0.75) / 2);
  EXPECT_FALSE(summarize(std::vector<MetricsReport>{{1, {}, {}, {}, {}}}).agreement);
}

TEST(Report, TableAndCsv) {
  const std::vector<GameReport> games{{"fixture", "ten_turns", {10, {2, 3}, {0, 0}, {1, 1}, {6, 6}}}};
  const auto table = format_report_table(games);
  EXPECT_NE(table.find("Agreement"), std::string::npos);
  EXPECT_NE(table.find("0.67"), std::string::npos);
  EXPECT_NE(table.find("N/A"), std::string::npos);
  EXPECT_NE(table.find("Mean"), std::string::npos);
  EXPECT_EQ(format_report_csv(games),
            "group,game,nb_turns,agreement_rate,disagreement_rate,explicit_intent_rate,entity_rate\n"
            "fixture,ten_turns,10,0.66666666666666663,NA,1,1\n");
}

TEST(Synthesis, StructureAndGold) {
  const auto corpus = synthesize_dialogues(PlayerModel{}, 200, 3, *shipped().registry);
  ASSERT_EQ(corpus.size(), 200u);
  std::set<std::string> ids;
  for (const auto& t : corpus) {
    ids.insert(t.meta.game_id);
    ASSERT_EQ(t.meta.questions.size(), 3u);
    const auto speakers = t.speakers();
    EXPECT_EQ(std::set<std::string>(speakers.begin(), speakers.end()), (std::set<std::string>{"P1", "P2"}));
    std::array<int, 3> agreements{};
    int prev = 0;
    for (const auto& turn : t.turns) {
      ASSERT_GT(turn.turn_id, prev);
      prev = turn.turn_id;
      EXPECT_EQ(turn.true_speaker, turn.observed_speaker);
      const auto& q = t.meta.questions[static_cast<std::size_t>(turn.round)];
      if (turn.gold_entity) {
        EXPECT_NE(std::find(q.options.begin(), q.options.end(), *turn.gold_entity), q.options.end());
      }
      if (turn.gold_event && turn.gold_event->kind == GoldEventKind::agreement) {
        ++agreements[static_cast<std::size_t>(turn.round)];
      }
    }
    EXPECT_EQ(agreements, (std::array<int, 3>{1, 1, 1}));
    // Serializes to something the parser accepts unchanged.
    std::ostringstream out;
    write_transcript(out, t);
    EXPECT_EQ(parse(out.str()), t);
  }
  EXPECT_EQ(ids.size(), 200u);
}

TEST(Synthesis, EliminationOpeningAlwaysTaken) {
  PlayerModel m;
  m.p_elimination_opening = 1.0;
  m.p_counter_proposal = 0.0;
  for (const auto& t : synthesize_dialogues(m, 50, 4, *shipped().registry)) {
    for (std::size_t i = 0; i < t.turns.size(); ++i) {
      if (!t.turns[i].is_system()) continue;
      const auto& first = t.turns[i + 1];
      const auto& second = t.turns[i + 2];
      EXPECT_EQ(first.gold_entity, second.gold_entity);
      EXPECT_NE(first.true_speaker, second.true_speaker);
      EXPECT_FALSE(first.gold_event);
      EXPECT_FALSE(second.gold_event);
    }
  }
}

TEST(Synthesis, ZeroDialoguesAndDeterminism) {
  EXPECT_TRUE(synthesize_dialogues(PlayerModel{}, 0, 1, *shipped().registry).empty());
  EXPECT_EQ(synthesize_dialogues(PlayerModel{}, 20, 9, *shipped().registry),
            synthesize_dialogues(PlayerModel{}, 20, 9, *shipped().registry));
  EXPECT_NE(synthesize_dialogues(PlayerModel{}, 20, 9, *shipped().registry),
            synthesize_dialogues(PlayerModel{}, 20, 10, *shipped().registry));
}

TEST(PlayerModelConfig, ValidationAndLoading) {
  PlayerModel m;
  m.p_correct = 1.2;
  EXPECT_THROW(validate(m), ConfigError);
  m = {};
  m.max_followups = -1;
  EXPECT_THROW(validate(m), ConfigError);
  m = {};
  m.propose_frames = {"I think so"};
  EXPECT_THROW(validate(m), ConfigError);
  m = {};
  m.explicit_agree_frames = {"Yes, {X}"};
  EXPECT_THROW(validate(m), ConfigError);
  m = {};
  m.accept_frames.clear();
  EXPECT_THROW(validate(m), ConfigError);

  std::istringstream in(R"({"p_correct": 0.5, "max_followups": 0})");
  const auto loaded = load_player_model(in);
  EXPECT_DOUBLE_EQ(loaded.p_correct, 0.5);
  EXPECT_EQ(loaded.max_followups, 0);
  std::istringstream bad(R"({"p_correct": "high"})");
  EXPECT_THROW(load_player_model(bad), ConfigError);
  EXPECT_THROW(load_player_model_file("/nonexistent/model.json"), IoError);
  EXPECT_NO_THROW(load_player_model_file(quizmaster::testing::data_dir() / "player_model.json"));
}

TEST(Sweep, RowsFollowGridAndRepeat) {
  const auto corpus = synthesize_dialogues(PlayerModel{}, 60, 2, *shipped().registry);
  const std::vector<double> grid{0.0, 0.25, 0.5};
  const auto rows = run_sweep(corpus, grid, 2, 3, shipped().registry, shipped().nlu);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].p_confusion, grid[i]);
    EXPECT_EQ(rows[i].procedural.games, 60u);
  }
  EXPECT_EQ(format_sweep_csv(rows), format_sweep_csv(run_sweep(corpus, grid, 2, 3, shipped().registry, shipped().nlu)));
  // Speaker labels never reach the procedural strategy.
  EXPECT_EQ(rows[0].procedural.agreement, rows[2].procedural.agreement);
  // Clean labels: every settled answer is eventually detected by the diarised strategy.
  EXPECT_DOUBLE_EQ(*rows[0].diarised.agreement, 1.0);
  EXPECT_LT(*rows[2].diarised.agreement, 1.0);
  EXPECT_DOUBLE_EQ(*rows[0].procedural.entity, 1.0);
  const auto csv = format_sweep_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "p_confusion,games,procedural_agreement,diarised_agreement,procedural_disagreement,diarised_disagreement,"
            "explicit_intent,entity");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}
