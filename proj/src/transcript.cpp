#include "quizmaster/transcript.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "quizmaster/errors.hpp"

namespace quizmaster {
namespace {

using nlohmann::json;

bool valid_code(const std::string& s) {
  return s.size() == 2 && std::all_of(s.begin(), s.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

std::string require_string(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key) || !j[key].is_string()) throw ParseError(line, std::string("missing string field '") + key + "'");
  return j[key].get<std::string>();
}

Question parse_question(const json& j, int index, std::size_t line) {
  if (!j.is_object()) throw ParseError(line, "question script entries must be objects");
  Question q;
  q.question_index = index;
  q.target = require_string(j, "target", line);
  if (!j.contains("options") || !j["options"].is_array() || j["options"].size() != 4) {
    throw ParseError(line, "question needs exactly 4 options");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < 4; ++i) {
    if (!j["options"][i].is_string()) throw ParseError(line, "question options must be strings");
    q.options[i] = j["options"][i].get<std::string>();
    if (!valid_code(q.options[i])) throw ParseError(line, "bad country code '" + q.options[i] + "'");
    if (!seen.insert(q.options[i]).second) throw ParseError(line, "duplicate option '" + q.options[i] + "'");
  }
  if (!seen.contains(q.target)) throw ParseError(line, "question target '" + q.target + "' is not an option");
  return q;
}

TranscriptMeta parse_meta(const json& j, std::size_t line) {
  if (!j.is_object() || j.value("type", "") != "meta") throw ParseError(line, "first record must be the meta record");
  TranscriptMeta m;
  m.group_id = j.value("group_id", "");
  m.game_id = j.value("game_id", "");
  if (j.contains("strategy_hint") && !j["strategy_hint"].is_null()) {
    if (!j["strategy_hint"].is_string()) throw ParseError(line, "strategy_hint must be a string");
    try {
      m.strategy_hint = parse_strategy(j["strategy_hint"].get<std::string>());
    } catch (const ConfigError& e) {
      throw ParseError(line, e.what());
    }
  }
  if (j.contains("questions")) {
    if (!j["questions"].is_array()) throw ParseError(line, "questions must be an array");
    if (j["questions"].size() > static_cast<std::size_t>(kRoundsPerGame)) throw ParseError(line, "more questions than rounds");
    int index = 0;
    for (const auto& q : j["questions"]) m.questions.push_back(parse_question(q, index++, line));
  }
  return m;
}

TranscriptTurn parse_turn(const json& j, std::size_t line, int default_round) {
  if (!j.is_object()) throw ParseError(line, "turn record must be an object");
  if (j.value("type", "turn") != "turn") throw ParseError(line, "unexpected record type");
  TranscriptTurn t;
  if (!j.contains("turn_id") || !j["turn_id"].is_number_integer()) throw ParseError(line, "missing integer turn_id");
  t.turn_id = j["turn_id"].get<int>();
  t.true_speaker = require_string(j, "true_speaker", line);
  if (t.true_speaker.empty()) throw ParseError(line, "empty speaker label");
  t.observed_speaker = j.contains("observed_speaker") && !j["observed_speaker"].is_null()
                           ? require_string(j, "observed_speaker", line)
                           : t.true_speaker;
  t.text = require_string(j, "text", line);
  t.round = default_round;
  if (j.contains("round")) {
    if (!j["round"].is_number_integer()) throw ParseError(line, "round must be an integer");
    t.round = j["round"].get<int>();
  }
  if (t.round < 0 || t.round >= kRoundsPerGame) throw ParseError(line, "round out of range");

  if (j.contains("gold_intent") && !j["gold_intent"].is_null()) {
    try {
      t.gold_intent = parse_intent(require_string(j, "gold_intent", line));
    } catch (const ArgumentError& e) {
      throw ParseError(line, e.what());
    }
  }
  if (j.contains("gold_entity") && !j["gold_entity"].is_null()) {
    t.gold_entity = require_string(j, "gold_entity", line);
    if (!valid_code(*t.gold_entity)) throw ParseError(line, "bad gold_entity code '" + *t.gold_entity + "'");
    if (t.gold_intent != Intent::give_answer) throw ParseError(line, "gold_entity requires gold_intent give_answer");
  }
  if (j.contains("gold_event") && !j["gold_event"].is_null()) {
    const auto& e = j["gold_event"];
    if (!e.is_object()) throw ParseError(line, "gold_event must be an object");
    const std::string kind = require_string(e, "type", line);
    GoldEvent ev;
    if (kind == "agreement") {
      ev.kind = GoldEventKind::agreement;
      ev.code = require_string(e, "code", line);
      if (!valid_code(*ev.code)) throw ParseError(line, "bad agreement code '" + *ev.code + "'");
    } else if (kind == "disagreement") {
      ev.kind = GoldEventKind::disagreement;
    } else {
      throw ParseError(line, "unknown gold_event type '" + kind + "'");
    }
    t.gold_event = ev;
  }
  return t;
}

}  // namespace

std::vector<std::string> Transcript::speakers() const {
  std::vector<std::string> out;
  for (const auto& t : turns) {
    if (t.is_system()) continue;
    if (std::find(out.begin(), out.end(), t.true_speaker) == out.end()) out.push_back(t.true_speaker);
  }
  return out;
}

Transcript parse_transcript(std::istream& in) {
  Transcript t;
  bool have_meta = false;
  std::string text;
  std::size_t line = 0;
  int round = 0;
  while (std::getline(in, text)) {
    ++line;
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(line, std::string("invalid JSON: ") + e.what());
    }
    if (!have_meta) {
      t.meta = parse_meta(j, line);
      have_meta = true;
      continue;
    }
    TranscriptTurn turn = parse_turn(j, line, round);
    if (!t.turns.empty()) {
      if (turn.turn_id <= t.turns.back().turn_id) throw ParseError(line, "turn_id must be strictly increasing");
      if (turn.round < t.turns.back().round) throw ParseError(line, "round must not decrease");
    }
    round = turn.round;
    t.turns.push_back(std::move(turn));
  }
  if (!have_meta) throw ParseError(0, "empty transcript");
  return t;
}

Transcript parse_transcript_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open transcript " + path.string());
  return parse_transcript(in);
}

void write_transcript(std::ostream& out, const Transcript& t) {
  json meta{{"type", "meta"}, {"group_id", t.meta.group_id}, {"game_id", t.meta.game_id}};
  meta["strategy_hint"] = t.meta.strategy_hint ? json(to_string(*t.meta.strategy_hint)) : json(nullptr);
  auto questions = json::array();
  for (const auto& q : t.meta.questions) questions.push_back({{"target", q.target}, {"options", q.options}});
  meta["questions"] = std::move(questions);
  out << meta.dump() << '\n';
  for (const auto& turn : t.turns) {
    json j{{"turn_id", turn.turn_id},
           {"true_speaker", turn.true_speaker},
           {"observed_speaker", turn.observed_speaker},
           {"text", turn.text},
           {"round", turn.round}};
    if (turn.gold_intent) j["gold_intent"] = to_string(*turn.gold_intent);
    if (turn.gold_entity) j["gold_entity"] = *turn.gold_entity;
    if (turn.gold_event) {
      json e{{"type", turn.gold_event->kind == GoldEventKind::agreement ? "agreement" : "disagreement"}};
      if (turn.gold_event->code) e["code"] = *turn.gold_event->code;
      j["gold_event"] = std::move(e);
    }
    out << j.dump() << '\n';
  }
}

}  // namespace quizmaster
