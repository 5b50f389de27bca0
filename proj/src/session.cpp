#include "quizmaster/session.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "quizmaster/errors.hpp"

namespace quizmaster {
namespace {
// Keeps NLG draws off the engine stream so realization never changes the
// dialogue itself.
constexpr std::uint64_t kNlgStreamSalt = 0x9E3779B97F4A7C15ull;
}  // namespace

std::string_view to_string(EntrySource source) {
  switch (source) {
    case EntrySource::system: return "system";
    case EntrySource::player: return "player";
    case EntrySource::auto_reply: return "auto";
    case EntrySource::replay: return "replay";
  }
  return "player";
}

bool LogEntry::has_action(ActKind act) const {
  return std::any_of(actions.begin(), actions.end(), [&](const AgentAction& a) { return a.act == act; });
}

void to_json(nlohmann::json& j, const LogEntry& e) {
  j = nlohmann::json{
      {"turn_id", e.turn_id},
      {"source", to_string(e.source)},
      {"speaker", e.speaker},
      {"text", e.text},
      {"round", e.round},
      {"handled", e.handled},
  };
  j["nlu"] = e.nlu ? nlohmann::json(*e.nlu) : nlohmann::json(nullptr);
  j["disagreement_detected"] = e.disagreement_detected;
  j["state"] = e.state;
  auto actions = nlohmann::json::array();
  for (std::size_t i = 0; i < e.actions.size(); ++i) {
    nlohmann::json a = e.actions[i];
    if (i < e.utterances.size()) a["text"] = e.utterances[i];
    actions.push_back(std::move(a));
  }
  j["actions"] = std::move(actions);
}

void write_log(std::ostream& out, std::span<const LogEntry> log) {
  for (const auto& e : log) out << nlohmann::json(e).dump() << '\n';
}

std::string log_to_string(std::span<const LogEntry> log) {
  std::ostringstream out;
  write_log(out, log);
  return out.str();
}

GameSession::GameSession(SessionConfig config, std::shared_ptr<const CountryRegistry> registry,
                         std::shared_ptr<const NluEngine> nlu, std::shared_ptr<const TemplateSet> templates)
    : engine_(config, std::move(registry)),
      nlu_(std::move(nlu)),
      templates_(std::move(templates)),
      rng_(config.seed),
      nlg_rng_(config.seed ^ kNlgStreamSalt) {
  if (!nlu_) throw ConfigError("game session needs an NLU engine");
  const Transition t = engine_.start(rng_);
  LogEntry opening;
  opening.turn_id = 0;
  opening.source = EntrySource::system;
  opening.speaker = "System";
  opening.round = 0;
  record(std::move(opening), t);
}

int GameSession::take_turn_id(std::optional<int> requested) {
  const int id = requested.value_or(next_turn_id_);
  next_turn_id_ = std::max(next_turn_id_, id + 1);
  return id;
}

const LogEntry& GameSession::record(LogEntry entry, const Transition& t) {
  entry.disagreement_detected = entry.handled && t.state.round == state_.round &&
                                t.state.disagreement_count > state_.disagreement_count;
  state_ = t.state;
  entry.state = state_;
  entry.actions = t.actions;
  if (templates_) {
    for (const auto& a : entry.actions) {
      entry.utterances.push_back(realize(a, *templates_, engine_.registry(), nlg_rng_, nlg_history_));
    }
  }
  log_.push_back(std::move(entry));
  return log_.back();
}

const LogEntry& GameSession::say(std::string_view speaker, std::string_view text, std::optional<int> turn_id) {
  const NluResult nlu = nlu_->classify(text, state_.question.options);
  return respond(speaker, nlu, text, EntrySource::player, turn_id);
}

const LogEntry& GameSession::respond(std::string_view speaker, const NluResult& nlu, std::string_view text,
                                     EntrySource source, std::optional<int> turn_id) {
  LogEntry entry;
  entry.source = source;
  entry.speaker = std::string(speaker);
  entry.text = std::string(text);
  entry.nlu = nlu;
  entry.round = state_.round;
  const Transition t = engine_.handle_utterance(state_, speaker, nlu, rng_);
  entry.turn_id = take_turn_id(turn_id);
  return record(std::move(entry), t);
}

const LogEntry& GameSession::observe(std::string_view speaker, std::string_view text, std::optional<int> turn_id) {
  LogEntry entry;
  entry.turn_id = take_turn_id(turn_id);
  entry.source = EntrySource::player;
  entry.speaker = std::string(speaker);
  entry.text = std::string(text);
  entry.nlu = nlu_->classify(text, state_.question.options);
  entry.round = state_.round;
  entry.handled = false;
  return record(std::move(entry), Transition{state_, {}});
}

const LogEntry& GameSession::abandon_round(std::optional<int> turn_id) {
  LogEntry entry;
  entry.source = EntrySource::replay;
  entry.speaker = "System";
  entry.round = state_.round;
  const Transition t = engine_.abandon_round(state_, rng_);
  entry.turn_id = take_turn_id(turn_id);
  return record(std::move(entry), t);
}

}  // namespace quizmaster
