#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "quizmaster/dialogue.hpp"
#include "quizmaster/nlg.hpp"
#include "quizmaster/nlu.hpp"
#include "quizmaster/rng.hpp"

namespace quizmaster {

enum class EntrySource {
  system,  // session opening
  player,  // a player utterance
  auto_reply,  // scripted answer to a confirmation question (replay)
  replay,  // round given up by the replay driver
};

std::string_view to_string(EntrySource source);

// One line of the game log.
struct LogEntry {
  int turn_id = 0;
  EntrySource source = EntrySource::player;
  std::string speaker;
  std::string text;
  std::optional<NluResult> nlu;
  int round = 0;         // engine round when the entry was processed
  bool handled = true;   // false when only the NLU saw the utterance
  bool disagreement_detected = false;
  DialogueState state;   // after processing
  std::vector<AgentAction> actions;
  std::vector<std::string> utterances;  // realized text per action, when templates are attached

  bool has_action(ActKind act) const;
};

void to_json(nlohmann::json& j, const LogEntry& e);

// JSON Lines, one entry per line.
void write_log(std::ostream& out, std::span<const LogEntry> log);
std::string log_to_string(std::span<const LogEntry> log);

// A running game: engine + state + random streams + log. Not thread-safe;
// callers serialize access per session.
class GameSession {
 public:
  GameSession(SessionConfig config, std::shared_ptr<const CountryRegistry> registry,
              std::shared_ptr<const NluEngine> nlu, std::shared_ptr<const TemplateSet> templates = nullptr);

  // Classifies the text against the current options, then runs the dialogue
  // manager. Throws SessionStateError once the game is finished.
  const LogEntry& say(std::string_view speaker, std::string_view text, std::optional<int> turn_id = {});

  // Feeds an already-understood utterance.
  const LogEntry& respond(std::string_view speaker, const NluResult& nlu, std::string_view text, EntrySource source,
                          std::optional<int> turn_id = {});

  // Logs the NLU reading of an utterance without touching the dialogue state.
  const LogEntry& observe(std::string_view speaker, std::string_view text, std::optional<int> turn_id = {});

  const LogEntry& abandon_round(std::optional<int> turn_id = {});

  const DialogueState& state() const noexcept { return state_; }
  const std::vector<LogEntry>& log() const noexcept { return log_; }
  bool finished() const noexcept { return state_.phase == Phase::finished; }
  const DialogueEngine& engine() const noexcept { return engine_; }
  const CountryRegistry& registry() const noexcept { return engine_.registry(); }

 private:
  const LogEntry& record(LogEntry entry, const Transition& t);
  int take_turn_id(std::optional<int> requested);

  DialogueEngine engine_;
  std::shared_ptr<const NluEngine> nlu_;
  std::shared_ptr<const TemplateSet> templates_;
  Rng rng_;
  Rng nlg_rng_;
  NlgHistory nlg_history_;
  DialogueState state_;
  std::vector<LogEntry> log_;
  int next_turn_id_ = 1;
};

}  // namespace quizmaster
