#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "quizmaster/nlu.hpp"
#include "quizmaster/quiz.hpp"
#include "quizmaster/registry.hpp"
#include "quizmaster/rng.hpp"

namespace quizmaster {

inline constexpr int kRoundsPerGame = 3;

enum class StrategyKind { procedural, diarised };

std::string_view to_string(StrategyKind kind);
// Throws ConfigError for anything but "procedural" / "diarised".
StrategyKind parse_strategy(std::string_view id);

enum class Phase { asking, listening, confirming, feedback, finished };

std::string_view to_string(Phase phase);

// Answer counting without speaker identity. Agreement is detected once at
// least `threshold` answers were given for the current question and the two
// most recent answers name the same country.
struct ProceduralAgreementState {
  int n_answers = 0;
  std::optional<std::string> prev_answer;
  std::optional<std::string> last_answer;
  int threshold = 3;

  bool operator==(const ProceduralAgreementState&) const = default;
};

// Shifts prev <- last, last <- code and counts the answer.
void record_answer(ProceduralAgreementState& state, const std::string& code);
std::optional<std::string> procedural_check(const ProceduralAgreementState& state);

// Current answer per speaker label. Only the two expected speakers take part.
struct DiarisedAgreementState {
  std::map<std::string, std::optional<std::string>> current_answer_by_speaker;
  std::array<std::string, 2> expected_speakers{"P1", "P2"};

  bool operator==(const DiarisedAgreementState&) const = default;
};

// Returns false (and changes nothing) for speakers outside expected_speakers.
bool record_answer(DiarisedAgreementState& state, std::string_view speaker, const std::string& code);
std::optional<std::string> diarised_check(const DiarisedAgreementState& state);

using StrategyState = std::variant<ProceduralAgreementState, DiarisedAgreementState>;

enum class ActKind {
  ask_question,
  confirm_answer,
  give_clue,
  feedback_correct,
  feedback_incorrect,
  repeat_question,
  acknowledge_skip,
  prompt_continue,
  announce_result,
};

std::string_view to_string(ActKind act);
ActKind parse_act(std::string_view label);

// An abstract agent move. Which payload fields are set depends on `act`:
//   ask_question, repeat_question   question
//   confirm_answer                  candidate
//   give_clue                       clue
//   feedback_correct/_incorrect     candidate, answer, score
//   acknowledge_skip                answer
//   announce_result                 score, win
struct AgentAction {
  ActKind act = ActKind::prompt_continue;
  std::optional<Question> question;
  std::optional<std::string> candidate;
  std::optional<std::string> answer;
  std::optional<std::string> clue;
  std::optional<int> score;
  std::optional<bool> win;

  bool operator==(const AgentAction&) const = default;
};

void to_json(nlohmann::json& j, const AgentAction& a);

struct SessionConfig {
  StrategyKind strategy = StrategyKind::procedural;
  int agreement_threshold = 3;  // answers needed before a repeated answer counts as agreement
  int clue_trigger = 2;         // disagreements before a clue is offered unprompted
  std::uint64_t seed = 0;
  std::array<std::string, 2> speakers{"P1", "P2"};
  // Fixed questions for the first rounds; later rounds are drawn at random.
  std::vector<Question> script;
};

// Throws ConfigError.
void validate(const SessionConfig& config, const CountryRegistry& registry);

struct DialogueState {
  Phase phase = Phase::asking;
  Question question;
  int round = 0;
  int score = 0;
  StrategyState strategy_state;
  int disagreement_count = 0;
  std::optional<std::string> pending_candidate;
  bool clue_offered = false;
  bool system_question_pending = false;
  // Most recent give_answer entity from any speaker in this question.
  std::optional<std::string> last_given_answer;
  ClueCursor clue_cursor;
};

void to_json(nlohmann::json& j, const DialogueState& s);

struct Transition {
  DialogueState state;
  std::vector<AgentAction> actions;
};

// The rule-based game master. Transitions are pure: state in, state out.
// The engine itself is immutable and can serve any number of sessions.
class DialogueEngine {
 public:
  DialogueEngine(SessionConfig config, std::shared_ptr<const CountryRegistry> registry);

  // Round 0 question; phase listening.
  Transition start(Rng& rng) const;

  // Throws SessionStateError unless phase is listening or confirming.
  Transition handle_utterance(const DialogueState& state, std::string_view speaker, const NluResult& nlu,
                              Rng& rng) const;

  // Throws SessionStateError unless phase is feedback.
  Transition advance_round(const DialogueState& state, Rng& rng) const;

  // Gives up on the current question as if the players had skipped it.
  Transition abandon_round(const DialogueState& state, Rng& rng) const;

  const SessionConfig& config() const noexcept { return config_; }
  const CountryRegistry& registry() const noexcept { return *registry_; }

 private:
  Question question_for(int round, Rng& rng) const;
  StrategyState fresh_strategy_state() const;
  void on_listening(DialogueState& s, std::string_view speaker, const NluResult& nlu, Rng& rng,
                    std::vector<AgentAction>& out) const;
  void on_confirming(DialogueState& s, std::string_view speaker, const NluResult& nlu, Rng& rng,
                     std::vector<AgentAction>& out) const;
  void give_answer(DialogueState& s, std::string_view speaker, const std::string& code,
                   std::vector<AgentAction>& out, Rng& rng) const;
  void confirm(DialogueState& s, const std::string& candidate, std::vector<AgentAction>& out) const;
  void accept_candidate(DialogueState& s, Rng& rng, std::vector<AgentAction>& out) const;
  void drop_candidate(DialogueState& s) const;
  bool count_disagreement(DialogueState& s, Rng& rng, std::vector<AgentAction>& out) const;
  void skip(DialogueState& s, Rng& rng, std::vector<AgentAction>& out) const;
  void finish_round(DialogueState& s, Rng& rng, std::vector<AgentAction>& out) const;

  SessionConfig config_;
  std::shared_ptr<const CountryRegistry> registry_;
};

}  // namespace quizmaster
