#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quizmaster/dialogue.hpp"
#include "quizmaster/nlu.hpp"
#include "quizmaster/session.hpp"
#include "quizmaster/transcript.hpp"

namespace quizmaster {

// Speaker confusion: each player turn's observed label is swapped for the
// other player's label with probability p_confusion.
struct NoiseModel {
  double p_confusion = 0.0;
  std::uint64_t seed = 0;
};

// Gold fields are never touched. Throws UnsupportedError unless the player
// turns come from exactly two speakers, ArgumentError for p outside [0, 1].
Transcript apply_noise(const Transcript& t, const NoiseModel& model);

// Drives a fresh session with the transcript's player turns (by observed
// speaker). A confirmation question is answered "yes" when its candidate is
// the round's gold agreed answer and "no" otherwise. Turns belonging to a
// later round force the engine past the current one; turns of a round the
// engine already left are only run through the NLU.
std::vector<LogEntry> replay(const Transcript& t, SessionConfig config,
                             std::shared_ptr<const CountryRegistry> registry, std::shared_ptr<const NluEngine> nlu);

// correct / actual; undefined when nothing was there to detect.
struct Rate {
  std::size_t correct = 0;
  std::size_t actual = 0;

  std::optional<double> value() const {
    if (actual == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(actual);
  }
  bool operator==(const Rate&) const = default;
};

struct MetricsReport {
  std::size_t nb_turns = 0;
  Rate agreement;
  Rate disagreement;
  Rate explicit_intent;
  Rate entity;

  bool operator==(const MetricsReport&) const = default;
};

// Scores a replay log against the transcript's gold annotations.
// Throws ArgumentError when the log's player turns do not match the transcript.
MetricsReport compute_metrics(std::span<const LogEntry> log, const Transcript& t);

struct GameReport {
  std::string group_id;
  std::string game_id;
  MetricsReport metrics;
};

// Per-game table with a mean row; rates print as N/A when undefined.
std::string format_report_table(std::span<const GameReport> games);
std::string format_report_csv(std::span<const GameReport> games);

// Mean of the defined per-game values.
struct MetricsSummary {
  std::size_t games = 0;
  double mean_turns = 0.0;
  std::optional<double> agreement;
  std::optional<double> disagreement;
  std::optional<double> explicit_intent;
  std::optional<double> entity;
};

MetricsSummary summarize(std::span<const MetricsReport> reports);

// Behaviour knobs for synthetic two-player dialogues.
struct PlayerModel {
  double p_elimination_opening = 0.4;  // open with two negated mentions of a wrong option
  double p_repeat_own = 0.3;           // proposer restates their own answer before the reply
  double p_explicit_agree = 0.3;       // reply "yes, I agree" instead of restating the answer
  double p_counter_proposal = 0.3;     // the partner first argues for another option
  double p_correct = 0.7;              // the settled answer is the right one
  int max_followups = 2;               // restatements after agreement, drawn in [0, max]

  // Sentence frames; {X} is replaced with a country name.
  std::vector<std::string> negation_frames{"No way it's {X}", "I'm pretty sure it is not {X}", "It can't be {X}"};
  std::vector<std::string> negation_echo_frames{"Yeah, definitely not {X}", "Agreed, not {X}", "Yeah no way it's {X}"};
  std::vector<std::string> propose_frames{"I think it's {X}", "Maybe {X}?", "I would go for {X}"};
  std::vector<std::string> counter_frames{"Hmm, I'd say {X}", "What about {X} instead?", "I was thinking {X}"};
  std::vector<std::string> accept_frames{"Sure, let's go for {X}", "Okay, {X} it is", "Let's say {X} then"};
  std::vector<std::string> reinforce_frames{"Yes, {X}, I'm quite sure", "Definitely {X}", "It has to be {X}"};
  std::vector<std::string> followup_frames{"We said {X}", "Our answer is {X}", "{X}, final answer"};
  std::vector<std::string> explicit_agree_frames{"Yes, I agree", "Yeah, that's right", "Exactly"};
};

// Throws ConfigError for probabilities outside [0, 1] or empty frame lists.
void validate(const PlayerModel& model);
PlayerModel load_player_model(std::istream& in);
PlayerModel load_player_model_file(const std::filesystem::path& path);

// Gold-annotated three-round dialogues between P1 and P2.
std::vector<Transcript> synthesize_dialogues(const PlayerModel& model, std::size_t n, std::uint64_t seed,
                                             const CountryRegistry& registry);

struct SweepRow {
  double p_confusion = 0.0;
  MetricsSummary procedural;
  MetricsSummary diarised;
};

// Replays the corpus under both strategies for every noise level. The noise
// stream for grid point i is seeded from (seed, i), so rows are reproducible.
std::vector<SweepRow> run_sweep(std::span<const Transcript> corpus, std::span<const double> p_grid,
                                std::uint64_t seed, int agreement_threshold,
                                std::shared_ptr<const CountryRegistry> registry,
                                std::shared_ptr<const NluEngine> nlu);

std::string format_sweep_table(std::span<const SweepRow> rows);
std::string format_sweep_csv(std::span<const SweepRow> rows);

}  // namespace quizmaster
