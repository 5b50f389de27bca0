#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "quizmaster/dialogue.hpp"
#include "quizmaster/nlu.hpp"
#include "quizmaster/quiz.hpp"

namespace quizmaster {

// Speaker label reserved for agent turns kept in a transcript for context.
inline constexpr std::string_view kSystemSpeaker = "System";

enum class GoldEventKind { agreement, disagreement };

struct GoldEvent {
  GoldEventKind kind = GoldEventKind::agreement;
  std::optional<std::string> code;  // the agreed country; agreements only

  bool operator==(const GoldEvent&) const = default;
};

struct TranscriptTurn {
  int turn_id = 0;
  std::string true_speaker;
  std::string observed_speaker;
  std::string text;
  int round = 0;
  std::optional<Intent> gold_intent;
  std::optional<std::string> gold_entity;
  std::optional<GoldEvent> gold_event;

  bool is_system() const { return true_speaker == kSystemSpeaker; }
  bool operator==(const TranscriptTurn&) const = default;
};

struct TranscriptMeta {
  std::string group_id;
  std::string game_id;
  std::optional<StrategyKind> strategy_hint;
  std::vector<Question> questions;  // one per round, in order

  bool operator==(const TranscriptMeta&) const = default;
};

struct Transcript {
  TranscriptMeta meta;
  std::vector<TranscriptTurn> turns;

  // Distinct true speakers of player turns, in order of first appearance.
  std::vector<std::string> speakers() const;
  bool operator==(const Transcript&) const = default;
};

// JSON Lines: a meta record first, then one record per turn. Throws
// ParseError carrying the 1-based line number.
Transcript parse_transcript(std::istream& in);
Transcript parse_transcript_file(const std::filesystem::path& path);

void write_transcript(std::ostream& out, const Transcript& t);

}  // namespace quizmaster
