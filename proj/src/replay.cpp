#include <algorithm>
#include <map>
#include <set>

#include "quizmaster/errors.hpp"
#include "quizmaster/simulation.hpp"

namespace quizmaster {
namespace {

// The answer the players finally settled on in a round, if annotated.
std::optional<std::string> gold_agreed_answer(const Transcript& t, int round) {
  std::optional<std::string> code;
  for (const auto& turn : t.turns) {
    if (turn.round == round && turn.gold_event && turn.gold_event->kind == GoldEventKind::agreement) {
      code = turn.gold_event->code;
    }
  }
  return code;
}

bool is_explicit(Intent i) {
  return i == Intent::agree || i == Intent::disagree || i == Intent::ask_clue || i == Intent::repeat_question ||
         i == Intent::skip_question;
}

}  // namespace

Transcript apply_noise(const Transcript& t, const NoiseModel& model) {
  if (!(model.p_confusion >= 0.0 && model.p_confusion <= 1.0)) {
    throw ArgumentError("p_confusion must lie in [0, 1]");
  }
  const auto speakers = t.speakers();
  if (speakers.empty()) return t;
  if (speakers.size() != 2) {
    throw UnsupportedError("speaker noise needs exactly 2 speakers, transcript has " + std::to_string(speakers.size()));
  }
  Transcript out = t;
  Rng rng(model.seed);
  for (auto& turn : out.turns) {
    if (turn.is_system()) continue;
    if (!rng.bernoulli(model.p_confusion)) continue;
    if (turn.observed_speaker == speakers[0]) {
      turn.observed_speaker = speakers[1];
    } else if (turn.observed_speaker == speakers[1]) {
      turn.observed_speaker = speakers[0];
    }
  }
  return out;
}

std::vector<LogEntry> replay(const Transcript& t, SessionConfig config,
                             std::shared_ptr<const CountryRegistry> registry, std::shared_ptr<const NluEngine> nlu) {
  if (!t.meta.questions.empty()) {
    if (!config.script.empty() && config.script != t.meta.questions) {
      throw ConfigError("session question script differs from the transcript's questions");
    }
    config.script = t.meta.questions;
  }
  GameSession session(std::move(config), std::move(registry), std::move(nlu));

  for (const auto& turn : t.turns) {
    if (turn.is_system()) continue;
    try {
      while (!session.finished() && turn.round > session.state().round) {
        session.abandon_round(turn.turn_id);
      }
      if (session.finished() || turn.round < session.state().round) {
        session.observe(turn.observed_speaker, turn.text, turn.turn_id);
        continue;
      }
      const LogEntry& entry = session.say(turn.observed_speaker, turn.text, turn.turn_id);
      if (entry.has_action(ActKind::confirm_answer) && session.state().phase == Phase::confirming) {
        const auto gold = gold_agreed_answer(t, session.state().round);
        const bool yes = gold && *gold == *session.state().pending_candidate;
        session.respond("auto", NluResult::of(yes ? Intent::agree : Intent::disagree), yes ? "yes" : "no",
                        EntrySource::auto_reply, turn.turn_id);
      }
    } catch (const SessionStateError& e) {
      throw SessionStateError("turn " + std::to_string(turn.turn_id) + ": " + e.what());
    }
  }
  return session.log();
}

MetricsReport compute_metrics(std::span<const LogEntry> log, const Transcript& t) {
  std::map<int, const LogEntry*> by_turn;
  for (const auto& e : log) {
    if (e.source != EntrySource::player) continue;
    if (!by_turn.emplace(e.turn_id, &e).second) {
      throw ArgumentError("log holds two player entries for turn " + std::to_string(e.turn_id));
    }
  }
  std::set<int> transcript_ids;
  for (const auto& turn : t.turns) {
    if (turn.is_system()) continue;
    transcript_ids.insert(turn.turn_id);
    if (!by_turn.contains(turn.turn_id)) {
      throw ArgumentError("log has no entry for transcript turn " + std::to_string(turn.turn_id));
    }
  }
  for (const auto& [id, entry] : by_turn) {
    if (!transcript_ids.contains(id)) throw ArgumentError("log turn " + std::to_string(id) + " is not in the transcript");
  }

  MetricsReport r;
  r.nb_turns = t.turns.size();
  for (const auto& turn : t.turns) {
    if (turn.is_system()) continue;
    const LogEntry& entry = *by_turn.at(turn.turn_id);

    if (turn.gold_event && turn.gold_event->kind == GoldEventKind::agreement) {
      ++r.agreement.actual;
      const bool detected = std::any_of(log.begin(), log.end(), [&](const LogEntry& e) {
        return e.handled && e.turn_id >= turn.turn_id && e.round == turn.round &&
               std::any_of(e.actions.begin(), e.actions.end(), [&](const AgentAction& a) {
                 return a.act == ActKind::confirm_answer && a.candidate == turn.gold_event->code;
               });
      });
      if (detected) ++r.agreement.correct;
    }
    if (turn.gold_event && turn.gold_event->kind == GoldEventKind::disagreement) {
      ++r.disagreement.actual;
      if (entry.disagreement_detected) ++r.disagreement.correct;
    }
    if (turn.gold_intent && is_explicit(*turn.gold_intent)) {
      ++r.explicit_intent.actual;
      if (entry.nlu && entry.nlu->intent() == *turn.gold_intent) ++r.explicit_intent.correct;
    }
    if (turn.gold_entity) {
      ++r.entity.actual;
      if (entry.nlu && entry.nlu->entity() && entry.nlu->entity()->code == *turn.gold_entity) ++r.entity.correct;
    }
  }
  return r;
}

MetricsSummary summarize(std::span<const MetricsReport> reports) {
  MetricsSummary s;
  s.games = reports.size();
  if (reports.empty()) return s;
  auto mean_of = [&](auto member) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : reports) {
      if (auto v = (r.*member).value()) {
        sum += *v;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  double turns = 0.0;
  for (const auto& r : reports) turns += static_cast<double>(r.nb_turns);
  s.mean_turns = turns / static_cast<double>(reports.size());
  s.agreement = mean_of(&MetricsReport::agreement);
  s.disagreement = mean_of(&MetricsReport::disagreement);
  s.explicit_intent = mean_of(&MetricsReport::explicit_intent);
  s.entity = mean_of(&MetricsReport::entity);
  return s;
}

}  // namespace quizmaster
