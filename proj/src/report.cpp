#include <cstdio>
#include <sstream>

#include "quizmaster/simulation.hpp"

namespace quizmaster {
namespace {

std::string fmt_rate(std::optional<double> v, int precision = 2) {
  if (!v) return "N/A";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

// CSV keeps full precision so sweeps can be compared exactly.
std::string csv_rate(std::optional<double> v) {
  if (!v) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

}  // namespace

std::string format_report_table(std::span<const GameReport> games) {
  std::ostringstream out;
  const std::size_t w = 12;
  out << pad("Group", w) << pad("Game", w) << pad("Nb turns", 10) << pad("Agreement", w) << pad("Disagreement", 14)
      << pad("Explicit", w) << "Entity\n";
  std::vector<MetricsReport> reports;
  for (const auto& g : games) {
    const auto& m = g.metrics;
    reports.push_back(m);
    out << pad(g.group_id, w) << pad(g.game_id, w) << pad(std::to_string(m.nb_turns), 10)
        << pad(fmt_rate(m.agreement.value()), w) << pad(fmt_rate(m.disagreement.value()), 14)
        << pad(fmt_rate(m.explicit_intent.value()), w) << fmt_rate(m.entity.value()) << '\n';
  }
  const auto s = summarize(reports);
  out << pad("Mean", w) << pad("", w) << pad(fmt_rate(games.empty() ? std::nullopt : std::optional(s.mean_turns)), 10)
      << pad(fmt_rate(s.agreement), w) << pad(fmt_rate(s.disagreement), 14) << pad(fmt_rate(s.explicit_intent), w)
      << fmt_rate(s.entity) << '\n';
  return out.str();
}

std::string format_report_csv(std::span<const GameReport> games) {
  std::ostringstream out;
  out << "group,game,nb_turns,agreement_rate,disagreement_rate,explicit_intent_rate,entity_rate\n";
  for (const auto& g : games) {
    const auto& m = g.metrics;
    out << g.group_id << ',' << g.game_id << ',' << m.nb_turns << ',' << csv_rate(m.agreement.value()) << ','
        << csv_rate(m.disagreement.value()) << ',' << csv_rate(m.explicit_intent.value()) << ','
        << csv_rate(m.entity.value()) << '\n';
  }
  return out.str();
}

std::string format_sweep_table(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << pad("p_confusion", 13) << pad("games", 8) << pad("proc_agree", 12) << pad("diar_agree", 12)
      << pad("proc_disagree", 15) << pad("diar_disagree", 15) << pad("intent", 8) << "entity\n";
  for (const auto& r : rows) {
    out << pad(fmt_rate(r.p_confusion), 13) << pad(std::to_string(r.procedural.games), 8)
        << pad(fmt_rate(r.procedural.agreement, 4), 12) << pad(fmt_rate(r.diarised.agreement, 4), 12)
        << pad(fmt_rate(r.procedural.disagreement, 4), 15) << pad(fmt_rate(r.diarised.disagreement, 4), 15)
        << pad(fmt_rate(r.procedural.explicit_intent), 8) << fmt_rate(r.procedural.entity) << '\n';
  }
  return out.str();
}

std::string format_sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "p_confusion,games,procedural_agreement,diarised_agreement,procedural_disagreement,diarised_disagreement,"
         "explicit_intent,entity\n";
  for (const auto& r : rows) {
    out << csv_rate(r.p_confusion) << ',' << r.procedural.games << ',' << csv_rate(r.procedural.agreement) << ','
        << csv_rate(r.diarised.agreement) << ',' << csv_rate(r.procedural.disagreement) << ','
        << csv_rate(r.diarised.disagreement) << ',' << csv_rate(r.procedural.explicit_intent) << ','
        << csv_rate(r.procedural.entity) << '\n';
  }
  return out.str();
}

}  // namespace quizmaster
