#include <fstream>
#include <istream>

#include <nlohmann/json.hpp>

#include "quizmaster/errors.hpp"
#include "quizmaster/nlg.hpp"
#include "quizmaster/rng.hpp"
#include "quizmaster/simulation.hpp"

namespace quizmaster {
namespace {

using nlohmann::json;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return splitmix(splitmix(a) ^ b); }

std::string fill(const std::string& frame, const std::string& name) {
  std::string out = frame;
  const auto at = out.find("{X}");
  if (at != std::string::npos) out.replace(at, 3, name);
  return out;
}

const std::string& pick(const std::vector<std::string>& pool, Rng& rng) { return pool[rng.index(pool.size())]; }

// Uniform pick among the question's options other than the excluded ones.
std::string other_option(const Question& q, Rng& rng, std::initializer_list<std::string_view> excluded) {
  std::vector<std::string> pool;
  for (const auto& o : q.options) {
    bool skip = false;
    for (auto e : excluded) skip = skip || o == e;
    if (!skip) pool.push_back(o);
  }
  return pool[rng.index(pool.size())];
}

class DialogueBuilder {
 public:
  DialogueBuilder(const PlayerModel& model, const CountryRegistry& registry, Rng& rng)
      : model_(model), registry_(registry), rng_(rng) {}

  Transcript build(std::size_t index) {
    Transcript t;
    t.meta.group_id = "synthetic";
    t.meta.game_id = "game-" + std::to_string(index + 1);
    for (int round = 0; round < kRoundsPerGame; ++round) {
      t.meta.questions.push_back(generate_question(registry_, round, rng_));
    }
    for (int round = 0; round < kRoundsPerGame; ++round) build_round(t, round);
    return t;
  }

 private:
  void add(Transcript& t, int round, const std::string& speaker, std::string text, Intent intent,
           std::optional<std::string> entity = std::nullopt, std::optional<GoldEvent> event = std::nullopt) {
    TranscriptTurn turn;
    turn.turn_id = next_id_++;
    turn.true_speaker = speaker;
    turn.observed_speaker = speaker;
    turn.text = std::move(text);
    turn.round = round;
    turn.gold_intent = intent;
    turn.gold_entity = std::move(entity);
    turn.gold_event = std::move(event);
    t.turns.push_back(std::move(turn));
  }

  void answer(Transcript& t, int round, const std::string& speaker, const std::vector<std::string>& frames,
              const std::string& code, std::optional<GoldEvent> event = std::nullopt) {
    add(t, round, speaker, fill(pick(frames, rng_), registry_.at(code).name), Intent::give_answer, code,
        std::move(event));
  }

  void build_round(Transcript& t, int round) {
    const Question& q = t.meta.questions[static_cast<std::size_t>(round)];
    TranscriptTurn sys;
    sys.turn_id = next_id_++;
    sys.true_speaker = sys.observed_speaker = std::string(kSystemSpeaker);
    sys.text = "Which country does this flag belong to? " + format_options(q, registry_);
    sys.round = round;
    t.turns.push_back(std::move(sys));

    const bool p1_leads = rng_.bernoulli(0.5);
    const std::string a = p1_leads ? "P1" : "P2";
    const std::string b = p1_leads ? "P2" : "P1";
    const std::string settled = rng_.bernoulli(model_.p_correct) ? q.target : other_option(q, rng_, {q.target});
    const GoldEvent agreed{GoldEventKind::agreement, settled};

    if (rng_.bernoulli(model_.p_elimination_opening)) {
      const std::string wrong = other_option(q, rng_, {settled});
      answer(t, round, a, model_.negation_frames, wrong);
      answer(t, round, b, model_.negation_echo_frames, wrong);
    }

    if (rng_.bernoulli(model_.p_counter_proposal)) {
      const std::string first = other_option(q, rng_, {settled});
      answer(t, round, a, model_.propose_frames, first);
      answer(t, round, b, model_.counter_frames, settled, GoldEvent{GoldEventKind::disagreement, std::nullopt});
      if (rng_.bernoulli(model_.p_explicit_agree)) {
        add(t, round, a, pick(model_.explicit_agree_frames, rng_), Intent::agree, std::nullopt, agreed);
      } else {
        answer(t, round, a, model_.accept_frames, settled, agreed);
      }
    } else {
      answer(t, round, a, model_.propose_frames, settled);
      if (rng_.bernoulli(model_.p_repeat_own)) answer(t, round, a, model_.reinforce_frames, settled);
      if (rng_.bernoulli(model_.p_explicit_agree)) {
        add(t, round, b, pick(model_.explicit_agree_frames, rng_), Intent::agree, std::nullopt, agreed);
      } else {
        answer(t, round, b, model_.accept_frames, settled, agreed);
      }
    }

    const auto followups = rng_.index(static_cast<std::size_t>(model_.max_followups) + 1);
    for (std::size_t i = 0; i < followups; ++i) {
      answer(t, round, i % 2 == 0 ? a : b, model_.followup_frames, settled);
    }
  }

  const PlayerModel& model_;
  const CountryRegistry& registry_;
  Rng& rng_;
  int next_id_ = 1;
};

void read_frames(const json& j, const char* key, std::vector<std::string>& out) {
  if (!j.contains(key)) return;
  if (!j[key].is_array()) throw ConfigError(std::string(key) + " must be a list of strings");
  out.clear();
  for (const auto& f : j[key]) {
    if (!f.is_string()) throw ConfigError(std::string(key) + " must be a list of strings");
    out.push_back(f.get<std::string>());
  }
}

}  // namespace

void validate(const PlayerModel& m) {
  const std::pair<const char*, double> probs[] = {{"p_elimination_opening", m.p_elimination_opening},
                                                  {"p_repeat_own", m.p_repeat_own},
                                                  {"p_explicit_agree", m.p_explicit_agree},
                                                  {"p_counter_proposal", m.p_counter_proposal},
                                                  {"p_correct", m.p_correct}};
  for (const auto& [name, p] : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
  }
  if (m.max_followups < 0) throw ConfigError("max_followups must not be negative");
  const std::pair<const char*, const std::vector<std::string>*> frames[] = {
      {"negation_frames", &m.negation_frames},   {"negation_echo_frames", &m.negation_echo_frames},
      {"propose_frames", &m.propose_frames},     {"counter_frames", &m.counter_frames},
      {"accept_frames", &m.accept_frames},       {"reinforce_frames", &m.reinforce_frames},
      {"followup_frames", &m.followup_frames},   {"explicit_agree_frames", &m.explicit_agree_frames}};
  for (const auto& [name, list] : frames) {
    if (list->empty()) throw ConfigError(std::string(name) + " is empty");
    for (const auto& f : *list) {
      const bool agree_list = list == &m.explicit_agree_frames;
      if (!agree_list && f.find("{X}") == std::string::npos) {
        throw ConfigError(std::string(name) + " frame lacks {X}: " + f);
      }
      if (agree_list && f.find("{X}") != std::string::npos) {
        throw ConfigError("explicit_agree_frames must not name a country: " + f);
      }
    }
  }
}

PlayerModel load_player_model(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("player model: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("player model must be a JSON object");
  PlayerModel m;
  auto number = [&](const char* key, double& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
    out = j[key].get<double>();
  };
  number("p_elimination_opening", m.p_elimination_opening);
  number("p_repeat_own", m.p_repeat_own);
  number("p_explicit_agree", m.p_explicit_agree);
  number("p_counter_proposal", m.p_counter_proposal);
  number("p_correct", m.p_correct);
  if (j.contains("max_followups")) {
    if (!j["max_followups"].is_number_integer()) throw ConfigError("max_followups must be an integer");
    m.max_followups = j["max_followups"].get<int>();
  }
  read_frames(j, "negation_frames", m.negation_frames);
  read_frames(j, "negation_echo_frames", m.negation_echo_frames);
  read_frames(j, "propose_frames", m.propose_frames);
  read_frames(j, "counter_frames", m.counter_frames);
  read_frames(j, "accept_frames", m.accept_frames);
  read_frames(j, "reinforce_frames", m.reinforce_frames);
  read_frames(j, "followup_frames", m.followup_frames);
  read_frames(j, "explicit_agree_frames", m.explicit_agree_frames);
  validate(m);
  return m;
}

PlayerModel load_player_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open player model " + path.string());
  return load_player_model(in);
}

std::vector<Transcript> synthesize_dialogues(const PlayerModel& model, std::size_t n, std::uint64_t seed,
                                             const CountryRegistry& registry) {
  validate(model);
  std::vector<Transcript> out;
  out.reserve(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    DialogueBuilder builder(model, registry, rng);
    out.push_back(builder.build(i));
  }
  return out;
}

std::vector<SweepRow> run_sweep(std::span<const Transcript> corpus, std::span<const double> p_grid,
                                std::uint64_t seed, int agreement_threshold,
                                std::shared_ptr<const CountryRegistry> registry,
                                std::shared_ptr<const NluEngine> nlu) {
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    SweepRow row;
    row.p_confusion = p_grid[i];
    std::vector<MetricsReport> procedural;
    std::vector<MetricsReport> diarised;
    for (std::size_t k = 0; k < corpus.size(); ++k) {
      const Transcript noisy = apply_noise(corpus[k], NoiseModel{p_grid[i], mix(mix(seed, i), k)});
      for (auto kind : {StrategyKind::procedural, StrategyKind::diarised}) {
        SessionConfig config;
        config.strategy = kind;
        config.agreement_threshold = agreement_threshold;
        config.seed = seed;
        const auto log = replay(noisy, config, registry, nlu);
        (kind == StrategyKind::procedural ? procedural : diarised).push_back(compute_metrics(log, noisy));
      }
    }
    row.procedural = summarize(procedural);
    row.diarised = summarize(diarised);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace quizmaster
