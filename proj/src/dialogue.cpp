#include "quizmaster/dialogue.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include <nlohmann/json.hpp>

#include "quizmaster/errors.hpp"

namespace quizmaster {
namespace {

constexpr std::array<std::pair<ActKind, std::string_view>, 9> kActNames{{
    {ActKind::ask_question, "ask_question"},
    {ActKind::confirm_answer, "confirm_answer"},
    {ActKind::give_clue, "give_clue"},
    {ActKind::feedback_correct, "feedback_correct"},
    {ActKind::feedback_incorrect, "feedback_incorrect"},
    {ActKind::repeat_question, "repeat_question"},
    {ActKind::acknowledge_skip, "acknowledge_skip"},
    {ActKind::prompt_continue, "prompt_continue"},
    {ActKind::announce_result, "announce_result"},
}};

AgentAction act(ActKind kind) {
  AgentAction a;
  a.act = kind;
  return a;
}

nlohmann::json question_json(const Question& q) {
  return {{"index", q.question_index}, {"target", q.target}, {"options", q.options}};
}

}  // namespace

std::string_view to_string(StrategyKind kind) {
  return kind == StrategyKind::procedural ? "procedural" : "diarised";
}

StrategyKind parse_strategy(std::string_view id) {
  if (id == "procedural") return StrategyKind::procedural;
  if (id == "diarised") return StrategyKind::diarised;
  throw ConfigError("unknown strategy '" + std::string(id) + "' (expected procedural or diarised)");
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::asking: return "asking";
    case Phase::listening: return "listening";
    case Phase::confirming: return "confirming";
    case Phase::feedback: return "feedback";
    case Phase::finished: return "finished";
  }
  return "finished";
}

std::string_view to_string(ActKind kind) {
  for (const auto& [value, name] : kActNames) {
    if (value == kind) return name;
  }
  return "prompt_continue";
}

ActKind parse_act(std::string_view label) {
  for (const auto& [value, name] : kActNames) {
    if (name == label) return value;
  }
  throw ArgumentError("unknown agent act '" + std::string(label) + "'");
}

void record_answer(ProceduralAgreementState& state, const std::string& code) {
  state.prev_answer = std::exchange(state.last_answer, code);
  ++state.n_answers;
}

std::optional<std::string> procedural_check(const ProceduralAgreementState& state) {
  if (state.n_answers < state.threshold) return std::nullopt;
  if (!state.prev_answer || !state.last_answer) return std::nullopt;
  if (*state.prev_answer != *state.last_answer) return std::nullopt;
  return state.last_answer;
}

bool record_answer(DiarisedAgreementState& state, std::string_view speaker, const std::string& code) {
  const auto& expected = state.expected_speakers;
  if (std::find(expected.begin(), expected.end(), speaker) == expected.end()) return false;
  state.current_answer_by_speaker[std::string(speaker)] = code;
  return true;
}

std::optional<std::string> diarised_check(const DiarisedAgreementState& state) {
  std::array<std::optional<std::string>, 2> answers;
  for (std::size_t i = 0; i < 2; ++i) {
    auto it = state.current_answer_by_speaker.find(state.expected_speakers[i]);
    if (it != state.current_answer_by_speaker.end()) answers[i] = it->second;
  }
  if (!answers[0] || !answers[1] || *answers[0] != *answers[1]) return std::nullopt;
  return answers[0];
}

void to_json(nlohmann::json& j, const AgentAction& a) {
  j = nlohmann::json{{"act", to_string(a.act)}};
  if (a.question) j["question"] = question_json(*a.question);
  if (a.candidate) j["candidate"] = *a.candidate;
  if (a.answer) j["answer"] = *a.answer;
  if (a.clue) j["clue"] = *a.clue;
  if (a.score) j["score"] = *a.score;
  if (a.win) j["win"] = *a.win;
}

void to_json(nlohmann::json& j, const DialogueState& s) {
  auto opt = [](const std::optional<std::string>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  j = nlohmann::json{
      {"phase", to_string(s.phase)},
      {"round", s.round},
      {"score", s.score},
      {"question", question_json(s.question)},
      {"disagreement_count", s.disagreement_count},
      {"pending_candidate", opt(s.pending_candidate)},
      {"clue_offered", s.clue_offered},
      {"system_question_pending", s.system_question_pending},
      {"last_given_answer", opt(s.last_given_answer)},
  };
  if (const auto* p = std::get_if<ProceduralAgreementState>(&s.strategy_state)) {
    j["strategy"] = {{"kind", "procedural"},
                     {"n_answers", p->n_answers},
                     {"prev_answer", opt(p->prev_answer)},
                     {"last_answer", opt(p->last_answer)},
                     {"threshold", p->threshold}};
  } else {
    const auto& d = std::get<DiarisedAgreementState>(s.strategy_state);
    nlohmann::json answers = nlohmann::json::object();
    for (const auto& [speaker, code] : d.current_answer_by_speaker) answers[speaker] = opt(code);
    j["strategy"] = {{"kind", "diarised"}, {"current_answers", answers}, {"expected_speakers", d.expected_speakers}};
  }
}

void validate(const SessionConfig& config, const CountryRegistry& registry) {
  if (config.agreement_threshold < 1) {
    throw ConfigError("agreement threshold must be at least 1, got " + std::to_string(config.agreement_threshold));
  }
  if (config.clue_trigger < 1) {
    throw ConfigError("clue trigger must be at least 1, got " + std::to_string(config.clue_trigger));
  }
  if (config.speakers[0].empty() || config.speakers[1].empty() || config.speakers[0] == config.speakers[1]) {
    throw ConfigError("session needs two distinct, non-empty speaker labels");
  }
  if (config.script.size() > static_cast<std::size_t>(kRoundsPerGame)) {
    throw ConfigError("question script is longer than a game");
  }
  for (const auto& q : config.script) {
    try {
      validate_question(q, registry);
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string("question script: ") + e.what());
    }
  }
  if (config.script.empty() && registry.size() < 4) {
    throw ConfigError("registry needs at least 4 countries to build questions");
  }
}

DialogueEngine::DialogueEngine(SessionConfig config, std::shared_ptr<const CountryRegistry> registry)
    : config_(std::move(config)), registry_(std::move(registry)) {
  if (!registry_) throw ConfigError("dialogue engine needs a registry");
  validate(config_, *registry_);
}

Question DialogueEngine::question_for(int round, Rng& rng) const {
  if (static_cast<std::size_t>(round) < config_.script.size()) {
    Question q = config_.script[static_cast<std::size_t>(round)];
    q.question_index = round;
    return q;
  }
  return generate_question(*registry_, round, rng);
}

StrategyState DialogueEngine::fresh_strategy_state() const {
  if (config_.strategy == StrategyKind::procedural) {
    ProceduralAgreementState p;
    p.threshold = config_.agreement_threshold;
    return p;
  }
  DiarisedAgreementState d;
  d.expected_speakers = config_.speakers;
  return d;
}

Transition DialogueEngine::start(Rng& rng) const {
  Transition t;
  auto& s = t.state;
  s.phase = Phase::asking;
  s.round = 0;
  s.question = question_for(0, rng);
  s.strategy_state = fresh_strategy_state();
  AgentAction ask = act(ActKind::ask_question);
  ask.question = s.question;
  t.actions.push_back(std::move(ask));
  s.phase = Phase::listening;
  return t;
}

Transition DialogueEngine::handle_utterance(const DialogueState& state, std::string_view speaker,
                                            const NluResult& nlu, Rng& rng) const {
  if (state.phase != Phase::listening && state.phase != Phase::confirming) {
    throw SessionStateError("cannot handle an utterance in phase " + std::string(to_string(state.phase)));
  }
  Transition t{state, {}};
  if (state.phase == Phase::listening) {
    on_listening(t.state, speaker, nlu, rng, t.actions);
  } else {
    on_confirming(t.state, speaker, nlu, rng, t.actions);
  }
  return t;
}

void DialogueEngine::on_listening(DialogueState& s, std::string_view speaker, const NluResult& nlu, Rng& rng,
                                  std::vector<AgentAction>& out) const {
  switch (nlu.intent()) {
    case Intent::give_answer:
      give_answer(s, speaker, nlu.entity()->code, out, rng);
      break;
    case Intent::agree:
      // An explicit "yes" binds to the latest answer from either player.
      if (s.last_given_answer && !s.system_question_pending) {
        confirm(s, *s.last_given_answer, out);
      } else {
        out.push_back(act(ActKind::prompt_continue));
      }
      break;
    case Intent::disagree:
      count_disagreement(s, rng, out);
      break;
    case Intent::ask_clue: {
      AgentAction clue = act(ActKind::give_clue);
      clue.clue = get_clue(*registry_, s.question.target, rng, s.clue_cursor);
      s.clue_offered = true;
      out.push_back(std::move(clue));
      break;
    }
    case Intent::repeat_question: {
      AgentAction repeat = act(ActKind::repeat_question);
      repeat.question = s.question;
      out.push_back(std::move(repeat));
      break;
    }
    case Intent::skip_question:
      skip(s, rng, out);
      break;
    case Intent::out_of_scope:
      break;
  }
}

void DialogueEngine::on_confirming(DialogueState& s, std::string_view speaker, const NluResult& nlu, Rng& rng,
                                   std::vector<AgentAction>& out) const {
  switch (nlu.intent()) {
    case Intent::agree:
      accept_candidate(s, rng, out);
      break;
    case Intent::give_answer:
      if (nlu.entity()->code == *s.pending_candidate) {
        accept_candidate(s, rng, out);
      } else {
        // Naming another country is a "no" followed by a fresh answer.
        drop_candidate(s);
        ++s.disagreement_count;
        give_answer(s, speaker, nlu.entity()->code, out, rng);
      }
      break;
    case Intent::disagree:
      drop_candidate(s);
      if (!count_disagreement(s, rng, out)) out.push_back(act(ActKind::prompt_continue));
      break;
    case Intent::skip_question:
      drop_candidate(s);
      skip(s, rng, out);
      break;
    case Intent::ask_clue:
    case Intent::repeat_question:
      drop_candidate(s);
      on_listening(s, speaker, nlu, rng, out);
      break;
    case Intent::out_of_scope:
      break;
  }
}

void DialogueEngine::give_answer(DialogueState& s, std::string_view speaker, const std::string& code,
                                 std::vector<AgentAction>& out, Rng& rng) const {
  const bool differs = s.last_given_answer && *s.last_given_answer != code;
  s.last_given_answer = code;

  std::optional<std::string> detected;
  if (auto* p = std::get_if<ProceduralAgreementState>(&s.strategy_state)) {
    record_answer(*p, code);
    detected = procedural_check(*p);
  } else {
    auto& d = std::get<DiarisedAgreementState>(s.strategy_state);
    record_answer(d, speaker, code);
    detected = diarised_check(d);
  }

  if (detected) {
    if (differs) ++s.disagreement_count;
    confirm(s, *detected, out);
  } else if (differs) {
    count_disagreement(s, rng, out);
  }
}

void DialogueEngine::confirm(DialogueState& s, const std::string& candidate, std::vector<AgentAction>& out) const {
  s.pending_candidate = candidate;
  s.system_question_pending = true;
  s.phase = Phase::confirming;
  AgentAction a = act(ActKind::confirm_answer);
  a.candidate = candidate;
  out.push_back(std::move(a));
}

void DialogueEngine::accept_candidate(DialogueState& s, Rng& rng, std::vector<AgentAction>& out) const {
  const std::string candidate = *s.pending_candidate;
  const bool correct = candidate == s.question.target;
  if (correct) ++s.score;
  AgentAction a = act(correct ? ActKind::feedback_correct : ActKind::feedback_incorrect);
  a.candidate = candidate;
  a.answer = s.question.target;
  a.score = s.score;
  out.push_back(std::move(a));
  s.pending_candidate.reset();
  s.system_question_pending = false;
  finish_round(s, rng, out);
}

void DialogueEngine::drop_candidate(DialogueState& s) const {
  s.pending_candidate.reset();
  s.system_question_pending = false;
  s.phase = Phase::listening;
  s.last_given_answer.reset();
  if (auto* p = std::get_if<ProceduralAgreementState>(&s.strategy_state)) {
    // n_answers is kept: a fresh matching pair is enough to detect again.
    p->prev_answer.reset();
    p->last_answer.reset();
  } else {
    for (auto& [speaker, code] : std::get<DiarisedAgreementState>(s.strategy_state).current_answer_by_speaker) {
      code.reset();
    }
  }
}

bool DialogueEngine::count_disagreement(DialogueState& s, Rng& rng, std::vector<AgentAction>& out) const {
  ++s.disagreement_count;
  if (s.phase != Phase::listening || s.clue_offered || s.disagreement_count < config_.clue_trigger) return false;
  AgentAction clue = act(ActKind::give_clue);
  clue.clue = get_clue(*registry_, s.question.target, rng, s.clue_cursor);
  s.clue_offered = true;
  out.push_back(std::move(clue));
  return true;
}

void DialogueEngine::skip(DialogueState& s, Rng& rng, std::vector<AgentAction>& out) const {
  AgentAction a = act(ActKind::acknowledge_skip);
  a.answer = s.question.target;
  out.push_back(std::move(a));
  finish_round(s, rng, out);
}

void DialogueEngine::finish_round(DialogueState& s, Rng& rng, std::vector<AgentAction>& out) const {
  s.phase = Phase::feedback;
  Transition next = advance_round(s, rng);
  s = std::move(next.state);
  for (auto& a : next.actions) out.push_back(std::move(a));
}

Transition DialogueEngine::advance_round(const DialogueState& state, Rng& rng) const {
  if (state.phase != Phase::feedback) {
    throw SessionStateError("cannot advance the round in phase " + std::string(to_string(state.phase)));
  }
  Transition t{state, {}};
  auto& s = t.state;
  if (s.round + 1 >= kRoundsPerGame) {
    s.phase = Phase::finished;
    AgentAction a = act(ActKind::announce_result);
    a.score = s.score;
    a.win = s.score == kRoundsPerGame;
    t.actions.push_back(std::move(a));
    return t;
  }
  ++s.round;
  s.question = question_for(s.round, rng);
  s.strategy_state = fresh_strategy_state();
  s.disagreement_count = 0;
  s.pending_candidate.reset();
  s.clue_offered = false;
  s.system_question_pending = false;
  s.last_given_answer.reset();
  s.clue_cursor = {};
  s.phase = Phase::listening;
  AgentAction ask = act(ActKind::ask_question);
  ask.question = s.question;
  t.actions.push_back(std::move(ask));
  return t;
}

Transition DialogueEngine::abandon_round(const DialogueState& state, Rng& rng) const {
  if (state.phase != Phase::listening && state.phase != Phase::confirming) {
    throw SessionStateError("cannot abandon the round in phase " + std::string(to_string(state.phase)));
  }
  Transition t{state, {}};
  if (t.state.phase == Phase::confirming) drop_candidate(t.state);
  skip(t.state, rng, t.actions);
  return t;
}

}  // namespace quizmaster
