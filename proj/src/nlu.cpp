#include "quizmaster/nlu.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>

#include <nlohmann/json.hpp>

#include "quizmaster/errors.hpp"
#include "quizmaster/text.hpp"

namespace quizmaster {
namespace {

constexpr std::array<std::pair<Intent, std::string_view>, 7> kIntentNames{{
    {Intent::give_answer, "give_answer"},
    {Intent::agree, "agree"},
    {Intent::disagree, "disagree"},
    {Intent::ask_clue, "ask_clue"},
    {Intent::repeat_question, "repeat_question"},
    {Intent::skip_question, "skip_question"},
    {Intent::out_of_scope, "out_of_scope"},
}};

// Highest priority first.
constexpr std::array<Intent, 5> kKeywordPriority{
    Intent::ask_clue, Intent::skip_question, Intent::repeat_question, Intent::agree, Intent::disagree,
};

constexpr double kScoreEpsilon = 1e-12;

struct Candidate {
  std::string code;
  double score;
  std::string surface;
  std::size_t start;  // token index
  std::size_t length;  // tokens
  bool in_options;
};

// True when a should be preferred over b.
bool better(const Candidate& a, const Candidate& b) {
  if (std::abs(a.score - b.score) > kScoreEpsilon) return a.score > b.score;
  if (a.in_options != b.in_options) return a.in_options;
  if (a.surface.size() != b.surface.size()) return a.surface.size() > b.surface.size();
  return a.start < b.start;
}

bool strictly_inside(std::size_t start, std::size_t length, std::size_t outer_start, std::size_t outer_length) {
  return outer_length > length && outer_start <= start && start + length <= outer_start + outer_length;
}

}  // namespace

std::string_view to_string(Intent intent) {
  for (const auto& [value, name] : kIntentNames) {
    if (value == intent) return name;
  }
  return "out_of_scope";
}

Intent parse_intent(std::string_view label) {
  for (const auto& [value, name] : kIntentNames) {
    if (name == label) return value;
  }
  throw ArgumentError("unknown intent '" + std::string(label) + "'");
}

NluResult NluResult::answer(EntityMatch entity) { return NluResult(Intent::give_answer, std::move(entity)); }

NluResult NluResult::of(Intent intent) {
  if (intent == Intent::give_answer) throw ArgumentError("give_answer requires a country entity");
  return NluResult(intent, std::nullopt);
}

void to_json(nlohmann::json& j, const NluResult& r) {
  j = nlohmann::json{{"intent", to_string(r.intent())}};
  if (r.entity()) {
    j["entity"] = r.entity()->code;
    j["score"] = r.entity()->score;
    j["surface"] = r.entity()->surface;
  } else {
    j["entity"] = nullptr;
  }
}

NluConfig default_nlu_config() {
  NluConfig c;
  c.threshold = 0.8;
  c.lexicons = {
      {Intent::agree, {"yes", "yeah", "agree", "sure", "correct", "right", "exactly", "ok"}},
      {Intent::disagree, {"no", "nope", "disagree", "don't think", "not sure about that"}},
      {Intent::ask_clue, {"clue", "hint", "help"}},
      {Intent::skip_question, {"skip", "pass", "next question"}},
      {Intent::repeat_question, {"repeat", "say again", "what were the options"}},
  };
  return c;
}

NluConfig load_nlu_config(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError(std::string("NLU config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw LoadError("NLU config must be a JSON object");
  NluConfig c;
  if (doc.contains("threshold")) {
    if (!doc["threshold"].is_number()) throw LoadError("NLU config: threshold must be a number");
    c.threshold = doc["threshold"].get<double>();
  }
  if (!(c.threshold > 0.0 && c.threshold <= 1.0)) throw LoadError("NLU config: threshold must be in (0, 1]");
  if (!doc.contains("lexicons") || !doc["lexicons"].is_object()) throw LoadError("NLU config: missing 'lexicons' object");
  for (const auto& [label, phrases] : doc["lexicons"].items()) {
    Intent intent;
    try {
      intent = parse_intent(label);
    } catch (const ArgumentError&) {
      throw LoadError("NLU config: unknown intent '" + label + "' in lexicons");
    }
    if (intent == Intent::give_answer || intent == Intent::out_of_scope) {
      throw LoadError("NLU config: intent '" + label + "' cannot have a lexicon");
    }
    if (!phrases.is_array()) throw LoadError("NLU config: lexicon '" + label + "' must be an array");
    auto& list = c.lexicons[intent];
    for (const auto& p : phrases) {
      if (!p.is_string() || text::normalize(p.get<std::string>()).empty()) {
        throw LoadError("NLU config: lexicon '" + label + "' holds a blank or non-string phrase");
      }
      list.push_back(p.get<std::string>());
    }
  }
  return c;
}

NluConfig load_nlu_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open NLU config " + path.string());
  return load_nlu_config(in);
}

NluEngine::NluEngine(std::shared_ptr<const CountryRegistry> registry, NluConfig config)
    : registry_(std::move(registry)), config_(std::move(config)) {
  if (!registry_) throw ArgumentError("NluEngine needs a registry");
  for (const auto& [intent, list] : config_.lexicons) {
    for (const auto& raw : list) {
      auto tokens = text::tokenize(text::normalize(raw));
      if (!tokens.empty()) phrases_.push_back(Phrase{intent, std::move(tokens)});
    }
  }
}

std::optional<EntityMatch> NluEngine::extract_country(std::string_view raw,
                                                      std::span<const std::string> options) const {
  const auto tokens = text::tokenize(text::normalize(raw));
  if (tokens.empty()) return std::nullopt;

  const auto records = registry_->records();
  const auto surfaces = registry_->surfaces();
  auto in_options = [&](const std::string& code) {
    return std::find(options.begin(), options.end(), code) != options.end();
  };

  std::vector<Candidate> exact;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (const std::size_t s : registry_->surfaces_starting_with(tokens[i])) {
      const auto& surface = surfaces[s];
      const std::size_t n = surface.tokens.size();
      if (i + n > tokens.size()) continue;
      if (!std::equal(surface.tokens.begin(), surface.tokens.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) continue;
      const auto& code = records[surface.record].code;
      exact.push_back(Candidate{code, 1.0, surface.normalized, i, n, in_options(code)});
    }
  }

  if (!exact.empty()) {
    // "papua new guinea" also contains "guinea"; a mention swallowed by a
    // longer mention is not a separate candidate.
    std::vector<Candidate> kept;
    for (const auto& c : exact) {
      const bool swallowed = std::any_of(exact.begin(), exact.end(), [&](const Candidate& o) {
        return strictly_inside(c.start, c.length, o.start, o.length);
      });
      if (!swallowed) kept.push_back(c);
    }
    const auto best = std::min_element(kept.begin(), kept.end(), better);
    return EntityMatch{best->code, 1.0, best->surface};
  }

  std::optional<Candidate> best;
  for (const auto& code : options) {
    const auto* record = registry_->find(code);
    if (!record) continue;
    std::vector<std::string> names{record->name};
    names.insert(names.end(), record->aliases.begin(), record->aliases.end());
    for (const auto& name : names) {
      const std::string target = text::normalize(name);
      const std::size_t k = text::tokenize(target).size();
      const std::size_t lo = k > 1 ? k - 1 : 1;
      for (std::size_t n = lo; n <= k + 1 && n <= tokens.size(); ++n) {
        for (std::size_t start = 0; start + n <= tokens.size(); ++start) {
          const std::string gram = text::join(tokens, start, n);
          const std::size_t longest = std::max(gram.size(), target.size());
          const auto bound = static_cast<std::size_t>(std::floor((1.0 - config_.threshold) * static_cast<double>(longest) + 1e-9));
          const auto distance = text::bounded_edit_distance(gram, target, bound);
          if (!distance) continue;
          const double score = 1.0 - static_cast<double>(*distance) / static_cast<double>(longest);
          if (score + kScoreEpsilon < config_.threshold) continue;
          Candidate c{code, score, gram, start, n, true};
          if (!best || better(c, *best)) best = std::move(c);
        }
      }
    }
  }
  if (!best) return std::nullopt;
  return EntityMatch{best->code, best->score, best->surface};
}

NluResult NluEngine::classify(std::string_view raw, std::span<const std::string> options) const {
  if (auto entity = extract_country(raw, options)) return NluResult::answer(std::move(*entity));

  const auto tokens = text::tokenize(text::normalize(raw));
  struct Hit {
    Intent intent;
    std::size_t start;
    std::size_t length;
  };
  std::vector<Hit> hits;
  for (const auto& phrase : phrases_) {
    for (const std::size_t at : text::find_token_runs(tokens, phrase.tokens)) {
      hits.push_back(Hit{phrase.intent, at, phrase.tokens.size()});
    }
  }
  // "not sure about that" must not also count as "sure".
  std::vector<Hit> kept;
  for (const auto& h : hits) {
    const bool swallowed = std::any_of(hits.begin(), hits.end(), [&](const Hit& o) {
      return strictly_inside(h.start, h.length, o.start, o.length);
    });
    if (!swallowed) kept.push_back(h);
  }
  for (const Intent intent : kKeywordPriority) {
    if (std::any_of(kept.begin(), kept.end(), [&](const Hit& h) { return h.intent == intent; })) {
      return NluResult::of(intent);
    }
  }
  return NluResult::of(Intent::out_of_scope);
}

namespace {
std::shared_ptr<const CountryRegistry> borrow(const CountryRegistry& registry) {
  return std::shared_ptr<const CountryRegistry>(&registry, [](const CountryRegistry*) {});
}
}  // namespace

NluResult classify(std::string_view text, const CountryRegistry& registry, const NluConfig& config,
                   std::span<const std::string> options) {
  return NluEngine(borrow(registry), config).classify(text, options);
}

std::optional<EntityMatch> extract_country(std::string_view text, const CountryRegistry& registry,
                                           std::span<const std::string> options, const NluConfig& config) {
  return NluEngine(borrow(registry), config).extract_country(text, options);
}

}  // namespace quizmaster
