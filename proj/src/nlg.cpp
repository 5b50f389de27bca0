#include "quizmaster/nlg.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>

#include "quizmaster/errors.hpp"

namespace quizmaster {
namespace {

const std::set<std::string>& known_placeholders() {
  static const std::set<std::string> names{"flag", "options", "candidate", "clue", "score", "answer", "verdict"};
  return names;
}

std::set<std::string> fillable(ActKind act) {
  switch (act) {
    case ActKind::ask_question:
    case ActKind::repeat_question: return {"flag", "options"};
    case ActKind::confirm_answer: return {"candidate"};
    case ActKind::give_clue: return {"clue"};
    case ActKind::feedback_correct:
    case ActKind::feedback_incorrect: return {"candidate", "answer", "score"};
    case ActKind::acknowledge_skip: return {"answer"};
    case ActKind::prompt_continue: return {};
    case ActKind::announce_result: return {"score", "verdict"};
  }
  return {};
}

// Splits "a {x} b" into literal and placeholder pieces.
struct Piece {
  bool placeholder;
  std::string text;
};

std::vector<Piece> parse_template(const std::string& t) {
  std::vector<Piece> pieces;
  std::string literal;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] == '{') {
      const auto close = t.find('}', i);
      if (close == std::string::npos) throw TemplateError("unterminated placeholder in template \"" + t + "\"");
      if (!literal.empty()) pieces.push_back({false, std::exchange(literal, {})});
      pieces.push_back({true, t.substr(i + 1, close - i - 1)});
      i = close;
    } else {
      literal.push_back(t[i]);
    }
  }
  if (!literal.empty()) pieces.push_back({false, literal});
  return pieces;
}

const std::string& name_of(const CountryRegistry& registry, const std::string& code) {
  return registry.at(code).name;
}

std::optional<std::string> fill(const std::string& placeholder, const AgentAction& a,
                                 const CountryRegistry& registry) {
  if (placeholder == "flag" && a.question) return flag_glyph(a.question->target);
  if (placeholder == "options" && a.question) return format_options(*a.question, registry);
  if (placeholder == "candidate" && a.candidate) return name_of(registry, *a.candidate);
  if (placeholder == "answer" && a.answer) return name_of(registry, *a.answer);
  if (placeholder == "clue" && a.clue) return *a.clue;
  if (placeholder == "score" && a.score) return std::to_string(*a.score);
  if (placeholder == "verdict" && a.win) return *a.win ? std::string("You win!") : std::string("Better luck next time.");
  return std::nullopt;
}

}  // namespace

void TemplateSet::validate() const {
  for (const auto& [act, list] : pools_) {
    const std::string label(to_string(act));
    if (list.empty()) throw TemplateError("template pool for " + label + " is empty");
    const auto allowed = fillable(act);
    for (const auto& t : list) {
      for (const auto& piece : parse_template(t)) {
        if (!piece.placeholder) continue;
        if (!known_placeholders().contains(piece.text)) {
          throw TemplateError("unknown placeholder {" + piece.text + "} in " + label + " template");
        }
        if (!allowed.contains(piece.text)) {
          throw TemplateError("placeholder {" + piece.text + "} cannot be filled for " + label);
        }
      }
    }
  }
}

const std::vector<std::string>* TemplateSet::pool(ActKind act) const {
  auto it = pools_.find(act);
  return it == pools_.end() ? nullptr : &it->second;
}

TemplateSet load_templates(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError(std::string("template file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw LoadError("template file must map act names to template lists");
  std::map<ActKind, std::vector<std::string>> pools;
  for (const auto& [label, list] : doc.items()) {
    ActKind act;
    try {
      act = parse_act(label);
    } catch (const ArgumentError&) {
      throw LoadError("template file: unknown act '" + label + "'");
    }
    if (!list.is_array()) throw LoadError("template file: '" + label + "' must be a list");
    auto& pool = pools[act];
    for (const auto& t : list) {
      if (!t.is_string()) throw LoadError("template file: '" + label + "' holds a non-string template");
      pool.push_back(t.get<std::string>());
    }
  }
  TemplateSet set(std::move(pools));
  set.validate();
  return set;
}

TemplateSet load_templates_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open template file " + path.string());
  return load_templates(in);
}

std::string format_options(const Question& q, const CountryRegistry& registry) {
  std::string out;
  for (std::size_t i = 0; i < q.options.size(); ++i) {
    if (i > 0) out += i + 1 == q.options.size() ? " or " : ", ";
    out += name_of(registry, q.options[i]);
  }
  return out;
}

std::string realize(const AgentAction& action, const TemplateSet& templates, const CountryRegistry& registry,
                    Rng& rng, NlgHistory& history) {
  const auto* pool = templates.pool(action.act);
  if (!pool || pool->empty()) throw TemplateError("no templates for act " + std::string(to_string(action.act)));

  std::size_t pick = 0;
  if (pool->size() > 1) {
    auto last = history.last.find(action.act);
    if (last != history.last.end() && last->second < pool->size()) {
      pick = rng.index(pool->size() - 1);
      if (pick >= last->second) ++pick;
    } else {
      pick = rng.index(pool->size());
    }
  }

  std::string out;
  for (const auto& piece : parse_template((*pool)[pick])) {
    if (!piece.placeholder) {
      out += piece.text;
      continue;
    }
    auto value = fill(piece.text, action, registry);
    if (!value) {
      throw TemplateError("placeholder {" + piece.text + "} cannot be filled for " + std::string(to_string(action.act)));
    }
    out += *value;
  }
  history.last[action.act] = pick;
  return out;
}

}  // namespace quizmaster
