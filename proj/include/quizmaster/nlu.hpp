#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "quizmaster/registry.hpp"

namespace quizmaster {

enum class Intent {
  give_answer,
  agree,
  disagree,
  ask_clue,
  repeat_question,
  skip_question,
  out_of_scope,
};

std::string_view to_string(Intent intent);
// Throws ArgumentError for unknown labels.
Intent parse_intent(std::string_view label);

struct EntityMatch {
  std::string code;
  double score = 0.0;   // 1.0 for exact surface matches
  std::string surface;  // normalized text that produced the match

  bool operator==(const EntityMatch&) const = default;
};

// An intent with at most one country entity. An entity is present exactly
// when the intent is give_answer; the factories enforce it.
class NluResult {
 public:
  static NluResult answer(EntityMatch entity);
  // Throws ArgumentError for give_answer, which needs an entity.
  static NluResult of(Intent intent);

  Intent intent() const noexcept { return intent_; }
  const std::optional<EntityMatch>& entity() const noexcept { return entity_; }
  std::optional<double> match_score() const {
    return entity_ ? std::optional<double>(entity_->score) : std::nullopt;
  }

  bool operator==(const NluResult&) const = default;

 private:
  NluResult(Intent intent, std::optional<EntityMatch> entity) : intent_(intent), entity_(std::move(entity)) {}

  Intent intent_;
  std::optional<EntityMatch> entity_;
};

void to_json(nlohmann::json& j, const NluResult& r);

struct NluConfig {
  double threshold = 0.8;
  // Keyword phrases for every intent except give_answer and out_of_scope.
  std::map<Intent, std::vector<std::string>> lexicons;
};

NluConfig default_nlu_config();
// Reads {"threshold": x, "lexicons": {"agree": [...], ...}}. Throws LoadError.
NluConfig load_nlu_config(std::istream& in);
NluConfig load_nlu_config_file(const std::filesystem::path& path);

// Rule-based understanding over a shared registry. Immutable; safe to share
// across threads.
class NluEngine {
 public:
  NluEngine(std::shared_ptr<const CountryRegistry> registry, NluConfig config);

  // Exact surface matches over the whole registry first (score 1.0); failing
  // that, edit-distance matching of token n-grams against the option names.
  // Ties: in-options, then longest surface, then earliest position.
  std::optional<EntityMatch> extract_country(std::string_view text,
                                             std::span<const std::string> options = {}) const;

  // give_answer when a country is found, otherwise the highest-priority
  // keyword intent: ask_clue > skip_question > repeat_question > agree >
  // disagree > out_of_scope.
  NluResult classify(std::string_view text, std::span<const std::string> options = {}) const;

  const NluConfig& config() const noexcept { return config_; }
  const CountryRegistry& registry() const noexcept { return *registry_; }

 private:
  struct Phrase {
    Intent intent;
    std::vector<std::string> tokens;
  };

  std::shared_ptr<const CountryRegistry> registry_;
  NluConfig config_;
  std::vector<Phrase> phrases_;
};

// Convenience wrappers that build a throwaway engine.
NluResult classify(std::string_view text, const CountryRegistry& registry, const NluConfig& config,
                   std::span<const std::string> options = {});
std::optional<EntityMatch> extract_country(std::string_view text, const CountryRegistry& registry,
                                           std::span<const std::string> options, const NluConfig& config);

}  // namespace quizmaster
