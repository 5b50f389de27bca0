#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "quizmaster/dialogue.hpp"
#include "quizmaster/registry.hpp"
#include "quizmaster/rng.hpp"

namespace quizmaster {

// Surface templates per agent act. Placeholders: {flag} {options} {candidate}
// {clue} {score} {answer} {verdict}.
class TemplateSet {
 public:
  TemplateSet() = default;
  explicit TemplateSet(std::map<ActKind, std::vector<std::string>> pools) : pools_(std::move(pools)) {}

  // Throws TemplateError for empty pools, unknown placeholders, or
  // placeholders the act's payload cannot fill.
  void validate() const;

  const std::vector<std::string>* pool(ActKind act) const;
  const std::map<ActKind, std::vector<std::string>>& pools() const noexcept { return pools_; }

 private:
  std::map<ActKind, std::vector<std::string>> pools_;
};

// Reads a JSON object mapping act names to template lists and validates it.
TemplateSet load_templates(std::istream& in);
TemplateSet load_templates_file(const std::filesystem::path& path);

// Last template index used per act, for one session.
struct NlgHistory {
  std::map<ActKind, std::size_t> last;
};

// "A, B, C or D" in question order.
std::string format_options(const Question& q, const CountryRegistry& registry);

// Picks a template (never the previous one for this act when the pool has
// two or more) and fills its placeholders. Throws TemplateError.
std::string realize(const AgentAction& action, const TemplateSet& templates, const CountryRegistry& registry,
                    Rng& rng, NlgHistory& history);

}  // namespace quizmaster
