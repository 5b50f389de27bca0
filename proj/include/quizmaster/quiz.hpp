#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "quizmaster/registry.hpp"
#include "quizmaster/rng.hpp"

namespace quizmaster {

// One quiz round: a flag to identify among four options.
struct Question {
  std::string target;
  std::array<std::string, 4> options;
  int question_index = 0;

  bool operator==(const Question&) const = default;
};

// Throws ArgumentError unless the options are 4 distinct known codes that
// contain the target.
void validate_question(const Question& q, const CountryRegistry& registry);

// Uniform target, three distractors sampled without replacement, shuffled
// option order. Throws ConfigError when the registry has fewer than 4 entries.
Question generate_question(const CountryRegistry& registry, int index, Rng& rng);

// Two regional-indicator symbols, UTF-8 encoded ("FR" -> U+1F1EB U+1F1F7).
std::string flag_glyph(std::string_view code);

// Remembers the last clue handed out for the current question.
struct ClueCursor {
  std::optional<std::size_t> last;
};

// Never repeats the previous clue when the pool has two or more entries.
std::string get_clue(const CountryRegistry& registry, std::string_view code, Rng& rng,
                     ClueCursor& cursor);

}  // namespace quizmaster
