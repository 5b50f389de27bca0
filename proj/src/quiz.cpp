#include "quizmaster/quiz.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "quizmaster/errors.hpp"

namespace quizmaster {

void validate_question(const Question& q, const CountryRegistry& registry) {
  std::set<std::string> seen;
  for (const auto& code : q.options) {
    if (!registry.contains(code)) throw ArgumentError("question option '" + code + "' is not in the registry");
    if (!seen.insert(code).second) throw ArgumentError("question option '" + code + "' appears twice");
  }
  if (!seen.contains(q.target)) throw ArgumentError("question target '" + q.target + "' is not among its options");
}

Question generate_question(const CountryRegistry& registry, int index, Rng& rng) {
  const std::size_t n = registry.size();
  if (n < 4) throw ConfigError("registry needs at least 4 countries to build a question, has " + std::to_string(n));

  const auto records = registry.records();
  const std::size_t target = rng.index(n);

  std::vector<std::size_t> pool(n - 1);
  std::iota(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(target), std::size_t{0});
  std::iota(pool.begin() + static_cast<std::ptrdiff_t>(target), pool.end(), target + 1);
  // Partial Fisher-Yates: the first three slots become the distractors.
  for (std::size_t i = 0; i < 3; ++i) {
    std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
  }

  Question q;
  q.target = records[target].code;
  q.question_index = index;
  q.options = {records[target].code, records[pool[0]].code, records[pool[1]].code, records[pool[2]].code};
  rng.shuffle(std::span<std::string>(q.options));
  return q;
}

std::string flag_glyph(std::string_view code) {
  if (code.size() != 2) throw ArgumentError("flag code must be exactly two letters, got '" + std::string(code) + "'");
  std::string out;
  for (const char c : code) {
    if (c < 'A' || c > 'Z') throw ArgumentError("flag code must be two uppercase ASCII letters, got '" + std::string(code) + "'");
    // Regional indicators start at U+1F1E6; all of them encode as F0 9F 87 xx.
    const unsigned cp = 0x1F1E6u + static_cast<unsigned>(c - 'A');
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::string get_clue(const CountryRegistry& registry, std::string_view code, Rng& rng, ClueCursor& cursor) {
  const auto& clues = registry.at(code).clues;
  std::size_t pick = 0;
  if (clues.size() > 1) {
    if (cursor.last && *cursor.last < clues.size()) {
      // Draw among the other n-1 clues and skip over the previous one.
      pick = rng.index(clues.size() - 1);
      if (pick >= *cursor.last) ++pick;
    } else {
      pick = rng.index(clues.size());
    }
  }
  cursor.last = pick;
  return clues[pick];
}

}  // namespace quizmaster
