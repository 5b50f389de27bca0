#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace quizmaster::text {

// Case-folds ASCII letters, drops punctuation, turns hyphens and slashes into
// spaces, trims and collapses runs of whitespace. Bytes >= 0x80 pass through
// untouched, so UTF-8 sequences survive.
std::string normalize(std::string_view raw);

// Splits an already-normalized string on single spaces.
std::vector<std::string> tokenize(std::string_view normalized);

std::string join(std::span<const std::string> tokens, std::size_t first, std::size_t count);

// Levenshtein distance over bytes.
std::size_t edit_distance(std::string_view a, std::string_view b);

// Levenshtein distance if it is <= bound, otherwise nullopt. Rows are cut off
// as soon as every cell exceeds the bound.
std::optional<std::size_t> bounded_edit_distance(std::string_view a, std::string_view b,
                                                 std::size_t bound);

// Position of needle as a contiguous token run inside haystack.
std::vector<std::size_t> find_token_runs(std::span<const std::string> haystack,
                                         std::span<const std::string> needle);

}  // namespace quizmaster::text
