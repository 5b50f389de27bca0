#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "quizmaster/registry.hpp"
#include "quizmaster/resources.hpp"
#include "quizmaster/transcript.hpp"

namespace quizmaster::testing {

inline std::filesystem::path data_dir() { return QUIZMASTER_TEST_DATA_DIR; }
inline std::filesystem::path fixture(const std::string& name) { return data_dir() / "fixtures" / name; }

// Shipped data, loaded once per test binary.
inline const Resources& shipped() {
  static const Resources r = load_resources(data_dir());
  return r;
}

inline CountryRecord record(std::string code, std::string name, std::vector<std::string> aliases = {},
                            std::vector<std::string> homophones = {}, std::vector<std::string> clues = {"a clue"}) {
  return CountryRecord{std::move(code), std::move(name), std::move(aliases), std::move(homophones), std::move(clues)};
}

inline Transcript example_dialogue() { return parse_transcript_file(fixture("table1.jsonl")); }

}  // namespace quizmaster::testing
