#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "quizmaster/nlg.hpp"
#include "quizmaster/nlu.hpp"
#include "quizmaster/registry.hpp"

namespace quizmaster {

// QUIZ_DATA_DIR when set, else the data directory the library was built with.
std::filesystem::path default_data_dir();

struct Resources {
  std::shared_ptr<const CountryRegistry> registry;
  std::shared_ptr<const NluEngine> nlu;
  std::shared_ptr<const TemplateSet> templates;
};

// Reads countries.json, nlu_config.json and templates.json from dir.
Resources load_resources(const std::optional<std::filesystem::path>& dir = std::nullopt);

}  // namespace quizmaster
