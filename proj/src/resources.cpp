#include "quizmaster/resources.hpp"

#include <cstdlib>

#ifndef QUIZMASTER_DEFAULT_DATA_DIR
#define QUIZMASTER_DEFAULT_DATA_DIR "data"
#endif

namespace quizmaster {

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("QUIZ_DATA_DIR"); env && *env) return env;
  return QUIZMASTER_DEFAULT_DATA_DIR;
}

Resources load_resources(const std::optional<std::filesystem::path>& dir) {
  const auto root = dir.value_or(default_data_dir());
  Resources r;
  r.registry = std::make_shared<const CountryRegistry>(load_registry_file(root / "countries.json"));
  r.nlu = std::make_shared<const NluEngine>(r.registry, load_nlu_config_file(root / "nlu_config.json"));
  r.templates = std::make_shared<const TemplateSet>(load_templates_file(root / "templates.json"));
  return r;
}

}  // namespace quizmaster
