#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace quizmaster {

struct CountryRecord {
  std::string code;  // ISO 3166 alpha-2
  std::string name;
  std::vector<std::string> aliases;
  std::vector<std::string> homophones;  // known misrecognitions, e.g. "Cypress"
  std::vector<std::string> clues;
};

enum class SurfaceKind { canonical, alias, homophone };

// One normalized surface form that resolves to a country.
struct Surface {
  std::string normalized;
  std::vector<std::string> tokens;
  std::size_t record;  // index into CountryRegistry::records()
  SurfaceKind kind;
};

// Immutable after construction; share by const reference or shared_ptr<const>.
class CountryRegistry {
 public:
  // Validates and indexes the records. Throws LoadError naming the offending
  // record on any violation.
  static CountryRegistry from_records(std::vector<CountryRecord> records);

  std::size_t size() const noexcept { return records_.size(); }

  // Sorted by code.
  std::span<const CountryRecord> records() const noexcept { return records_; }
  std::span<const Surface> surfaces() const noexcept { return surfaces_; }

  const CountryRecord* find(std::string_view code) const;
  // Throws LookupError for unknown codes.
  const CountryRecord& at(std::string_view code) const;
  bool contains(std::string_view code) const { return find(code) != nullptr; }

  // Resolves a canonical name, alias or homophone (any casing/punctuation).
  std::optional<std::string> lookup(std::string_view surface) const;

  // Surfaces whose first token equals `token`.
  std::span<const std::size_t> surfaces_starting_with(std::string_view token) const;

 private:
  CountryRegistry() = default;

  std::vector<CountryRecord> records_;
  std::vector<Surface> surfaces_;
  std::unordered_map<std::string, std::size_t> by_code_;
  std::unordered_map<std::string, std::size_t> by_surface_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_first_token_;
};

// Reads a UTF-8 JSON array of {code, name, aliases[], homophones[], clues[]}.
CountryRegistry load_registry(std::istream& source);
CountryRegistry load_registry_file(const std::filesystem::path& path);

}  // namespace quizmaster
