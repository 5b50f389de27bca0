#include "quizmaster/registry.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

#include <nlohmann/json.hpp>

#include "quizmaster/errors.hpp"
#include "quizmaster/text.hpp"

namespace quizmaster {
namespace {

bool valid_code(std::string_view code) {
  return code.size() == 2 && std::all_of(code.begin(), code.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

std::string describe(const CountryRecord& r, std::size_t position) {
  if (!r.code.empty()) return "record " + r.code;
  return "record #" + std::to_string(position);
}

std::vector<std::string> string_list(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) return {};
  const auto& v = j.at(key);
  if (!v.is_array()) throw LoadError(where + ": '" + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw LoadError(where + ": '" + key + "' must be an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

CountryRegistry CountryRegistry::from_records(std::vector<CountryRecord> records) {
  if (records.empty()) throw LoadError("empty registry");

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!valid_code(r.code)) throw LoadError(describe(r, i) + ": code must be two uppercase letters");
    if (text::normalize(r.name).empty()) throw LoadError(describe(r, i) + ": empty name");
    if (r.clues.empty()) throw LoadError(describe(r, i) + ": empty clue list");
  }
  std::sort(records.begin(), records.end(),
            [](const CountryRecord& a, const CountryRecord& b) { return a.code < b.code; });

  CountryRegistry reg;
  reg.records_ = std::move(records);
  for (std::size_t i = 0; i < reg.records_.size(); ++i) {
    const auto& r = reg.records_[i];
    if (!reg.by_code_.emplace(r.code, i).second) throw LoadError("record " + r.code + ": duplicate code");

    const std::string canonical = text::normalize(r.name);
    auto add = [&](const std::string& raw, SurfaceKind kind) {
      std::string norm = text::normalize(raw);
      if (norm.empty()) throw LoadError("record " + r.code + ": blank surface form");
      if (kind != SurfaceKind::canonical && norm == canonical) {
        throw LoadError("record " + r.code + ": alias '" + raw + "' equals the canonical name");
      }
      auto [it, inserted] = reg.by_surface_.emplace(norm, reg.surfaces_.size());
      if (!inserted) {
        const auto& other = reg.records_[reg.surfaces_[it->second].record];
        throw LoadError("record " + r.code + ": surface '" + raw + "' already used by " + other.code);
      }
      reg.surfaces_.push_back(Surface{norm, text::tokenize(norm), i, kind});
    };
    add(r.name, SurfaceKind::canonical);
    for (const auto& a : r.aliases) add(a, SurfaceKind::alias);
    for (const auto& h : r.homophones) add(h, SurfaceKind::homophone);
  }
  for (std::size_t s = 0; s < reg.surfaces_.size(); ++s) {
    reg.by_first_token_[reg.surfaces_[s].tokens.front()].push_back(s);
  }
  return reg;
}

const CountryRecord* CountryRegistry::find(std::string_view code) const {
  auto it = by_code_.find(std::string(code));
  return it == by_code_.end() ? nullptr : &records_[it->second];
}

const CountryRecord& CountryRegistry::at(std::string_view code) const {
  if (const auto* r = find(code)) return *r;
  throw LookupError("unknown country code '" + std::string(code) + "'");
}

std::optional<std::string> CountryRegistry::lookup(std::string_view surface) const {
  auto it = by_surface_.find(text::normalize(surface));
  if (it == by_surface_.end()) return std::nullopt;
  return records_[surfaces_[it->second].record].code;
}

std::span<const std::size_t> CountryRegistry::surfaces_starting_with(std::string_view token) const {
  auto it = by_first_token_.find(std::string(token));
  if (it == by_first_token_.end()) return {};
  return it->second;
}

CountryRegistry load_registry(std::istream& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(source);
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports an empty stream as a parse error at byte 1.
    if (e.byte <= 1) throw LoadError("empty registry");
    throw LoadError(std::string("registry is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw LoadError("registry must be a JSON array of records");

  std::vector<CountryRecord> records;
  records.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& j = doc[i];
    std::string where = "record #" + std::to_string(i);
    if (!j.is_object()) throw LoadError(where + ": not an object");
    if (j.contains("code") && j["code"].is_string()) where = "record " + j["code"].get<std::string>();
    if (!j.contains("code") || !j["code"].is_string()) throw LoadError(where + ": missing string 'code'");
    if (!j.contains("name") || !j["name"].is_string()) throw LoadError(where + ": missing string 'name'");
    CountryRecord r;
    r.code = j["code"].get<std::string>();
    r.name = j["name"].get<std::string>();
    r.aliases = string_list(j, "aliases", where);
    r.homophones = string_list(j, "homophones", where);
    r.clues = string_list(j, "clues", where);
    records.push_back(std::move(r));
  }
  return CountryRegistry::from_records(std::move(records));
}

CountryRegistry load_registry_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open registry file " + path.string());
  return load_registry(in);
}

}  // namespace quizmaster
