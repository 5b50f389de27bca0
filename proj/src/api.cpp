#include "quizmaster/api.hpp"

#include <fstream>
#include <random>

#include "quizmaster/errors.hpp"
#include "quizmaster/quiz.hpp"

namespace quizmaster {
namespace {

using nlohmann::json;

ApiResponse error(int status, std::string_view code, const std::string& message) {
  return {status, json{{"error", {{"code", code}, {"message", message}}}}};
}

// Splits "/a/b/c?x" into {"a", "b", "c"}.
std::vector<std::string> path_parts(std::string_view target) {
  target = target.substr(0, target.find('?'));
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < target.size()) {
    if (target[i] == '/') {
      ++i;
      continue;
    }
    const auto end = target.find('/', i);
    parts.emplace_back(target.substr(i, end == std::string_view::npos ? std::string_view::npos : end - i));
    if (end == std::string_view::npos) break;
    i = end;
  }
  return parts;
}

json question_payload(const Question& q, const CountryRegistry& registry) {
  auto options = json::array();
  for (const auto& code : q.options) options.push_back({{"code", code}, {"name", registry.at(code).name}});
  return {{"index", q.question_index}, {"flag", flag_glyph(q.target)}, {"options", std::move(options)}};
}

}  // namespace

json state_summary(const DialogueState& s, const CountryRegistry& registry) {
  const json full = s;
  return {
      {"phase", full["phase"]},
      {"round", s.round},
      {"rounds", kRoundsPerGame},
      {"score", s.score},
      {"disagreement_count", s.disagreement_count},
      {"pending_candidate", full["pending_candidate"]},
      {"clue_offered", s.clue_offered},
      {"strategy", full["strategy"]},
      {"question", question_payload(s.question, registry)},
      {"finished", s.phase == Phase::finished},
  };
}

struct Api::Slot {
  std::mutex mutex;
  std::string id;
  std::unique_ptr<GameSession> session;
  double p_confusion = 0.0;
  Rng noise_rng{0};
  std::chrono::system_clock::time_point created_at;
  std::chrono::steady_clock::time_point last_active;
  std::map<std::uint64_t, Listener> listeners;
  std::uint64_t next_token = 1;
  std::ofstream log_file;
};

Api::Api(Resources resources, ApiOptions options) : resources_(std::move(resources)), options_(std::move(options)) {
  if (!resources_.registry || !resources_.nlu || !resources_.templates) {
    throw ArgumentError("Api needs a registry, an NLU engine and templates");
  }
  if (options_.log_dir) std::filesystem::create_directories(*options_.log_dir);
}

ApiResponse Api::handle(std::string_view method, std::string_view target, std::string_view body) {
  const auto parts = path_parts(target);
  auto parse_body = [&](json& out) -> std::optional<ApiResponse> {
    if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) {
      out = json::object();
      return std::nullopt;
    }
    try {
      out = json::parse(body);
    } catch (const json::parse_error& e) {
      return error(400, "invalid_json", e.what());
    }
    if (!out.is_object()) return error(400, "invalid_body", "request body must be a JSON object");
    return std::nullopt;
  };

  if (parts.size() == 1 && parts[0] == "sessions") {
    if (method != "POST") return error(405, "method_not_allowed", "use POST /sessions");
    json request;
    if (auto bad = parse_body(request)) return *bad;
    return create_session(request);
  }
  if (parts.size() == 3 && parts[0] == "sessions" && parts[2] == "utterances") {
    if (method != "POST") return error(405, "method_not_allowed", "use POST /sessions/{id}/utterances");
    json request;
    if (auto bad = parse_body(request)) return *bad;
    return post_utterance(parts[1], request);
  }
  if (parts.size() == 3 && parts[0] == "sessions" && parts[2] == "state") {
    if (method != "GET") return error(405, "method_not_allowed", "use GET /sessions/{id}/state");
    return get_state(parts[1]);
  }
  if (parts.size() == 1 && parts[0] == "health" && method == "GET") {
    return {200, json{{"status", "ok"}, {"sessions", session_count()}}};
  }
  return error(404, "not_found", "no route for " + std::string(method) + " " + std::string(target));
}

ApiResponse Api::create_session(const json& request) {
  SessionConfig config;
  double p_confusion = 0.0;
  try {
    if (request.contains("strategy")) {
      if (!request["strategy"].is_string()) return error(400, "invalid_body", "strategy must be a string");
      config.strategy = parse_strategy(request["strategy"].get<std::string>());
    }
    if (request.contains("threshold")) {
      if (!request["threshold"].is_number_integer()) return error(400, "invalid_body", "threshold must be an integer");
      config.agreement_threshold = request["threshold"].get<int>();
    }
    if (request.contains("seed") && !request["seed"].is_null()) {
      if (!request["seed"].is_number_unsigned()) return error(400, "invalid_body", "seed must be a non-negative integer");
      config.seed = request["seed"].get<std::uint64_t>();
    } else {
      std::random_device rd;
      config.seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
    }
    if (request.contains("p_confusion")) {
      if (!request["p_confusion"].is_number()) return error(400, "invalid_body", "p_confusion must be a number");
      p_confusion = request["p_confusion"].get<double>();
      if (!(p_confusion >= 0.0 && p_confusion <= 1.0)) {
        return error(400, "invalid_body", "p_confusion must lie in [0, 1]");
      }
    }
    validate(config, *resources_.registry);
  } catch (const ConfigError& e) {
    return error(400, "invalid_config", e.what());
  }

  auto slot = std::make_shared<Slot>();
  slot->p_confusion = p_confusion;
  slot->noise_rng = Rng(config.seed ^ 0xD1B54A32D192ED03ULL);
  slot->created_at = std::chrono::system_clock::now();
  slot->last_active = options_.clock();
  slot->session = std::make_unique<GameSession>(config, resources_.registry, resources_.nlu, resources_.templates);
  {
    std::lock_guard lock(mutex_);
    slot->id = fresh_id();
    sessions_.emplace(slot->id, slot);
  }
  std::lock_guard lock(slot->mutex);
  if (options_.log_dir) slot->log_file.open(*options_.log_dir / (slot->id + ".jsonl"), std::ios::app);
  publish(*slot, 0);

  const auto& opening = slot->session->log().front();
  std::string utterance;
  for (const auto& u : opening.utterances) utterance += (utterance.empty() ? "" : " ") + u;
  const auto& state = slot->session->state();
  return {201, json{{"session_id", slot->id},
                    {"strategy", to_string(config.strategy)},
                    {"threshold", config.agreement_threshold},
                    {"seed", config.seed},
                    {"p_confusion", p_confusion},
                    {"utterance", utterance},
                    {"question", question_payload(state.question, *resources_.registry)},
                    {"state", state_summary(state, *resources_.registry)}}};
}

ApiResponse Api::post_utterance(const std::string& id, const json& request) {
  auto slot = find(id);
  if (!slot) return error(404, "not_found", "unknown session " + id);
  if (!request.contains("speaker") || !request["speaker"].is_string()) {
    return error(400, "invalid_body", "speaker must be \"P1\" or \"P2\"");
  }
  if (!request.contains("text") || !request["text"].is_string()) return error(400, "invalid_body", "text must be a string");
  const auto speaker = request["speaker"].get<std::string>();
  const auto text = request["text"].get<std::string>();
  if (speaker != "P1" && speaker != "P2") return error(400, "invalid_body", "speaker must be \"P1\" or \"P2\"");
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return error(400, "invalid_body", "text is empty");

  std::lock_guard lock(slot->mutex);
  if (slot->session->finished()) return error(409, "session_finished", "the game is over");
  slot->last_active = options_.clock();

  std::string observed = speaker;
  if (slot->noise_rng.bernoulli(slot->p_confusion)) observed = speaker == "P1" ? "P2" : "P1";

  const std::size_t before = slot->session->log().size();
  try {
    slot->session->say(observed, text);
  } catch (const SessionStateError& e) {
    return error(409, "session_finished", e.what());
  }
  publish(*slot, before);

  const LogEntry& entry = slot->session->log().back();
  const json logged = entry;
  return {200, json{{"turn_id", entry.turn_id},
                    {"speaker", speaker},
                    {"observed_speaker", observed},
                    {"nlu", logged["nlu"]},
                    {"actions", logged["actions"]},
                    {"utterances", entry.utterances},
                    {"state", state_summary(slot->session->state(), *resources_.registry)}}};
}

ApiResponse Api::get_state(const std::string& id) {
  auto slot = find(id);
  if (!slot) return error(404, "not_found", "unknown session " + id);
  std::lock_guard lock(slot->mutex);
  slot->last_active = options_.clock();
  return {200, state_summary(slot->session->state(), *resources_.registry)};
}

std::optional<Api::Subscription> Api::subscribe(const std::string& id, Listener listener) {
  auto slot = find(id);
  if (!slot) return std::nullopt;
  std::lock_guard lock(slot->mutex);
  Subscription sub;
  sub.session_id = id;
  sub.token = slot->next_token++;
  for (const auto& e : slot->session->log()) sub.backlog.push_back(json(e).dump());
  slot->listeners.emplace(sub.token, std::move(listener));
  return sub;
}

void Api::unsubscribe(const Subscription& sub) {
  auto slot = find(sub.session_id);
  if (!slot) return;
  std::lock_guard lock(slot->mutex);
  slot->listeners.erase(sub.token);
}

std::size_t Api::expire_idle() {
  const auto now = options_.clock();
  std::vector<std::shared_ptr<Slot>> dropped;
  {
    std::lock_guard lock(mutex_);
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      bool idle;
      {
        std::lock_guard slot_lock(it->second->mutex);
        idle = now - it->second->last_active > options_.idle_timeout;
      }
      if (idle) {
        dropped.push_back(it->second);
        it = sessions_.erase(it);
      } else {
        ++it;
      }
    }
  }
  return dropped.size();
}

std::size_t Api::session_count() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

std::shared_ptr<Api::Slot> Api::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::string Api::fresh_id() {
  static thread_local std::random_device rd;
  static constexpr char hex[] = "0123456789abcdef";
  for (;;) {
    std::string id;
    for (int i = 0; i < 4; ++i) {
      auto word = rd();
      for (int k = 0; k < 8; ++k, word >>= 4) id.push_back(hex[word & 0xF]);
    }
    if (!sessions_.contains(id)) return id;
  }
}

void Api::publish(Slot& slot, std::size_t from) {
  const auto& log = slot.session->log();
  for (std::size_t i = from; i < log.size(); ++i) {
    const std::string line = json(log[i]).dump();
    if (slot.log_file) slot.log_file << line << '\n' << std::flush;
    for (const auto& [token, listener] : slot.listeners) listener(line);
  }
}

}  // namespace quizmaster
