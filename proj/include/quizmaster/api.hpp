#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "quizmaster/resources.hpp"
#include "quizmaster/session.hpp"

namespace quizmaster {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

struct ApiOptions {
  std::chrono::seconds idle_timeout{30 * 60};
  std::optional<std::filesystem::path> log_dir;  // one <session_id>.jsonl per game when set
  std::function<std::chrono::steady_clock::time_point()> clock = [] { return std::chrono::steady_clock::now(); };
};

// What clients see of a DialogueState: no gold target, option names resolved.
nlohmann::json state_summary(const DialogueState& s, const CountryRegistry& registry);

// Transport-agnostic session API. All methods are thread-safe; utterances
// for one session are processed one at a time in arrival order.
class Api {
 public:
  using Listener = std::function<void(const std::string& message)>;

  struct Subscription {
    std::string session_id;
    std::uint64_t token = 0;
    std::vector<std::string> backlog;  // log lines written before subscribing
  };

  Api(Resources resources, ApiOptions options = {});

  ApiResponse handle(std::string_view method, std::string_view target, std::string_view body);

  ApiResponse create_session(const nlohmann::json& request);
  ApiResponse post_utterance(const std::string& id, const nlohmann::json& request);
  ApiResponse get_state(const std::string& id);

  // Listeners run on the thread that produced the event, under the session
  // lock, and must not block or call back into the Api.
  std::optional<Subscription> subscribe(const std::string& id, Listener listener);
  void unsubscribe(const Subscription& sub);

  // Drops sessions idle for longer than the timeout; returns how many.
  std::size_t expire_idle();
  std::size_t session_count() const;

 private:
  struct Slot;

  std::shared_ptr<Slot> find(const std::string& id) const;
  std::string fresh_id();
  void publish(Slot& slot, std::size_t from);

  Resources resources_;
  ApiOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
};

}  // namespace quizmaster
