#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "quizmaster/api.hpp"
#include "quizmaster/errors.hpp"
#include "quizmaster/resources.hpp"
#include "quizmaster/server.hpp"
#include "quizmaster/simulation.hpp"

namespace qm = quizmaster;

namespace {

constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kUsageError = 2;

struct Common {
  std::string data_dir;

  qm::Resources resources() const {
    return qm::load_resources(data_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(data_dir));
  }
};

struct PlayOptions {
  std::string strategy = "procedural";
  int threshold = 3;
  std::uint64_t seed = 0;
  std::string log_path;
};

struct ReplayOptions {
  std::vector<std::string> transcripts;
  std::string strategy = "procedural";
  int threshold = 3;
  double p_confusion = 0.0;
  std::uint64_t seed = 0;
  std::string log_path;
  std::string csv_path;
};

struct SimulateOptions {
  std::size_t trials = 1000;
  std::string p_grid = "0,0.1,0.2,0.3,0.4,0.5";
  std::uint64_t seed = 0;
  std::string params;
  int threshold = 3;
  std::string csv_path;
};

struct ServeOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8080;
  unsigned threads = 2;
  std::string log_dir;
};

void print_actions(const qm::LogEntry& e) {
  for (const auto& u : e.utterances) std::cout << "System: " << u << '\n';
  std::cout.flush();
}

// "P2: text" or "P2> text" picks the speaker explicitly.
std::optional<std::pair<std::string, std::string>> split_prefix(const std::string& line) {
  for (const char* who : {"P1", "P2"}) {
    if (line.rfind(who, 0) == 0 && line.size() > 2 && (line[2] == ':' || line[2] == '>')) {
      const auto start = line.find_first_not_of(' ', 3);
      return std::pair{std::string(who), start == std::string::npos ? std::string() : line.substr(start)};
    }
  }
  return std::nullopt;
}

int run_play(const Common& common, const PlayOptions& o) {
  const auto res = common.resources();
  qm::SessionConfig config;
  config.strategy = qm::parse_strategy(o.strategy);
  config.agreement_threshold = o.threshold;
  config.seed = o.seed;
  qm::GameSession session(config, res.registry, res.nlu, res.templates);
  print_actions(session.log().front());

  std::string next = "P1";
  std::string line;
  while (!session.finished()) {
    std::cout << next << "> " << std::flush;
    if (!std::getline(std::cin, line)) break;
    std::string speaker = next;
    std::string text = line;
    if (auto explicit_speaker = split_prefix(line)) std::tie(speaker, text) = *explicit_speaker;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    print_actions(session.say(speaker, text));
    next = speaker == "P1" ? "P2" : "P1";
  }
  std::cout << '\n';
  if (!o.log_path.empty()) {
    std::ofstream out(o.log_path);
    if (!out) throw qm::IoError("cannot write log " + o.log_path);
    qm::write_log(out, session.log());
  }
  return kOk;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw qm::IoError("cannot write " + path);
  out << text;
}

int run_replay(const Common& common, const ReplayOptions& o) {
  std::vector<qm::Transcript> transcripts;
  for (const auto& path : o.transcripts) transcripts.push_back(qm::parse_transcript_file(path));
  const auto res = common.resources();

  std::vector<qm::GameReport> reports;
  std::ostringstream log_text;
  for (std::size_t i = 0; i < transcripts.size(); ++i) {
    const auto noisy = qm::apply_noise(transcripts[i], qm::NoiseModel{o.p_confusion, o.seed + i});
    qm::SessionConfig config;
    config.strategy = qm::parse_strategy(o.strategy);
    config.agreement_threshold = o.threshold;
    config.seed = o.seed;
    const auto log = qm::replay(noisy, config, res.registry, res.nlu);
    qm::write_log(log_text, log);
    reports.push_back({noisy.meta.group_id, noisy.meta.game_id, qm::compute_metrics(log, noisy)});
  }
  std::cout << qm::format_report_table(reports);
  if (!o.csv_path.empty()) write_text(o.csv_path, qm::format_report_csv(reports));
  if (!o.log_path.empty()) write_text(o.log_path, log_text.str());
  return kOk;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(item, &used);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--p-grid", "not a number: '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) {
      throw CLI::ValidationError("--p-grid", "not a number: '" + item + "'");
    }
    if (!(p >= 0.0 && p <= 1.0)) throw CLI::ValidationError("--p-grid", "probabilities must lie in [0, 1]");
    grid.push_back(p);
  }
  if (grid.empty()) throw CLI::ValidationError("--p-grid", "empty grid");
  return grid;
}

int run_simulate(const Common& common, const SimulateOptions& o) {
  const auto grid = parse_grid(o.p_grid);
  const auto res = common.resources();
  const auto params_path = o.params.empty()
                               ? (common.data_dir.empty() ? qm::default_data_dir() : std::filesystem::path(common.data_dir)) /
                                     "player_model.json"
                               : std::filesystem::path(o.params);
  const auto model = qm::load_player_model_file(params_path);
  const auto corpus = qm::synthesize_dialogues(model, o.trials, o.seed, *res.registry);
  const auto rows = qm::run_sweep(corpus, grid, o.seed, o.threshold, res.registry, res.nlu);
  std::cout << qm::format_sweep_table(rows);
  if (!o.csv_path.empty()) write_text(o.csv_path, qm::format_sweep_csv(rows));
  return kOk;
}

int run_serve(const Common& common, const ServeOptions& o) {
  qm::ApiOptions options;
  if (!o.log_dir.empty()) options.log_dir = o.log_dir;
  auto api = std::make_shared<qm::Api>(common.resources(), options);

  // Block the stop signals before any worker thread exists, then wait for one.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  qm::Server server(api, o.address, o.port, o.threads);
  server.start();
  std::cout << "listening on http://" << o.address << ':' << server.port() << std::endl;
  int received = 0;
  sigwait(&signals, &received);
  server.stop();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative flag quiz game master"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--data-dir", common.data_dir, "Directory holding countries.json, nlu_config.json, templates.json");

  const std::vector<std::string> strategies{"procedural", "diarised"};

  PlayOptions play;
  auto* play_cmd = app.add_subcommand("play", "Play a game on the console, two players taking turns");
  play_cmd->add_option("--strategy", play.strategy, "Agreement detection strategy")->check(CLI::IsMember(strategies));
  play_cmd->add_option("--threshold", play.threshold, "Answers needed before agreement")->check(CLI::PositiveNumber);
  play_cmd->add_option("--seed", play.seed, "Random seed");
  play_cmd->add_option("--log", play.log_path, "Write the game log (JSON Lines) here");

  ReplayOptions replay;
  auto* replay_cmd = app.add_subcommand("replay", "Replay annotated transcripts and score agreement detection");
  replay_cmd->add_option("--transcript", replay.transcripts, "Transcript file (repeatable)")->required();
  replay_cmd->add_option("--strategy", replay.strategy, "Agreement detection strategy")->check(CLI::IsMember(strategies));
  replay_cmd->add_option("--threshold", replay.threshold, "Answers needed before agreement")->check(CLI::PositiveNumber);
  replay_cmd->add_option("--p-confusion", replay.p_confusion, "Speaker confusion probability")
      ->check(CLI::Range(0.0, 1.0));
  replay_cmd->add_option("--seed", replay.seed, "Noise and session seed");
  replay_cmd->add_option("--log", replay.log_path, "Write the replay log (JSON Lines), '-' for stdout");
  replay_cmd->add_option("--csv", replay.csv_path, "Write per-game metrics as CSV, '-' for stdout");

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Sweep speaker confusion over synthetic dialogues");
  sim_cmd->add_option("--trials", sim.trials, "Number of synthetic games");
  sim_cmd->add_option("--p-grid", sim.p_grid, "Comma separated confusion probabilities");
  sim_cmd->add_option("--seed", sim.seed, "Random seed");
  sim_cmd->add_option("--params", sim.params, "Player model JSON (default: data dir player_model.json)");
  sim_cmd->add_option("--threshold", sim.threshold, "Answers needed before agreement")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--csv", sim.csv_path, "Write the sweep as CSV, '-' for stdout");

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP/WebSocket session API");
  serve_cmd->add_option("--port", serve.port, "TCP port (0 picks a free one)");
  serve_cmd->add_option("--address", serve.address, "Listen address");
  serve_cmd->add_option("--threads", serve.threads, "Worker threads")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--log-dir", serve.log_dir, "Append each game's log to <dir>/<session_id>.jsonl");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*play_cmd) return run_play(common, play);
    if (*replay_cmd) return run_replay(common, replay);
    if (*sim_cmd) return run_simulate(common, sim);
    if (*serve_cmd) return run_serve(common, serve);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const qm::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const qm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomainError;
  }
  return kUsageError;
}
