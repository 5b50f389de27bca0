#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "quizmaster/api.hpp"
#include "quizmaster/errors.hpp"
#include "quizmaster/quiz.hpp"
#include "quizmaster/resources.hpp"
#include "quizmaster/simulation.hpp"

namespace py = pybind11;
namespace qm = quizmaster;
using nlohmann::json;

// Results cross the boundary as JSON text; the Python package decodes them.
namespace {

json rate_json(const qm::Rate& r) {
  const auto v = r.value();
  return {{"correct", r.correct}, {"actual", r.actual}, {"value", v ? json(*v) : json(nullptr)}};
}

json metrics_json(const qm::MetricsReport& m) {
  return {{"nb_turns", m.nb_turns},
          {"agreement", rate_json(m.agreement)},
          {"disagreement", rate_json(m.disagreement)},
          {"explicit_intent", rate_json(m.explicit_intent)},
          {"entity", rate_json(m.entity)}};
}

json opt(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

json summary_json(const qm::MetricsSummary& s) {
  return {{"games", s.games},
          {"mean_turns", s.mean_turns},
          {"agreement", opt(s.agreement)},
          {"disagreement", opt(s.disagreement)},
          {"explicit_intent", opt(s.explicit_intent)},
          {"entity", opt(s.entity)}};
}

json question_json(const qm::Question& q) {
  return {{"target", q.target}, {"options", q.options}, {"index", q.question_index}};
}

qm::SessionConfig make_config(const std::string& strategy, int threshold, std::uint64_t seed) {
  qm::SessionConfig c;
  c.strategy = qm::parse_strategy(strategy);
  c.agreement_threshold = threshold;
  c.seed = seed;
  return c;
}

class PySession {
 public:
  PySession(const qm::Resources& res, const std::string& strategy, int threshold, std::uint64_t seed)
      : session_(make_config(strategy, threshold, seed), res.registry, res.nlu, res.templates) {}

  std::string opening() const { return json(session_.log().front()).dump(); }
  std::string say(const std::string& speaker, const std::string& text) {
    return json(session_.say(speaker, text)).dump();
  }
  std::string state() const { return qm::state_summary(session_.state(), session_.registry()).dump(); }
  bool finished() const { return session_.finished(); }
  std::string log_jsonl() const { return qm::log_to_string(session_.log()); }

 private:
  qm::GameSession session_;
};

}  // namespace

PYBIND11_MODULE(_quizmaster, m) {
  m.doc() = "Cooperative flag quiz game master (native core)";

  auto base = py::register_exception<qm::Error>(m, "QuizmasterError");
  py::register_exception<qm::LoadError>(m, "LoadError", base.ptr());
  py::register_exception<qm::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<qm::LookupError>(m, "LookupError", base.ptr());
  py::register_exception<qm::ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<qm::SessionStateError>(m, "SessionStateError", base.ptr());
  py::register_exception<qm::TemplateError>(m, "TemplateError", base.ptr());
  py::register_exception<qm::ParseError>(m, "ParseError", base.ptr());
  py::register_exception<qm::UnsupportedError>(m, "UnsupportedError", base.ptr());
  py::register_exception<qm::IoError>(m, "IoError", base.ptr());

  py::class_<qm::Resources>(m, "Resources")
      .def_property_readonly("country_count", [](const qm::Resources& r) { return r.registry->size(); });

  m.def("load_resources", &qm::load_resources, py::arg("data_dir") = std::nullopt);

  m.def(
      "classify",
      [](const qm::Resources& r, const std::string& text, const std::vector<std::string>& options) {
        return json(r.nlu->classify(text, options)).dump();
      },
      py::arg("resources"), py::arg("text"), py::arg("options") = std::vector<std::string>{});

  m.def(
      "generate_question",
      [](const qm::Resources& r, int index, std::uint64_t seed) {
        qm::Rng rng(seed);
        return question_json(qm::generate_question(*r.registry, index, rng)).dump();
      },
      py::arg("resources"), py::arg("index"), py::arg("seed"));

  m.def(
      "procedural_check",
      [](const std::vector<std::string>& answers, int threshold) {
        qm::ProceduralAgreementState s;
        s.threshold = threshold;
        for (const auto& a : answers) qm::record_answer(s, a);
        return qm::procedural_check(s);
      },
      py::arg("answers"), py::arg("threshold") = 3);

  m.def(
      "diarised_check",
      [](const std::vector<std::pair<std::string, std::string>>& answers) {
        qm::DiarisedAgreementState s;
        for (const auto& [speaker, code] : answers) qm::record_answer(s, speaker, code);
        return qm::diarised_check(s);
      },
      py::arg("answers"));

  m.def(
      "replay",
      [](const qm::Resources& r, const std::string& path, const std::string& strategy, int threshold,
         double p_confusion, std::uint64_t seed) {
        const auto t = qm::apply_noise(qm::parse_transcript_file(path), qm::NoiseModel{p_confusion, seed});
        const auto log = qm::replay(t, make_config(strategy, threshold, seed), r.registry, r.nlu);
        json out{{"group_id", t.meta.group_id}, {"game_id", t.meta.game_id}};
        out["metrics"] = metrics_json(qm::compute_metrics(log, t));
        out["log"] = json::array();
        for (const auto& e : log) out["log"].push_back(e);
        return out.dump();
      },
      py::arg("resources"), py::arg("path"), py::arg("strategy") = "procedural", py::arg("threshold") = 3,
      py::arg("p_confusion") = 0.0, py::arg("seed") = 0);

  m.def(
      "simulate",
      [](const qm::Resources& r, std::size_t trials, const std::vector<double>& p_grid, std::uint64_t seed,
         int threshold, const std::optional<std::filesystem::path>& params) {
        const auto model = params ? qm::load_player_model_file(*params) : qm::PlayerModel{};
        std::vector<qm::SweepRow> rows;
        {
          py::gil_scoped_release release;
          const auto corpus = qm::synthesize_dialogues(model, trials, seed, *r.registry);
          rows = qm::run_sweep(corpus, p_grid, seed, threshold, r.registry, r.nlu);
        }
        json out = json::array();
        for (const auto& row : rows) {
          out.push_back({{"p_confusion", row.p_confusion},
                         {"procedural", summary_json(row.procedural)},
                         {"diarised", summary_json(row.diarised)}});
        }
        return out.dump();
      },
      py::arg("resources"), py::arg("trials") = 1000, py::arg("p_grid") = std::vector<double>{0, .1, .2, .3, .4, .5},
      py::arg("seed") = 0, py::arg("threshold") = 3, py::arg("params") = std::nullopt);

  py::class_<PySession>(m, "Session")
      .def(py::init<const qm::Resources&, const std::string&, int, std::uint64_t>(), py::arg("resources"),
           py::arg("strategy") = "procedural", py::arg("threshold") = 3, py::arg("seed") = 0)
      .def("opening", &PySession::opening)
      .def("say", &PySession::say, py::arg("speaker"), py::arg("text"))
      .def("state", &PySession::state)
      .def_property_readonly("finished", &PySession::finished)
      .def("log_jsonl", &PySession::log_jsonl);

  py::class_<qm::Api, std::shared_ptr<qm::Api>>(m, "Api")
      .def(py::init([](const qm::Resources& r) { return std::make_shared<qm::Api>(r); }), py::arg("resources"))
      .def(
          "handle",
          [](qm::Api& api, const std::string& method, const std::string& target, const std::string& body) {
            const auto r = api.handle(method, target, body);
            return std::make_pair(r.status, r.body.dump());
          },
          py::arg("method"), py::arg("target"), py::arg("body") = "",
          py::call_guard<py::gil_scoped_release>())
      .def("session_count", &qm::Api::session_count);
}
