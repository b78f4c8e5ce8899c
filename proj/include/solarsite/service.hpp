#pragma once

// HTTP facade over the AHP engine and the scenario pipeline.
//
//   POST /api/ahp/evaluate                 matrix -> weights, lambda_max, ci, ri, cr, consistent
//   POST /api/scenarios                    scenario config -> {id}
//   POST /api/scenarios/{id}/run           queue a run (202)
//   GET  /api/scenarios/{id}               status and result summary
//   GET  /api/scenarios/{id}/map           class map (PNG)
//   GET  /api/scenarios/{id}/sensitivity   leave-one-out table

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "solarsite/pipeline.hpp"

namespace solarsite {

enum class SessionStatus { draft, running, done, failed };

inline const char* to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::draft: return "draft";
    case SessionStatus::running: return "running";
    case SessionStatus::done: return "done";
    case SessionStatus::failed: return "failed";
  }
  return "?";
}

class ScenarioService {
 public:
  struct Options {
    std::filesystem::path data_root = ".";
    std::filesystem::path work_dir = "solarsite-runs";
    std::size_t workers = 1;
  };

  explicit ScenarioService(Options opts) : opts_(std::move(opts)), paths_(opts_.data_root, true) {
    std::filesystem::create_directories(opts_.work_dir);
    std::random_device rd;
    token_prefix_ = rd();
    for (std::size_t i = 0; i < std::max<std::size_t>(1, opts_.workers); ++i) {
      workers_.emplace_back([this] { worker_loop(); });
    }
  }

  ~ScenarioService() {
    {
      std::lock_guard lk(mu_);
      stopping_ = true;
    }
    cv_.notify_all();
    for (auto& t : workers_) t.join();
  }

  ScenarioService(const ScenarioService&) = delete;
  ScenarioService& operator=(const ScenarioService&) = delete;

  void register_routes(httplib::Server& srv) {
    srv.Post("/api/ahp/evaluate", [](const httplib::Request& req, httplib::Response& res) { evaluate_ahp(req, res); });
    srv.Post("/api/scenarios", [this](const httplib::Request& req, httplib::Response& res) { create(req, res); });
    srv.Post(R"(/api/scenarios/([^/]+)/run)",
             [this](const httplib::Request& req, httplib::Response& res) { start(req.matches[1], res); });
    srv.Get(R"(/api/scenarios/([^/]+)/map)",
            [this](const httplib::Request& req, httplib::Response& res) { map(req.matches[1], res); });
    srv.Get(R"(/api/scenarios/([^/]+)/sensitivity)",
            [this](const httplib::Request& req, httplib::Response& res) { sensitivity(req.matches[1], res); });
    srv.Get(R"(/api/scenarios/([^/]+))",
            [this](const httplib::Request& req, httplib::Response& res) { status(req.matches[1], res); });
  }

  /// Blocks until the scenario leaves the running state.
  SessionStatus wait(const std::string& id) {
    std::unique_lock lk(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error("unknown scenario " + id);
    auto s = it->second;
    done_cv_.wait(lk, [&] { return s->status != SessionStatus::running; });
    return s->status;
  }

 private:
  struct Session {
    std::string id;
    ScenarioConfig config;
    SessionStatus status = SessionStatus::draft;
    std::string error;
    json summary;
    json sensitivity;
    std::filesystem::path out_dir;
  };

  static void send_json(httplib::Response& res, int code, const json& body) {
    res.status = code;
    res.set_content(body.dump(), "application/json");
  }

  static void evaluate_ahp(const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error& e) {
      return send_json(res, 400, {{"error", std::string("body is not valid JSON: ") + e.what()}});
    }
    const json& mj = body.is_object() && body.contains("matrix") ? body.at("matrix") : body;
    if (!mj.is_array()) return send_json(res, 400, {{"error", "expected a matrix as an array of rows"}});
    if (mj.size() > ahp::kMaxCriteria) {
      return send_json(res, 413, {{"error", "matrix order " + std::to_string(mj.size()) + " exceeds " +
                                                std::to_string(ahp::kMaxCriteria)}});
    }
    try {
      const auto m = ahp::validate_matrix(matrix_from_json(mj));
      const auto ev = ahp::evaluate(m);
      send_json(res, 200,
                {{"weights", ev.weights.values()},
                 {"lambda_max", ev.report.lambda_max},
                 {"ci", ev.report.ci},
                 {"ri", ev.report.ri},
                 {"cr", ev.report.cr},
                 {"consistent", ev.report.consistent}});
    } catch (const ahp::MatrixValidationError& e) {
      json errors = json::array();
      for (const auto& is : e.issues()) errors.push_back({{"i", is.i}, {"j", is.j}, {"message", is.message}});
      send_json(res, 400, {{"error", e.what()}, {"errors", errors}});
    } catch (const ValidationError& e) {
      send_json(res, 400, {{"error", e.what()}});
    }
  }

  void create(const httplib::Request& req, httplib::Response& res) {
    ScenarioConfig cfg;
    try {
      cfg = parse_scenario_config(req.body);
      precheck_scenario(cfg, paths_);
    } catch (const ConsistencyError& e) {
      return send_json(res, 422, {{"error", e.what()}, {"cr", e.cr()}});
    } catch (const ValidationError& e) {
      return send_json(res, 422, {{"error", e.what()}});
    }
    auto s = std::make_shared<Session>();
    s->config = std::move(cfg);
    {
      std::lock_guard lk(mu_);
      std::ostringstream os;
      os << std::hex << token_prefix_ << '-' << ++counter_;
      s->id = os.str();
      s->out_dir = opts_.work_dir / s->id;
      sessions_[s->id] = s;
    }
    send_json(res, 201, {{"id", s->id}, {"status", to_string(SessionStatus::draft)}});
  }

  std::shared_ptr<Session> find(const std::string& id) {
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  void start(const std::string& id, httplib::Response& res) {
    {
      std::lock_guard lk(mu_);
      auto s = find(id);
      if (!s) return send_json(res, 404, {{"error", "unknown scenario " + id}});
      if (s->status != SessionStatus::draft) {
        return send_json(res, 409, {{"error", std::string("scenario is ") + to_string(s->status)},
                                    {"status", to_string(s->status)}});
      }
      s->status = SessionStatus::running;
      queue_.push_back(s);
    }
    cv_.notify_one();
    send_json(res, 202, {{"id", id}, {"status", to_string(SessionStatus::running)}});
  }

  void status(const std::string& id, httplib::Response& res) {
    std::lock_guard lk(mu_);
    auto s = find(id);
    if (!s) return send_json(res, 404, {{"error", "unknown scenario " + id}});
    json body = {{"id", s->id}, {"status", to_string(s->status)}};
    if (s->status == SessionStatus::failed) body["error"] = s->error;
    if (s->status == SessionStatus::done) body["summary"] = s->summary;
    send_json(res, 200, body);
  }

  void map(const std::string& id, httplib::Response& res) {
    std::filesystem::path png;
    {
      std::lock_guard lk(mu_);
      auto s = find(id);
      if (!s) return send_json(res, 404, {{"error", "unknown scenario " + id}});
      if (s->status != SessionStatus::done) {
        return send_json(res, 409, {{"error", std::string("scenario is ") + to_string(s->status)}});
      }
      png = s->out_dir / "class_map.png";
    }
    std::ifstream in(png, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    res.status = 200;
    res.set_content(ss.str(), "image/png");
  }

  void sensitivity(const std::string& id, httplib::Response& res) {
    std::lock_guard lk(mu_);
    auto s = find(id);
    if (!s) return send_json(res, 404, {{"error", "unknown scenario " + id}});
    if (s->status != SessionStatus::done) {
      return send_json(res, 409, {{"error", std::string("scenario is ") + to_string(s->status)}});
    }
    send_json(res, 200, {{"id", s->id}, {"rows", s->sensitivity}});
  }

  void worker_loop() {
    while (true) {
      std::shared_ptr<Session> s;
      {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [&] { return stopping_ || !queue_.empty(); });
        if (stopping_ && queue_.empty()) return;
        s = queue_.front();
        queue_.pop_front();
      }
      json summary, sens;
      std::string error;
      bool ok = false;
      try {
        const Scenario sc = load_scenario(s->config, paths_);
        const RunResult rr = run(sc, s->out_dir);
        summary = result_summary_json(rr.result);
        sens = sensitivity_json(rr.sensitivity);
        ok = true;
      } catch (const std::exception& e) {
        error = e.what();
      }
      {
        std::lock_guard lk(mu_);
        if (ok) {
          s->summary = std::move(summary);
          s->sensitivity = std::move(sens);
          s->status = SessionStatus::done;
        } else {
          s->error = std::move(error);
          s->status = SessionStatus::failed;
        }
      }
      done_cv_.notify_all();
    }
  }

  Options opts_;
  PathResolver paths_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  std::deque<std::shared_ptr<Session>> queue_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::vector<std::thread> workers_;
  bool stopping_ = false;
  unsigned token_prefix_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace solarsite
