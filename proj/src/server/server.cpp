#include "emsim/server.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <map>
#include <regex>
#include <thread>

#include <httplib.h>

#include "emsim/io.hpp"

namespace fs = std::filesystem;

namespace emsim::server {

using json = nlohmann::json;

namespace {

enum class RunStatus { Idle, Running, Done, Failed };

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Idle: return "idle";
    case RunStatus::Running: return "running";
    case RunStatus::Done: return "done";
    case RunStatus::Failed: return "failed";
  }
  return "?";
}

struct SessionState {
  explicit SessionState(pipeline::Session s) : session(std::move(s)) {}
  pipeline::Session session;
  std::string created_at;
  RunStatus status = RunStatus::Idle;
  int runs = 0;
  std::string error;  // storage failure of the last run
};

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void send_json(httplib::Response& res, int status, json body) {
  body["schema_version"] = 1;
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
  send_json(res, status, {{"error", {{"kind", kind}, {"message", message}}}});
}

}  // namespace

struct Server::Impl {
  ServerConfig config;
  httplib::Server http;
  std::mutex mutex;  // guards sessions, threads, running
  std::condition_variable idle;
  std::map<std::string, std::shared_ptr<SessionState>> sessions;
  std::vector<std::thread> threads;
  int running = 0;

  explicit Impl(ServerConfig c) : config(std::move(c)) { routes(); }

  // Known session, or one found on disk from an earlier server process.
  std::shared_ptr<SessionState> find(const std::string& id) {
    std::lock_guard lock(mutex);
    if (auto it = sessions.find(id); it != sessions.end()) return it->second;
    try {
      auto st = std::make_shared<SessionState>(pipeline::Session::open(config.root, id));
      const auto dir = st->session.dir();
      try {
        st->created_at = json::parse(io::read_file(dir / "session.json")).value("created_at", "");
      } catch (const std::exception&) {
      }
      std::error_code ec;
      if (fs::exists(dir / "report.json", ec)) {
        st->status = RunStatus::Done;
        try {
          const auto r = json::parse(io::read_file(dir / "report.json"));
          if (!r.at("verdict").at("passed").get<bool>() || !r.at("provider_error").is_null())
            st->status = RunStatus::Failed;
        } catch (const std::exception&) {
          st->status = RunStatus::Failed;
        }
      }
      sessions.emplace(id, st);
      return st;
    } catch (const io::FileError&) {
      return nullptr;
    }
  }

  json describe(const SessionState& st) {
    json j = {{"id", st.session.id()}, {"created_at", st.created_at}, {"status", to_string(st.status)}, {"runs", st.runs}};
    std::error_code ec;
    j["report"] = fs::exists(st.session.dir() / "report.json", ec)
                      ? json("/api/sessions/" + st.session.id() + "/report")
                      : json(nullptr);
    if (!st.error.empty()) j["error"] = st.error;
    return j;
  }

  void create(const httplib::Request&, httplib::Response& res) {
    try {
      auto s = pipeline::Session::create(config.root);
      auto st = std::make_shared<SessionState>(s);
      st->created_at = now_utc();
      io::write_file_atomic(s.dir() / "session.json",
                            json{{"id", s.id()}, {"created_at", st->created_at}}.dump() + "\n");
      {
        std::lock_guard lock(mutex);
        sessions.emplace(s.id(), st);
      }
      send_json(res, 201, {{"id", s.id()}});
    } catch (const Error& e) {
      send_error(res, 507, e.kind(), e.what());
    }
  }

  void post_message(const httplib::Request& req, httplib::Response& res) {
    const auto st = find(req.matches[1]);
    if (!st) return send_error(res, 404, "NotFound", "unknown session");

    json body;
    try {
      body = json::parse(req.body.empty() ? "{}" : req.body);
    } catch (const json::exception&) {
      return send_error(res, 422, "BadRequest", "body is not JSON");
    }
    if (!body.is_object() || !body.contains("text") || !body["text"].is_string())
      return send_error(res, 422, "BadRequest", "field 'text' (string) is required");
    const auto text = body["text"].get<std::string>();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
      return send_error(res, 422, "BlankPrompt", "prompt text is blank");
    auto mode = config.default_mode;
    if (body.contains("mode")) {
      const auto m = body["mode"].is_string() ? pipeline::mode_from_string(body["mode"].get<std::string>()) : std::nullopt;
      if (!m) return send_error(res, 422, "BadRequest", "mode must be layout_only, with_post or with_post_and_summary");
      mode = *m;
    }

    std::lock_guard lock(mutex);
    if (st->status == RunStatus::Running) return send_error(res, 409, "Busy", "a run is already in progress");
    st->status = RunStatus::Running;
    st->error.clear();
    const int run_id = ++st->runs;
    ++running;
    threads.emplace_back([this, st, text, mode] {
      RunStatus final_status = RunStatus::Failed;
      std::string error;
      try {
        const auto r = pipeline::run_workflow(st->session, text, mode, config.options);
        final_status = r.verdict.passed() && !r.provider_error ? RunStatus::Done : RunStatus::Failed;
      } catch (const std::exception& e) {
        error = e.what();
      }
      std::lock_guard inner(mutex);
      st->status = final_status;
      st->error = error;
      --running;
      idle.notify_all();
    });
    send_json(res, 202, {{"run_id", run_id}, {"id", st->session.id()}, {"status", "running"}});
  }

  void get_session(const httplib::Request& req, httplib::Response& res) {
    const auto st = find(req.matches[1]);
    if (!st) return send_error(res, 404, "NotFound", "unknown session");
    std::lock_guard lock(mutex);
    send_json(res, 200, describe(*st));
  }

  void get_report(const httplib::Request& req, httplib::Response& res) {
    const auto st = find(req.matches[1]);
    if (!st) return send_error(res, 404, "NotFound", "unknown session");
    std::string error;
    {
      std::lock_guard lock(mutex);
      if (st->status == RunStatus::Running) {
        res.status = 204;
        return;
      }
      error = st->error;
    }
    if (!error.empty()) return send_error(res, 507, "FileError", error);
    try {
      auto j = json::parse(io::read_file(st->session.dir() / "report.json"));
      send_json(res, 200, std::move(j));
    } catch (const std::exception&) {
      send_error(res, 404, "NotFound", "no report yet");
    }
  }

  void get_field(const httplib::Request& req, httplib::Response& res) {
    const auto st = find(req.matches[1]);
    if (!st) return send_error(res, 404, "NotFound", "unknown session");
    {
      std::lock_guard lock(mutex);
      if (st->status == RunStatus::Running) return send_error(res, 404, "NotFound", "run in progress");
    }
    const std::string name = req.matches[2];
    const fs::path results = st->session.dir() / "Results";
    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(results, ec))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    // the standard arrays first, then the post-processing prints
    std::stable_partition(files.begin(), files.end(), [](const fs::path& p) { return p.filename() == "fields.json"; });
    for (const auto& f : files) {
      json j;
      try {
        j = json::parse(io::read_file(f));
      } catch (const std::exception&) {
        continue;
      }
      if (!j.contains(name) || !j[name].is_array()) continue;
      const auto& v = j[name];
      double lo = 0, hi = 0;
      if (!v.empty()) {
        lo = hi = v[0].get<double>();
        for (const auto& x : v) {
          lo = std::min(lo, x.get<double>());
          hi = std::max(hi, x.get<double>());
        }
      }
      return send_json(res, 200,
                       {{"name", name},
                        {"source", "Results/" + f.filename().string()},
                        {"nodes", j["nodes"]},
                        {"triangles", j["triangles"]},
                        {"values", v},
                        {"range", {lo, hi}}});
    }
    send_error(res, 404, "NotFound", "no field named " + name);
  }

  void routes() {
    http.set_default_headers({{"Access-Control-Allow-Origin", config.cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
    http.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    http.Post("/api/sessions", [this](const auto& q, auto& s) { create(q, s); });
    http.Get(R"(/api/sessions/([A-Za-z0-9_-]+))", [this](const auto& q, auto& s) { get_session(q, s); });
    http.Post(R"(/api/sessions/([A-Za-z0-9_-]+)/messages)", [this](const auto& q, auto& s) { post_message(q, s); });
    http.Get(R"(/api/sessions/([A-Za-z0-9_-]+)/report)", [this](const auto& q, auto& s) { get_report(q, s); });
    http.Get(R"(/api/sessions/([A-Za-z0-9_-]+)/fields/([A-Za-z0-9_]+))",
             [this](const auto& q, auto& s) { get_field(q, s); });
    http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
      send_error(res, res.status, res.status == 404 ? "NotFound" : "HttpError", "request failed");
      return httplib::Server::HandlerResponse::Handled;
    });
    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string what = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      send_error(res, 500, "Internal", what);
    });
  }

  void join_all() {
    std::vector<std::thread> done;
    {
      std::lock_guard lock(mutex);
      done.swap(threads);
    }
    for (auto& t : done)
      if (t.joinable()) t.join();
  }
};

Server::Server(ServerConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Server::~Server() {
  stop();
  wait_idle();
  impl_->join_all();
}

int Server::bind(const std::string& host, int port) {
  if (port == 0) return impl_->http.bind_to_any_port(host);
  return impl_->http.bind_to_port(host, port) ? port : -1;
}

bool Server::listen_after_bind() { return impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_->http.is_running()) impl_->http.stop();
}

void Server::wait_idle() {
  std::unique_lock lock(impl_->mutex);
  impl_->idle.wait(lock, [this] { return impl_->running == 0; });
}

}  // namespace emsim::server
