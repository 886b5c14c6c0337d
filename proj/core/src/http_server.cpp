#include <atomic>
#include <chrono>
#include <condition_variable>
#include <iostream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "slingshot/service.hpp"

namespace slingshot {

namespace {

void send_json(httplib::Response& res, int status, const std::string& body) {
  res.status = status;
  res.set_content(body, "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  nlohmann::ordered_json j{{"error", code}, {"message", message}};
  send_json(res, status, j.dump());
}

template <typename F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const NotFound& e) {
    send_error(res, 404, "not_found", e.what());
  } catch (const InvalidState& e) {
    send_error(res, 409, "conflict", e.what());
  } catch (const InvalidArgument& e) {
    send_error(res, 400, "bad_request", e.what());
  } catch (const nlohmann::json::exception& e) {
    send_error(res, 400, "bad_request", std::string("malformed body: ") + e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

nlohmann::json body_object(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  nlohmann::json j = nlohmann::json::parse(req.body);
  if (!j.is_object()) throw InvalidArgument("request body must be an object");
  return j;
}

double number_field(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw InvalidArgument(std::string("missing field '") + key + "'");
  if (!it->is_number()) throw InvalidArgument(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

}  // namespace

struct HttpService::Impl {
  SessionManager& sessions;
  HttpOptions opts;
  httplib::Server server;
  int bound_port = -1;
  std::thread listener;
  std::thread snapshotter;
  std::mutex stop_mutex;
  std::condition_variable stop_cv;
  bool stopping = false;

  Impl(SessionManager& s, HttpOptions o) : sessions(s), opts(std::move(o)) { routes(); }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/packs", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, nlohmann::json{{"packs", sessions.pack_ids()}}.dump()); });
    });

    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto body = body_object(req);
        const std::string pack = body.value("pack", std::string("default"));
        send_json(res, 201, session_json(sessions.create_session(pack)));
      });
    });

    server.Get(R"(/sessions/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, session_json(sessions.get(req.matches[1]))); });
    });

    server.Post(R"(/sessions/([0-9a-f]+)/shots)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto body = body_object(req);
        ShotRequest shot{number_field(body, "angle_deg"), number_field(body, "extension")};
        send_json(res, 200, shot_result_json(sessions.submit_shot(req.matches[1], shot)));
      });
    });

    server.Get(R"(/sessions/([0-9a-f]+)/summary)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, session_summary_json(sessions.session_summary(req.matches[1]))); });
    });
  }

  void snapshot_loop() {
    std::unique_lock lock(stop_mutex);
    while (!stopping) {
      stop_cv.wait_for(lock, std::chrono::seconds(opts.snapshot_interval_s));
      try {
        sessions.save_snapshot(*opts.snapshot_path);
      } catch (const std::exception& e) {
        std::cerr << "snapshot failed: " << e.what() << "\n";
      }
    }
  }
};

HttpService::HttpService(SessionManager& sessions, HttpOptions opts)
    : impl_(std::make_unique<Impl>(sessions, std::move(opts))) {}

HttpService::~HttpService() { stop(); }

int HttpService::bind() {
  if (impl_->bound_port > 0) return impl_->bound_port;
  if (impl_->opts.port == 0) {
    impl_->bound_port = impl_->server.bind_to_any_port(impl_->opts.host);
  } else if (impl_->server.bind_to_port(impl_->opts.host, impl_->opts.port)) {
    impl_->bound_port = impl_->opts.port;
  }
  if (impl_->bound_port <= 0) {
    throw Error("cannot bind " + impl_->opts.host + ":" + std::to_string(impl_->opts.port));
  }
  return impl_->bound_port;
}

void HttpService::run() {
  bind();
  if (impl_->opts.snapshot_path && !impl_->snapshotter.joinable()) {
    impl_->snapshotter = std::thread([this] { impl_->snapshot_loop(); });
  }
  impl_->server.listen_after_bind();
}

void HttpService::start() {
  bind();
  impl_->listener = std::thread([this] { run(); });
  impl_->server.wait_until_ready();
}

void HttpService::stop() {
  {
    std::lock_guard lock(impl_->stop_mutex);
    impl_->stopping = true;
  }
  impl_->stop_cv.notify_all();
  impl_->server.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
  if (impl_->snapshotter.joinable()) impl_->snapshotter.join();
}

}  // namespace slingshot
