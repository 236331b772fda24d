#include "psim/server.hpp"

#include <chrono>

#include <httplib.h>

namespace psim {
namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& what) {
  send_json(res, status, {{"error", what}});
}

}  // namespace

SimServer::SimServer(std::unique_ptr<Kernel> kernel, ServerOptions options)
    : kernel_(std::move(kernel)), options_(std::move(options)), http_(std::make_unique<httplib::Server>()) {
  published_ = kernel_->log().next_seq();
  subscription_ = kernel_->log().subscribe([this](const LogRecord& r) {
    {
      std::lock_guard lock(wake_mu_);
      published_ = r.seq + 1;
    }
    wake_.notify_all();
  });
  running_ = options_.start_running;
  routes();
}

SimServer::~SimServer() {
  stop();
  kernel_->log().unsubscribe(subscription_);
}

void SimServer::routes() {
  auto& s = *http_;

  s.Get("/state", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(kernel_mu_);
    json state = kernel_->snapshot();
    state["running"] = running_.load();
    state["finished"] = kernel_->finished();
    send_json(res, 200, state);
  });

  s.Get(R"(/agents/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(kernel_mu_);
    try {
      send_json(res, 200, kernel_->agent_view(req.matches[1]));
    } catch (const LookupError& e) {
      send_error(res, 404, e.what());
    }
  });

  s.Get("/logs", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<int> day;
    if (req.has_param("day")) {
      try {
        day = std::stoi(req.get_param_value("day"));
      } catch (const std::exception&) {
        send_error(res, 400, "day must be an integer");
        return;
      }
    }
    std::string body;
    for (const auto& r : kernel_->log().records()) {
      if (!day || r.day == *day) body += record_line(r) + "\n";
    }
    res.status = 200;
    res.set_content(body, "application/x-ndjson");
  });

  s.Get("/events", [this](const httplib::Request& req, httplib::Response& res) {
    std::uint64_t from = 0;
    const std::string since = req.has_header("Last-Event-ID") ? req.get_header_value("Last-Event-ID")
                              : req.has_param("since")       ? req.get_param_value("since")
                                                             : "";
    if (!since.empty()) {
      try {
        from = std::stoull(since) + (req.has_header("Last-Event-ID") ? 1 : 0);
      } catch (const std::exception&) {
        send_error(res, 400, "bad event id");
        return;
      }
    }
    auto cursor = std::make_shared<std::uint64_t>(from);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [this, cursor](std::size_t, httplib::DataSink& sink) {
      {
        std::unique_lock lock(wake_mu_);
        wake_.wait_for(lock, std::chrono::seconds(1), [&] { return stopping_ || published_ > *cursor; });
      }
      if (stopping_) {
        sink.done();
        return true;
      }
      auto records = kernel_->log().records_since(*cursor);
      if (records.empty()) return sink.write(": keepalive\n\n", 13);
      for (const auto& r : records) {
        std::string frame =
            "id: " + std::to_string(r.seq) + "\nevent: " + r.type + "\ndata: " + record_line(r) + "\n\n";
        if (!sink.write(frame.data(), frame.size())) return false;
        *cursor = r.seq + 1;
      }
      return true;
    });
  });

  auto control = [this](const std::string& kind) {
    return [this, kind](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(kernel_mu_);
      try {
        if ((kind == "step" || kind == "run_day") && kernel_->finished()) {
          send_error(res, 409, "simulation finished");
          return;
        }
        kernel_->note_control(kind);
        if (kind == "step") {
          kernel_->step();
        } else if (kind == "run_day") {
          kernel_->run_day();
        } else if (kind == "pause") {
          running_ = false;
        } else if (kind == "resume") {
          running_ = true;
          wake_.notify_all();
        }
        const auto& c = kernel_->clock();
        send_json(res, 200,
                  {{"clock", {{"day", c.day}, {"tick", c.tick}, {"day_open", c.day_open}}},
                   {"running", running_.load()},
                   {"finished", kernel_->finished()}});
      } catch (const Error& e) {
        send_error(res, 500, e.what());
      }
    };
  };
  s.Post("/run/step", control("step"));
  s.Post("/run/day", control("run_day"));
  s.Post("/run/pause", control("pause"));
  s.Post("/run/resume", control("resume"));

  s.Post(R"(/agents/([^/]+)/chat)", [this](const httplib::Request& req, httplib::Response& res) {
    std::string text;
    try {
      text = json::parse(req.body).at("text").get<std::string>();
    } catch (const json::exception&) {
      send_error(res, 400, "body must be JSON with a string 'text'");
      return;
    }
    std::lock_guard lock(kernel_mu_);
    try {
      auto r = kernel_->chat(req.matches[1], text);
      send_json(res, 200,
                {{"agent", r.agent}, {"text", r.text}, {"reply", r.reply}, {"summary", r.summary},
                 {"day", r.day}, {"tick", r.tick}});
    } catch (const LookupError& e) {
      send_error(res, 404, e.what());
    } catch (const BusyError& e) {
      send_error(res, 409, e.what());
    } catch (const InputError& e) {
      send_error(res, 400, e.what());
    } catch (const Error& e) {
      send_error(res, 502, e.what());
    }
  });

  s.Put("/environment", [this](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(kernel_mu_);
    auto report = kernel_->stage_environment(req.body);
    send_json(res, report.ok ? 200 : 422, to_json(report));
  });
}

void SimServer::run_loop() {
  while (!stopping_) {
    {
      std::unique_lock lock(wake_mu_);
      wake_.wait_for(lock, std::chrono::milliseconds(options_.tick_delay_ms),
                     [&] { return stopping_.load(); });
    }
    if (stopping_ || !running_) continue;
    std::lock_guard lock(kernel_mu_);
    try {
      if (kernel_->finished()) {
        running_ = false;
      } else {
        kernel_->step();
      }
    } catch (const Error&) {
      running_ = false;
    }
  }
}

int SimServer::start() {
  if (options_.port == 0) {
    port_ = http_->bind_to_any_port(options_.host);
  } else {
    port_ = http_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  if (port_ < 0) throw InputError("cannot bind " + options_.host + ":" + std::to_string(options_.port));
  http_thread_ = std::thread([this] { http_->listen_after_bind(); });
  loop_thread_ = std::thread([this] { run_loop(); });
  http_->wait_until_ready();
  return port_;
}

bool SimServer::listen() {
  start();
  http_thread_.join();
  return true;
}

void SimServer::stop() {
  if (stopping_.exchange(true)) return;
  wake_.notify_all();
  http_->stop();
  if (http_thread_.joinable()) http_thread_.join();
  if (loop_thread_.joinable()) loop_thread_.join();
}

}  // namespace psim
