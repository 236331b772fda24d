#pragma once

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "psim/kernel.hpp"

namespace httplib {
class Server;
}

namespace psim {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  int tick_delay_ms = 100;  // pacing of the free-running loop
  bool start_running = false;
};

// HTTP facade over one kernel. Requests are serialized onto the kernel;
// reads return copies. /events streams log records as server-sent events.
class SimServer {
 public:
  SimServer(std::unique_ptr<Kernel> kernel, ServerOptions options);
  ~SimServer();
  SimServer(const SimServer&) = delete;
  SimServer& operator=(const SimServer&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Binds and serves on the calling thread until stop().
  bool listen();
  void stop();
  int port() const { return port_; }

  bool running() const { return running_; }
  Kernel& kernel() { return *kernel_; }

 private:
  void routes();
  void run_loop();

  std::unique_ptr<Kernel> kernel_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> http_;
  std::mutex kernel_mu_;
  std::mutex wake_mu_;
  std::condition_variable wake_;
  std::atomic<bool> running_{false};
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> published_{0};
  int subscription_ = -1;
  int port_ = 0;
  std::thread http_thread_;
  std::thread loop_thread_;
};

}  // namespace psim
