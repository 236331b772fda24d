#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "psim/canonical.hpp"
#include "psim/types.hpp"

namespace psim {

inline constexpr int kLogVersion = 1;

struct LogRecord {
  int v = kLogVersion;
  std::uint64_t seq = 0;
  int day = 0;
  int tick = 0;
  std::optional<AgentId> agent;
  std::string type;
  json payload = json::object();

  bool operator==(const LogRecord&) const = default;
};

void to_json(json& j, const LogRecord& r);
void from_json(const json& j, LogRecord& r);

// Single JSONL line, without the trailing newline.
std::string record_line(const LogRecord& r);

class CorruptLogError : public Error {
 public:
  CorruptLogError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

std::vector<LogRecord> parse_log(std::string_view text);
// Throws CorruptLogError naming the 1-based line, LookupError if unreadable.
std::vector<LogRecord> read_log(const std::filesystem::path& path);

// Append-only record sink. Records are kept in memory and, when a path is
// given, written through to a JSONL file that is fsynced on sync().
class EventLog {
 public:
  using Subscriber = std::function<void(const LogRecord&)>;

  EventLog() = default;
  // `append` keeps existing file contents (resume); otherwise truncates.
  explicit EventLog(const std::filesystem::path& path, bool append = false);
  ~EventLog();
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  LogRecord append(int day, int tick, std::optional<AgentId> agent, std::string type,
                   json payload);
  void sync();

  std::vector<LogRecord> records() const;
  std::vector<LogRecord> records_since(std::uint64_t seq) const;
  std::size_t size() const;
  std::uint64_t next_seq() const;
  const std::optional<std::filesystem::path>& path() const { return path_; }

  int subscribe(Subscriber s);
  void unsubscribe(int id);

 private:
  mutable std::mutex mu_;
  std::vector<LogRecord> records_;
  std::uint64_t next_seq_ = 0;
  std::optional<std::filesystem::path> path_;
  int fd_ = -1;
  std::map<int, Subscriber> subscribers_;
  int next_subscriber_ = 0;
};

}  // namespace psim
