#include "psim/event_log.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace psim {

void to_json(json& j, const LogRecord& r) {
  j = json::object();
  j["v"] = r.v;
  j["seq"] = r.seq;
  j["day"] = r.day;
  j["tick"] = r.tick;
  j["agent"] = r.agent ? json(*r.agent) : json(nullptr);
  j["type"] = r.type;
  j["payload"] = r.payload;
}

void from_json(const json& j, LogRecord& r) {
  r.v = j.at("v").get<int>();
  r.seq = j.at("seq").get<std::uint64_t>();
  r.day = j.at("day").get<int>();
  r.tick = j.at("tick").get<int>();
  const auto& a = j.at("agent");
  if (a.is_null()) {
    r.agent.reset();
  } else {
    r.agent = a.get<std::string>();
  }
  r.type = j.at("type").get<std::string>();
  r.payload = j.at("payload");
}

std::string record_line(const LogRecord& r) { return json(r).dump(); }

std::vector<LogRecord> parse_log(std::string_view text) {
  std::vector<LogRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    LogRecord r;
    try {
      r = json::parse(line).get<LogRecord>();
    } catch (const json::exception& e) {
      throw CorruptLogError(line_no, e.what());
    }
    if (r.v != kLogVersion) throw CorruptLogError(line_no, "unsupported version " + std::to_string(r.v));
    if (!out.empty() && r.seq <= out.back().seq) throw CorruptLogError(line_no, "sequence not increasing");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<LogRecord> read_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LookupError("cannot read log " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_log(buf.str());
}

EventLog::EventLog(const std::filesystem::path& path, bool append) : path_(path) {
  if (append && std::filesystem::exists(path)) {
    records_ = read_log(path);
    if (!records_.empty()) next_seq_ = records_.back().seq + 1;
  }
  int flags = O_WRONLY | O_CREAT | (append ? O_APPEND : O_TRUNC);
  fd_ = ::open(path.c_str(), flags, 0644);
  if (fd_ < 0) throw LookupError("cannot open log " + path.string() + ": " + std::strerror(errno));
}

EventLog::~EventLog() {
  if (fd_ >= 0) {
    ::fsync(fd_);
    ::close(fd_);
  }
}

LogRecord EventLog::append(int day, int tick, std::optional<AgentId> agent, std::string type,
                           json payload) {
  std::vector<Subscriber> subs;
  LogRecord r;
  {
    std::lock_guard lock(mu_);
    r.seq = next_seq_++;
    r.day = day;
    r.tick = tick;
    r.agent = std::move(agent);
    r.type = std::move(type);
    r.payload = std::move(payload);
    if (fd_ >= 0) {
      std::string line = record_line(r);
      line.push_back('\n');
      const char* p = line.data();
      std::size_t left = line.size();
      while (left > 0) {
        auto n = ::write(fd_, p, left);
        if (n < 0) {
          if (errno == EINTR) continue;
          throw Error(std::string("log write failed: ") + std::strerror(errno));
        }
        p += n;
        left -= static_cast<std::size_t>(n);
      }
    }
    records_.push_back(r);
    for (const auto& [_, s] : subscribers_) subs.push_back(s);
  }
  for (const auto& s : subs) s(r);
  return r;
}

void EventLog::sync() {
  std::lock_guard lock(mu_);
  if (fd_ >= 0) ::fsync(fd_);
}

std::vector<LogRecord> EventLog::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::vector<LogRecord> EventLog::records_since(std::uint64_t seq) const {
  std::lock_guard lock(mu_);
  std::vector<LogRecord> out;
  for (const auto& r : records_) {
    if (r.seq >= seq) out.push_back(r);
  }
  return out;
}

std::size_t EventLog::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

std::uint64_t EventLog::next_seq() const {
  std::lock_guard lock(mu_);
  return next_seq_;
}

int EventLog::subscribe(Subscriber s) {
  std::lock_guard lock(mu_);
  int id = next_subscriber_++;
  subscribers_[id] = std::move(s);
  return id;
}

void EventLog::unsubscribe(int id) {
  std::lock_guard lock(mu_);
  subscribers_.erase(id);
}

}  // namespace psim
