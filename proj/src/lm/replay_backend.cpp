#include "psim/lm/backends.hpp"

namespace psim::lm {

ReplayBackend::ReplayBackend(const std::vector<json>& exchanges) {
  for (const auto& ex : exchanges) {
    auto kind = parse_kind(ex.at("kind").get<std::string>());
    if (!kind) throw InputError("replay: unknown kind " + ex.at("kind").dump());
    PromptRequest req;
    req.kind = *kind;
    req.context = ex.at("context");
    queue_[req.hash()].push_back(ex.at("response"));
    if (recorded_id_ == "replay" && ex.contains("backend")) {
      recorded_id_ = ex.at("backend").get<std::string>();
    }
  }
}

json ReplayBackend::generate(const PromptRequest& request) {
  std::lock_guard lock(mu_);
  auto it = queue_.find(request.hash());
  if (it == queue_.end() || it->second.empty()) {
    throw BackendError("replay: no recorded response for " + std::string(kind_name(request.kind)));
  }
  json out = std::move(it->second.front());
  it->second.pop_front();
  return out;
}

std::size_t ReplayBackend::remaining() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& [_, q] : queue_) n += q.size();
  return n;
}

}  // namespace psim::lm
