#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "psim/lm/client.hpp"

namespace psim::lm {

// Deterministic stand-in for a language model. Every response is a pure
// function of (kind, canonical context, seed): the FNV-1a hash of those
// drives template selection, and keyword cues in the context steer content.
class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(std::uint64_t seed) : seed_(seed) {}

  std::string id() const override { return "scripted"; }
  json generate(const PromptRequest& request) override;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

struct HttpBackendConfig {
  std::string base_url;              // LM_BASE_URL
  std::string model;                 // LM_MODEL
  std::string api_key;               // LM_API_KEY
  std::string path = "/v1/chat/completions";
  int timeout_seconds = 60;
  int retries = 2;
};

// Fills unset fields from LM_BASE_URL / LM_MODEL / LM_API_KEY.
HttpBackendConfig http_config_from_env(HttpBackendConfig base);

// Generic chat-completion client. The model is asked for a JSON object
// matching the kind's schema; timeouts and 5xx responses are retried.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  std::string id() const override { return "http:" + config_.model; }
  json generate(const PromptRequest& request) override;

  // Chat-completion request body for a prompt; exposed for tests.
  json build_body(const PromptRequest& request) const;

 private:
  HttpBackendConfig config_;
};

// Serves responses recorded in an event log, in recorded order per request
// identity. Used to replay a run without a live model.
class ReplayBackend final : public Backend {
 public:
  // `exchanges` are "lm" record payloads ({kind, context, response, backend}).
  explicit ReplayBackend(const std::vector<json>& exchanges);

  std::string id() const override { return recorded_id_; }
  json generate(const PromptRequest& request) override;

  std::size_t remaining() const;

 private:
  std::string recorded_id_ = "replay";
  mutable std::mutex mu_;
  std::map<std::uint64_t, std::deque<json>> queue_;
};

}  // namespace psim::lm
