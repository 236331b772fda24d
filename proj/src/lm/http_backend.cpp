#include <cstdlib>
#include <sstream>

#include <httplib.h>

#include "psim/lm/backends.hpp"

namespace psim::lm {

HttpBackendConfig http_config_from_env(HttpBackendConfig base) {
  auto env = [](const char* name) -> std::string {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
  };
  if (base.base_url.empty()) base.base_url = env("LM_BASE_URL");
  if (base.model.empty()) base.model = env("LM_MODEL");
  if (base.api_key.empty()) base.api_key = env("LM_API_KEY");
  return base;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw InputError("http backend: LM_BASE_URL is not set");
  if (config_.model.empty()) throw InputError("http backend: LM_MODEL is not set");
}

json HttpBackend::build_body(const PromptRequest& request) const {
  std::ostringstream system;
  system << "You simulate one facet of a character in a social sandbox simulation. "
         << "Task: " << kind_name(request.kind) << ". "
         << "Reply with a single JSON object of this shape and nothing else: "
         << schema_description(request.kind);
  json messages = json::array();
  messages.push_back({{"role", "system"}, {"content", system.str()}});
  messages.push_back({{"role", "user"}, {"content", request.canonical_context()}});
  return {{"model", config_.model},
          {"messages", messages},
          {"response_format", {{"type", "json_object"}}},
          {"temperature", 0}};
}

json HttpBackend::generate(const PromptRequest& request) {
  httplib::Client client(config_.base_url);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const std::string body = build_body(request).dump();
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    auto res = client.Post(config_.path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "server status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw BackendError("http backend: status " + std::to_string(res->status) + ": " +
                         res->body.substr(0, 200));
    }
    json doc = json::parse(res->body, nullptr, false);
    if (doc.is_discarded()) throw BackendError("http backend: response is not JSON");
    try {
      const auto& content = doc.at("choices").at(0).at("message").at("content");
      json payload = json::parse(content.get<std::string>(), nullptr, false);
      // An unparseable message is returned as-is so the client's repair
      // round can react to it.
      if (payload.is_discarded()) return json{{"raw", content}};
      return payload;
    } catch (const json::exception& e) {
      throw BackendError(std::string("http backend: malformed completion: ") + e.what());
    }
  }
  throw BackendError("http backend: giving up after retries: " + last_error);
}

}  // namespace psim::lm
