#include "psim/lm/client.hpp"

#include <array>
#include <chrono>
#include <map>

namespace psim::lm {
namespace {

constexpr std::array<std::string_view, kPromptKindCount> kKindNames = {
    "CHAR_INIT",       "CHAR_SUMMARY",     "PLAN_DAY",       "PLAN_REVISE",
    "INVITE_SEND",     "INVITE_DECIDE",    "ACTION_DESCRIBE", "EMOTION_UPDATE",
    "DIALOG_TOPIC",    "DIALOG_TURN",      "DIALOG_SUMMARY", "PARTNER_SELECT",
    "MEMORY_FILTER",   "MEMORY_BLUR",      "INSIGHT",        "GROWTH_STATE",
    "GROWTH_FEATURE",  "GROWTH_CONFLICT",  "GROWTH_PREFERENCE", "BFI_FILL",
    "CHAT_REPLY"};

struct KindSpec {
  std::vector<std::string> required;
  json shape;
};

// Shapes: "string" | "int" | "number" | "bool"; arrays hold one element
// shape; object keys ending in '?' are optional.
const std::map<PromptKind, KindSpec>& specs() {
  static const std::map<PromptKind, KindSpec> table = [] {
    const json preference = {{"ultimate_goal", "string"},   {"long_term_goal", "string"},
                             {"short_term_goal", "string"}, {"daily_routine", "string"},
                             {"hobbies", json::array({"string"})},
                             {"venue_preference", json::array({"string"})}};
    const json entry = {{"start", "string"},       {"end", "string"},
                        {"goal", "string"},        {"place", "string"},
                        {"description", "string"}, {"motivation", "string"},
                        {"partner?", "string"}};
    std::map<PromptKind, KindSpec> t;
    t[PromptKind::CharInit] = {{"brief"},
                               {{"basic_info",
                                 {{"name", "string"}, {"gender", "string"},
                                  {"age", "string"}, {"profession", "string"}}},
                                {"current_state", "string"},
                                {"traits", "string"},
                                {"conflict", "string"},
                                {"preference", preference}}};
    t[PromptKind::CharSummary] = {{"character", "word_budget"},
                                  {{"basic_info", "string"},
                                   {"current_state", "string"},
                                   {"traits", "string"},
                                   {"conflict", "string"},
                                   {"preference", "string"}}};
    t[PromptKind::PlanDay] = {{"agent", "character", "places", "day", "home"},
                              {{"entries", json::array({entry})}}};
    t[PromptKind::PlanRevise] = {{"agent", "character", "places", "remaining", "reason"},
                                 {{"entries", json::array({entry})}}};
    t[PromptKind::InviteSend] = {{"character", "invitee", "slot"},
                                 {{"topic", "string"}, {"reason", "string"}}};
    t[PromptKind::InviteDecide] = {{"character", "invitation", "conflicts"},
                                   {{"accept", "bool"},
                                    {"reason", "string"},
                                    {"benefit_new", "number"},
                                    {"benefit_existing?", "number"}}};
    t[PromptKind::ActionDescribe] = {{"agent", "character", "entry"}, {{"text", "string"}}};
    t[PromptKind::EmotionUpdate] = {{"character", "action", "previous"},
                                    {{"category", "int"}, {"feeling", "string"}}};
    t[PromptKind::DialogTopic] = {{"character", "partner", "history"}, {{"topic", "string"}}};
    t[PromptKind::DialogTurn] = {{"speaker", "listener", "topic", "turns"},
                                 {{"utterance", "string"}, {"end", "bool"}}};
    t[PromptKind::DialogSummary] = {{"character", "partner", "topic", "turns"},
                                    {{"summary", "string"}}};
    t[PromptKind::PartnerSelect] = {{"character", "candidates"},
                                    {{"partner", "string"}, {"reason", "string"}}};
    t[PromptKind::MemoryFilter] = {{"character", "records"},
                                   {{"memories", json::array({{{"index", "int"},
                                                               {"summary", "string"},
                                                               {"salience", "string"}}})}}};
    t[PromptKind::MemoryBlur] = {{"records"}, {{"summary", "string"}}};
    t[PromptKind::Insight] = {{"character", "events", "memories", "day"}, {{"text", "string"}}};
    t[PromptKind::GrowthState] = {{"character", "insight", "day_summary"},
                                  {{"current_state", "string"}}};
    t[PromptKind::GrowthFeature] = {{"character", "insight", "day_summary"},
                                    {{"traits", "string"}}};
    t[PromptKind::GrowthConflict] = {{"character", "insight", "day_summary"},
                                     {{"conflict", "string"}}};
    t[PromptKind::GrowthPreference] = {{"character", "insight", "day_summary"},
                                       {{"preference", preference}}};
    t[PromptKind::BfiFill] = {{"days", "items"},
                              {{"sheets", json::array({{{"day", "int"},
                                                        {"answers", json::array({"int"})}}})}}};
    t[PromptKind::ChatReply] = {{"character", "message"}, {{"reply", "string"}}};
    return t;
  }();
  return table;
}

std::optional<std::string> check_shape(const json& shape, const json& value, const std::string& path) {
  if (shape.is_string()) {
    const auto& s = shape.get_ref<const std::string&>();
    bool ok = (s == "string" && value.is_string()) ||
              (s == "int" && value.is_number_integer()) ||
              (s == "number" && value.is_number()) || (s == "bool" && value.is_boolean());
    if (!ok) return path + ": expected " + s;
    return std::nullopt;
  }
  if (shape.is_array()) {
    if (!value.is_array()) return path + ": expected array";
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (auto err = check_shape(shape[0], value[i], path + "[" + std::to_string(i) + "]")) {
        return err;
      }
    }
    return std::nullopt;
  }
  if (!value.is_object()) return path + ": expected object";
  for (auto it = shape.begin(); it != shape.end(); ++it) {
    std::string key = it.key();
    bool optional = !key.empty() && key.back() == '?';
    if (optional) key.pop_back();
    auto found = value.find(key);
    if (found == value.end() || found->is_null()) {
      if (optional) continue;
      return path + "." + key + ": missing";
    }
    if (auto err = check_shape(it.value(), *found, path + "." + key)) return err;
  }
  return std::nullopt;
}

}  // namespace

std::string_view kind_name(PromptKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<PromptKind> parse_kind(std::string_view name) {
  for (std::size_t i = 0; i < kPromptKindCount; ++i) {
    if (kKindNames[i] == name) return static_cast<PromptKind>(i);
  }
  return std::nullopt;
}

const std::vector<std::string>& required_fields(PromptKind k) { return specs().at(k).required; }

std::optional<std::string> schema_violation(PromptKind k, const json& payload) {
  return check_shape(specs().at(k).shape, payload, "$");
}

std::string schema_description(PromptKind k) { return specs().at(k).shape.dump(); }

std::uint64_t PromptRequest::hash() const {
  std::string key(kind_name(kind));
  key.push_back('\x1f');
  key += canonical_context();
  return fnv1a64(key);
}

LmClient::LmClient(std::shared_ptr<Backend> backend) : backend_(std::move(backend)) {
  if (!backend_) throw std::invalid_argument("LmClient requires a backend");
}

CompletionResponse LmClient::complete(const PromptRequest& request) const {
  if (!request.context.is_object()) {
    throw RequestError(std::string(kind_name(request.kind)) + ": context must be an object");
  }
  for (const auto& field : required_fields(request.kind)) {
    if (!request.context.contains(field)) {
      throw RequestError(std::string(kind_name(request.kind)) + ": missing context field '" +
                         field + "'");
    }
  }

  PromptRequest attempt = request;
  for (int round = 0; round < 2; ++round) {
    auto t0 = std::chrono::steady_clock::now();
    json payload = backend_->generate(attempt);
    auto t1 = std::chrono::steady_clock::now();

    CompletionResponse response;
    response.payload = std::move(payload);
    response.backend_id = backend_->id();
    if (response.backend_id.rfind("scripted", 0) != 0 && response.backend_id.rfind("replay", 0) != 0) {
      response.latency_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    if (observer_) observer_(attempt, response);

    auto violation = schema_violation(attempt.kind, response.payload);
    if (!violation) return response;
    if (round == 1) {
      throw DecodeError(std::string(kind_name(request.kind)) + ": " + *violation);
    }
    attempt.context["repair"] = {{"error", *violation}, {"previous", response.payload}};
  }
  throw DecodeError("unreachable");
}

}  // namespace psim::lm
