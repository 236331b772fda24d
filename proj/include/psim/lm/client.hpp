#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psim/canonical.hpp"
#include "psim/types.hpp"

namespace psim::lm {

enum class PromptKind {
  CharInit,
  CharSummary,
  PlanDay,
  PlanRevise,
  InviteSend,
  InviteDecide,
  ActionDescribe,
  EmotionUpdate,
  DialogTopic,
  DialogTurn,
  DialogSummary,
  PartnerSelect,
  MemoryFilter,
  MemoryBlur,
  Insight,
  GrowthState,
  GrowthFeature,
  GrowthConflict,
  GrowthPreference,
  BfiFill,
  ChatReply,
};

inline constexpr std::size_t kPromptKindCount = 21;

std::string_view kind_name(PromptKind k);
std::optional<PromptKind> parse_kind(std::string_view name);

// Context fields a request of the given kind must carry.
const std::vector<std::string>& required_fields(PromptKind k);

// Returns a description of the first schema violation, or nullopt.
std::optional<std::string> schema_violation(PromptKind k, const json& payload);

// Human-readable description of the response shape, used in HTTP prompts.
std::string schema_description(PromptKind k);

struct PromptRequest {
  PromptKind kind = PromptKind::ChatReply;
  json context = json::object();
  AgentId agent_id;
  int day = 0;
  int tick = 0;

  std::string canonical_context() const { return canonical_dump(context); }
  // Identity of the logical request: kind + canonical context.
  std::uint64_t hash() const;
};

struct CompletionResponse {
  json payload;
  std::string backend_id;
  double latency_ms = 0.0;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;
  // Throws BackendError when no payload could be obtained.
  virtual json generate(const PromptRequest& request) = 0;
};

using ExchangeObserver =
    std::function<void(const PromptRequest&, const CompletionResponse&)>;

// Front door for every completion. Checks preconditions, validates the
// payload against the kind's schema, and performs one repair retry.
class LmClient {
 public:
  explicit LmClient(std::shared_ptr<Backend> backend);

  CompletionResponse complete(const PromptRequest& request) const;

  void set_observer(ExchangeObserver observer) { observer_ = std::move(observer); }
  const std::shared_ptr<Backend>& backend() const { return backend_; }

 private:
  std::shared_ptr<Backend> backend_;
  ExchangeObserver observer_;
};

}  // namespace psim::lm
