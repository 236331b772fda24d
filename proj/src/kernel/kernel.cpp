#include "psim/kernel.hpp"

#include <algorithm>

#include "psim/evaluation/bfi.hpp"

namespace psim {
namespace {

std::string pair_key(const AgentId& a, const AgentId& b) { return a < b ? a + "|" + b : b + "|" + a; }

std::string cache_key(const AgentId& id, int revision, std::optional<Dimension> emphasis) {
  return id + "|" + std::to_string(revision) + "|" +
         (emphasis ? std::string(dimension_name(*emphasis)) : std::string("-"));
}

json emotion_json(const EmotionState& e) {
  json j = e;
  return j;
}

std::string join_events(const std::vector<std::string>& events, std::size_t max) {
  std::string out;
  for (std::size_t i = 0; i < events.size() && i < max; ++i) {
    if (i) out += " ";
    out += events[i];
  }
  return out;
}

}  // namespace

json to_json(const EnvUpdateReport& r) {
  return {{"ok", r.ok}, {"errors", r.errors}, {"diff", r.diff}, {"effective_day", r.effective_day}};
}

Kernel::Kernel(RunConfig config, std::shared_ptr<lm::Backend> backend)
    : Kernel(Resumed{}, std::move(config), std::move(backend)) {
  log_ = config_.log_path.empty() ? std::make_unique<EventLog>()
                                  : std::make_unique<EventLog>(config_.log_path, false);
  json cfg = config_to_json(config_);
  cfg.erase("log");
  cfg.erase("commands");
  emit(std::nullopt, "run", {{"config", cfg}, {"backend", config_.backend}});
  emit(std::nullopt, "world", {{"csv", world_to_csv(world_)}, {"initial", true}});
  init_agents();
}

Kernel::Kernel(Resumed, RunConfig config, std::shared_ptr<lm::Backend> backend)
    : config_(std::move(config)) {
  auto problems = config_problems(config_);
  if (!problems.empty()) throw InputError("invalid config: " + problems.front());
  window_ = DayWindow{config_.day_start, config_.day_end, config_.tick_minutes};
  WorldOptions opts;
  opts.tick_minutes = config_.tick_minutes;
  opts.move_speed = config_.move_speed;
  world_ = load_world(config_.world_csv, opts);
  rng_ = CounterRng(splitmix64(config_.seed ^ 0x5eed5eed5eed5eedULL));
  attach_client(backend ? std::move(backend) : make_backend(config_));
}

Kernel::~Kernel() = default;

void Kernel::attach_client(std::shared_ptr<lm::Backend> backend) {
  client_ = std::make_unique<lm::LmClient>(std::move(backend));
  client_->set_observer([this](const lm::PromptRequest& req, const lm::CompletionResponse& resp) {
    std::optional<AgentId> who;
    if (!req.agent_id.empty()) who = req.agent_id;
    emit(who, "lm",
         {{"kind", lm::kind_name(req.kind)},
          {"context", req.context},
          {"response", resp.payload},
          {"backend", resp.backend_id}});
  });
}

void Kernel::emit(const std::optional<AgentId>& agent, std::string type, json payload) {
  if (!log_) return;
  // Between days, records belong to the first boundary of the coming day.
  const int day = clock_.day_open ? clock_.day : clock_.day + 1;
  const int tick = clock_.day_open ? std::min(clock_.tick, window_.ticks() - 1) : 0;
  log_->append(day, tick, agent, std::move(type), std::move(payload));
}

AgentRuntime& Kernel::agent(const AgentId& id) {
  auto it = agents_.find(id);
  if (it == agents_.end()) throw LookupError("unknown agent '" + id + "'");
  return it->second;
}

void Kernel::init_agents() {
  std::vector<AgentSeed> seeds = config_.agents;
  std::sort(seeds.begin(), seeds.end(), [](const AgentSeed& a, const AgentSeed& b) { return a.id < b.id; });
  for (const auto& s : seeds) {
    if (!world_.find(s.home)) throw InputError("agent '" + s.id + "': unknown home place '" + s.home + "'");
    AgentRuntime a;
    a.id = s.id;
    a.home = s.home;
    if (s.structure) {
      a.structure = *s.structure;
      auto report = validate_structure(a.structure);
      if (!report.empty()) throw InputError("agent '" + s.id + "': invalid structure: " + report.front());
    } else {
      a.structure = init_character(*s.brief, *client_);
    }
    a.card = make_card(a.id, a.structure, a.home);
    a.position = a.home;
    a.plan.agent = a.id;
    day_structures_[a.id].emplace_back(0, a.structure);
    agents_.emplace(a.id, a);
    emit(a.id, "init", {{"structure", a.structure}, {"home", a.home}, {"card", to_context(a.card)}});
  }
}

json Kernel::character_view(const AgentId& id, std::optional<Dimension> emphasis) {
  AgentRuntime& a = agent(id);
  if (config_.ablate.simple_character) return persona_paragraph(a.structure);
  std::string k = cache_key(id, a.structure.revision, emphasis);
  auto it = summary_cache_.find(k);
  if (it == summary_cache_.end()) {
    it = summary_cache_
             .emplace(k, summarize_character(a.structure, emphasis, *client_,
                                             static_cast<std::size_t>(config_.summary_words)))
             .first;
  }
  return summary_view(it->second);
}

std::int64_t Kernel::abs_tick(int tick) const {
  int day = clock_.day_open ? clock_.day : clock_.day + 1;
  return static_cast<std::int64_t>(day) * window_.ticks() + tick;
}

bool Kernel::busy(const AgentRuntime& a, int tick) const { return a.busy_until > abs_tick(tick); }

// ---- commands ---------------------------------------------------------------

void Kernel::record_command(const std::string& kind, const json& payload) {
  emit(std::nullopt, "command",
       {{"kind", kind}, {"payload", payload}, {"at", clock_.day_open ? "tick" : "pre_day"}});
}

void Kernel::apply_commands(const std::string& at) {
  const int day = at == "pre_day" ? clock_.day + 1 : clock_.day;
  const int tick = at == "pre_day" ? 0 : clock_.tick;
  while (next_command_ < config_.commands.size()) {
    const Command& c = config_.commands[next_command_];
    if (c.day != day || c.at != at || (at == "tick" && c.tick != tick)) break;
    ++next_command_;
    apply_command(c);
  }
}

void Kernel::apply_command(const Command& c) {
  if (c.kind == "chat") {
    try {
      chat(c.payload.at("agent").get<std::string>(), c.payload.at("text").get<std::string>());
    } catch (const BusyError&) {
    }
  } else if (c.kind == "env_update") {
    stage_environment(c.payload.at("csv").get<std::string>());
  } else {
    note_control(c.kind);
  }
}

void Kernel::note_control(const std::string& kind) { record_command(kind, json::object()); }

ChatResult Kernel::chat(const AgentId& id, const std::string& text) {
  AgentRuntime& a = agent(id);
  if (finished()) throw InputError("simulation finished");
  const int tick = clock_.day_open ? clock_.tick : 0;
  if (busy(a, tick)) throw BusyError("agent '" + id + "' is in a conversation");
  if (normalize_ws(text).empty()) throw InputError("chat text must be non-empty");
  record_command("chat", {{"agent", id}, {"text", text}});
  return do_chat(id, text);
}

ChatResult Kernel::do_chat(const AgentId& id, const std::string& text) {
  AgentRuntime& a = agent(id);
  const int tick = clock_.day_open ? clock_.tick : 0;
  const int day = clock_.day_open ? clock_.day : clock_.day + 1;

  lm::PromptRequest req;
  req.kind = lm::PromptKind::ChatReply;
  req.agent_id = id;
  req.day = day;
  req.tick = tick;
  req.context = {{"character", character_view(id, std::nullopt)},
                 {"agent", to_context(a.card)},
                 {"message", text}};
  std::string reply = client_->complete(req).payload.at("reply").get<std::string>();

  const std::string topic = "chat: " + truncate_words(normalize_ws(text), 8);
  AgentCard user{"user", "User", "visitor", "", {}, ""};
  json turns = json::array({{{"speaker", "User"}, {"text", text}}, {{"speaker", a.card.name}, {"text", reply}}});
  lm::PromptRequest sum;
  sum.kind = lm::PromptKind::DialogSummary;
  sum.agent_id = id;
  sum.day = day;
  sum.tick = tick;
  sum.context = {{"character", to_context(a.card)}, {"partner", to_context(user)}, {"topic", topic}, {"turns", turns}};
  std::string summary;
  try {
    summary = client_->complete(sum).payload.at("summary").get<std::string>();
  } catch (const Error&) {
    summary = "Chatted with a visitor about " + topic + ".";
  }
  a.dialogs["user"].push_back({day, topic, summary});
  a.busy_until = abs_tick(tick) + 1;

  const std::uint64_t seq = log_->next_seq();
  emit(id, "dialog",
       {{"participants", {id, "user"}},
        {"chat", true},
        {"topic", topic},
        {"turns", {{{"speaker", "user"}, {"text", text}}, {{"speaker", id}, {"text", reply}}}},
        {"summaries", {{id, summary}}},
        {"start_tick", tick},
        {"end_tick", tick + 1},
        {"truncated", false}});
  emotion_after(a, a.card.name + " is chatting with a visitor about " + topic.substr(6) + ".", "dialog", summary,
                seq, tick);
  return {id, text, reply, summary, day, tick};
}

EnvUpdateReport Kernel::stage_environment(const std::string& csv) {
  EnvUpdateReport r;
  r.effective_day = clock_.day + 1;
  if (finished()) {
    r.errors.emplace_back("simulation finished");
    return r;
  }
  WorldOptions opts;
  opts.tick_minutes = config_.tick_minutes;
  opts.move_speed = config_.move_speed;
  WorldMap next;
  try {
    next = load_world(csv, opts);
  } catch (const ParseError& e) {
    r.errors.emplace_back(e.what());
    return r;
  } catch (const InputError& e) {
    r.errors.emplace_back(e.what());
    return r;
  }
  for (const auto& [id, a] : agents_) {
    if (!next.find(a.home)) {
      r.errors.push_back("home place '" + a.home + "' of agent '" + id + "' would be removed");
    }
  }
  if (!r.errors.empty()) return r;
  r.ok = true;
  r.diff = diff_worlds(world_, next);
  staged_world_ = world_to_csv(next);
  record_command("env_update", {{"csv", *staged_world_}, {"diff", r.diff}, {"effective_day", r.effective_day}});
  return r;
}

// ---- day structure ----------------------------------------------------------

void Kernel::run() {
  while (!finished()) run_day();
}

void Kernel::run_day() {
  if (finished()) throw InputError("simulation finished");
  if (!clock_.day_open) begin_day();
  while (clock_.day_open) step();
}

void Kernel::begin_day() {
  if (clock_.day_open) throw InputError("day already open");
  if (clock_.day >= config_.days) throw InputError("simulation finished");
  apply_commands("pre_day");
  clock_.day += 1;
  clock_.tick = 0;
  clock_.day_open = true;
  const int day = clock_.day;

  if (staged_world_) {
    WorldOptions opts;
    opts.tick_minutes = config_.tick_minutes;
    opts.move_speed = config_.move_speed;
    WorldMap next = load_world(*staged_world_, opts);
    WorldDiff diff = diff_worlds(world_, next);
    world_ = std::move(next);
    staged_world_.reset();
    emit(std::nullopt, "world", {{"csv", world_to_csv(world_)}, {"diff", diff}, {"initial", false}});
  }
  ledger_ = OccupancyLedger{};

  json acquaintances = json::array();
  for (const auto& [id, a] : agents_) acquaintances.push_back(to_context(a.card));

  std::map<AgentId, DailyPlan> plans;
  for (auto& [id, a] : agents_) {
    a.position = a.home;
    a.day_events.clear();
    PlanInputs in;
    in.agent = id;
    in.day = day;
    in.character = character_view(id, Dimension::Preference);
    in.home = a.home;
    json memory = json::array();
    const auto& lt = a.memory.long_term;
    for (std::size_t i = lt.size() > 5 ? lt.size() - 5 : 0; i < lt.size(); ++i) memory.push_back(lt[i].summary);
    in.memory = memory;
    if (!config_.ablate.disable_insight && !a.insights.empty()) in.insight = a.insights.back().text;
    in.acquaintances = acquaintances;
    const DailyPlan* previous = a.plan.entries.empty() ? nullptr : &a.plan;
    auto result = generate_daily_plan(in, world_, window_, *client_, previous);
    a.plan = result.value;
    emit(id, "plan",
         {{"plan", a.plan}, {"degraded", result.degraded ? json(*result.degraded) : json(nullptr)}});
    plans[id] = a.plan;
  }

  AppointmentInputs ai;
  for (const auto& [id, a] : agents_) {
    ai.cards[id] = a.card;
    ai.characters[id] = character_view(id, std::nullopt);
  }
  auto invitations = post_process_appointments(
      plans, ai, world_, window_, *client_, day, [&](std::string_view type, json payload) {
        const AgentId from = payload.at("invitation").at("from").get<std::string>();
        for (auto it = payload.at("plans").begin(); it != payload.at("plans").end(); ++it) {
          agents_.at(it.key()).plan = it.value().get<DailyPlan>();
        }
        emit(from, std::string(type), std::move(payload));
      });
  for (auto& [id, p] : plans) agents_.at(id).plan = p;
}

void Kernel::step() {
  if (!clock_.day_open) {
    if (finished()) throw InputError("simulation finished");
    begin_day();
  }
  apply_commands("tick");
  run_tick(clock_.tick);
  clock_.tick += 1;
  if (clock_.tick >= window_.ticks()) end_day();
}

void Kernel::run_tick(int tick) {
  const int minute = window_.minute_of(tick);
  for (auto& [id, a] : agents_) {
    for (std::size_t i = 0; i < a.plan.entries.size(); ++i) {
      auto& e = a.plan.entries[i];
      if (e.status == EntryStatus::Active && e.end <= minute) {
        e.status = EntryStatus::Done;
        ledger_.release_spot(id);
        emit(id, "finish", {{"index", i}, {"plan", a.plan}, {"ledger", ledger_}});
      }
    }
  }
  start_entries(tick);
  dialogue_phase(tick);
}

void Kernel::start_entries(int tick) {
  const int minute = window_.minute_of(tick);
  for (auto& [id, a] : agents_) {
    for (std::size_t i = 0; i < a.plan.entries.size(); ++i) {
      auto& e = a.plan.entries[i];
      if (e.status == EntryStatus::Pending && e.end <= minute) {
        e.status = EntryStatus::Cancelled;
        emit(id, "cancel", {{"index", i}, {"reason", "missed"}, {"plan", a.plan}, {"ledger", ledger_}});
      }
    }
    if (busy(a, tick)) continue;
    bool active = std::any_of(a.plan.entries.begin(), a.plan.entries.end(),
                              [](const PlanEntry& e) { return e.status == EntryStatus::Active; });
    if (active) continue;
    std::optional<std::size_t> due;
    for (std::size_t i = 0; i < a.plan.entries.size(); ++i) {
      const auto& e = a.plan.entries[i];
      if (e.status == EntryStatus::Pending && e.start <= minute && minute < e.end) {
        due = i;
        break;
      }
    }
    if (!due) continue;

    std::vector<AgentId> companions;
    const PlanEntry& entry = a.plan.entries[*due];
    const std::string requested_place = entry.place;
    const std::optional<std::string> invitation = entry.invitation;
    if (entry.goal == GoalTag::Appointment && entry.confirmed && entry.partner && agents_.count(*entry.partner)) {
      companions.push_back(*entry.partner);
    }
    const AgentId self = id;
    Emit sink = [&, self](std::string_view type, json payload) {
      payload["plan"] = agents_.at(self).plan;
      payload["ledger"] = ledger_;
      emit(self, std::string(type), std::move(payload));
    };
    auto outcome = execute_action(a.card, a.plan, *due, companions, world_, ledger_,
                                  character_view(id, std::nullopt), window_, a.position, *client_, sink);
    if (!outcome.started) continue;

    const PlanEntry& started = a.plan.entries[outcome.index];
    if (invitation && started.place != requested_place && !companions.empty()) {
      AgentRuntime& partner = agents_.at(companions.front());
      for (std::size_t k = 0; k < partner.plan.entries.size(); ++k) {
        auto& pe = partner.plan.entries[k];
        if (pe.invitation == invitation && pe.status == EntryStatus::Pending) {
          pe.place = started.place;
          emit(partner.id, "resite",
               {{"index", k}, {"invitation", *invitation}, {"place", started.place}, {"plan", partner.plan}});
        }
      }
    }
    if (a.position != outcome.place) {
      emit(id, "move",
           {{"from", a.position},
            {"to", outcome.place},
            {"ticks", travel_time(world_, a.position, outcome.place)}});
      a.position = outcome.place;
    }
    const std::uint64_t seq = log_->next_seq();
    emit(id, "action",
         {{"index", outcome.index},
          {"entry", started},
          {"description", outcome.description},
          {"place", outcome.place},
          {"claimed", outcome.claimed},
          {"claimed_for", outcome.claimed_for},
          {"plan", a.plan},
          {"ledger", ledger_}});
    emotion_after(a, outcome.description, "action", outcome.description, seq, tick);
  }
}

void Kernel::dialogue_phase(int tick) {
  const std::int64_t now = abs_tick(tick);
  for (auto& [id, a] : agents_) {
    if (busy(a, tick)) continue;
    const Place* here = world_.find(a.position);
    if (!here) continue;
    auto side = [&](AgentRuntime& r) {
      TriggerSide s;
      s.id = r.id;
      for (const auto& e : r.plan.entries) {
        if (e.status == EntryStatus::Active) s.active = &e;
      }
      s.in_conversation = busy(r, tick);
      s.extraversion = extraversion_factor(r.structure);
      return s;
    };
    TriggerSide sa = side(a);
    std::vector<AgentId> triggered;
    for (auto& [bid, b] : agents_) {
      if (bid == id || busy(b, tick)) continue;
      const Place* there = world_.find(b.position);
      if (!there) continue;
      int dist = manhattan(*here, *there);
      if (dist > config_.dialogue.radius) continue;
      auto last = last_talk_.find(pair_key(id, bid));
      if (last != last_talk_.end() && now - last->second < config_.dialogue.cooldown_ticks) continue;
      TriggerSide sb = side(b);
      if (forced_conversation(sa, sb) || maybe_start_conversation(sa, sb, dist, config_.dialogue, rng_)) {
        triggered.push_back(bid);
      }
    }
    if (triggered.empty()) continue;

    AgentId partner_id = triggered.front();
    std::string why = "nearby";
    if (triggered.size() > 1) {
      std::vector<AgentCard> cands;
      for (const auto& t : triggered) cands.push_back(agents_.at(t).card);
      auto [chosen, reason] = select_partner(a.card, cands, a.dialogs, character_view(id, std::nullopt), *client_);
      partner_id = chosen;
      why = reason;
    }
    AgentRuntime& b = agents_.at(partner_id);
    std::string topic = choose_topic(a.card, b.card, a.dialogs[partner_id], character_view(id, std::nullopt), *client_);
    Conversation c = run_dialogue(a.card, b.card, topic, a.dialogs, b.dialogs, clock_.day, tick,
                                  config_.dialogue.max_turns, *client_);
    a.busy_until = abs_tick(c.end_tick);
    b.busy_until = abs_tick(c.end_tick);
    last_talk_[pair_key(id, partner_id)] = now;

    json payload = c;
    payload["chat"] = false;
    payload["selection_reason"] = why;
    const std::uint64_t seq = log_->next_seq();
    emit(id, "dialog", payload);
    const std::string core = topic_core(topic);
    emotion_after(a, a.card.name + " is talking with " + b.card.name + " about " + core + ".", "dialog",
                  c.summaries.at(id), seq, tick);
    emotion_after(b, b.card.name + " is talking with " + a.card.name + " about " + core + ".", "dialog",
                  c.summaries.at(partner_id), seq, tick);
  }
}

void Kernel::emotion_after(AgentRuntime& a, const std::string& action, const std::string& kind,
                           const std::string& memory_text, std::uint64_t source_seq, int tick) {
  const int day = clock_.day_open ? clock_.day : clock_.day + 1;
  const EmotionState previous = a.emotion;
  auto res = update_emotion(a.card, action, character_view(a.id, Dimension::Conflict), previous,
                            !config_.ablate.disable_feelings, day, tick, *client_);
  a.emotion = res.value;
  a.memory.short_term.push_back({day, tick, kind, memory_text, a.emotion});
  a.day_events.push_back(memory_text);
  emit(a.id, "emotion",
       {{"category", a.emotion.category},
        {"label", std::string(emotion_label(a.emotion.category))},
        {"feeling", a.emotion.feeling},
        {"state", a.emotion},
        {"previous", previous.category},
        {"source_seq", source_seq},
        {"action", action},
        {"memory", {{"kind", kind}, {"text", memory_text}}},
        {"degraded", res.degraded ? json(*res.degraded) : json(nullptr)}});

  if (!check_replan_trigger(previous, a.emotion)) return;
  bool applied = !config_.ablate.disable_feelings;
  Degradable<bool> changed{false, std::nullopt};
  if (applied) {
    int now = window_.minute_of(std::min(tick + 1, window_.ticks()));
    changed = replan_on_emotion(a.card, a.plan, previous, a.emotion, character_view(a.id, Dimension::Preference),
                                world_, window_, a.position, now, *client_);
  }
  emit(a.id, "replan",
       {{"from", previous.category},
        {"to", a.emotion.category},
        {"applied", applied},
        {"changed", changed.value},
        {"degraded", changed.degraded ? json(*changed.degraded) : json(nullptr)},
        {"plan", a.plan}});
}

void Kernel::end_day() {
  if (!clock_.day_open) throw InputError("no open day");
  clock_.tick = window_.ticks() - 1;
  const int day = clock_.day;
  for (auto& [id, a] : agents_) {
    for (std::size_t i = 0; i < a.plan.entries.size(); ++i) {
      auto& e = a.plan.entries[i];
      if (e.status == EntryStatus::Active) {
        e.status = EntryStatus::Done;
        ledger_.release_spot(id);
        emit(id, "finish", {{"index", i}, {"plan", a.plan}, {"ledger", ledger_}});
      }
    }
  }

  for (auto& [id, a] : agents_) {
    auto filtered = filter_memories(a.card, a.memory.short_term, character_view(id, Dimension::Conflict), day, *client_);
    std::vector<LongTermRecord> store = a.memory.long_term;
    for (const auto& r : filtered.value) store.push_back(r);
    auto decayed = decay_memories(std::move(store), config_.memory_capacity, config_.blur_batch, *client_);
    for (auto& r : a.memory.short_term) a.memory.archive.push_back(std::move(r));
    a.memory.short_term.clear();
    a.memory.long_term = decayed.value;
    std::optional<std::string> degraded = filtered.degraded ? filtered.degraded : decayed.degraded;
    emit(id, "memory",
         {{"filtered", filtered.value},
          {"long_term", a.memory.long_term},
          {"degraded", degraded ? json(*degraded) : json(nullptr)}});

    std::string insight_text;
    if (!config_.ablate.disable_insight) {
      auto ins = generate_insight(a.card, a.day_events, a.memory.long_term, character_view(id, std::nullopt), day,
                                  *client_);
      a.insights.push_back(ins.value);
      insight_text = ins.value.text;
      emit(id, "insight",
           {{"text", ins.value.text}, {"degraded", ins.degraded ? json(*ins.degraded) : json(nullptr)}});
    }

    if (!config_.ablate.disable_growth) {
      auto grown = grow_character(a.card, insight_text, join_events(a.day_events, 12), a.structure, day, *client_);
      a.structure = grown.value.structure;
      a.card = make_card(id, a.structure, a.home);
      emit(id, "growth",
           {{"delta", grown.value.delta},
            {"structure", a.structure},
            {"degraded", grown.degraded ? json(*grown.degraded) : json(nullptr)}});
    }
    day_structures_[id].emplace_back(day, a.structure);
  }

  for (auto& [id, a] : agents_) {
    emit(id, "day",
         {{"plan", a.plan},
          {"emotion", emotion_json(a.emotion)},
          {"position", a.position},
          {"ledger", ledger_}});
  }

  if (day == config_.days && config_.administer_bfi) administer_final_bfi();
  clock_.tick = window_.ticks();
  clock_.day_open = false;
  log_->sync();
}

void Kernel::administer_final_bfi() {
  for (const auto& [id, a] : agents_) {
    std::vector<std::pair<int, json>> views;
    for (const auto& [d, cs] : day_structures_.at(id)) {
      if (d >= 1) views.emplace_back(d, full_view(cs));
    }
    auto sheets = eval::administer_bfi(id, views, *client_);
    for (const auto& s : sheets) {
      auto scores = eval::score_bfi(s);
      emit(id, "bfi", {{"assessed_day", s.day}, {"answers", s.answers}, {"scores", scores.scores}});
    }
  }
}

// ---- views and persistence ----------------------------------------------------

json Kernel::agent_view(const AgentId& id) const {
  auto it = agents_.find(id);
  if (it == agents_.end()) throw LookupError("unknown agent '" + id + "'");
  const AgentRuntime& a = it->second;
  json dialogs = json::object();
  for (const auto& [p, recs] : a.dialogs) dialogs[p] = recs;
  json insights = json::array();
  for (const auto& r : a.insights) insights.push_back(r);
  const int tick = clock_.day_open ? clock_.tick : 0;
  return {{"id", a.id},
          {"home", a.home},
          {"structure", a.structure},
          {"card", to_context(a.card)},
          {"plan", a.plan},
          {"emotion", a.emotion},
          {"emotion_label", std::string(emotion_label(a.emotion.category))},
          {"memory", a.memory},
          {"dialogs", dialogs},
          {"insights", insights},
          {"position", a.position},
          {"in_conversation", busy(a, tick)}};
}

json Kernel::state_view() const {
  json agents = json::object();
  for (const auto& [id, _] : agents_) {
    json v = agent_view(id);
    v.erase("card");
    v.erase("emotion_label");
    v.erase("in_conversation");
    agents[id] = v;
  }
  return {{"clock", {{"day", clock_.day}, {"tick", clock_.tick}, {"day_open", clock_.day_open}}},
          {"world_csv", world_to_csv(world_)},
          {"staged_world", staged_world_ ? json(*staged_world_) : json(nullptr)},
          {"ledger", ledger_},
          {"agents", agents}};
}

json Kernel::snapshot() const {
  json s = state_view();
  s["clock"]["hhmm"] = format_hhmm(window_.minute_of(std::min(clock_.tick, window_.ticks())));
  s["days"] = config_.days;
  s["ticks_per_day"] = window_.ticks();
  json places = json::array();
  for (const auto& p : world_.places) places.push_back(p);
  s["places"] = places;
  for (const auto& [id, a] : agents_) {
    const Place* p = world_.find(a.position);
    s["agents"][id]["xy"] = p ? json::array({p->x, p->y}) : json(nullptr);
    s["agents"][id]["in_conversation"] = busy(a, clock_.day_open ? clock_.tick : 0);
  }
  return s;
}

json Kernel::save() const {
  json agents = json::object();
  for (const auto& [id, a] : agents_) {
    json v = agent_view(id);
    v["busy_until"] = a.busy_until;
    v["day_events"] = a.day_events;
    agents[id] = v;
  }
  json cache = json::object();
  for (const auto& [k, s] : summary_cache_) cache[k] = s;
  json structures = json::object();
  for (const auto& [id, list] : day_structures_) {
    json arr = json::array();
    for (const auto& [d, cs] : list) arr.push_back({{"day", d}, {"structure", cs}});
    structures[id] = arr;
  }
  return {{"version", 1},
          {"config", config_to_json(config_)},
          {"clock", {{"day", clock_.day}, {"tick", clock_.tick}, {"day_open", clock_.day_open}}},
          {"world_csv", world_to_csv(world_)},
          {"staged_world", staged_world_ ? json(*staged_world_) : json(nullptr)},
          {"ledger", ledger_},
          {"rng", {{"seed", rng_.seed()}, {"cursor", rng_.cursor()}}},
          {"agents", agents},
          {"last_talk", last_talk_},
          {"summary_cache", cache},
          {"day_structures", structures},
          {"next_command", next_command_},
          {"log_path", log_ && log_->path() ? json(log_->path()->string()) : json(nullptr)},
          {"next_seq", log_ ? log_->next_seq() : 0}};
}

std::unique_ptr<Kernel> Kernel::resume(const json& saved, std::shared_ptr<lm::Backend> backend) {
  if (saved.value("version", 0) != 1) throw InputError("unsupported save version");
  RunConfig cfg = config_from_json(saved.at("config"));
  std::unique_ptr<Kernel> k(new Kernel(Resumed{}, cfg, std::move(backend)));
  WorldOptions opts;
  opts.tick_minutes = cfg.tick_minutes;
  opts.move_speed = cfg.move_speed;
  k->world_ = load_world(saved.at("world_csv").get<std::string>(), opts);
  if (saved.at("staged_world").is_string()) k->staged_world_ = saved.at("staged_world").get<std::string>();
  k->ledger_ = saved.at("ledger").get<OccupancyLedger>();
  const auto& clock = saved.at("clock");
  k->clock_ = {clock.at("day").get<int>(), clock.at("tick").get<int>(), clock.at("day_open").get<bool>()};
  k->rng_ = CounterRng(saved.at("rng").at("seed").get<std::uint64_t>(), saved.at("rng").at("cursor").get<std::uint64_t>());
  for (auto it = saved.at("agents").begin(); it != saved.at("agents").end(); ++it) {
    const json& v = it.value();
    AgentRuntime a;
    a.id = it.key();
    a.home = v.at("home").get<std::string>();
    a.structure = v.at("structure").get<CharacterStructure>();
    a.card = make_card(a.id, a.structure, a.home);
    a.plan = v.at("plan").get<DailyPlan>();
    a.emotion = v.at("emotion").get<EmotionState>();
    a.memory = v.at("memory").get<MemoryStore>();
    for (auto d = v.at("dialogs").begin(); d != v.at("dialogs").end(); ++d) {
      a.dialogs[d.key()] = d.value().get<std::vector<DialogRecord>>();
    }
    for (const auto& r : v.at("insights")) a.insights.push_back(r.get<InsightRecord>());
    a.position = v.at("position").get<std::string>();
    a.busy_until = v.at("busy_until").get<std::int64_t>();
    a.day_events = v.at("day_events").get<std::vector<std::string>>();
    k->agents_.emplace(a.id, std::move(a));
  }
  k->last_talk_ = saved.at("last_talk").get<std::map<std::string, std::int64_t>>();
  for (auto it = saved.at("summary_cache").begin(); it != saved.at("summary_cache").end(); ++it) {
    k->summary_cache_[it.key()] = it.value().get<CharacterSummary>();
  }
  for (auto it = saved.at("day_structures").begin(); it != saved.at("day_structures").end(); ++it) {
    for (const auto& e : it.value()) {
      k->day_structures_[it.key()].emplace_back(e.at("day").get<int>(), e.at("structure").get<CharacterStructure>());
    }
  }
  k->next_command_ = saved.at("next_command").get<std::size_t>();
  if (saved.at("log_path").is_string()) {
    k->log_ = std::make_unique<EventLog>(saved.at("log_path").get<std::string>(), true);
    if (k->log_->next_seq() != saved.at("next_seq").get<std::uint64_t>()) {
      throw InputError("log does not match the saved state (sequence mismatch)");
    }
  } else {
    k->log_ = std::make_unique<EventLog>();
  }
  return k;
}

}  // namespace psim
