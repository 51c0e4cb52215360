#pragma once

// Information State: everything the dialogue manager knows about the
// session, updated after every agent act and user reply.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cogdial/dialogue/vocabulary.hpp"
#include "cogdial/pack/content_pack.hpp"

namespace cogdial::dialogue {

using nlohmann::json;

// A dialogue fault is a programming or configuration error surfaced while
// running the engine (e.g. an act the pack cannot render).
class DialogueFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A protocol error is a caller mistake (e.g. answering the wrong question).
// The state is left untouched when one is raised.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Need {
  NeedKind kind = NeedKind::social_affiliation;
  NeedCategory category = NeedCategory::social;
  double current_value = 1.0;
  double expected_value = 1.0;

  bool unsatisfied() const { return current_value < expected_value; }
  bool operator==(const Need&) const = default;
};

struct TopicState {
  std::string topic;
  Level knowledge = Level::low;
  Level intention = Level::low;
  bool argued = false;
  bool exception_issued = false;
  bool substitution_issued = false;

  // Scene progress bookkeeping.
  bool climax_capable = false;
  bool knowledge_answered = false;
  bool intention_answered = false;
  bool reassessment_answered = false;
  bool informed = false;          // an inform act was emitted
  bool informative_done = false;  // inform, reinforce or acknowledge answered the knowledge probe
  bool climax_closed = false;     // acknowledge closing a climax without substitution

  bool operator==(const TopicState&) const = default;
};

struct DialogueAct {
  CommunicativeFunction function = CommunicativeFunction::inform;
  std::string scene;
  std::optional<std::string> topic;
  std::optional<PersuasiveTechnique> technique;
  std::string utterance;
  std::optional<std::string> question;  // question id for question acts
  std::vector<std::string> options;     // answer option ids, empty unless question
  NeedKind fulfils = NeedKind::social_affiliation;

  bool operator==(const DialogueAct&) const = default;
};

struct UserReply {
  std::string scene;
  std::string question;
  std::string option;
  std::vector<pack::Effect> effects;
  bool operator==(const UserReply&) const = default;
};

using HistoryRecord = std::variant<DialogueAct, UserReply>;

enum class ScenePhase { opening, topic, closing };

struct InformationState {
  std::map<std::string, TopicState> topic_states;
  std::map<NeedKind, Need> needs;
  std::string current_scene;
  std::optional<std::string> previous_scene;
  std::size_t scene_index = 0;
  ScenePhase phase = ScenePhase::opening;
  std::optional<std::string> current_topic;
  EthicalProfile ethical_profile = EthicalProfile::neutral;
  std::optional<std::string> active_role;
  bool greeted = false;
  std::optional<std::string> pending_question;
  std::vector<HistoryRecord> history;

  bool operator==(const InformationState&) const = default;

  TopicState* topic_state() {
    return current_topic ? &topic_states.at(*current_topic) : nullptr;
  }
  const TopicState* topic_state() const {
    return current_topic ? &topic_states.at(*current_topic) : nullptr;
  }

  bool unsatisfied(NeedKind k) const { return needs.at(k).unsatisfied(); }

  std::optional<NeedKind> top_need() const {
    for (NeedKind k : kNeedPriority) {
      if (unsatisfied(k)) return k;
    }
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// JSON views (used for transcripts, wire payloads and state digests)

inline json to_json(const DialogueAct& a) {
  json j{{"function", to_string(a.function)},
         {"scene", a.scene},
         {"topic", a.topic ? json(*a.topic) : json()},
         {"technique", a.technique ? json(to_string(*a.technique)) : json()},
         {"text", a.utterance},
         {"question", a.question ? json(*a.question) : json()},
         {"options", a.options},
         {"fulfils", to_string(a.fulfils)}};
  return j;
}

inline DialogueAct act_from_json(const json& j) {
  DialogueAct a;
  auto fn = parse<CommunicativeFunction>(j.at("function").get<std::string>());
  auto need = parse<NeedKind>(j.at("fulfils").get<std::string>());
  if (!fn || !need) throw std::invalid_argument("bad act record");
  a.function = *fn;
  a.fulfils = *need;
  a.scene = j.at("scene").get<std::string>();
  if (!j.at("topic").is_null()) a.topic = j.at("topic").get<std::string>();
  if (!j.at("technique").is_null()) {
    auto t = parse<PersuasiveTechnique>(j.at("technique").get<std::string>());
    if (!t) throw std::invalid_argument("bad technique");
    a.technique = *t;
  }
  a.utterance = j.at("text").get<std::string>();
  if (!j.at("question").is_null()) a.question = j.at("question").get<std::string>();
  a.options = j.at("options").get<std::vector<std::string>>();
  return a;
}

inline json to_json(const UserReply& r) {
  json effects = json::array();
  for (const auto& e : r.effects)
    effects.push_back({{"topic", e.topic}, {"set", pack::to_string(e.attribute)}, {"level", to_string(e.level)}});
  return json{{"scene", r.scene}, {"question", r.question}, {"option", r.option}, {"effects", effects}};
}

inline json to_json(const TopicState& t) {
  return json{{"topic", t.topic},
              {"knowledge", to_string(t.knowledge)},
              {"intention", to_string(t.intention)},
              {"argued", t.argued},
              {"exception_issued", t.exception_issued},
              {"substitution_issued", t.substitution_issued},
              {"climax_capable", t.climax_capable},
              {"knowledge_answered", t.knowledge_answered},
              {"intention_answered", t.intention_answered},
              {"reassessment_answered", t.reassessment_answered},
              {"informed", t.informed},
              {"informative_done", t.informative_done},
              {"climax_closed", t.climax_closed}};
}

inline json to_json(const InformationState& s) {
  json topics = json::object();
  for (const auto& [id, t] : s.topic_states) topics[id] = to_json(t);
  json needs = json::object();
  for (const auto& [k, n] : s.needs)
    needs[std::string(to_string(k))] = {{"category", to_string(n.category)},
                                        {"current", n.current_value},
                                        {"expected", n.expected_value}};
  json history = json::array();
  for (const auto& h : s.history) {
    if (auto* a = std::get_if<DialogueAct>(&h)) history.push_back({{"agent", to_json(*a)}});
    else history.push_back({{"user", to_json(std::get<UserReply>(h))}});
  }
  return json{{"topics", topics},
              {"needs", needs},
              {"current_scene", s.current_scene},
              {"previous_scene", s.previous_scene ? json(*s.previous_scene) : json()},
              {"scene_index", s.scene_index},
              {"current_topic", s.current_topic ? json(*s.current_topic) : json()},
              {"ethical_profile", to_string(s.ethical_profile)},
              {"active_role", s.active_role ? json(*s.active_role) : json()},
              {"greeted", s.greeted},
              {"pending_question", s.pending_question ? json(*s.pending_question) : json()},
              {"history", history}};
}

// 64-bit FNV-1a over the canonical JSON form, as 16 hex digits.
inline std::string digest(const InformationState& s) {
  const std::string text = to_json(s).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace cogdial::dialogue
