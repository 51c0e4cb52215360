#pragma once

// IF-THEN production rules over buffer contents.
//
// JSON form (one object per production):
//
//   {"name": "greet", "priority": 60,
//    "if":   [{"buffer": "goal", "type": "dialogue-goal",
//              "slots": {"step": "select", "scene": "=scene"}},
//             {"buffer": "retrieval", "empty": true}],
//    "then": [{"retrieve": {"type": "template", "slots": {"scene": "=scene"}}},
//             {"modify": "goal", "slots": {"step": "render"}},
//             {"set": "vocal", "type": "utterance", "slots": {"text": "=text"}},
//             {"clear": "retrieval"},
//             {"emit": "act", "args": {"function": "=f"}}]}
//
// Strings starting with '=' are variables; {"ref": "id"} is a chunk
// reference; numbers are numbers; any other string is a symbol.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cogdial/kernel/chunk.hpp"

namespace cogdial::kernel {

enum class BufferName { goal, imaginal, retrieval, aural, vocal };

inline constexpr std::array<BufferName, 5> kAllBuffers{BufferName::goal, BufferName::imaginal,
                                                       BufferName::retrieval, BufferName::aural,
                                                       BufferName::vocal};

inline constexpr std::string_view to_string(BufferName b) {
  switch (b) {
    case BufferName::goal: return "goal";
    case BufferName::imaginal: return "imaginal";
    case BufferName::retrieval: return "retrieval";
    case BufferName::aural: return "aural";
    case BufferName::vocal: return "vocal";
  }
  return "?";
}

inline std::optional<BufferName> parse_buffer(std::string_view s) {
  for (BufferName b : kAllBuffers) {
    if (to_string(b) == s) return b;
  }
  return std::nullopt;
}

struct Variable {
  std::string name;
  bool operator==(const Variable&) const = default;
};

using Term = std::variant<Value, Variable>;
using TermSlots = std::map<std::string, Term>;
using Bindings = std::map<std::string, Value>;

struct Condition {
  BufferName buffer = BufferName::goal;
  bool require_empty = false;  // matches only an empty buffer; binds nothing
  std::string chunk_type;
  TermSlots slots;
  bool operator==(const Condition&) const = default;
};

struct SetAction {
  BufferName buffer;
  std::string chunk_type;
  TermSlots slots;
  bool operator==(const SetAction&) const = default;
};
struct ModifyAction {
  BufferName buffer;
  TermSlots slots;
  bool operator==(const ModifyAction&) const = default;
};
struct ClearAction {
  BufferName buffer;
  bool operator==(const ClearAction&) const = default;
};
struct RetrieveAction {
  std::string chunk_type;
  TermSlots slots;
  bool operator==(const RetrieveAction&) const = default;
};
struct EmitAction {
  std::string directive;
  TermSlots args;
  bool operator==(const EmitAction&) const = default;
};

using Action = std::variant<SetAction, ModifyAction, ClearAction, RetrieveAction, EmitAction>;

struct Production {
  std::string name;
  std::vector<Condition> conditions;
  std::vector<Action> actions;
  int priority = 0;
  bool operator==(const Production&) const = default;
};

namespace detail {

inline void collect_variables(const TermSlots& slots, std::set<std::string>& out) {
  for (const auto& [_, term] : slots) {
    if (auto* v = std::get_if<Variable>(&term)) out.insert(v->name);
  }
}

}  // namespace detail

// Load-time checks: variables used in actions are bound by conditions, at
// most one retrieval request, modified buffers are tested by a condition.
inline void validate(const Production& p) {
  if (p.name.empty()) throw ConfigError("production with empty name");
  const std::string where = "production " + p.name + ": ";
  if (p.conditions.empty()) throw ConfigError(where + "no conditions");

  std::set<std::string> bound;
  std::set<BufferName> tested;
  for (const auto& c : p.conditions) {
    if (c.require_empty) {
      if (!c.slots.empty() || !c.chunk_type.empty())
        throw ConfigError(where + "empty-buffer test on " + std::string(to_string(c.buffer)) +
                          " cannot carry a pattern");
      continue;
    }
    if (c.chunk_type.empty()) throw ConfigError(where + "condition without chunk type");
    detail::collect_variables(c.slots, bound);
    tested.insert(c.buffer);
  }

  int retrievals = 0;
  for (const auto& action : p.actions) {
    std::set<std::string> used;
    std::visit(
        [&](const auto& a) {
          using A = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<A, SetAction>) {
            if (a.chunk_type.empty()) throw ConfigError(where + "set action without chunk type");
            detail::collect_variables(a.slots, used);
          } else if constexpr (std::is_same_v<A, ModifyAction>) {
            if (!tested.contains(a.buffer))
              throw ConfigError(where + "modifies buffer " + std::string(to_string(a.buffer)) +
                                " that no condition tests");
            detail::collect_variables(a.slots, used);
          } else if constexpr (std::is_same_v<A, RetrieveAction>) {
            ++retrievals;
            if (a.chunk_type.empty()) throw ConfigError(where + "retrieval without chunk type");
            detail::collect_variables(a.slots, used);
          } else if constexpr (std::is_same_v<A, EmitAction>) {
            if (a.directive.empty()) throw ConfigError(where + "emit without directive name");
            detail::collect_variables(a.args, used);
          }
        },
        action);
    for (const auto& v : used) {
      if (!bound.contains(v)) throw ConfigError(where + "unbound variable =" + v + " in action");
    }
  }
  if (retrievals > 1) throw ConfigError(where + "more than one retrieval request");
}

// Binds `pattern` against `chunk`, extending `bindings`. Returns false on mismatch.
inline bool match_slots(const TermSlots& pattern, const Chunk& chunk, Bindings& bindings) {
  for (const auto& [name, term] : pattern) {
    const Value* actual = chunk.slot(name);
    if (actual == nullptr) return false;
    if (auto* var = std::get_if<Variable>(&term)) {
      auto [it, inserted] = bindings.try_emplace(var->name, *actual);
      if (!inserted && it->second != *actual) return false;
    } else if (std::get<Value>(term) != *actual) {
      return false;
    }
  }
  return true;
}

inline Value resolve(const Term& term, const Bindings& bindings) {
  if (auto* var = std::get_if<Variable>(&term)) return bindings.at(var->name);
  return std::get<Value>(term);
}

inline Slots resolve(const TermSlots& slots, const Bindings& bindings) {
  Slots out;
  for (const auto& [name, term] : slots) out.emplace(name, resolve(term, bindings));
  return out;
}

// ---------------------------------------------------------------------------
// JSON loading

namespace detail {

using nlohmann::json;

inline Term term_from_json(const json& j, const std::string& where) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (!s.empty() && s.front() == '=') {
      if (s.size() == 1) throw ConfigError(where + ": empty variable name");
      return Variable{s.substr(1)};
    }
    return Value{s};
  }
  if (j.is_number()) return Value{j.get<double>()};
  if (j.is_object() && j.contains("ref") && j.at("ref").is_string())
    return Value{ChunkRef{j.at("ref").get<std::string>()}};
  throw ConfigError(where + ": unsupported slot value " + j.dump());
}

inline TermSlots slots_from_json(const json& j, const std::string& where) {
  TermSlots out;
  if (j.is_null()) return out;
  if (!j.is_object()) throw ConfigError(where + ": slots must be an object");
  for (const auto& [k, v] : j.items()) out.emplace(k, term_from_json(v, where + "." + k));
  return out;
}

inline BufferName buffer_from_json(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": buffer name must be a string");
  auto b = parse_buffer(j.get<std::string>());
  if (!b) throw ConfigError(where + ": unknown buffer " + j.get<std::string>());
  return *b;
}

inline json term_to_json(const Term& t) {
  if (auto* v = std::get_if<Variable>(&t)) return "=" + v->name;
  const Value& value = std::get<Value>(t);
  if (auto* s = std::get_if<std::string>(&value)) return *s;
  if (auto* d = std::get_if<double>(&value)) return *d;
  return json{{"ref", std::get<ChunkRef>(value).id}};
}

inline json slots_to_json(const TermSlots& slots) {
  json out = json::object();
  for (const auto& [k, t] : slots) out[k] = term_to_json(t);
  return out;
}

}  // namespace detail

inline Production production_from_json(const nlohmann::json& j) {
  using detail::buffer_from_json;
  using detail::slots_from_json;
  if (!j.is_object()) throw ConfigError("production must be an object");
  Production p;
  p.name = j.value("name", "");
  const std::string where = "production " + (p.name.empty() ? std::string("<unnamed>") : p.name);
  if (auto it = j.find("priority"); it != j.end()) {
    if (!it->is_number_integer()) throw ConfigError(where + ": priority must be an integer");
    p.priority = it->get<int>();
  }
  if (!j.contains("if") || !j.at("if").is_array()) throw ConfigError(where + ": missing 'if' list");
  for (const auto& c : j.at("if")) {
    Condition cond;
    cond.buffer = buffer_from_json(c.at("buffer"), where);
    cond.require_empty = c.value("empty", false);
    cond.chunk_type = c.value("type", "");
    cond.slots = slots_from_json(c.value("slots", nlohmann::json()), where);
    p.conditions.push_back(std::move(cond));
  }
  if (!j.contains("then") || !j.at("then").is_array())
    throw ConfigError(where + ": missing 'then' list");
  for (const auto& a : j.at("then")) {
    if (a.contains("set")) {
      p.actions.push_back(SetAction{buffer_from_json(a.at("set"), where), a.value("type", ""),
                                    slots_from_json(a.value("slots", nlohmann::json()), where)});
    } else if (a.contains("modify")) {
      p.actions.push_back(ModifyAction{buffer_from_json(a.at("modify"), where),
                                       slots_from_json(a.value("slots", nlohmann::json()), where)});
    } else if (a.contains("clear")) {
      p.actions.push_back(ClearAction{buffer_from_json(a.at("clear"), where)});
    } else if (a.contains("retrieve")) {
      const auto& r = a.at("retrieve");
      p.actions.push_back(RetrieveAction{r.value("type", ""),
                                         slots_from_json(r.value("slots", nlohmann::json()), where)});
    } else if (a.contains("emit")) {
      if (!a.at("emit").is_string()) throw ConfigError(where + ": emit needs a directive name");
      p.actions.push_back(EmitAction{a.at("emit").get<std::string>(),
                                     slots_from_json(a.value("args", nlohmann::json()), where)});
    } else {
      throw ConfigError(where + ": unknown action " + a.dump());
    }
  }
  validate(p);
  return p;
}

inline nlohmann::json to_json(const Production& p) {
  using nlohmann::json;
  json conds = json::array();
  for (const auto& c : p.conditions) {
    json jc{{"buffer", to_string(c.buffer)}};
    if (c.require_empty) {
      jc["empty"] = true;
    } else {
      jc["type"] = c.chunk_type;
      jc["slots"] = detail::slots_to_json(c.slots);
    }
    conds.push_back(std::move(jc));
  }
  json acts = json::array();
  for (const auto& action : p.actions) {
    std::visit(
        [&](const auto& a) {
          using A = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<A, SetAction>) {
            acts.push_back({{"set", to_string(a.buffer)}, {"type", a.chunk_type},
                            {"slots", detail::slots_to_json(a.slots)}});
          } else if constexpr (std::is_same_v<A, ModifyAction>) {
            acts.push_back({{"modify", to_string(a.buffer)}, {"slots", detail::slots_to_json(a.slots)}});
          } else if constexpr (std::is_same_v<A, ClearAction>) {
            acts.push_back({{"clear", to_string(a.buffer)}});
          } else if constexpr (std::is_same_v<A, RetrieveAction>) {
            acts.push_back({{"retrieve", {{"type", a.chunk_type}, {"slots", detail::slots_to_json(a.slots)}}}});
          } else {
            acts.push_back({{"emit", a.directive}, {"args", detail::slots_to_json(a.args)}});
          }
        },
        action);
  }
  return json{{"name", p.name}, {"priority", p.priority}, {"if", conds}, {"then", acts}};
}

inline std::vector<Production> productions_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("production set must be an array");
  std::vector<Production> out;
  std::set<std::string> names;
  for (const auto& item : j) {
    Production p = production_from_json(item);
    if (!names.insert(p.name).second) throw ConfigError("duplicate production name " + p.name);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace cogdial::kernel
