#pragma once

// Scripted users. A profile maps (question kind, topic) to an answer rule:
// either a fixed option id or a weighted distribution over the level the
// answer should set. Topic "*" is the fallback for a kind.
//
//   {"id": "skeptic",
//    "answers": [{"kind": "knowledge_probe", "topic": "*", "levels": {"low": 1}},
//                {"kind": "intention_probe", "topic": "mask", "option": "mask-intention:low"}],
//    "post_exception_intention": {"levels": {"low": 1}}}
//
// A profile mix weights several profiles and fixes the agent's ethics:
//
//   {"ethics": "random", "profiles": [{"weight": 3, "profile": {...}}, ...]}
//
// A bare profile document is read as a mix of one.

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cogdial/kernel/rng.hpp"
#include "cogdial/pack/content_pack.hpp"

namespace cogdial::sim {

using nlohmann::json;

class HarnessFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AnswerRule {
  std::optional<std::string> option;
  std::vector<std::pair<Level, double>> levels;  // used when option is absent
  bool operator==(const AnswerRule&) const = default;
};

struct UserProfile {
  std::string id;
  std::map<std::pair<QuestionKind, std::string>, AnswerRule> answers;
  std::optional<AnswerRule> post_exception_intention;  // overrides role_reassessment rules
  bool operator==(const UserProfile&) const = default;

  const AnswerRule* rule_for(QuestionKind kind, const std::string& topic) const {
    if (kind == QuestionKind::role_reassessment && post_exception_intention) return &*post_exception_intention;
    if (auto it = answers.find({kind, topic}); it != answers.end()) return &it->second;
    if (auto it = answers.find({kind, "*"}); it != answers.end()) return &it->second;
    return nullptr;
  }
};

struct ProfileMix {
  ProfileChoice ethics = ProfileChoice::random;
  std::vector<std::pair<double, UserProfile>> profiles;
};

inline AnswerRule rule_from_json(const json& j, const std::string& where) {
  AnswerRule r;
  if (j.contains("option")) {
    r.option = j.at("option").get<std::string>();
    return r;
  }
  if (!j.contains("levels") || !j["levels"].is_object() || j["levels"].empty())
    throw HarnessFault(where + ": rule needs 'option' or a non-empty 'levels' map");
  double total = 0;
  for (const auto& [name, w] : j["levels"].items()) {
    auto level = parse<Level>(name);
    if (!level) throw HarnessFault(where + ": unknown level '" + name + "'");
    const double weight = w.get<double>();
    if (!(weight >= 0)) throw HarnessFault(where + ": negative weight for " + name);
    total += weight;
    r.levels.emplace_back(*level, weight);
  }
  if (total <= 0) throw HarnessFault(where + ": level weights sum to zero");
  return r;
}

inline json to_json(const AnswerRule& r) {
  if (r.option) return json{{"option", *r.option}};
  json levels = json::object();
  for (const auto& [l, w] : r.levels) levels[std::string(to_string(l))] = w;
  return json{{"levels", levels}};
}

inline UserProfile profile_from_json(const json& j) {
  UserProfile p;
  p.id = j.at("id").get<std::string>();
  for (const auto& a : j.at("answers")) {
    const std::string where = "profile " + p.id;
    auto kind = parse<QuestionKind>(a.at("kind").get<std::string>());
    if (!kind) throw HarnessFault(where + ": unknown question kind '" + a.at("kind").get<std::string>() + "'");
    const std::string topic = a.value("topic", "*");
    if (!p.answers.emplace(std::pair{*kind, topic}, rule_from_json(a, where)).second)
      throw HarnessFault(where + ": two rules for " + std::string(to_string(*kind)) + "/" + topic);
  }
  if (j.contains("post_exception_intention"))
    p.post_exception_intention = rule_from_json(j["post_exception_intention"], "profile " + p.id);
  return p;
}

inline json to_json(const UserProfile& p) {
  json answers = json::array();
  for (const auto& [key, rule] : p.answers) {
    json a = to_json(rule);
    a["kind"] = to_string(key.first);
    a["topic"] = key.second;
    answers.push_back(a);
  }
  json j{{"id", p.id}, {"answers", answers}};
  if (p.post_exception_intention) j["post_exception_intention"] = to_json(*p.post_exception_intention);
  return j;
}

inline ProfileMix mix_from_json(const json& j) {
  ProfileMix mix;
  if (j.contains("ethics")) {
    auto e = parse<ProfileChoice>(j["ethics"].get<std::string>());
    if (!e) throw HarnessFault("unknown ethics '" + j["ethics"].get<std::string>() + "'");
    mix.ethics = *e;
  }
  if (!j.contains("profiles")) {
    mix.profiles.emplace_back(1.0, profile_from_json(j));
    return mix;
  }
  for (const auto& entry : j.at("profiles")) {
    const double w = entry.value("weight", 1.0);
    if (!(w > 0)) throw HarnessFault("profile weights must be positive");
    mix.profiles.emplace_back(w, profile_from_json(entry.at("profile")));
  }
  if (mix.profiles.empty()) throw HarnessFault("profile mix is empty");
  return mix;
}

inline ProfileMix load_mix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw HarnessFault("cannot open profile file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return mix_from_json(json::parse(ss.str()));
  } catch (const json::exception& e) {
    throw HarnessFault(path + ": " + e.what());
  }
}

// Questions of `pack` the profile has no rule for.
inline std::vector<std::string> missing_rules(const UserProfile& p, const pack::ContentPack& pack) {
  std::vector<std::string> out;
  for (const auto& scene : pack.scenes) {
    for (const auto& q : scene.questions) {
      if (!p.rule_for(q.kind, scene.topic.value_or(""))) out.push_back(q.id);
    }
  }
  return out;
}

template <class T>
const T& weighted_pick(const std::vector<std::pair<double, T>>& items, kernel::Rng& rng) {
  double total = 0;
  for (const auto& [w, _] : items) total += w;
  double x = rng.uniform01() * total;
  for (const auto& [w, item] : items) {
    if (x < w) return item;
    x -= w;
  }
  return items.back().second;
}

// The option this profile picks for `q` in a scene about `topic`.
inline std::string choose_option(const UserProfile& p, const pack::QuestionSpec& q, const std::string& topic,
                                 kernel::Rng& rng) {
  const AnswerRule* rule = p.rule_for(q.kind, topic);
  if (rule == nullptr)
    throw HarnessFault("profile " + p.id + " has no rule for question " + q.id + " (" +
                       std::string(to_string(q.kind)) + ", topic " + topic + ")");
  if (rule->option) {
    if (!q.option(*rule->option))
      throw HarnessFault("profile " + p.id + ": option " + *rule->option + " does not belong to question " + q.id);
    return *rule->option;
  }
  std::vector<std::pair<double, Level>> weighted;
  for (const auto& [l, w] : rule->levels) weighted.emplace_back(w, l);
  const Level level = weighted_pick(weighted, rng);
  const pack::AnswerOption* o = pack::option_for_level(q, level);
  if (o == nullptr)
    throw HarnessFault("question " + q.id + " has no option setting " + std::string(to_string(level)));
  return o->id;
}

}  // namespace cogdial::sim
