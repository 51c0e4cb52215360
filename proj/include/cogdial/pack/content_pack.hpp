#pragma once

// Content pack: the external, validated domain script consumed by the
// dialogue engine. See docs/pack-format.md for the JSON schema.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cogdial/dialogue/vocabulary.hpp"

namespace cogdial::pack {

using nlohmann::json;

inline constexpr std::string_view kFormatVersion = "1";

enum class Attribute { knowledge, intention };

constexpr std::string_view to_string(Attribute a) {
  return a == Attribute::knowledge ? "knowledge" : "intention";
}

struct Effect {
  std::string topic;
  Attribute attribute = Attribute::knowledge;
  Level level = Level::low;
  bool operator==(const Effect&) const = default;
};

struct AnswerOption {
  std::string id;
  std::string label;
  std::vector<Effect> effects;
  bool operator==(const AnswerOption&) const = default;
};

struct QuestionSpec {
  std::string id;
  QuestionKind kind = QuestionKind::knowledge_probe;
  std::string prompt;
  std::vector<AnswerOption> options;
  bool operator==(const QuestionSpec&) const = default;

  const AnswerOption* option(std::string_view option_id) const {
    for (const auto& o : options) {
      if (o.id == option_id) return &o;
    }
    return nullptr;
  }
};

// The attribute a question of this kind measures.
inline Attribute probed_attribute(QuestionKind k) {
  return k == QuestionKind::knowledge_probe ? Attribute::knowledge : Attribute::intention;
}

// First option whose effect on the probed attribute is `level`, or nullptr.
inline const AnswerOption* option_for_level(const QuestionSpec& q, Level level) {
  const Attribute probed = probed_attribute(q.kind);
  for (const auto& o : q.options) {
    for (const auto& e : o.effects) {
      if (e.attribute == probed && e.level == level) return &o;
    }
  }
  return nullptr;
}

struct TemplateSpec {
  CommunicativeFunction function = CommunicativeFunction::inform;
  std::optional<PersuasiveTechnique> technique;
  std::string text;
  std::string provenance;  // "quoted" for verbatim source sentences, "adapted" otherwise
  bool operator==(const TemplateSpec&) const = default;
};

struct ExceptionSpec {
  std::string condition;    // e.g. mask-allergy
  std::string role;         // narrative role assigned to the user
  std::string role_prompt;  // short description of the role
  bool operator==(const ExceptionSpec&) const = default;
};

struct SceneSpec {
  std::string id;
  std::string title;
  std::optional<std::string> topic;
  bool climax_capable = false;
  std::vector<QuestionSpec> questions;
  std::vector<TemplateSpec> templates;
  std::optional<ExceptionSpec> exception;
  bool operator==(const SceneSpec&) const = default;

  const TemplateSpec* find_template(CommunicativeFunction f,
                                    std::optional<PersuasiveTechnique> t = std::nullopt) const {
    for (const auto& tpl : templates) {
      if (tpl.function == f && tpl.technique == t) return &tpl;
    }
    return nullptr;
  }

  const QuestionSpec* question_of_kind(QuestionKind k) const {
    for (const auto& q : questions) {
      if (q.kind == k) return &q;
    }
    return nullptr;
  }
};

struct Association {
  std::string source;
  std::string target;
  double strength = 0.0;
  bool operator==(const Association&) const = default;
};

// Forwarded to the kernel's ActivationParams.
struct KernelSpec {
  double source_weight_total = 1.0;
  double noise_scale = 0.0;
  std::optional<double> retrieval_threshold;  // none = -infinity
  std::vector<Association> associations;
  bool operator==(const KernelSpec&) const = default;
};

struct PackInfo {
  std::string id;
  std::string version;
  std::string title;
  std::string language = "en";
  std::string notes;
  bool operator==(const PackInfo&) const = default;
};

struct ContentPack {
  PackInfo info;
  std::vector<PersuasiveTechnique> techniques{kAllTechniques.begin(), kAllTechniques.end()};
  KernelSpec kernel;
  std::vector<SceneSpec> scenes;
  bool operator==(const ContentPack&) const = default;

  const SceneSpec* scene(std::string_view id) const {
    for (const auto& s : scenes) {
      if (s.id == id) return &s;
    }
    return nullptr;
  }

  std::optional<std::size_t> scene_index(std::string_view id) const {
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      if (scenes[i].id == id) return i;
    }
    return std::nullopt;
  }

  struct QuestionRef {
    const SceneSpec* scene;
    const QuestionSpec* question;
  };

  std::optional<QuestionRef> question(std::string_view id) const {
    for (const auto& s : scenes) {
      for (const auto& q : s.questions) {
        if (q.id == id) return QuestionRef{&s, &q};
      }
    }
    return std::nullopt;
  }

  std::vector<std::string> topics() const {
    std::vector<std::string> out;
    for (const auto& s : scenes) {
      if (s.topic) out.push_back(*s.topic);
    }
    return out;
  }

  const std::string& introduction() const { return scenes.front().id; }
  const std::string& conclusion() const { return scenes.back().id; }
};

// ---------------------------------------------------------------------------
// Errors

struct Diagnostic {
  std::string path;
  std::string message;
  std::string str() const { return path.empty() ? message : path + ": " + message; }
  bool operator==(const Diagnostic&) const = default;
};

class PackError : public std::runtime_error {
 public:
  enum class Kind { parse, validation };

  PackError(Kind kind, std::vector<Diagnostic> diagnostics)
      : std::runtime_error(join(kind, diagnostics)), kind_(kind), diagnostics_(std::move(diagnostics)) {}

  Kind kind() const { return kind_; }
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  static std::string join(Kind kind, const std::vector<Diagnostic>& ds) {
    std::string out = kind == Kind::parse ? "parse error" : "invalid pack";
    for (const auto& d : ds) out += "\n  " + d.str();
    return out;
  }

  Kind kind_;
  std::vector<Diagnostic> diagnostics_;
};

class MissingTemplate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Kernel chunk naming. Association tables in a pack refer to these ids.

inline std::string scene_chunk_id(std::string_view scene) { return "scene:" + std::string(scene); }

inline std::string template_chunk_id(std::string_view scene, CommunicativeFunction f,
                                     std::optional<PersuasiveTechnique> t = std::nullopt) {
  std::string id = "tpl:" + std::string(scene) + ":" + std::string(to_string(f));
  if (t) id += ":" + std::string(to_string(*t));
  return id;
}

inline std::string question_chunk_id(std::string_view scene, std::string_view question) {
  return "tpl:" + std::string(scene) + ":question:" + std::string(question);
}

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline std::string scene_path(const SceneSpec& s) { return "scene " + s.id; }

inline std::string template_label(CommunicativeFunction f, std::optional<PersuasiveTechnique> t) {
  std::string out(to_string(f));
  if (t) out += ":" + std::string(to_string(*t));
  return out;
}

// Option ids are unique across the pack so that a choice names exactly one
// question; `owners` maps every option id seen so far to its question.
inline void validate_question(const SceneSpec& scene, const QuestionSpec& q,
                              std::map<std::string, std::string>& owners, std::vector<Diagnostic>& out) {
  const std::string path = scene_path(scene) + "/question " + q.id;
  if (q.prompt.empty()) out.push_back({path, "empty prompt"});
  if (q.options.size() < 2) out.push_back({path, "needs at least 2 options"});
  const Attribute probed = probed_attribute(q.kind);
  std::set<std::string> ids;
  for (const auto& o : q.options) {
    const std::string opath = path + "/option " + o.id;
    if (o.id.empty()) out.push_back({path, "option with empty id"});
    if (!ids.insert(o.id).second) {
      out.push_back({opath, "duplicate option id"});
    } else if (auto [it, fresh] = owners.emplace(o.id, q.id); !fresh) {
      out.push_back({opath, "option id already used by question " + it->second});
    }
    if (o.label.empty()) out.push_back({opath, "empty label"});
    if (o.effects.empty()) out.push_back({opath, "option has no effects"});
    bool sets_probed = false;
    std::set<Attribute> assigned;
    for (const auto& e : o.effects) {
      if (!scene.topic || e.topic != *scene.topic) {
        out.push_back({opath, "dangling effect on topic '" + e.topic + "' (scene topic is '" +
                                  scene.topic.value_or("none") + "')"});
      }
      if (!assigned.insert(e.attribute).second)
        out.push_back({opath, "assigns " + std::string(to_string(e.attribute)) + " twice"});
      if (e.attribute == probed) sets_probed = true;
    }
    if (!o.effects.empty() && !sets_probed)
      out.push_back({opath, std::string(to_string(q.kind)) + " option must set " + std::string(to_string(probed))});
  }
}

}  // namespace detail

// Returns every problem found; an empty result means the pack is valid.
inline std::vector<Diagnostic> validate(const ContentPack& pack) {
  using detail::scene_path;
  std::vector<Diagnostic> out;

  if (pack.info.id.empty()) out.push_back({"pack", "missing id"});
  if (pack.info.version.empty()) out.push_back({"pack", "missing version"});

  if (pack.techniques.empty()) out.push_back({"techniques", "at least one technique must be enabled"});
  {
    std::set<PersuasiveTechnique> seen;
    for (auto t : pack.techniques) {
      if (!seen.insert(t).second)
        out.push_back({"techniques", "duplicate technique " + std::string(to_string(t))});
    }
  }

  if (pack.scenes.size() < 2) {
    out.push_back({"scenes", "a pack needs at least an introduction and a conclusion scene"});
    return out;
  }

  std::set<std::string> scene_ids, topics, question_ids;
  std::map<std::string, std::string> option_owners;
  for (std::size_t i = 0; i < pack.scenes.size(); ++i) {
    const SceneSpec& s = pack.scenes[i];
    const bool first = i == 0;
    const bool last = i + 1 == pack.scenes.size();
    const std::string path = s.id.empty() ? "scenes[" + std::to_string(i) + "]" : scene_path(s);

    if (s.id.empty()) out.push_back({path, "scene with empty id"});
    else if (!scene_ids.insert(s.id).second) out.push_back({path, "duplicate scene id"});

    if (first || last) {
      const char* role = first ? "introduction" : "conclusion";
      if (s.topic) out.push_back({path, std::string(role) + " scene must not have a topic"});
      if (!s.questions.empty()) out.push_back({path, std::string(role) + " scene must not ask questions"});
      if (s.climax_capable) out.push_back({path, std::string(role) + " scene cannot be climax-capable"});
      auto needed = first ? CommunicativeFunction::greeting_self_introduction : CommunicativeFunction::goodbye;
      if (!s.find_template(needed))
        out.push_back({path, "missing " + std::string(to_string(needed)) + " template"});
    } else if (!s.topic || s.topic->empty()) {
      out.push_back({path, "topic scene without a topic"});
    } else if (!topics.insert(*s.topic).second) {
      out.push_back({path, "duplicate topic " + *s.topic});
    }

    // Templates: well-formed, unique, and covering every act the policy can request.
    std::set<std::pair<CommunicativeFunction, std::optional<PersuasiveTechnique>>> keys;
    for (const auto& t : s.templates) {
      const std::string tpath = path + "/template " + detail::template_label(t.function, t.technique);
      if (!keys.insert({t.function, t.technique}).second) out.push_back({tpath, "duplicate template"});
      if (t.text.empty()) out.push_back({tpath, "empty text"});
      if (t.function == CommunicativeFunction::question)
        out.push_back({tpath, "question prompts belong in the questions list"});
      if (t.function == CommunicativeFunction::argument && !t.technique)
        out.push_back({tpath, "argument template needs a technique"});
      if (t.function != CommunicativeFunction::argument && t.technique)
        out.push_back({tpath, "only argument templates carry a technique"});
    }

    if (s.climax_capable && !s.exception) out.push_back({path, "climax-capable scene without an exception"});
    if (s.exception) {
      if (!s.climax_capable) out.push_back({path, "exception declared on a scene that is not climax-capable"});
      if (s.exception->condition.empty()) out.push_back({path + "/exception", "empty condition id"});
      if (s.exception->role.empty()) out.push_back({path + "/exception", "empty role"});
      if (s.exception->role_prompt.empty()) out.push_back({path + "/exception", "empty role prompt"});
    }

    if (s.topic && !first && !last) {
      for (auto f : {CommunicativeFunction::inform, CommunicativeFunction::reinforce,
                     CommunicativeFunction::acknowledge}) {
        if (!s.find_template(f)) out.push_back({path, "missing " + std::string(to_string(f)) + " template"});
      }
      for (auto t : pack.techniques) {
        if (!s.find_template(CommunicativeFunction::argument, t))
          out.push_back({path, "missing argument template for " + std::string(to_string(t))});
      }
      if (s.exception) {
        if (!s.find_template(CommunicativeFunction::exception)) out.push_back({path, "missing exception template"});
        if (!s.find_template(CommunicativeFunction::substitution))
          out.push_back({path, "missing substitution template"});
      }

      std::map<QuestionKind, int> kinds;
      for (const auto& q : s.questions) ++kinds[q.kind];
      for (auto k : {QuestionKind::knowledge_probe, QuestionKind::intention_probe}) {
        if (kinds[k] != 1)
          out.push_back({path, "needs exactly one " + std::string(to_string(k)) + " question"});
      }
      const int expected_reassess = s.exception ? 1 : 0;
      if (kinds[QuestionKind::role_reassessment] != expected_reassess) {
        out.push_back({path, s.exception ? "needs exactly one role_reassessment question"
                                         : "role_reassessment question without an exception"});
      }
    }

    for (const auto& q : s.questions) {
      if (q.id.empty()) out.push_back({path, "question with empty id"});
      else if (!question_ids.insert(q.id).second)
        out.push_back({path + "/question " + q.id, "duplicate question id"});
      detail::validate_question(s, q, option_owners, out);
    }
  }

  // Kernel parameters and association table.
  const KernelSpec& k = pack.kernel;
  if (!std::isfinite(k.source_weight_total) || k.source_weight_total < 0)
    out.push_back({"kernel", "source_weight_total must be finite and >= 0"});
  if (!std::isfinite(k.noise_scale) || k.noise_scale < 0)
    out.push_back({"kernel", "noise_scale must be finite and >= 0"});
  if (k.retrieval_threshold && std::isnan(*k.retrieval_threshold))
    out.push_back({"kernel", "retrieval_threshold is NaN"});

  std::set<std::string> chunk_ids;
  for (const auto& s : pack.scenes) {
    chunk_ids.insert(scene_chunk_id(s.id));
    for (const auto& t : s.templates) chunk_ids.insert(template_chunk_id(s.id, t.function, t.technique));
    for (const auto& q : s.questions) chunk_ids.insert(question_chunk_id(s.id, q.id));
  }
  std::set<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < k.associations.size(); ++i) {
    const auto& a = k.associations[i];
    const std::string apath = "kernel/associations[" + std::to_string(i) + "]";
    if (!chunk_ids.contains(a.source)) out.push_back({apath, "unknown source chunk " + a.source});
    if (!chunk_ids.contains(a.target)) out.push_back({apath, "unknown target chunk " + a.target});
    if (!std::isfinite(a.strength)) out.push_back({apath, "strength is not finite"});
    if (!pairs.insert({a.source, a.target}).second) out.push_back({apath, "duplicate association"});
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON (de)serialization

namespace detail {

class Reader {
 public:
  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw PackError(PackError::Kind::validation, {{path, msg}});
  }

  static const json& field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, std::string("missing field '") + key + "'");
    return *it;
  }

  static std::string string(const json& obj, const char* key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_string()) fail(path, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
  }

  static std::string string_or(const json& obj, const char* key, const std::string& path,
                               std::string fallback = {}) {
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    return string(obj, key, path);
  }

  static double number_or(const json& obj, const char* key, const std::string& path, double fallback) {
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(path, std::string("field '") + key + "' must be a number");
    return v.get<double>();
  }

  static const json& array(const json& obj, const char* key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_array()) fail(path, std::string("field '") + key + "' must be an array");
    return v;
  }

  template <typename E>
  static E enumeration(const std::string& text, const std::string& path, const char* what) {
    auto v = cogdial::parse<E>(text);
    if (!v) fail(path, std::string("unknown ") + what + " '" + text + "'");
    return *v;
  }
};

inline AnswerOption option_from_json(const json& j, const std::string& qpath, std::size_t idx) {
  AnswerOption o;
  std::string path = qpath + "/options[" + std::to_string(idx) + "]";
  o.id = Reader::string(j, "id", path);
  path = qpath + "/option " + o.id;
  o.label = Reader::string(j, "label", path);
  const json& effects = Reader::array(j, "effects", path);
  for (const auto& e : effects) {
    Effect eff;
    eff.topic = Reader::string(e, "topic", path);
    std::string set = Reader::string(e, "set", path);
    if (set == "knowledge") eff.attribute = Attribute::knowledge;
    else if (set == "intention") eff.attribute = Attribute::intention;
    else Reader::fail(path, "effect sets unknown attribute '" + set + "'");
    eff.level = Reader::enumeration<Level>(Reader::string(e, "level", path), path, "level");
    o.effects.push_back(std::move(eff));
  }
  return o;
}

inline SceneSpec scene_from_json(const json& j, std::size_t idx) {
  SceneSpec s;
  std::string path = "scenes[" + std::to_string(idx) + "]";
  s.id = Reader::string(j, "id", path);
  path = "scene " + s.id;
  s.title = Reader::string_or(j, "title", path);
  if (j.contains("topic") && !j.at("topic").is_null()) s.topic = Reader::string(j, "topic", path);
  if (j.contains("climax_capable")) {
    if (!j.at("climax_capable").is_boolean()) Reader::fail(path, "field 'climax_capable' must be a boolean");
    s.climax_capable = j.at("climax_capable").get<bool>();
  }
  if (j.contains("questions")) {
    const json& qs = Reader::array(j, "questions", path);
    for (std::size_t qi = 0; qi < qs.size(); ++qi) {
      QuestionSpec q;
      std::string qpath = path + "/questions[" + std::to_string(qi) + "]";
      q.id = Reader::string(qs[qi], "id", qpath);
      qpath = path + "/question " + q.id;
      q.kind = Reader::enumeration<QuestionKind>(Reader::string(qs[qi], "kind", qpath), qpath, "question kind");
      q.prompt = Reader::string(qs[qi], "prompt", qpath);
      const json& opts = Reader::array(qs[qi], "options", qpath);
      for (std::size_t oi = 0; oi < opts.size(); ++oi) q.options.push_back(option_from_json(opts[oi], qpath, oi));
      s.questions.push_back(std::move(q));
    }
  }
  const json& tpls = Reader::array(j, "templates", path);
  for (std::size_t ti = 0; ti < tpls.size(); ++ti) {
    TemplateSpec t;
    const std::string tpath = path + "/templates[" + std::to_string(ti) + "]";
    t.function = Reader::enumeration<CommunicativeFunction>(Reader::string(tpls[ti], "function", tpath), tpath,
                                                            "communicative function");
    if (tpls[ti].contains("technique") && !tpls[ti].at("technique").is_null())
      t.technique = Reader::enumeration<PersuasiveTechnique>(Reader::string(tpls[ti], "technique", tpath), tpath,
                                                             "technique");
    t.text = Reader::string(tpls[ti], "text", tpath);
    t.provenance = Reader::string_or(tpls[ti], "provenance", tpath);
    s.templates.push_back(std::move(t));
  }
  if (j.contains("exception") && !j.at("exception").is_null()) {
    const json& e = j.at("exception");
    const std::string epath = path + "/exception";
    s.exception = ExceptionSpec{Reader::string(e, "condition", epath), Reader::string(e, "role", epath),
                                Reader::string(e, "role_prompt", epath)};
  }
  return s;
}

}  // namespace detail

// Structural decoding only; call validate() (or load_pack) for semantics.
inline ContentPack from_json(const json& doc) {
  using detail::Reader;
  if (!doc.is_object()) Reader::fail("", "pack document must be a JSON object");
  ContentPack p;
  const json& info = Reader::field(doc, "pack", "pack");
  p.info.id = Reader::string(info, "id", "pack");
  p.info.version = Reader::string(info, "version", "pack");
  p.info.title = Reader::string_or(info, "title", "pack");
  p.info.language = Reader::string_or(info, "language", "pack", "en");
  p.info.notes = Reader::string_or(info, "notes", "pack");

  if (doc.contains("techniques")) {
    p.techniques.clear();
    for (const auto& t : Reader::array(doc, "techniques", "techniques")) {
      if (!t.is_string()) Reader::fail("techniques", "technique names must be strings");
      p.techniques.push_back(Reader::enumeration<PersuasiveTechnique>(t.get<std::string>(), "techniques", "technique"));
    }
  }

  if (doc.contains("kernel")) {
    const json& k = doc.at("kernel");
    if (!k.is_object()) Reader::fail("kernel", "expected an object");
    p.kernel.source_weight_total = Reader::number_or(k, "source_weight_total", "kernel", 1.0);
    p.kernel.noise_scale = Reader::number_or(k, "noise_scale", "kernel", 0.0);
    if (k.contains("retrieval_threshold") && !k.at("retrieval_threshold").is_null())
      p.kernel.retrieval_threshold = Reader::number_or(k, "retrieval_threshold", "kernel", 0.0);
    if (k.contains("associations")) {
      const json& as = Reader::array(k, "associations", "kernel");
      for (std::size_t i = 0; i < as.size(); ++i) {
        const std::string apath = "kernel/associations[" + std::to_string(i) + "]";
        p.kernel.associations.push_back({Reader::string(as[i], "source", apath), Reader::string(as[i], "target", apath),
                                         Reader::number_or(as[i], "strength", apath, 0.0)});
      }
    }
  }

  const json& scenes = Reader::array(doc, "scenes", "scenes");
  for (std::size_t i = 0; i < scenes.size(); ++i) p.scenes.push_back(detail::scene_from_json(scenes[i], i));
  return p;
}

inline json to_json(const ContentPack& p) {
  json info{{"id", p.info.id}, {"version", p.info.version}, {"title", p.info.title},
            {"language", p.info.language}, {"notes", p.info.notes}, {"format", kFormatVersion}};
  json techniques = json::array();
  for (auto t : p.techniques) techniques.push_back(to_string(t));
  json assoc = json::array();
  for (const auto& a : p.kernel.associations)
    assoc.push_back({{"source", a.source}, {"target", a.target}, {"strength", a.strength}});
  json kernel{{"source_weight_total", p.kernel.source_weight_total},
              {"noise_scale", p.kernel.noise_scale},
              {"retrieval_threshold", p.kernel.retrieval_threshold ? json(*p.kernel.retrieval_threshold) : json()},
              {"associations", assoc}};
  json scenes = json::array();
  for (const auto& s : p.scenes) {
    json js{{"id", s.id}, {"title", s.title}, {"topic", s.topic ? json(*s.topic) : json()},
            {"climax_capable", s.climax_capable}};
    json qs = json::array();
    for (const auto& q : s.questions) {
      json opts = json::array();
      for (const auto& o : q.options) {
        json effects = json::array();
        for (const auto& e : o.effects)
          effects.push_back({{"topic", e.topic}, {"set", to_string(e.attribute)}, {"level", to_string(e.level)}});
        opts.push_back({{"id", o.id}, {"label", o.label}, {"effects", effects}});
      }
      qs.push_back({{"id", q.id}, {"kind", to_string(q.kind)}, {"prompt", q.prompt}, {"options", opts}});
    }
    js["questions"] = qs;
    json tpls = json::array();
    for (const auto& t : s.templates) {
      json jt{{"function", to_string(t.function)}};
      if (t.technique) jt["technique"] = to_string(*t.technique);
      jt["text"] = t.text;
      if (!t.provenance.empty()) jt["provenance"] = t.provenance;
      tpls.push_back(std::move(jt));
    }
    js["templates"] = tpls;
    if (s.exception)
      js["exception"] = {{"condition", s.exception->condition}, {"role", s.exception->role},
                         {"role_prompt", s.exception->role_prompt}};
    scenes.push_back(std::move(js));
  }
  return json{{"pack", info}, {"techniques", techniques}, {"kernel", kernel}, {"scenes", scenes}};
}

inline std::string serialize(const ContentPack& p) { return to_json(p).dump(2) + "\n"; }

// Parses and fully validates a pack document.
inline ContentPack load_pack(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw PackError(PackError::Kind::parse, {{"", e.what()}});
  }
  ContentPack p;
  try {
    p = from_json(doc);
  } catch (const json::exception& e) {
    throw PackError(PackError::Kind::validation, {{"", e.what()}});
  }
  if (auto diagnostics = validate(p); !diagnostics.empty())
    throw PackError(PackError::Kind::validation, std::move(diagnostics));
  return p;
}

inline ContentPack load_pack_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PackError(PackError::Kind::parse, {{path, "cannot open file"}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_pack(ss.str());
}

// Template text verbatim; no interpolation.
inline const std::string& render(const ContentPack& pack, CommunicativeFunction function, std::string_view scene,
                                 std::optional<PersuasiveTechnique> technique = std::nullopt) {
  const SceneSpec* s = pack.scene(scene);
  if (s == nullptr) throw MissingTemplate("unknown scene " + std::string(scene));
  if (const TemplateSpec* t = s->find_template(function, technique)) return t->text;
  throw MissingTemplate("scene " + s->id + ": no " + detail::template_label(function, technique) + " template");
}

}  // namespace cogdial::pack
