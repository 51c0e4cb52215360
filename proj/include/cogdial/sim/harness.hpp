#pragma once

// Simulated sessions, the transcript invariant checker and batch runs.

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cogdial/session/conversation.hpp"
#include "cogdial/sim/profile.hpp"

namespace cogdial::sim {

using session::Direction;
using session::Transcript;

// Drives one session end to end. The user's answers come from their own
// stream (derived from `seed`) so they never perturb the agent's draws.
inline Transcript simulate_session(std::shared_ptr<const pack::ContentPack> pack, const UserProfile& profile,
                                   std::uint64_t seed, ProfileChoice ethics,
                                   const std::vector<kernel::Production>* policy = nullptr) {
  session::Conversation c = policy ? session::Conversation(pack, ethics, seed, *policy)
                                   : session::Conversation(pack, ethics, seed);
  kernel::Rng user(kernel::derive_seed(seed, "user"));
  c.start();
  while (!c.complete()) {
    const pack::QuestionSpec* q = c.pending_question();
    if (q == nullptr) throw HarnessFault("engine stopped without a question");
    const std::string topic = pack->question(q->id)->scene->topic.value_or("");
    c.choose(choose_option(profile, *q, topic, user));
  }
  return c.transcript();
}

struct Violation {
  std::uint64_t seq = 0;
  std::string rule;
  std::string detail;
  std::string str() const { return "#" + std::to_string(seq) + " " + rule + ": " + detail; }
};

struct TopicLevels {
  Level knowledge = Level::low;
  Level intention = Level::low;
};

// Topic levels after replaying every user answer's effects from the pack.
inline std::map<std::string, TopicLevels> final_levels(const pack::ContentPack& pack, const Transcript& t) {
  std::map<std::string, TopicLevels> levels;
  for (const auto& topic : pack.topics()) levels[topic] = {};
  for (const auto& e : t.entries) {
    if (e.direction != Direction::user) continue;
    auto ref = pack.question(e.question);
    if (!ref) continue;
    const pack::AnswerOption* o = ref->question->option(e.option);
    if (!o) continue;
    for (const auto& eff : o->effects)
      (eff.attribute == pack::Attribute::knowledge ? levels[eff.topic].knowledge : levels[eff.topic].intention) =
          eff.level;
  }
  return levels;
}

// Checks a transcript against the dialogue invariants. Works only from the
// transcript and the pack, never from engine state.
inline std::vector<Violation> check_transcript(const pack::ContentPack& pack, const Transcript& t) {
  using F = CommunicativeFunction;
  std::vector<Violation> out;
  auto flag = [&](std::uint64_t seq, std::string rule, std::string detail) {
    out.push_back({seq, std::move(rule), std::move(detail)});
  };

  struct Topic {
    TopicLevels level;
    bool knowledge_answered = false;
    bool intention_answered = false;
    int arguments = 0;
    int substitutions = 0;
    bool informed_or_argued = false;
    std::optional<std::uint64_t> exception_at;
    std::optional<Level> post_exception_intention;
  };
  std::map<std::string, Topic> topics;
  for (const auto& topic : pack.topics()) topics[topic] = {};

  // Obligations: an answer that requires a later act on the same topic.
  struct Owed {
    std::uint64_t seq;
    std::string topic;
    F function;
    std::string why;
  };
  std::vector<Owed> owed;
  std::vector<std::pair<std::uint64_t, const dialogue::DialogueAct*>> acts;

  std::size_t goodbyes = 0;
  for (std::size_t i = 0; i < t.entries.size(); ++i) {
    const auto& e = t.entries[i];
    if (e.seq != i) flag(e.seq, "contiguous-seq", "expected " + std::to_string(i));

    if (e.direction == Direction::user) {
      auto ref = pack.question(e.question);
      const pack::AnswerOption* o = ref ? ref->question->option(e.option) : nullptr;
      if (!o) {
        flag(e.seq, "known-answer", e.question + "/" + e.option + " not in pack");
        continue;
      }
      const std::string topic = ref->scene->topic.value_or("");
      for (const auto& eff : o->effects) {
        auto& lv = topics[eff.topic].level;
        (eff.attribute == pack::Attribute::knowledge ? lv.knowledge : lv.intention) = eff.level;
      }
      Topic& tp = topics[topic];
      switch (ref->question->kind) {
        case QuestionKind::knowledge_probe:
          tp.knowledge_answered = true;
          if (tp.level.knowledge == Level::low) owed.push_back({e.seq, topic, F::inform, "knowledge low"});
          if (tp.level.knowledge == Level::medium) owed.push_back({e.seq, topic, F::reinforce, "knowledge medium"});
          break;
        case QuestionKind::intention_probe:
          tp.intention_answered = true;
          if (tp.level.intention == Level::low) owed.push_back({e.seq, topic, F::argument, "intention low"});
          break;
        case QuestionKind::role_reassessment:
          tp.post_exception_intention = tp.level.intention;
          if (tp.level.intention == Level::low && t.header.profile == EthicalProfile::open_minded)
            owed.push_back({e.seq, topic, F::substitution, "open-minded, post-exception intention low"});
          break;
      }
      continue;
    }

    const dialogue::DialogueAct& a = *e.act;
    acts.emplace_back(e.seq, &a);
    if (i == 0 && a.function != F::greeting_self_introduction)
      flag(e.seq, "greeting-first", "first act is " + std::string(to_string(a.function)));
    if (a.function == F::goodbye) {
      ++goodbyes;
      if (i + 1 != t.entries.size()) flag(e.seq, "goodbye-last", "entries follow the goodbye");
    }
    if (a.technique.has_value() != (a.function == F::argument))
      flag(e.seq, "technique-iff-argument", std::string(to_string(a.function)));
    if (a.options.empty() == (a.function == F::question))
      flag(e.seq, "options-iff-question", std::string(to_string(a.function)));
    if (a.technique && std::find(pack.techniques.begin(), pack.techniques.end(), *a.technique) ==
                           pack.techniques.end())
      flag(e.seq, "enabled-technique", std::string(to_string(*a.technique)));

    Topic* tp = a.topic && topics.contains(*a.topic) ? &topics[*a.topic] : nullptr;
    auto need_topic = [&](const char* rule) {
      if (!tp) flag(e.seq, rule, std::string(to_string(a.function)) + " outside a topic scene");
      return tp != nullptr;
    };
    switch (a.function) {
      case F::inform:
        if (need_topic("inform-gating") && (!tp->knowledge_answered || tp->level.knowledge != Level::low))
          flag(e.seq, "inform-gating", "inform with knowledge " + std::string(to_string(tp->level.knowledge)));
        if (tp) tp->informed_or_argued = true;
        break;
      case F::reinforce:
        if (need_topic("reinforce-gating") && (!tp->knowledge_answered || tp->level.knowledge != Level::medium))
          flag(e.seq, "reinforce-gating", "reinforce with knowledge " + std::string(to_string(tp->level.knowledge)));
        break;
      case F::argument:
        if (need_topic("argument-gating")) {
          if (!tp->intention_answered || tp->level.intention != Level::low)
            flag(e.seq, "argument-gating", "argument with intention " + std::string(to_string(tp->level.intention)));
          if (++tp->arguments > 1) flag(e.seq, "argument-once", "second argument on " + *a.topic);
          tp->informed_or_argued = true;
        }
        break;
      case F::exception:
        if (need_topic("exception-precondition")) {
          if (!tp->informed_or_argued)
            flag(e.seq, "exception-precondition", "no prior inform or argument on " + *a.topic);
          const pack::SceneSpec* scene = pack.scene(a.scene);
          if (!scene || !scene->climax_capable)
            flag(e.seq, "exception-climax-scene", a.scene + " is not climax-capable");
          tp->exception_at = e.seq;
        }
        break;
      case F::substitution:
        if (t.header.profile != EthicalProfile::open_minded)
          flag(e.seq, "substitution-gating", "substitution under a neutral profile");
        if (need_topic("substitution-gating")) {
          if (!tp->exception_at) flag(e.seq, "substitution-gating", "no prior exception on " + *a.topic);
          else if (tp->post_exception_intention != Level::low)
            flag(e.seq, "substitution-gating", "post-exception intention was not low");
          if (++tp->substitutions > 1) flag(e.seq, "substitution-once", *a.topic);
        }
        break;
      default: break;
    }
  }

  if (t.entries.empty() || !t.entries.front().act)
    flag(0, "greeting-first", "transcript does not start with an agent act");
  if (goodbyes != 1) flag(t.entries.empty() ? 0 : t.entries.back().seq, "goodbye-unique",
                          std::to_string(goodbyes) + " goodbye acts");

  for (const auto& o : owed) {
    const bool met = std::any_of(acts.begin(), acts.end(), [&](const auto& p) {
      return p.first > o.seq && p.second->function == o.function && p.second->topic == o.topic;
    });
    if (!met)
      flag(o.seq, std::string(to_string(o.function)) + "-owed",
           o.why + " on " + o.topic + " but no later " + std::string(to_string(o.function)));
  }
  std::stable_sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) { return a.seq < b.seq; });
  return out;
}

struct BatchReport {
  std::uint64_t runs = 0;
  std::uint64_t seed_base = 0;
  std::map<PersuasiveTechnique, std::uint64_t> technique_counts;
  std::uint64_t argument_events = 0;
  std::uint64_t exception_count = 0;
  std::uint64_t substitution_count = 0;
  std::uint64_t open_minded_sessions = 0;
  std::map<std::string, std::uint64_t> profile_counts;
  std::map<std::string, std::map<Level, std::uint64_t>> knowledge_hist;  // topic -> level -> sessions
  std::map<std::string, std::map<Level, std::uint64_t>> intention_hist;
  std::uint64_t violation_count = 0;
  std::vector<std::string> violations;  // first few, with their session seed
  bool operator==(const BatchReport&) const = default;

  double technique_frequency(PersuasiveTechnique t) const {
    if (argument_events == 0) return 0.0;
    auto it = technique_counts.find(t);
    return it == technique_counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(argument_events);
  }
};

inline constexpr std::size_t kReportedViolations = 20;

inline void add_session(BatchReport& r, const pack::ContentPack& pack, const Transcript& t,
                        const std::string& profile_id) {
  ++r.runs;
  ++r.profile_counts[profile_id];
  if (t.header.profile == EthicalProfile::open_minded) ++r.open_minded_sessions;
  for (const auto& e : t.entries) {
    if (!e.act) continue;
    if (e.act->function == CommunicativeFunction::argument && e.act->technique) {
      ++r.technique_counts[*e.act->technique];
      ++r.argument_events;
    }
    if (e.act->function == CommunicativeFunction::exception) ++r.exception_count;
    if (e.act->function == CommunicativeFunction::substitution) ++r.substitution_count;
  }
  for (const auto& [topic, lv] : final_levels(pack, t)) {
    ++r.knowledge_hist[topic][lv.knowledge];
    ++r.intention_hist[topic][lv.intention];
  }
  auto vs = check_transcript(pack, t);
  r.violation_count += vs.size();
  for (const auto& v : vs) {
    if (r.violations.size() >= kReportedViolations) break;
    r.violations.push_back("seed " + std::to_string(t.header.seed) + " " + v.str());
  }
}

inline std::uint64_t session_seed(std::uint64_t seed_base, std::uint64_t i) {
  return kernel::derive_seed(seed_base, "session/" + std::to_string(i));
}

inline BatchReport run_batch(std::shared_ptr<const pack::ContentPack> pack, const ProfileMix& mix, std::uint64_t n,
                             std::uint64_t seed_base) {
  if (n == 0) throw HarnessFault("run_batch needs at least one run");
  if (mix.profiles.empty()) throw HarnessFault("profile mix is empty");
  for (const auto& [w, p] : mix.profiles) {
    auto missing = missing_rules(p, *pack);
    if (!missing.empty()) throw HarnessFault("profile " + p.id + " has no rule for question " + missing.front());
  }
  BatchReport r;
  r.seed_base = seed_base;
  for (auto t : pack->techniques) r.technique_counts[t] = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t seed = session_seed(seed_base, i);
    kernel::Rng pick(kernel::derive_seed(seed, "profile"));
    const UserProfile& profile = weighted_pick(mix.profiles, pick);
    add_session(r, *pack, simulate_session(pack, profile, seed, mix.ethics), profile.id);
  }
  return r;
}

inline json to_json(const BatchReport& r) {
  json techniques = json::object();
  for (const auto& [t, c] : r.technique_counts) techniques[std::string(to_string(t))] = c;
  auto hist = [](const std::map<std::string, std::map<Level, std::uint64_t>>& h) {
    json j = json::object();
    for (const auto& [topic, levels] : h) {
      json l = json::object();
      for (auto level : kAllLevels) l[std::string(to_string(level))] = levels.contains(level) ? levels.at(level) : 0;
      j[topic] = l;
    }
    return j;
  };
  return json{{"runs", r.runs},
              {"seed_base", r.seed_base},
              {"argument_events", r.argument_events},
              {"techniques", techniques},
              {"exceptions", r.exception_count},
              {"substitutions", r.substitution_count},
              {"open_minded_sessions", r.open_minded_sessions},
              {"profiles", r.profile_counts},
              {"final_knowledge", hist(r.knowledge_hist)},
              {"final_intention", hist(r.intention_hist)},
              {"violation_count", r.violation_count},
              {"violations", r.violations}};
}

inline std::string summary_table(const BatchReport& r) {
  std::ostringstream o;
  o << "runs " << r.runs << "  (open-minded " << r.open_minded_sessions << ")\n";
  o << "argument events " << r.argument_events << "\n";
  for (const auto& [t, c] : r.technique_counts) {
    o << "  " << std::left << std::setw(16) << to_string(t) << std::right << std::setw(8) << c << "  "
      << std::fixed << std::setprecision(4) << r.technique_frequency(t) << "\n";
  }
  o << "exceptions " << r.exception_count << "  substitutions " << r.substitution_count << "\n";
  o << "final levels (low/medium/high)\n";
  o << "  " << std::left << std::setw(14) << "topic" << std::setw(22) << "knowledge" << "intention\n";
  for (const auto& [topic, k] : r.knowledge_hist) {
    auto cell = [](const std::map<Level, std::uint64_t>& m) {
      std::string s;
      for (auto l : kAllLevels) s += (s.empty() ? "" : "/") + std::to_string(m.contains(l) ? m.at(l) : 0);
      return s;
    };
    o << "  " << std::setw(14) << topic << std::setw(22) << cell(k) << cell(r.intention_hist.at(topic)) << "\n";
  }
  o << std::right << "invariant violations " << r.violation_count << "\n";
  for (const auto& v : r.violations) o << "  " << v << "\n";
  return o.str();
}

}  // namespace cogdial::sim
