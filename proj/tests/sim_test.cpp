#include <gtest/gtest.h>

#include "cogdial/sim/harness.hpp"
#include "test_support.hpp"

using namespace cogdial;
using namespace cogdial::sim;
using testing_support::shipped_pack;
using F = CommunicativeFunction;

namespace {

ProfileMix mix_file(const std::string& name) {
  return load_mix_file(std::string(COGDIAL_PROFILES_DIR) + "/" + name + ".json");
}

const UserProfile& only_profile(const std::string& name) {
  static std::map<std::string, ProfileMix> cache;
  auto [it, _] = cache.emplace(name, mix_file(name));
  return it->second.profiles.at(0).second;
}

std::vector<F> mask_functions(const Transcript& t) {
  std::vector<F> out;
  for (const auto& e : t.entries)
    if (e.act && e.act->scene == "mask") out.push_back(e.act->function);
  return out;
}

bool has_rule(const std::vector<Violation>& vs, const std::string& rule) {
  return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.rule == rule; });
}

}  // namespace

TEST(Profile, JsonRoundTripAndLookup) {
  const UserProfile& p = only_profile("skeptic");
  EXPECT_EQ(profile_from_json(to_json(p)), p);
  ASSERT_TRUE(p.rule_for(QuestionKind::knowledge_probe, "mask"));
  // The post-exception override answers the re-assessment.
  EXPECT_EQ(p.rule_for(QuestionKind::role_reassessment, "mask"), &*p.post_exception_intention);
  EXPECT_TRUE(missing_rules(p, *shipped_pack()).empty());
}

TEST(Profile, TopicRuleBeatsWildcard) {
  auto p = profile_from_json(json::parse(R"({"id":"x","answers":[
      {"kind":"intention_probe","topic":"*","levels":{"high":1}},
      {"kind":"intention_probe","topic":"mask","option":"mask-intention:low"}]})"));
  kernel::Rng rng(1);
  auto mask = shipped_pack()->question("mask-intention")->question;
  auto vacc = shipped_pack()->question("vaccination-intention")->question;
  EXPECT_EQ(choose_option(p, *mask, "mask", rng), "mask-intention:low");
  EXPECT_EQ(choose_option(p, *vacc, "vaccination", rng), "vaccination-intention:high");
}

TEST(Profile, BadDocumentsAreHarnessFaults) {
  EXPECT_THROW(profile_from_json(json::parse(R"({"id":"x","answers":[{"kind":"nope","levels":{"low":1}}]})")),
               HarnessFault);
  EXPECT_THROW(profile_from_json(json::parse(R"({"id":"x","answers":[{"kind":"knowledge_probe"}]})")), HarnessFault);
  EXPECT_THROW(profile_from_json(json::parse(R"({"id":"x","answers":[{"kind":"knowledge_probe","levels":{"low":0}}]})")),
               HarnessFault);
  EXPECT_THROW(load_mix_file("/nonexistent/profile.json"), HarnessFault);
}

TEST(Profile, LevelDistributionIsRespected) {
  auto p = profile_from_json(
      json::parse(R"({"id":"x","answers":[{"kind":"knowledge_probe","levels":{"low":1,"high":3}}]})"));
  auto q = shipped_pack()->question("mask-knowledge")->question;
  kernel::Rng rng(5);
  int high = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) high += choose_option(p, *q, "mask", rng) == "mask-knowledge:high";
  // p = 0.75, sd of the frequency ~0.007
  EXPECT_NEAR(high / double(n), 0.75, 0.03);
}

TEST(SimulateSession, MissingRuleNamesTheQuestion) {
  auto p = profile_from_json(json::parse(R"({"id":"half","answers":[{"kind":"knowledge_probe","levels":{"low":1}}]})"));
  try {
    simulate_session(shipped_pack(), p, 1, ProfileChoice::neutral);
    FAIL() << "expected HarnessFault";
  } catch (const HarnessFault& e) {
    EXPECT_NE(std::string(e.what()).find("contagion-intention"), std::string::npos) << e.what();
  }
}

TEST(SimulateSession, SkepticOpenMindedMaskOrdering) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto t = simulate_session(shipped_pack(), only_profile("skeptic"), seed, ProfileChoice::open_minded);
    auto fs = mask_functions(t);
    // knowledge question, inform, intention question, argument, exception, re-assessment, substitution
    std::vector<F> expect{F::question, F::inform, F::question, F::argument, F::exception, F::question,
                          F::substitution};
    EXPECT_EQ(fs, expect) << seed;
    EXPECT_TRUE(check_transcript(*shipped_pack(), t).empty());
  }
}

TEST(SimulateSession, CompliantSeesNoPersuasion) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto t = simulate_session(shipped_pack(), only_profile("compliant"), seed, ProfileChoice::random);
    for (const auto& e : t.entries) {
      if (!e.act) continue;
      EXPECT_NE(e.act->function, F::inform);
      EXPECT_NE(e.act->function, F::argument);
      EXPECT_NE(e.act->function, F::exception);
    }
  }
}

TEST(SimulateSession, Deterministic) {
  const auto mix = mix_file("mixed");
  const auto& p = mix.profiles.at(2).second;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EXPECT_EQ(simulate_session(shipped_pack(), p, seed, ProfileChoice::random),
              simulate_session(shipped_pack(), p, seed, ProfileChoice::random));
  }
}

TEST(CheckTranscript, CleanOnMixedSessions) {
  auto mix = mix_file("mixed");
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto& p = mix.profiles[seed % mix.profiles.size()].second;
    auto t = simulate_session(shipped_pack(), p, seed, ProfileChoice::random);
    auto vs = check_transcript(*shipped_pack(), t);
    EXPECT_TRUE(vs.empty()) << seed << ": " << vs.front().str();
  }
}

// A policy that substitutes where it should argue: substitution with no exception.
TEST(CheckTranscript, CatchesBrokenPolicyFixture) {
  json rules = json::parse(dialogue::kPolicyProductions);
  for (auto& r : rules) {
    if (r["name"] != "argue") continue;
    r["then"][0]["retrieve"]["slots"] = {{"function", "substitution"}, {"technique", "none"}};
    r["then"][1]["slots"]["function"] = "substitution";
    r["then"][1]["slots"]["technique"] = "none";
  }
  auto broken = kernel::productions_from_json(rules);
  int caught = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto t = simulate_session(shipped_pack(), only_profile("skeptic"), seed, ProfileChoice::open_minded, &broken);
    auto vs = check_transcript(*shipped_pack(), t);
    bool found = false;
    for (const auto& v : vs) found |= v.rule == "substitution-gating" && v.detail.find("no prior exception") != std::string::npos;
    caught += found;
    EXPECT_TRUE(has_rule(vs, "argument-owed"));
  }
  EXPECT_EQ(caught, 10);
}

TEST(CheckTranscript, CatchesHandMadeCorruptions) {
  auto base = simulate_session(shipped_pack(), only_profile("skeptic"), 3, ProfileChoice::open_minded);
  auto renumber = [](Transcript& t) {
    for (std::size_t i = 0; i < t.entries.size(); ++i) t.entries[i].seq = i;
  };
  {  // no greeting
    auto t = base;
    t.entries.erase(t.entries.begin());
    renumber(t);
    EXPECT_TRUE(has_rule(check_transcript(*shipped_pack(), t), "greeting-first"));
  }
  {  // two goodbyes
    auto t = base;
    t.entries.push_back(t.entries.back());
    renumber(t);
    auto vs = check_transcript(*shipped_pack(), t);
    EXPECT_TRUE(has_rule(vs, "goodbye-unique"));
    EXPECT_TRUE(has_rule(vs, "goodbye-last"));
  }
  {  // user claims high knowledge, agent still informs
    auto t = base;
    for (auto& e : t.entries)
      if (e.question == "mask-knowledge") e.option = "mask-knowledge:high";
    EXPECT_TRUE(has_rule(check_transcript(*shipped_pack(), t), "inform-gating"));
  }
  {  // neutral header with a substitution
    auto t = base;
    t.header.profile = EthicalProfile::neutral;
    EXPECT_TRUE(has_rule(check_transcript(*shipped_pack(), t), "substitution-gating"));
  }
  {  // exception with its argument removed
    auto t = base;
    std::erase_if(t.entries, [](const session::TranscriptEntry& e) {
      return e.act && e.act->scene == "mask" &&
             (e.act->function == F::argument || e.act->function == F::inform);
    });
    renumber(t);
    EXPECT_TRUE(has_rule(check_transcript(*shipped_pack(), t), "exception-precondition"));
  }
  {  // missing substitution for an open-minded low re-assessment
    auto t = base;
    std::erase_if(t.entries, [](const session::TranscriptEntry& e) { return e.act && e.act->function == F::substitution; });
    renumber(t);
    EXPECT_TRUE(has_rule(check_transcript(*shipped_pack(), t), "substitution-owed"));
  }
}

TEST(RunBatch, SingleRunCountsSumToOne) {
  auto r = run_batch(shipped_pack(), mix_file("mixed"), 1, 7);
  EXPECT_EQ(r.runs, 1u);
  std::uint64_t profiles = 0;
  for (const auto& [id, n] : r.profile_counts) profiles += n;
  EXPECT_EQ(profiles, 1u);
  for (const auto& [topic, h] : r.knowledge_hist) {
    std::uint64_t total = 0;
    for (const auto& [l, n] : h) total += n;
    EXPECT_EQ(total, 1u) << topic;
  }
  EXPECT_EQ(r.violation_count, 0u);
}

TEST(RunBatch, DeterministicAndConsistent) {
  auto a = run_batch(shipped_pack(), mix_file("mixed"), 150, 99);
  auto b = run_batch(shipped_pack(), mix_file("mixed"), 150, 99);
  EXPECT_EQ(a, b);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  std::uint64_t techniques = 0;
  for (const auto& [t, n] : a.technique_counts) techniques += n;
  EXPECT_EQ(techniques, a.argument_events);
  EXPECT_LE(a.substitution_count, a.exception_count);
  EXPECT_LE(a.open_minded_sessions, a.runs);
  EXPECT_EQ(a.violation_count, 0u) << summary_table(a);
  EXPECT_NE(run_batch(shipped_pack(), mix_file("mixed"), 150, 100), a);
}

TEST(RunBatch, NeutralEthicsNeverSubstitutes) {
  auto mix = mix_file("skeptic");
  mix.ethics = ProfileChoice::neutral;
  auto r = run_batch(shipped_pack(), mix, 50, 1);
  EXPECT_EQ(r.substitution_count, 0u);
  EXPECT_EQ(r.exception_count, 50u);
  EXPECT_EQ(r.open_minded_sessions, 0u);
}

TEST(RunBatch, PopulationFixtureRunsClean) {
  auto mix = mix_file("population");
  ASSERT_EQ(mix.profiles.size(), 3u);
  EXPECT_EQ(mix.profiles[0].first, 4);
  EXPECT_EQ(mix.profiles[1].first, 7);
  auto r = run_batch(shipped_pack(), mix, 126, 5);
  EXPECT_EQ(r.violation_count, 0u);
  EXPECT_FALSE(summary_table(r).empty());
}

TEST(RunBatch, RejectsBadInputs) {
  EXPECT_THROW(run_batch(shipped_pack(), mix_file("mixed"), 0, 1), HarnessFault);
  ProfileMix partial;
  partial.profiles.emplace_back(
      1.0, profile_from_json(json::parse(R"({"id":"p","answers":[{"kind":"knowledge_probe","levels":{"low":1}}]})")));
  EXPECT_THROW(run_batch(shipped_pack(), partial, 3, 1), HarnessFault);
}
