#pragma once

// A Conversation is one session's engine plus its transcript. The CLI REPL,
// the WebSocket service and the simulator all drive dialogue through it.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cogdial/dialogue/manager.hpp"
#include "cogdial/session/transcript.hpp"

namespace cogdial::session {

class Conversation {
 public:
  Conversation(std::shared_ptr<const pack::ContentPack> pack, ProfileChoice choice, std::uint64_t seed)
      : manager_(std::move(pack), choice, seed) {
    init_header(choice, seed);
  }

  Conversation(std::shared_ptr<const pack::ContentPack> pack, ProfileChoice choice, std::uint64_t seed,
               const std::vector<kernel::Production>& policy)
      : manager_(std::move(pack), choice, seed, policy) {
    init_header(choice, seed);
  }

  // Runs the agent up to its first question. Returns the new entries.
  std::vector<TranscriptEntry> start() {
    if (started_) throw dialogue::ProtocolError("conversation already started");
    started_ = true;
    return run_agent();
  }

  // Applies a user choice and runs the agent up to the next question or the
  // goodbye. Throws ProtocolError (state unchanged) for a stale option.
  std::vector<TranscriptEntry> choose(std::string_view option) {
    if (!started_) throw dialogue::ProtocolError("conversation not started");
    if (complete()) throw dialogue::ProtocolError("session already ended");
    const std::string question = manager_.pending_question().value_or("");
    manager_.apply_user_reply(option);
    std::vector<TranscriptEntry> out;
    TranscriptEntry e;
    e.seq = transcript_.entries.size();
    e.direction = Direction::user;
    e.question = question;
    e.option = std::string(option);
    e.digest = dialogue::digest(manager_.state());
    transcript_.entries.push_back(e);
    out.push_back(std::move(e));
    auto agent = run_agent();
    out.insert(out.end(), agent.begin(), agent.end());
    return out;
  }

  bool complete() const { return manager_.complete(); }
  const Transcript& transcript() const { return transcript_; }
  const dialogue::DialogueManager& manager() const { return manager_; }
  const dialogue::InformationState& state() const { return manager_.state(); }
  const pack::ContentPack& pack() const { return manager_.pack(); }

  // Options of the pending question, or nullptr.
  const pack::QuestionSpec* pending_question() const {
    const auto& q = manager_.pending_question();
    if (!q) return nullptr;
    auto ref = manager_.pack().question(*q);
    return ref ? ref->question : nullptr;
  }

 private:
  void init_header(ProfileChoice choice, std::uint64_t seed) {
    transcript_.header.pack_id = manager_.pack().info.id;
    transcript_.header.pack_version = manager_.pack().info.version;
    transcript_.header.seed = seed;
    transcript_.header.profile_choice = choice;
    transcript_.header.profile = manager_.state().ethical_profile;
  }

  // Longest burst of agent acts without user input; a policy that exceeds it is looping.
  static constexpr std::size_t kMaxBurst = 64;

  std::vector<TranscriptEntry> run_agent() {
    std::vector<TranscriptEntry> out;
    while (!manager_.complete() && !manager_.pending_question()) {
      if (out.size() >= kMaxBurst)
        throw dialogue::DialogueFault("agent emitted " + std::to_string(kMaxBurst) + " acts without yielding");
      if (!manager_.act_due()) {
        manager_.advance_scene();
        continue;
      }
      TranscriptEntry e;
      e.seq = transcript_.entries.size();
      e.direction = Direction::agent;
      e.act = manager_.select_act();
      e.digest = dialogue::digest(manager_.state());
      transcript_.entries.push_back(e);
      out.push_back(std::move(e));
    }
    return out;
  }

  dialogue::DialogueManager manager_;
  Transcript transcript_;
  bool started_ = false;
};

struct ReplayReport {
  bool ok = true;
  std::size_t entries_checked = 0;
  std::string mismatch;  // empty when ok
};

// Re-runs the engine from a transcript's header and user choices and compares
// every regenerated entry (acts and digests) with the recorded one.
inline ReplayReport replay(std::shared_ptr<const pack::ContentPack> pack, const Transcript& recorded) {
  ReplayReport report;
  auto fail = [&](std::string why) {
    report.ok = false;
    report.mismatch = std::move(why);
    return report;
  };
  if (pack->info.id != recorded.header.pack_id || pack->info.version != recorded.header.pack_version)
    return fail("transcript was recorded with pack " + recorded.header.pack_id + " " +
                recorded.header.pack_version);

  Conversation c(pack, recorded.header.profile_choice, recorded.header.seed);
  if (c.transcript().header != recorded.header) return fail("header mismatch (profile draw differs)");

  auto compare = [&](const std::vector<TranscriptEntry>& fresh) -> bool {
    for (const auto& e : fresh) {
      if (e.seq >= recorded.entries.size()) {
        fail("replay produced extra entry " + std::to_string(e.seq));
        return false;
      }
      if (!(e == recorded.entries[e.seq])) {
        fail("entry " + std::to_string(e.seq) + " differs: recorded " + to_json(recorded.entries[e.seq]).dump() +
             " replayed " + to_json(e).dump());
        return false;
      }
      ++report.entries_checked;
    }
    return true;
  };

  try {
    if (!compare(c.start())) return report;
    while (report.entries_checked < recorded.entries.size()) {
      const TranscriptEntry& next = recorded.entries[report.entries_checked];
      if (next.direction != Direction::user) return fail("entry " + std::to_string(next.seq) + " not reproduced");
      if (!compare(c.choose(next.option))) return report;
    }
  } catch (const std::exception& e) {
    return fail(std::string("engine error during replay: ") + e.what());
  }
  return report;
}

}  // namespace cogdial::session
