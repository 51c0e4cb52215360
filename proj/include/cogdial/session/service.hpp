#pragma once

// SessionService: the wire protocol, independent of the transport. The
// WebSocket server and the tests both feed it one JSON message at a time.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "cogdial/session/conversation.hpp"

namespace cogdial::session {

namespace errc {
inline constexpr const char* bad_request = "bad_request";
inline constexpr const char* unknown_pack = "unknown_pack";
inline constexpr const char* unknown_session = "unknown_session";
inline constexpr const char* stale_option = "stale_option";
inline constexpr const char* busy = "busy";
inline constexpr const char* storage_error = "storage_error";
inline constexpr const char* internal = "internal";
}  // namespace errc

// Opens the transcript sink for a new session; null means "don't persist".
using SinkFactory = std::function<std::unique_ptr<TranscriptSink>(const std::string& session_id)>;

inline SinkFactory directory_sinks(std::filesystem::path dir) {
  return [dir = std::move(dir)](const std::string& id) -> std::unique_ptr<TranscriptSink> {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    return std::make_unique<FileSink>(dir / (id + ".jsonl"));
  };
}

class SessionService {
 public:
  using Clock = std::chrono::system_clock;

  struct Session {
    Session(std::string id_, std::uint64_t seed_, Conversation c)
        : id(std::move(id_)), seed(seed_), created_at(Clock::now()), conversation(std::move(c)) {}

    std::string id;
    std::uint64_t seed = 0;
    Clock::time_point created_at;
    Conversation conversation;
    std::unique_ptr<TranscriptSink> sink;
    std::uint64_t wire_seq = 0;  // next agent utterance number
    std::mutex busy;
  };

  explicit SessionService(SinkFactory sinks = nullptr) : sinks_(std::move(sinks)) {}

  void add_pack(std::shared_ptr<const pack::ContentPack> p) {
    std::lock_guard lock(mu_);
    packs_[p->info.id] = std::move(p);
  }

  // Handles one client message and returns the server messages in order.
  std::vector<json> handle(const json& msg) {
    try {
      if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string())
        return {error(errc::bad_request, "message must be an object with a string 'type'")};
      const std::string type = msg["type"];
      if (type == "start") return start(msg);
      if (type == "choice") return choice(msg);
      return {error(errc::bad_request, "unknown message type '" + type + "'")};
    } catch (const json::exception& e) {
      return {error(errc::bad_request, e.what())};
    }
  }

  // Parses raw frame text; malformed JSON becomes a bad_request error.
  std::vector<json> handle_text(const std::string& text) {
    json msg = json::parse(text, nullptr, false);
    if (msg.is_discarded()) return {error(errc::bad_request, "malformed JSON")};
    return handle(msg);
  }

  std::size_t session_count() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
  }

  // Snapshot of a session's transcript (tests, diagnostics).
  std::optional<Transcript> transcript(const std::string& id) const {
    auto s = find(id);
    if (!s) return std::nullopt;
    std::lock_guard lock(s->busy);
    return s->conversation.transcript();
  }

 private:
  std::vector<json> start(const json& msg) {
    if (!msg.contains("pack") || !msg["pack"].is_string())
      return {error(errc::bad_request, "start requires a string 'pack'")};
    std::shared_ptr<const pack::ContentPack> p;
    {
      std::lock_guard lock(mu_);
      auto it = packs_.find(msg["pack"].get<std::string>());
      if (it == packs_.end()) return {error(errc::unknown_pack, "unknown pack '" + msg["pack"].get<std::string>() + "'")};
      p = it->second;
    }
    ProfileChoice choice = ProfileChoice::random;
    if (msg.contains("profile")) {
      auto c = msg["profile"].is_string() ? parse<ProfileChoice>(msg["profile"].get<std::string>()) : std::nullopt;
      if (!c) return {error(errc::bad_request, "profile must be open_minded, neutral or random")};
      choice = *c;
    }
    std::uint64_t seed;
    if (msg.contains("seed") && !msg["seed"].is_null()) {
      if (!msg["seed"].is_number_unsigned()) return {error(errc::bad_request, "seed must be an unsigned integer")};
      seed = msg["seed"].get<std::uint64_t>();
    } else {
      seed = random_seed();
    }

    auto s = std::make_shared<Session>(new_id(), seed, Conversation(p, choice, seed));
    std::vector<TranscriptEntry> entries;
    try {
      entries = s->conversation.start();
      if (sinks_) {
        s->sink = sinks_(s->id);
        if (s->sink) s->sink->append(to_jsonl(s->conversation.transcript()));
      }
    } catch (const StorageError& e) {
      return {error(errc::storage_error, e.what())};
    } catch (const std::exception& e) {
      return {error(errc::internal, e.what())};
    }
    {
      std::lock_guard lock(mu_);
      sessions_[s->id] = s;
    }
    return messages(*s, entries);
  }

  std::vector<json> choice(const json& msg) {
    if (!msg.contains("session") || !msg["session"].is_string() || !msg.contains("option") ||
        !msg["option"].is_string())
      return {error(errc::bad_request, "choice requires string 'session' and 'option'")};
    const std::string id = msg["session"];
    auto s = find(id);
    if (!s) return {error(errc::unknown_session, "unknown session '" + id + "'", id)};
    std::unique_lock lock(s->busy, std::try_to_lock);
    if (!lock.owns_lock()) return {error(errc::busy, "another message for this session is in flight", id)};

    // Work on a copy so a failed transcript write leaves the session as it was.
    Conversation next = s->conversation;
    std::vector<TranscriptEntry> entries;
    try {
      entries = next.choose(msg["option"].get<std::string>());
    } catch (const dialogue::ProtocolError& e) {
      return {error(errc::stale_option, e.what(), id)};
    } catch (const std::exception& e) {
      return {error(errc::internal, e.what(), id)};
    }
    if (s->sink) {
      std::string lines;
      for (const auto& e : entries) lines += to_line(to_json(e));
      try {
        s->sink->append(lines);
      } catch (const StorageError& e) {
        return {error(errc::storage_error, e.what(), id)};
      }
    }
    s->conversation = std::move(next);
    return messages(*s, entries);
  }

  std::vector<json> messages(Session& s, const std::vector<TranscriptEntry>& entries) {
    std::vector<json> out;
    for (const auto& e : entries) {
      if (e.direction != Direction::agent) continue;
      const dialogue::DialogueAct& a = *e.act;
      json m{{"type", "utterance"},
             {"session", s.id},
             {"seq", s.wire_seq++},
             {"function", to_string(a.function)},
             {"scene", a.scene}};
      if (a.technique) m["technique"] = to_string(*a.technique);
      m["text"] = a.utterance;
      json options = json::array();
      if (a.question) {
        auto ref = s.conversation.pack().question(*a.question);
        for (const auto& o : ref->question->options) options.push_back({{"id", o.id}, {"label", o.label}});
      }
      m["options"] = options;
      out.push_back(std::move(m));
    }
    if (s.conversation.complete()) {
      json per_topic = json::object();
      for (const auto& [topic, t] : s.conversation.state().topic_states)
        per_topic[topic] = {{"knowledge", to_string(t.knowledge)}, {"intention", to_string(t.intention)}};
      out.push_back({{"type", "end"}, {"session", s.id}, {"summary", {{"per_topic", per_topic}}}});
    }
    return out;
  }

  static json error(const char* code, const std::string& message, const std::string& session = {}) {
    json j{{"type", "error"}, {"code", code}, {"message", message}};
    if (!session.empty()) j["session"] = session;
    return j;
  }

  std::shared_ptr<Session> find(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  std::uint64_t random_seed() {
    std::lock_guard lock(mu_);
    return (std::uint64_t{entropy_()} << 32) ^ entropy_();
  }

  std::string new_id() {
    std::uint64_t bits;
    {
      std::lock_guard lock(mu_);
      bits = (std::uint64_t{entropy_()} << 32) ^ entropy_();
    }
    bits = kernel::mix64(bits ^ counter_.fetch_add(1));
    static constexpr char kHex[] = "0123456789abcdef";
    std::string id(16, '0');
    for (int i = 15; i >= 0; --i, bits >>= 4) id[static_cast<std::size_t>(i)] = kHex[bits & 0xf];
    return id;
  }

  SinkFactory sinks_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const pack::ContentPack>> packs_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::random_device entropy_;
  std::atomic<std::uint64_t> counter_{0};
};

}  // namespace cogdial::session
