#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "cogdial/session/service.hpp"
#include "cogdial/session/ws_server.hpp"
#include "test_support.hpp"

using namespace cogdial;
using namespace cogdial::session;
using testing_support::shipped_pack;

namespace {

std::string option_id(const std::string& question, Level level) {
  return pack::option_for_level(*shipped_pack()->question(question)->question, level)->id;
}

// Drives a conversation to the end, answering every question with `level`.
Conversation finish(std::uint64_t seed, ProfileChoice profile, Level level) {
  Conversation c(shipped_pack(), profile, seed);
  c.start();
  while (!c.complete()) c.choose(option_id(c.pending_question()->id, level));
  return c;
}

json start_msg(std::uint64_t seed, const char* profile = "open_minded") {
  return json{{"type", "start"}, {"pack", "covid-19"}, {"seed", seed}, {"profile", profile}};
}

json choice_msg(const std::string& session, const std::string& option) {
  return json{{"type", "choice"}, {"session", session}, {"option", option}};
}

// Option id for `level` from the last utterance of a burst.
std::string pick(const std::vector<json>& burst, Level level) {
  const json& q = burst.back();
  for (const auto& o : q.at("options")) {
    auto ref = shipped_pack()->question(o.at("id").get<std::string>().substr(0, o.at("id").get<std::string>().find(':')));
    if (ref && o.at("id") == option_id(ref->question->id, level)) return o.at("id");
  }
  throw std::runtime_error("no option for level in " + q.dump());
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cogdial-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

// --- transcripts and conversations -----------------------------------------

TEST(Transcript, JsonlRoundTrip) {
  Conversation c = finish(5, ProfileChoice::random, Level::low);
  const std::string text = to_jsonl(c.transcript());
  Transcript back = parse_transcript(text);
  EXPECT_EQ(back, c.transcript());
  EXPECT_EQ(to_jsonl(back), text);
}

TEST(Transcript, HeaderPlusOneEntryPerHistoryRecord) {
  Conversation c = finish(6, ProfileChoice::neutral, Level::medium);
  EXPECT_EQ(c.transcript().entries.size(), c.state().history.size());
  const std::string text = to_jsonl(c.transcript());
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), c.state().history.size() + 1);
  for (std::size_t i = 0; i < c.transcript().entries.size(); ++i) EXPECT_EQ(c.transcript().entries[i].seq, i);
}

TEST(Transcript, RejectsGapsAndGarbage) {
  Conversation c = finish(7, ProfileChoice::neutral, Level::high);
  Transcript t = c.transcript();
  t.entries.erase(t.entries.begin() + 1);
  EXPECT_THROW(parse_transcript(to_jsonl(t)), TranscriptError);
  EXPECT_THROW(parse_transcript(""), TranscriptError);
  EXPECT_THROW(parse_transcript("{\"transcript\":\"cogdial/1\"\n"), TranscriptError);
}

TEST(Conversation, IdenticalInputsGiveByteIdenticalTranscripts) {
  for (std::uint64_t seed : {1ull, 42ull, 9000ull}) {
    EXPECT_EQ(to_jsonl(finish(seed, ProfileChoice::random, Level::low).transcript()),
              to_jsonl(finish(seed, ProfileChoice::random, Level::low).transcript()));
  }
}

TEST(Conversation, ReplayReproducesDigests) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Level level = kAllLevels[seed % 3];
    Conversation c = finish(seed, ProfileChoice::random, level);
    Transcript parsed = parse_transcript(to_jsonl(c.transcript()));
    ReplayReport r = replay(shipped_pack(), parsed);
    EXPECT_TRUE(r.ok) << r.mismatch;
    EXPECT_EQ(r.entries_checked, parsed.entries.size());
  }
}

TEST(Conversation, ReplayDetectsTampering) {
  Transcript t = finish(3, ProfileChoice::open_minded, Level::low).transcript();
  t.entries[4].digest = "0000000000000000";
  ReplayReport r = replay(shipped_pack(), t);
  EXPECT_FALSE(r.ok);
  EXPECT_NE(r.mismatch.find("entry 4"), std::string::npos) << r.mismatch;
}

TEST(Conversation, DifferentSeedsDivergeAtTechniqueOrProfile) {
  // Find the first differing line between two seeds; it must be the header
  // (profile draw) or an argument act (technique draw).
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Transcript a = finish(seed, ProfileChoice::random, Level::low).transcript();
    Transcript b = finish(seed + 1000, ProfileChoice::random, Level::low).transcript();
    if (a == b) continue;
    ++compared;
    if (!(a.header.profile == b.header.profile)) continue;
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
      if (a.entries[i] == b.entries[i]) continue;
      ASSERT_TRUE(a.entries[i].act && b.entries[i].act);
      EXPECT_EQ(a.entries[i].act->function, CommunicativeFunction::argument);
      EXPECT_NE(a.entries[i].act->technique, b.entries[i].act->technique);
      break;
    }
  }
  EXPECT_GT(compared, 10);
}

TEST(Conversation, StaleOptionLeavesStateUnchanged) {
  Conversation c(shipped_pack(), ProfileChoice::neutral, 1);
  c.start();
  const std::string before = dialogue::digest(c.state());
  EXPECT_THROW(c.choose("zzz"), dialogue::ProtocolError);
  EXPECT_EQ(dialogue::digest(c.state()), before);
  EXPECT_EQ(c.transcript().entries.size(), 2u);
}

// --- service ---------------------------------------------------------------

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override { service.add_pack(shipped_pack()); }
  SessionService service;
};

TEST_F(ServiceTest, StartEmitsGreetingFirst) {
  auto out = service.handle(start_msg(42));
  ASSERT_GE(out.size(), 2u);
  EXPECT_EQ(out[0]["type"], "utterance");
  EXPECT_EQ(out[0]["function"], "greeting_self_introduction");
  EXPECT_EQ(out[0]["text"], pack::render(*shipped_pack(), CommunicativeFunction::greeting_self_introduction,
                                         "introduction"));
  EXPECT_EQ(out[0]["seq"], 0);
  EXPECT_TRUE(out[0]["options"].empty());
  EXPECT_FALSE(out[0].contains("technique"));
  EXPECT_EQ(out.back()["function"], "question");
  EXPECT_EQ(out.back()["options"].size(), 3u);
  EXPECT_TRUE(out.back()["options"][0].contains("label"));
}

TEST_F(ServiceTest, SameStartTwiceGivesSameMessagesModuloSession) {
  auto a = service.handle(start_msg(42));
  auto b = service.handle(start_msg(42));
  ASSERT_EQ(a.size(), b.size());
  EXPECT_NE(a[0]["session"], b[0]["session"]);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i].erase("session");
    b[i].erase("session");
    EXPECT_EQ(a[i], b[i]);
  }
}

TEST_F(ServiceTest, UnknownPackCreatesNoSession) {
  auto out = service.handle(json{{"type", "start"}, {"pack", "nope"}});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0]["type"], "error");
  EXPECT_EQ(out[0]["code"], "unknown_pack");
  EXPECT_EQ(service.session_count(), 0u);
}

TEST_F(ServiceTest, BadRequests) {
  EXPECT_EQ(service.handle_text("{not json")[0]["code"], "bad_request");
  EXPECT_EQ(service.handle(json{{"type", "dance"}})[0]["code"], "bad_request");
  EXPECT_EQ(service.handle(json{{"type", "start"}, {"pack", "covid-19"}, {"profile", "grumpy"}})[0]["code"],
            "bad_request");
  EXPECT_EQ(service.handle(json{{"type", "start"}, {"pack", "covid-19"}, {"seed", -4}})[0]["code"], "bad_request");
  EXPECT_EQ(service.handle(json{{"type", "choice"}, {"session", "x"}})[0]["code"], "bad_request");
  EXPECT_EQ(service.handle(choice_msg("nope", "a"))[0]["code"], "unknown_session");
}

TEST_F(ServiceTest, StaleOptionErrorsAndChoiceIsExactlyOnce) {
  auto out = service.handle(start_msg(42));
  const std::string id = out[0]["session"];
  auto before = service.transcript(id)->entries.back().digest;
  auto err = service.handle(choice_msg(id, "zzz"));
  ASSERT_EQ(err.size(), 1u);
  EXPECT_EQ(err[0]["code"], "stale_option");
  EXPECT_EQ(err[0]["session"], id);
  EXPECT_EQ(service.transcript(id)->entries.back().digest, before);

  const std::string opt = pick(out, Level::low);
  auto next = service.handle(choice_msg(id, opt));
  EXPECT_EQ(next[0]["type"], "utterance");
  auto again = service.handle(choice_msg(id, opt));
  ASSERT_EQ(again.size(), 1u);
  EXPECT_EQ(again[0]["code"], "stale_option");
}

TEST_F(ServiceTest, WireSeqIsContiguousAndSessionEndsWithGoodbye) {
  auto out = service.handle(start_msg(11, "random"));
  const std::string id = out[0]["session"];
  std::vector<json> all = out;
  while (all.back()["type"] != "end") {
    auto next = service.handle(choice_msg(id, pick(all, Level::medium)));
    ASSERT_FALSE(next.empty());
    ASSERT_NE(next[0]["type"], "error") << next[0].dump();
    all.insert(all.end(), next.begin(), next.end());
  }
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    EXPECT_EQ(all[i]["seq"], i);
    EXPECT_EQ(all[i]["session"], id);
  }
  EXPECT_EQ(all[all.size() - 2]["function"], "goodbye");
  const json& summary = all.back()["summary"]["per_topic"];
  EXPECT_EQ(summary.size(), 4u);
  EXPECT_EQ(summary["mask"]["knowledge"], "medium");
  EXPECT_EQ(summary["mask"]["intention"], "medium");
  EXPECT_EQ(service.handle(choice_msg(id, "contagion-knowledge:low"))[0]["code"], "stale_option");
}

TEST_F(ServiceTest, FramingSeedReachesFramingArgument) {
  // Answer low to the mask intention probe; the next agent message is an argument.
  auto out = service.handle(start_msg(42));
  const std::string id = out[0]["session"];
  for (;;) {
    const std::string q = out.back()["options"][0]["id"];
    const bool mask_intention = q.rfind("mask-intention", 0) == 0;
    out = service.handle(choice_msg(id, pick(out, mask_intention ? Level::low : Level::high)));
    if (mask_intention) {
      EXPECT_EQ(out[0]["function"], "argument");
      EXPECT_TRUE(out[0].contains("technique"));
      break;
    }
  }
}

TEST_F(ServiceTest, RandomSeedWhenAbsentIsRecorded) {
  auto out = service.handle(json{{"type", "start"}, {"pack", "covid-19"}});
  ASSERT_EQ(out[0]["type"], "utterance");
  auto t = service.transcript(out[0]["session"]);
  ASSERT_TRUE(t);
  EXPECT_EQ(t->header.profile_choice, ProfileChoice::random);
  // The recorded seed replays the session.
  EXPECT_TRUE(replay(shipped_pack(), *t).ok);
}

TEST(ServicePersistence, TranscriptFileMatchesAndReplays) {
  auto dir = temp_dir("persist");
  SessionService service(directory_sinks(dir));
  service.add_pack(shipped_pack());
  auto out = service.handle(start_msg(99, "random"));
  const std::string id = out[0]["session"];
  std::vector<json> all = out;
  while (all.back()["type"] != "end") {
    auto next = service.handle(choice_msg(id, pick(all, Level::low)));
    all.insert(all.end(), next.begin(), next.end());
  }
  Transcript file = read_transcript_file(dir / (id + ".jsonl"));
  EXPECT_EQ(file, *service.transcript(id));
  EXPECT_TRUE(replay(shipped_pack(), file).ok);
  EXPECT_EQ(testing_support::read_file((dir / (id + ".jsonl")).string()),
            to_jsonl(finish(99, ProfileChoice::random, Level::low).transcript()));
  std::filesystem::remove_all(dir);
}

namespace {
// Accepts `ok` appends, then fails every later one.
class FlakySink : public TranscriptSink {
 public:
  FlakySink(int ok, std::string* store) : ok_(ok), store_(store) {}
  void append(const std::string& lines) override {
    if (ok_-- <= 0) throw StorageError("disk full");
    *store_ += lines;
  }

 private:
  int ok_;
  std::string* store_;
};
}  // namespace

TEST(ServicePersistence, StorageFailureIsAnErrorAndRollsBack) {
  std::string stored;
  SessionService service([&](const std::string&) { return std::make_unique<FlakySink>(1, &stored); });
  service.add_pack(shipped_pack());
  auto out = service.handle(start_msg(4));
  const std::string id = out[0]["session"];
  const std::string before = stored;
  const auto entries = service.transcript(id)->entries.size();

  const std::string opt = pick(out, Level::low);
  auto err = service.handle(choice_msg(id, opt));
  ASSERT_EQ(err.size(), 1u);
  EXPECT_EQ(err[0]["code"], "storage_error");
  EXPECT_EQ(stored, before);  // earlier lines untouched
  EXPECT_EQ(service.transcript(id)->entries.size(), entries);
  // The choice was not consumed, so it is still answerable.
  EXPECT_EQ(service.handle(choice_msg(id, opt))[0]["code"], "storage_error");
}

TEST(ServicePersistence, FileSinkReportsDeviceFull) {
  if (!std::filesystem::exists("/dev/full")) GTEST_SKIP() << "/dev/full unavailable";
  FileSink sink("/dev/full");
  EXPECT_THROW(sink.append("{\"x\":1}\n"), StorageError);
}

TEST(ServicePersistence, UnopenableSinkRejectsStart) {
  SessionService service(directory_sinks("/dev/null/not-a-dir"));
  service.add_pack(shipped_pack());
  auto out = service.handle(start_msg(1));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0]["code"], "storage_error");
  EXPECT_EQ(service.session_count(), 0u);
}

TEST(ServiceConcurrency, InterleavedSessionsMatchSerialRuns) {
  SessionService service;
  service.add_pack(shipped_pack());
  constexpr int kThreads = 8;
  std::vector<std::string> ids(kThreads);
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      const Level level = kAllLevels[static_cast<std::size_t>(t % 3)];
      auto out = service.handle(start_msg(static_cast<std::uint64_t>(500 + t), "random"));
      ids[static_cast<std::size_t>(t)] = out[0]["session"];
      while (out.back()["type"] != "end") {
        out = service.handle(choice_msg(ids[static_cast<std::size_t>(t)], pick(out, level)));
        std::this_thread::yield();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (int t = 0; t < kThreads; ++t) {
    auto serial = finish(static_cast<std::uint64_t>(500 + t), ProfileChoice::random,
                         kAllLevels[static_cast<std::size_t>(t % 3)]);
    EXPECT_EQ(*service.transcript(ids[static_cast<std::size_t>(t)]), serial.transcript()) << t;
  }
}

TEST(ServiceConcurrency, SecondInFlightMessageIsBusy) {
  // A sink that parks the first choice until released.
  std::mutex gate;
  std::unique_lock hold(gate);
  std::atomic<bool> parked{false};
  struct BlockingSink : TranscriptSink {
    std::mutex* gate;
    std::atomic<bool>* parked;
    int calls = 0;
    void append(const std::string&) override {
      if (calls++ != 1) return;
      *parked = true;
      std::lock_guard wait(*gate);
    }
  };
  SessionService service([&](const std::string&) {
    auto s = std::make_unique<BlockingSink>();
    s->gate = &gate;
    s->parked = &parked;
    return s;
  });
  service.add_pack(shipped_pack());
  auto out = service.handle(start_msg(8));
  const std::string id = out[0]["session"];
  const std::string opt = pick(out, Level::high);
  std::vector<json> first;
  std::thread t([&] { first = service.handle(choice_msg(id, opt)); });
  while (!parked) std::this_thread::yield();
  auto second = service.handle(choice_msg(id, opt));
  hold.unlock();
  t.join();
  ASSERT_EQ(second.size(), 1u);
  EXPECT_EQ(second[0]["code"], "busy");
  EXPECT_EQ(first[0]["type"], "utterance");
}

// --- WebSocket server ------------------------------------------------------

namespace {
namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

struct WsClient {
  net::io_context ioc;
  websocket::stream<tcp::socket> ws{ioc};

  explicit WsClient(unsigned short port, const std::string& target = "/session") {
    tcp::resolver resolver(ioc);
    net::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws.handshake("127.0.0.1", target);
  }
  void send(const json& j) { ws.write(net::buffer(j.dump())); }
  json receive() {
    beast::flat_buffer b;
    ws.read(b);
    EXPECT_TRUE(ws.got_text());
    return json::parse(beast::buffers_to_string(b.data()));
  }
  // Reads until a question (options non-empty), end or error.
  std::vector<json> burst() {
    std::vector<json> out;
    for (;;) {
      out.push_back(receive());
      const json& m = out.back();
      if (m["type"] != "utterance" || !m["options"].empty()) break;
      if (m["function"] == "goodbye") {
        out.push_back(receive());
        break;
      }
    }
    return out;
  }
};

std::pair<int, std::string> http_get(unsigned short port, const std::string& target) {
  net::io_context ioc;
  tcp::socket sock(ioc);
  tcp::resolver resolver(ioc);
  net::connect(sock, resolver.resolve("127.0.0.1", std::to_string(port)));
  http::request<http::empty_body> req{http::verb::get, target, 11};
  req.set(http::field::host, "127.0.0.1");
  http::write(sock, req);
  beast::flat_buffer b;
  http::response<http::string_body> res;
  http::read(sock, b, res);
  return {res.result_int(), res.body()};
}
}  // namespace

TEST(WsServer, FullSessionOverWebSocketMatchesRepl) {
  SessionService service;
  service.add_pack(shipped_pack());
  WsServer server(service, {"127.0.0.1", 0, {}});
  server.start();
  ASSERT_NE(server.port(), 0);

  WsClient client(server.port());
  client.send(start_msg(42));
  auto out = client.burst();
  EXPECT_EQ(out[0]["function"], "greeting_self_introduction");
  const std::string id = out[0]["session"];
  while (out.back()["type"] == "utterance") {
    client.send(choice_msg(id, pick(out, Level::low)));
    out = client.burst();
  }
  EXPECT_EQ(out.back()["type"], "end");
  EXPECT_EQ(*service.transcript(id), finish(42, ProfileChoice::open_minded, Level::low).transcript());

  client.send(json{{"type", "choice"}, {"session", id}, {"option", "x"}});
  EXPECT_EQ(client.receive()["code"], "stale_option");
  client.ws.close(websocket::close_code::normal);
  server.stop();
}

TEST(WsServer, ServesStaticFilesAndRejectsTraversal) {
  auto dir = temp_dir("static");
  {
    std::ofstream(dir / "index.html") << "<!doctype html><title>cogdial</title>";
    std::ofstream(dir / "app.js") << "console.log(1)";
  }
  SessionService service;
  WsServer server(service, {"127.0.0.1", 0, dir});
  server.start();
  auto [code, body] = http_get(server.port(), "/");
  EXPECT_EQ(code, 200);
  EXPECT_NE(body.find("cogdial"), std::string::npos);
  EXPECT_EQ(http_get(server.port(), "/app.js?v=1").first, 200);
  EXPECT_EQ(http_get(server.port(), "/missing.css").first, 404);
  EXPECT_EQ(http_get(server.port(), "/../etc/passwd").first, 404);
  EXPECT_THROW(WsClient(server.port(), "/other"), boost::system::system_error);
  server.stop();
  std::filesystem::remove_all(dir);
}

TEST(WsServer, StopClosesOpenConnections) {
  SessionService service;
  service.add_pack(shipped_pack());
  auto server = std::make_unique<WsServer>(service, WsServer::Options{"127.0.0.1", 0, {}});
  server->start();
  WsClient idle(server->port());
  server->stop();  // must return despite the idle connection
  beast::flat_buffer b;
  beast::error_code ec;
  idle.ws.read(b, ec);
  EXPECT_TRUE(ec);
}

TEST(StaticPath, Mapping) {
  EXPECT_EQ(static_path("/srv", "/"), std::filesystem::path("/srv/index.html"));
  EXPECT_EQ(static_path("/srv", "/a/b.js?x"), std::filesystem::path("/srv/a/b.js"));
  EXPECT_TRUE(static_path("/srv", "/../x").empty());
  EXPECT_TRUE(static_path("/srv", "/a/../../x").empty());
  EXPECT_TRUE(static_path("/srv", "relative").empty());
}
