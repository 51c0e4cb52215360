// cogdial: serve, repl, pack check, simulate, replay.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cogdial/session/conversation.hpp"
#include "cogdial/session/service.hpp"
#include "cogdial/session/ws_server.hpp"
#include "cogdial/sim/harness.hpp"

namespace {

using namespace cogdial;

std::shared_ptr<const pack::ContentPack> load(const std::string& path) {
  return std::make_shared<const pack::ContentPack>(pack::load_pack_file(path));
}

// Flags win over the environment, which wins over the built-in default.
template <class T>
T from_env(const char* name, T fallback) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return fallback;
  if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else {
    return static_cast<T>(std::stoul(v));
  }
}

int cmd_pack_check(const std::string& file) {
  try {
    auto p = pack::load_pack_file(file);
    std::size_t templates = 0, questions = 0;
    for (const auto& s : p.scenes) {
      templates += s.templates.size();
      questions += s.questions.size();
    }
    std::cout << "ok: " << p.info.id << " " << p.info.version << ", " << p.scenes.size() << " scenes, "
              << questions << " questions, " << templates << " templates\n";
    return 0;
  } catch (const pack::PackError& e) {
    std::cerr << file << ": " << e.what() << "\n";
    return 1;
  }
}

void print_entry(std::ostream& out, const session::TranscriptEntry& e, const pack::ContentPack& p) {
  if (!e.act) return;
  const auto& a = *e.act;
  out << "agent> " << a.utterance << "\n";
  if (a.question) {
    const auto* q = p.question(*a.question)->question;
    for (std::size_t i = 0; i < q->options.size(); ++i)
      out << "  " << i + 1 << ") " << q->options[i].label << "  [" << q->options[i].id << "]\n";
  }
}

int cmd_repl(const std::string& pack_file, std::uint64_t seed, const std::string& profile,
             const std::string& transcript_file, bool verbose) {
  auto p = load(pack_file);
  auto choice = parse<ProfileChoice>(profile);
  if (!choice) {
    std::cerr << "unknown profile '" << profile << "'\n";
    return 2;
  }
  session::Conversation c(p, *choice, seed);
  auto show = [&](const std::vector<session::TranscriptEntry>& entries) {
    for (const auto& e : entries) {
      if (verbose && e.act)
        std::cout << "      (" << to_string(e.act->function) << ", need " << to_string(e.act->fulfils)
                  << (e.act->technique ? ", " + std::string(to_string(*e.act->technique)) : "") << ")\n";
      print_entry(std::cout, e, *p);
    }
  };
  show(c.start());
  std::string line;
  while (!c.complete()) {
    std::cout << "you> " << std::flush;
    if (!std::getline(std::cin, line) || line == "quit" || line == "exit") {
      std::cout << "\nsession left unfinished\n";
      break;
    }
    const pack::QuestionSpec* q = c.pending_question();
    std::string option = line;
    try {
      std::size_t used = 0;
      const unsigned long n = std::stoul(line, &used);
      if (used == line.size() && n >= 1 && n <= q->options.size()) option = q->options[n - 1].id;
    } catch (const std::exception&) {
    }
    try {
      show(c.choose(option));
    } catch (const dialogue::ProtocolError& e) {
      std::cout << "  (" << e.what() << "; answer with a number or an option id)\n";
    }
  }
  if (c.complete()) {
    std::cout << "-- end of session; final levels --\n";
    for (const auto& [topic, t] : c.state().topic_states)
      std::cout << "  " << topic << ": knowledge " << to_string(t.knowledge) << ", intention "
                << to_string(t.intention) << "\n";
  }
  if (!transcript_file.empty()) {
    std::ofstream out(transcript_file, std::ios::binary);
    out << session::to_jsonl(c.transcript());
    if (!out) {
      std::cerr << "cannot write " << transcript_file << "\n";
      return 1;
    }
  }
  return c.complete() ? 0 : 1;
}

int cmd_serve(const std::string& pack_file, std::string address, unsigned port, std::string transcripts,
              std::string static_dir) {
  auto p = load(pack_file);
  session::SinkFactory sinks;
  if (!transcripts.empty()) sinks = session::directory_sinks(transcripts);
  session::SessionService service(sinks);
  service.add_pack(p);

  // Block the stop signals before any thread starts so only sigwait sees them.
  sigset_t stop;
  sigemptyset(&stop);
  sigaddset(&stop, SIGINT);
  sigaddset(&stop, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop, nullptr);

  session::WsServer server(service, {address, static_cast<unsigned short>(port), static_dir});
  server.start();
  std::cout << "cogdial serving pack " << p->info.id << " " << p->info.version << " on ws://" << address << ":"
            << server.port() << "/session" << std::endl;
  if (!static_dir.empty()) std::cout << "static files from " << static_dir << std::endl;
  if (!transcripts.empty()) std::cout << "transcripts in " << transcripts << std::endl;
  int sig = 0;
  sigwait(&stop, &sig);
  std::cout << "stopping" << std::endl;
  server.stop();
  return 0;
}

int cmd_simulate(const std::string& pack_file, const std::string& profiles, std::uint64_t runs, std::uint64_t seed,
                 const std::string& report_file, const std::string& ethics) {
  auto p = load(pack_file);
  auto mix = sim::load_mix_file(profiles);
  if (!ethics.empty()) {
    auto e = parse<ProfileChoice>(ethics);
    if (!e) {
      std::cerr << "unknown ethics '" << ethics << "'\n";
      return 2;
    }
    mix.ethics = *e;
  }
  auto report = sim::run_batch(p, mix, runs, seed);
  std::cout << sim::summary_table(report);
  if (!report_file.empty()) {
    std::ofstream out(report_file);
    out << sim::to_json(report).dump(2) << "\n";
    if (!out) {
      std::cerr << "cannot write " << report_file << "\n";
      return 1;
    }
  }
  return report.violation_count == 0 ? 0 : 1;
}

int cmd_replay(const std::string& pack_file, const std::string& transcript_file) {
  auto p = load(pack_file);
  auto t = session::read_transcript_file(transcript_file);
  auto r = session::replay(p, t);
  if (!r.ok) {
    std::cerr << "replay mismatch: " << r.mismatch << "\n";
    return 1;
  }
  std::cout << "replay ok: " << r.entries_checked << " entries, digests match\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cogdial: needs-driven persuasive dialogue engine"};
  app.require_subcommand(1);

  std::string pack_file;
  std::string address = "127.0.0.1";
  unsigned port = 0;
  std::string transcripts, static_dir;
  auto* serve = app.add_subcommand("serve", "run the WebSocket service (COGDIAL_PORT, COGDIAL_TRANSCRIPTS)");
  serve->add_option("--pack", pack_file, "content pack file")->required()->check(CLI::ExistingFile);
  serve->add_option("--port", port, "TCP port (0 = ephemeral)");
  serve->add_option("--address", address, "bind address");
  serve->add_option("--transcripts", transcripts, "directory for JSONL transcripts");
  serve->add_option("--static", static_dir, "directory served under /")->check(CLI::ExistingDirectory);

  std::uint64_t seed = 0;
  std::string profile = "random";
  std::string transcript_out;
  bool verbose = false;
  auto* repl = app.add_subcommand("repl", "terminal dialogue on stdin/stdout");
  repl->add_option("--pack", pack_file, "content pack file")->required()->check(CLI::ExistingFile);
  repl->add_option("--seed", seed, "session seed");
  repl->add_option("--profile", profile, "open_minded, neutral or random");
  repl->add_option("--transcript", transcript_out, "write the JSONL transcript here");
  repl->add_flag("-v,--verbose", verbose, "show function, need and technique of each act");

  auto* pack_cmd = app.add_subcommand("pack", "content pack tools");
  pack_cmd->require_subcommand(1);
  std::string check_file;
  auto* check = pack_cmd->add_subcommand("check", "validate a pack file");
  check->add_option("file", check_file, "pack file")->required();

  std::string profiles, report_file, ethics;
  std::uint64_t runs = 1000;
  auto* simulate = app.add_subcommand("simulate", "run scripted-user sessions and check invariants");
  simulate->add_option("--pack", pack_file, "content pack file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--profiles", profiles, "profile or profile-mix file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--runs", runs, "number of sessions")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "seed base");
  simulate->add_option("--report", report_file, "write the JSON report here");
  simulate->add_option("--ethics", ethics, "override the mix's agent ethics");

  std::string replay_file;
  auto* replay = app.add_subcommand("replay", "re-run a transcript and compare state digests");
  replay->add_option("--pack", pack_file, "content pack file")->required()->check(CLI::ExistingFile);
  replay->add_option("transcript", replay_file, "JSONL transcript")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      if (serve->count("--port") == 0) port = from_env("COGDIAL_PORT", 8080u);
      if (serve->count("--transcripts") == 0) transcripts = from_env<std::string>("COGDIAL_TRANSCRIPTS", "");
      return cmd_serve(pack_file, address, port, transcripts, static_dir);
    }
    if (*repl) return cmd_repl(pack_file, seed, profile, transcript_out, verbose);
    if (*check) return cmd_pack_check(check_file);
    if (*simulate) return cmd_simulate(pack_file, profiles, runs, seed, report_file, ethics);
    if (*replay) return cmd_replay(pack_file, replay_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
