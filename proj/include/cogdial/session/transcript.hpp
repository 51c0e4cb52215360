#pragma once

// JSON Lines transcripts: one header line, then one line per event.
//
//   {"transcript":"cogdial/1","pack":{"id":..,"version":..},"seed":N,
//    "profile_choice":"random","profile":"open_minded"}
//   {"seq":0,"direction":"agent","act":{...},"need":"social_affiliation","digest":"..."}
//   {"seq":1,"direction":"user","question":"contagion-knowledge","option":"low","digest":"..."}
//
// Session ids and wall-clock times are left out so that equal inputs give
// byte-identical files.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cogdial/dialogue/state.hpp"

namespace cogdial::session {

using nlohmann::json;

inline constexpr std::string_view kTranscriptFormat = "cogdial/1";

class TranscriptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StorageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TranscriptHeader {
  std::string pack_id;
  std::string pack_version;
  std::uint64_t seed = 0;
  ProfileChoice profile_choice = ProfileChoice::random;
  EthicalProfile profile = EthicalProfile::neutral;
  bool operator==(const TranscriptHeader&) const = default;
};

enum class Direction { agent, user };

struct TranscriptEntry {
  std::uint64_t seq = 0;
  Direction direction = Direction::agent;
  std::optional<dialogue::DialogueAct> act;  // agent
  std::string question;                      // user
  std::string option;                        // user
  std::string digest;
  bool operator==(const TranscriptEntry&) const = default;
};

struct Transcript {
  TranscriptHeader header;
  std::vector<TranscriptEntry> entries;
  bool operator==(const Transcript&) const = default;
};

inline json to_json(const TranscriptHeader& h) {
  return json{{"transcript", kTranscriptFormat},
              {"pack", {{"id", h.pack_id}, {"version", h.pack_version}}},
              {"seed", h.seed},
              {"profile_choice", to_string(h.profile_choice)},
              {"profile", to_string(h.profile)}};
}

inline json to_json(const TranscriptEntry& e) {
  json j{{"seq", e.seq}, {"direction", e.direction == Direction::agent ? "agent" : "user"}};
  if (e.direction == Direction::agent) {
    j["act"] = dialogue::to_json(*e.act);
    j["need"] = to_string(e.act->fulfils);
  } else {
    j["question"] = e.question;
    j["option"] = e.option;
  }
  j["digest"] = e.digest;
  return j;
}

inline std::string to_line(const json& j) { return j.dump() + "\n"; }

inline std::string to_jsonl(const Transcript& t) {
  std::string out = to_line(to_json(t.header));
  for (const auto& e : t.entries) out += to_line(to_json(e));
  return out;
}

inline TranscriptHeader header_from_json(const json& j) {
  if (j.value("transcript", "") != kTranscriptFormat) throw TranscriptError("not a cogdial transcript header");
  TranscriptHeader h;
  h.pack_id = j.at("pack").at("id").get<std::string>();
  h.pack_version = j.at("pack").at("version").get<std::string>();
  h.seed = j.at("seed").get<std::uint64_t>();
  auto choice = parse<ProfileChoice>(j.at("profile_choice").get<std::string>());
  auto profile = parse<EthicalProfile>(j.at("profile").get<std::string>());
  if (!choice || !profile) throw TranscriptError("bad profile in transcript header");
  h.profile_choice = *choice;
  h.profile = *profile;
  return h;
}

inline TranscriptEntry entry_from_json(const json& j) {
  TranscriptEntry e;
  e.seq = j.at("seq").get<std::uint64_t>();
  const std::string dir = j.at("direction").get<std::string>();
  if (dir == "agent") {
    e.direction = Direction::agent;
    e.act = dialogue::act_from_json(j.at("act"));
  } else if (dir == "user") {
    e.direction = Direction::user;
    e.question = j.at("question").get<std::string>();
    e.option = j.at("option").get<std::string>();
  } else {
    throw TranscriptError("bad direction '" + dir + "'");
  }
  e.digest = j.at("digest").get<std::string>();
  return e;
}

inline Transcript parse_transcript(std::string_view text) {
  Transcript t;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      if (!have_header) {
        t.header = header_from_json(j);
        have_header = true;
      } else {
        t.entries.push_back(entry_from_json(j));
      }
    } catch (const json::exception& e) {
      throw TranscriptError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw TranscriptError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const TranscriptError& e) {
      throw TranscriptError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header) throw TranscriptError("empty transcript");
  for (std::size_t i = 0; i < t.entries.size(); ++i) {
    if (t.entries[i].seq != i) throw TranscriptError("sequence gap at entry " + std::to_string(i));
  }
  return t;
}

inline Transcript read_transcript_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TranscriptError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_transcript(ss.str());
}

// Where transcript lines go. append() writes a batch of complete lines; on
// failure it throws StorageError and leaves previously written lines intact.
class TranscriptSink {
 public:
  virtual ~TranscriptSink() = default;
  virtual void append(const std::string& lines) = 0;
};

class FileSink : public TranscriptSink {
 public:
  explicit FileSink(std::filesystem::path path) : path_(std::move(path)) {
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) throw StorageError("cannot open transcript " + path_.string());
  }

  void append(const std::string& lines) override {
    const auto before = static_cast<std::uintmax_t>(out_.tellp());
    out_.write(lines.data(), static_cast<std::streamsize>(lines.size()));
    out_.flush();
    if (!out_) {
      // Drop the partial batch so the file still ends on a complete line.
      out_.close();
      std::error_code ec;
      std::filesystem::resize_file(path_, before, ec);
      out_.open(path_, std::ios::binary | std::ios::app);
      throw StorageError("write failed for transcript " + path_.string());
    }
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace cogdial::session
