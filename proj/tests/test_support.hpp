#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cogdial/pack/content_pack.hpp"

namespace testing_support {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::shared_ptr<const cogdial::pack::ContentPack> shipped_pack() {
  static const auto pack =
      std::make_shared<const cogdial::pack::ContentPack>(cogdial::pack::load_pack_file(COGDIAL_PACK));
  return pack;
}

struct BrokenPack {
  std::string name;
  std::string document;
  std::string expect;  // substring of the diagnostic
};

// The broken-pack corpus: JSON patches applied to the shipped pack, plus raw documents.
inline std::vector<BrokenPack> broken_packs() {
  auto manifest = nlohmann::json::parse(read_file(std::string(COGDIAL_TEST_DATA) + "/broken_packs.json"));
  auto base = nlohmann::json::parse(read_file(COGDIAL_PACK));
  std::vector<BrokenPack> out;
  for (const auto& c : manifest.at("cases")) {
    BrokenPack b{c.at("name"), {}, c.at("expect")};
    if (c.contains("raw")) b.document = c.at("raw").get<std::string>();
    else b.document = base.patch(c.at("patch")).dump(2);
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace testing_support
