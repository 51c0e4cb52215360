#pragma once

#include <cmath>
#include <compare>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>

namespace cogdial::kernel {

// Raised when kernel configuration (chunks, productions, parameters) is
// malformed. Always detected at load time, never while stepping.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ChunkRef {
  std::string id;
  auto operator<=>(const ChunkRef&) const = default;
};

// A slot value: a symbol, a number, or a reference to another chunk.
using Value = std::variant<std::string, double, ChunkRef>;

inline std::string to_string(const Value& v) {
  if (auto* s = std::get_if<std::string>(&v)) return *s;
  if (auto* d = std::get_if<double>(&v)) return std::to_string(*d);
  return "@" + std::get<ChunkRef>(v).id;
}

using Slots = std::map<std::string, Value>;

// Typed attribute-value fact. Slot names are unique by construction (map keys).
struct Chunk {
  std::string id;
  std::string chunk_type;
  Slots slots;
  double base_activation = 0.0;

  bool operator==(const Chunk&) const = default;

  const Value* slot(const std::string& name) const {
    auto it = slots.find(name);
    return it == slots.end() ? nullptr : &it->second;
  }

  const std::string* symbol(const std::string& name) const {
    const Value* v = slot(name);
    return v ? std::get_if<std::string>(v) : nullptr;
  }
};

inline void validate(const Chunk& c) {
  if (c.id.empty()) throw ConfigError("chunk with empty id");
  if (c.chunk_type.empty()) throw ConfigError("chunk " + c.id + ": empty chunk type");
  if (!std::isfinite(c.base_activation))
    throw ConfigError("chunk " + c.id + ": base activation is not finite");
  for (const auto& [name, value] : c.slots) {
    if (name.empty()) throw ConfigError("chunk " + c.id + ": empty slot name");
    if (auto* d = std::get_if<double>(&value); d && !std::isfinite(*d))
      throw ConfigError("chunk " + c.id + ": slot " + name + " is not finite");
  }
}

}  // namespace cogdial::kernel
