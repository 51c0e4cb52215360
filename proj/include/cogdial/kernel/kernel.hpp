#pragma once

// Minimal production-system kernel: declarative memory, five single-chunk
// buffers and a match-select-fire cycle.
//
// Conflict resolution is static: the matching production with the highest
// priority fires, earlier declaration wins ties. Actions run in declaration
// order. Retrievals resolve immediately (no timing model); a failed
// retrieval leaves the retrieval buffer empty and sets retrieval_failed().

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cogdial/kernel/activation.hpp"
#include "cogdial/kernel/chunk.hpp"
#include "cogdial/kernel/production.hpp"
#include "cogdial/kernel/rng.hpp"

namespace cogdial::kernel {

class Buffer {
 public:
  explicit Buffer(BufferName name = BufferName::goal) : name_(name) {}

  BufferName name() const { return name_; }
  bool empty() const { return !content_.has_value(); }
  const std::optional<Chunk>& content() const { return content_; }
  Chunk* get() { return content_ ? &*content_ : nullptr; }
  const Chunk* get() const { return content_ ? &*content_ : nullptr; }

  void set(Chunk c) { content_ = std::move(c); }
  void clear() { content_.reset(); }

  bool operator==(const Buffer&) const = default;

 private:
  BufferName name_;
  std::optional<Chunk> content_;
};

// Chunks in insertion order; insertion order doubles as recency.
class DeclarativeMemory {
 public:
  void add(Chunk c) {
    validate(c);
    if (index_.contains(c.id)) throw ConfigError("duplicate chunk id " + c.id);
    index_.emplace(c.id, chunks_.size());
    chunks_.push_back(std::move(c));
  }

  const Chunk* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &chunks_[it->second];
  }

  std::span<const Chunk> chunks() const { return chunks_; }
  std::size_t size() const { return chunks_.size(); }

  bool operator==(const DeclarativeMemory& o) const { return chunks_ == o.chunks_; }

 private:
  std::vector<Chunk> chunks_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Directive {
  std::string name;
  Slots args;
  bool operator==(const Directive&) const = default;

  const std::string* symbol(const std::string& key) const {
    auto it = args.find(key);
    return it == args.end() ? nullptr : std::get_if<std::string>(&it->second);
  }
};

struct StepResult {
  std::optional<std::string> fired;  // empty when quiescent
  std::vector<Directive> directives;

  bool quiescent() const { return !fired.has_value(); }
};

class KernelState {
 public:
  explicit KernelState(std::uint64_t seed = 0, ActivationParams params = {})
      : params_(std::move(params)), rng_(seed) {
    validate(params_);
    for (std::size_t i = 0; i < buffers_.size(); ++i) buffers_[i] = Buffer(kAllBuffers[i]);
  }

  KernelState(Rng rng, ActivationParams params) : params_(std::move(params)), rng_(std::move(rng)) {
    validate(params_);
    for (std::size_t i = 0; i < buffers_.size(); ++i) buffers_[i] = Buffer(kAllBuffers[i]);
  }

  DeclarativeMemory& memory() { return memory_; }
  const DeclarativeMemory& memory() const { return memory_; }

  Buffer& buffer(BufferName b) { return buffers_[static_cast<std::size_t>(b)]; }
  const Buffer& buffer(BufferName b) const { return buffers_[static_cast<std::size_t>(b)]; }

  void add_production(Production p) {
    validate(p);
    for (const auto& existing : productions_) {
      if (existing.name == p.name) throw ConfigError("duplicate production name " + p.name);
    }
    productions_.push_back(std::move(p));
  }
  const std::vector<Production>& productions() const { return productions_; }

  const ActivationParams& params() const { return params_; }
  Rng& rng() { return rng_; }
  const Rng& rng() const { return rng_; }

  bool retrieval_failed() const { return retrieval_failed_; }
  std::uint64_t cycles() const { return cycles_; }

  // Fresh id for chunks created by set actions.
  std::string next_chunk_id(BufferName b) {
    return std::string(to_string(b)) + "-" + std::to_string(created_++);
  }

  std::optional<Retrieved> retrieve(const RetrievalRequest& request) {
    return kernel::retrieve(request, memory_.chunks(), buffer(BufferName::goal).get(), params_, rng_);
  }

  bool operator==(const KernelState& o) const {
    return memory_ == o.memory_ && buffers_ == o.buffers_ && productions_ == o.productions_ &&
           params_ == o.params_ && rng_ == o.rng_ && retrieval_failed_ == o.retrieval_failed_ &&
           created_ == o.created_ && cycles_ == o.cycles_;
  }

 private:
  friend StepResult step(KernelState& state);

  DeclarativeMemory memory_;
  std::array<Buffer, kAllBuffers.size()> buffers_;
  std::vector<Production> productions_;
  ActivationParams params_;
  Rng rng_;
  bool retrieval_failed_ = false;
  std::uint64_t created_ = 0;
  std::uint64_t cycles_ = 0;
};

// Tries to match all conditions of `p` against current buffer contents.
inline std::optional<Bindings> match(const Production& p, const KernelState& state) {
  Bindings bindings;
  for (const auto& c : p.conditions) {
    const Chunk* chunk = state.buffer(c.buffer).get();
    if (c.require_empty) {
      if (chunk != nullptr) return std::nullopt;
      continue;
    }
    if (chunk == nullptr || chunk->chunk_type != c.chunk_type) return std::nullopt;
    if (!match_slots(c.slots, *chunk, bindings)) return std::nullopt;
  }
  return bindings;
}

inline StepResult step(KernelState& state) {
  const Production* selected = nullptr;
  Bindings bindings;
  for (const auto& p : state.productions_) {
    if (selected != nullptr && p.priority <= selected->priority) continue;
    if (auto b = match(p, state)) {
      selected = &p;
      bindings = std::move(*b);
    }
  }
  StepResult result;
  if (selected == nullptr) return result;

  ++state.cycles_;
  result.fired = selected->name;
  for (const auto& action : selected->actions) {
    std::visit(
        [&](const auto& a) {
          using A = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<A, SetAction>) {
            state.buffer(a.buffer).set(Chunk{state.next_chunk_id(a.buffer), a.chunk_type,
                                             resolve(a.slots, bindings), 0.0});
          } else if constexpr (std::is_same_v<A, ModifyAction>) {
            // validate() guarantees a condition tested this buffer, but an
            // earlier action in the same production may have cleared it.
            if (Chunk* c = state.buffer(a.buffer).get()) {
              for (auto& [name, value] : resolve(a.slots, bindings)) c->slots[name] = std::move(value);
            }
          } else if constexpr (std::is_same_v<A, ClearAction>) {
            state.buffer(a.buffer).clear();
          } else if constexpr (std::is_same_v<A, RetrieveAction>) {
            RetrievalRequest request{a.chunk_type, resolve(a.slots, bindings)};
            auto hit = state.retrieve(request);
            if (hit) {
              state.buffer(BufferName::retrieval).set(state.memory_.chunks()[hit->index]);
              state.retrieval_failed_ = false;
            } else {
              state.buffer(BufferName::retrieval).clear();
              state.retrieval_failed_ = true;
            }
          } else {
            result.directives.push_back(Directive{a.directive, resolve(a.args, bindings)});
          }
        },
        action);
  }
  return result;
}

}  // namespace cogdial::kernel
