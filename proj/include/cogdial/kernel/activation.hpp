#pragma once

// Activation-based retrieval from declarative memory.
//
//   A_i = B_i + sum_j W_j * S_ji + e
//
// Sources j are the chunk-valued slots of the goal chunk. The source budget
// is split evenly, W_j = source_weight_total / n_sources. S_ji comes from an
// explicit association table (absent pairs contribute 0). The noise term e is
// zero-mean logistic with scale noise_scale, and exactly 0 when the scale is 0
// (no draw is consumed in that case).

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "cogdial/kernel/chunk.hpp"
#include "cogdial/kernel/rng.hpp"

namespace cogdial::kernel {

struct ActivationParams {
  double source_weight_total = 1.0;
  // (source chunk id, target chunk id) -> S_ji
  std::map<std::pair<std::string, std::string>, double> association_strengths;
  double noise_scale = 0.0;
  double retrieval_threshold = -std::numeric_limits<double>::infinity();

  bool operator==(const ActivationParams&) const = default;

  double association(const std::string& source, const std::string& target) const {
    auto it = association_strengths.find({source, target});
    return it == association_strengths.end() ? 0.0 : it->second;
  }
};

inline void validate(const ActivationParams& p) {
  if (!std::isfinite(p.source_weight_total) || p.source_weight_total < 0.0)
    throw ConfigError("source_weight_total must be finite and >= 0");
  if (!std::isfinite(p.noise_scale) || p.noise_scale < 0.0)
    throw ConfigError("noise_scale must be finite and >= 0");
  if (std::isnan(p.retrieval_threshold)) throw ConfigError("retrieval_threshold is NaN");
  for (const auto& [key, s] : p.association_strengths) {
    if (!std::isfinite(s))
      throw ConfigError("association " + key.first + " -> " + key.second + " is not finite");
  }
}

// Spreading term sum_j W_j S_ji. A null goal means no sources.
inline double spreading_activation(const Chunk& chunk, const Chunk* goal,
                                   const ActivationParams& params) {
  if (goal == nullptr) return 0.0;
  std::size_t n_sources = 0;
  for (const auto& [name, value] : goal->slots) {
    if (std::holds_alternative<ChunkRef>(value)) ++n_sources;
  }
  if (n_sources == 0) return 0.0;
  const double weight = params.source_weight_total / static_cast<double>(n_sources);
  double sum = 0.0;
  for (const auto& [name, value] : goal->slots) {
    if (auto* ref = std::get_if<ChunkRef>(&value)) sum += weight * params.association(ref->id, chunk.id);
  }
  return sum;
}

inline double activation(const Chunk& chunk, const Chunk* goal, const ActivationParams& params,
                         Rng& rng) {
  return chunk.base_activation + spreading_activation(chunk, goal, params) +
         rng.logistic(params.noise_scale);
}

inline double activation(const Chunk& chunk, const Chunk& goal, const ActivationParams& params,
                         Rng& rng) {
  return activation(chunk, &goal, params, rng);
}

// Type + slot constraints for a retrieval. Constraints are exact equality.
struct RetrievalRequest {
  std::string chunk_type;
  Slots slots;

  bool matches(const Chunk& c) const {
    if (c.chunk_type != chunk_type) return false;
    for (const auto& [name, value] : slots) {
      const Value* v = c.slot(name);
      if (v == nullptr || *v != value) return false;
    }
    return true;
  }
};

struct Retrieved {
  std::size_t index;  // position in the memory span
  double activation;
};

// Highest-activation matching chunk. Ties go to the most recently added
// chunk (the later position). std::nullopt is the retrieval failure.
inline std::optional<Retrieved> retrieve(const RetrievalRequest& request,
                                         std::span<const Chunk> memory, const Chunk* goal,
                                         const ActivationParams& params, Rng& rng) {
  std::optional<Retrieved> best;
  for (std::size_t i = 0; i < memory.size(); ++i) {
    if (!request.matches(memory[i])) continue;
    double a = activation(memory[i], goal, params, rng);
    if (!best || a >= best->activation) best = Retrieved{i, a};
  }
  if (best && best->activation < params.retrieval_threshold) return std::nullopt;
  return best;
}

}  // namespace cogdial::kernel
