#pragma once

// Test-only oracles. These recompute activations straight from the
// generated inputs (source list, strength table) without going through the
// goal chunk or ActivationParams lookups used by the kernel.

#include <cstddef>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cogdial/kernel/activation.hpp"

namespace oracle {

struct RandomMemory {
  std::vector<cogdial::kernel::Chunk> chunks;    // all of type "fact"
  std::vector<std::string> sources;              // source chunk ids in goal order
  double weight_total = 1.0;
  std::vector<std::pair<std::pair<std::string, std::string>, double>> strengths;

  cogdial::kernel::ActivationParams params() const {
    cogdial::kernel::ActivationParams p;
    p.source_weight_total = weight_total;
    for (const auto& [key, s] : strengths) p.association_strengths[key] = s;
    return p;
  }

  cogdial::kernel::Chunk goal() const {
    cogdial::kernel::Chunk g{"goal", "goal", {}, 0.0};
    for (std::size_t i = 0; i < sources.size(); ++i)
      g.slots["s" + std::to_string(i)] = cogdial::kernel::ChunkRef{sources[i]};
    g.slots["mode"] = std::string("probe");
    return g;
  }
};

// Up to max_chunks chunks, up to max_sources sources, random sparse strengths.
inline RandomMemory random_memory(std::mt19937_64& gen, int max_chunks, int max_sources, int min_chunks = 0) {
  std::uniform_int_distribution<int> n_chunks(min_chunks, max_chunks);
  std::uniform_int_distribution<int> n_sources(0, max_sources);
  std::uniform_real_distribution<double> base(-2.0, 2.0);
  std::uniform_real_distribution<double> strength(-1.0, 3.0);
  std::uniform_real_distribution<double> weight(0.0, 2.0);
  std::bernoulli_distribution present(0.6);

  RandomMemory m;
  m.weight_total = weight(gen);
  int nc = n_chunks(gen);
  for (int i = 0; i < nc; ++i) m.chunks.push_back({"c" + std::to_string(i), "fact", {}, base(gen)});
  int ns = n_sources(gen);
  for (int j = 0; j < ns; ++j) m.sources.push_back("src" + std::to_string(j));
  for (const auto& src : m.sources) {
    for (const auto& c : m.chunks) {
      if (present(gen)) m.strengths.push_back({{src, c.id}, strength(gen)});
    }
  }
  return m;
}

inline double activation_sum(double base, const std::string& target, const std::vector<std::string>& sources,
                             double weight_total,
                             const std::vector<std::pair<std::pair<std::string, std::string>, double>>& strengths) {
  double total = base;
  if (sources.empty()) return total;
  double w = weight_total / static_cast<double>(sources.size());
  for (const auto& src : sources) {
    for (const auto& [key, s] : strengths) {
      if (key.first == src && key.second == target) total += w * s;
    }
  }
  return total;
}

inline double oracle_activation(const RandomMemory& m, std::size_t i) {
  return activation_sum(m.chunks[i].base_activation, m.chunks[i].id, m.sources, m.weight_total, m.strengths);
}

// Index of the winning chunk: max activation, latest position on ties.
inline std::optional<std::size_t> brute_force_argmax(const RandomMemory& m) {
  std::optional<std::size_t> best;
  double best_a = 0.0;
  for (std::size_t i = 0; i < m.chunks.size(); ++i) {
    double a = oracle_activation(m, i);
    if (!best || a >= best_a) {
      best = i;
      best_a = a;
    }
  }
  return best;
}

}  // namespace oracle
