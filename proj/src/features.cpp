#include "worldprog/features.hpp"

#include <algorithm>
#include <cmath>

#include "worldprog/errors.hpp"
#include "worldprog/hash.hpp"

namespace wp {
namespace {

void check(int radius, int bits) {
  if (bits < 16) throw PreconditionError("fingerprint needs at least 16 buckets");
  if (radius < 0) throw PreconditionError("fingerprint radius must be >= 0");
}

void accumulate(const LabeledGraph& g, int radius, int bits, std::vector<std::uint32_t>& counts) {
  const int n = g.vertex_count();
  std::vector<std::uint64_t> code(n);
  std::vector<std::uint64_t> next(n);
  for (int v = 0; v < n; ++v) {
    code[v] = hash_combine(kFingerprintSeed, g.vertex_label(v).key());
    ++counts[code[v] % static_cast<std::uint64_t>(bits)];
  }
  std::vector<std::uint64_t> env;
  for (int it = 1; it <= radius; ++it) {
    for (int v = 0; v < n; ++v) {
      env.clear();
      for (const Neighbor& nb : g.neighbors(v)) {
        env.push_back(hash_combine(nb.label.key(), code[nb.vertex]));
      }
      std::sort(env.begin(), env.end());
      std::uint64_t h = hash_combine(code[v], static_cast<std::uint64_t>(it));
      for (std::uint64_t e : env) h = hash_combine(h, e);
      next[v] = h;
      ++counts[h % static_cast<std::uint64_t>(bits)];
    }
    code.swap(next);
  }
}

}  // namespace

Fingerprint fingerprint_graph(const LabeledGraph& g, int radius, int bits) {
  check(radius, bits);
  Fingerprint fp{radius, std::vector<std::uint32_t>(bits, 0)};
  accumulate(g, radius, bits, fp.counts);
  return fp;
}

Fingerprint fingerprint_graph(const LabeledGraph& g, const FeatureConfig& config) {
  return fingerprint_graph(g, config.radius, config.bits);
}

Fingerprint fingerprint_state(const State& s, int radius, int bits) {
  check(radius, bits);
  Fingerprint fp{radius, std::vector<std::uint32_t>(bits, 0)};
  for (const auto& g : s.graphs()) accumulate(g, radius, bits, fp.counts);
  return fp;
}

Fingerprint fingerprint_state(const State& s, const FeatureConfig& config) {
  return fingerprint_state(s, config.radius, config.bits);
}

SparseFeatures state_features(const State& s, const FeatureConfig& config) {
  const Fingerprint fp = fingerprint_state(s, config);
  SparseFeatures out;
  for (std::size_t i = 0; i < fp.counts.size(); ++i) {
    if (fp.counts[i] != 0) out.emplace_back(static_cast<std::uint32_t>(i), std::log1p(fp.counts[i]));
  }
  return out;
}

}  // namespace wp
