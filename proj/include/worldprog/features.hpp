#ifndef WORLDPROG_FEATURES_HPP_
#define WORLDPROG_FEATURES_HPP_

#include <cstdint>
#include <utility>
#include <vector>

#include "worldprog/graph.hpp"

namespace wp {

/// Hashed neighborhood fingerprint settings: `radius` refinement iterations
/// into `bits` count buckets.
struct FeatureConfig {
  int radius = 2;
  int bits = 2048;

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

/// Seed of the iteration-0 vertex hash. Part of the model file contract.
inline constexpr std::uint64_t kFingerprintSeed = 0x5745524c44505247ULL;

struct Fingerprint {
  int radius = 0;
  std::vector<std::uint32_t> counts;
};

/// Every vertex code of every iteration 0..radius increments bucket
/// `code % bits`. Iteration 0 hashes the vertex label; iteration k hashes the
/// previous code with the sorted (edge label, neighbor code) pairs.
Fingerprint fingerprint_graph(const LabeledGraph& g, int radius, int bits);
Fingerprint fingerprint_graph(const LabeledGraph& g, const FeatureConfig& config);

/// Elementwise sum of member fingerprints.
Fingerprint fingerprint_state(const State& s, int radius, int bits);
Fingerprint fingerprint_state(const State& s, const FeatureConfig& config);

/// Nonzero entries as (bucket, log1p(count)), sorted by bucket. This is the
/// input representation of both linear models.
using SparseFeatures = std::vector<std::pair<std::uint32_t, double>>;

SparseFeatures state_features(const State& s, const FeatureConfig& config);

}  // namespace wp

#endif  // WORLDPROG_FEATURES_HPP_
