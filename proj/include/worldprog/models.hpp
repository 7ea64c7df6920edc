#ifndef WORLDPROG_MODELS_HPP_
#define WORLDPROG_MODELS_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "worldprog/features.hpp"
#include "worldprog/graph.hpp"
#include "worldprog/induction.hpp"

namespace wp {

struct TrainingHyper {
  int epochs = 20;
  double step = 0.1;
  double l2 = 1e-4;
  int batch = 32;
  std::uint64_t seed = 0;
};

/// Multinomial logistic regression over state features: the prior over
/// rules in a state.
class PolicyModel {
 public:
  PolicyModel() = default;
  PolicyModel(FeatureConfig config, std::size_t classes, std::uint64_t library_hash);

  const FeatureConfig& config() const noexcept { return config_; }
  std::size_t classes() const noexcept { return bias_.size(); }
  std::uint64_t library_hash() const noexcept { return library_hash_; }

  /// Row-major classes x bits.
  std::vector<double>& weights() noexcept { return weights_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::vector<double>& bias() noexcept { return bias_; }
  const std::vector<double>& bias() const noexcept { return bias_; }

  std::vector<double> scores(const SparseFeatures& x) const;

 private:
  FeatureConfig config_;
  std::vector<double> weights_;
  std::vector<double> bias_;
  std::uint64_t library_hash_ = 0;
};

struct PolicyExample {
  State state;
  std::size_t label = 0;
};

struct EncodedExample {
  SparseFeatures x;
  std::size_t label = 0;
};

/// Pairs each labeled observation's before-state with its rule ordinal.
std::vector<PolicyExample> policy_examples(const std::vector<Observation>& observations,
                                           const std::vector<std::optional<std::size_t>>& labels);

std::vector<EncodedExample> encode_policy_examples(std::span<const PolicyExample> examples,
                                                   const FeatureConfig& config);

/// Mean cross-entropy plus (l2/2)·|W|² (bias unregularized). When `gradient`
/// is non-null it receives d(objective)/d(parameters) in model layout.
double policy_objective(const PolicyModel& model, std::span<const EncodedExample> data, double l2,
                        PolicyModel* gradient = nullptr);

/// Mini-batch gradient descent from zero weights. Throws ModelError for
/// fewer than two rules, empty data or out-of-range labels.
PolicyModel train_policy(const ActionLibrary& library, std::span<const PolicyExample> examples,
                         const TrainingHyper& hyper, const FeatureConfig& config = {});

std::vector<double> policy_distribution(const PolicyModel& model, const State& state);
std::vector<double> policy_distribution(const PolicyModel& model, const SparseFeatures& x);

struct RankedRule {
  std::size_t ordinal = 0;
  double prob = 0.0;
};

/// Shortest probability-descending prefix reaching `mass`, cut at `k_max`.
/// Ties are broken by ordinal. Throws PreconditionError unless 0 < mass < 1.
std::vector<RankedRule> policy_topk(std::span<const double> probs, double mass = 0.99,
                                    std::size_t k_max = 50);
std::vector<RankedRule> policy_topk(const PolicyModel& model, const State& state,
                                    double mass = 0.99, std::size_t k_max = 50);

/// Logistic classifier on [phi(s) ; phi(s') - phi(s)] scoring whether a
/// transition is consistent with the observed dynamics.
class TransitionModel {
 public:
  TransitionModel() = default;
  TransitionModel(FeatureConfig config, std::uint64_t library_hash, double threshold = 0.5);

  const FeatureConfig& config() const noexcept { return config_; }
  std::uint64_t library_hash() const noexcept { return library_hash_; }
  double threshold() const noexcept { return threshold_; }
  void set_threshold(double tau);

  /// Length 2 * bits.
  std::vector<double>& weights() noexcept { return weights_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double& bias() noexcept { return bias_; }
  double bias() const noexcept { return bias_; }

  double probability(const SparseFeatures& x) const;

 private:
  FeatureConfig config_;
  std::vector<double> weights_;
  double bias_ = 0.0;
  double threshold_ = 0.5;
  std::uint64_t library_hash_ = 0;
};

struct TransitionExample {
  State before;
  State after;
  int label = 0;  // 1 = observed, 0 = generated counterfactual
};

/// Positives are the observations; for each, `neg_per_pos` attempts draw a
/// rule uniformly and one of its applications uniformly, keeping successors
/// that differ from the observed one.
std::vector<TransitionExample> make_transition_dataset(const ActionLibrary& library,
                                                       const std::vector<Observation>& observations,
                                                       int neg_per_pos, std::uint64_t seed);

/// Sparse concatenation [phi(s) ; phi(s') - phi(s)].
SparseFeatures transition_features(const State& before, const State& after,
                                   const FeatureConfig& config);
SparseFeatures transition_features(const SparseFeatures& before, const SparseFeatures& after,
                                   const FeatureConfig& config);

struct EncodedBinaryExample {
  SparseFeatures x;
  int label = 0;
};

std::vector<EncodedBinaryExample> encode_transition_examples(
    std::span<const TransitionExample> examples, const FeatureConfig& config);

/// Mean logistic loss plus (l2/2)·|w|².
double transition_objective(const TransitionModel& model, std::span<const EncodedBinaryExample> data,
                            double l2, TransitionModel* gradient = nullptr);

/// Throws ModelError unless both classes are present.
TransitionModel train_transition(std::span<const TransitionExample> examples,
                                 const TrainingHyper& hyper, const FeatureConfig& config = {},
                                 std::uint64_t library_hash = 0);

double score_transition(const TransitionModel& model, const State& before, const State& after);

// Binary model files: versioned header, then little-endian float64 arrays.
void write_policy(std::ostream& out, const PolicyModel& model);
PolicyModel read_policy(std::istream& in, const std::string& name = "<policy>");
void write_transition(std::ostream& out, const TransitionModel& model);
TransitionModel read_transition(std::istream& in, const std::string& name = "<transition>");

}  // namespace wp

#endif  // WORLDPROG_MODELS_HPP_
