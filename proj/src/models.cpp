#include "worldprog/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "worldprog/canonical.hpp"
#include "worldprog/errors.hpp"
#include "worldprog/rng.hpp"

namespace wp {
namespace {

constexpr std::uint32_t kModelVersion = 1;
constexpr char kPolicyMagic[8] = {'W', 'P', 'P', 'O', 'L', 'I', 'C', 'Y'};
constexpr char kTransitionMagic[8] = {'W', 'P', 'T', 'R', 'A', 'N', 'S', 'N'};
constexpr std::size_t kNegativeApplicationCap = 64;

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void softmax_inplace(std::vector<double>& s) {
  const double m = *std::max_element(s.begin(), s.end());
  double total = 0.0;
  for (double& v : s) {
    v = std::exp(v - m);
    total += v;
  }
  for (double& v : s) v /= total;
}

double sparse_dot(const double* w, const SparseFeatures& x) {
  double acc = 0.0;
  for (const auto& [j, v] : x) acc += w[j] * v;
  return acc;
}

void check_features(const SparseFeatures& x, std::size_t dims) {
  if (!x.empty() && x.back().first >= dims) throw ModelError("feature index exceeds model dimension");
}

// Little-endian binary helpers.
void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  Reader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

  void magic(const char (&expected)[8]) {
    char got[8];
    bytes(got, 8);
    if (!std::equal(got, got + 8, expected)) fail("bad magic");
  }
  std::uint32_t u32() {
    unsigned char b[4];
    bytes(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    unsigned char b[8];
    bytes(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }

  [[noreturn]] void fail(const std::string& msg) const { throw FormatError(name_, 0, msg); }

 private:
  void bytes(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail("truncated model file");
  }

  std::istream& in_;
  std::string name_;
};

FeatureConfig read_config(Reader& r) {
  FeatureConfig c;
  c.radius = static_cast<int>(r.u32());
  c.bits = static_cast<int>(r.u32());
  if (c.bits < 16 || c.bits > (1 << 24) || c.radius > 64) r.fail("implausible feature config");
  return c;
}

}  // namespace

PolicyModel::PolicyModel(FeatureConfig config, std::size_t classes, std::uint64_t library_hash)
    : config_(config),
      weights_(classes * static_cast<std::size_t>(config.bits), 0.0),
      bias_(classes, 0.0),
      library_hash_(library_hash) {}

std::vector<double> PolicyModel::scores(const SparseFeatures& x) const {
  check_features(x, static_cast<std::size_t>(config_.bits));
  std::vector<double> s(bias_);
  for (std::size_t c = 0; c < s.size(); ++c) {
    s[c] += sparse_dot(weights_.data() + c * config_.bits, x);
  }
  return s;
}

std::vector<PolicyExample> policy_examples(const std::vector<Observation>& observations,
                                           const std::vector<std::optional<std::size_t>>& labels) {
  if (labels.size() != observations.size()) throw PreconditionError("one label per observation expected");
  std::vector<PolicyExample> out;
  for (std::size_t i = 0; i < observations.size(); ++i) {
    if (labels[i]) out.push_back(PolicyExample{observations[i].before, *labels[i]});
  }
  return out;
}

std::vector<EncodedExample> encode_policy_examples(std::span<const PolicyExample> examples,
                                                   const FeatureConfig& config) {
  std::vector<EncodedExample> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back({state_features(e.state, config), e.label});
  return out;
}

double policy_objective(const PolicyModel& model, std::span<const EncodedExample> data, double l2,
                        PolicyModel* gradient) {
  if (data.empty()) throw ModelError("empty training data");
  const std::size_t bits = model.config().bits;
  if (gradient) *gradient = PolicyModel(model.config(), model.classes(), model.library_hash());
  const double inv = 1.0 / static_cast<double>(data.size());
  double loss = 0.0;
  for (const auto& ex : data) {
    std::vector<double> p = model.scores(ex.x);
    softmax_inplace(p);
    loss -= std::log(std::max(p[ex.label], 1e-300)) * inv;
    if (!gradient) continue;
    for (std::size_t c = 0; c < p.size(); ++c) {
      const double d = (p[c] - (c == ex.label ? 1.0 : 0.0)) * inv;
      gradient->bias()[c] += d;
      double* row = gradient->weights().data() + c * bits;
      for (const auto& [j, v] : ex.x) row[j] += d * v;
    }
  }
  double sq = 0.0;
  for (double w : model.weights()) sq += w * w;
  loss += 0.5 * l2 * sq;
  if (gradient) {
    for (std::size_t i = 0; i < model.weights().size(); ++i) {
      gradient->weights()[i] += l2 * model.weights()[i];
    }
  }
  return loss;
}

PolicyModel train_policy(const ActionLibrary& library, std::span<const PolicyExample> examples,
                         const TrainingHyper& hyper, const FeatureConfig& config) {
  if (library.size() < 2) throw ModelError("policy training needs at least two rules");
  if (examples.empty()) throw ModelError("empty training data");
  for (const auto& e : examples) {
    if (e.label >= library.size()) throw ModelError("example label outside the rule library");
  }
  if (hyper.batch < 1 || hyper.epochs < 0) throw ModelError("invalid training hyperparameters");
  PolicyModel model(config, library.size(), library.hash_id());
  const auto data = encode_policy_examples(examples, config);
  const std::size_t bits = config.bits;
  Rng rng(hyper.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += hyper.batch) {
      const std::size_t end = std::min(order.size(), start + hyper.batch);
      const double scale = hyper.step / static_cast<double>(end - start);
      // Gradients are taken at the pre-batch weights.
      std::vector<std::vector<double>> probs;
      probs.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        std::vector<double> p = model.scores(data[order[i]].x);
        softmax_inplace(p);
        probs.push_back(std::move(p));
      }
      const double decay = 1.0 - hyper.step * hyper.l2;
      for (double& w : model.weights()) w *= decay;
      for (std::size_t i = start; i < end; ++i) {
        const auto& ex = data[order[i]];
        const auto& p = probs[i - start];
        for (std::size_t c = 0; c < p.size(); ++c) {
          const double d = (p[c] - (c == ex.label ? 1.0 : 0.0)) * scale;
          model.bias()[c] -= d;
          double* row = model.weights().data() + c * bits;
          for (const auto& [j, v] : ex.x) row[j] -= d * v;
        }
      }
    }
  }
  return model;
}

std::vector<double> policy_distribution(const PolicyModel& model, const SparseFeatures& x) {
  std::vector<double> p = model.scores(x);
  if (!p.empty()) softmax_inplace(p);
  return p;
}

std::vector<double> policy_distribution(const PolicyModel& model, const State& state) {
  return policy_distribution(model, state_features(state, model.config()));
}

std::vector<RankedRule> policy_topk(std::span<const double> probs, double mass, std::size_t k_max) {
  if (!(mass > 0.0 && mass < 1.0)) throw PreconditionError("top-k mass must lie in (0, 1)");
  std::vector<RankedRule> ranked;
  ranked.reserve(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) ranked.push_back({i, probs[i]});
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedRule& a, const RankedRule& b) { return a.prob > b.prob; });
  double cumulative = 0.0;
  std::size_t keep = 0;
  while (keep < ranked.size() && keep < k_max && cumulative < mass) {
    cumulative += ranked[keep].prob;
    ++keep;
  }
  ranked.resize(keep);
  return ranked;
}

std::vector<RankedRule> policy_topk(const PolicyModel& model, const State& state, double mass,
                                    std::size_t k_max) {
  const auto p = policy_distribution(model, state);
  return policy_topk(p, mass, k_max);
}

TransitionModel::TransitionModel(FeatureConfig config, std::uint64_t library_hash, double threshold)
    : config_(config),
      weights_(2 * static_cast<std::size_t>(config.bits), 0.0),
      library_hash_(library_hash) {
  set_threshold(threshold);
}

void TransitionModel::set_threshold(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw PreconditionError("threshold must lie in (0, 1)");
  threshold_ = tau;
}

double TransitionModel::probability(const SparseFeatures& x) const {
  check_features(x, weights_.size());
  return sigmoid(bias_ + sparse_dot(weights_.data(), x));
}

SparseFeatures transition_features(const SparseFeatures& before, const SparseFeatures& after,
                                   const FeatureConfig& config) {
  SparseFeatures out(before);
  const auto shift = static_cast<std::uint32_t>(config.bits);
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < before.size() || j < after.size()) {
    double d = 0.0;
    std::uint32_t k = 0;
    if (j == after.size() || (i < before.size() && before[i].first < after[j].first)) {
      k = before[i].first;
      d = -before[i++].second;
    } else if (i == before.size() || after[j].first < before[i].first) {
      k = after[j].first;
      d = after[j++].second;
    } else {
      k = before[i].first;
      d = after[j++].second - before[i++].second;
    }
    if (d != 0.0) out.emplace_back(k + shift, d);
  }
  return out;
}

SparseFeatures transition_features(const State& before, const State& after,
                                   const FeatureConfig& config) {
  return transition_features(state_features(before, config), state_features(after, config), config);
}

std::vector<TransitionExample> make_transition_dataset(const ActionLibrary& library,
                                                       const std::vector<Observation>& observations,
                                                       int neg_per_pos, std::uint64_t seed) {
  if (library.empty()) throw PreconditionError("transition dataset needs a non-empty library");
  Rng rng(seed);
  std::vector<TransitionExample> out;
  for (const auto& obs : observations) {
    out.push_back({obs.before, obs.after, 1});
    const std::string observed = state_key(obs.after);
    for (int t = 0; t < neg_per_pos; ++t) {
      const auto& rule = library[rng.below(library.size())];
      std::vector<Successor> succ;
      try {
        succ = enumerate_applications(rule, obs.before, kNegativeApplicationCap);
      } catch (const SizeError&) {
        continue;
      }
      if (succ.empty()) continue;
      Successor& pick = succ[rng.below(succ.size())];
      if (pick.key == observed) continue;
      out.push_back({obs.before, std::move(pick.state), 0});
    }
  }
  return out;
}

std::vector<EncodedBinaryExample> encode_transition_examples(
    std::span<const TransitionExample> examples, const FeatureConfig& config) {
  std::vector<EncodedBinaryExample> out;
  out.reserve(examples.size());
  for (const auto& e : examples) {
    out.push_back({transition_features(e.before, e.after, config), e.label});
  }
  return out;
}

double transition_objective(const TransitionModel& model, std::span<const EncodedBinaryExample> data,
                            double l2, TransitionModel* gradient) {
  if (data.empty()) throw ModelError("empty training data");
  if (gradient) *gradient = TransitionModel(model.config(), model.library_hash(), model.threshold());
  const double inv = 1.0 / static_cast<double>(data.size());
  double loss = 0.0;
  for (const auto& ex : data) {
    const double p = model.probability(ex.x);
    const double y = ex.label ? 1.0 : 0.0;
    loss -= (y * std::log(std::max(p, 1e-300)) + (1.0 - y) * std::log(std::max(1.0 - p, 1e-300))) * inv;
    if (!gradient) continue;
    const double d = (p - y) * inv;
    gradient->bias() += d;
    for (const auto& [j, v] : ex.x) gradient->weights()[j] += d * v;
  }
  double sq = 0.0;
  for (double w : model.weights()) sq += w * w;
  loss += 0.5 * l2 * sq;
  if (gradient) {
    for (std::size_t i = 0; i < model.weights().size(); ++i) {
      gradient->weights()[i] += l2 * model.weights()[i];
    }
  }
  return loss;
}

TransitionModel train_transition(std::span<const TransitionExample> examples,
                                 const TrainingHyper& hyper, const FeatureConfig& config,
                                 std::uint64_t library_hash) {
  if (examples.empty()) throw ModelError("empty training data");
  bool pos = false;
  bool neg = false;
  for (const auto& e : examples) (e.label ? pos : neg) = true;
  if (!pos || !neg) throw ModelError("transition training needs both positive and negative examples");
  if (hyper.batch < 1 || hyper.epochs < 0) throw ModelError("invalid training hyperparameters");
  TransitionModel model(config, library_hash);
  const auto data = encode_transition_examples(examples, config);
  Rng rng(hyper.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += hyper.batch) {
      const std::size_t end = std::min(order.size(), start + hyper.batch);
      const double scale = hyper.step / static_cast<double>(end - start);
      std::vector<double> residual;
      residual.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const auto& ex = data[order[i]];
        residual.push_back(model.probability(ex.x) - (ex.label ? 1.0 : 0.0));
      }
      const double decay = 1.0 - hyper.step * hyper.l2;
      for (double& w : model.weights()) w *= decay;
      for (std::size_t i = start; i < end; ++i) {
        const double d = residual[i - start] * scale;
        model.bias() -= d;
        for (const auto& [j, v] : data[order[i]].x) model.weights()[j] -= d * v;
      }
    }
  }
  return model;
}

double score_transition(const TransitionModel& model, const State& before, const State& after) {
  return model.probability(transition_features(before, after, model.config()));
}

void write_policy(std::ostream& out, const PolicyModel& model) {
  out.write(kPolicyMagic, 8);
  put_u32(out, kModelVersion);
  put_u32(out, static_cast<std::uint32_t>(model.config().radius));
  put_u32(out, static_cast<std::uint32_t>(model.config().bits));
  put_u64(out, model.classes());
  put_u64(out, model.library_hash());
  for (double w : model.weights()) put_f64(out, w);
  for (double b : model.bias()) put_f64(out, b);
}

PolicyModel read_policy(std::istream& in, const std::string& name) {
  Reader r(in, name);
  r.magic(kPolicyMagic);
  if (r.u32() != kModelVersion) r.fail("unsupported policy model version");
  const FeatureConfig config = read_config(r);
  const std::uint64_t classes = r.u64();
  if (classes > (1u << 24)) r.fail("implausible class count");
  const std::uint64_t hash = r.u64();
  PolicyModel model(config, classes, hash);
  for (double& w : model.weights()) w = r.f64();
  for (double& b : model.bias()) b = r.f64();
  return model;
}

void write_transition(std::ostream& out, const TransitionModel& model) {
  out.write(kTransitionMagic, 8);
  put_u32(out, kModelVersion);
  put_u32(out, static_cast<std::uint32_t>(model.config().radius));
  put_u32(out, static_cast<std::uint32_t>(model.config().bits));
  put_u64(out, model.library_hash());
  put_f64(out, model.threshold());
  for (double w : model.weights()) put_f64(out, w);
  put_f64(out, model.bias());
}

TransitionModel read_transition(std::istream& in, const std::string& name) {
  Reader r(in, name);
  r.magic(kTransitionMagic);
  if (r.u32() != kModelVersion) r.fail("unsupported transition model version");
  const FeatureConfig config = read_config(r);
  const std::uint64_t hash = r.u64();
  const double tau = r.f64();
  if (!(tau > 0.0 && tau < 1.0)) r.fail("threshold outside (0, 1)");
  TransitionModel model(config, hash, tau);
  for (double& w : model.weights()) w = r.f64();
  model.bias() = r.f64();
  return model;
}

}  // namespace wp
