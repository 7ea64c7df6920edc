#include "worldprog/canonical.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>

#include "worldprog/errors.hpp"
#include "worldprog/hash.hpp"

namespace wp {
namespace {

using Words = std::vector<std::uint64_t>;

constexpr std::uint64_t kTraceTag = 0xffffffffffff0001ULL;
constexpr std::uint64_t kCodeTag = 0xffffffffffff0002ULL;
constexpr std::size_t kMaxGenerators = 256;

void append_le(std::string& out, std::uint64_t w) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((w >> (8 * i)) & 0xff));
}

// Lexicographic comparison of `a` against the first a.size() words of `b`.
// Returns <0, 0, >0; only the overlapping positions are compared.
int compare_prefix(const Words& a, const Words& b) {
  const std::size_t len = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < len; ++i) {
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  }
  return 0;
}

class Canonizer {
 public:
  explicit Canonizer(const LabeledGraph& g) : g_(g), n_(g.vertex_count()) {}

  Words run() {
    if (n_ == 0) return {0, 0};
    std::vector<std::uint64_t> keys;
    keys.reserve(n_);
    for (Label l : g_.vertex_labels()) keys.push_back(l.key());
    std::vector<std::uint64_t> sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<int> color(n_);
    for (int v = 0; v < n_; ++v) {
      color[v] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), keys[v]) -
                                  sorted.begin());
    }
    std::vector<int> path;
    search(std::move(color), path);
    return best_code_;
  }

 private:
  // Refines `color` (dense ranks) to the coarsest equitable partition that
  // refines it. Returns the number of cells.
  int refine(std::vector<int>& color) {
    int cells = 1 + *std::max_element(color.begin(), color.end());
    std::vector<Words> sig(n_);
    std::vector<int> order(n_);
    while (cells < n_) {
      for (int v = 0; v < n_; ++v) {
        Words& s = sig[v];
        s.clear();
        auto nbrs = g_.neighbors(v);
        pairs_.clear();
        for (const Neighbor& nb : nbrs) pairs_.emplace_back(nb.label.key(), color[nb.vertex]);
        std::sort(pairs_.begin(), pairs_.end());
        s.push_back(static_cast<std::uint64_t>(color[v]));
        s.push_back(pairs_.size());
        for (const auto& [k, c] : pairs_) {
          s.push_back(k);
          s.push_back(static_cast<std::uint64_t>(c));
        }
      }
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) { return sig[a] < sig[b]; });
      int next = 0;
      for (int i = 0; i < n_; ++i) {
        if (i > 0 && sig[order[i]] != sig[order[i - 1]]) ++next;
        color[order[i]] = next;
      }
      const int refined = next + 1;
      if (refined == cells) break;
      cells = refined;
    }
    return cells;
  }

  static std::vector<int> individualize(const std::vector<int>& color, int v) {
    std::vector<int> out(color.size());
    for (std::size_t u = 0; u < color.size(); ++u) out[u] = 2 * color[u] + 1;
    out[v] = 2 * color[v];
    std::vector<int> values = out;
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (int& c : out) {
      c = static_cast<int>(std::lower_bound(values.begin(), values.end(), c) - values.begin());
    }
    return out;
  }

  Words leaf_code(const std::vector<int>& pos) const {
    Words code;
    code.reserve(2 + n_ + 3 * g_.edge_count());
    code.push_back(static_cast<std::uint64_t>(n_));
    code.push_back(g_.edge_count());
    std::vector<std::uint64_t> labels(n_);
    for (int v = 0; v < n_; ++v) labels[pos[v]] = g_.vertex_label(v).key();
    code.insert(code.end(), labels.begin(), labels.end());
    std::vector<std::array<std::uint64_t, 3>> edges;
    edges.reserve(g_.edge_count());
    for (const Edge& e : g_.edges()) {
      const auto a = static_cast<std::uint64_t>(std::min(pos[e.u], pos[e.v]));
      const auto b = static_cast<std::uint64_t>(std::max(pos[e.u], pos[e.v]));
      edges.push_back({a, b, e.label.key()});
    }
    std::sort(edges.begin(), edges.end());
    for (const auto& e : edges) code.insert(code.end(), e.begin(), e.end());
    return code;
  }

  int find(std::vector<int>& parent, int x) const {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }

  // Orbit representative of every vertex under the stored automorphisms
  // that fix `path` pointwise.
  std::vector<int> orbits(const std::vector<int>& path) const {
    std::vector<int> parent(n_);
    std::iota(parent.begin(), parent.end(), 0);
    for (const auto& gen : generators_) {
      bool fixes = std::all_of(path.begin(), path.end(), [&](int p) { return gen[p] == p; });
      if (!fixes) continue;
      for (int v = 0; v < n_; ++v) {
        const int a = find(parent, v);
        const int b = find(parent, gen[v]);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
    for (int v = 0; v < n_; ++v) parent[v] = find(parent, v);
    return parent;
  }

  void search(std::vector<int> color, std::vector<int>& path) {
    const int cells = refine(color);
    const std::size_t mark = cert_.size();
    cert_.push_back(kTraceTag);
    cert_.push_back(static_cast<std::uint64_t>(cells));
    {
      std::vector<std::uint64_t> sizes(cells, 0);
      for (int c : color) ++sizes[c];
      cert_.insert(cert_.end(), sizes.begin(), sizes.end());
    }
    if (has_best_ && compare_prefix(cert_, best_cert_) > 0) {
      cert_.resize(mark);
      return;
    }

    if (cells == n_) {
      Words code = leaf_code(color);
      Words full = cert_;
      full.push_back(kCodeTag);
      full.insert(full.end(), code.begin(), code.end());
      if (!has_best_ || full < best_cert_) {
        has_best_ = true;
        best_cert_ = std::move(full);
        best_code_ = std::move(code);
        best_at_.assign(n_, 0);
        for (int v = 0; v < n_; ++v) best_at_[color[v]] = v;
      } else if (full == best_cert_ && generators_.size() < kMaxGenerators) {
        std::vector<int> gen(n_);
        for (int v = 0; v < n_; ++v) gen[v] = best_at_[color[v]];
        generators_.push_back(std::move(gen));
      }
      cert_.resize(mark);
      return;
    }

    int target = -1;
    {
      std::vector<int> sizes(cells, 0);
      for (int c : color) ++sizes[c];
      for (int c = 0; c < cells; ++c) {
        if (sizes[c] > 1) {
          target = c;
          break;
        }
      }
    }
    std::vector<int> explored;
    for (int v = 0; v < n_; ++v) {
      if (color[v] != target) continue;
      if (!explored.empty() && !generators_.empty()) {
        const std::vector<int> orbit = orbits(path);
        const bool seen = std::any_of(explored.begin(), explored.end(),
                                      [&](int u) { return orbit[u] == orbit[v]; });
        if (seen) continue;
      }
      path.push_back(v);
      search(individualize(color, v), path);
      path.pop_back();
      explored.push_back(v);
    }
    cert_.resize(mark);
  }

  const LabeledGraph& g_;
  const int n_;
  Words cert_;
  Words best_cert_;
  Words best_code_;
  std::vector<int> best_at_;
  bool has_best_ = false;
  std::vector<std::vector<int>> generators_;
  std::vector<std::pair<std::uint64_t, int>> pairs_;
};

}  // namespace

CanonicalCode canonical_form(const LabeledGraph& g) {
  if (g.vertex_count() > kCanonicalVertexCap) {
    throw SizeError("graph with " + std::to_string(g.vertex_count()) +
                    " vertices exceeds canonicalization cap " +
                    std::to_string(kCanonicalVertexCap));
  }
  const Words words = Canonizer(g).run();
  CanonicalCode code;
  code.bytes.reserve(8 * words.size());
  for (std::uint64_t w : words) append_le(code.bytes, w);
  return code;
}

bool is_isomorphic(const LabeledGraph& a, const LabeledGraph& b) {
  if (a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count()) return false;
  return a.canonical_code() == b.canonical_code();
}

std::string state_key(const State& s) {
  std::vector<const std::string*> codes;
  codes.reserve(s.size());
  std::size_t total = 8;
  for (const auto& g : s.graphs()) {
    codes.push_back(&g.canonical_code().bytes);
    total += codes.back()->size();
  }
  std::sort(codes.begin(), codes.end(), [](const std::string* a, const std::string* b) { return *a < *b; });
  std::string key;
  key.reserve(total);
  append_le(key, codes.size());
  for (const std::string* c : codes) key += *c;
  return key;
}

std::string hex_digest(std::string_view bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  const std::uint64_t h = fnv1a64(bytes);
  std::string out(16, '0');
  for (int i = 0; i < 16; ++i) out[15 - i] = kHex[(h >> (4 * i)) & 0xf];
  return out;
}

}  // namespace wp
