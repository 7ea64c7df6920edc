#include "worldprog/matching.hpp"

#include <algorithm>

#include "worldprog/errors.hpp"

namespace wp {
namespace {

class Matcher {
 public:
  Matcher(const LabeledGraph& pattern, const LabeledGraph& host, MatchOptions options,
          const std::function<bool(std::span<const int>)>& visit)
      : p_(pattern), h_(host), options_(options), visit_(visit),
        np_(pattern.vertex_count()), image_(np_, -1), owner_(host.vertex_count(), -1),
        anchor_(np_, -1), earlier_degree_(np_, 0) {
    for (int i = 0; i < np_; ++i) {
      for (const Neighbor& nb : p_.neighbors(i)) {
        if (nb.vertex < i) {
          ++earlier_degree_[i];
          if (anchor_[i] < 0 || p_.degree(nb.vertex) > p_.degree(anchor_[i])) anchor_[i] = nb.vertex;
        }
      }
    }
  }

  void run() {
    if (np_ > h_.vertex_count()) return;
    extend(0);
  }

 private:
  bool feasible(int i, int c) const {
    if (owner_[c] >= 0) return false;
    if (h_.vertex_label(c) != p_.vertex_label(i)) return false;
    if (h_.degree(c) < p_.degree(i)) return false;
    if (options_.induced) {
      // Every host edge into the mapped region must be a pattern edge with
      // the same label, and all earlier pattern edges must be present.
      int matched = 0;
      for (const Neighbor& nb : h_.neighbors(c)) {
        const int k = owner_[nb.vertex];
        if (k < 0) continue;
        auto pl = p_.edge_label(i, k);
        if (!pl || *pl != nb.label) return false;
        ++matched;
      }
      return matched == earlier_degree_[i];
    }
    for (const Neighbor& nb : p_.neighbors(i)) {
      if (nb.vertex >= i) continue;
      auto hl = h_.edge_label(c, image_[nb.vertex]);
      if (!hl || *hl != nb.label) return false;
    }
    return true;
  }

  // Returns false once the visitor asked to stop.
  bool extend(int i) {
    if (i == np_) return visit_(std::span<const int>(image_));
    auto try_candidate = [&](int c) {
      if (!feasible(i, c)) return true;
      image_[i] = c;
      owner_[c] = i;
      const bool go_on = extend(i + 1);
      owner_[c] = -1;
      image_[i] = -1;
      return go_on;
    };
    if (anchor_[i] >= 0) {
      for (const Neighbor& nb : h_.neighbors(image_[anchor_[i]])) {
        if (!try_candidate(nb.vertex)) return false;
      }
    } else {
      for (int c = 0; c < h_.vertex_count(); ++c) {
        if (!try_candidate(c)) return false;
      }
    }
    return true;
  }

  const LabeledGraph& p_;
  const LabeledGraph& h_;
  MatchOptions options_;
  const std::function<bool(std::span<const int>)>& visit_;
  int np_;
  std::vector<int> image_;
  std::vector<int> owner_;
  std::vector<int> anchor_;
  std::vector<int> earlier_degree_;
};

}  // namespace

void for_each_embedding(const LabeledGraph& pattern, const LabeledGraph& host,
                        const std::function<bool(std::span<const int>)>& visit,
                        MatchOptions options) {
  if (pattern.empty()) throw PreconditionError("pattern must be non-empty");
  Matcher(pattern, host, options, visit).run();
}

std::vector<VertexMap> find_embeddings(const LabeledGraph& pattern, const LabeledGraph& host,
                                       std::size_t limit, MatchOptions options) {
  if (limit == 0) throw PreconditionError("embedding limit must be >= 1");
  std::vector<VertexMap> out;
  for_each_embedding(
      pattern, host,
      [&](std::span<const int> image) {
        out.push_back({std::vector<int>(image.begin(), image.end())});
        return out.size() < limit;
      },
      options);
  return out;
}

bool verify_embedding(const LabeledGraph& pattern, const LabeledGraph& host, const VertexMap& map,
                      MatchOptions options) {
  const int np = pattern.vertex_count();
  if (static_cast<int>(map.image.size()) != np) return false;
  std::vector<int> owner(host.vertex_count(), -1);
  for (int i = 0; i < np; ++i) {
    const int c = map.image[i];
    if (c < 0 || c >= host.vertex_count() || owner[c] >= 0) return false;
    if (host.vertex_label(c) != pattern.vertex_label(i)) return false;
    owner[c] = i;
  }
  for (const Edge& e : pattern.edges()) {
    auto hl = host.edge_label(map.image[e.u], map.image[e.v]);
    if (!hl || *hl != e.label) return false;
  }
  if (options.induced) {
    for (int i = 0; i < np; ++i) {
      for (const Neighbor& nb : host.neighbors(map.image[i])) {
        const int k = owner[nb.vertex];
        if (k >= 0 && !pattern.edge_label(i, k)) return false;
      }
    }
  }
  return true;
}

}  // namespace wp
