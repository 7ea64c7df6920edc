#ifndef WORLDPROG_MATCHING_HPP_
#define WORLDPROG_MATCHING_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "worldprog/graph.hpp"

namespace wp {

struct MatchOptions {
  /// When set, a non-edge of the pattern forbids a host edge between the
  /// corresponding images.
  bool induced = true;
};

/// Visits embeddings of `pattern` into `host` in lexicographic order of the
/// image tuple (image of pattern vertex 0 first). Stops when `visit` returns
/// false.
void for_each_embedding(const LabeledGraph& pattern, const LabeledGraph& host,
                        const std::function<bool(std::span<const int>)>& visit,
                        MatchOptions options = {});

/// First `limit` embeddings. Throws PreconditionError on an empty pattern or
/// zero limit.
std::vector<VertexMap> find_embeddings(const LabeledGraph& pattern, const LabeledGraph& host,
                                       std::size_t limit, MatchOptions options = {});

bool verify_embedding(const LabeledGraph& pattern, const LabeledGraph& host,
                      const VertexMap& map, MatchOptions options = {});

}  // namespace wp

#endif  // WORLDPROG_MATCHING_HPP_
