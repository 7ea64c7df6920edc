#ifndef WORLDPROG_CANONICAL_HPP_
#define WORLDPROG_CANONICAL_HPP_

#include <string>

#include "worldprog/graph.hpp"

namespace wp {

/// Maximum vertex count accepted by canonical_form.
inline constexpr int kCanonicalVertexCap = kDefaultVertexCap;

/// Canonical code via color refinement plus individualization search with
/// trace and automorphism pruning. Throws SizeError above the vertex cap.
CanonicalCode canonical_form(const LabeledGraph& g);

bool is_isomorphic(const LabeledGraph& a, const LabeledGraph& b);

/// Sorted concatenation of member codes. Equal keys iff the states are
/// equal as multisets up to isomorphism.
std::string state_key(const State& s);

/// Short printable digest of a key or code.
std::string hex_digest(std::string_view bytes);

}  // namespace wp

#endif  // WORLDPROG_CANONICAL_HPP_
