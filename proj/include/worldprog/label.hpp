#ifndef WORLDPROG_LABEL_HPP_
#define WORLDPROG_LABEL_HPP_

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace wp {

/// Interned vertex/edge label. The key is the FNV-1a hash of the label text,
/// so labels compare identically in every process; the global symbol table
/// rejects two distinct names that would share a key.
class Label {
 public:
  constexpr Label() = default;
  constexpr explicit Label(std::uint64_t key) : key_(key) {}

  constexpr std::uint64_t key() const noexcept { return key_; }

  friend constexpr auto operator<=>(Label, Label) = default;

 private:
  std::uint64_t key_ = 0;
};

/// Registers `name` in the run-global symbol table. Names must be non-empty
/// and free of whitespace so they survive the text formats.
Label intern(std::string_view name);

/// Text of an interned label. Throws GraphError for unknown keys.
std::string label_name(Label label);

}  // namespace wp

#endif  // WORLDPROG_LABEL_HPP_
