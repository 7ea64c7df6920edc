#include "worldprog/label.hpp"

#include <cctype>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "worldprog/errors.hpp"
#include "worldprog/hash.hpp"

namespace wp {
namespace {

class SymbolTable {
 public:
  Label intern(std::string_view name) {
    if (name.empty()) throw GraphError("label must be non-empty");
    for (unsigned char c : name) {
      if (std::isspace(c)) throw GraphError("label contains whitespace: '" + std::string(name) + "'");
    }
    const std::uint64_t key = fnv1a64(name);
    {
      std::shared_lock lock(mutex_);
      auto it = names_.find(key);
      if (it != names_.end()) {
        check_same(it->second, name);
        return Label(key);
      }
    }
    std::unique_lock lock(mutex_);
    auto [it, inserted] = names_.emplace(key, std::string(name));
    if (!inserted) check_same(it->second, name);
    return Label(key);
  }

  std::string name(Label label) const {
    std::shared_lock lock(mutex_);
    auto it = names_.find(label.key());
    if (it == names_.end()) throw GraphError("unknown label key " + std::to_string(label.key()));
    return it->second;
  }

 private:
  static void check_same(const std::string& existing, std::string_view name) {
    if (existing != name) {
      throw GraphError("label hash collision between '" + existing + "' and '" +
                       std::string(name) + "'");
    }
  }

  mutable std::shared_mutex mutex_;
  std::unordered_map<std::uint64_t, std::string> names_;
};

SymbolTable& table() {
  static SymbolTable instance;
  return instance;
}

}  // namespace

Label intern(std::string_view name) { return table().intern(name); }

std::string label_name(Label label) { return table().name(label); }

}  // namespace wp
