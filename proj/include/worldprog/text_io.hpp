#ifndef WORLDPROG_TEXT_IO_HPP_
#define WORLDPROG_TEXT_IO_HPP_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "worldprog/graph.hpp"
#include "worldprog/induction.hpp"
#include "worldprog/rewrite.hpp"

namespace wp {

// Graph records are `v <id> <label>` lines (ids 0..n-1 in order) followed by
// `e <u> <v> <label>` lines; a `v 0` line starts a new record. A state is a
// run of records closed by a `--` line. Blank lines and `#` comments are
// ignored. Parse errors throw FormatError with the offending line.

void write_graph(std::ostream& out, const LabeledGraph& g);
void write_state(std::ostream& out, const State& s);
void write_states(std::ostream& out, const std::vector<State>& states);

std::vector<State> read_states(std::istream& in, const std::string& name = "<input>");

/// Every graph record in the stream, ignoring state boundaries.
std::vector<LabeledGraph> read_graphs(std::istream& in, const std::string& name = "<input>");

/// `RULE <id> <support>`, `L:` record, `R:` record, `K: <l>=<r> ...`.
void write_rules(std::ostream& out, const std::vector<RewriteRule>& rules);
std::vector<RewriteRule> read_rules(std::istream& in, const std::string& name = "<input>");

/// Before block, after block; an optional `M: (gi,v)=(gj,w) ...` line inside
/// either block carries the correspondence.
void write_observations(std::ostream& out, const std::vector<Observation>& observations);
std::vector<Observation> read_observations(std::istream& in, const std::string& name = "<input>");

/// `key=value` lines.
void write_key_values(std::ostream& out, const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> read_key_values(std::istream& in, const std::string& name = "<input>");

// File helpers; missing files raise FormatError at line 0.
std::vector<State> load_states(const std::string& path);
std::vector<LabeledGraph> load_graphs(const std::string& path);
ActionLibrary load_library(const std::string& path);
std::vector<Observation> load_observations(const std::string& path);
void save_states(const std::string& path, const std::vector<State>& states);
void save_rules(const std::string& path, const std::vector<RewriteRule>& rules);
void save_observations(const std::string& path, const std::vector<Observation>& observations);

}  // namespace wp

#endif  // WORLDPROG_TEXT_IO_HPP_
