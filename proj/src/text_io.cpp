#include "worldprog/text_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "worldprog/errors.hpp"

namespace wp {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

class LineReader {
 public:
  LineReader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

  // Next non-blank line with comments removed.
  bool next(std::string_view& line) {
    while (std::getline(in_, buffer_)) {
      ++number_;
      std::string_view view(buffer_);
      const auto hash = view.find('#');
      if (hash != std::string_view::npos) view = view.substr(0, hash);
      view = trim(view);
      if (!view.empty()) {
        line = view;
        return true;
      }
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw FormatError(name_, number_, msg); }

  int to_int(std::string_view tok) const {
    int v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) fail("expected integer, got '" + std::string(tok) + "'");
    return v;
  }

  std::size_t line() const { return number_; }
  const std::string& name() const { return name_; }

 private:
  std::istream& in_;
  std::string name_;
  std::string buffer_;
  std::size_t number_ = 0;
};

class GraphAccumulator {
 public:
  bool open() const { return open_; }

  void vertex(const LineReader& r, const std::vector<std::string_view>& tok, std::vector<LabeledGraph>& done) {
    if (tok.size() != 3) r.fail("vertex line must be 'v <id> <label>'");
    const int id = r.to_int(tok[1]);
    if (id == 0) flush(r, done);
    if (!open_ || id != static_cast<int>(labels_.size())) {
      r.fail("vertex ids must run 0..n-1 in order");
    }
    if (!edges_.empty()) r.fail("vertex line after edge lines in the same record");
    labels_.push_back(make_label(r, tok[2]));
  }

  void edge(const LineReader& r, const std::vector<std::string_view>& tok) {
    if (tok.size() != 4) r.fail("edge line must be 'e <u> <v> <label>'");
    if (!open_) r.fail("edge line outside a graph record");
    const int u = r.to_int(tok[1]);
    const int v = r.to_int(tok[2]);
    const int n = static_cast<int>(labels_.size());
    if (u < 0 || v < 0 || u >= n || v >= n) r.fail("edge endpoint outside the record");
    if (u == v) r.fail("self-loop");
    edges_.push_back({u, v, make_label(r, tok[3])});
  }

  // Closes the current record, if any, and opens a fresh one.
  void flush(const LineReader& r, std::vector<LabeledGraph>& done) {
    close(r, done);
    open_ = true;
  }

  void close(const LineReader& r, std::vector<LabeledGraph>& done) {
    if (open_ && !labels_.empty()) {
      try {
        done.emplace_back(std::move(labels_), std::move(edges_));
      } catch (const GraphError& e) {
        r.fail(e.what());
      }
    } else if (!edges_.empty()) {
      r.fail("edges without vertices");
    }
    labels_.clear();
    edges_.clear();
    open_ = false;
  }

  LabeledGraph take_single(const LineReader& r) {
    std::vector<LabeledGraph> done;
    close(r, done);
    if (done.size() > 1) r.fail("expected a single graph record");
    return done.empty() ? LabeledGraph() : std::move(done.front());
  }

 private:
  static Label make_label(const LineReader& r, std::string_view tok) {
    try {
      return intern(tok);
    } catch (const GraphError& e) {
      r.fail(e.what());
    }
  }

  bool open_ = false;
  std::vector<Label> labels_;
  std::vector<Edge> edges_;
};

struct Block {
  std::vector<LabeledGraph> graphs;
  std::vector<std::pair<std::size_t, std::string>> directives;
};

std::vector<Block> parse_blocks(std::istream& in, const std::string& name, std::string_view directive) {
  LineReader reader(in, name);
  std::vector<Block> blocks;
  Block current;
  GraphAccumulator acc;
  bool pending = false;
  std::string_view line;
  while (reader.next(line)) {
    if (line == "--") {
      acc.close(reader, current.graphs);
      blocks.push_back(std::move(current));
      current = Block{};
      pending = false;
      continue;
    }
    pending = true;
    if (!directive.empty() && line.starts_with(directive)) {
      current.directives.emplace_back(reader.line(), std::string(line.substr(directive.size())));
      continue;
    }
    const auto tok = split(line);
    if (tok[0] == "v") {
      acc.vertex(reader, tok, current.graphs);
    } else if (tok[0] == "e") {
      acc.edge(reader, tok);
    } else {
      reader.fail("unexpected line '" + std::string(line) + "'");
    }
  }
  acc.close(reader, current.graphs);
  if (pending) blocks.push_back(std::move(current));
  return blocks;
}

Correspondence parse_correspondence(const std::string& name, std::size_t line, std::string_view body) {
  Correspondence out;
  for (std::string_view tok : split(body)) {
    int gi = 0, v = 0, gj = 0, w = 0;
    const std::string s(tok);
    char tail = 0;
    if (std::sscanf(s.c_str(), "(%d,%d)=(%d,%d)%c", &gi, &v, &gj, &w, &tail) != 4) {
      throw FormatError(name, line, "bad correspondence pair '" + s + "'");
    }
    out.push_back({{gi, v}, {gj, w}});
  }
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path, 0, "cannot open file");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path, 0, "cannot write file");
  return out;
}

}  // namespace

void write_graph(std::ostream& out, const LabeledGraph& g) {
  for (int v = 0; v < g.vertex_count(); ++v) out << "v " << v << ' ' << label_name(g.vertex_label(v)) << '\n';
  for (const Edge& e : g.edges()) out << "e " << e.u << ' ' << e.v << ' ' << label_name(e.label) << '\n';
}

void write_state(std::ostream& out, const State& s) {
  for (const auto& g : s.graphs()) write_graph(out, g);
  out << "--\n";
}

void write_states(std::ostream& out, const std::vector<State>& states) {
  for (const auto& s : states) write_state(out, s);
}

std::vector<State> read_states(std::istream& in, const std::string& name) {
  std::vector<State> out;
  for (auto& b : parse_blocks(in, name, {})) {
    try {
      out.emplace_back(std::move(b.graphs));
    } catch (const SizeError& e) {
      throw FormatError(name, 0, e.what());
    }
  }
  return out;
}

std::vector<LabeledGraph> read_graphs(std::istream& in, const std::string& name) {
  std::vector<LabeledGraph> out;
  for (auto& b : parse_blocks(in, name, {})) {
    for (auto& g : b.graphs) out.push_back(std::move(g));
  }
  return out;
}

void write_rules(std::ostream& out, const std::vector<RewriteRule>& rules) {
  for (const auto& r : rules) {
    out << "RULE " << r.id() << ' ' << r.support() << '\n';
    out << "L:\n";
    write_graph(out, r.lhs());
    out << "R:\n";
    write_graph(out, r.rhs());
    out << "K:";
    for (const auto& [l, rr] : r.interface()) out << ' ' << l << '=' << rr;
    out << '\n';
  }
}

std::vector<RewriteRule> read_rules(std::istream& in, const std::string& name) {
  LineReader reader(in, name);
  std::vector<RewriteRule> out;
  enum class Section { kNone, kHeader, kLhs, kRhs } section = Section::kNone;
  std::string id;
  int support = 1;
  GraphAccumulator acc;
  LabeledGraph lhs;
  std::vector<LabeledGraph> scratch;
  std::string_view line;
  while (reader.next(line)) {
    const auto tok = split(line);
    if (tok[0] == "RULE") {
      if (section != Section::kNone) reader.fail("RULE before the previous rule's K: line");
      if (tok.size() != 3) reader.fail("rule header must be 'RULE <id> <support>'");
      id = std::string(tok[1]);
      support = reader.to_int(tok[2]);
      if (support < 1) reader.fail("rule support must be >= 1");
      section = Section::kHeader;
    } else if (tok[0] == "L:") {
      if (section != Section::kHeader) reader.fail("'L:' out of place");
      section = Section::kLhs;
      acc.flush(reader, scratch);
    } else if (tok[0] == "R:") {
      if (section != Section::kLhs) reader.fail("'R:' out of place");
      lhs = acc.take_single(reader);
      section = Section::kRhs;
      acc.flush(reader, scratch);
    } else if (tok[0] == "K:") {
      if (section != Section::kRhs) reader.fail("'K:' out of place");
      LabeledGraph rhs = acc.take_single(reader);
      Interface k;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const auto eq = tok[i].find('=');
        if (eq == std::string_view::npos) reader.fail("interface pair must be '<l>=<r>'");
        k.emplace_back(reader.to_int(tok[i].substr(0, eq)), reader.to_int(tok[i].substr(eq + 1)));
      }
      try {
        RewriteRule rule(lhs, rhs, std::move(k), support);
        if (rule.id() != id) reader.fail("rule id " + id + " does not match its content (" + rule.id() + ")");
        out.push_back(std::move(rule));
      } catch (const FormatError&) {
        throw;
      } catch (const Error& e) {
        reader.fail(e.what());
      }
      section = Section::kNone;
    } else if (tok[0] == "v" && (section == Section::kLhs || section == Section::kRhs)) {
      if (reader.to_int(tok.size() > 1 ? tok[1] : "x") == 0 && acc.open()) {
        // A second `v 0` inside a side would start another record.
        std::vector<LabeledGraph> probe;
        acc.vertex(reader, tok, probe);
        if (!probe.empty()) reader.fail("rule side must be a single graph record");
      } else {
        acc.vertex(reader, tok, scratch);
      }
    } else if (tok[0] == "e" && (section == Section::kLhs || section == Section::kRhs)) {
      acc.edge(reader, tok);
    } else {
      reader.fail("unexpected line '" + std::string(line) + "'");
    }
  }
  if (section != Section::kNone) reader.fail("unterminated rule (missing K: line)");
  return out;
}

void write_observations(std::ostream& out, const std::vector<Observation>& observations) {
  for (const auto& obs : observations) {
    for (const auto& g : obs.before.graphs()) write_graph(out, g);
    out << "--\n";
    for (const auto& g : obs.after.graphs()) write_graph(out, g);
    if (obs.correspondence) {
      out << "M:";
      for (const auto& [b, a] : *obs.correspondence) {
        out << " (" << b.graph << ',' << b.vertex << ")=(" << a.graph << ',' << a.vertex << ')';
      }
      out << '\n';
    }
    out << "--\n";
  }
}

std::vector<Observation> read_observations(std::istream& in, const std::string& name) {
  auto blocks = parse_blocks(in, name, "M:");
  if (blocks.size() % 2 != 0) throw FormatError(name, 0, "observation file has an unpaired state block");
  std::vector<Observation> out;
  for (std::size_t i = 0; i < blocks.size(); i += 2) {
    Observation obs;
    try {
      obs.before = State(std::move(blocks[i].graphs));
      obs.after = State(std::move(blocks[i + 1].graphs));
    } catch (const SizeError& e) {
      throw FormatError(name, 0, e.what());
    }
    for (std::size_t k = i; k <= i + 1; ++k) {
      for (const auto& [line, body] : blocks[k].directives) {
        Correspondence part = parse_correspondence(name, line, body);
        if (!obs.correspondence) obs.correspondence.emplace();
        obs.correspondence->insert(obs.correspondence->end(), part.begin(), part.end());
      }
    }
    if (obs.correspondence) {
      try {
        validate_correspondence(obs, *obs.correspondence);
      } catch (const GraphError& e) {
        throw FormatError(name, 0, "observation " + std::to_string(i / 2) + ": " + e.what());
      }
    }
    out.push_back(std::move(obs));
  }
  return out;
}

void write_key_values(std::ostream& out, const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

std::map<std::string, std::string> read_key_values(std::istream& in, const std::string& name) {
  LineReader reader(in, name);
  std::map<std::string, std::string> out;
  std::string_view line;
  while (reader.next(line)) {
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) reader.fail("expected key=value");
    out[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

std::vector<State> load_states(const std::string& path) {
  auto in = open_input(path);
  return read_states(in, path);
}

std::vector<LabeledGraph> load_graphs(const std::string& path) {
  auto in = open_input(path);
  return read_graphs(in, path);
}

ActionLibrary load_library(const std::string& path) {
  auto in = open_input(path);
  auto rules = read_rules(in, path);
  ActionLibrary lib;
  for (const auto& r : rules) {
    if (lib.ordinal_of(r.id())) throw FormatError(path, 0, "duplicate rule " + r.id());
    lib.add(r, r.support());
  }
  return lib;
}

std::vector<Observation> load_observations(const std::string& path) {
  auto in = open_input(path);
  return read_observations(in, path);
}

void save_states(const std::string& path, const std::vector<State>& states) {
  auto out = open_output(path);
  write_states(out, states);
}

void save_rules(const std::string& path, const std::vector<RewriteRule>& rules) {
  auto out = open_output(path);
  write_rules(out, rules);
}

void save_observations(const std::string& path, const std::vector<Observation>& observations) {
  auto out = open_output(path);
  write_observations(out, observations);
}

}  // namespace wp
