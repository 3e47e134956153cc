#include "omega_avg/automaton.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <optional>
#include <sstream>

#include "omega_avg/errors.hpp"
#include "omega_avg/mdp_analysis.hpp"
#include "omega_avg/mdp_io.hpp"

namespace omega_avg {

BuchiAutomaton::BuchiAutomaton(std::string name, std::vector<std::string> atomic_props, std::size_t initial,
                               std::vector<std::vector<std::vector<AutomatonEdge>>> delta)
    : name_(std::move(name)), atomic_props_(std::move(atomic_props)), initial_(initial), delta_(std::move(delta)) {
  if (atomic_props_.size() > kMaxAtomicProps) {
    throw Error(ErrorCode::UnsupportedFeature, "at most " + std::to_string(kMaxAtomicProps) + " atomic propositions");
  }
  if (delta_.empty()) throw Error(ErrorCode::ParseError, "automaton has no states");
  if (initial_ >= delta_.size()) throw Error(ErrorCode::ParseError, "initial state out of range");
  for (auto& row : delta_) {
    if (row.size() != num_letters()) throw Error(ErrorCode::ParseError, "transition table does not cover the alphabet");
    for (auto& edges : row) {
      std::vector<AutomatonEdge> merged;
      for (const auto& e : edges) {
        if (e.target >= delta_.size()) throw Error(ErrorCode::ParseError, "successor out of range");
        auto it = std::find_if(merged.begin(), merged.end(), [&](const auto& m) { return m.target == e.target; });
        if (it == merged.end()) {
          merged.push_back(e);
        } else {
          it->accepting = it->accepting || e.accepting;
        }
      }
      std::sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) { return a.target < b.target; });
      edges = std::move(merged);
      if (edges.size() > 1) deterministic_ = false;
    }
  }
}

bool BuchiAutomaton::has_transition(std::size_t q, Letter letter, std::size_t target) const {
  for (const auto& e : successors(q, letter)) {
    if (e.target == target) return true;
  }
  return false;
}

bool BuchiAutomaton::is_accepting(std::size_t q, Letter letter, std::size_t target) const {
  for (const auto& e : successors(q, letter)) {
    if (e.target == target) return e.accepting;
  }
  return false;
}

bool BuchiAutomaton::complete() const noexcept {
  for (const auto& row : delta_) {
    for (const auto& edges : row) {
      if (edges.empty()) return false;
    }
  }
  return true;
}

Letter BuchiAutomaton::letter_of(const std::vector<std::string>& true_props) const {
  Letter l = 0;
  for (std::size_t i = 0; i < atomic_props_.size(); ++i) {
    if (std::find(true_props.begin(), true_props.end(), atomic_props_[i]) != true_props.end()) {
      l |= Letter{1} << i;
    }
  }
  return l;
}

std::vector<Letter> BuchiAutomaton::letters_for(const Mdp& mdp) const {
  std::vector<Letter> out(mdp.num_states());
  for (StateId s = 0; s < mdp.num_states(); ++s) out[s] = letter_of(mdp.label(s));
  return out;
}

std::string BuchiAutomaton::letter_string(Letter letter) const {
  std::string out = "{";
  bool first = true;
  for (std::size_t i = 0; i < atomic_props_.size(); ++i) {
    if (letter & (Letter{1} << i)) {
      if (!first) out += ",";
      out += atomic_props_[i];
      first = false;
    }
  }
  return out + "}";
}

std::vector<bool> BuchiAutomaton::reachable() const {
  Graph g(num_states());
  for (std::size_t q = 0; q < num_states(); ++q) {
    for (const auto& edges : delta_[q]) {
      for (const auto& e : edges) g[q].push_back(e.target);
    }
  }
  return reachable_from(g, {initial_});
}

// ---------------------------------------------------------------------------
// HOA subset parser

namespace {

/// Recursive-descent evaluator for HOA label expressions:
///   expr := conj ('|' conj)* ; conj := unary ('&' unary)* ;
///   unary := '!' unary | '(' expr ')' | 't' | 'f' | INT
class LabelParser {
 public:
  LabelParser(std::string_view text, std::size_t num_aps, std::size_t line)
      : text_(text), num_aps_(num_aps), line_(line) {}

  /// Returns the set of letters satisfying the expression.
  std::vector<bool> parse() {
    auto result = parse_or();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters in label");
    return result;
  }

 private:
  using Set = std::vector<bool>;

  std::size_t letters() const { return std::size_t{1} << num_aps_; }

  [[noreturn]] void fail(const std::string& why) const { throw ParseError(line_, why); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Set parse_or() {
    Set lhs = parse_and();
    while (eat('|')) {
      Set rhs = parse_and();
      for (std::size_t i = 0; i < lhs.size(); ++i) lhs[i] = lhs[i] || rhs[i];
    }
    return lhs;
  }

  Set parse_and() {
    Set lhs = parse_unary();
    while (eat('&')) {
      Set rhs = parse_unary();
      for (std::size_t i = 0; i < lhs.size(); ++i) lhs[i] = lhs[i] && rhs[i];
    }
    return lhs;
  }

  Set parse_unary() {
    skip_ws();
    if (eat('!')) {
      Set s = parse_unary();
      s.flip();
      return s;
    }
    if (eat('(')) {
      Set s = parse_or();
      if (!eat(')')) fail("missing ')' in label");
      return s;
    }
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of label");
    const char c = text_[pos_];
    if (c == 't' || c == 'f') {
      ++pos_;
      return Set(letters(), c == 't');
    }
    if (c == '@') fail("label aliases are not supported");
    if (!std::isdigit(static_cast<unsigned char>(c))) fail(std::string("unexpected '") + c + "' in label");
    std::size_t ap = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      ap = ap * 10 + static_cast<std::size_t>(text_[pos_++] - '0');
    }
    if (ap >= num_aps_) fail("AP index " + std::to_string(ap) + " not declared");
    Set s(letters(), false);
    for (std::size_t l = 0; l < letters(); ++l) s[l] = (l >> ap) & 1U;
    return s;
  }

  std::string_view text_;
  std::size_t num_aps_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string strip_comments(std::string_view line, bool& in_comment) {
  std::string out;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (in_comment) {
      if (line.substr(i, 2) == "*/") {
        in_comment = false;
        ++i;
      }
    } else if (line.substr(i, 2) == "/*") {
      in_comment = true;
      ++i;
    } else {
      out += line[i];
    }
  }
  return out;
}

std::size_t parse_uint(const std::string& s, std::size_t line, const char* what) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw ParseError(line, std::string("expected ") + what + ", got '" + s + "'");
  }
  return std::stoul(s);
}

/// Parses "{0}" style acceptance marks; returns true if set 0 is present.
bool parse_marks(const std::string& text, std::size_t line) {
  const std::string inner = trim(std::string_view(text).substr(1, text.size() - 2));
  if (inner.empty()) return false;
  std::istringstream in(inner);
  std::string tok;
  bool accepting = false;
  while (in >> tok) {
    if (parse_uint(tok, line, "acceptance set") != 0) {
      throw ParseError(line, "acceptance set " + tok + " not declared (Buchi uses only set 0)");
    }
    accepting = true;
  }
  return accepting;
}

}  // namespace

BuchiAutomaton parse_automaton(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string raw_line;
  std::size_t line_no = 0;
  bool in_comment = false;

  std::string name;
  std::optional<std::size_t> num_states, start;
  std::optional<std::vector<std::string>> aps;
  bool saw_hoa = false, saw_acc_name = false, saw_acceptance = false, in_body = false, ended = false;

  std::vector<std::vector<std::vector<AutomatonEdge>>> delta;
  std::optional<std::size_t> current;
  std::vector<bool> declared;

  while (std::getline(in, raw_line)) {
    ++line_no;
    const std::string line = trim(strip_comments(raw_line, in_comment));
    if (line.empty()) continue;
    if (ended) throw ParseError(line_no, "content after --END--");

    if (!in_body) {
      if (line == "--BODY--") {
        if (!saw_hoa) throw ParseError(line_no, "missing 'HOA: v1' header");
        if (!num_states) throw ParseError(line_no, "missing 'States:' header");
        if (!start) throw ParseError(line_no, "missing 'Start:' header");
        if (!aps) throw ParseError(line_no, "missing 'AP:' header");
        if (!saw_acc_name || !saw_acceptance) {
          throw Error(ErrorCode::UnsupportedFeature, "acceptance must be declared as 'acc-name: Buchi' with 'Acceptance: 1 Inf(0)'");
        }
        if (aps->size() > kMaxAtomicProps) {
          throw Error(ErrorCode::UnsupportedFeature, "too many atomic propositions");
        }
        delta.assign(*num_states, std::vector<std::vector<AutomatonEdge>>(std::size_t{1} << aps->size()));
        declared.assign(*num_states, false);
        in_body = true;
        continue;
      }
      const auto colon = line.find(':');
      if (colon == std::string::npos) throw ParseError(line_no, "expected 'header: value'");
      const std::string key = line.substr(0, colon);
      const std::string value = trim(std::string_view(line).substr(colon + 1));
      if (!saw_hoa) {
        if (key != "HOA" || value != "v1") throw ParseError(line_no, "document must start with 'HOA: v1'");
        saw_hoa = true;
      } else if (key == "name") {
        if (value.size() < 2 || value.front() != '"' || value.back() != '"') throw ParseError(line_no, "name must be quoted");
        name = value.substr(1, value.size() - 2);
      } else if (key == "States") {
        num_states = parse_uint(value, line_no, "state count");
        if (*num_states == 0) throw ParseError(line_no, "automaton needs at least one state");
      } else if (key == "Start") {
        if (start) throw Error(ErrorCode::UnsupportedFeature, "multiple initial states");
        if (value.find('&') != std::string::npos) throw Error(ErrorCode::UnsupportedFeature, "alternating initial states");
        start = parse_uint(value, line_no, "initial state");
      } else if (key == "AP") {
        std::istringstream vs(value);
        std::size_t count = 0;
        if (!(vs >> count)) throw ParseError(line_no, "expected AP count");
        std::vector<std::string> names;
        std::string rest;
        std::getline(vs, rest);
        std::size_t pos = 0;
        while ((pos = rest.find('"', pos)) != std::string::npos) {
          const auto close = rest.find('"', pos + 1);
          if (close == std::string::npos) throw ParseError(line_no, "unterminated AP name");
          names.push_back(rest.substr(pos + 1, close - pos - 1));
          pos = close + 1;
        }
        if (names.size() != count) throw ParseError(line_no, "AP count does not match the listed names");
        aps = std::move(names);
      } else if (key == "acc-name") {
        if (value != "Buchi") throw Error(ErrorCode::UnsupportedFeature, "acceptance '" + value + "' (only Buchi is supported)");
        saw_acc_name = true;
      } else if (key == "Acceptance") {
        std::string compact;
        for (char c : value) {
          if (!std::isspace(static_cast<unsigned char>(c))) compact += c;
        }
        if (compact != "1Inf(0)") throw Error(ErrorCode::UnsupportedFeature, "acceptance condition '" + value + "'");
        saw_acceptance = true;
      } else if (key == "properties" || key == "tool") {
        // informational
      } else if (!key.empty() && std::isupper(static_cast<unsigned char>(key[0]))) {
        throw Error(ErrorCode::UnsupportedFeature, "header '" + key + "'");
      }
      continue;
    }

    if (line == "--END--") {
      ended = true;
      continue;
    }
    if (line.rfind("State:", 0) == 0) {
      std::string rest = trim(std::string_view(line).substr(6));
      if (rest.find('[') != std::string::npos) throw Error(ErrorCode::UnsupportedFeature, "state labels");
      if (rest.find('{') != std::string::npos) throw Error(ErrorCode::UnsupportedFeature, "state-based acceptance marks");
      const auto space = rest.find_first_of(" \t");
      const std::size_t q = parse_uint(rest.substr(0, space), line_no, "state index");
      if (q >= *num_states) throw ParseError(line_no, "state " + std::to_string(q) + " out of range");
      if (declared[q]) throw ParseError(line_no, "state " + std::to_string(q) + " declared twice");
      declared[q] = true;
      current = q;
      continue;
    }
    if (!current) throw ParseError(line_no, "edge before any 'State:'");
    if (line.front() != '[') throw Error(ErrorCode::UnsupportedFeature, "implicit edge labels");
    const auto close = line.find(']');
    if (close == std::string::npos) throw ParseError(line_no, "unterminated label");
    const auto letters = LabelParser(std::string_view(line).substr(1, close - 1), aps->size(), line_no).parse();
    std::string rest = trim(std::string_view(line).substr(close + 1));
    bool accepting = false;
    if (const auto brace = rest.find('{'); brace != std::string::npos) {
      if (rest.back() != '}') throw ParseError(line_no, "malformed acceptance marks");
      accepting = parse_marks(rest.substr(brace), line_no);
      rest = trim(std::string_view(rest).substr(0, brace));
    }
    if (rest.find('&') != std::string::npos) throw Error(ErrorCode::UnsupportedFeature, "universal branching");
    const std::size_t target = parse_uint(rest, line_no, "target state");
    if (target >= *num_states) throw ParseError(line_no, "target " + std::to_string(target) + " out of range");
    for (Letter l = 0; l < letters.size(); ++l) {
      if (letters[l]) delta[*current][l].push_back({target, accepting});
    }
  }
  if (!in_body) throw ParseError(line_no, "missing --BODY--");
  if (!ended) throw ParseError(line_no, "missing --END--");
  if (*start >= *num_states) throw ParseError(line_no, "initial state out of range");
  return BuchiAutomaton(std::move(name), std::move(*aps), *start, std::move(delta));
}

BuchiAutomaton load_automaton(const std::filesystem::path& path) { return parse_automaton(read_text(path)); }

std::string to_hoa(const BuchiAutomaton& aut) {
  std::ostringstream out;
  out << "HOA: v1\n";
  if (!aut.name().empty()) out << "name: \"" << aut.name() << "\"\n";
  out << "States: " << aut.num_states() << "\n";
  out << "Start: " << aut.initial() << "\n";
  out << "AP: " << aut.atomic_props().size();
  for (const auto& ap : aut.atomic_props()) out << " \"" << ap << "\"";
  out << "\nacc-name: Buchi\nAcceptance: 1 Inf(0)\n";
  out << "properties: trans-labels explicit-labels trans-acc";
  if (aut.deterministic()) out << " deterministic";
  out << "\n--BODY--\n";
  const std::size_t n_aps = aut.atomic_props().size();
  for (std::size_t q = 0; q < aut.num_states(); ++q) {
    out << "State: " << q << "\n";
    for (Letter l = 0; l < aut.num_letters(); ++l) {
      std::string label;
      for (std::size_t i = 0; i < n_aps; ++i) {
        if (!label.empty()) label += "&";
        label += ((l >> i) & 1U) ? "" : "!";
        label += std::to_string(i);
      }
      if (label.empty()) label = "t";
      for (const auto& e : aut.successors(q, l)) {
        out << "[" << label << "] " << e.target << (e.accepting ? " {0}" : "") << "\n";
      }
    }
  }
  out << "--END--\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Structural checks

std::vector<bool> coaccessible_states(const BuchiAutomaton& aut) {
  Graph g(aut.num_states());
  std::vector<bool> sources(aut.num_states(), false);
  for (std::size_t q = 0; q < aut.num_states(); ++q) {
    for (Letter l = 0; l < aut.num_letters(); ++l) {
      for (const auto& e : aut.successors(q, l)) {
        g[q].push_back(e.target);
        if (e.accepting) sources[q] = true;
      }
    }
  }
  return can_reach(g, sources);
}

bool language_nonempty(const BuchiAutomaton& aut, std::size_t q) {
  Graph g(aut.num_states());
  for (std::size_t p = 0; p < aut.num_states(); ++p) {
    for (Letter l = 0; l < aut.num_letters(); ++l) {
      for (const auto& e : aut.successors(p, l)) g[p].push_back(e.target);
    }
  }
  const auto comp = scc_index(g);
  const auto reach = reachable_from(g, {q});
  for (std::size_t p = 0; p < aut.num_states(); ++p) {
    if (!reach[p]) continue;
    for (Letter l = 0; l < aut.num_letters(); ++l) {
      for (const auto& e : aut.successors(p, l)) {
        if (e.accepting && comp[e.target] == comp[p]) return true;
      }
    }
  }
  return false;
}

bool det_language_containment(const BuchiAutomaton& aut, std::size_t p, std::size_t q) {
  if (!aut.deterministic()) throw Error(ErrorCode::NotDeterministic, "containment check requires a deterministic automaton");
  const std::size_t n = aut.num_states();
  if (p >= n || q >= n) throw Error(ErrorCode::BadConfig, "state out of range");
  if (p == q) return true;

  // Pair graph over (x, y) with y == n standing for "q-run died" (rejecting).
  const std::size_t width = n + 1;
  auto id = [width](std::size_t x, std::size_t y) { return x * width + y; };
  const std::size_t nodes = n * width;

  struct PairEdge {
    std::size_t to;
    bool x_accepting;
    bool y_accepting;
  };
  std::vector<std::vector<PairEdge>> edges(nodes);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y <= n; ++y) {
      for (Letter l = 0; l < aut.num_letters(); ++l) {
        const auto xs = aut.successors(x, l);
        if (xs.empty()) continue;
        std::size_t ny = n;
        bool y_acc = false;
        if (y < n) {
          const auto ys = aut.successors(y, l);
          if (!ys.empty()) {
            ny = ys.front().target;
            y_acc = ys.front().accepting;
          }
        }
        edges[id(x, y)].push_back({id(xs.front().target, ny), xs.front().accepting, y_acc});
      }
    }
  }

  Graph full(nodes);
  Graph restricted(nodes);
  for (std::size_t v = 0; v < nodes; ++v) {
    for (const auto& e : edges[v]) {
      full[v].push_back(e.to);
      if (!e.y_accepting) restricted[v].push_back(e.to);
    }
  }
  const auto reach = reachable_from(full, {id(p, q)});
  const auto comp = scc_index(restricted);
  // A reachable cycle that takes an accepting x-edge and no accepting y-edge
  // is a word accepted from p and rejected from q.
  for (std::size_t v = 0; v < nodes; ++v) {
    if (!reach[v]) continue;
    for (const auto& e : edges[v]) {
      if (e.x_accepting && !e.y_accepting && comp[e.to] == comp[v]) return false;
    }
  }
  return true;
}

SpecClass classify_specification(const BuchiAutomaton& aut) {
  if (!aut.deterministic()) throw Error(ErrorCode::NotDeterministic, "classification requires a deterministic automaton");
  const auto reach = aut.reachable();
  const std::size_t q0 = aut.initial();
  SpecClass c;
  c.absolute_liveness = language_nonempty(aut, q0);
  c.stable = true;
  for (std::size_t s = 0; s < aut.num_states(); ++s) {
    if (!reach[s]) continue;
    if (c.absolute_liveness && !det_language_containment(aut, q0, s)) c.absolute_liveness = false;
    if (c.stable && !det_language_containment(aut, s, q0)) c.stable = false;
  }
  c.fairness = c.absolute_liveness && c.stable;
  return c;
}

}  // namespace omega_avg
