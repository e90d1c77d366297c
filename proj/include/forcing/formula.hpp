#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace forcing {

/// A term of the language: a variable, a constant, or an unfilled slot `_`
/// (slots only appear in formulas read off uninstantiated tree templates).
struct Term {
  enum class Kind : std::uint8_t { Variable, Constant, Placeholder };

  Kind kind = Kind::Constant;
  std::string name;

  static Term variable(std::string n) { return {Kind::Variable, std::move(n)}; }
  static Term constant(std::string n) { return {Kind::Constant, std::move(n)}; }
  static Term placeholder() { return {Kind::Placeholder, "_"}; }

  [[nodiscard]] bool is_variable() const { return kind == Kind::Variable; }
  [[nodiscard]] bool is_constant() const { return kind == Kind::Constant; }
  [[nodiscard]] bool is_placeholder() const { return kind == Kind::Placeholder; }

  friend auto operator<=>(const Term&, const Term&) = default;
};

enum class Op : std::uint8_t { Atom, Not, And, Or, Imp, Iff, Forall, Exists };

constexpr bool is_binary(Op op) {
  return op == Op::And || op == Op::Or || op == Op::Imp || op == Op::Iff;
}
constexpr bool is_quantifier(Op op) { return op == Op::Forall || op == Op::Exists; }

/// Immutable formula AST. Copies share structure.
class Formula {
 public:
  struct Node;

  static Formula atom(std::string predicate, std::vector<Term> args);
  static Formula negation(Formula scope);
  static Formula binary(Op op, Formula left, Formula right);
  static Formula quantified(Op op, std::string variable, Formula body);

  [[nodiscard]] Op op() const;
  [[nodiscard]] const std::string& predicate() const;  // Atom
  [[nodiscard]] const std::vector<Term>& args() const;  // Atom
  [[nodiscard]] std::size_t arity() const { return args().size(); }
  [[nodiscard]] const std::string& variable() const;  // Forall/Exists
  [[nodiscard]] const Formula& left() const;
  [[nodiscard]] const Formula& right() const;
  /// Single child of `~`, `forall`, `exists`.
  [[nodiscard]] const Formula& body() const;

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Formula::Node {
  Op op;
  std::string name;  // predicate or bound variable
  std::vector<Term> args;
  std::vector<Formula> children;
};

inline Formula Formula::atom(std::string predicate, std::vector<Term> args) {
  return Formula(std::make_shared<const Node>(
      Node{Op::Atom, std::move(predicate), std::move(args), {}}));
}

inline Formula Formula::negation(Formula scope) {
  return Formula(std::make_shared<const Node>(Node{Op::Not, {}, {}, {std::move(scope)}}));
}

inline Formula Formula::binary(Op op, Formula left, Formula right) {
  if (!is_binary(op)) throw std::invalid_argument("Formula::binary: not a binary connective");
  return Formula(std::make_shared<const Node>(
      Node{op, {}, {}, {std::move(left), std::move(right)}}));
}

inline Formula Formula::quantified(Op op, std::string variable, Formula body) {
  if (!is_quantifier(op)) throw std::invalid_argument("Formula::quantified: not a quantifier");
  return Formula(std::make_shared<const Node>(
      Node{op, std::move(variable), {}, {std::move(body)}}));
}

inline Op Formula::op() const { return node_->op; }
inline const std::string& Formula::predicate() const { return node_->name; }
inline const std::vector<Term>& Formula::args() const { return node_->args; }
inline const std::string& Formula::variable() const { return node_->name; }
inline const Formula& Formula::left() const { return node_->children.at(0); }
inline const Formula& Formula::right() const { return node_->children.at(1); }
inline const Formula& Formula::body() const { return node_->children.at(0); }

inline bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.op != y.op || x.name != y.name || x.args != y.args) return false;
  return std::equal(x.children.begin(), x.children.end(), y.children.begin(), y.children.end());
}

// ---------------------------------------------------------------------------
// Analysis

/// Names of variables with at least one free occurrence.
inline std::set<std::string> free_variables(const Formula& f) {
  std::set<std::string> out;
  std::multiset<std::string> bound;
  auto walk = [&](const auto& self, const Formula& g) -> void {
    switch (g.op()) {
      case Op::Atom:
        for (const auto& t : g.args())
          if (t.is_variable() && !bound.contains(t.name)) out.insert(t.name);
        return;
      case Op::Forall:
      case Op::Exists: {
        auto it = bound.insert(g.variable());
        self(self, g.body());
        bound.erase(it);
        return;
      }
      case Op::Not:
        self(self, g.body());
        return;
      default:
        self(self, g.left());
        self(self, g.right());
    }
  };
  walk(walk, f);
  return out;
}

/// Constants occurring anywhere in `f`, in first-occurrence order.
inline std::vector<std::string> constants_of(const Formula& f) {
  std::vector<std::string> out;
  auto walk = [&](const auto& self, const Formula& g) -> void {
    if (g.op() == Op::Atom) {
      for (const auto& t : g.args())
        if (t.is_constant() && std::find(out.begin(), out.end(), t.name) == out.end())
          out.push_back(t.name);
      return;
    }
    self(self, g.op() == Op::Not || is_quantifier(g.op()) ? g.body() : g.left());
    if (is_binary(g.op())) self(self, g.right());
  };
  walk(walk, f);
  return out;
}

/// Predicate name -> arity, for every atom in `f`.
inline std::map<std::string, std::size_t> predicates_of(const Formula& f) {
  std::map<std::string, std::size_t> out;
  auto walk = [&](const auto& self, const Formula& g) -> void {
    if (g.op() == Op::Atom) {
      out.emplace(g.predicate(), g.arity());
      return;
    }
    self(self, g.op() == Op::Not || is_quantifier(g.op()) ? g.body() : g.left());
    if (is_binary(g.op())) self(self, g.right());
  };
  walk(walk, f);
  return out;
}

/// Complexity: atoms 0, every connective or quantifier adds one to the
/// maximum of its operands.
inline std::size_t complexity(const Formula& f) {
  switch (f.op()) {
    case Op::Atom:
      return 0;
    case Op::Not:
    case Op::Forall:
    case Op::Exists:
      return 1 + complexity(f.body());
    default:
      return 1 + std::max(complexity(f.left()), complexity(f.right()));
  }
}

struct FragmentClass {
  enum class Kind : std::uint8_t { Monadic, Dyadic2Var, Outside };
  Kind kind = Kind::Outside;
  std::size_t predicates = 0;

  friend bool operator==(const FragmentClass&, const FragmentClass&) = default;
};

inline std::string to_string(const FragmentClass& fc) {
  switch (fc.kind) {
    case FragmentClass::Kind::Monadic:
      return "Monadic(" + std::to_string(fc.predicates) + ")";
    case FragmentClass::Kind::Dyadic2Var:
      return "Dyadic2Var(" + std::to_string(fc.predicates) + ")";
    case FragmentClass::Kind::Outside:
      break;
  }
  return "Outside";
}

inline FragmentClass classify_fragment(const Formula& f) {
  const auto preds = predicates_of(f);
  const bool dyadic = std::any_of(preds.begin(), preds.end(),
                                  [](const auto& p) { return p.second == 2; });
  if (!dyadic) return {FragmentClass::Kind::Monadic, preds.size()};

  std::set<std::string> variables;
  auto walk = [&](const auto& self, const Formula& g) -> void {
    switch (g.op()) {
      case Op::Atom:
        for (const auto& t : g.args())
          if (t.is_variable()) variables.insert(t.name);
        return;
      case Op::Forall:
      case Op::Exists:
        variables.insert(g.variable());
        self(self, g.body());
        return;
      case Op::Not:
        self(self, g.body());
        return;
      default:
        self(self, g.left());
        self(self, g.right());
    }
  };
  walk(walk, f);
  if (variables.size() <= 2) return {FragmentClass::Kind::Dyadic2Var, preds.size()};
  return {FragmentClass::Kind::Outside, preds.size()};
}

/// Renames every bound variable after its binder depth (`_1`, `_2`, ...).
/// The names cannot clash with parsed identifiers, so two formulas are
/// alpha-equivalent iff their normal forms compare equal.
inline Formula alpha_normalize(const Formula& f) {
  std::map<std::string, std::vector<std::string>> env;
  auto walk = [&](const auto& self, const Formula& g, std::size_t depth) -> Formula {
    switch (g.op()) {
      case Op::Atom: {
        std::vector<Term> args = g.args();
        for (auto& t : args) {
          if (!t.is_variable()) continue;
          auto it = env.find(t.name);
          if (it != env.end() && !it->second.empty()) t.name = it->second.back();
        }
        return Formula::atom(g.predicate(), std::move(args));
      }
      case Op::Not:
        return Formula::negation(self(self, g.body(), depth));
      case Op::Forall:
      case Op::Exists: {
        std::string fresh = "_" + std::to_string(depth + 1);
        env[g.variable()].push_back(fresh);
        Formula body = self(self, g.body(), depth + 1);
        env[g.variable()].pop_back();
        return Formula::quantified(g.op(), std::move(fresh), std::move(body));
      }
      default:
        return Formula::binary(g.op(), self(self, g.left(), depth), self(self, g.right(), depth));
    }
  };
  return walk(walk, f, 0);
}

}  // namespace forcing
