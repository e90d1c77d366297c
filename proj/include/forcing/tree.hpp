#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "forcing/formula.hpp"
#include "forcing/syntax.hpp"

namespace forcing {

enum class NodeId : std::uint32_t {};

constexpr std::size_t index_of(NodeId id) { return static_cast<std::size_t>(id); }
constexpr NodeId node_id(std::size_t i) { return static_cast<NodeId>(i); }

class FreeVariableError : public std::invalid_argument {
 public:
  explicit FreeVariableError(const std::set<std::string>& vars)
      : std::invalid_argument("formula has free variables: " + join(vars)), vars_(vars) {}

  [[nodiscard]] const std::set<std::string>& variables() const { return vars_; }

 private:
  static std::string join(const std::set<std::string>& vars) {
    std::string out;
    for (const auto& v : vars) out += (out.empty() ? "" : ", ") + v;
    return out;
  }
  std::set<std::string> vars_;
};

/// An atom argument: either a filled term, or the placeholder left where the
/// variable of quantifier `owner` occurred (`occurrence` counts those
/// positions per quantifier).
struct Slot {
  Term term;
  NodeId owner{};
  std::uint32_t occurrence = 0;

  [[nodiscard]] bool filled() const { return !term.is_placeholder(); }
};

struct TreeNode {
  NodeId id{};
  Op op = Op::Atom;
  std::string name;  // predicate, or the quantified variable
  std::vector<Slot> args;
  // Binary: {left, right}. `~`: {scope}. Quantifiers: {template, instance...}.
  std::vector<NodeId> children;
  std::optional<NodeId> parent;
  // Inside the uninstantiated scope of some quantifier; never marked.
  bool is_template = false;
  // On instance roots: the individual that filled the parent's placeholders.
  std::optional<Term> instance_term;
};

/// The forcing tree of a closed formula. Quantifier nodes keep their
/// original scope as a template (children[0]) and grow one instance child
/// per individual they are instantiated with.
class ForcingTree {
 public:
  explicit ForcingTree(Formula source) : formula_(std::move(source)) {
    if (auto fv = free_variables(formula_); !fv.empty()) throw FreeVariableError(fv);
    std::vector<std::pair<std::string, NodeId>> env;
    std::map<NodeId, std::uint32_t> occurrences;
    build(formula_, std::nullopt, false, env, occurrences);
  }

  [[nodiscard]] NodeId root() const { return NodeId{0}; }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] const Formula& formula() const { return formula_; }
  [[nodiscard]] bool contains(NodeId id) const { return index_of(id) < nodes_.size(); }

  [[nodiscard]] const TreeNode& node(NodeId id) const {
    if (!contains(id)) throw std::out_of_range("unknown node " + std::to_string(index_of(id)));
    return nodes_[index_of(id)];
  }

  [[nodiscard]] NodeId left(NodeId id) const { return node(id).children.at(0); }
  [[nodiscard]] NodeId right(NodeId id) const { return node(id).children.at(1); }
  [[nodiscard]] NodeId scope(NodeId id) const { return node(id).children.at(0); }

  /// Instance children of a quantifier node (the template excluded).
  [[nodiscard]] std::span<const NodeId> instances(NodeId q) const {
    const auto& n = node(q);
    if (!is_quantifier(n.op)) return {};
    return std::span<const NodeId>(n.children).subspan(1);
  }

  [[nodiscard]] std::optional<NodeId> instance_for(NodeId q, const Term& t) const {
    for (NodeId c : instances(q))
      if (nodes_[index_of(c)].instance_term == t) return c;
    return std::nullopt;
  }

  /// Preorder over the whole tree, templates included unless asked otherwise.
  [[nodiscard]] std::vector<NodeId> preorder(bool include_templates = true) const {
    std::vector<NodeId> out;
    out.reserve(nodes_.size());
    std::vector<NodeId> stack{root()};
    while (!stack.empty()) {
      NodeId id = stack.back();
      stack.pop_back();
      const auto& n = nodes_[index_of(id)];
      if (n.is_template && !include_templates) continue;
      out.push_back(id);
      for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
    }
    return out;
  }

  /// The subformula rooted at `id`, with instantiated slots filled in. Slots
  /// owned by quantifiers above `id` that are still open print as `_`.
  [[nodiscard]] Formula node_formula(NodeId id) const {
    std::map<NodeId, std::string> open;
    return formula_at(id, open);
  }

  /// Profundity: 0 on atoms, otherwise one more than the deepest child.
  [[nodiscard]] std::size_t profundity(NodeId id) const {
    const auto& n = node(id);
    std::size_t deepest = 0;
    bool any = false;
    for (NodeId c : n.children) {
      deepest = std::max(deepest, profundity(c));
      any = true;
    }
    return any ? deepest + 1 : 0;
  }

  /// Clones the template scope of quantifier `q`, fills q's placeholders with
  /// `term`, and appends the clone as a new child of `q`.
  NodeId instantiate_branch(NodeId q, const Term& term) {
    const auto& qn = node(q);
    if (!is_quantifier(qn.op)) throw std::invalid_argument("instantiate_branch: node is not a quantifier");
    if (qn.is_template) throw std::invalid_argument("instantiate_branch: quantifier is inside a template");
    if (term.is_placeholder()) throw std::invalid_argument("instantiate_branch: cannot fill with a placeholder");
    const NodeId tmpl = qn.children.at(0);
    std::map<NodeId, NodeId> renamed;
    NodeId clone = clone_subtree(tmpl, q, q, term, false, renamed);
    nodes_[index_of(clone)].instance_term = term;
    nodes_[index_of(q)].children.push_back(clone);
    return clone;
  }

  /// Child counts per node: enough to undo later instantiations, since nodes
  /// and instance branches are only ever appended.
  [[nodiscard]] std::vector<std::size_t> shape() const {
    std::vector<std::size_t> counts(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) counts[i] = nodes_[i].children.size();
    return counts;
  }

  /// Drops every node and branch grown since `counts` was taken.
  void truncate(const std::vector<std::size_t>& counts) {
    if (counts.size() > nodes_.size()) throw std::invalid_argument("truncate: shape is from a larger tree");
    nodes_.resize(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) nodes_[i].children.resize(counts[i]);
  }

  [[nodiscard]] std::vector<NodeId> postorder(bool include_templates = true) const {
    std::vector<NodeId> out;
    auto walk = [&](const auto& self, NodeId id) -> void {
      const auto& n = nodes_[index_of(id)];
      if (n.is_template && !include_templates) return;
      for (NodeId c : n.children) self(self, c);
      out.push_back(id);
    };
    walk(walk, root());
    return out;
  }

 private:
  NodeId add(TreeNode n) {
    n.id = node_id(nodes_.size());
    nodes_.push_back(std::move(n));
    return nodes_.back().id;
  }

  NodeId build(const Formula& f, std::optional<NodeId> parent, bool in_template,
               std::vector<std::pair<std::string, NodeId>>& env,
               std::map<NodeId, std::uint32_t>& occurrences) {
    TreeNode n;
    n.op = f.op();
    n.parent = parent;
    n.is_template = in_template;
    if (f.op() == Op::Atom) {
      n.name = f.predicate();
      for (const auto& t : f.args()) {
        Slot s{t, NodeId{}, 0};
        if (t.is_variable()) {
          for (auto it = env.rbegin(); it != env.rend(); ++it) {
            if (it->first != t.name) continue;
            s.term = Term::placeholder();
            s.owner = it->second;
            s.occurrence = occurrences[it->second]++;
            break;
          }
        }
        n.args.push_back(std::move(s));
      }
      return add(std::move(n));
    }
    if (is_quantifier(f.op())) n.name = f.variable();
    const NodeId id = add(std::move(n));
    if (is_quantifier(f.op())) {
      env.emplace_back(f.variable(), id);
      NodeId child = build(f.body(), id, true, env, occurrences);
      env.pop_back();
      nodes_[index_of(id)].children.push_back(child);
    } else if (f.op() == Op::Not) {
      NodeId child = build(f.body(), id, in_template, env, occurrences);
      nodes_[index_of(id)].children.push_back(child);
    } else {
      NodeId l = build(f.left(), id, in_template, env, occurrences);
      NodeId r = build(f.right(), id, in_template, env, occurrences);
      nodes_[index_of(id)].children = {l, r};
    }
    return id;
  }

  NodeId clone_subtree(NodeId src, NodeId parent, NodeId filled_owner, const Term& term,
                       bool in_template, std::map<NodeId, NodeId>& renamed) {
    TreeNode copy = nodes_[index_of(src)];
    copy.parent = parent;
    copy.is_template = in_template;
    copy.instance_term.reset();
    std::vector<NodeId> old_children = std::move(copy.children);
    copy.children.clear();
    for (auto& s : copy.args) {
      if (s.filled()) continue;
      if (s.owner == filled_owner) {
        s.term = term;
      } else if (auto it = renamed.find(s.owner); it != renamed.end()) {
        s.owner = it->second;
      }
    }
    const bool quant = is_quantifier(copy.op);
    const NodeId id = add(std::move(copy));
    if (quant) renamed[src] = id;
    for (std::size_t i = 0; i < old_children.size(); ++i) {
      // Templates never carry instances, so a quantifier here has one child.
      const bool child_template = in_template || quant;
      NodeId c = clone_subtree(old_children[i], id, filled_owner, term, child_template, renamed);
      nodes_[index_of(id)].children.push_back(c);
    }
    return id;
  }

  Formula formula_at(NodeId id, std::map<NodeId, std::string>& open) const {
    const auto& n = node(id);
    switch (n.op) {
      case Op::Atom: {
        std::vector<Term> args;
        for (const auto& s : n.args) {
          if (s.filled()) {
            args.push_back(s.term);
          } else if (auto it = open.find(s.owner); it != open.end()) {
            args.push_back(Term::variable(it->second));
          } else {
            args.push_back(Term::placeholder());
          }
        }
        return Formula::atom(n.name, std::move(args));
      }
      case Op::Not:
        return Formula::negation(formula_at(n.children[0], open));
      case Op::Forall:
      case Op::Exists: {
        open[id] = n.name;
        Formula body = formula_at(n.children[0], open);
        open.erase(id);
        return Formula::quantified(n.op, n.name, std::move(body));
      }
      default:
        return Formula::binary(n.op, formula_at(n.children[0], open),
                               formula_at(n.children[1], open));
    }
  }

  std::vector<TreeNode> nodes_;
  Formula formula_;
};

inline ForcingTree build_initial_tree(const Formula& f) { return ForcingTree(f); }

/// Short node label: the connective, `forall x`/`exists x`, or the atom with
/// its slots.
inline std::string node_label(const ForcingTree& t, NodeId id) {
  const auto& n = t.node(id);
  switch (n.op) {
    case Op::Atom:
      return format_formula(t.node_formula(id));
    case Op::Not:
      return "~";
    case Op::And:
      return "&";
    case Op::Or:
      return "|";
    case Op::Imp:
      return "->";
    case Op::Iff:
      return "<->";
    case Op::Forall:
      return "forall " + n.name;
    case Op::Exists:
      return "exists " + n.name;
  }
  return "?";
}

}  // namespace forcing
