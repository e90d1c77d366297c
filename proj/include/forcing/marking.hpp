#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "forcing/formula.hpp"
#include "forcing/rules.hpp"
#include "forcing/syntax.hpp"
#include "forcing/tree.hpp"

namespace forcing {

inline const std::string kGenericVariable = "ν";

class PremiseMismatch : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class IndependenceViolation : public PremiseMismatch {
 public:
  using PremiseMismatch::PremiseMismatch;
};

class ScopeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Justification {
  Rule rule;
  std::vector<NodeId> premises;
  // Instantiation that created the marked branch, e.g. IA∀ in "IA∀ y A∀".
  std::optional<Rule> instantiation;
};

struct Step {
  std::size_t number = 0;
  std::optional<NodeId> node;
  std::optional<Mark> mark;
  Rule rule = Rule::RR;
  std::optional<Rule> instantiation;
  std::vector<std::size_t> premises;  // earlier step numbers
  std::vector<NodeId> premise_nodes;
  bool provisional = false;  // taken while an option was open
};

using Trace = std::vector<Step>;

struct Consequence {
  NodeId node;
  Mark mark;
  Justification justification;
};

struct WitnessInfo {
  NodeId introduced_at;
  std::set<std::string> depends_on;  // variables free where it was introduced
};

enum class RuleOrder : std::uint8_t { Preorder, Postorder };

// Forced: saturate introduces witnesses itself. Deferred: it leaves them to
// the caller (the decider branches on them).
enum class WitnessPolicy : std::uint8_t { Forced, Deferred };

inline constexpr std::size_t kDefaultIndividualCap = 8;

struct EngineConfig {
  std::optional<std::size_t> max_individuals;
  std::size_t branch_limit = 100000;
  bool allow_direct = false;
  RuleOrder order = RuleOrder::Preorder;
  WitnessPolicy witnesses = WitnessPolicy::Forced;
  // Also apply the I∀/I∃ permissions to unmarked quantifiers.
  bool permissive = false;
};

struct SaturateResult {
  enum class Kind : std::uint8_t { Quiescent, DoubleMark };
  Kind kind = Kind::Quiescent;
  NodeId first{};
  NodeId second{};

  [[nodiscard]] bool double_mark() const { return kind == Kind::DoubleMark; }
};

enum class FrameKind : std::uint8_t { Root, Option, Witness };

namespace detail {

struct Board {
  explicit Board(ForcingTree t) : tree(std::move(t)) {}

  ForcingTree tree;
  std::vector<std::optional<Mark>> marks;
  std::vector<std::size_t> mark_step;
  std::vector<std::string> keys;  // empty for template nodes
  std::map<std::string, std::vector<NodeId>> by_key;
  std::map<NodeId, Rule> created_by;
  std::vector<Term> domain;
  std::map<std::string, WitnessInfo> witnesses;
  std::size_t introduced = 0;
  std::optional<std::pair<NodeId, NodeId>> double_mark;
};

}  // namespace detail

struct SuppositionFrame {
  FrameKind kind = FrameKind::Option;
  NodeId node{};
  Mark assumed = Mark::Zero;
  std::size_t opened_at = 0;
  std::set<std::string> free_vars;
  std::shared_ptr<const detail::Board> snapshot;  // without its tree
  std::vector<std::size_t> shape;
};

struct ScopeHandle {
  std::size_t depth = 0;
  std::size_t opened_at = 0;
};

struct Outcome {
  enum class Kind : std::uint8_t { Contradiction, TargetReached, Abandon };
  Kind kind = Kind::Abandon;
  NodeId target{};

  static Outcome contradiction() { return {Kind::Contradiction, {}}; }
  static Outcome target_reached(NodeId n) { return {Kind::TargetReached, n}; }
  static Outcome abandon() { return {Kind::Abandon, {}}; }
};

/// The partial marking of a forcing tree together with everything the rules
/// consult: individuals, witnesses, open suppositions and the step trace.
/// Copies are independent.
class MarkingState {
 public:
  explicit MarkingState(ForcingTree tree) : board_(std::move(tree)) {
    for (const auto& c : constants_of(board_.tree.formula()))
      board_.domain.push_back(Term::constant(c));
    grow();
  }

  [[nodiscard]] const ForcingTree& tree() const { return board_.tree; }
  [[nodiscard]] const Trace& trace() const { return trace_; }
  [[nodiscard]] const std::vector<Term>& domain() const { return board_.domain; }
  [[nodiscard]] const std::map<std::string, WitnessInfo>& witnesses() const {
    return board_.witnesses;
  }
  [[nodiscard]] const std::vector<SuppositionFrame>& frames() const { return frames_; }
  [[nodiscard]] std::optional<std::pair<NodeId, NodeId>> double_mark() const {
    return board_.double_mark;
  }
  /// Individuals added by witnesses or seeding (the formula's constants excluded).
  [[nodiscard]] std::size_t introduced() const { return board_.introduced; }
  /// Set when a forced witness was skipped because the individual cap was hit.
  [[nodiscard]] bool capped() const { return capped_; }
  [[nodiscard]] bool valid_signaled() const { return valid_signaled_; }

  [[nodiscard]] std::optional<Mark> mark(NodeId n) const { return board_.marks.at(index_of(n)); }
  [[nodiscard]] bool is_marked(NodeId n) const { return mark(n).has_value(); }
  [[nodiscard]] std::size_t mark_step(NodeId n) const { return board_.mark_step.at(index_of(n)); }

  /// Alpha-normalized text of the node's formula; empty for template nodes.
  [[nodiscard]] const std::string& key(NodeId n) const { return board_.keys.at(index_of(n)); }

  /// Other attached nodes associated with the same formula.
  [[nodiscard]] std::vector<NodeId> same_formula(NodeId n) const {
    std::vector<NodeId> out;
    const auto& k = key(n);
    if (k.empty()) return out;
    for (NodeId m : board_.by_key.at(k))
      if (m != n) out.push_back(m);
    return out;
  }

  /// Whether the node's mark was taken inside a still open option.
  [[nodiscard]] bool is_provisional(NodeId n) const {
    if (!is_marked(n)) return false;
    for (const auto& f : frames_)
      if (f.kind == FrameKind::Option && mark_step(n) >= f.opened_at) return true;
    return false;
  }

  [[nodiscard]] bool is_witness(const Term& t) const {
    return t.is_constant() && board_.witnesses.contains(t.name);
  }

  // ---------------------------------------------------------------------
  // Marking

  /// Marks `n` with `v` after checking that `j`'s premises hold. Marking a
  /// node with the value it already has does nothing; the opposite value
  /// records a double mark.
  void set_mark(NodeId n, Mark v, const Justification& j) {
    require_open();
    require_markable(n);
    check_premises(n, v, j);
    record(n, v, j);
  }

  /// Every mark one rule application derives around `n` that is not yet in
  /// place. Instantiation obligations are left to saturate.
  [[nodiscard]] std::vector<Consequence> forced_consequences(NodeId n) const {
    std::vector<Consequence> out;
    const auto& node = tree().node(n);
    if (node.is_template) return out;

    for (const auto& p : propositional_rules()) {
      if (p.op != node.op) continue;
      bool premised = true;
      std::vector<NodeId> premise_nodes;
      for (const auto& c : p.premises) {
        NodeId at = node_at(n, c.pos);
        premised = premised && mark(at) == c.value;
        premise_nodes.push_back(at);
      }
      if (!premised) continue;
      for (const auto& c : p.conclusions) {
        NodeId at = node_at(n, c.pos);
        if (mark(at) != c.value) out.push_back({at, c.value, {p.rule, premise_nodes, {}}});
      }
    }

    if (is_quantifier(node.op)) quantifier_consequences(n, out);

    if (auto v = mark(n); v && !key(n).empty()) {
      for (NodeId k : board_.by_key.at(key(n))) {
        if (k == n || mark(k) == v) continue;
        out.push_back({k, *v, {*v == Mark::One ? Rule::IA : Rule::IR, {n}, {}}});
      }
    }
    return out;
  }

  /// Applies forced rules and instantiation obligations to fixpoint.
  SaturateResult saturate(const EngineConfig& cfg) {
    const std::size_t cap = cfg.max_individuals.value_or(kDefaultIndividualCap);
    while (true) {
      if (board_.double_mark) return dm_result();
      bool changed = false;
      const auto order = cfg.order == RuleOrder::Preorder ? tree().preorder(false)
                                                          : tree().postorder(false);
      for (NodeId n : order) {
        changed = obligations(n, cfg.witnesses, cap) || changed;
        for (auto& c : forced_consequences(n)) {
          if (mark(c.node) == c.mark) continue;
          record(c.node, c.mark, c.justification);
          changed = true;
          if (board_.double_mark) return dm_result();
        }
      }
      if (!changed && board_.domain.empty() && needs_individual() &&
          pending_witnesses().empty()) {
        seed_individual();
        changed = true;
      }
      if (!changed && cfg.permissive) changed = instantiate_unmarked() > 0;
      if (!changed) return {};
    }
  }

  // ---------------------------------------------------------------------
  // Individuals and instantiation

  /// Adds the generic variable ν as an individual (at most once).
  const Term& add_generic_variable() {
    const Term v = Term::variable(kGenericVariable);
    auto it = std::find(board_.domain.begin(), board_.domain.end(), v);
    if (it != board_.domain.end()) return *it;
    board_.domain.push_back(v);
    return board_.domain.back();
  }

  /// Adds a fresh constant when the domain is empty ("models are nonempty").
  Term seed_individual() {
    Term t = Term::constant(fresh_name());
    board_.domain.push_back(t);
    ++board_.introduced;
    return t;
  }

  /// Instantiates quantifier `q` with `t`, tagging the branch with `rule`.
  NodeId instantiate(NodeId q, const Term& t, Rule rule) {
    require_open();
    if (tree().node(q).is_template) throw std::invalid_argument("instantiate: template node");
    if (auto existing = tree().instance_for(q, t)) return *existing;
    if (std::find(board_.domain.begin(), board_.domain.end(), t) == board_.domain.end())
      throw std::invalid_argument("instantiate: " + t.name + " is not an individual");
    const std::size_t before = tree().size();
    NodeId inst = board_.tree.instantiate_branch(q, t);
    board_.created_by[inst] = rule;
    grow(before);
    return inst;
  }

  /// Introduces a fresh witness for the rejected ∀ / accepted ∃ node `q`
  /// and returns the new instance.
  NodeId introduce_witness(NodeId q) {
    require_open();
    const auto& node = tree().node(q);
    if (!is_quantifier(node.op) || node.is_template)
      throw std::invalid_argument("introduce_witness: not an attached quantifier");
    const Formula f = tree().node_formula(q);
    WitnessInfo info{q, free_variables(f)};
    for (const auto& c : constants_of(f)) {
      auto it = board_.witnesses.find(c);
      if (it != board_.witnesses.end())
        info.depends_on.insert(it->second.depends_on.begin(), it->second.depends_on.end());
    }
    const Term w = Term::constant(fresh_name());
    board_.witnesses.emplace(w.name, std::move(info));
    board_.domain.push_back(w);
    ++board_.introduced;
    return instantiate(q, w, node.op == Op::Forall ? Rule::IR_Forall : Rule::IA_Exists);
  }

  /// Applies I∀/I∃: every attached unmarked quantifier gets a branch for
  /// every individual it lacks. Returns the number of new branches.
  std::size_t instantiate_unmarked() {
    std::size_t added = 0;
    for (NodeId q : tree().preorder(false)) {
      const auto& node = tree().node(q);
      if (!is_quantifier(node.op) || is_marked(q)) continue;
      const Rule rule = node.op == Op::Forall ? Rule::I_Forall : Rule::I_Exists;
      for (const auto& t : std::vector<Term>(board_.domain)) {
        if (tree().instance_for(q, t)) continue;
        instantiate(q, t, rule);
        ++added;
      }
    }
    return added;
  }

  /// Rejected ∀ / accepted ∃ nodes none of whose instances carries the
  /// needed mark, lowest id first.
  [[nodiscard]] std::vector<NodeId> pending_witnesses() const {
    std::vector<NodeId> out;
    for (NodeId q : tree().preorder(false))
      if (witness_needed(q)) out.push_back(q);
    std::sort(out.begin(), out.end());
    return out;
  }

  [[nodiscard]] bool witness_needed(NodeId q) const {
    const auto& node = tree().node(q);
    if (!is_quantifier(node.op) || node.is_template) return false;
    const auto v = mark(q);
    if (!v) return false;
    const Mark needed = node.op == Op::Forall ? Mark::Zero : Mark::One;
    if (*v != needed) return false;
    for (NodeId c : tree().instances(q))
      if (mark(c) == needed) return false;
    return true;
  }

  /// Marked connectives whose mark no single child settles while both
  /// children are unmarked, lowest id first.
  [[nodiscard]] std::vector<NodeId> pending_splits() const {
    std::vector<NodeId> out;
    for (NodeId n : tree().preorder(false)) {
      const auto& node = tree().node(n);
      const auto v = mark(n);
      if (!v || !is_binary(node.op)) continue;
      if (is_marked(node.children[0]) || is_marked(node.children[1])) continue;
      const bool open = node.op == Op::Iff || (node.op == Op::And && *v == Mark::Zero) ||
                        (node.op != Op::And && *v == Mark::One);
      if (open) out.push_back(n);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // ---------------------------------------------------------------------
  // Independence

  /// Whether `var` may be generalized at instance node `n` (Aa∀ / Ra∃).
  [[nodiscard]] bool is_independent(const std::string& var, NodeId n) const {
    for (const auto& f : frames_)
      if (f.free_vars.contains(var)) return false;
    const Formula fn = tree().node_formula(n);
    for (const auto& c : constants_of(fn)) {
      auto it = board_.witnesses.find(c);
      if (it != board_.witnesses.end() && it->second.depends_on.contains(var)) return false;
    }
    if (const auto& parent = tree().node(n).parent) {
      if (is_quantifier(tree().node(*parent).op) &&
          free_variables(tree().node_formula(*parent)).contains(var))
        return false;
    }
    return true;
  }

  // ---------------------------------------------------------------------
  // Suppositions

  /// RR: rejects the root inside a scope whose contradiction proves validity.
  ScopeHandle open_root() {
    require_open();
    if (is_marked(tree().root())) throw ScopeError("open_root: root already marked");
    ScopeHandle h = push_frame(FrameKind::Root, tree().root(), Mark::Zero);
    record(tree().root(), Mark::Zero, {Rule::RR, {}, {}});
    return h;
  }

  /// OA / OR: provisionally marks the unmarked node `n` with `v`.
  ScopeHandle open_supposition(NodeId n, Mark v) {
    require_open();
    require_markable(n);
    if (is_marked(n)) throw ScopeError("open_supposition: node already marked");
    ScopeHandle h = push_frame(FrameKind::Option, n, v);
    record(n, v, {v == Mark::One ? Rule::OA : Rule::OR, {}, {}});
    return h;
  }

  /// Introduces a fresh witness for `q` inside a scope that can be abandoned.
  ScopeHandle open_witness(NodeId q) {
    require_open();
    if (!witness_needed(q)) throw ScopeError("open_witness: no witness is owed at this node");
    ScopeHandle h = push_frame(FrameKind::Witness, q, *mark(q));
    NodeId inst = introduce_witness(q);
    frames_.back().node = inst;
    const bool forall = tree().node(q).op == Op::Forall;
    record(inst, *mark(q), {forall ? Rule::R_Forall : Rule::A_Exists, {q}, {}});
    return h;
  }

  /// Closes the innermost scope: rolls back everything marked inside it and
  /// asserts the single conclusion its rule allows.
  void discharge(ScopeHandle h, Outcome outcome) {
    if (frames_.empty() || h.depth != frames_.size() - 1 || frames_.back().opened_at != h.opened_at)
      throw ScopeError("discharge: scope is not the innermost open one");
    const SuppositionFrame frame = frames_.back();

    std::optional<Consequence> conclusion;
    std::vector<std::size_t> premise_steps{frame.opened_at};
    switch (outcome.kind) {
      case Outcome::Kind::Abandon:
        break;
      case Outcome::Kind::Contradiction: {
        const auto closing = closing_step_after(frame.opened_at);
        if (!closing) throw ScopeError("discharge: no contradiction was derived inside the scope");
        premise_steps.push_back(*closing);
        if (frame.kind == FrameKind::Option) {
          const Rule r = frame.assumed == Mark::One ? Rule::OA_DM : Rule::OR_DM;
          conclusion = Consequence{frame.node, flip(frame.assumed), {r, {}, {}}};
        }
        break;
      }
      case Outcome::Kind::TargetReached: {
        if (frame.kind != FrameKind::Option)
          throw ScopeError("discharge: only options conclude from a reached target");
        const NodeId target = outcome.target;
        if (!is_marked(target) || mark_step(target) <= frame.opened_at)
          throw ScopeError("discharge: target was not derived inside the scope");
        const auto rule = option_rule_for(frame, target);
        if (!rule) throw ScopeError("discharge: no option rule links the supposition and target");
        premise_steps.push_back(mark_step(target));
        conclusion = Consequence{*tree().node(frame.node).parent, Mark::One, {*rule, {}, {}}};
        break;
      }
    }

    restore(*frame.snapshot, frame.shape);
    frames_.pop_back();

    if (frame.kind == FrameKind::Root && outcome.kind == Outcome::Kind::Contradiction) {
      Step s;
      s.number = trace_.size() + 1;
      s.rule = Rule::RR_DM;
      s.premises = premise_steps;
      trace_.push_back(std::move(s));
      valid_signaled_ = true;
      return;
    }
    if (conclusion) record(conclusion->node, conclusion->mark, conclusion->justification, premise_steps);
  }

  /// Records a closure forced by the individual cap at `q`: every allowed
  /// witness choice failed.
  void close_capped(NodeId q) {
    Step s;
    s.number = trace_.size() + 1;
    s.node = q;
    s.rule = Rule::Cap;
    s.premise_nodes = {q};
    if (is_marked(q)) s.premises = {mark_step(q)};
    s.provisional = in_option();
    trace_.push_back(std::move(s));
    capped_ = true;
  }

  /// Records ABM: the tree is consistently marked with the root rejected.
  void close_well_marked() {
    Step s;
    s.number = trace_.size() + 1;
    s.rule = Rule::ABM;
    trace_.push_back(std::move(s));
  }

  void note_capped() { capped_ = true; }

 private:
  // ---------------------------------------------------------------------
  // Bookkeeping

  void grow(std::size_t from = 0) {
    const std::size_t n = tree().size();
    board_.marks.resize(n);
    board_.mark_step.resize(n, 0);
    board_.keys.resize(n);
    for (std::size_t i = from; i < n; ++i) {
      const NodeId id = node_id(i);
      if (tree().node(id).is_template) continue;
      board_.keys[i] = format_formula(alpha_normalize(tree().node_formula(id)));
      board_.by_key[board_.keys[i]].push_back(id);
    }
  }

  void restore(const detail::Board& snapshot, const std::vector<std::size_t>& shape) {
    ForcingTree current = std::move(board_.tree);
    board_ = snapshot;
    current.truncate(shape);
    board_.tree = std::move(current);
  }

  ScopeHandle push_frame(FrameKind kind, NodeId n, Mark v) {
    SuppositionFrame f;
    f.kind = kind;
    f.node = n;
    f.assumed = v;
    f.opened_at = trace_.size() + 1;
    if (kind == FrameKind::Option) f.free_vars = free_variables(tree().node_formula(n));
    f.shape = tree().shape();
    ForcingTree held = std::move(board_.tree);
    f.snapshot = std::make_shared<const detail::Board>(board_);
    board_.tree = std::move(held);
    frames_.push_back(std::move(f));
    return {frames_.size() - 1, frames_.back().opened_at};
  }

  [[nodiscard]] bool in_option() const {
    return std::any_of(frames_.begin(), frames_.end(),
                       [](const auto& f) { return f.kind == FrameKind::Option; });
  }

  [[nodiscard]] std::optional<std::size_t> closing_step_after(std::size_t opened_at) const {
    for (auto it = trace_.rbegin(); it != trace_.rend() && it->number > opened_at; ++it)
      if (it->rule == Rule::DM || it->rule == Rule::Cap) return it->number;
    return std::nullopt;
  }

  std::string fresh_name() {
    const auto constants = constants_of(tree().formula());
    while (true) {
      std::string name = "w" + std::to_string(++witness_counter_);
      if (std::find(constants.begin(), constants.end(), name) == constants.end()) return name;
    }
  }

  void require_open() const {
    if (board_.double_mark) throw std::logic_error("state already holds a double mark");
  }

  void require_markable(NodeId n) const {
    const auto& node = tree().node(n);
    if (node.is_template) throw PremiseMismatch("template nodes are never marked");
  }

  SaturateResult dm_result() const {
    return {SaturateResult::Kind::DoubleMark, board_.double_mark->first,
            board_.double_mark->second};
  }

  bool record(NodeId n, Mark v, const Justification& j,
              std::optional<std::vector<std::size_t>> premise_steps = std::nullopt) {
    const std::size_t i = index_of(n);
    const auto current = board_.marks[i];
    if (current == v) return false;

    Step s;
    s.number = trace_.size() + 1;
    s.node = n;
    s.mark = v;
    s.rule = j.rule;
    s.instantiation = j.instantiation;
    if (!s.instantiation && !current) {
      if (auto it = board_.created_by.find(n); it != board_.created_by.end())
        s.instantiation = it->second;
    }
    s.premise_nodes = j.premises;
    if (premise_steps) {
      s.premises = *premise_steps;
    } else {
      for (NodeId p : j.premises)
        if (board_.marks[index_of(p)]) s.premises.push_back(board_.mark_step[index_of(p)]);
    }
    s.provisional = in_option();
    trace_.push_back(s);

    if (current) {
      conflict(board_.mark_step[i], s.number, n, n);
      return true;
    }
    board_.marks[i] = v;
    board_.mark_step[i] = s.number;
    if (const auto& k = board_.keys[i]; !k.empty()) {
      for (NodeId other : board_.by_key.at(k)) {
        if (other != n && board_.marks[index_of(other)] == flip(v)) {
          conflict(board_.mark_step[index_of(other)], s.number, other, n);
          break;
        }
      }
    }
    return true;
  }

  void conflict(std::size_t a, std::size_t b, NodeId n1, NodeId n2) {
    Step s;
    s.number = trace_.size() + 1;
    s.rule = Rule::DM;
    s.premises = {a, b};
    s.premise_nodes = {n1, n2};
    s.provisional = in_option();
    trace_.push_back(std::move(s));
    board_.double_mark = std::make_pair(n1, n2);
  }

  [[nodiscard]] NodeId node_at(NodeId subject, Pos pos) const {
    switch (pos) {
      case Pos::Self:
        return subject;
      case Pos::Left:
        return tree().node(subject).children.at(0);
      case Pos::Right:
        return tree().node(subject).children.at(1);
    }
    return subject;
  }

  [[nodiscard]] std::optional<NodeId> quantifier_parent(NodeId n) const {
    const auto& node = tree().node(n);
    if (!node.parent) return std::nullopt;
    const auto& p = tree().node(*node.parent);
    if (!is_quantifier(p.op) || p.children.at(0) == n) return std::nullopt;
    return *node.parent;
  }

  [[nodiscard]] bool witness_instance(NodeId q, NodeId inst) const {
    const auto& t = tree().node(inst).instance_term;
    if (!t || !t->is_constant()) return false;
    auto it = board_.witnesses.find(t->name);
    return it != board_.witnesses.end() && it->second.introduced_at == q;
  }

  [[nodiscard]] bool generalizable(NodeId inst) const {
    const auto& t = tree().node(inst).instance_term;
    return t && t->is_variable() && is_independent(t->name, inst);
  }

  void quantifier_consequences(NodeId q, std::vector<Consequence>& out) const {
    const bool forall = tree().node(q).op == Op::Forall;
    const auto v = mark(q);
    const auto insts = tree().instances(q);

    // Downward: A∀, R∃ over every instance; R∀, A∃ over witness instances.
    if (v) {
      const bool universal = forall == (*v == Mark::One);
      for (NodeId c : insts) {
        if (mark(c) == v) continue;
        if (universal) {
          out.push_back({c, *v, {forall ? Rule::A_Forall : Rule::R_Exists, {q}, {}}});
        } else if (witness_instance(q, c)) {
          out.push_back({c, *v, {forall ? Rule::R_Forall : Rule::A_Exists, {q}, {}}});
        }
      }
    }

    // Upward: Ra∀ and Aa∃ from any instance, Aa∀ and Ra∃ from independent
    // variable instances.
    const Mark witnessing = forall ? Mark::Zero : Mark::One;
    if (v != witnessing) {
      for (NodeId c : insts) {
        if (mark(c) == witnessing) {
          out.push_back({q, witnessing, {forall ? Rule::Ra_Forall : Rule::Aa_Exists, {c}, {}}});
          break;
        }
      }
    }
    const Mark general = flip(witnessing);
    if (v != general) {
      for (NodeId c : insts) {
        if (mark(c) == general && generalizable(c)) {
          out.push_back({q, general, {forall ? Rule::Aa_Forall : Rule::Ra_Exists, {c}, {}}});
          break;
        }
      }
    }
  }

  [[nodiscard]] bool needs_individual() const {
    for (NodeId q : tree().preorder(false)) {
      const auto& node = tree().node(q);
      const auto v = mark(q);
      if (!v || !is_quantifier(node.op)) continue;
      if ((node.op == Op::Forall) == (*v == Mark::One)) return true;
    }
    return false;
  }

  // Instantiation obligations at `q`; returns whether anything was added.
  bool obligations(NodeId q, WitnessPolicy policy, std::size_t cap) {
    const auto& node = tree().node(q);
    const auto v = mark(q);
    if (!v || !is_quantifier(node.op)) return false;
    const bool forall = node.op == Op::Forall;
    bool changed = false;
    if (forall == (*v == Mark::One)) {
      const Rule rule = forall ? Rule::IA_Forall : Rule::IR_Exists;
      for (const auto& t : std::vector<Term>(board_.domain)) {
        if (tree().instance_for(q, t)) continue;
        instantiate(q, t, rule);
        changed = true;
      }
      return changed;
    }
    if (policy != WitnessPolicy::Forced || !witness_needed(q)) return false;
    for (NodeId c : tree().instances(q))
      if (witness_instance(q, c)) return false;
    if (board_.introduced >= cap) {
      capped_ = true;
      return false;
    }
    introduce_witness(q);
    return true;
  }

  [[nodiscard]] std::optional<Rule> option_rule_for(const SuppositionFrame& f, NodeId target) const {
    const auto& parent = tree().node(f.node).parent;
    if (!parent) return std::nullopt;
    for (const auto& o : option_rules()) {
      if (tree().node(*parent).op != o.op) continue;
      if (node_at(*parent, o.supposed.pos) != f.node || f.assumed != o.supposed.value) continue;
      if (node_at(*parent, o.target.pos) != target || mark(target) != o.target.value) continue;
      return o.rule;
    }
    return std::nullopt;
  }

  void check_premises(NodeId n, Mark v, const Justification& j) const {
    const auto fail = [&](const std::string& why) {
      throw PremiseMismatch(std::string(rule_name(j.rule)) + " cannot mark node " +
                            std::to_string(index_of(n)) + " with " + to_char(v) + ": " + why);
    };
    const auto& node = tree().node(n);
    switch (j.rule) {
      case Rule::Leaf:
        if (node.op != Op::Atom) fail("not a leaf");
        return;
      case Rule::RR:
        if (n != tree().root() || v != Mark::Zero) fail("RR rejects the root only");
        return;
      case Rule::IA:
      case Rule::IR: {
        const Mark need = j.rule == Rule::IA ? Mark::One : Mark::Zero;
        if (v != need) fail("wrong value");
        for (NodeId k : j.premises)
          if (k != n && !key(n).empty() && key(k) == key(n) && mark(k) == need) return;
        fail("no premise node with the same formula carries the mark");
        return;
      }
      case Rule::A_Forall:
      case Rule::R_Exists:
      case Rule::R_Forall:
      case Rule::A_Exists: {
        const bool forall = j.rule == Rule::A_Forall || j.rule == Rule::R_Forall;
        const Mark need = (j.rule == Rule::A_Forall || j.rule == Rule::A_Exists) ? Mark::One
                                                                                  : Mark::Zero;
        const auto q = quantifier_parent(n);
        if (!q || tree().node(*q).op != (forall ? Op::Forall : Op::Exists)) fail("not an instance");
        if (v != need || mark(*q) != need) fail("quantifier does not carry the mark");
        const bool witness_rule = j.rule == Rule::R_Forall || j.rule == Rule::A_Exists;
        if (witness_rule && !witness_instance(*q, n)) fail("instance is not a fresh witness");
        return;
      }
      case Rule::Ra_Forall:
      case Rule::Aa_Exists:
      case Rule::Aa_Forall:
      case Rule::Ra_Exists: {
        const bool forall = j.rule == Rule::Ra_Forall || j.rule == Rule::Aa_Forall;
        const Mark need = (j.rule == Rule::Aa_Exists || j.rule == Rule::Aa_Forall) ? Mark::One
                                                                                    : Mark::Zero;
        if (node.op != (forall ? Op::Forall : Op::Exists) || v != need) fail("wrong node or value");
        const bool general = j.rule == Rule::Aa_Forall || j.rule == Rule::Ra_Exists;
        for (NodeId c : j.premises) {
          if (quantifier_parent(c) != n || mark(c) != need) continue;
          if (!general) return;
          const auto& t = tree().node(c).instance_term;
          if (!t || !t->is_variable()) fail("generalization needs a variable instance");
          if (!is_independent(t->name, c))
            throw IndependenceViolation(std::string(rule_name(j.rule)) + ": " + t->name +
                                        " is not independent at node " +
                                        std::to_string(index_of(c)));
          return;
        }
        fail("no instance premise carries the mark");
        return;
      }
      default:
        break;
    }
    if (const auto* p = find_propositional_rule(j.rule)) {
      for (const auto& c : p->conclusions) {
        if (c.value != v) continue;
        std::optional<NodeId> subject = n;
        if (c.pos != Pos::Self) subject = node.parent;
        if (!subject || tree().node(*subject).op != p->op) continue;
        if (node_at(*subject, c.pos) != n) continue;
        bool premised = true;
        for (const auto& pc : p->premises) premised = premised && mark(node_at(*subject, pc.pos)) == pc.value;
        if (premised) return;
      }
      fail("premise marks are missing");
    }
    fail("rule is applied through suppositions, discharge or the decider only");
  }

  detail::Board board_;
  Trace trace_;
  std::vector<SuppositionFrame> frames_;
  std::size_t witness_counter_ = 0;
  bool capped_ = false;
  bool valid_signaled_ = false;
};

inline MarkingState init_marking(const ForcingTree& t) { return MarkingState(t); }

}  // namespace forcing
