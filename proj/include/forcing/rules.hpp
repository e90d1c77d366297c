#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "forcing/formula.hpp"

namespace forcing {

enum class Mark : std::uint8_t { Zero = 0, One = 1 };

constexpr Mark flip(Mark m) { return m == Mark::One ? Mark::Zero : Mark::One; }
constexpr Mark to_mark(bool b) { return b ? Mark::One : Mark::Zero; }
constexpr char to_char(Mark m) { return m == Mark::One ? '1' : '0'; }

enum class Rule : std::uint8_t {
  // Bookkeeping
  RR, Leaf, OA, OR, DM, ABM, Cap,
  // Discharge
  RR_DM, OA_DM, OR_DM, OAi_Ad_Imp, ORd_Ri_Imp, ORi_Ad_Or, ORd_Ai_Or,
  // Iteration
  IA, IR,
  // Conditional
  R_Imp, AiRd_Imp, AiA_Imp, RdA_Imp, Ri_Imp, Ad_Imp,
  // Conjunction
  A_And, AiAd_And, AiR_And, AdR_And, Ri_And, Rd_And,
  // Disjunction
  R_Or, RiRd_Or, RiA_Or, RdA_Or, Ai_Or, Ad_Or,
  // Biconditional
  A_Iff, AiAd_Iff, RiRd_Iff, AiRd_Iff, RiAd_Iff, AiA_Iff, RdA_Iff, RiA_Iff, AdA_Iff,
  RiR_Iff, AiR_Iff, RdR_Iff, AdR_Iff,
  // Negation
  A_Not, R_Not, Aa_Not, Ra_Not,
  // Quantifiers
  A_Forall, R_Forall, Aa_Forall, Ra_Forall, A_Exists, R_Exists, Aa_Exists, Ra_Exists,
  // Instantiation
  IA_Forall, IR_Forall, I_Forall, IA_Exists, IR_Exists, I_Exists,
};

inline constexpr std::size_t kRuleCount = static_cast<std::size_t>(Rule::I_Exists) + 1;

inline std::string_view rule_name(Rule r) {
  static constexpr std::array<std::string_view, kRuleCount> names = {
      "RR", "m", "OA", "OR", "DM", "ABM", "CAP",
      "RR-DM", "OA-DM", "OR-DM", "OAi-Ad→", "ORd-Ri→", "ORi-Ad∨", "ORd-Ai∨",
      "IA", "IR",
      "R→", "AiRd→", "AiA→", "RdA→", "Ri→", "Ad→",
      "A∧", "AiAd∧", "AiR∧", "AdR∧", "Ri∧", "Rd∧",
      "R∨", "RiRd∨", "RiA∨", "RdA∨", "Ai∨", "Ad∨",
      "A↔", "AiAd↔", "RiRd↔", "AiRd↔", "RiAd↔", "AiA↔", "RdA↔", "RiA↔", "AdA↔",
      "RiR↔", "AiR↔", "RdR↔", "AdR↔",
      "A∼", "R∼", "Aa∼", "Ra∼",
      "A∀", "R∀", "Aa∀", "Ra∀", "A∃", "R∃", "Aa∃", "Ra∃",
      "IA∀", "IR∀", "I∀", "IA∃", "IR∃", "I∃",
  };
  return names[static_cast<std::size_t>(r)];
}

inline std::optional<Rule> rule_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kRuleCount; ++i)
    if (rule_name(static_cast<Rule>(i)) == name) return static_cast<Rule>(i);
  return std::nullopt;
}

constexpr bool is_quantifier_rule(Rule r) {
  return r >= Rule::A_Forall && r <= Rule::I_Exists;
}
constexpr bool is_instantiation_rule(Rule r) {
  return r >= Rule::IA_Forall && r <= Rule::I_Exists;
}
constexpr bool is_discharge_rule(Rule r) { return r >= Rule::RR_DM && r <= Rule::ORd_Ai_Or; }

/// Position of a node relative to a connective: the connective itself, its
/// left child (also the scope of `~`), or its right child.
enum class Pos : std::uint8_t { Self, Left, Right };

struct Cond {
  Pos pos;
  Mark value;
};

/// A one-step propositional rule: when every premise holds around a
/// connective `op`, every conclusion follows.
struct PropositionalRule {
  Rule rule;
  Op op;
  std::vector<Cond> premises;
  std::vector<Cond> conclusions;
};

/// An option rule: supposing `supposed` and deriving `target` inside the
/// supposition yields `conclusion` outright.
struct OptionRule {
  Rule rule;
  Op op;
  Cond supposed;
  Cond target;
  Cond conclusion;
};

inline const std::vector<PropositionalRule>& propositional_rules() {
  using enum Pos;
  constexpr Mark O = Mark::One;
  constexpr Mark Z = Mark::Zero;
  static const std::vector<PropositionalRule> table = {
      {Rule::R_Imp, Op::Imp, {{Self, Z}}, {{Left, O}, {Right, Z}}},
      {Rule::AiRd_Imp, Op::Imp, {{Left, O}, {Right, Z}}, {{Self, Z}}},
      {Rule::AiA_Imp, Op::Imp, {{Left, O}, {Self, O}}, {{Right, O}}},
      {Rule::RdA_Imp, Op::Imp, {{Right, Z}, {Self, O}}, {{Left, Z}}},
      {Rule::Ri_Imp, Op::Imp, {{Left, Z}}, {{Self, O}}},
      {Rule::Ad_Imp, Op::Imp, {{Right, O}}, {{Self, O}}},

      {Rule::A_And, Op::And, {{Self, O}}, {{Left, O}, {Right, O}}},
      {Rule::AiAd_And, Op::And, {{Left, O}, {Right, O}}, {{Self, O}}},
      {Rule::AiR_And, Op::And, {{Left, O}, {Self, Z}}, {{Right, Z}}},
      {Rule::AdR_And, Op::And, {{Right, O}, {Self, Z}}, {{Left, Z}}},
      {Rule::Ri_And, Op::And, {{Left, Z}}, {{Self, Z}}},
      {Rule::Rd_And, Op::And, {{Right, Z}}, {{Self, Z}}},

      {Rule::R_Or, Op::Or, {{Self, Z}}, {{Left, Z}, {Right, Z}}},
      {Rule::RiRd_Or, Op::Or, {{Left, Z}, {Right, Z}}, {{Self, Z}}},
      {Rule::RiA_Or, Op::Or, {{Left, Z}, {Self, O}}, {{Right, O}}},
      {Rule::RdA_Or, Op::Or, {{Right, Z}, {Self, O}}, {{Left, O}}},
      {Rule::Ai_Or, Op::Or, {{Left, O}}, {{Self, O}}},
      {Rule::Ad_Or, Op::Or, {{Right, O}}, {{Self, O}}},

      {Rule::AiAd_Iff, Op::Iff, {{Left, O}, {Right, O}}, {{Self, O}}},
      {Rule::RiRd_Iff, Op::Iff, {{Left, Z}, {Right, Z}}, {{Self, O}}},
      {Rule::AiRd_Iff, Op::Iff, {{Left, O}, {Right, Z}}, {{Self, Z}}},
      {Rule::RiAd_Iff, Op::Iff, {{Left, Z}, {Right, O}}, {{Self, Z}}},
      {Rule::AiA_Iff, Op::Iff, {{Left, O}, {Self, O}}, {{Right, O}}},
      {Rule::RdA_Iff, Op::Iff, {{Right, Z}, {Self, O}}, {{Left, Z}}},
      {Rule::RiA_Iff, Op::Iff, {{Left, Z}, {Self, O}}, {{Right, Z}}},
      {Rule::AdA_Iff, Op::Iff, {{Right, O}, {Self, O}}, {{Left, O}}},
      {Rule::RiR_Iff, Op::Iff, {{Left, Z}, {Self, Z}}, {{Right, O}}},
      {Rule::AiR_Iff, Op::Iff, {{Left, O}, {Self, Z}}, {{Right, Z}}},
      {Rule::RdR_Iff, Op::Iff, {{Right, Z}, {Self, Z}}, {{Left, O}}},
      {Rule::AdR_Iff, Op::Iff, {{Right, O}, {Self, Z}}, {{Left, Z}}},

      {Rule::A_Not, Op::Not, {{Self, O}}, {{Left, Z}}},
      {Rule::R_Not, Op::Not, {{Self, Z}}, {{Left, O}}},
      {Rule::Aa_Not, Op::Not, {{Left, O}}, {{Self, Z}}},
      {Rule::Ra_Not, Op::Not, {{Left, Z}}, {{Self, O}}},
  };
  return table;
}

inline const std::vector<OptionRule>& option_rules() {
  using enum Pos;
  constexpr Mark O = Mark::One;
  constexpr Mark Z = Mark::Zero;
  static const std::vector<OptionRule> table = {
      {Rule::OAi_Ad_Imp, Op::Imp, {Left, O}, {Right, O}, {Self, O}},
      {Rule::ORd_Ri_Imp, Op::Imp, {Right, Z}, {Left, Z}, {Self, O}},
      {Rule::ORi_Ad_Or, Op::Or, {Left, Z}, {Right, O}, {Self, O}},
      {Rule::ORd_Ai_Or, Op::Or, {Right, Z}, {Left, O}, {Self, O}},
  };
  return table;
}

inline const PropositionalRule* find_propositional_rule(Rule r) {
  for (const auto& p : propositional_rules())
    if (p.rule == r) return &p;
  return nullptr;
}

inline const OptionRule* find_option_rule(Rule r) {
  for (const auto& o : option_rules())
    if (o.rule == r) return &o;
  return nullptr;
}

constexpr bool truth(Op op, bool l, bool r) {
  switch (op) {
    case Op::And:
      return l && r;
    case Op::Or:
      return l || r;
    case Op::Imp:
      return !l || r;
    case Op::Iff:
      return l == r;
    case Op::Not:
      return !l;
    default:
      return false;
  }
}

namespace detail {

// Every truth-table row of a connective as {self, left, right}.
inline std::vector<std::array<Mark, 3>> rows(Op op) {
  std::vector<std::array<Mark, 3>> out;
  const int rights = op == Op::Not ? 1 : 2;
  for (int l = 0; l < 2; ++l)
    for (int r = 0; r < rights; ++r)
      out.push_back({to_mark(truth(op, l, r)), to_mark(l), to_mark(r)});
  return out;
}

inline bool holds(const std::array<Mark, 3>& row, const Cond& c) {
  return row[static_cast<std::size_t>(c.pos)] == c.value;
}

}  // namespace detail

/// True iff the conclusions hold on every truth-table row satisfying the
/// premises.
inline bool verify_rule(const PropositionalRule& r) {
  for (const auto& row : detail::rows(r.op)) {
    bool premised = true;
    for (const auto& c : r.premises) premised = premised && detail::holds(row, c);
    if (!premised) continue;
    for (const auto& c : r.conclusions)
      if (!detail::holds(row, c)) return false;
  }
  return true;
}

/// True iff every row on which the supposition leads to the target also
/// satisfies the conclusion.
inline bool verify_rule(const OptionRule& r) {
  for (const auto& row : detail::rows(r.op)) {
    const bool derivation = !detail::holds(row, r.supposed) || detail::holds(row, r.target);
    if (derivation && !detail::holds(row, r.conclusion)) return false;
  }
  return true;
}

/// Checks a propositional rule of the catalog against classical truth tables.
/// Throws std::invalid_argument for quantifier and bookkeeping rules.
inline bool verify_derived_rule(Rule r) {
  if (is_quantifier_rule(r))
    throw std::invalid_argument(std::string(rule_name(r)) +
                                " is a quantifier rule; its premise space is infinite");
  if (const auto* p = find_propositional_rule(r)) return verify_rule(*p);
  if (const auto* o = find_option_rule(r)) return verify_rule(*o);
  switch (r) {
    case Rule::A_Iff:
      // M(<->) = 1 iff both sides agree.
      for (const auto& row : detail::rows(Op::Iff))
        if ((row[0] == Mark::One) != (row[1] == row[2])) return false;
      return true;
    case Rule::IA:
    case Rule::IR: {
      // Two nodes with one formula take one truth value.
      const Mark premise = r == Rule::IA ? Mark::One : Mark::Zero;
      for (Mark v : {Mark::Zero, Mark::One}) {
        const Mark first = v, second = v;
        if (first == premise && second != premise) return false;
      }
      return true;
    }
    case Rule::OA_DM:
    case Rule::OR_DM:
    case Rule::RR_DM: {
      // A supposition that forces some node to both values is false.
      const Mark supposed = r == Rule::OA_DM ? Mark::One : Mark::Zero;
      for (Mark v : {Mark::Zero, Mark::One}) {
        const bool contradictory = v == supposed;
        if (!contradictory && v != flip(supposed)) return false;
      }
      return true;
    }
    default:
      throw std::invalid_argument(std::string(rule_name(r)) + " has no conclusion to verify");
  }
}

/// Rules verify_derived_rule accepts, in catalog order.
inline std::vector<Rule> verifiable_rules() {
  std::vector<Rule> out;
  for (std::size_t i = 0; i < kRuleCount; ++i) {
    const auto r = static_cast<Rule>(i);
    if (is_quantifier_rule(r)) continue;
    if (find_propositional_rule(r) || find_option_rule(r) || r == Rule::A_Iff || r == Rule::IA ||
        r == Rule::IR || r == Rule::OA_DM || r == Rule::OR_DM || r == Rule::RR_DM)
      out.push_back(r);
  }
  return out;
}

}  // namespace forcing
