#include <set>
#include <string>

#include <gtest/gtest.h>

#include "forcing/rules.hpp"

using namespace forcing;

namespace {

bool value(Op op, bool l, bool r) {
  switch (op) {
    case Op::Not:
      return !l;
    case Op::And:
      return l && r;
    case Op::Or:
      return l || r;
    case Op::Imp:
      return !l || r;
    case Op::Iff:
      return l == r;
    default:
      throw std::logic_error("not a connective");
  }
}

bool at(const Cond& c, bool self, bool l, bool r) {
  const bool v = c.pos == Pos::Self ? self : c.pos == Pos::Left ? l : r;
  return v == (c.value == Mark::One);
}

// Brute force over all valuations of the two children.
bool sound(const PropositionalRule& rule) {
  for (bool l : {false, true})
    for (bool r : {false, true}) {
      if (rule.op == Op::Not && r) continue;
      const bool self = value(rule.op, l, r);
      bool premised = true;
      for (const auto& p : rule.premises) premised = premised && at(p, self, l, r);
      if (!premised) continue;
      for (const auto& c : rule.conclusions)
        if (!at(c, self, l, r)) return false;
    }
  return true;
}

// Every valuation where the supposition leads to the target satisfies the
// conclusion, and so does every valuation where the supposition fails.
bool sound(const OptionRule& rule) {
  for (bool l : {false, true})
    for (bool r : {false, true}) {
      const bool self = value(rule.op, l, r);
      const bool s = at(rule.supposed, self, l, r);
      const bool t = at(rule.target, self, l, r);
      if ((!s || t) && !at(rule.conclusion, self, l, r)) return false;
    }
  return true;
}

}  // namespace

TEST(Catalog, EveryPropositionalRuleVerifies) {
  for (const auto& r : propositional_rules()) {
    EXPECT_TRUE(sound(r)) << rule_name(r.rule);
    EXPECT_TRUE(verify_rule(r)) << rule_name(r.rule);
    EXPECT_TRUE(verify_derived_rule(r.rule)) << rule_name(r.rule);
  }
}

TEST(Catalog, EveryOptionRuleVerifies) {
  for (const auto& r : option_rules()) {
    EXPECT_TRUE(sound(r)) << rule_name(r.rule);
    EXPECT_TRUE(verify_derived_rule(r.rule)) << rule_name(r.rule);
  }
}

TEST(Catalog, AtLeastThirtyVerifiableRules) {
  const auto rules = verifiable_rules();
  EXPECT_GE(rules.size(), 30u);
  for (Rule r : rules) EXPECT_TRUE(verify_derived_rule(r)) << rule_name(r);
}

TEST(Catalog, CoversEveryConnective) {
  std::set<Op> ops;
  for (const auto& r : propositional_rules()) ops.insert(r.op);
  EXPECT_EQ(ops, (std::set<Op>{Op::Not, Op::And, Op::Or, Op::Imp, Op::Iff}));
}

TEST(Corrupted, FailVerification) {
  using enum Pos;
  const std::vector<PropositionalRule> bad = {
      {Rule::R_Imp, Op::Imp, {{Self, Mark::Zero}}, {{Left, Mark::Zero}}},
      {Rule::A_And, Op::And, {{Self, Mark::One}}, {{Right, Mark::Zero}}},
      {Rule::Ai_Or, Op::Or, {{Left, Mark::One}}, {{Self, Mark::Zero}}},
      {Rule::AiAd_Iff, Op::Iff, {{Left, Mark::One}, {Right, Mark::Zero}}, {{Self, Mark::One}}},
      {Rule::Ra_Not, Op::Not, {{Left, Mark::Zero}}, {{Self, Mark::Zero}}},
  };
  for (const auto& r : bad) {
    EXPECT_FALSE(sound(r)) << rule_name(r.rule);
    EXPECT_FALSE(verify_rule(r)) << rule_name(r.rule);
  }
  const OptionRule bad_option{Rule::OAi_Ad_Imp, Op::Imp, {Left, Mark::One}, {Right, Mark::Zero},
                              {Self, Mark::One}};
  EXPECT_FALSE(sound(bad_option));
  EXPECT_FALSE(verify_rule(bad_option));
}

TEST(Catalog, QuantifierRulesAreNotTruthTableRules) {
  EXPECT_THROW(verify_derived_rule(Rule::Aa_Forall), std::invalid_argument);
  EXPECT_THROW(verify_derived_rule(Rule::IA_Exists), std::invalid_argument);
  EXPECT_THROW(verify_derived_rule(Rule::ABM), std::invalid_argument);
}

TEST(Names, RoundTrip) {
  for (std::size_t i = 0; i < kRuleCount; ++i) {
    const auto r = static_cast<Rule>(i);
    EXPECT_EQ(rule_from_name(rule_name(r)), r) << rule_name(r);
  }
  EXPECT_EQ(rule_name(Rule::OAi_Ad_Imp), "OAi-Ad→");
  EXPECT_EQ(rule_name(Rule::IA_Forall), "IA∀");
  EXPECT_FALSE(rule_from_name("nonsense"));
}
