#include <random>
#include <string>

#include <gtest/gtest.h>

#include "forcing/decide.hpp"
#include "forcing/generate.hpp"
#include "forcing/render.hpp"
#include "reference.hpp"

using namespace forcing;

namespace {

Formula F(const char* text) { return parse_formula(text); }

EngineConfig budget(std::size_t n) {
  EngineConfig cfg;
  cfg.max_individuals = n;
  return cfg;
}

const Interpretation& model_of(const Verdict& v) { return std::get<Invalid>(v.result).model; }

Interpretation make(std::vector<std::string> domain,
                    std::map<std::string, std::set<std::string>> monadic,
                    std::map<std::string, std::set<std::pair<std::string, std::string>>> dyadic = {}) {
  Interpretation I;
  I.domain = std::move(domain);
  I.monadic = std::move(monadic);
  I.dyadic = std::move(dyadic);
  return I;
}

}  // namespace

TEST(Bound, Fragments) {
  EXPECT_EQ(domain_bound({FragmentClass::Kind::Monadic, 3}, {}).individuals, 8u);
  EXPECT_TRUE(domain_bound({FragmentClass::Kind::Monadic, 3}, {}).guaranteed);
  EXPECT_EQ(domain_bound({FragmentClass::Kind::Monadic, 1}, {}).individuals, 2u);
  EXPECT_FALSE(domain_bound({FragmentClass::Kind::Monadic, 3}, budget(4)).guaranteed);
  const auto dy = domain_bound({FragmentClass::Kind::Dyadic2Var, 1}, budget(2));
  EXPECT_EQ(dy.individuals, 2u);
  EXPECT_FALSE(dy.guaranteed);
  EXPECT_EQ(domain_bound({FragmentClass::Kind::Dyadic2Var, 1}, {}).individuals, kDyadicDefaultBudget);
  EXPECT_THROW(domain_bound({FragmentClass::Kind::Outside, 1}, {}), BudgetError);
  EXPECT_EQ(domain_bound({FragmentClass::Kind::Outside, 1}, budget(3)).individuals, 3u);
  EXPECT_THROW(domain_bound({FragmentClass::Kind::Monadic, 1}, budget(0)), BudgetError);
}

TEST(Decide, IllustrationVerdicts) {
  EXPECT_TRUE(decide(ref::kIll1).is_invalid());
  EXPECT_TRUE(decide(ref::kIll2).is_valid());
  EXPECT_TRUE(decide(ref::kIll3).is_valid());
  EXPECT_TRUE(decide(ref::kIll4).is_invalid());
  EXPECT_TRUE(decide(ref::kIll5).is_valid());
  EXPECT_TRUE(decide(ref::kIll6).is_invalid());
}

TEST(Decide, IllustrationOneModel) {
  const Verdict v = decide(ref::kIll1);
  ASSERT_TRUE(v.is_invalid());
  EXPECT_TRUE(isomorphic(model_of(v), make({"a", "b"}, {{"P", {"b"}}}, {{"R", {{"b", "a"}, {"b", "b"}}}})));
  EXPECT_EQ(v.trace().back().rule, Rule::ABM);
}

TEST(Decide, IllustrationFourModel) {
  const Verdict v = decide(ref::kIll4);
  ASSERT_TRUE(v.is_invalid());
  EXPECT_TRUE(isomorphic(model_of(v), make({"d", "e"}, {{"H", {"d"}}, {"B", {"d"}}, {"A", {"d", "e"}}})));
}

TEST(Decide, IllustrationSixModelAtBudgetTwo) {
  const Verdict v = decide(F(ref::kIll6), budget(2));
  ASSERT_TRUE(v.is_invalid());
  EXPECT_TRUE(isomorphic(model_of(v), make({"a", "b"}, {}, {{"P", {{"a", "b"}, {"b", "a"}}}})));
}

TEST(Decide, IllustrationSixNeverValid) {
  for (std::size_t n = 1; n <= 8; ++n) EXPECT_FALSE(decide(F(ref::kIll6), budget(n)).is_valid()) << n;
  EXPECT_TRUE(decide(F(ref::kIll6), budget(1)).is_unsettled());
}

TEST(Decide, TrivialCases) {
  EXPECT_TRUE(decide("P(a) -> P(a)").is_valid());
  EXPECT_TRUE(decide("P(a)").is_invalid());
  EXPECT_TRUE(decide("forall x. P(x) -> exists x. P(x)").is_valid());
  EXPECT_TRUE(decide("exists x. P(x) -> forall x. P(x)").is_invalid());
}

TEST(Decide, Deterministic) {
  for (const char* text : {ref::kIll1, ref::kIll2, ref::kIll4, ref::kIll6}) {
    const Verdict a = decide(text), b = decide(text);
    EXPECT_EQ(verdict_name(a), verdict_name(b));
    EXPECT_EQ(render_trace(a.trace()), render_trace(b.trace()));
    if (a.is_invalid()) EXPECT_EQ(model_of(a), model_of(b));
  }
}

TEST(Decide, TraceNumberingIsDense) {
  for (const char* text : {ref::kIll1, ref::kIll2, ref::kIll4}) {
    const Verdict v = decide(text);
    const Trace& t = v.trace();
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_EQ(t[i].number, i + 1);
      for (std::size_t p : t[i].premises) EXPECT_LT(p, t[i].number);
    }
  }
}

TEST(Decide, ErrorsAreNotVerdicts) {
  EXPECT_THROW(decide("forall x. forall y. forall z. (R(x,y) -> R(y,z))"), BudgetError);
  EngineConfig tight;
  tight.branch_limit = 1;
  EXPECT_THROW(decide(F(ref::kIll2), tight), SearchLimitError);
}

// Monadic formulas over at most two predicates: agreement with a brute-force
// search at 2^n individuals.
TEST(Decide, AgreesWithReferenceOnMonadicFormulas) {
  std::mt19937_64 rng(31337);
  GenOptions o;
  o.monadic = {"P", "Q"};
  o.max_complexity = 6;
  for (int i = 0; i < 300; ++i) {
    const Formula f = random_closed_formula(rng, o);
    const Verdict v = decide(f);
    ASSERT_FALSE(v.is_unsettled()) << format_formula(f);
    const std::size_t bound = std::size_t{1} << predicates_of(f).size();
    const bool invalid = ref::falsifier(f, bound).has_value();
    ASSERT_EQ(v.is_invalid(), invalid) << format_formula(f);
    if (v.is_invalid()) ASSERT_FALSE(ref::truth(model_of(v), f));
  }
}

TEST(Decide, DyadicVerdictsAreSound) {
  std::mt19937_64 rng(2718);
  GenOptions o;
  o.monadic = {"P"};
  o.dyadic = {"R"};
  o.max_complexity = 4;
  for (int i = 0; i < 150; ++i) {
    const Formula f = random_closed_formula(rng, o);
    const Verdict v = decide(f, budget(3));
    if (v.is_invalid()) ASSERT_FALSE(ref::truth(model_of(v), f)) << format_formula(f);
    if (v.is_valid()) ASSERT_FALSE(ref::falsifier(f, 2)) << format_formula(f);
  }
}

TEST(Direct, IllustrationsThreeAndFive) {
  for (const char* text : {ref::kIll3, ref::kIll5}) {
    const auto proof = direct_force(F(text));
    ASSERT_TRUE(proof) << text;
    EXPECT_EQ(proof->back().rule, Rule::OAi_Ad_Imp);
    EXPECT_EQ(proof->back().premises.front(), 1u);
  }
}

TEST(Direct, IllustrationSixFails) { EXPECT_FALSE(direct_force(F(ref::kIll6))); }

TEST(Direct, RejectsOtherRoots) {
  EXPECT_THROW(direct_force(F("P(a) & Q(a)")), std::invalid_argument);
}

TEST(Direct, DisjunctionAndContraposition) {
  const auto excluded_middle = direct_force(F("P(a) | ~P(a)"));
  ASSERT_TRUE(excluded_middle);
  EXPECT_EQ(excluded_middle->back().rule, Rule::ORi_Ad_Or);
  const auto back = direct_force(F("forall x. P(x) -> P(a)"));
  ASSERT_TRUE(back);
}

TEST(Direct, SuccessImpliesValid) {
  std::mt19937_64 rng(77);
  GenOptions o;
  o.monadic = {"P", "Q"};
  o.constants = {"a"};
  o.max_complexity = 5;
  int proofs = 0;
  for (int i = 0; i < 400; ++i) {
    const Formula f = random_closed_formula(rng, o);
    if (f.op() != Op::Imp && f.op() != Op::Or) continue;
    if (!direct_force(f)) continue;
    ++proofs;
    EXPECT_TRUE(decide(f).is_valid()) << format_formula(f);
    EXPECT_FALSE(ref::falsifier(f, 4)) << format_formula(f);
  }
  EXPECT_GT(proofs, 0);
}

TEST(Decide, AllowDirectKeepsVerdicts) {
  EngineConfig cfg;
  cfg.allow_direct = true;
  EXPECT_TRUE(decide(F(ref::kIll3), cfg).is_valid());
  const Verdict v = decide(F(ref::kIll3), cfg);
  EXPECT_EQ(v.trace().back().rule, Rule::OAi_Ad_Imp);
  EXPECT_TRUE(decide(F(ref::kIll6), cfg).is_invalid());
}
