#include <map>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "forcing/generate.hpp"
#include "forcing/marking.hpp"
#include "forcing/model.hpp"
#include "forcing/syntax.hpp"
#include "reference.hpp"

using namespace forcing;

namespace {

Interpretation ill1_model() {
  Interpretation I;
  I.domain = {"a", "b"};
  I.monadic["P"] = {"b"};
  I.dyadic["R"] = {{"b", "a"}, {"b", "b"}};
  return I;
}

Formula F(const char* text) { return parse_formula(text); }

// The Ill. 1 tree fanned out over {a, b}: the accepted ∃ at b, everything
// else at both individuals.
ForcingTree ill1_ground_tree() {
  ForcingTree t = build_initial_tree(F(ref::kIll1));
  const Term a = Term::constant("a"), b = Term::constant("b");
  const NodeId conj = t.instantiate_branch(t.left(t.root()), b);
  const NodeId all_y = t.right(conj);
  t.instantiate_branch(all_y, a);
  t.instantiate_branch(all_y, b);
  const NodeId some_y = t.instantiate_branch(t.right(t.root()), a);
  t.instantiate_branch(some_y, a);
  t.instantiate_branch(some_y, b);
  return t;
}

std::map<std::string, Mark> by_text(const ForcingTree& t, const std::map<NodeId, Mark>& marks) {
  std::map<std::string, Mark> out;
  for (const auto& [n, m] : marks) out[format_formula(t.node_formula(n))] = m;
  return out;
}

}  // namespace

TEST(Eval, IllustrationOneModel) {
  const Interpretation I = ill1_model();
  EXPECT_FALSE(eval(I, F("forall x. exists y. R(x,y)")));
  EXPECT_TRUE(eval(I, F("exists x. (P(x) & forall y. R(x,y))")));
  EXPECT_FALSE(eval(I, F(ref::kIll1)));
}

TEST(Eval, Tautology) {
  Interpretation I;
  I.domain = {"1"};
  I.constants["a"] = "1";
  EXPECT_TRUE(eval(I, F("P(a) -> P(a)")));
}

TEST(Eval, OpenFormulaUnderEnvironment) {
  const Interpretation I = ill1_model();
  const Formula open = Formula::atom("P", {Term::variable("x")});
  EXPECT_TRUE(eval(I, open, {{"x", "b"}}));
  EXPECT_FALSE(eval(I, open, {{"x", "a"}}));
  EXPECT_THROW(eval(I, open), EvalError);
}

TEST(Eval, UnmappedConstantThrows) {
  EXPECT_THROW(eval(ill1_model(), F("P(c)")), EvalError);
}

TEST(Eval, AgreesWithReferenceAndAlphaVariants) {
  std::mt19937_64 rng(5);
  GenOptions o;
  o.dyadic = {"R"};
  o.constants = {"a"};
  o.max_complexity = 5;
  for (int i = 0; i < 300; ++i) {
    const Formula f = random_closed_formula(rng, o);
    const Formula g = alpha_normalize(f);
    ref::any_interpretation(f, 2, [&](const Interpretation& I) {
      const bool want = ref::truth(I, f);
      EXPECT_EQ(eval(I, f), want) << format_formula(f);
      EXPECT_EQ(eval(I, g), want) << format_formula(f);
      return false;
    });
  }
}

TEST(Enumerate, Counts) {
  auto count = [](const Signature& sig, std::size_t d) {
    std::size_t n = 0;
    enumerate_interpretations(sig, d, [&](const Interpretation&) {
      ++n;
      return true;
    });
    return n;
  };
  EXPECT_EQ(count({{{"P", 1}}, {}}, 1), 2u);
  EXPECT_EQ(count({{{"R", 2}}, {}}, 2), 16u);
  EXPECT_EQ(count({{{"P", 1}}, {"c"}}, 2), 8u);
  const Formula f = F("forall x. (P(x) -> R(x,c)) | Q(d)");
  for (std::size_t d = 1; d <= 2; ++d) EXPECT_EQ(count(signature_of(f), d), ref::count_interpretations(f, d));
}

TEST(Enumerate, DomainIsCanonical) {
  enumerate_interpretations({{{"P", 1}}, {}}, 3, [](const Interpretation& I) {
    EXPECT_EQ(I.domain, (std::vector<std::string>{"1", "2", "3"}));
    return false;
  });
}

TEST(Oracle, IllustrationSixHasTwoElementFalsifier) {
  const Formula f = F(ref::kIll6);
  const auto r = oracle_validity(f, 2);
  ASSERT_FALSE(r.valid);
  ASSERT_TRUE(r.falsifier);
  EXPECT_EQ(r.falsifier->domain.size(), 2u);
  EXPECT_FALSE(ref::truth(*r.falsifier, f));
}

TEST(Oracle, IllustrationTwoValidUpToThree) {
  const auto r = oracle_validity(F(ref::kIll2), 3);
  EXPECT_TRUE(r.valid);
  EXPECT_EQ(r.bound, 3u);
}

TEST(Oracle, Tautology) {
  EXPECT_TRUE(oracle_validity(F("P(a) | ~P(a)"), 1).valid);
  EXPECT_TRUE(oracle_validity(F("P(a) | ~P(a)"), 2).valid);
}

TEST(Oracle, NoOneElementCountermodels) {
  EXPECT_TRUE(oracle_validity(F(ref::kIll1), 1).valid);
  EXPECT_TRUE(oracle_validity(F(ref::kIll4), 1).valid);
  EXPECT_FALSE(ref::falsifier(F(ref::kIll1), 1));
  EXPECT_FALSE(ref::falsifier(F(ref::kIll4), 1));
}

TEST(Oracle, MatchesReferenceAndIsMonotone) {
  std::mt19937_64 rng(17);
  GenOptions o;
  o.dyadic = {"R"};
  o.constants = {"a"};
  o.max_complexity = 5;
  for (int i = 0; i < 200; ++i) {
    const Formula f = random_closed_formula(rng, o);
    bool invalid_before = false;
    for (std::size_t d = 1; d <= 2; ++d) {
      const auto r = oracle_validity(f, d);
      EXPECT_EQ(r.valid, !ref::falsifier(f, d)) << format_formula(f);
      if (invalid_before) EXPECT_FALSE(r.valid);
      if (!r.valid) EXPECT_FALSE(ref::truth(*r.falsifier, f));
      invalid_before = !r.valid;
    }
  }
}

TEST(Oracle, RejectsBadArguments) {
  EXPECT_THROW(oracle_validity(F("P(a)"), 0), std::invalid_argument);
  EXPECT_THROW(oracle_validity(Formula::atom("P", {Term::variable("x")}), 1), std::invalid_argument);
}

TEST(Extract, SingleRejectedLeaf) {
  MarkingState s(build_initial_tree(F("P(a)")));
  s.open_root();
  ASSERT_FALSE(s.saturate({}).double_mark());
  const Interpretation I = extract_model(s);
  EXPECT_EQ(I.domain, std::vector<std::string>{"a"});
  EXPECT_EQ(I.constants.at("a"), "a");
  EXPECT_TRUE(I.monadic.count("P") == 0 || I.monadic.at("P").empty());
}

TEST(Extract, IllustrationOneStateRefutes) {
  MarkingState s(build_initial_tree(F(ref::kIll1)));
  s.open_root();
  ASSERT_FALSE(s.saturate({}).double_mark());
  const Interpretation I = extract_model(s);
  EXPECT_TRUE(isomorphic(I, ill1_model()));
  EXPECT_FALSE(ref::truth(I, F(ref::kIll1)));
}

TEST(Extract, RejectsDoubleMark) {
  MarkingState s(build_initial_tree(F("P(a) -> P(a)")));
  s.open_root();
  ASSERT_TRUE(s.saturate({}).double_mark());
  EXPECT_ANY_THROW(extract_model(s));
}

TEST(MarksFromModel, IllustrationOneLeaves) {
  const ForcingTree t = ill1_ground_tree();
  const auto marks = by_text(t, marks_from_model(ill1_model(), t));
  const std::map<std::string, Mark> expected{{"P(b)", Mark::One},
                                             {"R(b,a)", Mark::One},
                                             {"R(b,b)", Mark::One},
                                             {"R(a,a)", Mark::Zero},
                                             {"R(a,b)", Mark::Zero}};
  EXPECT_EQ(marks, expected);
}

TEST(MarksFromModel, FullModelAcceptsEveryLeaf) {
  Interpretation I;
  I.domain = {"a", "b"};
  I.monadic["P"] = {"a", "b"};
  I.dyadic["R"] = {{"a", "a"}, {"a", "b"}, {"b", "a"}, {"b", "b"}};
  const ForcingTree t = ill1_ground_tree();
  const auto marks = marks_from_model(I, t);
  EXPECT_EQ(marks.size(), 5u);
  for (const auto& [n, m] : marks) EXPECT_EQ(m, Mark::One);
}

TEST(MarksFromModel, UnmappedConstantThrows) {
  Interpretation I;
  I.domain = {"1"};
  EXPECT_THROW(marks_from_model(I, build_initial_tree(F("P(a)"))), EvalError);
}

// Leaf marks taken from a model saturate to the model's truth value.
TEST(MarksFromModel, SaturationReproducesEval) {
  std::mt19937_64 rng(23);
  GenOptions o;
  o.monadic = {"P", "Q"};
  o.constants = {"a", "b"};
  o.quantifiers = false;
  o.max_complexity = 5;
  for (int i = 0; i < 300; ++i) {
    const Formula f = random_closed_formula(rng, o);
    const ForcingTree t = build_initial_tree(f);
    Interpretation I;
    I.domain = {"1", "2"};
    I.constants = {{"a", "1"}, {"b", std::to_string(1 + rng() % 2)}};
    for (const char* p : {"P", "Q"})
      for (const char* e : {"1", "2"})
        if (rng() & 1U) I.monadic[p].insert(e);
    MarkingState s(t);
    for (const auto& [n, m] : marks_from_model(I, t)) s.set_mark(n, m, {Rule::Leaf, {}, {}});
    ASSERT_FALSE(s.saturate({}).double_mark());
    EXPECT_EQ(s.mark(t.root()) == Mark::One, ref::truth(I, f)) << format_formula(f);
  }
}

TEST(Json, SortedSchemaRoundTrip) {
  Interpretation I = ill1_model();
  I.constants["c"] = "a";
  const auto j = to_json(I);
  EXPECT_EQ(j.dump(),
            R"({"constants":{"c":"a"},"domain":["a","b"],"dyadic":{"R":[["b","a"],["b","b"]]},"monadic":{"P":["b"]}})");
  EXPECT_EQ(interpretation_from_json(j), I);
}

TEST(Canonical, IsomorphismIgnoresNames) {
  Interpretation J;
  J.domain = {"w2", "w1"};
  J.monadic["P"] = {"w1"};
  J.dyadic["R"] = {{"w1", "w1"}, {"w1", "w2"}};
  EXPECT_TRUE(isomorphic(J, ill1_model()));
  EXPECT_EQ(canonical_form(J), canonical_form(ill1_model()));
  J.dyadic["R"] = {{"w1", "w2"}};
  EXPECT_FALSE(isomorphic(J, ill1_model()));
}
