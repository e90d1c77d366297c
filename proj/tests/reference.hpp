#pragma once

// Test-side reference semantics, written without the library's compiled
// evaluator: direct recursion over the formula and naive enumeration.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "forcing/formula.hpp"
#include "forcing/model.hpp"

namespace ref {

using forcing::Formula;
using forcing::Interpretation;
using forcing::Op;

inline const char* const kIll1 = "exists x. (P(x) & forall y. R(x,y)) -> forall x. exists y. R(x,y)";
inline const char* const kIll2 =
    "forall x. (exists y. P(y) -> ~exists y. ~R(y,x)) -> ~exists x. (P(x) & ~forall y. R(x,y))";
inline const char* const kIll3 =
    "forall x. ((P(x) & Q(b)) & exists y. R(x,y)) -> forall x. ~(P(x) -> ~Q(b))";
inline const char* const kIll4 =
    "(forall x. (H(x) -> B(x)) & exists x. (~B(x) & A(x))) -> forall x. (H(x) -> ~A(x))";
inline const char* const kIll5 = "exists y. forall x. P(y,x) -> ~exists x. forall y. ~P(y,x)";
inline const char* const kIll6 = "forall x. exists y. P(x,y) -> exists y. forall x. P(x,y)";

inline std::string denote(const Interpretation& I, const forcing::Term& t,
                          const std::map<std::string, std::string>& env) {
  if (t.is_variable()) return env.at(t.name);
  return I.constants.at(t.name);
}

inline bool truth(const Interpretation& I, const Formula& f,
                  std::map<std::string, std::string> env = {}) {
  switch (f.op()) {
    case Op::Atom: {
      const auto& a = f.args();
      if (a.size() == 1) {
        auto it = I.monadic.find(f.predicate());
        return it != I.monadic.end() && it->second.count(denote(I, a[0], env));
      }
      auto it = I.dyadic.find(f.predicate());
      return it != I.dyadic.end() &&
             it->second.count({denote(I, a[0], env), denote(I, a[1], env)});
    }
    case Op::Not:
      return !truth(I, f.body(), env);
    case Op::And:
      return truth(I, f.left(), env) && truth(I, f.right(), env);
    case Op::Or:
      return truth(I, f.left(), env) || truth(I, f.right(), env);
    case Op::Imp:
      return !truth(I, f.left(), env) || truth(I, f.right(), env);
    case Op::Iff:
      return truth(I, f.left(), env) == truth(I, f.right(), env);
    case Op::Forall:
    case Op::Exists: {
      const bool all = f.op() == Op::Forall;
      for (const auto& d : I.domain) {
        env[f.variable()] = d;
        if (truth(I, f.body(), env) != all) return !all;
      }
      return all;
    }
  }
  return false;
}

// Calls visit on every interpretation of f's signature over {e0..e(d-1)};
// stops when visit returns true and reports whether it did.
template <typename Visit>
bool any_interpretation(const Formula& f, std::size_t d, Visit&& visit) {
  const auto preds = forcing::predicates_of(f);
  const auto consts = forcing::constants_of(f);
  std::vector<std::string> dom;
  for (std::size_t i = 0; i < d; ++i) dom.push_back("e" + std::to_string(i));

  std::vector<std::pair<std::string, std::size_t>> cells;  // predicate, arity
  std::size_t bits = 0;
  for (const auto& [p, n] : preds) {
    cells.emplace_back(p, n);
    bits += n == 1 ? d : d * d;
  }
  std::size_t assignments = 1;
  for (std::size_t i = 0; i < consts.size(); ++i) assignments *= d;

  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << bits); ++mask) {
    for (std::size_t c = 0; c < assignments; ++c) {
      Interpretation I;
      I.domain = dom;
      std::size_t bit = 0;
      for (const auto& [p, n] : cells) {
        if (n == 1) {
          auto& ext = I.monadic[p];
          for (std::size_t i = 0; i < d; ++i, ++bit)
            if (mask >> bit & 1U) ext.insert(dom[i]);
        } else {
          auto& ext = I.dyadic[p];
          for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j, ++bit)
              if (mask >> bit & 1U) ext.insert({dom[i], dom[j]});
        }
      }
      std::size_t code = c;
      for (const auto& k : consts) {
        I.constants[k] = dom[code % d];
        code /= d;
      }
      if (visit(I)) return true;
    }
  }
  return false;
}

// A falsifying interpretation with at most max_domain elements, if any.
inline std::optional<Interpretation> falsifier(const Formula& f, std::size_t max_domain) {
  std::optional<Interpretation> out;
  for (std::size_t d = 1; d <= max_domain && !out; ++d) {
    any_interpretation(f, d, [&](const Interpretation& I) {
      if (truth(I, f)) return false;
      out = I;
      return true;
    });
  }
  return out;
}

inline std::size_t count_interpretations(const Formula& f, std::size_t d) {
  std::size_t n = 0;
  any_interpretation(f, d, [&](const Interpretation&) {
    ++n;
    return false;
  });
  return n;
}

// Nesting depth of connectives and quantifiers.
inline std::size_t depth(const Formula& f) {
  switch (f.op()) {
    case Op::Atom:
      return 0;
    case Op::Not:
    case Op::Forall:
    case Op::Exists:
      return 1 + depth(f.body());
    default: {
      const std::size_t l = depth(f.left()), r = depth(f.right());
      return 1 + (l > r ? l : r);
    }
  }
}

}  // namespace ref
