#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "forcing/formula.hpp"

namespace forcing {

/// Shape of randomly generated closed formulas.
struct GenOptions {
  std::vector<std::string> monadic = {"P", "Q"};
  std::vector<std::string> dyadic;
  std::vector<std::string> variables = {"x", "y"};
  std::vector<std::string> constants;
  std::size_t max_complexity = 4;
  bool quantifiers = true;
};

namespace detail {

inline std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline Term random_term(std::mt19937_64& rng, const GenOptions& o,
                        const std::vector<std::string>& bound) {
  const std::size_t choices = bound.size() + o.constants.size();
  const std::size_t i = pick(rng, choices);
  if (i < bound.size()) return Term::variable(bound[i]);
  return Term::constant(o.constants[i - bound.size()]);
}

inline Formula random_atom(std::mt19937_64& rng, const GenOptions& o,
                           const std::vector<std::string>& bound) {
  const std::size_t n = o.monadic.size() + o.dyadic.size();
  const std::size_t i = pick(rng, n);
  if (i < o.monadic.size()) return Formula::atom(o.monadic[i], {random_term(rng, o, bound)});
  return Formula::atom(o.dyadic[i - o.monadic.size()],
                       {random_term(rng, o, bound), random_term(rng, o, bound)});
}

inline Formula random_formula(std::mt19937_64& rng, const GenOptions& o, std::size_t budget,
                              std::vector<std::string>& bound) {
  const bool can_atom = !bound.empty() || !o.constants.empty();
  const bool stop = budget == 0 || (can_atom && pick(rng, 4) == 0);
  if (stop) return random_atom(rng, o, bound);
  // Without a term to fill an atom with, the next node must bind one.
  const std::size_t kind = can_atom ? pick(rng, o.quantifiers ? 7 : 5) : 5 + pick(rng, 2);
  switch (kind) {
    case 0:
      return Formula::negation(random_formula(rng, o, budget - 1, bound));
    case 1:
    case 2:
    case 3:
    case 4: {
      static constexpr Op ops[] = {Op::And, Op::Or, Op::Imp, Op::Iff};
      Formula l = random_formula(rng, o, budget - 1, bound);
      Formula r = random_formula(rng, o, budget - 1, bound);
      return Formula::binary(ops[kind - 1], std::move(l), std::move(r));
    }
    default: {
      const std::string& v = o.variables[pick(rng, o.variables.size())];
      bound.push_back(v);
      Formula body = random_formula(rng, o, budget - 1, bound);
      bound.pop_back();
      return Formula::quantified(kind == 5 ? Op::Forall : Op::Exists, v, std::move(body));
    }
  }
}

}  // namespace detail

/// A random closed formula of complexity at most o.max_complexity. Variables
/// only occur under a binder for them, so the result reparses to itself.
inline Formula random_closed_formula(std::mt19937_64& rng, const GenOptions& o) {
  if (o.constants.empty() && (!o.quantifiers || o.variables.empty()))
    throw std::invalid_argument("random_closed_formula: no terms to build atoms from");
  std::vector<std::string> bound;
  return detail::random_formula(rng, o, o.max_complexity, bound);
}

}  // namespace forcing
