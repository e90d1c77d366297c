#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "forcing/formula.hpp"
#include "forcing/marking.hpp"
#include "forcing/tree.hpp"

namespace forcing {

class EvalError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A finite interpretation: a nonempty domain, predicate extensions and
/// constant denotations.
struct Interpretation {
  std::vector<std::string> domain;
  std::map<std::string, std::string> constants;
  std::map<std::string, std::set<std::string>> monadic;
  std::map<std::string, std::set<std::pair<std::string, std::string>>> dyadic;

  friend bool operator==(const Interpretation&, const Interpretation&) = default;
};

using Env = std::map<std::string, std::string>;

struct Signature {
  std::map<std::string, std::size_t> predicates;  // name -> arity
  std::vector<std::string> constants;

  friend bool operator==(const Signature&, const Signature&) = default;
};

inline Signature signature_of(const Formula& f) { return {predicates_of(f), constants_of(f)}; }

namespace detail {

// A formula flattened for repeated evaluation over index-based models.
struct Compiled {
  struct Arg {
    bool variable = false;
    std::size_t index = 0;  // variable slot or constant index
  };
  struct Node {
    Op op = Op::Atom;
    std::size_t predicate = 0;
    std::vector<Arg> args;
    std::size_t slot = 0;  // quantifiers
    std::size_t left = 0, right = 0;
  };

  std::vector<Node> nodes;
  std::size_t root = 0;
  std::vector<std::string> predicates;
  std::vector<std::size_t> arities;
  std::vector<std::string> constants;
  std::map<std::string, std::size_t> free_slots;
  std::size_t slots = 0;
};

inline Compiled compile(const Formula& f) {
  Compiled c;
  std::map<std::string, std::size_t> pred_index;
  std::map<std::string, std::size_t> const_index;
  std::vector<std::pair<std::string, std::size_t>> env;
  auto walk = [&](const auto& self, const Formula& g) -> std::size_t {
    Compiled::Node n;
    n.op = g.op();
    switch (g.op()) {
      case Op::Atom: {
        auto [it, fresh] = pred_index.emplace(g.predicate(), c.predicates.size());
        if (fresh) {
          c.predicates.push_back(g.predicate());
          c.arities.push_back(g.arity());
        }
        n.predicate = it->second;
        for (const auto& t : g.args()) {
          Compiled::Arg a;
          if (t.is_variable()) {
            a.variable = true;
            auto bound = std::find_if(env.rbegin(), env.rend(),
                                      [&](const auto& e) { return e.first == t.name; });
            if (bound != env.rend()) {
              a.index = bound->second;
            } else {
              auto [fit, ffresh] = c.free_slots.emplace(t.name, c.slots);
              if (ffresh) ++c.slots;
              a.index = fit->second;
            }
          } else if (t.is_constant()) {
            auto [cit, cfresh] = const_index.emplace(t.name, c.constants.size());
            if (cfresh) c.constants.push_back(t.name);
            a.index = cit->second;
          } else {
            throw EvalError("cannot evaluate an unfilled slot");
          }
          n.args.push_back(a);
        }
        break;
      }
      case Op::Not:
        n.left = self(self, g.body());
        break;
      case Op::Forall:
      case Op::Exists:
        n.slot = c.slots++;
        env.emplace_back(g.variable(), n.slot);
        n.left = self(self, g.body());
        env.pop_back();
        break;
      default:
        n.left = self(self, g.left());
        n.right = self(self, g.right());
    }
    c.nodes.push_back(std::move(n));
    return c.nodes.size() - 1;
  };
  c.root = walk(walk, f);
  return c;
}

// Extensions indexed by element number; dyadic tables are row-major.
struct Tables {
  std::size_t size = 0;
  std::vector<std::vector<std::uint8_t>> predicates;
  std::vector<std::size_t> constants;
};

inline bool run(const Compiled& c, const Tables& t, std::vector<std::size_t>& slots,
                std::size_t at) {
  const auto& n = c.nodes[at];
  switch (n.op) {
    case Op::Atom: {
      std::size_t pos = 0;
      for (const auto& a : n.args)
        pos = pos * t.size + (a.variable ? slots[a.index] : t.constants[a.index]);
      return t.predicates[n.predicate][pos] != 0;
    }
    case Op::Not:
      return !run(c, t, slots, n.left);
    case Op::And:
      return run(c, t, slots, n.left) && run(c, t, slots, n.right);
    case Op::Or:
      return run(c, t, slots, n.left) || run(c, t, slots, n.right);
    case Op::Imp:
      return !run(c, t, slots, n.left) || run(c, t, slots, n.right);
    case Op::Iff:
      return run(c, t, slots, n.left) == run(c, t, slots, n.right);
    case Op::Forall:
      for (std::size_t e = 0; e < t.size; ++e) {
        slots[n.slot] = e;
        if (!run(c, t, slots, n.left)) return false;
      }
      return true;
    case Op::Exists:
      for (std::size_t e = 0; e < t.size; ++e) {
        slots[n.slot] = e;
        if (run(c, t, slots, n.left)) return true;
      }
      return false;
  }
  return false;
}

inline std::string element_name(std::size_t i) { return std::to_string(i + 1); }

// Decodes one point of the enumeration over the canonical domain 1..d.
inline Interpretation decode(const Signature& sig, std::size_t d, std::uint64_t mask,
                             const std::vector<std::size_t>& constants) {
  Interpretation I;
  for (std::size_t i = 0; i < d; ++i) I.domain.push_back(element_name(i));
  std::size_t bit = 0;
  for (const auto& [p, arity] : sig.predicates) {
    if (arity == 1) {
      auto& ext = I.monadic[p];
      for (std::size_t i = 0; i < d; ++i, ++bit)
        if (mask >> bit & 1U) ext.insert(element_name(i));
    } else {
      auto& ext = I.dyadic[p];
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j, ++bit)
          if (mask >> bit & 1U) ext.emplace(element_name(i), element_name(j));
    }
  }
  for (std::size_t k = 0; k < sig.constants.size(); ++k)
    I.constants[sig.constants[k]] = element_name(constants[k]);
  return I;
}

inline std::size_t table_bits(const Signature& sig, std::size_t d) {
  std::size_t bits = 0;
  for (const auto& [p, arity] : sig.predicates) bits += arity == 1 ? d : d * d;
  return bits;
}

inline constexpr std::size_t kMaxEnumerationBits = 40;

// Calls `visit(mask, constant assignment)` over every interpretation of
// size d, masks outermost, constants in mixed radix; stops on false.
template <typename Visit>
bool for_each_point(const Signature& sig, std::size_t d, Visit&& visit) {
  const std::size_t bits = table_bits(sig, d);
  if (bits > kMaxEnumerationBits)
    throw std::length_error("interpretation space too large to enumerate (" +
                            std::to_string(bits) + " table bits)");
  const std::uint64_t masks = std::uint64_t{1} << bits;
  std::vector<std::size_t> consts(sig.constants.size(), 0);
  for (std::uint64_t mask = 0; mask < masks; ++mask) {
    std::fill(consts.begin(), consts.end(), 0);
    while (true) {
      if (!visit(mask, consts)) return false;
      std::size_t k = 0;
      while (k < consts.size() && ++consts[k] == d) consts[k++] = 0;
      if (k == consts.size()) break;
    }
  }
  return true;
}

}  // namespace detail

/// Truth value of `f` in `I` under `e`.
inline bool eval(const Interpretation& I, const Formula& f, const Env& e = {}) {
  if (I.domain.empty()) throw EvalError("empty domain");
  const auto c = detail::compile(f);
  std::map<std::string, std::size_t> element;
  for (std::size_t i = 0; i < I.domain.size(); ++i) element.emplace(I.domain[i], i);
  const auto index = [&](const std::string& name) {
    auto it = element.find(name);
    if (it == element.end()) throw EvalError(name + " is not in the domain");
    return it->second;
  };

  detail::Tables t;
  t.size = I.domain.size();
  for (std::size_t p = 0; p < c.predicates.size(); ++p) {
    const auto& name = c.predicates[p];
    std::vector<std::uint8_t> table(c.arities[p] == 1 ? t.size : t.size * t.size, 0);
    if (c.arities[p] == 1) {
      if (auto it = I.monadic.find(name); it != I.monadic.end())
        for (const auto& m : it->second) table[index(m)] = 1;
    } else if (auto it = I.dyadic.find(name); it != I.dyadic.end()) {
      for (const auto& [a, b] : it->second) table[index(a) * t.size + index(b)] = 1;
    }
    t.predicates.push_back(std::move(table));
  }
  for (const auto& name : c.constants) {
    auto it = I.constants.find(name);
    if (it == I.constants.end()) throw EvalError("unmapped constant " + name);
    t.constants.push_back(index(it->second));
  }
  std::vector<std::size_t> slots(c.slots, 0);
  for (const auto& [var, slot] : c.free_slots) {
    auto it = e.find(var);
    if (it == e.end()) throw EvalError("free variable " + var + " has no value");
    slots[slot] = index(it->second);
  }
  return detail::run(c, t, slots, c.root);
}

/// Every interpretation of `sig` over the domain {1..d} in a fixed order;
/// `visit` returns false to stop early.
inline void enumerate_interpretations(const Signature& sig, std::size_t d,
                                      const std::function<bool(const Interpretation&)>& visit) {
  if (d == 0) throw std::invalid_argument("domain size must be at least 1");
  detail::for_each_point(sig, d, [&](std::uint64_t mask, const std::vector<std::size_t>& consts) {
    return visit(detail::decode(sig, d, mask, consts));
  });
}

struct OracleResult {
  bool valid = true;
  std::size_t bound = 0;  // domains 1..bound were searched
  std::optional<Interpretation> falsifier;
};

/// Searches domains of size 1..max_domain for an interpretation falsifying
/// the closed formula `f`; returns the first one found.
inline OracleResult oracle_validity(const Formula& f, std::size_t max_domain) {
  if (max_domain == 0) throw std::invalid_argument("max_domain must be at least 1");
  if (auto fv = free_variables(f); !fv.empty()) throw FreeVariableError(fv);
  const Signature sig = signature_of(f);
  const auto c = detail::compile(f);
  std::vector<std::size_t> pred_order;  // compiled predicate -> signature position
  for (const auto& name : c.predicates)
    pred_order.push_back(static_cast<std::size_t>(
        std::distance(sig.predicates.begin(), sig.predicates.find(name))));
  std::vector<std::size_t> const_order;
  for (const auto& name : c.constants)
    const_order.push_back(static_cast<std::size_t>(
        std::find(sig.constants.begin(), sig.constants.end(), name) - sig.constants.begin()));

  for (std::size_t d = 1; d <= max_domain; ++d) {
    std::vector<std::size_t> offsets;
    std::size_t bit = 0;
    for (const auto& [p, arity] : sig.predicates) {
      offsets.push_back(bit);
      bit += arity == 1 ? d : d * d;
    }
    detail::Tables t;
    t.size = d;
    t.predicates.resize(c.predicates.size());
    t.constants.resize(c.constants.size());
    std::vector<std::size_t> slots(c.slots, 0);
    std::optional<Interpretation> found;
    detail::for_each_point(sig, d, [&](std::uint64_t mask, const std::vector<std::size_t>& consts) {
      for (std::size_t p = 0; p < c.predicates.size(); ++p) {
        const std::size_t width = c.arities[p] == 1 ? d : d * d;
        auto& table = t.predicates[p];
        table.resize(width);
        for (std::size_t i = 0; i < width; ++i)
          table[i] = static_cast<std::uint8_t>(mask >> (offsets[pred_order[p]] + i) & 1U);
      }
      for (std::size_t k = 0; k < c.constants.size(); ++k) t.constants[k] = consts[const_order[k]];
      if (detail::run(c, t, slots, c.root)) return true;
      found = detail::decode(sig, d, mask, consts);
      return false;
    });
    if (found) return {false, d, std::move(found)};
  }
  return {true, max_domain, std::nullopt};
}

/// Reads the interpretation off a consistent, saturated marking: the
/// individuals form the domain, constants denote themselves, and an atom
/// holds iff a node for it is marked 1 (unmarked atoms count as 0).
inline Interpretation extract_model(const MarkingState& s) {
  if (s.double_mark()) throw std::logic_error("extract_model: state holds a double mark");
  for (NodeId n : s.tree().preorder(false))
    if (!s.forced_consequences(n).empty())
      throw std::logic_error("extract_model: state is not saturated");

  const auto& individuals = s.domain();
  const Term generic = Term::variable(kGenericVariable);
  const bool only_generic = individuals.size() == 1 && individuals[0] == generic;
  std::set<std::string> names;
  for (const auto& t : individuals) names.insert(t.name);
  std::string generic_name = "e";
  for (int k = 1; names.contains(generic_name); ++k) generic_name = "e" + std::to_string(k);

  const auto name_of = [&](const Term& t) -> std::optional<std::string> {
    if (t == generic) return only_generic ? std::optional(generic_name) : std::nullopt;
    if (t.is_constant()) return t.name;
    return std::nullopt;
  };

  Interpretation I;
  for (const auto& t : individuals)
    if (auto n = name_of(t)) I.domain.push_back(*n);
  if (I.domain.empty()) I.domain.push_back(generic_name);
  for (const auto& c : constants_of(s.tree().formula())) I.constants[c] = c;
  for (const auto& [p, arity] : predicates_of(s.tree().formula())) {
    if (arity == 1) I.monadic[p];
    else I.dyadic[p];
  }
  for (NodeId n : s.tree().preorder(false)) {
    const auto& node = s.tree().node(n);
    if (node.op != Op::Atom || s.mark(n) != Mark::One) continue;
    std::vector<std::string> args;
    for (const auto& slot : node.args) {
      auto name = slot.filled() ? name_of(slot.term) : std::nullopt;
      if (!name) break;
      args.push_back(*name);
    }
    if (args.size() != node.args.size()) continue;
    if (args.size() == 1) I.monadic[node.name].insert(args[0]);
    else I.dyadic[node.name].emplace(args[0], args[1]);
  }
  return I;
}

/// The leaf marking an interpretation induces on the ground atom leaves of
/// a tree. Constants resolve through I.constants, then as domain elements.
inline std::map<NodeId, Mark> marks_from_model(const Interpretation& I, const ForcingTree& t) {
  const std::set<std::string> elements(I.domain.begin(), I.domain.end());
  const auto resolve = [&](const Term& term) {
    if (auto it = I.constants.find(term.name); it != I.constants.end()) return it->second;
    if (term.is_constant() && elements.contains(term.name)) return term.name;
    throw EvalError("unmapped constant " + term.name);
  };
  std::map<NodeId, Mark> out;
  for (NodeId n : t.preorder(false)) {
    const auto& node = t.node(n);
    if (node.op != Op::Atom) continue;
    const bool ground = std::all_of(node.args.begin(), node.args.end(),
                                    [](const Slot& s) { return s.term.is_constant(); });
    if (!ground) continue;
    bool holds = false;
    if (node.args.size() == 1) {
      const std::string e = resolve(node.args[0].term);
      auto it = I.monadic.find(node.name);
      holds = it != I.monadic.end() && it->second.contains(e);
    } else {
      std::pair<std::string, std::string> e{resolve(node.args[0].term), resolve(node.args[1].term)};
      auto it = I.dyadic.find(node.name);
      holds = it != I.dyadic.end() && it->second.contains(e);
    }
    out.emplace(n, to_mark(holds));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization and comparison

inline nlohmann::json to_json(const Interpretation& I) {
  nlohmann::json j;
  std::set<std::string> domain(I.domain.begin(), I.domain.end());
  j["domain"] = domain;
  j["constants"] = nlohmann::json::object();
  for (const auto& [c, e] : I.constants) j["constants"][c] = e;
  j["monadic"] = nlohmann::json::object();
  for (const auto& [p, ext] : I.monadic) j["monadic"][p] = ext;
  j["dyadic"] = nlohmann::json::object();
  for (const auto& [p, ext] : I.dyadic) {
    auto arr = nlohmann::json::array();
    for (const auto& [a, b] : ext) arr.push_back({a, b});
    j["dyadic"][p] = arr;
  }
  return j;
}

inline Interpretation interpretation_from_json(const nlohmann::json& j) {
  Interpretation I;
  for (const auto& e : j.at("domain")) I.domain.push_back(e.get<std::string>());
  if (j.contains("constants"))
    for (const auto& [c, e] : j.at("constants").items()) I.constants[c] = e.get<std::string>();
  if (j.contains("monadic"))
    for (const auto& [p, ext] : j.at("monadic").items())
      for (const auto& e : ext) I.monadic[p].insert(e.get<std::string>());
  if (j.contains("dyadic"))
    for (const auto& [p, ext] : j.at("dyadic").items()) {
      auto& rel = I.dyadic[p];
      for (const auto& pair : ext) rel.emplace(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
    }
  return I;
}

/// Canonical text of an interpretation up to renaming of its elements:
/// the least serialization over all element orders. Empty extensions are
/// dropped. Intended for small domains.
inline std::string canonical_form(const Interpretation& I) {
  const std::size_t d = I.domain.size();
  if (d > 9) throw std::length_error("canonical_form: domain too large");
  std::vector<std::size_t> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  std::optional<std::string> best;
  do {
    std::map<std::string, std::string> rename;
    for (std::size_t i = 0; i < d; ++i) rename[I.domain[i]] = std::to_string(perm[i]);
    Interpretation J;
    for (std::size_t i = 0; i < d; ++i) J.domain.push_back(std::to_string(i));
    for (const auto& [c, e] : I.constants) J.constants[c] = rename.at(e);
    for (const auto& [p, ext] : I.monadic) {
      if (ext.empty()) continue;
      auto& out = J.monadic[p];
      for (const auto& e : ext) out.insert(rename.at(e));
    }
    for (const auto& [p, ext] : I.dyadic) {
      if (ext.empty()) continue;
      auto& out = J.dyadic[p];
      for (const auto& [a, b] : ext) out.emplace(rename.at(a), rename.at(b));
    }
    std::string text = to_json(J).dump();
    if (!best || text < *best) best = std::move(text);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return *best;
}

inline bool isomorphic(const Interpretation& a, const Interpretation& b) {
  return a.domain.size() == b.domain.size() && canonical_form(a) == canonical_form(b);
}

}  // namespace forcing
