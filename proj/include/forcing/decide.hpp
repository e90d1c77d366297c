#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "forcing/formula.hpp"
#include "forcing/marking.hpp"
#include "forcing/model.hpp"
#include "forcing/tree.hpp"

namespace forcing {

class BudgetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SearchLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DomainBound {
  std::size_t individuals = 0;
  // Whether exhausting this many individuals settles validity.
  bool guaranteed = false;
};

inline constexpr std::size_t kDyadicDefaultBudget = 8;

inline DomainBound domain_bound(const FragmentClass& fc, const EngineConfig& cfg) {
  if (cfg.max_individuals && *cfg.max_individuals == 0)
    throw BudgetError("max_individuals must be at least 1");
  switch (fc.kind) {
    case FragmentClass::Kind::Monadic: {
      const std::size_t full = fc.predicates >= 20 ? std::size_t{1} << 20
                                                   : std::size_t{1} << fc.predicates;
      const std::size_t n = cfg.max_individuals.value_or(full);
      return {n, n >= full};
    }
    case FragmentClass::Kind::Dyadic2Var:
      return {cfg.max_individuals.value_or(kDyadicDefaultBudget), false};
    case FragmentClass::Kind::Outside:
      if (!cfg.max_individuals)
        throw BudgetError("formula is outside the decidable fragments; give max_individuals");
      return {*cfg.max_individuals, false};
  }
  return {};
}

struct SearchStats {
  std::size_t branches = 0;  // explored search nodes
  std::size_t choice_points = 0;
  bool capped = false;
};

struct Valid {
  Trace trace;
  // The first branch as it closed (for direct forcing, the supposition
  // just before it was discharged).
  std::optional<MarkingState> closing;
};

struct Invalid {
  Interpretation model;
  MarkingState state;
};

struct NoCountermodelUpTo {
  std::size_t bound = 0;
  Trace trace;
};

struct Verdict {
  std::variant<Valid, Invalid, NoCountermodelUpTo> result;
  FragmentClass fragment;
  DomainBound bound;
  SearchStats stats;

  [[nodiscard]] bool is_valid() const { return std::holds_alternative<Valid>(result); }
  [[nodiscard]] bool is_invalid() const { return std::holds_alternative<Invalid>(result); }
  [[nodiscard]] bool is_unsettled() const {
    return std::holds_alternative<NoCountermodelUpTo>(result);
  }
  [[nodiscard]] const Trace& trace() const {
    if (const auto* v = std::get_if<Valid>(&result)) return v->trace;
    if (const auto* i = std::get_if<Invalid>(&result)) return i->state.trace();
    return std::get<NoCountermodelUpTo>(result).trace;
  }
};

inline std::string verdict_name(const Verdict& v) {
  if (v.is_valid()) return "valid";
  if (v.is_invalid()) return "invalid";
  return "no-countermodel";
}

namespace detail {

// Depth-first search over options and witness choices. Works in place on
// one state: each alternative lives in a supposition scope that is
// discharged when it closes.
class Search {
 public:
  Search(const EngineConfig& cfg, std::size_t cap) : cfg_(cfg), cap_(cap) {
    cfg_.witnesses = WitnessPolicy::Deferred;
    cfg_.max_individuals = cap;
    cfg_.permissive = false;
  }

  struct Result {
    bool open = false;
    bool capped = false;
  };

  // On an open result `s` is the open branch. On a closed one, every scope
  // opened inside has been discharged again.
  Result explore(MarkingState& s) {
    if (++stats_.branches > cfg_.branch_limit)
      throw SearchLimitError("branch limit of " + std::to_string(cfg_.branch_limit) + " exceeded");
    if (s.saturate(cfg_).double_mark()) {
      if (!closing_) closing_ = s;
      return {false, false};
    }

    const auto witnesses = s.pending_witnesses();
    const auto splits = s.pending_splits();
    if (witnesses.empty() && splits.empty()) return {true, false};
    ++stats_.choice_points;
    const bool witness_first =
        !witnesses.empty() && (splits.empty() || index_of(witnesses[0]) < index_of(splits[0]));
    return witness_first ? witness(s, witnesses[0]) : split(s, splits[0]);
  }

  [[nodiscard]] const SearchStats& stats() const { return stats_; }
  [[nodiscard]] std::optional<MarkingState>& closing() { return closing_; }

 private:
  // Option on the left child of a connective: 0 first, then 1 for certain.
  Result split(MarkingState& s, NodeId n) {
    const NodeId left = s.tree().left(n);
    auto h = s.open_supposition(left, Mark::Zero);
    Result r = explore(s);
    if (r.open) return r;
    s.discharge(h, Outcome::contradiction());
    Result rest = explore(s);
    rest.capped = rest.capped || r.capped;
    return rest;
  }

  // A rejected ∀ or accepted ∃ owes a witness: a fresh individual if the cap
  // allows, otherwise (or if that fails only for lack of room) an existing one.
  Result witness(MarkingState& s, NodeId q) {
    bool capped = false;
    if (s.introduced() < cap_) {
      auto h = s.open_witness(q);
      Result r = explore(s);
      if (r.open) return r;
      s.discharge(h, Outcome::contradiction());
      if (!r.capped) return {false, false};
      capped = true;
    }
    const bool forall = s.tree().node(q).op == Op::Forall;
    const Mark needed = forall ? Mark::Zero : Mark::One;
    const Rule rule = forall ? Rule::I_Forall : Rule::I_Exists;
    for (const auto& t : std::vector<Term>(s.domain())) {
      if (!s.witness_needed(q)) break;
      NodeId inst = s.instantiate(q, t, rule);
      if (s.mark(inst) == flip(needed)) continue;
      auto h = s.open_supposition(inst, needed);
      Result r = explore(s);
      if (r.open) return r;
      capped = capped || r.capped;
      s.discharge(h, Outcome::contradiction());
      if (s.saturate(cfg_).double_mark()) return {false, capped};
    }
    if (!s.witness_needed(q)) {
      Result r = explore(s);
      r.capped = r.capped || capped;
      return r;
    }
    s.close_capped(q);
    stats_.capped = true;
    return {false, true};
  }

  EngineConfig cfg_;
  std::size_t cap_;
  SearchStats stats_;
  std::optional<MarkingState> closing_;
};

}  // namespace detail

struct DirectProof {
  Trace trace;
  MarkingState closing;
};

inline std::optional<DirectProof> direct_proof(const Formula& f, const EngineConfig& cfg);

/// Decides validity by rejecting the root and searching for a consistent
/// marking. A consistent marking yields a countermodel; if every branch
/// closes the formula is valid, unless closure relied on the individual
/// cap and the cap carries no guarantee.
inline Verdict decide(const Formula& f, const EngineConfig& cfg = {}) {
  const FragmentClass fc = classify_fragment(f);
  const DomainBound bound = domain_bound(fc, cfg);
  if (cfg.allow_direct && (f.op() == Op::Imp || f.op() == Op::Or)) {
    if (auto proof = direct_proof(f, cfg))
      return {Valid{std::move(proof->trace), std::move(proof->closing)}, fc, bound, {}};
  }
  MarkingState s(build_initial_tree(f));
  auto root = s.open_root();
  detail::Search search(cfg, bound.individuals);
  const auto r = search.explore(s);
  SearchStats stats = search.stats();
  stats.capped = stats.capped || r.capped;

  if (r.open) {
    Interpretation model = extract_model(s);
    if (eval(model, f))
      throw std::logic_error("decide: extracted model does not refute " + format_formula(f));
    s.close_well_marked();
    return {Invalid{std::move(model), std::move(s)}, fc, bound, stats};
  }
  if (stats.capped && !bound.guaranteed) {
    s.discharge(root, Outcome::abandon());
    return {NoCountermodelUpTo{bound.individuals, s.trace()}, fc, bound, stats};
  }
  s.discharge(root, Outcome::contradiction());
  return {Valid{s.trace(), std::move(search.closing())}, fc, bound, stats};
}

inline Verdict decide(std::string_view text, const EngineConfig& cfg = {}) {
  return decide(parse_formula(text), cfg);
}

inline constexpr std::size_t kDirectWitnessCap = 3;

/// Direct forcing: suppose one side of the root conditional or disjunction
/// and try to force the other side, so that an option rule marks the root 1.
/// Returns the proof, or nothing when no attempt succeeds.
inline std::optional<DirectProof> direct_proof(const Formula& f, const EngineConfig& cfg) {
  if (f.op() != Op::Imp && f.op() != Op::Or)
    throw std::invalid_argument("direct forcing needs a conditional or disjunction at the root");
  const ForcingTree tree = build_initial_tree(f);
  const NodeId root = tree.root();
  const NodeId left = tree.left(root);
  const NodeId right = tree.right(root);

  struct Attempt {
    NodeId supposed;
    Mark value;
    NodeId target;
    Mark goal;
  };
  std::vector<Attempt> attempts;
  if (f.op() == Op::Imp) {
    attempts = {{left, Mark::One, right, Mark::One}, {right, Mark::Zero, left, Mark::Zero}};
  } else {
    attempts = {{left, Mark::Zero, right, Mark::One}, {right, Mark::Zero, left, Mark::One}};
  }

  EngineConfig forced = cfg;
  forced.witnesses = WitnessPolicy::Forced;
  forced.permissive = true;
  forced.max_individuals = cfg.max_individuals.value_or(kDirectWitnessCap);

  for (const auto& a : attempts) {
    MarkingState s(tree);
    s.add_generic_variable();
    auto h = s.open_supposition(a.supposed, a.value);
    const auto r = s.saturate(forced);
    MarkingState closing = s;
    if (r.double_mark()) {
      s.discharge(h, Outcome::contradiction());
      if (!s.saturate(forced).double_mark() && s.mark(root) == Mark::One)
        return DirectProof{s.trace(), std::move(closing)};
      continue;
    }
    if (s.mark(a.target) == a.goal) {
      s.discharge(h, Outcome::target_reached(a.target));
      if (s.mark(root) == Mark::One) return DirectProof{s.trace(), std::move(closing)};
    }
  }
  return std::nullopt;
}

/// The trace of direct_proof.
inline std::optional<Trace> direct_force(const Formula& f, const EngineConfig& cfg) {
  if (auto p = direct_proof(f, cfg)) return std::move(p->trace);
  return std::nullopt;
}

inline std::optional<Trace> direct_force(const Formula& f) { return direct_force(f, EngineConfig{}); }

inline std::optional<Trace> direct_force(std::string_view text, const EngineConfig& cfg = {}) {
  return direct_force(parse_formula(text), cfg);
}

}  // namespace forcing
