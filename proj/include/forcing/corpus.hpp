#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstddef>
#include <istream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "forcing/decide.hpp"
#include "forcing/generate.hpp"
#include "forcing/model.hpp"
#include "forcing/syntax.hpp"

namespace forcing {

class CorpusError : public std::runtime_error {
 public:
  CorpusError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class Expectation { Valid, Invalid };

inline std::string to_string(Expectation e) { return e == Expectation::Valid ? "valid" : "invalid"; }

struct CorpusEntry {
  std::size_t line = 0;
  std::string text;
  Formula formula;
  std::optional<Expectation> expect;
};

namespace detail {

inline std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Reads "expect: valid" out of a comment body; nullopt if it is not one.
inline std::optional<Expectation> expectation(const std::string& comment, std::size_t line) {
  const std::string body = trim(comment);
  const std::string key = "expect:";
  if (body.rfind(key, 0) != 0) return std::nullopt;
  const std::string value = trim(body.substr(key.size()));
  if (value == "valid") return Expectation::Valid;
  if (value == "invalid") return Expectation::Invalid;
  throw CorpusError("unknown expectation '" + value + "'", line);
}

}  // namespace detail

/// One formula per line; `#` starts a comment. `# expect: valid|invalid`
/// annotates the formula on its own line, or the next formula when the
/// comment stands alone.
inline std::vector<CorpusEntry> parse_corpus(std::istream& in) {
  std::vector<CorpusEntry> out;
  std::optional<Expectation> pending;
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    const auto hash = raw.find('#');
    const std::string text = detail::trim(raw.substr(0, hash));
    std::optional<Expectation> here;
    if (hash != std::string::npos) here = detail::expectation(raw.substr(hash + 1), line);
    if (text.empty()) {
      if (here) pending = here;
      continue;
    }
    try {
      Formula f = parse_formula(text);
      out.push_back({line, text, std::move(f), here ? here : pending});
    } catch (const ParseError& e) {
      throw CorpusError(e.what(), line);
    }
    pending.reset();
  }
  return out;
}

inline std::vector<CorpusEntry> parse_corpus(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in);
}

/// Settings for a generated corpus (`n=2 depth=4 count=500 seed=S`).
struct GenSpec {
  std::size_t predicates = 2;
  std::size_t depth = 4;
  std::size_t count = 100;
  std::uint64_t seed = 1;
};

inline GenSpec parse_gen_spec(const std::vector<std::string>& tokens) {
  GenSpec g;
  for (const auto& tok : tokens) {
    std::istringstream words(tok);
    std::string word;
    while (words >> word) {
      const auto eq = word.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got " + word);
      const std::string key = word.substr(0, eq);
      const std::uint64_t value = std::stoull(word.substr(eq + 1));
      if (key == "n") g.predicates = value;
      else if (key == "depth") g.depth = value;
      else if (key == "count") g.count = value;
      else if (key == "seed") g.seed = value;
      else throw std::invalid_argument("unknown generator key " + key);
    }
  }
  if (g.predicates == 0 || g.predicates > 8) throw std::invalid_argument("n must be in 1..8");
  return g;
}

/// Random closed monadic formulas over n predicates, reproducible from the seed.
inline std::vector<CorpusEntry> generate_corpus(const GenSpec& g) {
  GenOptions o;
  o.monadic.clear();
  for (std::size_t i = 0; i < g.predicates; ++i) o.monadic.emplace_back(1, static_cast<char>('P' + i));
  o.max_complexity = g.depth;
  std::mt19937_64 rng(g.seed);
  std::vector<CorpusEntry> out;
  for (std::size_t i = 0; i < g.count; ++i) {
    Formula f = random_closed_formula(rng, o);
    out.push_back({i + 1, format_formula(f), f, std::nullopt});
  }
  return out;
}

struct CorpusRecord {
  std::size_t line = 0;
  std::string formula;
  std::optional<Expectation> expected;
  std::string decided;  // verdict name, or "error"
  std::optional<std::string> oracle;
  std::optional<bool> agree;
  bool expectation_met = true;
  double millis = 0;
  std::string error;
};

struct CorpusReport {
  std::vector<CorpusRecord> records;

  [[nodiscard]] bool ok() const {
    for (const auto& r : records)
      if (!r.error.empty() || !r.expectation_met || r.agree == false) return false;
    return true;
  }
};

inline constexpr std::size_t kOracleBitLimit = 24;

/// The domain size the oracle can settle a formula at, if the search space
/// stays small: 2^n for monadic formulas, the engine budget otherwise (not
/// a guarantee, so only falsifiers count).
inline std::optional<std::pair<std::size_t, bool>> oracle_plan(const Formula& f,
                                                               const DomainBound& b) {
  const Signature sig = signature_of(f);
  const bool monadic = classify_fragment(f).kind == FragmentClass::Kind::Monadic;
  std::size_t d = monadic ? b.individuals : std::min<std::size_t>(b.individuals, 3);
  while (d > 0 && detail::table_bits(sig, d) > kOracleBitLimit) --d;
  if (d == 0) return std::nullopt;
  return std::make_pair(d, monadic && b.guaranteed && d >= b.individuals);
}

inline CorpusReport run_corpus(const std::vector<CorpusEntry>& entries, const EngineConfig& cfg) {
  CorpusReport report;
  for (const auto& e : entries) {
    CorpusRecord r;
    r.line = e.line;
    r.formula = format_formula(e.formula);
    r.expected = e.expect;
    const auto start = std::chrono::steady_clock::now();
    try {
      const Verdict v = decide(e.formula, cfg);
      r.decided = verdict_name(v);
      if (auto plan = oracle_plan(e.formula, v.bound)) {
        const auto [d, genuine] = *plan;
        const auto o = oracle_validity(e.formula, d);
        r.oracle = o.valid ? "valid-up-to-" + std::to_string(d) : "invalid";
        if (genuine) r.agree = v.is_invalid() == !o.valid && !v.is_unsettled();
        else r.agree = !(v.is_valid() && !o.valid);
      }
      if (r.expected) r.expectation_met = r.decided == to_string(*r.expected);
    } catch (const std::exception& ex) {
      r.decided = "error";
      r.error = ex.what();
      r.expectation_met = !r.expected;
    }
    r.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    report.records.push_back(std::move(r));
  }
  return report;
}

inline nlohmann::json to_json(const CorpusReport& report) {
  auto arr = nlohmann::json::array();
  for (const auto& r : report.records) {
    nlohmann::json j{{"line", r.line}, {"formula", r.formula}, {"decided", r.decided},
                     {"millis", r.millis}, {"expectation_met", r.expectation_met}};
    j["expected"] = r.expected ? nlohmann::json(to_string(*r.expected)) : nlohmann::json();
    j["oracle"] = r.oracle ? nlohmann::json(*r.oracle) : nlohmann::json();
    j["agree"] = r.agree ? nlohmann::json(*r.agree) : nlohmann::json();
    if (!r.error.empty()) j["error"] = r.error;
    arr.push_back(std::move(j));
  }
  return {{"records", arr}, {"ok", report.ok()}};
}

}  // namespace forcing
