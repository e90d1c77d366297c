#pragma once

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "forcing/forcing.hpp"

namespace forcing::cli {

enum Exit : int {
  kValid = 0,
  kInvalid = 1,
  kUnsettled = 2,
  kResource = 3,
  kUsage = 64,
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline int verdict_exit(const Verdict& v) {
  if (v.is_valid()) return kValid;
  if (v.is_invalid()) return kInvalid;
  return kUnsettled;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct FormulaInput {
  std::string text;
  std::string file;

  Formula get() const {
    if (text.empty() == file.empty()) throw UsageError("give exactly one of a formula or --file");
    std::string src = file.empty() ? text : read_file(file);
    while (!src.empty() && (src.back() == '\n' || src.back() == '\r')) src.pop_back();
    return parse_formula(src);
  }

  void add_to(CLI::App* cmd) {
    cmd->add_option("formula", text, "Formula text");
    cmd->add_option("--file", file, "Read the formula from a file");
  }
};

inline EngineConfig engine_config(std::optional<std::size_t> max_individuals,
                                  std::optional<std::size_t> branch_limit, bool direct) {
  EngineConfig cfg;
  cfg.max_individuals = max_individuals;
  if (branch_limit) cfg.branch_limit = *branch_limit;
  cfg.allow_direct = direct;
  return cfg;
}

inline void print_verdict_text(std::ostream& out, const Formula& f, const Verdict& v, bool trace) {
  out << "formula:  " << format_formula(f) << '\n';
  out << "fragment: " << to_string(v.fragment) << '\n';
  out << "verdict:  " << verdict_name(v);
  if (v.is_unsettled()) out << " (up to " << v.bound.individuals << " individuals)";
  out << '\n';
  if (const auto* inv = std::get_if<Invalid>(&v.result)) out << "model:    " << to_json(inv->model).dump() << '\n';
  if (trace) out << render_trace(v.trace());
}

inline int cmd_check(const Formula& f, const EngineConfig& cfg, const std::string& format,
                     bool trace, std::ostream& out) {
  const Verdict v = decide(f, cfg);
  if (format == "json") out << verdict_json(f, v).dump(2) << '\n';
  else print_verdict_text(out, f, v, trace);
  return verdict_exit(v);
}

inline int cmd_render(const Formula& f, const EngineConfig& cfg, const std::string& format,
                      bool initial, bool trace, std::ostream& out) {
  const RenderFormat rf = format == "dot" ? RenderFormat::Dot : RenderFormat::Ascii;
  if (initial) {
    const MarkingState s(build_initial_tree(f));
    if (format == "json") out << nlohmann::json{{"formula", format_formula(f)}, {"tree", render_ascii(s)}}.dump(2) << '\n';
    else out << render_tree(s, rf);
    return kValid;
  }
  const Verdict v = decide(f, cfg);
  const MarkingState* shown = nullptr;
  if (const auto* inv = std::get_if<Invalid>(&v.result)) shown = &inv->state;
  else if (const auto* val = std::get_if<Valid>(&v.result); val && val->closing) shown = &*val->closing;
  const MarkingState fallback(build_initial_tree(f));
  if (!shown) shown = &fallback;

  if (format == "json") {
    auto j = verdict_json(f, v);
    j["tree"] = render_ascii(*shown);
    out << j.dump(2) << '\n';
  } else {
    out << render_tree(*shown, rf);
    if (trace || rf == RenderFormat::Ascii) {
      if (rf == RenderFormat::Dot) out << "/*\n";
      out << render_trace(v.trace());
      if (rf == RenderFormat::Dot) out << "*/\n";
    }
  }
  return verdict_exit(v);
}

inline int cmd_oracle(const Formula& f, std::optional<std::size_t> max_domain, const std::string& format,
                      std::ostream& out) {
  std::size_t d = 0;
  if (max_domain) d = *max_domain;
  else d = domain_bound(classify_fragment(f), {}).individuals;
  const OracleResult r = oracle_validity(f, d);
  if (format == "json") {
    nlohmann::json j{{"valid", r.valid}, {"bound", r.bound}};
    j["falsifier"] = r.falsifier ? to_json(*r.falsifier) : nlohmann::json();
    out << j.dump(2) << '\n';
  } else if (r.valid) {
    out << "ValidUpTo(" << r.bound << ")\n";
  } else {
    out << "falsifier: " << to_json(*r.falsifier).dump() << '\n';
  }
  return r.valid ? kValid : kInvalid;
}

inline void print_report_text(std::ostream& out, const CorpusReport& report) {
  std::size_t agree = 0, compared = 0, met = 0, expected = 0;
  for (const auto& r : report.records) {
    out << r.line << ": " << r.decided;
    if (r.expected) out << " (expected " << to_string(*r.expected) << ')';
    if (r.oracle) out << " oracle=" << *r.oracle;
    if (r.agree) out << (*r.agree ? " agree" : " DISAGREE");
    if (!r.expectation_met) out << " MISS";
    if (!r.error.empty()) out << " error: " << r.error;
    out << "  " << r.formula << '\n';
    if (r.agree) ++compared, agree += *r.agree;
    if (r.expected) ++expected, met += r.expectation_met;
  }
  out << report.records.size() << " formulas, " << agree << '/' << compared << " agree with the oracle, "
      << met << '/' << expected << " expectations met\n";
}

inline int cmd_corpus(const std::vector<CorpusEntry>& entries, const EngineConfig& cfg,
                      const std::string& format, std::ostream& out) {
  const CorpusReport report = run_corpus(entries, cfg);
  if (format == "json") out << to_json(report).dump(2) << '\n';
  else print_report_text(out, report);
  return report.ok() ? 0 : 1;
}

/// Runs the `sft` command line; `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantic forcing trees: validity of monadic and two-variable formulas", "sft"};
  app.require_subcommand(1);

  FormulaInput input;
  std::optional<std::size_t> max_individuals, branch_limit, max_domain;
  std::optional<std::uint64_t> seed;
  bool direct = false, trace = false, initial = false;
  std::string format = "text";
  std::string corpus_file;
  std::vector<std::string> gen;

  auto* check = app.add_subcommand("check", "Decide validity");
  input.add_to(check);
  check->add_option("--max-individuals", max_individuals, "Individual budget");
  check->add_option("--branch-limit", branch_limit, "Search node limit");
  check->add_flag("--direct", direct, "Try direct forcing first");
  check->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
  check->add_flag("--trace", trace, "Print the justification trace");

  auto* render = app.add_subcommand("render", "Render the marked tree and trace");
  input.add_to(render);
  render->add_option("--max-individuals", max_individuals, "Individual budget");
  render->add_flag("--direct", direct, "Try direct forcing first");
  render->add_flag("--initial", initial, "Render the unmarked initial tree");
  render->add_flag("--trace", trace, "Append the trace (dot: as a comment)");
  render->add_option("--format", format)->check(CLI::IsMember({"ascii", "dot", "json"}));

  auto* oracle = app.add_subcommand("oracle", "Search finite interpretations for a falsifier");
  input.add_to(oracle);
  oracle->add_option("--max-domain", max_domain, "Largest domain size")->check(CLI::PositiveNumber);
  oracle->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

  auto* corpus = app.add_subcommand("corpus", "Run decide and the oracle over a corpus");
  corpus->add_option("file", corpus_file, "Corpus file");
  corpus->add_option("--gen", gen, "Generate: n=2 depth=4 count=500 seed=S")->expected(1, 4);
  corpus->add_option("--seed", seed, "Generator seed");
  corpus->add_option("--max-individuals", max_individuals, "Individual budget");
  corpus->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  if (render->parsed() && format == "text") format = "ascii";
  try {
    const EngineConfig cfg = engine_config(max_individuals, branch_limit, direct);
    if (check->parsed()) return cmd_check(input.get(), cfg, format, trace, out);
    if (render->parsed()) return cmd_render(input.get(), cfg, format, initial, trace, out);
    if (oracle->parsed()) return cmd_oracle(input.get(), max_domain, format, out);

    std::vector<CorpusEntry> entries;
    if (!gen.empty() && !corpus_file.empty()) throw UsageError("give a corpus file or --gen, not both");
    if (!gen.empty()) {
      GenSpec g = parse_gen_spec(gen);
      if (seed) g.seed = *seed;
      entries = generate_corpus(g);
    } else if (!corpus_file.empty()) {
      entries = parse_corpus(read_file(corpus_file));
    } else {
      entries = parse_corpus(std::cin);
    }
    return cmd_corpus(entries, cfg, format, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kUsage;
  } catch (const CorpusError& e) {
    err << "corpus error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const BudgetError& e) {
    err << "error: " << e.what() << '\n';
    return kResource;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kResource;
  }
}

}  // namespace forcing::cli
