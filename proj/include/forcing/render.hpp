#pragma once

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "forcing/decide.hpp"
#include "forcing/marking.hpp"
#include "forcing/model.hpp"
#include "forcing/syntax.hpp"

namespace forcing {

enum class RenderFormat { Ascii, Dot };

namespace detail {

inline std::string mark_tag(const MarkingState& s, NodeId n) {
  const auto m = s.mark(n);
  if (!m) return "[?]";
  std::string tag = "[";
  tag += to_char(*m);
  if (s.is_provisional(n)) tag += '?';
  return tag + "]";
}

// Children worth drawing: instances of a quantifier hide its template.
inline std::vector<NodeId> shown_children(const ForcingTree& t, NodeId n) {
  const auto& node = t.node(n);
  if (is_quantifier(node.op) && node.children.size() > 1)
    return {node.children.begin() + 1, node.children.end()};
  return node.children;
}

inline std::string display_label(const ForcingTree& t, NodeId n) {
  std::string label = node_label(t, n);
  if (const auto& term = t.node(n).instance_term)
    label = t.node(*t.node(n).parent).name + ":=" + term->name + "  " + label;
  return label;
}

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace detail

/// Indented text tree, one node per line, each ending in its mark tag.
inline std::string render_ascii(const MarkingState& s) {
  std::ostringstream out;
  const auto& t = s.tree();
  auto walk = [&](const auto& self, NodeId n, const std::string& prefix, bool last,
                  bool top) -> void {
    out << prefix;
    if (!top) out << (last ? "`-- " : "|-- ");
    out << detail::display_label(t, n) << ' ' << detail::mark_tag(s, n) << '\n';
    const auto kids = detail::shown_children(t, n);
    const std::string next = top ? prefix : prefix + (last ? "    " : "|   ");
    for (std::size_t i = 0; i < kids.size(); ++i) self(self, kids[i], next, i + 1 == kids.size(), false);
  };
  walk(walk, t.root(), "", true, true);
  return out.str();
}

/// Graphviz digraph: accepted nodes are green ellipses, rejected ones red
/// boxes, provisional marks have dashed borders.
inline std::string render_dot(const MarkingState& s) {
  std::ostringstream out;
  const auto& t = s.tree();
  out << "digraph forcing {\n  node [fontname=\"monospace\"];\n";
  std::vector<std::pair<NodeId, NodeId>> edges;
  auto walk = [&](const auto& self, NodeId n) -> void {
    const auto m = s.mark(n);
    out << "  n" << index_of(n) << " [label=\""
        << detail::dot_escape(detail::display_label(t, n) + " " + detail::mark_tag(s, n)) << "\"";
    if (m) {
      out << ", shape=" << (*m == Mark::One ? "ellipse" : "box")
          << ", style=\"" << (s.is_provisional(n) ? "filled,dashed" : "filled") << "\""
          << ", fillcolor=" << (*m == Mark::One ? "palegreen" : "lightcoral");
    } else {
      out << ", shape=plaintext";
    }
    out << "];\n";
    for (NodeId c : detail::shown_children(t, n)) {
      edges.emplace_back(n, c);
      self(self, c);
    }
  };
  walk(walk, t.root());
  for (const auto& [a, b] : edges) out << "  n" << index_of(a) << " -> n" << index_of(b) << ";\n";
  out << "}\n";
  return out.str();
}

inline std::string render_tree(const MarkingState& s, RenderFormat f) {
  return f == RenderFormat::Dot ? render_dot(s) : render_ascii(s);
}

/// "IA∀ y A∀ en 6" for one step, without its number.
inline std::string step_text(const Step& st) {
  std::string text;
  if (st.instantiation) text += std::string(rule_name(*st.instantiation)) + " y ";
  text += rule_name(st.rule);
  if (st.premises.empty()) return text;
  const bool pair = st.premises.size() == 2 && !is_discharge_rule(st.rule);
  text += " en ";
  for (std::size_t i = 0; i < st.premises.size(); ++i) {
    if (i) text += pair ? " y " : ", ";
    text += std::to_string(st.premises[i]);
  }
  return text;
}

/// One line per step, with consecutive steps of identical justification
/// grouped ("2, 3. R→ en 1").
inline std::vector<std::string> trace_lines(const Trace& trace) {
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < trace.size();) {
    const std::string text = step_text(trace[i]);
    std::size_t j = i + 1;
    while (j < trace.size() && trace[j].node && trace[i].node && step_text(trace[j]) == text &&
           trace[j].provisional == trace[i].provisional && trace[j].rule != Rule::DM)
      ++j;
    std::string nums;
    for (std::size_t k = i; k < j; ++k) nums += (k == i ? "" : ", ") + std::to_string(trace[k].number);
    lines.push_back(nums + ". " + text);
    i = j;
  }
  return lines;
}

inline std::string render_trace(const Trace& trace) {
  std::string out;
  for (const auto& line : trace_lines(trace)) out += line + "\n";
  return out;
}

inline nlohmann::json verdict_json(const Formula& f, const Verdict& v) {
  nlohmann::json j;
  j["formula"] = format_formula(f);
  j["verdict"] = verdict_name(v);
  j["fragment"] = to_string(v.fragment);
  j["bound"] = v.bound.individuals;
  j["guaranteed"] = v.bound.guaranteed;
  if (const auto* inv = std::get_if<Invalid>(&v.result)) j["model"] = to_json(inv->model);
  j["trace"] = trace_lines(v.trace());
  j["stats"] = {{"branches", v.stats.branches},
                {"choice_points", v.stats.choice_points},
                {"capped", v.stats.capped}};
  return j;
}

}  // namespace forcing
