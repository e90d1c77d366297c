#pragma once

#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "forcing/formula.hpp"

// Concrete syntax:
//
//   formula  := iff
//   iff      := imp ( "<->" imp )*          left-associative
//   imp      := or ( "->" imp )?             right-associative
//   or       := and ( "|" and )*
//   and      := unary ( "&" unary )*
//   unary    := "~" unary | ("forall" | "exists") IDENT "." unary | primary
//   primary  := IDENT "(" term ("," term)? ")" | "(" formula ")"
//
// An identifier in term position is a variable when an enclosing quantifier
// binds it and a constant otherwise.

namespace forcing {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at column " + std::to_string(position + 1)),
        position_(position) {}

  /// Zero-based byte offset into the input.
  [[nodiscard]] std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Formula run() {
    skip_space();
    if (pos_ == text_.size()) throw ParseError("empty formula", pos_);
    Formula f = parse_iff();
    skip_space();
    if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
    return f;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) != token) return false;
    pos_ += token.size();
    return true;
  }

  void expect(std::string_view token) {
    if (!accept(token)) throw ParseError("expected '" + std::string(token) + "'", pos_);
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
  }

  std::optional<std::string> peek_ident() {
    skip_space();
    if (pos_ >= text_.size() || !ident_start(text_[pos_])) return std::nullopt;
    std::size_t end = pos_;
    while (end < text_.size() && ident_char(text_[end])) ++end;
    return std::string(text_.substr(pos_, end - pos_));
  }

  std::string ident() {
    auto id = peek_ident();
    if (!id) throw ParseError("expected identifier", pos_);
    pos_ += id->size();
    return *id;
  }

  Formula parse_iff() {
    Formula f = parse_imp();
    while (accept("<->")) f = Formula::binary(Op::Iff, f, parse_imp());
    return f;
  }

  Formula parse_imp() {
    Formula f = parse_or();
    skip_space();
    if (accept("->")) return Formula::binary(Op::Imp, f, parse_imp());
    return f;
  }

  Formula parse_or() {
    Formula f = parse_and();
    while (accept("|")) f = Formula::binary(Op::Or, f, parse_and());
    return f;
  }

  Formula parse_and() {
    Formula f = parse_unary();
    while (accept("&")) f = Formula::binary(Op::And, f, parse_unary());
    return f;
  }

  Formula parse_unary() {
    if (accept("~")) return Formula::negation(parse_unary());
    auto id = peek_ident();
    if (id && (*id == "forall" || *id == "exists")) {
      pos_ += id->size();
      const Op op = *id == "forall" ? Op::Forall : Op::Exists;
      std::string var = ident();
      if (var == "forall" || var == "exists") throw ParseError("keyword used as variable", pos_);
      expect(".");
      bound_.push_back(var);
      Formula body = parse_unary();
      bound_.pop_back();
      return Formula::quantified(op, std::move(var), std::move(body));
    }
    return parse_primary();
  }

  Formula parse_primary() {
    skip_space();
    if (accept("(")) {
      Formula f = parse_iff();
      expect(")");
      return f;
    }
    const std::size_t at = pos_;
    std::string predicate = ident();
    if (predicate == "forall" || predicate == "exists")
      throw ParseError("misplaced quantifier keyword", at);
    expect("(");
    std::vector<Term> args;
    do {
      args.push_back(term());
    } while (accept(","));
    expect(")");
    if (args.size() > 2)
      throw ParseError("predicate " + predicate + " has arity " + std::to_string(args.size()) +
                           "; only arity 1 and 2 are supported",
                       at);
    auto [it, inserted] = arity_.emplace(predicate, args.size());
    if (!inserted && it->second != args.size())
      throw ParseError("arity conflict for predicate " + predicate + " (" +
                           std::to_string(it->second) + " vs " + std::to_string(args.size()) +
                           ")",
                       at);
    return Formula::atom(std::move(predicate), std::move(args));
  }

  Term term() {
    std::string name = ident();
    if (name == "forall" || name == "exists") throw ParseError("keyword used as term", pos_);
    for (const auto& b : bound_)
      if (b == name) return Term::variable(std::move(name));
    return Term::constant(std::move(name));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<std::string> bound_;
  std::map<std::string, std::size_t> arity_;
};

inline const char* op_text(Op op) {
  switch (op) {
    case Op::And:
      return " & ";
    case Op::Or:
      return " | ";
    case Op::Imp:
      return " -> ";
    case Op::Iff:
      return " <-> ";
    default:
      return "";
  }
}

inline void format_into(std::string& out, const Formula& f, bool top) {
  switch (f.op()) {
    case Op::Atom:
      out += f.predicate();
      out += '(';
      for (std::size_t i = 0; i < f.args().size(); ++i) {
        if (i) out += ',';
        out += f.args()[i].name;
      }
      out += ')';
      return;
    case Op::Not:
      out += '~';
      format_into(out, f.body(), false);
      return;
    case Op::Forall:
    case Op::Exists:
      out += f.op() == Op::Forall ? "forall " : "exists ";
      out += f.variable();
      out += ". ";
      format_into(out, f.body(), false);
      return;
    default:
      if (!top) out += '(';
      format_into(out, f.left(), false);
      out += op_text(f.op());
      format_into(out, f.right(), false);
      if (!top) out += ')';
  }
}

}  // namespace detail

inline Formula parse_formula(std::string_view text) { return detail::Parser(text).run(); }

/// Canonical text. Binary subformulas below the top level are always
/// parenthesized, so the output reparses to the same tree.
inline std::string format_formula(const Formula& f) {
  std::string out;
  detail::format_into(out, f, true);
  return out;
}

}  // namespace forcing
