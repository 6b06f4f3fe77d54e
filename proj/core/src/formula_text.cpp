#include <cctype>

#include "rlr/error.hpp"
#include "rlr/schema.hpp"

namespace rlr {

std::string toString(const Literal& lit) {
  std::string out = lit.symbol + "(" + lit.first;
  if (lit.isBinary()) out += "," + lit.second;
  out += ")";
  if (lit.kind == LiteralKind::UnaryEquality && lit.value != "true") out += "=" + lit.value;
  return out;
}

std::string toString(const Formula& f) {
  if (f.isTrue()) return "True";
  std::string out;
  for (const auto& lit : f.literals()) {
    if (!out.empty()) out += " * ";
    out += toString(lit);
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

Literal parseLiteral(std::string_view text, const Schema& schema) {
  auto fail = [&](const std::string& why) -> ValidationError {
    return ValidationError("cannot parse literal '" + std::string(text) + "': " + why);
  };
  auto open = text.find('(');
  auto close = text.find(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open)
    throw fail("expected name(args)");
  std::string name(trim(text.substr(0, open)));
  std::string_view argText = text.substr(open + 1, close - open - 1);
  std::string_view rest = trim(text.substr(close + 1));

  std::vector<std::string> args;
  while (true) {
    auto comma = argText.find(',');
    args.emplace_back(trim(argText.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    argText.remove_prefix(comma + 1);
  }

  std::optional<std::string> value;
  if (!rest.empty()) {
    if (rest.front() != '=') throw fail("unexpected text after ')'");
    value = std::string(trim(rest.substr(1)));
    if (value->empty()) throw fail("empty value");
  }

  if (const auto* rel = schema.relation(name)) {
    (void)rel;
    if (args.size() != 2) throw fail("relation needs two arguments");
    if (value) throw fail("relation literals are positive only");
    return Literal::binary(name, args[0], args[1]);
  }
  const auto* attr = schema.attribute(name);
  if (!attr) throw fail("undeclared symbol '" + name + "'");
  if (args.size() != 1) throw fail("attribute takes one argument");
  if (!attr->isDiscrete()) {
    if (value) throw fail("continuous attribute cannot take a value");
    return Literal::continuous(name, args[0]);
  }
  if (!value) {
    if (attr->valueIndex("true") < 0) throw fail("attribute needs a value");
    value = "true";
  }
  return Literal::equals(name, args[0], *value);
}

}  // namespace

Formula parseFormula(std::string_view text, const Schema& schema) {
  text = trim(text);
  if (text == "True" || text.empty()) return Formula{};
  std::vector<Literal> lits;
  while (true) {
    auto star = text.find('*');
    auto piece = trim(text.substr(0, star));
    if (piece.empty()) throw ValidationError("empty literal in '" + std::string(text) + "'");
    lits.push_back(parseLiteral(piece, schema));
    if (star == std::string_view::npos) break;
    text.remove_prefix(star + 1);
  }
  return Formula::make(std::move(lits), schema);
}

}  // namespace rlr
