#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rlr {

enum class RangeKind { Boolean, Categorical, Continuous };

/// Unary function symbol over one population.
///
/// Boolean attributes always carry the value list {"false", "true"} so that
/// every discrete attribute is handled as categorical downstream.
struct AttributeDecl {
  std::string name;
  std::string population;
  RangeKind kind = RangeKind::Boolean;
  std::vector<std::string> values;

  bool isDiscrete() const { return kind != RangeKind::Continuous; }
  /// Index of `value` in the range, or -1.
  int valueIndex(std::string_view value) const;
};

/// Binary predicate between two (possibly equal) populations.
struct RelationDecl {
  std::string name;
  std::string from;
  std::string to;
};

/// The relational vocabulary: populations plus attribute and relation symbols.
class Schema {
 public:
  void addPopulation(const std::string& name);
  void addAttribute(AttributeDecl decl);
  void addRelation(RelationDecl decl);

  bool hasPopulation(std::string_view name) const;
  const AttributeDecl* attribute(std::string_view name) const;
  const RelationDecl* relation(std::string_view name) const;

  const std::vector<std::string>& populations() const { return populations_; }
  const std::vector<AttributeDecl>& attributes() const { return attributes_; }
  const std::vector<RelationDecl>& relations() const { return relations_; }

 private:
  void checkFreshSymbol(const std::string& name) const;

  std::vector<std::string> populations_;
  std::vector<AttributeDecl> attributes_;
  std::vector<RelationDecl> relations_;
  std::unordered_map<std::string, std::size_t> attributeIndex_;
  std::unordered_map<std::string, std::size_t> relationIndex_;
};

AttributeDecl booleanAttribute(std::string name, std::string population);
AttributeDecl categoricalAttribute(std::string name, std::string population,
                                   std::vector<std::string> values);
AttributeDecl continuousAttribute(std::string name, std::string population);

struct LogicalVariable {
  std::string name;
  std::string population;

  auto operator<=>(const LogicalVariable&) const = default;
};

/// Declaration order of the enumerators is the canonical literal order.
enum class LiteralKind { Binary, UnaryEquality, UnaryContinuous };

/// One conjunct of a formula. Member order doubles as the canonical sort key.
struct Literal {
  LiteralKind kind = LiteralKind::Binary;
  std::string symbol;
  std::string value;
  std::string first;
  std::string second;

  static Literal binary(std::string relation, std::string from, std::string to);
  static Literal equals(std::string attribute, std::string var, std::string value);
  static Literal continuous(std::string attribute, std::string var);

  bool isBinary() const { return kind == LiteralKind::Binary; }
  bool isUnary() const { return kind != LiteralKind::Binary; }
  bool mentions(std::string_view var) const { return first == var || second == var; }

  auto operator<=>(const Literal&) const = default;
};

/// Conjunction of literals. The empty conjunction is the True formula.
class Formula {
 public:
  Formula() = default;

  /// Builds a formula, inferring variable populations from the schema.
  /// Throws ValidationError on undeclared symbols, out-of-range values or a
  /// variable used at two different populations.
  static Formula make(std::vector<Literal> literals, const Schema& schema);

  /// Builds a formula from already-resolved parts without consulting a schema.
  static Formula fromParts(std::vector<Literal> literals, std::vector<LogicalVariable> variables);

  const std::vector<Literal>& literals() const { return literals_; }
  /// Variables sorted by name.
  const std::vector<LogicalVariable>& variables() const { return variables_; }
  bool isTrue() const { return literals_.empty(); }
  bool hasVariable(std::string_view name) const;
  const std::string& populationOf(std::string_view name) const;

  bool operator==(const Formula&) const = default;

 private:
  std::vector<Literal> literals_;
  std::vector<LogicalVariable> variables_;
};

/// The PRV being predicted: a discrete unary attribute of one population,
/// bound to a single logical variable. Label 1 means "equals positiveClass".
struct TargetSpec {
  std::string attribute;
  std::string population;
  std::string variable;
  std::string positiveClass;
};

/// Checks that the target refers to a declared discrete attribute with the
/// positive class in range.
void validateTarget(const TargetSpec& target, const Schema& schema);

/// Normal form under literal reordering, duplicate-literal removal and
/// bijective renaming of every variable other than `targetVariable`.
Formula canonicalize(const Formula& f, std::string_view targetVariable);
inline Formula canonicalize(const Formula& f, const TargetSpec& t) {
  return canonicalize(f, t.variable);
}

struct RoleSet {
  bool target = false;
  bool connector = false;
  bool attributed = false;
  bool hanging = false;

  bool operator==(const RoleSet&) const = default;
};

std::map<std::string, RoleSet> classifyVariables(const Formula& f, const TargetSpec& t);

bool hasHangingVariable(const Formula& f, const TargetSpec& t);

/// True when the literals can be ordered so that each one shares a variable
/// with some earlier literal. The True formula and single literals are chains.
bool isChain(const Formula& f);

/// A chain mentioning the target variable. True (the intercept) qualifies.
bool isTargetedChain(const Formula& f, const TargetSpec& t);

struct LiteralCounts {
  int binary = 0;
  int unary = 0;

  bool operator==(const LiteralCounts&) const = default;
};

LiteralCounts literalCounts(const Formula& f);

/// Renders `rated(u,m) * drama(m)`, `age(u)=young`, `True`. Boolean literals
/// with value true print without the `=true` suffix.
std::string toString(const Formula& f);
std::string toString(const Literal& lit);

/// Inverse of toString; needs the schema to resolve symbols and populations.
Formula parseFormula(std::string_view text, const Schema& schema);

}  // namespace rlr
