#include "rlr/schema.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

#include "rlr/error.hpp"

namespace rlr {

int AttributeDecl::valueIndex(std::string_view value) const {
  auto it = std::find(values.begin(), values.end(), value);
  return it == values.end() ? -1 : static_cast<int>(it - values.begin());
}

AttributeDecl booleanAttribute(std::string name, std::string population) {
  return {std::move(name), std::move(population), RangeKind::Boolean, {"false", "true"}};
}

AttributeDecl categoricalAttribute(std::string name, std::string population,
                                   std::vector<std::string> values) {
  return {std::move(name), std::move(population), RangeKind::Categorical, std::move(values)};
}

AttributeDecl continuousAttribute(std::string name, std::string population) {
  return {std::move(name), std::move(population), RangeKind::Continuous, {}};
}

void Schema::addPopulation(const std::string& name) {
  if (name.empty()) throw ValidationError("population name must be nonempty");
  if (hasPopulation(name)) throw ValidationError("duplicate population '" + name + "'");
  populations_.push_back(name);
}

void Schema::checkFreshSymbol(const std::string& name) const {
  if (name.empty()) throw ValidationError("symbol name must be nonempty");
  if (attributeIndex_.count(name) || relationIndex_.count(name))
    throw ValidationError("duplicate declaration '" + name + "'");
}

void Schema::addAttribute(AttributeDecl decl) {
  checkFreshSymbol(decl.name);
  if (!hasPopulation(decl.population))
    throw ValidationError("attribute '" + decl.name + "' references unknown population '" +
                          decl.population + "'");
  if (decl.kind == RangeKind::Boolean) decl.values = {"false", "true"};
  if (decl.kind == RangeKind::Categorical) {
    std::set<std::string> distinct(decl.values.begin(), decl.values.end());
    if (distinct.size() != decl.values.size())
      throw ValidationError("attribute '" + decl.name + "' has repeated values");
    if (decl.values.size() < 2)
      throw ValidationError("categorical attribute '" + decl.name + "' needs at least 2 values");
  }
  if (decl.kind == RangeKind::Continuous) decl.values.clear();
  attributeIndex_.emplace(decl.name, attributes_.size());
  attributes_.push_back(std::move(decl));
}

void Schema::addRelation(RelationDecl decl) {
  checkFreshSymbol(decl.name);
  if (!hasPopulation(decl.from) || !hasPopulation(decl.to))
    throw ValidationError("relation '" + decl.name + "' references an unknown population");
  relationIndex_.emplace(decl.name, relations_.size());
  relations_.push_back(std::move(decl));
}

bool Schema::hasPopulation(std::string_view name) const {
  return std::find(populations_.begin(), populations_.end(), name) != populations_.end();
}

const AttributeDecl* Schema::attribute(std::string_view name) const {
  auto it = attributeIndex_.find(std::string(name));
  return it == attributeIndex_.end() ? nullptr : &attributes_[it->second];
}

const RelationDecl* Schema::relation(std::string_view name) const {
  auto it = relationIndex_.find(std::string(name));
  return it == relationIndex_.end() ? nullptr : &relations_[it->second];
}

Literal Literal::binary(std::string relation, std::string from, std::string to) {
  return {LiteralKind::Binary, std::move(relation), {}, std::move(from), std::move(to)};
}

Literal Literal::equals(std::string attribute, std::string var, std::string value) {
  return {LiteralKind::UnaryEquality, std::move(attribute), std::move(value), std::move(var), {}};
}

Literal Literal::continuous(std::string attribute, std::string var) {
  return {LiteralKind::UnaryContinuous, std::move(attribute), {}, std::move(var), {}};
}

namespace {

void bindVariable(std::map<std::string, std::string>& pops, const std::string& var,
                  const std::string& population) {
  if (var.empty()) throw ValidationError("empty logical variable name");
  auto [it, inserted] = pops.emplace(var, population);
  if (!inserted && it->second != population)
    throw ValidationError("logical variable '" + var + "' used for populations '" + it->second +
                          "' and '" + population + "'");
}

}  // namespace

Formula Formula::make(std::vector<Literal> literals, const Schema& schema) {
  std::map<std::string, std::string> pops;
  for (const auto& lit : literals) {
    if (lit.isBinary()) {
      const auto* rel = schema.relation(lit.symbol);
      if (!rel) throw ValidationError("undeclared relation '" + lit.symbol + "'");
      bindVariable(pops, lit.first, rel->from);
      bindVariable(pops, lit.second, rel->to);
      continue;
    }
    const auto* attr = schema.attribute(lit.symbol);
    if (!attr) throw ValidationError("undeclared attribute '" + lit.symbol + "'");
    if (!lit.second.empty()) throw ValidationError("unary literal with two arguments");
    if (lit.kind == LiteralKind::UnaryContinuous && attr->isDiscrete())
      throw ValidationError("attribute '" + lit.symbol + "' is discrete and needs a value");
    if (lit.kind == LiteralKind::UnaryEquality) {
      if (!attr->isDiscrete())
        throw ValidationError("continuous attribute '" + lit.symbol + "' cannot take a value");
      if (attr->valueIndex(lit.value) < 0)
        throw ValidationError("value '" + lit.value + "' not in range of '" + lit.symbol + "'");
    }
    bindVariable(pops, lit.first, attr->population);
  }
  std::vector<LogicalVariable> vars;
  vars.reserve(pops.size());
  for (auto& [name, pop] : pops) vars.push_back({name, pop});
  return fromParts(std::move(literals), std::move(vars));
}

Formula Formula::fromParts(std::vector<Literal> literals, std::vector<LogicalVariable> variables) {
  Formula f;
  f.literals_ = std::move(literals);
  f.variables_ = std::move(variables);
  std::sort(f.variables_.begin(), f.variables_.end());
  return f;
}

bool Formula::hasVariable(std::string_view name) const {
  return std::any_of(variables_.begin(), variables_.end(),
                     [&](const LogicalVariable& v) { return v.name == name; });
}

const std::string& Formula::populationOf(std::string_view name) const {
  for (const auto& v : variables_)
    if (v.name == name) return v.population;
  throw ValidationError("formula has no variable '" + std::string(name) + "'");
}

void validateTarget(const TargetSpec& target, const Schema& schema) {
  const auto* attr = schema.attribute(target.attribute);
  if (!attr) throw ValidationError("unknown target attribute '" + target.attribute + "'");
  if (!attr->isDiscrete())
    throw ValidationError("target attribute '" + target.attribute + "' must be discrete");
  if (attr->population != target.population)
    throw ValidationError("target population mismatch for '" + target.attribute + "'");
  if (target.variable.empty()) throw ValidationError("target variable name is empty");
  if (attr->valueIndex(target.positiveClass) < 0)
    throw ValidationError("positive class '" + target.positiveClass + "' not in range of '" +
                          target.attribute + "'");
}

namespace {

using Renaming = std::map<std::string, std::string>;

std::vector<Literal> renamed(const std::vector<Literal>& lits, const Renaming& names) {
  std::vector<Literal> out = lits;
  auto apply = [&](std::string& var) {
    if (var.empty()) return;
    if (auto it = names.find(var); it != names.end()) var = it->second;
  };
  for (auto& lit : out) {
    apply(lit.first);
    apply(lit.second);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Canonical names are handed out per population in sorted population order,
// using the population's initial as prefix and a counter shared by prefix.
std::map<std::string, std::vector<std::string>> canonicalNames(
    const std::map<std::string, std::vector<std::string>>& byPopulation,
    std::string_view targetVariable) {
  std::map<std::string, std::vector<std::string>> names;
  std::map<char, int> counters;
  for (const auto& [pop, vars] : byPopulation) {
    char prefix = 'v';
    for (char c : pop) {
      if (std::isalpha(static_cast<unsigned char>(c))) {
        prefix = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        break;
      }
    }
    auto& out = names[pop];
    while (out.size() < vars.size()) {
      std::string candidate = prefix + std::to_string(++counters[prefix]);
      if (candidate != targetVariable) out.push_back(std::move(candidate));
    }
  }
  return names;
}

constexpr std::size_t kExactRenamingLimit = 40320;

}  // namespace

Formula canonicalize(const Formula& f, std::string_view targetVariable) {
  std::vector<Literal> base = f.literals();
  std::sort(base.begin(), base.end());
  base.erase(std::unique(base.begin(), base.end()), base.end());

  std::map<std::string, std::vector<std::string>> byPopulation;
  for (const auto& v : f.variables())
    if (v.name != targetVariable) byPopulation[v.population].push_back(v.name);
  const auto names = canonicalNames(byPopulation, targetVariable);

  std::size_t permutations = 1;
  for (const auto& [pop, vars] : byPopulation) {
    for (std::size_t i = 2; i <= vars.size() && permutations <= kExactRenamingLimit; ++i)
      permutations *= i;
  }

  std::vector<Literal> best;
  bool haveBest = false;

  if (permutations <= kExactRenamingLimit) {
    // Minimum over every population-respecting bijection onto canonical names.
    std::vector<std::pair<std::string, std::vector<std::string>>> groups(byPopulation.begin(),
                                                                         byPopulation.end());
    for (auto& g : groups) std::sort(g.second.begin(), g.second.end());
    Renaming mapping;
    auto recurse = [&](auto&& self, std::size_t g) -> void {
      if (g == groups.size()) {
        auto candidate = renamed(base, mapping);
        if (!haveBest || candidate < best) {
          best = std::move(candidate);
          haveBest = true;
        }
        return;
      }
      auto vars = groups[g].second;
      const auto& targets = names.at(groups[g].first);
      do {
        for (std::size_t i = 0; i < vars.size(); ++i) mapping[vars[i]] = targets[i];
        self(self, g + 1);
      } while (std::next_permutation(vars.begin(), vars.end()));
    };
    recurse(recurse, 0);
  } else {
    // Sort, rename by first appearance, re-sort; repeat until stable.
    std::vector<Literal> current = base;
    for (int round = 0; round < 64; ++round) {
      Renaming mapping;
      std::map<std::string, std::size_t> used;
      for (const auto& lit : current) {
        for (const std::string* var : {&lit.first, &lit.second}) {
          if (var->empty() || *var == targetVariable || mapping.count(*var)) continue;
          const auto& pop = f.populationOf(*var);
          mapping[*var] = names.at(pop)[used[pop]++];
        }
      }
      auto next = renamed(current, mapping);
      if (next == current) break;
      current = std::move(next);
    }
    best = std::move(current);
  }

  std::vector<LogicalVariable> vars;
  std::set<std::string> seen;
  for (const auto& lit : best) {
    for (const std::string* var : {&lit.first, &lit.second}) {
      if (var->empty() || !seen.insert(*var).second) continue;
      std::string pop;
      if (*var == targetVariable) {
        pop = f.populationOf(*var);
      } else {
        for (const auto& [p, ns] : names)
          if (std::find(ns.begin(), ns.end(), *var) != ns.end()) pop = p;
      }
      vars.push_back({*var, pop});
    }
  }
  return Formula::fromParts(std::move(best), std::move(vars));
}

std::map<std::string, RoleSet> classifyVariables(const Formula& f, const TargetSpec& t) {
  std::map<std::string, RoleSet> roles;
  for (const auto& v : f.variables()) {
    RoleSet r;
    r.target = v.name == t.variable;
    int binaryMentions = 0;
    for (const auto& lit : f.literals()) {
      if (!lit.mentions(v.name)) continue;
      if (lit.isBinary()) {
        ++binaryMentions;
        if (lit.first == lit.second) r.attributed = true;
      } else {
        r.attributed = true;
      }
    }
    r.connector = binaryMentions >= 2;
    r.hanging = !(r.target || r.connector || r.attributed);
    roles.emplace(v.name, r);
  }
  return roles;
}

bool hasHangingVariable(const Formula& f, const TargetSpec& t) {
  auto roles = classifyVariables(f, t);
  return std::any_of(roles.begin(), roles.end(), [](const auto& kv) { return kv.second.hanging; });
}

bool isChain(const Formula& f) {
  const auto& lits = f.literals();
  if (lits.empty()) return true;
  std::vector<bool> placed(lits.size(), false);
  std::set<std::string> covered;
  auto place = [&](std::size_t i) {
    placed[i] = true;
    covered.insert(lits[i].first);
    if (!lits[i].second.empty()) covered.insert(lits[i].second);
  };
  place(0);
  std::size_t count = 1;
  for (bool progress = true; progress && count < lits.size();) {
    progress = false;
    for (std::size_t i = 0; i < lits.size(); ++i) {
      if (placed[i]) continue;
      if (covered.count(lits[i].first) || (!lits[i].second.empty() && covered.count(lits[i].second))) {
        place(i);
        ++count;
        progress = true;
      }
    }
  }
  return count == lits.size();
}

bool isTargetedChain(const Formula& f, const TargetSpec& t) {
  if (f.isTrue()) return true;
  return f.hasVariable(t.variable) && isChain(f);
}

LiteralCounts literalCounts(const Formula& f) {
  LiteralCounts c;
  for (const auto& lit : f.literals()) (lit.isBinary() ? c.binary : c.unary)++;
  return c;
}

}  // namespace rlr
