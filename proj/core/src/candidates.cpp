#include <algorithm>
#include <set>

#include "rlr/error.hpp"
#include "rlr/structure.hpp"

namespace rlr {

Literal UnaryTemplate::bind(const std::string& var) const {
  return value ? Literal::equals(attribute, var, *value) : Literal::continuous(attribute, var);
}

std::vector<UnaryTemplate> unaryVocabulary(const Schema& schema, const TargetSpec& t) {
  std::vector<UnaryTemplate> out;
  for (const auto& a : schema.attributes()) {
    if (a.name == t.attribute) continue;
    if (a.isDiscrete()) {
      for (const auto& v : a.values) out.push_back({a.name, a.population, v});
    } else {
      out.push_back({a.name, a.population, std::nullopt});
    }
  }
  return out;
}

std::string formulaKey(const Formula& f, const TargetSpec& t) { return toString(canonicalize(f, t)); }

void insertFormula(FormulaSet& set, const Formula& f, const TargetSpec& t) {
  auto c = canonicalize(f, t);
  auto key = toString(c);
  set.emplace(std::move(key), std::move(c));
}

Formula skeletonOf(const Formula& f) {
  std::vector<Literal> lits;
  std::set<std::string> names;
  for (const auto& l : f.literals()) {
    if (!l.isBinary()) continue;
    lits.push_back(l);
    names.insert(l.first);
    names.insert(l.second);
  }
  std::vector<LogicalVariable> vars;
  for (const auto& v : f.variables())
    if (names.count(v.name)) vars.push_back(v);
  return Formula::fromParts(std::move(lits), std::move(vars));
}

bool isAdmissible(const Formula& f, const TargetSpec& t) {
  if (f.isTrue()) return true;
  if (!isTargetedChain(f, t)) return false;
  for (const auto& [name, role] : classifyVariables(f, t)) {
    if (!role.hanging) continue;
    // A leaf joined straight to the target counts the target's neighbours.
    const bool besideTarget = std::all_of(f.literals().begin(), f.literals().end(), [&](const Literal& l) {
      return !l.mentions(name) || (l.isBinary() && l.mentions(t.variable));
    });
    if (!besideTarget) return false;
  }
  return true;
}

namespace {

std::string freshName(const Formula& f, int counter) {
  std::string name;
  do {
    name = "_v" + std::to_string(counter++);
  } while (f.hasVariable(name));
  return name;
}

Formula withLiteral(const Formula& base, Literal lit, const Schema& schema) {
  auto lits = base.literals();
  lits.push_back(std::move(lit));
  return Formula::make(std::move(lits), schema);
}

/// Calls visit(formula) for every choice of exactly `count` unary literals on
/// the variables of `skeleton` (the target alone when it is empty).
template <typename Visit>
void forEachUnaryChoice(const Formula& skeleton, const std::vector<UnaryTemplate>& vocab, int count,
                        const TargetSpec& t, const Schema& schema, Visit&& visit) {
  std::vector<std::pair<std::string, const UnaryTemplate*>> slots;
  std::vector<LogicalVariable> vars = skeleton.variables();
  if (vars.empty()) vars.push_back({t.variable, t.population});
  for (const auto& v : vars)
    for (const auto& u : vocab)
      if (u.population == v.population) slots.emplace_back(v.name, &u);
  if (count > static_cast<int>(slots.size())) return;

  std::vector<std::size_t> pick;
  auto recurse = [&](auto&& self, std::size_t start) -> void {
    if (static_cast<int>(pick.size()) == count) {
      auto lits = skeleton.literals();
      for (std::size_t i : pick) lits.push_back(slots[i].second->bind(slots[i].first));
      visit(Formula::make(std::move(lits), schema));
      return;
    }
    for (std::size_t i = start; i < slots.size(); ++i) {
      bool clash = false;
      for (std::size_t j : pick)
        if (slots[j].first == slots[i].first && slots[j].second->attribute == slots[i].second->attribute)
          clash = true;  // contradictory or duplicate literal on one variable
      if (clash) continue;
      pick.push_back(i);
      self(self, i + 1);
      pick.pop_back();
    }
  };
  recurse(recurse, 0);
}

void checkCap(std::size_t size, std::size_t cap) {
  if (size > cap)
    throw LimitError("candidate formula count exceeds the cap of " + std::to_string(cap) +
                     "; lower k or r, or raise structure.candidate_cap");
}

std::vector<Formula> sortedWithTrueFirst(FormulaSet set) {
  std::vector<Formula> out;
  out.push_back(Formula{});
  for (auto& [key, f] : set)
    if (!f.isTrue()) out.push_back(std::move(f));
  return out;
}

}  // namespace

std::vector<Formula> binarySkeletons(const Schema& schema, const TargetSpec& t, int k) {
  if (k < 0) throw ValidationError("k must be non-negative");
  validateTarget(t, schema);
  std::vector<FormulaSet> byLevel(1);
  byLevel[0].emplace(toString(Formula{}), Formula{});
  for (int b = 1; b <= k; ++b) {
    FormulaSet next;
    for (const auto& [key, base] : byLevel.back()) {
      std::vector<LogicalVariable> vars = base.variables();
      if (vars.empty()) vars.push_back({t.variable, t.population});
      const std::string fresh = freshName(base, 0);
      for (const auto& rel : schema.relations()) {
        std::vector<Literal> options;
        for (const auto& a : vars) {
          if (a.population == rel.from) options.push_back(Literal::binary(rel.name, a.name, fresh));
          if (a.population == rel.to) options.push_back(Literal::binary(rel.name, fresh, a.name));
          for (const auto& c : vars)
            if (a.name != c.name && a.population == rel.from && c.population == rel.to)
              options.push_back(Literal::binary(rel.name, a.name, c.name));
        }
        for (auto& lit : options) {
          if (std::find(base.literals().begin(), base.literals().end(), lit) != base.literals().end())
            continue;
          insertFormula(next, withLiteral(base, std::move(lit), schema), t);
        }
      }
    }
    byLevel.push_back(std::move(next));
  }
  std::vector<Formula> out;
  for (auto& level : byLevel)
    for (auto& [key, f] : level) out.push_back(std::move(f));
  return out;
}

std::vector<Formula> generateCandidates(const Schema& schema, const TargetSpec& t, int k, int r,
                                        std::size_t cap) {
  if (r < 0) throw ValidationError("r must be non-negative");
  const auto vocab = unaryVocabulary(schema, t);
  FormulaSet all;
  for (const auto& skeleton : binarySkeletons(schema, t, k)) {
    for (int j = 0; j <= r; ++j) {
      forEachUnaryChoice(skeleton, vocab, j, t, schema, [&](const Formula& f) {
        if (f.isTrue() || !isAdmissible(f, t)) return;
        insertFormula(all, f, t);
        checkCap(all.size() + 1, cap);
      });
    }
  }
  return sortedWithTrueFirst(std::move(all));
}

std::vector<Formula> subformulaFamily(const Formula& f, const TargetSpec& t) {
  std::vector<Literal> binary, unary;
  for (const auto& l : f.literals()) (l.isBinary() ? binary : unary).push_back(l);
  FormulaSet family;
  const std::size_t n = unary.size();
  if (n < 2) return {};
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
    std::vector<Literal> lits = binary;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::size_t{1} << i)) lits.push_back(unary[i]);
    std::set<std::string> names;
    for (const auto& l : lits) {
      names.insert(l.first);
      if (l.isBinary()) names.insert(l.second);
    }
    std::vector<LogicalVariable> vars;
    for (const auto& v : f.variables())
      if (names.count(v.name)) vars.push_back(v);
    insertFormula(family, Formula::fromParts(std::move(lits), std::move(vars)), t);
  }
  std::vector<Formula> out;
  for (auto& [key, g] : family) out.push_back(std::move(g));
  return out;
}

std::vector<Formula> expandHA(const FormulaSet& fitted, const FormulaSet& removed, int k, int r,
                              const Schema& schema, const TargetSpec& t, std::size_t cap) {
  if (r < 1) throw ValidationError("expansion level must be at least 1");
  std::map<std::string, bool> skeletonAlive;  // absent: never fitted
  for (const auto& [key, f] : fitted) {
    const auto skey = formulaKey(skeletonOf(f), t);
    const bool alive = !removed.count(key);
    auto [it, inserted] = skeletonAlive.emplace(skey, alive);
    if (!inserted) it->second = it->second || alive;
  }
  const auto vocab = unaryVocabulary(schema, t);
  FormulaSet out;
  for (const auto& skeleton : binarySkeletons(schema, t, k)) {
    auto it = skeletonAlive.find(formulaKey(skeleton, t));
    if (it != skeletonAlive.end() && !it->second) continue;
    forEachUnaryChoice(skeleton, vocab, r, t, schema, [&](const Formula& f) {
      if (!isAdmissible(f, t)) return;
      auto c = canonicalize(f, t);
      auto key = toString(c);
      if (removed.count(key) || fitted.count(key) || out.count(key)) return;
      for (const auto& g : subformulaFamily(c, t))
        if (removed.count(toString(g))) return;
      out.emplace(std::move(key), std::move(c));
      checkCap(out.size(), cap);
    });
  }
  std::vector<Formula> result;
  for (auto& [key, f] : out) result.push_back(std::move(f));
  return result;
}

}  // namespace rlr
