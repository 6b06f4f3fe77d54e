#pragma once

// Compiled formulae and grounding enumeration shared by the counting and
// hidden-feature code. Not installed.

#include <algorithm>
#include <string>
#include <vector>

#include "rlr/database.hpp"
#include "rlr/error.hpp"
#include "rlr/schema.hpp"

namespace rlr::detail {

// Formula resolved against a database: variables become slots, literals
// point straight at their storage.
struct CompiledLiteral {
  LiteralKind kind;
  const RelationTable* relation = nullptr;
  const AttributeColumn* column = nullptr;
  int code = -1;
  int a = -1;
  int b = -1;

  double value(const std::vector<int>& bound) const {
    switch (kind) {
      case LiteralKind::Binary:
        return relation->contains(bound[a], bound[b]) ? 1.0 : 0.0;
      case LiteralKind::UnaryEquality:
        return column->codes[static_cast<std::size_t>(bound[a])] == code ? 1.0 : 0.0;
      case LiteralKind::UnaryContinuous:
        return column->reals[static_cast<std::size_t>(bound[a])];
    }
    return 0.0;
  }
};

struct Compiled {
  std::vector<std::string> names;
  std::vector<int> sizes;
  std::vector<CompiledLiteral> literals;
  int target = -1;
};

inline Compiled compile(const Formula& f, const TargetSpec& t, const RelationalDatabase& db) {
  Compiled c;
  const auto& schema = db.schema();
  for (const auto& v : f.variables()) {
    if (!schema.hasPopulation(v.population))
      throw ValidationError("formula variable '" + v.name + "' has unknown population");
    if (v.name == t.variable) {
      if (v.population != t.population)
        throw ValidationError("target variable '" + v.name + "' bound to the wrong population");
      c.target = static_cast<int>(c.names.size());
    }
    c.names.push_back(v.name);
    c.sizes.push_back(static_cast<int>(db.populationSize(v.population)));
  }
  auto slot = [&](const std::string& name) {
    auto it = std::find(c.names.begin(), c.names.end(), name);
    return static_cast<int>(it - c.names.begin());
  };
  for (const auto& lit : f.literals()) {
    CompiledLiteral cl{lit.kind};
    if (lit.isBinary()) {
      if (!schema.relation(lit.symbol))
        throw ValidationError("formula references undeclared relation '" + lit.symbol + "'");
      cl.relation = &db.relation(lit.symbol);
      cl.b = slot(lit.second);
    } else {
      const auto* decl = schema.attribute(lit.symbol);
      if (!decl) throw ValidationError("formula references undeclared attribute '" + lit.symbol + "'");
      cl.column = &db.attribute(lit.symbol);
      if (lit.kind == LiteralKind::UnaryEquality) {
        cl.code = decl->valueIndex(lit.value);
        if (cl.code < 0) throw ValidationError("value '" + lit.value + "' not in range");
      }
    }
    cl.a = slot(lit.first);
    c.literals.push_back(cl);
  }
  return c;
}

// Backtracking enumeration of groundings. Variables are bound in an order
// where each one is, when possible, generated from the adjacency list of an
// already bound neighbour; literals are checked as soon as they are ground.
class Enumerator {
 public:
  Enumerator(const Compiled& c, std::vector<int> fixed) : c_(c), bound_(c.names.size(), -1) {
    const std::size_t n = c.names.size();
    std::vector<bool> placed(n, false);
    for (int v : fixed) {
      placed[static_cast<std::size_t>(v)] = true;
      order_.push_back({v, -1, false, {}});
    }
    while (order_.size() < n) {
      Step step{-1, -1, false, {}};
      for (std::size_t li = 0; li < c.literals.size() && step.var < 0; ++li) {
        const auto& lit = c.literals[li];
        if (lit.kind != LiteralKind::Binary || lit.a == lit.b) continue;
        if (placed[lit.a] && !placed[lit.b]) step = {lit.b, static_cast<int>(li), true, {}};
        else if (placed[lit.b] && !placed[lit.a]) step = {lit.a, static_cast<int>(li), false, {}};
      }
      if (step.var < 0) {
        for (std::size_t v = 0; v < n; ++v)
          if (!placed[v]) {
            step.var = static_cast<int>(v);
            break;
          }
      }
      placed[step.var] = true;
      order_.push_back(step);
    }
    // Attach each literal to the first position where all its variables are bound.
    std::vector<int> position(n);
    for (std::size_t p = 0; p < order_.size(); ++p) position[order_[p].var] = static_cast<int>(p);
    for (std::size_t li = 0; li < c.literals.size(); ++li) {
      const auto& lit = c.literals[li];
      int p = position[lit.a];
      if (lit.kind == LiteralKind::Binary) p = std::max(p, position[lit.b]);
      if (order_[p].generator == static_cast<int>(li)) continue;
      order_[p].checks.push_back(static_cast<int>(li));
    }
    firstFree_ = fixed.size();
  }

  double run(const std::vector<int>& fixedValues) {
    const double factor = bindFixed(fixedValues);
    if (factor == 0.0) return 0.0;
    return factor * descend(firstFree_);
  }

  /// Calls visit(bound, weight) for every grounding with nonzero weight;
  /// `bound` is indexed by variable slot.
  template <class Visit>
  void forEach(const std::vector<int>& fixedValues, Visit&& visit) {
    const double factor = bindFixed(fixedValues);
    if (factor != 0.0) walk(firstFree_, factor, visit);
  }

 private:
  struct Step {
    int var;
    int generator;  // binary literal producing candidates, or -1
    bool forward;   // generator's bound end is its first argument
    std::vector<int> checks;
  };

  double bindFixed(const std::vector<int>& fixedValues) {
    for (std::size_t i = 0; i < fixedValues.size(); ++i) bound_[order_[i].var] = fixedValues[i];
    double factor = 1.0;
    for (std::size_t i = 0; i < firstFree_ && factor != 0.0; ++i) factor *= checks(i);
    return factor;
  }

  template <class Fn>
  void candidates(std::size_t p, Fn&& fn) const {
    const auto& step = order_[p];
    if (step.generator >= 0) {
      const auto& lit = c_.literals[step.generator];
      const auto& rows = step.forward ? lit.relation->forward : lit.relation->backward;
      const int from = step.forward ? bound_[lit.a] : bound_[lit.b];
      for (int individual : rows[static_cast<std::size_t>(from)]) fn(individual);
    } else {
      for (int individual = 0; individual < c_.sizes[step.var]; ++individual) fn(individual);
    }
  }

  template <class Visit>
  void walk(std::size_t p, double weight, Visit& visit) {
    if (p == order_.size()) {
      visit(static_cast<const std::vector<int>&>(bound_), weight);
      return;
    }
    candidates(p, [&](int individual) {
      bound_[order_[p].var] = individual;
      const double v = checks(p);
      if (v != 0.0) walk(p + 1, weight * v, visit);
    });
  }

  double checks(std::size_t p) const {
    double v = 1.0;
    for (int li : order_[p].checks) {
      v *= c_.literals[li].value(bound_);
      if (v == 0.0) break;
    }
    return v;
  }

  double descend(std::size_t p) {
    if (p == order_.size()) return 1.0;
    double total = 0.0;
    candidates(p, [&](int individual) {
      bound_[order_[p].var] = individual;
      const double v = checks(p);
      if (v != 0.0) total += v * descend(p + 1);
    });
    return total;
  }

  const Compiled& c_;
  std::vector<int> bound_;
  std::vector<Step> order_;
  std::size_t firstFree_ = 0;
};

}  // namespace rlr::detail
