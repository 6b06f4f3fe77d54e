#include "rlr/grounding.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "grounding_internal.hpp"
#include "parallel.hpp"
#include "rlr/csv.hpp"
#include "rlr/error.hpp"

namespace rlr {

double evaluateFormula(const Formula& f, const Assignment& assignment, const RelationalDatabase& db) {
  auto lookup = [&](const std::string& var) {
    auto it = assignment.find(var);
    if (it == assignment.end())
      throw std::invalid_argument("evaluateFormula: variable '" + var + "' is unassigned");
    return it->second;
  };
  double value = 1.0;
  for (const auto& lit : f.literals()) {
    switch (lit.kind) {
      case LiteralKind::Binary:
        if (!db.relation(lit.symbol).contains(lookup(lit.first), lookup(lit.second))) return 0.0;
        break;
      case LiteralKind::UnaryEquality: {
        const auto* decl = db.schema().attribute(lit.symbol);
        const int code = db.attribute(lit.symbol).codes[static_cast<std::size_t>(lookup(lit.first))];
        if (code < 0 || decl->values[static_cast<std::size_t>(code)] != lit.value) return 0.0;
        break;
      }
      case LiteralKind::UnaryContinuous:
        value *= db.attribute(lit.symbol).reals[static_cast<std::size_t>(lookup(lit.first))];
        break;
    }
  }
  return value;
}

namespace {

using detail::Compiled;
using detail::Enumerator;
using detail::compile;

// Message passing over a forest of variables. Parallel binary literals
// between the same pair of variables are merged into one edge.
struct Edge {
  int u;
  int v;
  std::vector<int> literals;
};

std::optional<std::vector<Edge>> forestEdges(const Compiled& c) {
  std::vector<Edge> edges;
  for (std::size_t li = 0; li < c.literals.size(); ++li) {
    const auto& lit = c.literals[li];
    if (lit.kind != LiteralKind::Binary) continue;
    if (lit.a == lit.b) return std::nullopt;
    auto it = std::find_if(edges.begin(), edges.end(), [&](const Edge& e) {
      return (e.u == lit.a && e.v == lit.b) || (e.u == lit.b && e.v == lit.a);
    });
    if (it == edges.end()) edges.push_back({lit.a, lit.b, {static_cast<int>(li)}});
    else it->literals.push_back(static_cast<int>(li));
  }
  // Union-find cycle check.
  std::vector<int> parent(c.names.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> root = [&](int x) { return parent[x] == x ? x : parent[x] = root(parent[x]); };
  for (const auto& e : edges) {
    const int ru = root(e.u), rv = root(e.v);
    if (ru == rv) return std::nullopt;
    parent[ru] = rv;
  }
  return edges;
}

class TreeCounter {
 public:
  TreeCounter(const Compiled& c, std::vector<Edge> edges) : c_(c), edges_(std::move(edges)) {
    adjacency_.resize(c.names.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      adjacency_[edges_[e].u].push_back(static_cast<int>(e));
      adjacency_[edges_[e].v].push_back(static_cast<int>(e));
    }
  }

  /// Vector over the population of `root`: count with root fixed per entry,
  /// restricted to root's connected component.
  std::vector<double> rootVector(int root, std::vector<bool>& visited) const {
    return subtree(root, -1, visited);
  }

 private:
  std::vector<double> subtree(int var, int parentEdge, std::vector<bool>& visited) const {
    visited[var] = true;
    std::vector<double> vec(static_cast<std::size_t>(c_.sizes[var]), 1.0);
    std::vector<int> bound(c_.names.size(), -1);
    for (const auto& lit : c_.literals) {
      if (lit.kind == LiteralKind::Binary || lit.a != var) continue;
      for (int x = 0; x < c_.sizes[var]; ++x) {
        if (vec[x] == 0.0) continue;
        bound[var] = x;
        vec[x] *= lit.value(bound);
      }
    }
    for (int e : adjacency_[var]) {
      if (e == parentEdge) continue;
      const Edge& edge = edges_[e];
      const int child = edge.u == var ? edge.v : edge.u;
      const auto childVec = subtree(child, e, visited);
      for (int x = 0; x < c_.sizes[var]; ++x) {
        if (vec[x] == 0.0) continue;
        vec[x] *= message(edge, var, child, x, childVec);
      }
    }
    return vec;
  }

  // Sum of childVec over individuals y related to x by every literal of the edge.
  double message(const Edge& edge, int var, int child, int x, const std::vector<double>& childVec) const {
    const auto& first = c_.literals[edge.literals.front()];
    const bool varIsFrom = first.a == var;
    const auto& rows = varIsFrom ? first.relation->forward : first.relation->backward;
    double sum = 0.0;
    for (int y : rows[static_cast<std::size_t>(x)]) {
      bool all = true;
      for (std::size_t k = 1; k < edge.literals.size() && all; ++k) {
        const auto& lit = c_.literals[edge.literals[k]];
        all = lit.a == var ? lit.relation->contains(x, y) : lit.relation->contains(y, x);
      }
      if (all) sum += childVec[static_cast<std::size_t>(y)];
    }
    (void)child;
    return sum;
  }

  const Compiled& c_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
};

}  // namespace

double countFormula(const Formula& f, const TargetSpec& t, int individual,
                    const RelationalDatabase& db) {
  if (f.isTrue()) return 1.0;
  const Compiled c = compile(f, t, db);
  std::vector<int> fixed;
  std::vector<int> values;
  if (c.target >= 0) {
    fixed.push_back(c.target);
    values.push_back(individual);
  }
  Enumerator e(c, fixed);
  return e.run(values);
}

std::vector<double> countColumn(const Formula& f, const TargetSpec& t, const RelationalDatabase& db) {
  const std::size_t n = db.populationSize(t.population);
  if (f.isTrue()) return std::vector<double>(n, 1.0);
  const Compiled c = compile(f, t, db);

  if (auto edges = forestEdges(c)) {
    TreeCounter counter(c, std::move(*edges));
    std::vector<bool> visited(c.names.size(), false);
    std::vector<double> column(n, 1.0);
    if (c.target >= 0) column = counter.rootVector(c.target, visited);
    // Components without the target contribute a constant factor.
    for (std::size_t v = 0; v < c.names.size(); ++v) {
      if (visited[v]) continue;
      const auto vec = counter.rootVector(static_cast<int>(v), visited);
      const double total = std::accumulate(vec.begin(), vec.end(), 0.0);
      for (auto& x : column) x *= total;
    }
    return column;
  }

  std::vector<double> column(n, 0.0);
  if (c.target < 0) {
    Enumerator e(c, {});
    std::fill(column.begin(), column.end(), e.run({}));
    return column;
  }
  Enumerator e(c, {c.target});
  for (std::size_t i = 0; i < n; ++i) column[i] = e.run({static_cast<int>(i)});
  return column;
}

std::optional<int> labelOf(const TargetSpec& t, const RelationalDatabase& db, int individual) {
  const auto* decl = db.schema().attribute(t.attribute);
  if (!decl) throw ValidationError("unknown target attribute '" + t.attribute + "'");
  const int code = db.attribute(t.attribute).codes[static_cast<std::size_t>(individual)];
  if (code < 0) return std::nullopt;
  return decl->values[static_cast<std::size_t>(code)] == t.positiveClass ? 1 : 0;
}

std::vector<int> labelledIndividuals(const TargetSpec& t, const RelationalDatabase& db) {
  std::vector<int> out;
  const int n = static_cast<int>(db.populationSize(t.population));
  for (int i = 0; i < n; ++i)
    if (labelOf(t, db, i)) out.push_back(i);
  return out;
}

FeatureCache::FeatureCache(const RelationalDatabase& db, TargetSpec target)
    : db_(&db), target_(std::move(target)) {}

std::shared_ptr<const std::vector<double>> FeatureCache::column(const Formula& f) {
  const std::string key = toString(canonicalize(f, target_));
  {
    std::lock_guard lock(mutex_);
    if (auto it = columns_.find(key); it != columns_.end()) return it->second;
  }
  auto computed = std::make_shared<const std::vector<double>>(countColumn(f, target_, *db_));
  std::lock_guard lock(mutex_);
  return columns_.emplace(key, std::move(computed)).first->second;
}

DesignMatrix buildDesignMatrix(std::span<const Formula> formulas, const TargetSpec& t,
                               const RelationalDatabase& db, const DesignOptions& options) {
  validateTarget(t, db.schema());
  DesignMatrix dm;
  dm.columns.push_back(Formula{});
  for (const auto& f : formulas)
    if (!f.isTrue()) dm.columns.push_back(f);

  if (options.rows) {
    for (int r : *options.rows) {
      if (r < 0 || static_cast<std::size_t>(r) >= db.populationSize(t.population))
        throw ValidationError("design matrix row outside the target population");
      if (!options.labelled || labelOf(t, db, r)) dm.rowKeys.push_back(r);
    }
  } else if (options.labelled) {
    dm.rowKeys = labelledIndividuals(t, db);
  } else {
    dm.rowKeys.resize(db.populationSize(t.population));
    std::iota(dm.rowKeys.begin(), dm.rowKeys.end(), 0);
  }

  const auto rows = static_cast<Eigen::Index>(dm.rowKeys.size());
  const auto cols = static_cast<Eigen::Index>(dm.columns.size());
  dm.features.resize(rows, cols);
  dm.features.col(0).setOnes();
  detail::parallelFor(dm.columns.size() - 1, [&](std::size_t j) {
    const auto& f = dm.columns[j + 1];
    std::shared_ptr<const std::vector<double>> column;
    if (options.cache && &options.cache->database() == &db)
      column = options.cache->column(f);
    else
      column = std::make_shared<const std::vector<double>>(countColumn(f, t, db));
    for (Eigen::Index i = 0; i < rows; ++i)
      dm.features(i, static_cast<Eigen::Index>(j + 1)) = (*column)[static_cast<std::size_t>(dm.rowKeys[i])];
  });

  if (options.labelled) {
    dm.labels.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) dm.labels(i) = *labelOf(t, db, dm.rowKeys[i]);
  }
  return dm;
}

void writeDesignMatrixCsv(const DesignMatrix& dm, std::ostream& out) {
  const auto precision = out.precision(17);
  for (std::size_t j = 0; j < dm.columns.size(); ++j) {
    if (j) out << ',';
    out << csvEscape(toString(dm.columns[j]));
  }
  if (dm.hasLabels()) out << ",label";
  out << '\n';
  for (Eigen::Index i = 0; i < dm.rows(); ++i) {
    for (Eigen::Index j = 0; j < dm.cols(); ++j) {
      if (j) out << ',';
      out << dm.features(i, j);
    }
    if (dm.hasLabels()) out << ',' << static_cast<int>(dm.labels(i));
    out << '\n';
  }
  out.precision(precision);
}

}  // namespace rlr
