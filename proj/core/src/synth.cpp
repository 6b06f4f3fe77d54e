#include "rlr/synth.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "rlr/error.hpp"
#include "rlr/grounding.hpp"
#include "rlr/random.hpp"
#include "rlr/solver.hpp"

namespace rlr {

SynthSpec kindFriendsSpec(std::size_t people, std::uint64_t seed) {
  SynthSpec s;
  s.populations = {{"person", people}};
  s.attributes = {{booleanAttribute("kind", "person"), 0.5}, {booleanAttribute("happy", "person"), 0.5}};
  s.relations = {{{"friend", "person", "person"}, 0.018}};
  s.target = {"happy", "person", "z", "true"};
  s.formulas = {{"True", -4.5}, {"friend(z,y) * kind(y)", 1.0}};
  s.seed = seed;
  return s;
}

namespace {

struct Drawn {
  std::map<std::string, std::vector<std::string>> ids;
  std::map<std::string, std::vector<int>> codes;
  std::map<std::string, std::vector<double>> reals;
  std::map<std::string, std::vector<std::pair<int, int>>> tuples;
};

RelationalDatabase assemble(const SynthSpec& spec, const Drawn& d, const std::vector<int>& labels,
                            bool includeUnobserved) {
  Schema schema;
  auto hidden = [&](const std::string& name) {
    return !includeUnobserved &&
           std::find(spec.unobserved.begin(), spec.unobserved.end(), name) != spec.unobserved.end();
  };
  for (const auto& p : spec.populations) schema.addPopulation(p.name);
  for (const auto& a : spec.attributes)
    if (!hidden(a.decl.name)) schema.addAttribute(a.decl);
  for (const auto& r : spec.relations) schema.addRelation(r.decl);
  DatabaseBuilder b(schema);
  for (const auto& [pop, ids] : d.ids) b.setIndividuals(pop, ids);
  for (const auto& a : spec.attributes) {
    if (hidden(a.decl.name)) continue;
    if (a.decl.name == spec.target.attribute)
      b.setCodes(a.decl.name, labels);
    else if (a.decl.isDiscrete())
      b.setCodes(a.decl.name, d.codes.at(a.decl.name));
    else
      b.setReals(a.decl.name, d.reals.at(a.decl.name));
  }
  for (const auto& [rel, tuples] : d.tuples)
    for (const auto& [i, j] : tuples) b.addTuple(rel, i, j);
  return std::move(b).build({spec.target.attribute});
}

}  // namespace

SyntheticData generateSynthetic(const SynthSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Drawn d;
  std::map<std::string, std::size_t> sizes;
  for (const auto& p : spec.populations) {
    sizes[p.name] = p.size;
    auto& ids = d.ids[p.name];
    for (std::size_t i = 0; i < p.size; ++i) ids.push_back(p.name + std::to_string(i));
  }
  const AttributeDecl* targetDecl = nullptr;
  for (const auto& a : spec.attributes) {
    if (!sizes.count(a.decl.population))
      throw ValidationError("synthetic attribute '" + a.decl.name + "' has an unknown population");
    const std::size_t n = sizes[a.decl.population];
    if (a.decl.name == spec.target.attribute) {
      targetDecl = &a.decl;
      continue;
    }
    if (a.decl.kind == RangeKind::Boolean) {
      auto& c = d.codes[a.decl.name];
      for (std::size_t i = 0; i < n; ++i) c.push_back(unit(rng) < a.probability ? 1 : 0);
    } else if (a.decl.kind == RangeKind::Categorical) {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(a.decl.values.size()) - 1);
      auto& c = d.codes[a.decl.name];
      for (std::size_t i = 0; i < n; ++i) c.push_back(pick(rng));
    } else {
      auto& r = d.reals[a.decl.name];
      for (std::size_t i = 0; i < n; ++i) r.push_back((2.0 * unit(rng) - 1.0) * a.probability);
    }
  }
  if (!targetDecl) throw ValidationError("synthetic target attribute must be declared among the attributes");
  if (targetDecl->values.size() != 2) throw ValidationError("synthetic target must have exactly two values");
  const int positive = targetDecl->valueIndex(spec.target.positiveClass);
  if (positive < 0) throw ValidationError("synthetic positive class is not in the target range");

  for (const auto& r : spec.relations) {
    if (!sizes.count(r.decl.from) || !sizes.count(r.decl.to))
      throw ValidationError("synthetic relation '" + r.decl.name + "' has an unknown population");
    auto& tuples = d.tuples[r.decl.name];
    const bool same = r.decl.from == r.decl.to;
    for (std::size_t i = 0; i < sizes[r.decl.from]; ++i)
      for (std::size_t j = 0; j < sizes[r.decl.to]; ++j) {
        if (same && i == j) continue;
        if (unit(rng) < r.density) tuples.emplace_back(static_cast<int>(i), static_cast<int>(j));
      }
  }

  const std::size_t n = sizes.at(spec.target.population);
  std::vector<int> missing(n, -1);
  const auto unlabeled = assemble(spec, d, missing, true);
  std::vector<double> score(n, 0.0);
  for (const auto& wf : spec.formulas) {
    const auto f = parseFormula(wf.formula, unlabeled.schema());
    for (const auto& l : f.literals())
      if (l.symbol == spec.target.attribute)
        throw ValidationError("generative formula '" + wf.formula + "' mentions the target attribute");
    const auto column = countColumn(f, spec.target, unlabeled);
    for (std::size_t i = 0; i < n; ++i) score[i] += wf.weight * column[i];
  }
  SyntheticData out{unlabeled, unlabeled, spec.target, std::vector<double>(n)};
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.probabilities[i] = sigmoid(score[i]);
    labels[i] = unit(rng) < out.probabilities[i] ? positive : 1 - positive;
  }
  out.full = assemble(spec, d, labels, true);
  out.db = assemble(spec, d, labels, false);
  return out;
}

const std::set<std::string, std::less<>>& synthConfigKeys() {
  static const std::set<std::string, std::less<>> keys{
      "synth.preset", "synth.size",   "synth.population", "synth.attribute",
      "synth.relation", "synth.target", "synth.wf",         "synth.unobserved",
  };
  return keys;
}

namespace {

std::vector<std::string> words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

SynthSpec synthFromConfig(const ConfigFile& file, std::uint64_t seed) {
  if (auto preset = file.get("synth.preset")) {
    if (*preset != "kind-friends")
      throw ValidationError(file.where("synth.preset") + ": unknown preset '" + *preset + "'");
    std::size_t size = 500;
    if (auto v = file.get("synth.size"))
      size = static_cast<std::size_t>(parseSeed(*v, file.where("synth.size") + ": synth.size"));
    return kindFriendsSpec(size, seed);
  }
  SynthSpec s;
  s.seed = seed;
  for (const auto& e : file.entries()) {
    const std::string where = file.source() + ":" + std::to_string(e.line);
    const auto w = words(e.value);
    if (e.key == "synth.population") {
      if (w.size() != 2) throw ValidationError(where + ": expected 'name size'");
      s.populations.push_back({w[0], static_cast<std::size_t>(parseSeed(w[1], where))});
    } else if (e.key == "synth.attribute") {
      if (w.size() < 3) throw ValidationError(where + ": expected 'name population range [parameter]'");
      SynthSpec::AttributeSpec a;
      if (w[2] == "boolean") {
        a.decl = booleanAttribute(w[0], w[1]);
        if (w.size() > 3) a.probability = parseDouble(w[3], where);
      } else if (w[2] == "categorical") {
        if (w.size() != 4) throw ValidationError(where + ": categorical attributes need a value list");
        std::vector<std::string> values;
        std::istringstream in(w[3]);
        for (std::string v; std::getline(in, v, ',');)
          if (!v.empty()) values.push_back(v);
        a.decl = categoricalAttribute(w[0], w[1], std::move(values));
      } else if (w[2] == "continuous") {
        a.decl = continuousAttribute(w[0], w[1]);
        a.probability = w.size() > 3 ? parseDouble(w[3], where) : 1.0;
      } else {
        throw ValidationError(where + ": unknown range '" + w[2] + "'");
      }
      s.attributes.push_back(std::move(a));
    } else if (e.key == "synth.relation") {
      if (w.size() != 4) throw ValidationError(where + ": expected 'name from to density'");
      s.relations.push_back({{w[0], w[1], w[2]}, parseDouble(w[3], where)});
    } else if (e.key == "synth.target") {
      if (w.size() != 4) throw ValidationError(where + ": expected 'attribute population variable positive'");
      s.target = {w[0], w[1], w[2], w[3]};
    } else if (e.key == "synth.wf") {
      const auto space = e.value.find_first_of(" \t");
      if (space == std::string::npos) throw ValidationError(where + ": expected 'weight formula'");
      s.formulas.push_back({e.value.substr(space + 1), parseDouble(e.value.substr(0, space), where)});
    } else if (e.key == "synth.unobserved") {
      for (const auto& name : w) s.unobserved.push_back(name);
    }
  }
  if (s.populations.empty()) throw ValidationError(file.source() + ": synthetic spec declares no population");
  if (s.target.attribute.empty()) throw ValidationError(file.source() + ": synthetic spec needs synth.target");
  return s;
}

}  // namespace rlr
