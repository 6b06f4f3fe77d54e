#include "rlr/database.hpp"

#include <algorithm>
#include <cmath>

#include "rlr/error.hpp"

namespace rlr {

int Population::find(std::string_view id) const {
  auto it = index.find(std::string(id));
  return it == index.end() ? -1 : it->second;
}

bool RelationTable::contains(int from, int to) const {
  const auto& row = forward[static_cast<std::size_t>(from)];
  return std::binary_search(row.begin(), row.end(), to);
}

const Population& RelationalDatabase::population(std::string_view name) const {
  auto it = populations_.find(name);
  if (it == populations_.end())
    throw ValidationError("unknown population '" + std::string(name) + "'");
  return *it->second;
}

const AttributeColumn& RelationalDatabase::attribute(std::string_view name) const {
  auto it = attributes_.find(name);
  if (it == attributes_.end())
    throw ValidationError("unknown attribute '" + std::string(name) + "'");
  return *it->second;
}

const RelationTable& RelationalDatabase::relation(std::string_view name) const {
  auto it = relations_.find(name);
  if (it == relations_.end()) throw ValidationError("unknown relation '" + std::string(name) + "'");
  return *it->second;
}

RelationalDatabase RelationalDatabase::withContinuousAttribute(const std::string& name,
                                                               const std::string& populationName,
                                                               std::vector<double> values) const {
  if (values.size() != populationSize(populationName))
    throw ValidationError("attribute '" + name + "' must have one value per individual");
  for (double v : values)
    if (!std::isfinite(v)) throw ValidationError("attribute '" + name + "' has a non-finite value");
  auto schema = std::make_shared<Schema>(*schema_);
  schema->addAttribute(continuousAttribute(name, populationName));
  RelationalDatabase out = *this;
  out.schema_ = std::move(schema);
  auto column = std::make_shared<AttributeColumn>();
  column->reals = std::move(values);
  out.attributes_[name] = std::move(column);
  return out;
}

DatabaseBuilder::DatabaseBuilder(Schema schema) : schema_(std::move(schema)) {}

void DatabaseBuilder::setIndividuals(const std::string& population, std::vector<std::string> ids) {
  if (!schema_.hasPopulation(population))
    throw ValidationError("unknown population '" + population + "'");
  individuals_[population] = std::move(ids);
}

void DatabaseBuilder::setCodes(const std::string& attribute, std::vector<int> codes) {
  const auto* decl = schema_.attribute(attribute);
  if (!decl) throw ValidationError("unknown attribute '" + attribute + "'");
  if (!decl->isDiscrete()) throw ValidationError("attribute '" + attribute + "' is continuous");
  attributes_[attribute].codes = std::move(codes);
}

void DatabaseBuilder::setReals(const std::string& attribute, std::vector<double> values) {
  const auto* decl = schema_.attribute(attribute);
  if (!decl) throw ValidationError("unknown attribute '" + attribute + "'");
  if (decl->isDiscrete()) throw ValidationError("attribute '" + attribute + "' is discrete");
  attributes_[attribute].reals = std::move(values);
}

void DatabaseBuilder::addTuple(const std::string& relation, int from, int to) {
  if (!schema_.relation(relation)) throw ValidationError("unknown relation '" + relation + "'");
  tuples_[relation].emplace_back(from, to);
}

RelationalDatabase DatabaseBuilder::build(const std::set<std::string>& mayHaveMissing) && {
  RelationalDatabase db;
  for (const auto& name : schema_.populations()) {
    auto pop = std::make_shared<Population>();
    pop->name = name;
    if (auto it = individuals_.find(name); it != individuals_.end())
      pop->individuals = std::move(it->second);
    for (std::size_t i = 0; i < pop->individuals.size(); ++i) {
      if (!pop->index.emplace(pop->individuals[i], static_cast<int>(i)).second)
        throw ValidationError("duplicate individual '" + pop->individuals[i] +
                              "' in population '" + name + "'");
    }
    db.populations_.emplace(name, std::move(pop));
  }

  for (const auto& decl : schema_.attributes()) {
    const auto n = db.populations_.at(decl.population)->size();
    AttributeColumn column;
    if (auto it = attributes_.find(decl.name); it != attributes_.end()) column = std::move(it->second);
    const bool partial = mayHaveMissing.count(decl.name) > 0;
    if (decl.isDiscrete()) {
      if (column.codes.empty() && partial) column.codes.assign(n, -1);
      if (column.codes.size() != n)
        throw ValidationError("attribute '" + decl.name + "' is not total over '" +
                              decl.population + "'");
      const int range = static_cast<int>(decl.values.size());
      for (int c : column.codes) {
        if (c >= range || c < -1 || (c == -1 && !partial))
          throw ValidationError("attribute '" + decl.name + "' has a missing or invalid value");
      }
    } else {
      if (column.reals.size() != n)
        throw ValidationError("attribute '" + decl.name + "' is not total over '" +
                              decl.population + "'");
      for (double v : column.reals)
        if (!std::isfinite(v))
          throw ValidationError("attribute '" + decl.name + "' has a non-finite value");
    }
    db.attributes_.emplace(decl.name, std::make_shared<AttributeColumn>(std::move(column)));
  }

  for (const auto& decl : schema_.relations()) {
    auto table = std::make_shared<RelationTable>();
    const auto nFrom = db.populations_.at(decl.from)->size();
    const auto nTo = db.populations_.at(decl.to)->size();
    table->forward.resize(nFrom);
    table->backward.resize(nTo);
    if (auto it = tuples_.find(decl.name); it != tuples_.end()) {
      auto& pairs = it->second;
      std::sort(pairs.begin(), pairs.end());
      pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
      for (auto [a, b] : pairs) {
        if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= nFrom ||
            static_cast<std::size_t>(b) >= nTo)
          throw ValidationError("relation '" + decl.name + "' references a missing individual");
        table->forward[a].push_back(b);
        table->backward[b].push_back(a);
      }
      table->size = pairs.size();
    }
    for (auto& row : table->backward) std::sort(row.begin(), row.end());
    db.relations_.emplace(decl.name, std::move(table));
  }

  db.schema_ = std::make_shared<const Schema>(std::move(schema_));
  return db;
}

}  // namespace rlr
