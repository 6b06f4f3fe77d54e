#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rlr/schema.hpp"

namespace rlr {

struct Population {
  std::string name;
  std::vector<std::string> individuals;
  std::unordered_map<std::string, int> index;

  std::size_t size() const { return individuals.size(); }
  /// Position of `id`, or -1.
  int find(std::string_view id) const;
};

/// Values of one attribute over its population. Discrete attributes store a
/// value index per individual (-1 marks a missing value, which only the
/// target attribute may contain); continuous attributes store reals.
struct AttributeColumn {
  std::vector<int> codes;
  std::vector<double> reals;
};

/// Tuple set of a binary relation with sorted adjacency in both directions.
struct RelationTable {
  std::vector<std::vector<int>> forward;
  std::vector<std::vector<int>> backward;
  std::size_t size = 0;

  bool contains(int from, int to) const;
};

/// Ground world: individuals, attribute values and relation tuples.
/// Immutable once built; copies share storage.
class RelationalDatabase {
 public:
  const Schema& schema() const { return *schema_; }

  const Population& population(std::string_view name) const;
  std::size_t populationSize(std::string_view name) const { return population(name).size(); }

  const AttributeColumn& attribute(std::string_view name) const;
  const RelationTable& relation(std::string_view name) const;

  /// Returns a copy extended with a new continuous attribute.
  RelationalDatabase withContinuousAttribute(const std::string& name,
                                             const std::string& populationName,
                                             std::vector<double> values) const;

 private:
  friend class DatabaseBuilder;

  std::shared_ptr<const Schema> schema_;
  std::map<std::string, std::shared_ptr<const Population>, std::less<>> populations_;
  std::map<std::string, std::shared_ptr<const AttributeColumn>, std::less<>> attributes_;
  std::map<std::string, std::shared_ptr<const RelationTable>, std::less<>> relations_;
};

/// Assembles a RelationalDatabase and validates it on build().
class DatabaseBuilder {
 public:
  explicit DatabaseBuilder(Schema schema);

  void setIndividuals(const std::string& population, std::vector<std::string> ids);
  void setCodes(const std::string& attribute, std::vector<int> codes);
  void setReals(const std::string& attribute, std::vector<double> values);
  void addTuple(const std::string& relation, int from, int to);

  const Schema& schema() const { return schema_; }

  /// Throws ValidationError unless every attribute is total over its
  /// population; attributes named in `mayHaveMissing` are exempt.
  RelationalDatabase build(const std::set<std::string>& mayHaveMissing = {}) &&;

 private:
  Schema schema_;
  std::map<std::string, std::vector<std::string>> individuals_;
  std::map<std::string, AttributeColumn> attributes_;
  std::map<std::string, std::vector<std::pair<int, int>>> tuples_;
};

}  // namespace rlr
