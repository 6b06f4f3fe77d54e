#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rlr/database.hpp"
#include "rlr/schema.hpp"

namespace rlr {

/// JSON description of a CSV dataset. Paths are relative to the manifest.
///
///   populations: [{name, file, id}]
///   attributes:  [{name, population, file, id, column, range, values?}]
///   relations:   [{name, from, to, file, from_column, to_column}]
///   target:      {attribute, positive, variable?, merge?: {old: new}}
///
/// `range` is boolean, categorical or continuous; categorical values are
/// inferred from the data when not listed. Extra CSV columns are ignored.
struct DatasetManifest {
  struct PopulationEntry {
    std::string name;
    std::filesystem::path file;
    std::string idColumn = "id";
  };
  struct AttributeEntry {
    std::string name;
    std::string population;
    std::filesystem::path file;
    std::string idColumn = "id";
    std::string column;
    RangeKind range = RangeKind::Boolean;
    std::vector<std::string> values;
  };
  struct RelationEntry {
    std::string name;
    std::string from;
    std::string to;
    std::filesystem::path file;
    std::string fromColumn;
    std::string toColumn;
  };
  struct TargetEntry {
    std::string attribute;
    std::string positive;
    std::string variable;
    std::map<std::string, std::string> merge;
  };

  std::filesystem::path baseDir;
  std::vector<PopulationEntry> populations;
  std::vector<AttributeEntry> attributes;
  std::vector<RelationEntry> relations;
  TargetEntry target;
};

DatasetManifest parseManifest(const std::string& json, const std::filesystem::path& baseDir,
                              const std::string& source = "<manifest>");
DatasetManifest loadManifest(const std::filesystem::path& path);
std::string manifestToJson(const DatasetManifest& manifest);

struct LoadedDataset {
  RelationalDatabase db;
  TargetSpec target;
};

/// Reads and validates every table. Only the target attribute may have
/// missing (empty) values; those rows are kept for prediction only.
LoadedDataset loadDatabase(const DatasetManifest& manifest);

/// Writes `db` as CSV tables plus manifest.json into `dir`.
void writeDataset(const RelationalDatabase& db, const TargetSpec& target, const std::filesystem::path& dir);

/// Converts a raw MovieLens-100k directory (u.user, u.item, u.data) into CSV
/// tables and a manifest for gender prediction. Ratings are dropped. Age is
/// bucketed into age_1 (<25), age_2 (25-34) and age_3 (35+); movies keep the
/// action, horror and drama flags.
void convertMovieLens100k(const std::filesystem::path& rawDir, const std::filesystem::path& outDir);

}  // namespace rlr
