#include "rlr/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "rlr/csv.hpp"
#include "rlr/error.hpp"
#include "rlr/grounding.hpp"

namespace rlr {

using nlohmann::json;

namespace {

std::string requireString(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_string())
    throw LoadError(where + ": missing string field '" + key + "'");
  return obj[key].get<std::string>();
}

std::string optionalString(const json& obj, const char* key, std::string fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) throw LoadError(std::string("manifest field '") + key + "' must be a string");
  return obj[key].get<std::string>();
}

const json& requireArray(const json& root, const char* key, const std::string& source) {
  static const json empty = json::array();
  if (!root.contains(key)) return empty;
  if (!root[key].is_array()) throw LoadError(source + ": '" + key + "' must be an array");
  return root[key];
}

RangeKind parseRange(const std::string& text, const std::string& where) {
  if (text == "boolean") return RangeKind::Boolean;
  if (text == "categorical") return RangeKind::Categorical;
  if (text == "continuous") return RangeKind::Continuous;
  throw LoadError(where + ": range must be boolean, categorical or continuous, not '" + text + "'");
}

const char* rangeName(RangeKind kind) {
  switch (kind) {
    case RangeKind::Boolean: return "boolean";
    case RangeKind::Categorical: return "categorical";
    case RangeKind::Continuous: return "continuous";
  }
  return "boolean";
}

std::optional<bool> parseBooleanToken(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "true" || s == "1" || s == "yes" || s == "t" || s == "y") return true;
  if (s == "false" || s == "0" || s == "no" || s == "f" || s == "n") return false;
  return std::nullopt;
}

std::string at(const CsvTable& table, std::size_t row) {
  return table.source.string() + ":" + std::to_string(table.lineNumbers[row]);
}

}  // namespace

DatasetManifest parseManifest(const std::string& text, const std::filesystem::path& baseDir,
                              const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw LoadError(source + ": invalid JSON: " + e.what());
  }
  if (!root.is_object()) throw LoadError(source + ": manifest must be a JSON object");
  DatasetManifest m;
  m.baseDir = baseDir;
  for (const auto& p : requireArray(root, "populations", source)) {
    const std::string where = source + ": population";
    m.populations.push_back({requireString(p, "name", where), requireString(p, "file", where),
                             optionalString(p, "id", "id")});
  }
  for (const auto& a : requireArray(root, "attributes", source)) {
    const std::string where = source + ": attribute";
    DatasetManifest::AttributeEntry e;
    e.name = requireString(a, "name", where);
    e.population = requireString(a, "population", where + " '" + e.name + "'");
    e.file = requireString(a, "file", where + " '" + e.name + "'");
    e.idColumn = optionalString(a, "id", "id");
    e.column = optionalString(a, "column", e.name);
    e.range = parseRange(optionalString(a, "range", "boolean"), where + " '" + e.name + "'");
    if (a.contains("values")) {
      if (!a["values"].is_array()) throw LoadError(where + " '" + e.name + "': values must be an array");
      for (const auto& v : a["values"]) {
        if (!v.is_string()) throw LoadError(where + " '" + e.name + "': values must be strings");
        e.values.push_back(v.get<std::string>());
      }
    }
    m.attributes.push_back(std::move(e));
  }
  for (const auto& r : requireArray(root, "relations", source)) {
    const std::string where = source + ": relation";
    DatasetManifest::RelationEntry e;
    e.name = requireString(r, "name", where);
    e.from = requireString(r, "from", where + " '" + e.name + "'");
    e.to = requireString(r, "to", where + " '" + e.name + "'");
    e.file = requireString(r, "file", where + " '" + e.name + "'");
    e.fromColumn = optionalString(r, "from_column", e.from);
    e.toColumn = optionalString(r, "to_column", e.to);
    m.relations.push_back(std::move(e));
  }
  if (!root.contains("target") || !root["target"].is_object()) throw LoadError(source + ": missing target object");
  const auto& t = root["target"];
  m.target.attribute = requireString(t, "attribute", source + ": target");
  m.target.positive = requireString(t, "positive", source + ": target");
  m.target.variable = optionalString(t, "variable", "");
  if (t.contains("merge")) {
    if (!t["merge"].is_object()) throw LoadError(source + ": target.merge must be an object");
    for (const auto& [from, to] : t["merge"].items()) {
      if (!to.is_string()) throw LoadError(source + ": target.merge values must be strings");
      m.target.merge[from] = to.get<std::string>();
    }
  }
  return m;
}

DatasetManifest loadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string() + ": cannot open manifest");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parseManifest(buffer.str(), path.parent_path(), path.string());
}

std::string manifestToJson(const DatasetManifest& m) {
  json root;
  root["populations"] = json::array();
  for (const auto& p : m.populations)
    root["populations"].push_back({{"name", p.name}, {"file", p.file.generic_string()}, {"id", p.idColumn}});
  root["attributes"] = json::array();
  for (const auto& a : m.attributes) {
    json e{{"name", a.name},
           {"population", a.population},
           {"file", a.file.generic_string()},
           {"id", a.idColumn},
           {"column", a.column},
           {"range", rangeName(a.range)}};
    if (a.range == RangeKind::Categorical) e["values"] = a.values;
    root["attributes"].push_back(std::move(e));
  }
  root["relations"] = json::array();
  for (const auto& r : m.relations)
    root["relations"].push_back({{"name", r.name},
                                 {"from", r.from},
                                 {"to", r.to},
                                 {"file", r.file.generic_string()},
                                 {"from_column", r.fromColumn},
                                 {"to_column", r.toColumn}});
  json target{{"attribute", m.target.attribute}, {"positive", m.target.positive}};
  if (!m.target.variable.empty()) target["variable"] = m.target.variable;
  if (!m.target.merge.empty()) target["merge"] = m.target.merge;
  root["target"] = std::move(target);
  return root.dump(2) + "\n";
}

LoadedDataset loadDatabase(const DatasetManifest& m) {
  Schema schema;
  std::map<std::string, std::vector<std::string>> ids;
  std::map<std::string, std::unordered_map<std::string, int>> index;
  std::map<std::filesystem::path, CsvTable> tables;
  auto table = [&](const std::filesystem::path& rel) -> const CsvTable& {
    const auto path = m.baseDir / rel;
    auto it = tables.find(path);
    if (it == tables.end()) it = tables.emplace(path, readCsv(path)).first;
    return it->second;
  };

  for (const auto& p : m.populations) {
    schema.addPopulation(p.name);
    const auto& tab = table(p.file);
    const std::size_t col = tab.column(p.idColumn);
    auto& list = ids[p.name];
    auto& idx = index[p.name];
    for (std::size_t r = 0; r < tab.rows.size(); ++r) {
      const auto& id = tab.rows[r][col];
      if (id.empty()) throw LoadError(at(tab, r) + ": empty id");
      if (!idx.emplace(id, static_cast<int>(list.size())).second)
        throw LoadError(at(tab, r) + ": duplicate id '" + id + "' in population " + p.name);
      list.push_back(id);
    }
  }
  auto lookup = [&](const std::string& pop, const std::string& id, const CsvTable& tab, std::size_t r) {
    const auto& idx = index.at(pop);
    auto it = idx.find(id);
    if (it == idx.end()) throw LoadError(at(tab, r) + ": unknown " + pop + " id '" + id + "'");
    return it->second;
  };

  const auto& tgt = m.target;
  struct RawAttribute {
    std::vector<std::string> values;  // per individual; empty = missing
  };
  std::map<std::string, RawAttribute> raw;
  for (const auto& a : m.attributes) {
    if (!index.count(a.population))
      throw LoadError("attribute '" + a.name + "' refers to unknown population '" + a.population + "'");
    const auto& tab = table(a.file);
    const std::size_t idCol = tab.column(a.idColumn);
    const std::size_t valCol = tab.column(a.column);
    auto& values = raw[a.name].values;
    values.assign(ids[a.population].size(), std::string{});
    std::vector<bool> seen(values.size(), false);
    for (std::size_t r = 0; r < tab.rows.size(); ++r) {
      const int i = lookup(a.population, tab.rows[r][idCol], tab, r);
      if (seen[static_cast<std::size_t>(i)])
        throw LoadError(at(tab, r) + ": second value of '" + a.name + "' for id '" + tab.rows[r][idCol] + "'");
      seen[static_cast<std::size_t>(i)] = true;
      std::string v = tab.rows[r][valCol];
      if (a.name == tgt.attribute && !v.empty()) {
        if (auto it = tgt.merge.find(v); it != tgt.merge.end()) v = it->second;
      }
      if (v.empty() && a.name != tgt.attribute)
        throw LoadError(at(tab, r) + ": missing value of attribute '" + a.name + "'");
      values[static_cast<std::size_t>(i)] = std::move(v);
    }
    if (a.name != tgt.attribute)
      for (std::size_t i = 0; i < seen.size(); ++i)
        if (!seen[i])
          throw LoadError(tab.source.string() + ": no value of attribute '" + a.name + "' for id '" +
                          ids[a.population][i] + "'");

    AttributeDecl decl;
    decl.name = a.name;
    decl.population = a.population;
    decl.kind = a.range;
    if (a.range == RangeKind::Boolean) {
      decl = booleanAttribute(a.name, a.population);
    } else if (a.range == RangeKind::Categorical) {
      std::vector<std::string> range;
      if (!a.values.empty()) {
        for (auto v : a.values) {
          if (a.name == tgt.attribute)
            if (auto it = tgt.merge.find(v); it != tgt.merge.end()) v = it->second;
          if (std::find(range.begin(), range.end(), v) == range.end()) range.push_back(v);
        }
      } else {
        std::set<std::string> distinct;
        for (const auto& v : values)
          if (!v.empty()) distinct.insert(v);
        range.assign(distinct.begin(), distinct.end());
      }
      if (a.name == tgt.attribute && range.size() > 2)
        throw LoadError("target attribute '" + a.name + "' has " + std::to_string(range.size()) +
                        " classes; merge classes with target.merge to obtain two");
      if (a.name == tgt.attribute && range.size() == 1 && range.front() != tgt.positive)
        range.push_back(tgt.positive);
      if (a.name == tgt.attribute && range.size() == 1) range.push_back("other");
      decl = categoricalAttribute(a.name, a.population, std::move(range));
    } else {
      decl = continuousAttribute(a.name, a.population);
    }
    schema.addAttribute(std::move(decl));
  }
  for (const auto& r : m.relations) {
    if (!index.count(r.from) || !index.count(r.to))
      throw LoadError("relation '" + r.name + "' refers to an unknown population");
    schema.addRelation({r.name, r.from, r.to});
  }

  DatabaseBuilder builder(schema);
  for (auto& [pop, list] : ids) builder.setIndividuals(pop, list);
  for (const auto& a : m.attributes) {
    const auto* decl = schema.attribute(a.name);
    const auto& values = raw[a.name].values;
    const auto& tab = table(a.file);
    if (decl->kind == RangeKind::Continuous) {
      std::vector<double> reals(values.size());
      for (std::size_t i = 0; i < values.size(); ++i) {
        try {
          std::size_t used = 0;
          reals[i] = std::stod(values[i], &used);
          if (used != values[i].size()) throw std::invalid_argument(values[i]);
        } catch (const std::exception&) {
          throw LoadError(tab.source.string() + ": attribute '" + a.name + "' value '" + values[i] +
                          "' is not a number");
        }
      }
      builder.setReals(a.name, std::move(reals));
      continue;
    }
    std::vector<int> codes(values.size(), -1);
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i].empty()) continue;
      if (decl->kind == RangeKind::Boolean) {
        auto b = parseBooleanToken(values[i]);
        if (!b)
          throw LoadError(tab.source.string() + ": attribute '" + a.name + "' value '" + values[i] +
                          "' is not boolean");
        codes[i] = *b ? 1 : 0;
      } else {
        codes[i] = decl->valueIndex(values[i]);
        if (codes[i] < 0)
          throw LoadError(tab.source.string() + ": attribute '" + a.name + "' value '" + values[i] +
                          "' is not in the declared range");
      }
    }
    builder.setCodes(a.name, std::move(codes));
  }
  for (const auto& r : m.relations) {
    const auto& tab = table(r.file);
    const std::size_t fromCol = tab.column(r.fromColumn);
    const std::size_t toCol = tab.column(r.toColumn);
    for (std::size_t row = 0; row < tab.rows.size(); ++row)
      builder.addTuple(r.name, lookup(r.from, tab.rows[row][fromCol], tab, row),
                       lookup(r.to, tab.rows[row][toCol], tab, row));
  }

  const auto* targetDecl = schema.attribute(tgt.attribute);
  if (!targetDecl) throw LoadError("target attribute '" + tgt.attribute + "' is not declared");
  TargetSpec target;
  target.attribute = tgt.attribute;
  target.population = targetDecl->population;
  target.positiveClass = tgt.positive;
  if (targetDecl->kind == RangeKind::Boolean) {
    auto b = parseBooleanToken(tgt.positive);
    if (!b) throw LoadError("target positive class '" + tgt.positive + "' is not boolean");
    target.positiveClass = *b ? "true" : "false";
  }
  target.variable = tgt.variable.empty() ? std::string(1, static_cast<char>(std::tolower(
                                                               static_cast<unsigned char>(target.population[0]))))
                                         : tgt.variable;
  validateTarget(target, schema);
  auto db = std::move(builder).build({tgt.attribute});
  return {std::move(db), std::move(target)};
}

void writeDataset(const RelationalDatabase& db, const TargetSpec& target, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& schema = db.schema();
  DatasetManifest m;
  m.baseDir = dir;
  auto open = [&](const std::string& name) {
    std::ofstream out(dir / name);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out.precision(17);
    return out;
  };
  for (const auto& popName : schema.populations()) {
    const auto& pop = db.population(popName);
    const std::string file = popName + ".csv";
    std::vector<const AttributeDecl*> attrs;
    for (const auto& a : schema.attributes())
      if (a.population == popName) attrs.push_back(&a);
    auto out = open(file);
    out << "id";
    for (const auto* a : attrs) out << ',' << csvEscape(a->name);
    out << '\n';
    for (std::size_t i = 0; i < pop.size(); ++i) {
      out << csvEscape(pop.individuals[i]);
      for (const auto* a : attrs) {
        const auto& col = db.attribute(a->name);
        out << ',';
        if (a->kind == RangeKind::Continuous) {
          out << col.reals[i];
        } else if (col.codes[i] >= 0) {
          out << csvEscape(a->values[static_cast<std::size_t>(col.codes[i])]);
        }
      }
      out << '\n';
    }
    m.populations.push_back({popName, file, "id"});
    for (const auto* a : attrs) {
      DatasetManifest::AttributeEntry e;
      e.name = a->name;
      e.population = popName;
      e.file = file;
      e.column = a->name;
      e.range = a->kind;
      if (a->kind == RangeKind::Categorical) e.values = a->values;
      m.attributes.push_back(std::move(e));
    }
  }
  for (const auto& rel : schema.relations()) {
    const std::string file = rel.name + ".csv";
    const auto& table = db.relation(rel.name);
    const auto& from = db.population(rel.from);
    const auto& to = db.population(rel.to);
    const std::string fromCol = rel.from == rel.to ? rel.from + "_from" : rel.from;
    const std::string toCol = rel.from == rel.to ? rel.to + "_to" : rel.to;
    auto out = open(file);
    out << csvEscape(fromCol) << ',' << csvEscape(toCol) << '\n';
    for (std::size_t i = 0; i < table.forward.size(); ++i)
      for (int j : table.forward[i])
        out << csvEscape(from.individuals[i]) << ',' << csvEscape(to.individuals[static_cast<std::size_t>(j)])
            << '\n';
    m.relations.push_back({rel.name, rel.from, rel.to, file, fromCol, toCol});
  }
  m.target.attribute = target.attribute;
  m.target.positive = target.positiveClass;
  m.target.variable = target.variable;
  auto out = open("manifest.json");
  out << manifestToJson(m);
}

namespace {

std::vector<std::string> splitOn(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename Fn>
void forEachLine(const std::filesystem::path& path, char sep, std::size_t minFields, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path.string() + ": cannot open file");
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = splitOn(line, sep);
    if (fields.size() < minFields)
      throw LoadError(path.string() + ":" + std::to_string(lineNo) + ": expected at least " +
                      std::to_string(minFields) + " fields");
    fn(fields, lineNo);
  }
}

}  // namespace

void convertMovieLens100k(const std::filesystem::path& rawDir, const std::filesystem::path& outDir) {
  std::filesystem::create_directories(outDir);
  {
    std::ofstream users(outDir / "users.csv");
    users << "id,age,gender,occupation\n";
    forEachLine(rawDir / "u.user", '|', 5, [&](const std::vector<std::string>& f, std::size_t lineNo) {
      int age = 0;
      try {
        age = std::stoi(f[1]);
      } catch (const std::exception&) {
        throw LoadError((rawDir / "u.user").string() + ":" + std::to_string(lineNo) + ": bad age '" + f[1] + "'");
      }
      const char* bucket = age < 25 ? "age_1" : age < 35 ? "age_2" : "age_3";
      users << csvEscape(f[0]) << ',' << bucket << ',' << csvEscape(f[2]) << ',' << csvEscape(f[3]) << '\n';
    });
  }
  {
    // Genre flags start at field 5: unknown, Action, Adventure, Animation,
    // Children's, Comedy, Crime, Documentary, Drama, Fantasy, Film-Noir, Horror, ...
    std::ofstream movies(outDir / "movies.csv");
    movies << "id,action,horror,drama\n";
    forEachLine(rawDir / "u.item", '|', 24, [&](const std::vector<std::string>& f, std::size_t) {
      movies << csvEscape(f[0]) << ',' << f[6] << ',' << f[16] << ',' << f[13] << '\n';
    });
  }
  {
    std::ofstream rated(outDir / "rated.csv");
    rated << "user,movie,rating\n";
    forEachLine(rawDir / "u.data", '\t', 3, [&](const std::vector<std::string>& f, std::size_t) {
      rated << csvEscape(f[0]) << ',' << csvEscape(f[1]) << ',' << csvEscape(f[2]) << '\n';
    });
  }
  DatasetManifest m;
  m.populations = {{"user", "users.csv", "id"}, {"movie", "movies.csv", "id"}};
  auto attr = [](std::string name, std::string pop, std::string file, RangeKind kind) {
    DatasetManifest::AttributeEntry e;
    e.name = name;
    e.population = std::move(pop);
    e.file = std::move(file);
    e.column = std::move(name);
    e.range = kind;
    return e;
  };
  m.attributes.push_back(attr("age", "user", "users.csv", RangeKind::Categorical));
  m.attributes.push_back(attr("gender", "user", "users.csv", RangeKind::Categorical));
  m.attributes.push_back(attr("occupation", "user", "users.csv", RangeKind::Categorical));
  m.attributes.push_back(attr("action", "movie", "movies.csv", RangeKind::Boolean));
  m.attributes.push_back(attr("horror", "movie", "movies.csv", RangeKind::Boolean));
  m.attributes.push_back(attr("drama", "movie", "movies.csv", RangeKind::Boolean));
  m.relations.push_back({"rated", "user", "movie", "rated.csv", "user", "movie"});
  m.target.attribute = "gender";
  m.target.positive = "M";
  m.target.variable = "u";
  std::ofstream out(outDir / "manifest.json");
  out << manifestToJson(m);
}

}  // namespace rlr
