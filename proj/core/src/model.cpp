#include "rlr/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "rlr/csv.hpp"
#include "rlr/error.hpp"
#include "rlr/solver.hpp"

namespace rlr {

RlrModel RlrModel::interceptOnly(TargetSpec target, double mean) {
  RlrModel m;
  double w0 = 0.0;
  if (mean > 0.0 && mean < 1.0) w0 = std::log(mean / (1.0 - mean));
  m.formulas.push_back({Formula{}, w0});
  m.target = std::move(target);
  m.trainMean = mean;
  return m;
}

RelationalDatabase attachHidden(const RlrModel& model, const RelationalDatabase& db) {
  if (!model.hidden) return db;
  RelationalDatabase out = db;
  const auto& h = *model.hidden;
  for (std::size_t k = 0; k < h.names.size(); ++k) {
    if (out.schema().attribute(h.names[k])) continue;
    out = out.withContinuousAttribute(h.names[k], h.population, h.values[k]);
  }
  return out;
}

double blendWithMean(double probability, double trainMean, double lambdaMean) {
  return lambdaMean * trainMean + (1.0 - lambdaMean) * probability;
}

double rlrPredict(const RlrModel& model, int individual, const RelationalDatabase& db) {
  double score = 0.0;
  for (const auto& wf : model.formulas) {
    if (wf.weight == 0.0) continue;
    score += wf.weight * countFormula(wf.formula, model.target, individual, db);
  }
  return sigmoid(score);
}

double regularizedPredict(const RlrModel& model, int individual, const RelationalDatabase& db) {
  return blendWithMean(rlrPredict(model, individual, db), model.trainMean, model.lambdaMean);
}

std::vector<double> predictIndividuals(const RlrModel& model, const RelationalDatabase& db,
                                       std::span<const int> individuals, bool regularized,
                                       FeatureCache* cache) {
  std::vector<double> scores(individuals.size(), 0.0);
  for (const auto& wf : model.formulas) {
    if (wf.weight == 0.0) continue;
    std::shared_ptr<const std::vector<double>> column;
    if (cache && &cache->database() == &db)
      column = cache->column(wf.formula);
    else
      column = std::make_shared<const std::vector<double>>(countColumn(wf.formula, model.target, db));
    for (std::size_t i = 0; i < individuals.size(); ++i)
      scores[i] += wf.weight * (*column)[static_cast<std::size_t>(individuals[i])];
  }
  for (auto& s : scores) {
    s = sigmoid(s);
    if (regularized) s = blendWithMean(s, model.trainMean, model.lambdaMean);
  }
  return scores;
}

namespace {

std::string formatReal(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<std::string> splitTabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

double parseReal(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw LoadError("model file: bad " + what + " '" + text + "'");
  }
}

}  // namespace

void writeModel(const RlrModel& model, std::ostream& out, const std::string& hiddenFile) {
  out << "# rlr-model\n";
  out << "version\t" << kModelFormatVersion << '\n';
  out << "target\t" << model.target.attribute << '\t' << model.target.population << '\t'
      << model.target.variable << '\t' << model.target.positiveClass << '\n';
  out << "train_mean\t" << formatReal(model.trainMean) << '\n';
  out << "lambda_mean\t" << formatReal(model.lambdaMean) << '\n';
  if (model.hidden) {
    out << "hidden\t" << model.hidden->population << '\t' << model.hidden->names.size() << '\t'
        << hiddenFile << '\n';
  }
  for (const auto& wf : model.formulas)
    out << formatReal(wf.weight) << '\t' << toString(wf.formula) << '\n';
}

void writeHiddenCsv(const HiddenValues& hidden, const RelationalDatabase& db, std::ostream& out) {
  const auto& pop = db.population(hidden.population);
  out << "id";
  for (const auto& name : hidden.names) out << ',' << csvEscape(name);
  out << '\n';
  for (std::size_t i = 0; i < pop.size(); ++i) {
    out << csvEscape(pop.individuals[i]);
    for (const auto& column : hidden.values) out << ',' << formatReal(column[i]);
    out << '\n';
  }
}

HiddenValues readHiddenCsv(const std::filesystem::path& path, const std::string& population,
                           const RelationalDatabase& db) {
  const auto table = readCsv(path);
  const auto& pop = db.population(population);
  if (table.header.empty() || table.header[0] != "id")
    throw LoadError(path.string() + ": first column must be 'id'");
  HiddenValues h;
  h.population = population;
  h.names.assign(table.header.begin() + 1, table.header.end());
  h.values.assign(h.names.size(), std::vector<double>(pop.size(), 0.0));
  std::vector<bool> seen(pop.size(), false);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const int idx = pop.find(row[0]);
    const std::string where = path.string() + ":" + std::to_string(table.lineNumbers[r]);
    if (idx < 0) throw LoadError(where + ": unknown individual '" + row[0] + "'");
    seen[static_cast<std::size_t>(idx)] = true;
    for (std::size_t k = 0; k < h.names.size(); ++k) h.values[k][idx] = parseReal(row[k + 1], "hidden value");
  }
  for (bool s : seen)
    if (!s) throw LoadError(path.string() + ": hidden values missing for some individuals");
  return h;
}

void saveModel(const RlrModel& model, const std::filesystem::path& path, const RelationalDatabase& db) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file " + path.string());
  writeModel(model, out, "hidden.csv");
  if (model.hidden) {
    std::ofstream hidden(path.parent_path() / "hidden.csv");
    if (!hidden) throw Error("cannot write hidden.csv next to " + path.string());
    writeHiddenCsv(*model.hidden, db, hidden);
  }
}

RlrModel loadModel(const std::filesystem::path& path, const RelationalDatabase& db) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string() + ": cannot open model file");
  RlrModel model;
  bool sawVersion = false, sawTarget = false;
  RelationalDatabase world = db;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = splitTabs(line);
    const auto& key = fields[0];
    if (key == "version") {
      if (fields.size() != 2) throw LoadError("model file: malformed version line");
      const int version = static_cast<int>(parseReal(fields[1], "version"));
      if (version > kModelFormatVersion)
        throw LoadError("model file version " + fields[1] + " is newer than supported version " +
                        std::to_string(kModelFormatVersion));
      sawVersion = true;
    } else if (key == "target") {
      if (fields.size() != 5) throw LoadError("model file: malformed target line");
      model.target = {fields[1], fields[2], fields[3], fields[4]};
      validateTarget(model.target, db.schema());
      sawTarget = true;
    } else if (key == "train_mean") {
      model.trainMean = parseReal(fields.at(1), "train_mean");
    } else if (key == "lambda_mean") {
      model.lambdaMean = parseReal(fields.at(1), "lambda_mean");
    } else if (key == "hidden") {
      if (fields.size() != 4) throw LoadError("model file: malformed hidden line");
      model.hidden = readHiddenCsv(path.parent_path() / fields[3], fields[1], db);
      if (model.hidden->names.size() != static_cast<std::size_t>(parseReal(fields[2], "hidden count")))
        throw LoadError("model file: hidden feature count does not match " + fields[3]);
      world = attachHidden(model, db);
    } else {
      if (!sawVersion || !sawTarget) throw LoadError("model file: formula before header");
      if (fields.size() != 2) throw LoadError("model file: malformed formula line '" + line + "'");
      const double w = parseReal(fields[0], "weight");
      model.formulas.push_back({parseFormula(fields[1], world.schema()), w});
    }
  }
  if (!sawVersion) throw LoadError("model file: missing version line");
  if (!sawTarget) throw LoadError("model file: missing target line");
  if (model.formulas.empty() || !model.formulas.front().formula.isTrue())
    throw LoadError("model file: first formula must be the True intercept");
  return model;
}

}  // namespace rlr
