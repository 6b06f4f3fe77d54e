// rlr: learn, evaluate and apply relational logistic regression models.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include "rlr/config.hpp"
#include "rlr/csv.hpp"
#include "rlr/error.hpp"
#include "rlr/evaluator.hpp"
#include "rlr/ingest.hpp"
#include "rlr/model.hpp"
#include "rlr/pipeline.hpp"
#include "rlr/synth.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string manifest;
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> hidden;
  std::string k;
  std::optional<int> folds;
};

void addCommon(CLI::App* cmd, CommonOptions& o, bool needsManifest) {
  auto* m = cmd->add_option("--manifest", o.manifest, "Dataset manifest (JSON)");
  if (needsManifest) m->required()->check(CLI::ExistingFile);
  cmd->add_option("--config", o.config, "Flat key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--seed", o.seed, "Random seed");
}

rlr::ConfigFile readConfig(const CommonOptions& o) {
  if (o.config.empty()) {
    std::istringstream empty;
    return rlr::ConfigFile::parse(empty, "<none>");
  }
  return rlr::ConfigFile::load(o.config);
}

rlr::PipelineConfig pipelineConfig(const CommonOptions& o) {
  const auto file = readConfig(o);
  file.checkKeys(rlr::pipelineConfigKeys());
  rlr::PipelineConfig cfg;
  rlr::applyPipelineConfig(file, cfg);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.k.empty()) {
    cfg.structure.kCandidates = rlr::parseIntList(o.k, "--k");
    cfg.structure.k = cfg.structure.kCandidates.front();
  }
  if (o.folds) cfg.eval.folds = *o.folds;
  if (o.hidden) {
    if (*o.hidden <= 0) {
      cfg.hidden.reset();
    } else {
      rlr::HiddenConfig h = cfg.hidden.value_or(rlr::HiddenConfig{});
      h.numHidden = *o.hidden;
      cfg.hidden = h;
    }
  }
  cfg.validate();
  return cfg;
}

std::ofstream openOutput(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw rlr::Error("cannot write " + (dir / name).string());
  out.precision(17);
  return out;
}

int runLearn(const CommonOptions& o) {
  const auto cfg = pipelineConfig(o);
  const auto data = rlr::loadDatabase(rlr::loadManifest(o.manifest));
  const auto rows = rlr::labelledIndividuals(data.target, data.db);
  const auto fit = rlr::fitPipeline(data.db, data.target, cfg, rows);
  fs::create_directories(o.out);
  rlr::saveModel(fit.model, fs::path(o.out) / "model.txt", data.db);
  auto trace = openOutput(o.out, "trace.csv");
  rlr::writeTraceCsv(fit.trace, trace);
  std::cout << "k=" << fit.k << " formulas=" << fit.model.formulas.size() << " lambda_mean=" << fit.model.lambdaMean
            << " model=" << (fs::path(o.out) / "model.txt").string() << '\n';
  return 0;
}

int runEval(const CommonOptions& o) {
  const auto cfg = pipelineConfig(o);
  const auto data = rlr::loadDatabase(rlr::loadManifest(o.manifest));
  const auto reports = rlr::compareModels(data.db, data.target, cfg);
  auto csv = openOutput(o.out, "report.csv");
  rlr::writeReportCsv(reports, csv);
  auto text = openOutput(o.out, "report.txt");
  rlr::writeReportText(reports, text);
  rlr::writeReportText(reports, std::cout);
  return 0;
}

int runPredict(const CommonOptions& o, const std::string& modelPath) {
  const auto data = rlr::loadDatabase(rlr::loadManifest(o.manifest));
  const fs::path path = modelPath.empty() ? fs::path(o.out) / "model.txt" : fs::path(modelPath);
  const auto model = rlr::loadModel(path, data.db);
  const auto world = rlr::attachHidden(model, data.db);
  std::vector<int> all(data.db.populationSize(data.target.population));
  std::iota(all.begin(), all.end(), 0);
  const auto p = rlr::predictIndividuals(model, world, all, true);
  const auto& pop = data.db.population(data.target.population);
  auto out = openOutput(o.out, "predictions.csv");
  out << "id,probability,label\n";
  for (std::size_t i = 0; i < all.size(); ++i) {
    out << rlr::csvEscape(pop.individuals[i]) << ',' << p[i] << ',';
    if (auto label = rlr::labelOf(data.target, data.db, static_cast<int>(i))) out << *label;
    out << '\n';
  }
  std::cout << "predictions=" << (fs::path(o.out) / "predictions.csv").string() << '\n';
  return 0;
}

int runSynth(const CommonOptions& o, const std::string& preset, std::optional<std::size_t> size) {
  const auto file = readConfig(o);
  auto keys = rlr::synthConfigKeys();
  keys.insert("seed");
  file.checkKeys(keys);
  std::uint64_t seed = 0;
  if (auto v = file.get("seed")) seed = rlr::parseSeed(*v, file.where("seed") + ": seed");
  if (o.seed) seed = *o.seed;
  rlr::SynthSpec spec;
  if (!preset.empty() || !file.has("synth.population")) {
    if (!preset.empty() && preset != "kind-friends") throw rlr::ValidationError("unknown preset '" + preset + "'");
    std::size_t n = size.value_or(500);
    if (!size)
      if (auto v = file.get("synth.size")) n = static_cast<std::size_t>(rlr::parseSeed(*v, "synth.size"));
    spec = rlr::kindFriendsSpec(n, seed);
  } else {
    spec = rlr::synthFromConfig(file, seed);
  }
  const auto data = rlr::generateSynthetic(spec);
  rlr::writeDataset(data.db, data.target, o.out);
  std::cout << "manifest=" << (fs::path(o.out) / "manifest.json").string() << '\n';
  return 0;
}

std::string oneLine(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relational logistic regression: learn, evaluate, predict, generate data"};
  app.require_subcommand(1);

  CommonOptions learnOpts, evalOpts, predictOpts, synthOpts;
  auto* learn = app.add_subcommand("learn", "Learn a model on all labelled individuals");
  addCommon(learn, learnOpts, true);
  learn->add_option("--hidden", learnOpts.hidden, "Number of hidden features (0 disables)");
  learn->add_option("--k", learnOpts.k, "Comma-separated k candidates");
  learn->add_option("--folds", learnOpts.folds, "Cross-validation folds");

  auto* eval = app.add_subcommand("eval", "Cross-validate baseline, flat LR, RLR-Base and RLR-H");
  addCommon(eval, evalOpts, true);
  eval->add_option("--hidden", evalOpts.hidden, "Number of hidden features (0 disables)");
  eval->add_option("--k", evalOpts.k, "Comma-separated k candidates");
  eval->add_option("--folds", evalOpts.folds, "Cross-validation folds");

  std::string modelPath;
  auto* predict = app.add_subcommand("predict", "Write probabilities for every target individual");
  addCommon(predict, predictOpts, true);
  predict->add_option("--model", modelPath, "Model file (default: <out>/model.txt)");

  std::string preset;
  std::optional<std::size_t> size;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  addCommon(synth, synthOpts, false);
  synth->add_option("--preset", preset, "kind-friends");
  synth->add_option("--size", size, "Population size for the preset");

  std::string rawDir;
  std::string movielensOut;
  auto* movielens = app.add_subcommand("movielens", "Convert raw MovieLens-100k files to a manifest");
  movielens->add_option("--raw", rawDir, "Directory holding u.user, u.item, u.data")->required();
  movielens->add_option("--out", movielensOut, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*learn) return runLearn(learnOpts);
    if (*eval) return runEval(evalOpts);
    if (*predict) return runPredict(predictOpts, modelPath);
    if (*synth) return runSynth(synthOpts, preset, size);
    if (*movielens) {
      rlr::convertMovieLens100k(rawDir, movielensOut);
      std::cout << "manifest=" << (fs::path(movielensOut) / "manifest.json").string() << '\n';
      return 0;
    }
  } catch (const rlr::ValidationError& e) {
    std::cerr << "error\tvalidation\t" << oneLine(e.what()) << '\n';
    return 3;
  } catch (const rlr::LoadError& e) {
    std::cerr << "error\tload\t" << oneLine(e.what()) << '\n';
    return 4;
  } catch (const rlr::LimitError& e) {
    std::cerr << "error\tlimit\t" << oneLine(e.what()) << '\n';
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error\tinternal\t" << oneLine(e.what()) << '\n';
    return 1;
  }
  return 1;
}
