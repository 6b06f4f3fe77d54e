#include "rlr/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "rlr/error.hpp"

namespace rlr {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> splitList(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    auto item = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source) {
  ConfigFile cfg;
  cfg.source_ = source;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ValidationError(source + ":" + std::to_string(lineNo) + ": expected 'key = value'");
    auto key = trim(std::string_view(text).substr(0, eq));
    auto value = trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) throw ValidationError(source + ":" + std::to_string(lineNo) + ": empty key");
    cfg.entries_.push_back({std::move(key), std::move(value), lineNo});
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string() + ": cannot open config file");
  return parse(in, path.string());
}

std::optional<std::string> ConfigFile::get(std::string_view key) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
    if (it->key == key) return it->value;
  return std::nullopt;
}

std::vector<std::string> ConfigFile::all(std::string_view key) const {
  std::vector<std::string> out;
  for (const auto& e : entries_)
    if (e.key == key) out.push_back(e.value);
  return out;
}

std::string ConfigFile::where(std::string_view key) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
    if (it->key == key) return source_ + ":" + std::to_string(it->line);
  return source_;
}

void ConfigFile::checkKeys(const std::set<std::string, std::less<>>& known,
                           const std::vector<std::string>& prefixes) const {
  for (const auto& e : entries_) {
    if (known.count(e.key)) continue;
    bool prefixed = false;
    for (const auto& p : prefixes)
      if (e.key.rfind(p, 0) == 0) prefixed = true;
    if (!prefixed)
      throw ValidationError(source_ + ":" + std::to_string(e.line) + ": unknown config key '" + e.key + "'");
  }
}

int parseInt(std::string_view text, const std::string& what) {
  int v = 0;
  const auto s = trim(text);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ValidationError(what + ": expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t parseSeed(std::string_view text, const std::string& what) {
  std::uint64_t v = 0;
  const auto s = trim(text);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ValidationError(what + ": expected a non-negative integer, got '" + s + "'");
  return v;
}

double parseDouble(std::string_view text, const std::string& what) {
  const auto s = trim(text);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError(what + ": expected a number, got '" + s + "'");
}

bool parseBool(std::string_view text, const std::string& what) {
  const auto s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ValidationError(what + ": expected true or false, got '" + s + "'");
}

std::vector<int> parseIntList(std::string_view text, const std::string& what) {
  std::vector<int> out;
  for (const auto& item : splitList(text)) out.push_back(parseInt(item, what));
  if (out.empty()) throw ValidationError(what + ": empty list");
  return out;
}

std::vector<double> parseDoubleList(std::string_view text, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : splitList(text)) out.push_back(parseDouble(item, what));
  if (out.empty()) throw ValidationError(what + ": empty list");
  return out;
}

const std::set<std::string, std::less<>>& pipelineConfigKeys() {
  static const std::set<std::string, std::less<>> keys{
      "seed",
      "structure.k_candidates",
      "structure.lambda1",
      "structure.lambda_ratios",
      "structure.folds",
      "structure.max_unary",
      "structure.candidate_cap",
      "solver.max_iterations",
      "solver.tolerance",
      "solver.standardize",
      "solver.penalize_intercept",
      "hidden.count",
      "hidden.population",
      "hidden.init_scale",
      "hidden.learning_rate",
      "hidden.epochs",
      "hidden.lambda1",
      "hidden.batch_size",
      "hidden.k",
      "eval.folds",
      "eval.lambda_mean_grid",
  };
  return keys;
}

void applyPipelineConfig(const ConfigFile& file, PipelineConfig& cfg) {
  auto at = [&](std::string_view key) { return file.where(key) + ": " + std::string(key); };
  auto& s = cfg.structure;
  if (auto v = file.get("seed")) cfg.seed = parseSeed(*v, at("seed"));
  if (auto v = file.get("structure.k_candidates")) {
    s.kCandidates = parseIntList(*v, at("structure.k_candidates"));
    s.k = s.kCandidates.front();
  }
  if (auto v = file.get("structure.lambda1")) s.lambda1 = parseDouble(*v, at("structure.lambda1"));
  if (auto v = file.get("structure.lambda_ratios"))
    s.lambdaRatios = parseDoubleList(*v, at("structure.lambda_ratios"));
  if (auto v = file.get("structure.folds")) s.folds = parseInt(*v, at("structure.folds"));
  if (auto v = file.get("structure.max_unary")) s.maxUnary = parseInt(*v, at("structure.max_unary"));
  if (auto v = file.get("structure.candidate_cap"))
    s.candidateCap = static_cast<std::size_t>(parseSeed(*v, at("structure.candidate_cap")));
  if (auto v = file.get("solver.max_iterations"))
    s.solver.maxIterations = parseInt(*v, at("solver.max_iterations"));
  if (auto v = file.get("solver.tolerance")) s.solver.tolerance = parseDouble(*v, at("solver.tolerance"));
  if (auto v = file.get("solver.standardize")) s.solver.standardize = parseBool(*v, at("solver.standardize"));
  if (auto v = file.get("solver.penalize_intercept"))
    s.solver.penalizeIntercept = parseBool(*v, at("solver.penalize_intercept"));

  const bool anyHidden = std::any_of(file.entries().begin(), file.entries().end(),
                                     [](const auto& e) { return e.key.rfind("hidden.", 0) == 0; });
  if (anyHidden) {
    HiddenConfig h = cfg.hidden.value_or(HiddenConfig{});
    if (auto v = file.get("hidden.count")) h.numHidden = parseInt(*v, at("hidden.count"));
    if (auto v = file.get("hidden.population")) h.population = *v;
    if (auto v = file.get("hidden.init_scale")) h.initScale = parseDouble(*v, at("hidden.init_scale"));
    if (auto v = file.get("hidden.learning_rate")) h.learningRate = parseDouble(*v, at("hidden.learning_rate"));
    if (auto v = file.get("hidden.epochs")) h.epochs = parseInt(*v, at("hidden.epochs"));
    if (auto v = file.get("hidden.lambda1")) h.lambda1 = parseDouble(*v, at("hidden.lambda1"));
    if (auto v = file.get("hidden.batch_size")) h.batchSize = parseInt(*v, at("hidden.batch_size"));
    if (auto v = file.get("hidden.k")) h.k = parseInt(*v, at("hidden.k"));
    cfg.hidden = h;
  }
  if (auto v = file.get("eval.folds")) cfg.eval.folds = parseInt(*v, at("eval.folds"));
  if (auto v = file.get("eval.lambda_mean_grid"))
    cfg.eval.lambdaMeanGrid = parseDoubleList(*v, at("eval.lambda_mean_grid"));
}

}  // namespace rlr
