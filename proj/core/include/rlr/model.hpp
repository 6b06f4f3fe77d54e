#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rlr/database.hpp"
#include "rlr/grounding.hpp"
#include "rlr/schema.hpp"

namespace rlr {

struct WeightedFormula {
  Formula formula;
  double weight = 0.0;
};

/// Learned per-individual latent attributes, stored by individual index.
struct HiddenValues {
  std::string population;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // [feature][individual]
};

/// A learned RLR predictor. formulas[0] is the True intercept; weights apply
/// to raw counts. Predictions are blended towards trainMean by lambdaMean.
struct RlrModel {
  std::vector<WeightedFormula> formulas;
  TargetSpec target;
  double trainMean = 0.5;
  double lambdaMean = 0.0;
  std::optional<HiddenValues> hidden;

  /// Model with only the intercept, set to the log-odds of `mean` (0 when
  /// mean is 0 or 1).
  static RlrModel interceptOnly(TargetSpec target, double mean);
};

/// `db` extended with the model's hidden attributes (or `db` itself).
RelationalDatabase attachHidden(const RlrModel& model, const RelationalDatabase& db);

/// sigmoid of sum_j w_j * count_j for one individual, no mean blending.
/// `db` must already contain any hidden attributes the model uses.
double rlrPredict(const RlrModel& model, int individual, const RelationalDatabase& db);

/// lambdaMean * trainMean + (1 - lambdaMean) * rlrPredict.
double regularizedPredict(const RlrModel& model, int individual, const RelationalDatabase& db);

double blendWithMean(double probability, double trainMean, double lambdaMean);

/// Probabilities for many individuals via column counting.
std::vector<double> predictIndividuals(const RlrModel& model, const RelationalDatabase& db,
                                       std::span<const int> individuals, bool regularized,
                                       FeatureCache* cache = nullptr);

inline constexpr int kModelFormatVersion = 1;

/// Line-oriented text: header lines, then `<weight>\t<formula>` per WF.
/// Hidden values, if any, are referenced by `hiddenFile`.
void writeModel(const RlrModel& model, std::ostream& out, const std::string& hiddenFile = "hidden.csv");

/// Writes `path` and, for models with hidden values, a sibling hidden.csv.
void saveModel(const RlrModel& model, const std::filesystem::path& path, const RelationalDatabase& db);

/// Reads a model written by saveModel. Formulae are parsed against `db`'s
/// schema extended with the model's hidden attributes.
RlrModel loadModel(const std::filesystem::path& path, const RelationalDatabase& db);

/// Hidden values as CSV: `id,H1,...,Hn`.
void writeHiddenCsv(const HiddenValues& hidden, const RelationalDatabase& db, std::ostream& out);
HiddenValues readHiddenCsv(const std::filesystem::path& path, const std::string& population,
                           const RelationalDatabase& db);

}  // namespace rlr
