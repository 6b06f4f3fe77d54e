#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rlr/config.hpp"
#include "rlr/error.hpp"
#include "rlr/grounding.hpp"
#include "rlr/ingest.hpp"
#include "rlr/pipeline.hpp"
#include "rlr/synth.hpp"
#include "test_support.hpp"

using namespace rlr;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("rlr_test_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path_ / name) << text; }

 private:
  fs::path path_;
};

const char* kManifest = R"({
  "populations": [{"name": "user", "file": "users.csv"}, {"name": "movie", "file": "movies.csv"}],
  "attributes": [
    {"name": "gender", "population": "user", "file": "users.csv", "range": "categorical"},
    {"name": "age", "population": "user", "file": "users.csv", "range": "categorical"},
    {"name": "drama", "population": "movie", "file": "movies.csv", "range": "boolean"}
  ],
  "relations": [{"name": "rated", "from": "user", "to": "movie", "file": "rated.csv"}],
  "target": {"attribute": "gender", "positive": "M"}
})";

void writeSmallDataset(const TempDir& dir) {
  dir.write("manifest.json", kManifest);
  dir.write("users.csv", "id,gender,age\nu1,M,young\nu2,F,old\nu3,,young\n");
  dir.write("movies.csv", "id,drama\nm1,true\nm2,0\n");
  dir.write("rated.csv", "user,movie,rating\nu1,m1,5\nu1,m2,1\nu2,m1,3\n");
}

}  // namespace

TEST(Ingest, LoadsManifestAndTables) {
  TempDir dir("load");
  writeSmallDataset(dir);
  const auto data = loadDatabase(loadManifest(dir.path() / "manifest.json"));
  EXPECT_EQ(data.db.populationSize("user"), 3u);
  EXPECT_EQ(data.db.relation("rated").size, 3u);
  EXPECT_EQ(data.target.variable, "u");
  EXPECT_EQ(labelOf(data.target, data.db, 0), 1);
  EXPECT_EQ(labelOf(data.target, data.db, 1), 0);
  EXPECT_EQ(labelOf(data.target, data.db, 2), std::nullopt);
  EXPECT_EQ(labelledIndividuals(data.target, data.db), (std::vector<int>{0, 1}));
  const auto f = parseFormula("rated(u,m) * drama(m)", data.db.schema());
  EXPECT_EQ(countColumn(f, data.target, data.db), (std::vector<double>{1, 1, 0}));
}

TEST(Ingest, RatingsColumnIsIgnored) {
  TempDir a("ratings_a"), b("ratings_b");
  writeSmallDataset(a);
  writeSmallDataset(b);
  b.write("rated.csv", "user,movie,rating\nu1,m1,1\nu1,m2,5\nu2,m1,2\n");
  const auto x = loadDatabase(loadManifest(a.path() / "manifest.json"));
  const auto y = loadDatabase(loadManifest(b.path() / "manifest.json"));
  EXPECT_EQ(x.db.relation("rated").forward, y.db.relation("rated").forward);
}

TEST(Ingest, UnknownIdNamesFileAndLine) {
  TempDir dir("unknown_id");
  writeSmallDataset(dir);
  dir.write("rated.csv", "user,movie\nu1,m1\nu9,m2\n");
  try {
    loadDatabase(loadManifest(dir.path() / "manifest.json"));
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("rated.csv:3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("u9"), std::string::npos) << msg;
  }
}

TEST(Ingest, DuplicateIdsAndMissingNonTargetValuesAreErrors) {
  TempDir dir("dup");
  writeSmallDataset(dir);
  dir.write("movies.csv", "id,drama\nm1,true\nm1,false\n");
  EXPECT_THROW(loadDatabase(loadManifest(dir.path() / "manifest.json")), LoadError);
  dir.write("movies.csv", "id,drama\nm1,true\nm2,\n");
  EXPECT_THROW(loadDatabase(loadManifest(dir.path() / "manifest.json")), LoadError);
  dir.write("movies.csv", "id,drama\nm1,true\nm2,maybe\n");
  EXPECT_THROW(loadDatabase(loadManifest(dir.path() / "manifest.json")), LoadError);
}

TEST(Ingest, EmptyRelationGivesZeroCounts) {
  TempDir dir("empty_rel");
  writeSmallDataset(dir);
  dir.write("rated.csv", "user,movie\n");
  const auto data = loadDatabase(loadManifest(dir.path() / "manifest.json"));
  EXPECT_EQ(data.db.relation("rated").size, 0u);
  const auto f = parseFormula("rated(u,m)", data.db.schema());
  for (double c : countColumn(f, data.target, data.db)) EXPECT_EQ(c, 0.0);
}

TEST(Ingest, MergingAndMultiClassTargets) {
  TempDir dir("merge");
  writeSmallDataset(dir);
  std::string manifest = kManifest;
  manifest.replace(manifest.find(R"("target": {"attribute": "gender", "positive": "M"})"),
                   std::string(R"("target": {"attribute": "gender", "positive": "M"})").size(),
                   R"("target": {"attribute": "age", "positive": "young"})");
  dir.write("manifest.json", manifest);
  dir.write("users.csv", "id,gender,age\nu1,M,age_1\nu2,F,age_2\nu3,F,age_3\n");
  try {
    loadDatabase(loadManifest(dir.path() / "manifest.json"));
    FAIL() << "expected a rejection of the three-class target";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("merge"), std::string::npos) << e.what();
  }
  manifest.replace(manifest.find(R"("positive": "young"})"), std::string(R"("positive": "young"})").size(),
                   R"("positive": "young", "merge": {"age_1": "young", "age_2": "young", "age_3": "old"}})");
  dir.write("manifest.json", manifest);
  const auto data = loadDatabase(loadManifest(dir.path() / "manifest.json"));
  EXPECT_EQ(labelOf(data.target, data.db, 0), 1);
  EXPECT_EQ(labelOf(data.target, data.db, 1), 1);
  EXPECT_EQ(labelOf(data.target, data.db, 2), 0);
}

TEST(Ingest, MalformedManifests) {
  EXPECT_THROW(parseManifest("{", ".", "m.json"), LoadError);
  EXPECT_THROW(parseManifest("[]", ".", "m.json"), LoadError);
  EXPECT_THROW(parseManifest(R"({"populations": [], "attributes": [], "relations": []})", ".", "m.json"), LoadError);
  EXPECT_THROW(loadManifest("/nonexistent/manifest.json"), LoadError);
}

TEST(Ingest, WriteThenLoadRoundTrip) {
  TempDir dir("roundtrip");
  const auto data = generateSynthetic(kindFriendsSpec(60, 3));
  writeDataset(data.db, data.target, dir.path());
  const auto back = loadDatabase(loadManifest(dir.path() / "manifest.json"));
  EXPECT_EQ(back.target.attribute, data.target.attribute);
  EXPECT_EQ(back.target.variable, data.target.variable);
  EXPECT_EQ(back.db.population("person").individuals, data.db.population("person").individuals);
  EXPECT_EQ(back.db.relation("friend").forward, data.db.relation("friend").forward);
  const auto f = parseFormula("friend(z,y) * kind(y)", data.db.schema());
  EXPECT_EQ(countColumn(f, back.target, back.db), countColumn(f, data.target, data.db));
  for (int i = 0; i < 60; ++i) EXPECT_EQ(labelOf(back.target, back.db, i), labelOf(data.target, data.db, i));
}

TEST(Ingest, ManifestJsonRoundTrip) {
  const auto m = parseManifest(kManifest, "/data", "m.json");
  const auto again = parseManifest(manifestToJson(m), "/data", "m2.json");
  EXPECT_EQ(manifestToJson(again), manifestToJson(m));
}

TEST(Ingest, MovieLensConverterOnATinySample) {
  TempDir raw("ml_raw"), out("ml_out");
  raw.write("u.user", "1|24|M|technician|85711\n2|53|F|other|94043\n3|30|M|writer|32067\n");
  // 24 fields: id, title, date, video date, url, then 19 genre flags.
  raw.write("u.item",
            "1|Toy Story (1995)|01-Jan-1995||http://x|0|0|0|1|1|1|0|0|0|0|0|0|0|0|0|0|0|0|0\n"
            "2|GoldenEye (1995)|01-Jan-1995||http://x|0|1|1|0|0|0|0|0|1|0|0|1|0|0|0|0|1|0|0\n");
  raw.write("u.data", "1\t1\t5\t874965758\n2\t2\t3\t876893171\n3\t1\t4\t878542960\n");
  convertMovieLens100k(raw.path(), out.path());
  const auto data = loadDatabase(loadManifest(out.path() / "manifest.json"));
  EXPECT_EQ(data.db.populationSize("user"), 3u);
  EXPECT_EQ(data.db.relation("rated").size, 3u);
  EXPECT_EQ(data.target.positiveClass, "M");
  const auto* age = data.db.schema().attribute("age");
  ASSERT_NE(age, nullptr);
  EXPECT_EQ(age->values[static_cast<std::size_t>(data.db.attribute("age").codes[0])], "age_1");
  EXPECT_EQ(age->values[static_cast<std::size_t>(data.db.attribute("age").codes[1])], "age_3");
  EXPECT_EQ(age->values[static_cast<std::size_t>(data.db.attribute("age").codes[2])], "age_2");
  EXPECT_EQ(data.db.attribute("action").codes, (std::vector<int>{0, 1}));
  EXPECT_EQ(data.db.attribute("drama").codes, (std::vector<int>{0, 1}));
  EXPECT_EQ(data.db.attribute("horror").codes, (std::vector<int>{0, 1}));
}

TEST(Config, ParsesKeysCommentsAndRepeats) {
  std::istringstream in("# comment\nseed = 7\nstructure.k_candidates = 1, 2,3\n\neval.folds=4 # trailing\nseed = 9\n");
  const auto file = ConfigFile::parse(in, "c.cfg");
  EXPECT_EQ(file.get("seed"), "9");
  EXPECT_EQ(file.all("seed"), (std::vector<std::string>{"7", "9"}));
  EXPECT_EQ(file.where("seed"), "c.cfg:6");
  PipelineConfig cfg;
  applyPipelineConfig(file, cfg);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.structure.kCandidates, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(cfg.eval.folds, 4);
  EXPECT_FALSE(cfg.hidden.has_value());
}

TEST(Config, HiddenKeysEnableHiddenFeatures) {
  std::istringstream in("hidden.count = 2\nhidden.population = movie\nsolver.standardize = false\n");
  PipelineConfig cfg;
  applyPipelineConfig(ConfigFile::parse(in), cfg);
  ASSERT_TRUE(cfg.hidden.has_value());
  EXPECT_EQ(cfg.hidden->numHidden, 2);
  EXPECT_EQ(cfg.hidden->population, "movie");
  EXPECT_FALSE(cfg.structure.solver.standardize);
}

TEST(Config, Errors) {
  std::istringstream noEquals("seed 7\n");
  EXPECT_THROW(ConfigFile::parse(noEquals, "c.cfg"), ValidationError);
  std::istringstream unknown("seed = 1\nstructure.kk = 2\n");
  const auto file = ConfigFile::parse(unknown, "c.cfg");
  try {
    file.checkKeys(pipelineConfigKeys());
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("c.cfg:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parseInt("1.5", "x"), ValidationError);
  EXPECT_THROW(parseDouble("abc", "x"), ValidationError);
  EXPECT_THROW(parseBool("maybe", "x"), ValidationError);
  EXPECT_EQ(parseDoubleList("0.5, 0.25", "x"), (std::vector<double>{0.5, 0.25}));
}

TEST(Synth, DeterministicAndSeedSensitive) {
  const auto a = generateSynthetic(kindFriendsSpec(100, 5));
  const auto b = generateSynthetic(kindFriendsSpec(100, 5));
  const auto c = generateSynthetic(kindFriendsSpec(100, 6));
  EXPECT_EQ(a.db.attribute("happy").codes, b.db.attribute("happy").codes);
  EXPECT_EQ(a.db.relation("friend").forward, b.db.relation("friend").forward);
  EXPECT_NE(a.db.relation("friend").forward, c.db.relation("friend").forward);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_TRUE(a.db.relation("friend").forward[i].end() ==
                                                    std::find(a.db.relation("friend").forward[i].begin(),
                                                              a.db.relation("friend").forward[i].end(),
                                                              static_cast<int>(i)));
}

TEST(Synth, ProbabilitiesFollowTheGenerativeModel) {
  const auto data = generateSynthetic(kindFriendsSpec(300, 2));
  const auto f = parseFormula("friend(z,y) * kind(y)", data.db.schema());
  const auto counts = countColumn(f, data.target, data.db);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    EXPECT_NEAR(data.probabilities[i], 1.0 / (1.0 + std::exp(4.5 - counts[i])), 1e-12);
    EXPECT_EQ(data.probabilities[i] > 0.5, counts[i] >= 5.0);
  }
}

TEST(Synth, ZeroWeightsGiveFairCoins) {
  auto spec = kindFriendsSpec(4000, 8);
  spec.formulas = {{"True", 0.0}};
  const auto data = generateSynthetic(spec);
  const auto rows = labelledIndividuals(data.target, data.db);
  EXPECT_NEAR(positiveRate(data.db, data.target, rows), 0.5, 0.03);
}

TEST(Synth, UnobservedAttributesAreHidden) {
  const auto data = generateSynthetic(rlr::testing::plantedLatentSpec(1, 10, 5));
  EXPECT_EQ(data.db.schema().attribute("latent"), nullptr);
  EXPECT_NE(data.full.schema().attribute("latent"), nullptr);
}

TEST(Synth, ConfigSpec) {
  std::istringstream in(
      "synth.population = person 30\n"
      "synth.attribute = kind person boolean 0.5\n"
      "synth.attribute = happy person boolean\n"
      "synth.relation = friend person person 0.1\n"
      "synth.target = happy person z true\n"
      "synth.wf = -1 True\n"
      "synth.wf = 0.5 friend(z,y) * kind(y)\n");
  const auto file = ConfigFile::parse(in, "s.cfg");
  file.checkKeys(synthConfigKeys());
  const auto data = generateSynthetic(synthFromConfig(file, 4));
  EXPECT_EQ(data.db.populationSize("person"), 30u);
  std::istringstream bad("synth.population = person\n");
  EXPECT_THROW(synthFromConfig(ConfigFile::parse(bad, "b.cfg"), 0), ValidationError);
}

TEST(Synth, FormulaOnTheTargetIsRejected) {
  auto spec = kindFriendsSpec(10, 1);
  spec.formulas.push_back({"friend(z,y) * happy(y)", 1.0});
  EXPECT_THROW(generateSynthetic(spec), ValidationError);
}
