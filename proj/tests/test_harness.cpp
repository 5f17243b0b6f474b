#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "fieldtail/config.hpp"
#include "fieldtail/error.hpp"
#include "fieldtail/experiment.hpp"

using namespace fieldtail;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / ("fieldtail_" + std::string(info->test_suite_name()) + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string str() const { return path_.string(); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_files(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.is_regular_file();
  return n;
}

json quadratic_json(const std::string& out) {
  return json{{"kind", "saddle-pathwise"},
              {"lambdas", {25, 50, 100, 200, 400}},
              {"output_dir", out},
              {"field", {{"domain", {{"lower", {-1}}, {"upper", {1}}}}, {"mean", {{"2", -0.5}}}}}};
}

json trig_json(const std::string& kind, const std::string& out, int replicates) {
  json terms = json::array();
  for (int k = 1; k <= 3; ++k) {
    for (double ph : {0.0, -1.5707963267948966}) {
      terms.push_back({{"frequency", {k}}, {"phase", {ph}}, {"law", "gaussian"}, {"params", {{"sd", 1.0 / k}}}});
    }
  }
  return json{{"kind", kind},
              {"seed", 7},
              {"replicates", replicates},
              {"lambdas", {5, 10, 20}},
              {"output_dir", out},
              {"field", {{"domain", {{"lower", {0}}, {"upper", {1}}}}, {"terms", terms}}}};
}

// Peaked mean with small Gaussian perturbations; keeps the MGF weights
// spread out at moderate lambda.
json bump_json(const std::string& kind, const std::string& out, int replicates) {
  json terms = json::array();
  for (auto [k, sd] : {std::pair{1, 0.015}, std::pair{2, 0.005}}) {
    for (double ph : {0.0, -1.5707963267948966}) {
      terms.push_back({{"frequency", {k}}, {"phase", {ph}}, {"law", "gaussian"}, {"params", {{"sd", sd}}}});
    }
  }
  return json{{"kind", kind},
              {"seed", 11},
              {"replicates", replicates},
              {"lambdas", {10, 20, 40}},
              {"output_dir", out},
              {"field", {{"domain", {{"lower", {0}}, {"upper", {1}}}}, {"mean", {{"0", -1}, {"1", 4}, {"2", -4}}}, {"terms", terms}}}};
}

}  // namespace

TEST(Config, ParsesQuadraticSpec) {
  const ExperimentConfig c = config_from_json(quadratic_json("out"));
  EXPECT_EQ(c.kind, ExperimentKind::SaddlePathwise);
  EXPECT_EQ(c.lambdas.size(), 5u);
  ASSERT_TRUE(c.has_field);
  EXPECT_EQ(c.field.mean.size(), 1u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, RoundTripsThroughJson) {
  const ExperimentConfig c = config_from_json(trig_json("theorem1", "o", 100));
  EXPECT_EQ(config_to_json(config_from_json(config_to_json(c))), config_to_json(c));
}

TEST(Config, UnknownKeyIsRejected) {
  json j = quadratic_json("out");
  j["lambda"] = {1, 2};
  try {
    config_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
  }
  json k = quadratic_json("out");
  k["field"]["extra"] = 1;
  EXPECT_THROW(config_from_json(k), Error);
}

TEST(Config, WrongTypeIsRejected) {
  json j = quadratic_json("out");
  j["lambdas"] = "25";
  try {
    config_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
  }
}

TEST(Config, UnknownKind) {
  json j = quadratic_json("out");
  j["kind"] = "theorem2";
  EXPECT_THROW(config_from_json(j), Error);
}

TEST(Config, ValidationRules) {
  ExperimentConfig c = config_from_json(trig_json("norms", "o", 1));
  EXPECT_THROW(c.validate(), Error);
  ExperimentConfig e = config_from_json(trig_json("entropy", "o", 1));
  e.entropy.grid_points = 1;
  EXPECT_THROW(e.validate(), Error);
  ExperimentConfig t = config_from_json(trig_json("theorem1", "o", 100));
  t.lambdas.clear();
  EXPECT_THROW(t.validate(), Error);
}

TEST(Run, UnsortedLambdasWriteNothing) {
  TempDir d;
  json j = quadratic_json(d.str());
  j["lambdas"] = {100, 50};
  const RunOutcome r = run_experiment(config_from_json(j));
  EXPECT_EQ(r.exit_code, kExitValidation);
  ASSERT_TRUE(r.error_code.has_value());
  EXPECT_TRUE(is_validation_error(*r.error_code));
  EXPECT_EQ(count_files(d.path()), 0u);
}

TEST(Run, DeterministicQuadratic) {
  TempDir d;
  const RunOutcome r = run_experiment(config_from_json(quadratic_json(d.str())));
  ASSERT_EQ(r.exit_code, kExitOk) << r.error;
  const std::string csv = slurp(r.csv_path);
  std::istringstream in(csv);
  std::string line, last;
  std::getline(in, line);
  EXPECT_EQ(line, "replicate_id,lambda,M,x0,interior,nondegenerate,log_I,log_approx,log_approx_printed,ratio");
  int rows = 0;
  while (std::getline(in, line)) {
    last = line;
    ++rows;
  }
  EXPECT_EQ(rows, 5);
  const double ratio = std::stod(last.substr(last.rfind(',') + 1));
  EXPECT_NEAR(ratio, 1.0, 0.005);

  const json m = json::parse(slurp(r.manifest_path));
  EXPECT_EQ(m.at("status"), "ok");
  EXPECT_EQ(m.at("kind"), "saddle-pathwise");
  EXPECT_EQ(m.at("input_hash").get<std::string>().size(), 40u);
  EXPECT_TRUE(m.contains("wall_time_seconds"));
}

TEST(Run, ByteIdenticalReruns) {
  TempDir d;
  const ExperimentConfig c = config_from_json(trig_json("saddle-pathwise", d.str(), 20));
  const RunOutcome a = run_experiment(c);
  const RunOutcome b = run_experiment(c);
  ASSERT_EQ(a.exit_code, kExitOk) << a.error;
  ASSERT_EQ(b.exit_code, kExitOk) << b.error;
  EXPECT_NE(a.csv_path, b.csv_path);
  EXPECT_EQ(slurp(a.csv_path), slurp(b.csv_path));
}

TEST(Run, SeedOverrideChangesOutput) {
  TempDir d;
  const ExperimentConfig c = config_from_json(trig_json("saddle-pathwise", d.str(), 10));
  const RunOutcome a = run_experiment(c);
  const RunOutcome b = run_experiment(c, 8);
  ASSERT_EQ(b.exit_code, kExitOk) << b.error;
  EXPECT_NE(slurp(a.csv_path), slurp(b.csv_path));
  EXPECT_EQ(json::parse(slurp(b.manifest_path)).at("seed"), 8);
}

TEST(Run, NeverOverwrites) {
  TempDir d;
  const ExperimentConfig c = config_from_json(quadratic_json(d.str()));
  std::set<std::string> seen;
  for (int i = 0; i < 3; ++i) {
    const RunOutcome r = run_experiment(c);
    ASSERT_EQ(r.exit_code, kExitOk);
    EXPECT_TRUE(seen.insert(r.csv_path).second);
    EXPECT_TRUE(seen.insert(r.manifest_path).second);
  }
  EXPECT_EQ(count_files(d.path()), 6u);
}

TEST(Run, NumericFailureLeavesPartial) {
  TempDir d;
  json j = trig_json("theorem1", d.str(), 50);
  j["min_ess"] = 1e6;
  const RunOutcome r = run_experiment(config_from_json(j));
  EXPECT_EQ(r.exit_code, kExitNumeric);
  ASSERT_TRUE(r.error_code.has_value());
  EXPECT_EQ(*r.error_code, ErrorCode::EffectiveSampleSizeTooSmall);
  EXPECT_TRUE(r.csv_path.ends_with(".csv.partial"));
  EXPECT_TRUE(fs::exists(r.csv_path));
  const json m = json::parse(slurp(r.manifest_path));
  EXPECT_NE(m.at("status"), "ok");
  EXPECT_FALSE(m.at("error").is_null());
}

TEST(Run, ManifestIsAcceptedAsConfig) {
  TempDir d;
  const RunOutcome a = run_experiment(config_from_json(quadratic_json(d.str())));
  ASSERT_EQ(a.exit_code, kExitOk);
  const ExperimentConfig c = load_config(a.manifest_path);
  const RunOutcome b = run_experiment(c);
  ASSERT_EQ(b.exit_code, kExitOk);
  EXPECT_EQ(slurp(a.csv_path), slurp(b.csv_path));
  EXPECT_EQ(json::parse(slurp(a.manifest_path)).at("input_hash"), json::parse(slurp(b.manifest_path)).at("input_hash"));
}

TEST(Run, MissingConfigFileIsIo) {
  try {
    load_config("/nonexistent/config.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}

TEST(GitBlobHash, KnownValues) {
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Summarize, Theorem1Table) {
  TempDir d;
  const RunOutcome r = run_experiment(config_from_json(bump_json("theorem1", d.str(), 500)));
  ASSERT_EQ(r.exit_code, kExitOk) << r.error;
  const SummaryOutcome s = summarize(d.str());
  EXPECT_EQ(s.files, 1u);
  EXPECT_EQ(s.skipped_rows, 0u);
  const std::string md = slurp(s.report_path);
  EXPECT_NE(md.find("## theorem1"), std::string::npos);
  EXPECT_NE(md.find("| lambda | n | ess | ratio"), std::string::npos);
  EXPECT_NE(md.find("verdict:"), std::string::npos);
}

TEST(Summarize, MixedKindsAndCorruptRow) {
  TempDir d;
  ASSERT_EQ(run_experiment(config_from_json(quadratic_json(d.str()))).exit_code, kExitOk);
  const RunOutcome c = run_experiment(config_from_json(bump_json("corollary1", d.str(), 200)));
  ASSERT_EQ(c.exit_code, kExitOk) << c.error;
  {
    std::ofstream out(c.csv_path, std::ios::app);
    out << "garbage,row\n";
  }
  const SummaryOutcome s = summarize(d.str());
  EXPECT_EQ(s.files, 2u);
  EXPECT_EQ(s.skipped_rows, 1u);
  const std::string md = slurp(s.report_path);
  EXPECT_NE(md.find("## saddle-pathwise"), std::string::npos);
  EXPECT_NE(md.find("## corollary1"), std::string::npos);
  EXPECT_NE(md.find("1 corrupt row(s) skipped"), std::string::npos);
}

TEST(Summarize, IgnoresPartialFiles) {
  TempDir d;
  json j = trig_json("theorem1", d.str(), 50);
  j["min_ess"] = 1e6;
  ASSERT_EQ(run_experiment(config_from_json(j)).exit_code, kExitNumeric);
  EXPECT_THROW(summarize(d.str()), Error);
}

TEST(Summarize, EmptyDirectory) {
  TempDir d;
  try {
    summarize(d.str());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyDirectory);
  }
}
