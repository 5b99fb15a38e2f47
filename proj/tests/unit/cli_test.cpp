#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "strapsim/cli/app.hpp"
#include "strapsim/ingest/csv.hpp"

namespace fs = std::filesystem;
using strapsim::cli::run;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("strapsim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

  int invoke(std::vector<std::string> args) const {
    args.insert(args.begin(), "strapsim");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run(static_cast<int>(argv.size()), argv.data());
  }

  void write_worked_example() const {
    write("holdings.csv",
          "portfolio_id,constituent_id,weight\n"
          "reference,orange,0.20\nreference,yellow,0.30\nreference,green,0.05\nreference,purple,0.45\n"
          "candidate,orange,0.25\ncandidate,yellow,0.40\ncandidate,green,0.07\ncandidate,pink,0.03\n");
    write("colors.csv",
          "id,orange,yellow,green,purple,pink\n"
          "orange,1,0,0,0,0\nyellow,0,1,0,0,0\ngreen,0,0,1,0,0\npurple,0,0,0,1,0.98\npink,0,0,0,0.98,1\n");
  }

  fs::path dir_;
};

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files[fs::relative(entry.path(), root).string()] = strapsim::ingest::read_file(entry.path());
  }
  return files;
}

double pair_score(const std::string& pairs_csv, const std::string& a, const std::string& b, const std::string& metric) {
  const auto doc = strapsim::ingest::parse_csv(pairs_csv);
  for (const auto& r : doc.records) {
    if (r.cells[0] == a && r.cells[1] == b && r.cells[2] == metric) return std::stod(r.cells[3]);
  }
  ADD_FAILURE() << "no row " << a << "," << b << "," << metric;
  return -1.0;
}

}  // namespace

TEST_F(CliTest, WorkedExampleSimilarity) {
  write_worked_example();
  ASSERT_EQ(invoke({"similarity", "--holdings", path("holdings.csv"), "--matrix", path("colors.csv"), "--metric",
                    "strapsim,jaccard", "--normalize", "no", "--out", path("out")}),
            0);
  const auto pairs = strapsim::ingest::read_file(path("out/pairs.csv"));
  EXPECT_NEAR(pair_score(pairs, "reference", "candidate", "strapsim"), 0.5794, 1e-9);
  EXPECT_NEAR(pair_score(pairs, "reference", "candidate", "jaccard"), 3.0 / 5.0, 1e-12);
  EXPECT_TRUE(fs::exists(path("out/matrix-strapsim.csv")));
  EXPECT_TRUE(fs::exists(path("out/residuals-strapsim.csv")));
  EXPECT_TRUE(fs::exists(path("out/run-config.json")));
}

TEST_F(CliTest, IdenticalPortfoliosScoreOne) {
  write("holdings.csv", "portfolio_id,constituent_id,weight\na,x,0.3\na,y,0.7\nb,x,0.3\nb,y,0.7\n");
  write("m.csv", "id,x,y\nx,1,0.2\ny,0.2,1\n");
  ASSERT_EQ(invoke({"similarity", "--holdings", path("holdings.csv"), "--matrix", path("m.csv"), "--metric", "all",
                    "--out", path("out")}),
            0);
  const auto pairs = strapsim::ingest::read_file(path("out/pairs.csv"));
  for (const char* metric : {"jaccard", "weighted-jaccard", "bertscore", "strapsim"}) {
    EXPECT_NEAR(pair_score(pairs, "a", "b", metric), 1.0, 1e-12) << metric;
  }
}

TEST_F(CliTest, JsonFormat) {
  write_worked_example();
  ASSERT_EQ(invoke({"similarity", "--holdings", path("holdings.csv"), "--matrix", path("colors.csv"), "--metric",
                    "strapsim", "--format", "json", "--out", path("out")}),
            0);
  EXPECT_TRUE(nlohmann::json::accept(strapsim::ingest::read_file(path("out/pairs.json"))));
  EXPECT_TRUE(fs::exists(path("out/matrix-strapsim.json")));
}

TEST_F(CliTest, ValidationFailuresExitTwo) {
  write_worked_example();
  EXPECT_EQ(invoke({"similarity", "--holdings", path("holdings.csv"), "--metric", "strapsim", "--out", path("o1")}), 2);
  EXPECT_FALSE(fs::exists(path("o1")));
  EXPECT_EQ(invoke({"experiment", "--dataset", "nope", "--out", path("o2")}), 2);
  EXPECT_EQ(invoke({"similarity", "--holdings", path("missing.csv"), "--metric", "jaccard", "--out", path("o3")}), 2);
  EXPECT_EQ(invoke({"similarity", "--holdings", path("holdings.csv"), "--metric", "cosine", "--out", path("o4")}), 2);
  EXPECT_EQ(invoke({"similarity", "--bogus-flag"}), 2);
  EXPECT_EQ(invoke({}), 2);
  write("neg.csv", "portfolio_id,constituent_id,weight\na,x,-1\n");
  EXPECT_EQ(invoke({"similarity", "--holdings", path("neg.csv"), "--metric", "jaccard", "--out", path("o5")}), 2);
}

TEST_F(CliTest, JsonErrors) {
  ::testing::internal::CaptureStderr();
  const int code = invoke({"--json-errors", "experiment", "--dataset", "nope", "--out", path("o")});
  const std::string err = ::testing::internal::GetCapturedStderr();
  EXPECT_EQ(code, 2);
  const auto line = err.substr(err.rfind('{'));
  const auto doc = nlohmann::json::parse(line.substr(0, line.find('\n')));
  EXPECT_EQ(doc.at("exit_code"), 2);
  EXPECT_EQ(doc.at("error"), "InvalidArgument");
  EXPECT_NE(doc.at("message").get<std::string>().find("nope"), std::string::npos);
}

TEST_F(CliTest, GenerateSyntheticIsByteIdenticalAndReplays) {
  const std::vector<std::string> args{"generate-synthetic", "--portfolios", "6", "--constituents", "200",
                                      "--holdings-per-portfolio", "20", "--seed", "5"};
  auto first = args, second = args;
  first.insert(first.end(), {"--out", path("a")});
  second.insert(second.end(), {"--out", path("b")});
  ASSERT_EQ(invoke(first), 0);
  ASSERT_EQ(invoke(second), 0);
  const auto a = read_tree(path("a")), b = read_tree(path("b"));
  EXPECT_EQ(a.size(), 6u);
  // run-config.json names its own output directory; data files must match exactly.
  for (const auto& [name, text] : a) {
    if (name != "run-config.json") EXPECT_EQ(text, b.at(name)) << name;
  }
  ASSERT_EQ(invoke({"--config", path("a/run-config.json"), "--config-out", path("c")}), 0);
  for (const auto& [name, text] : read_tree(path("c"))) {
    if (name != "run-config.json") EXPECT_EQ(text, a.at(name)) << name;
  }
}

TEST_F(CliTest, SimilarityFromGeneratedUniverseIsDeterministic) {
  ASSERT_EQ(invoke({"generate-synthetic", "--portfolios", "5", "--constituents", "120", "--holdings-per-portfolio",
                    "15", "--out", path("u")}),
            0);
  ASSERT_EQ(invoke({"proximity", "--features", path("u/constituents.csv"), "--target", "oas,yield", "--holdings",
                    path("u/holdings.csv"), "--trees", "20", "--depth", "5", "--out", path("p")}),
            0);
  for (const char* out : {"s1", "s2"}) {
    ASSERT_EQ(invoke({"similarity", "--holdings", path("u/holdings.csv"), "--matrix", path("p/proximity.csv"),
                      "--metric", "all", "--threads", out == std::string("s1") ? "1" : "3", "--out", path(out)}),
              0);
  }
  const auto s1 = read_tree(path("s1")), s2 = read_tree(path("s2"));
  for (const auto& [name, text] : s1) {
    if (name != "run-config.json") EXPECT_EQ(text, s2.at(name)) << name;
  }
  ASSERT_EQ(invoke({"similarity", "--holdings", path("u/holdings.csv"), "--model", path("p/model.json"),
                    "--features", path("u/constituents.csv"), "--metric", "strapsim", "--out", path("s3")}),
            0);
  EXPECT_EQ(strapsim::ingest::read_file(path("s3/matrix-strapsim.csv")), s1.at("matrix-strapsim.csv"));
}

TEST_F(CliTest, ExperimentReplayIsByteIdentical) {
  ASSERT_EQ(invoke({"experiment", "--dataset", "iris", "--data-dir", STRAPSIM_DATA_DIR, "--k-sweep", "1,5",
                    "--metric", "jaccard,strapsim", "--out", path("e1")}),
            0);
  ASSERT_EQ(invoke({"--config", path("e1/run-config.json"), "--config-out", path("e2")}), 0);
  const auto e1 = read_tree(path("e1")), e2 = read_tree(path("e2"));
  ASSERT_EQ(e1.size(), e2.size());
  for (const auto& [name, text] : e1) {
    if (name != "run-config.json") EXPECT_EQ(text, e2.at(name)) << name;
  }
  const auto config = nlohmann::json::parse(e1.at("run-config.json"));
  EXPECT_EQ(config.at("k"), 5);
  EXPECT_EQ(config.at("folds"), 10);
}

TEST_F(CliTest, MovieExperimentHonoursCaps) {
  ASSERT_EQ(invoke({"experiment", "--dataset", "movies", "--data-dir", STRAPSIM_DATA_DIR, "--users", "8", "--movies",
                    "60", "--metric", "jaccard,strapsim", "--out", path("m")}),
            0);
  const auto config = nlohmann::json::parse(strapsim::ingest::read_file(path("m/run-config.json")));
  EXPECT_EQ(config.at("users"), 8);
  EXPECT_EQ(config.at("movies"), 60);
  EXPECT_EQ(config.at("k"), 20);
  const auto table = strapsim::ingest::parse_csv(strapsim::ingest::read_file(path("m/table.csv")));
  EXPECT_EQ(table.header, (std::vector<std::string>{"metric", "rmse", "mape", "mae"}));
  EXPECT_EQ(table.records.size(), 2u);
  const auto residuals = strapsim::ingest::parse_csv(strapsim::ingest::read_file(path("m/residuals-users.csv")));
  EXPECT_EQ(residuals.records.size(), 8u);
}
