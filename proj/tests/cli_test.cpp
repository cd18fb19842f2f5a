#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "disent/cli.hpp"
#include "disent/io.hpp"

using namespace disent;
using cli::Json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

Json payload_of(const Result& r) { return Json::parse(r.out).at("payload"); }

/// path -> value cells of a path,value CSV body.
std::map<std::string, std::string> csv_pairs(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream is(text);
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    out[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return out;
}

class DensityFileTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("disent_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

}  // namespace

TEST(CliCountTest, FlagsMismatchedRows) {
  const auto r = invoke({"count", "--n", "7"});
  EXPECT_EQ(r.code, cli::kExitFlagged);
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j.at("status"), "flagged");
  const auto& rows = j.at("payload").at("rows");
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[3].at("canonical_count"), "51");
  EXPECT_EQ(rows[3].at("paper_count"), 66);
  EXPECT_EQ(rows[3].at("mismatch"), true);
  EXPECT_EQ(rows[5].at("ratio_to_previous"), "438/101");
  EXPECT_TRUE(j.at("payload").at("mismatch").get<bool>());
}

TEST(CliCountTest, SmallTableIsOk) {
  const auto r = invoke({"count", "--n", "4"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_EQ(payload_of(r).at("rows")[2].at("canonical_count"), "14");
}

TEST(CliCountTest, LargeCountsAreExactStrings) {
  // Bell(30) = 846749014511809332450147.
  const auto r = invoke({"count", "--n", "30"});
  EXPECT_EQ(payload_of(r).at("rows").back().at("canonical_count"), "846749014511809332450146");
}

TEST(CliEnumerateTest, ListsFamilies) {
  const auto r = invoke({"enumerate", "--n", "3"});
  EXPECT_EQ(r.code, cli::kExitOk);
  const auto p = payload_of(r);
  EXPECT_EQ(p.at("count"), 4);
  std::vector<std::string> notation;
  for (const auto& f : p.at("families")) notation.push_back(f.at("notation"));
  EXPECT_EQ(notation, (std::vector<std::string>{"{01}{2}", "{02}{1}", "{0}{12}", "{0}{1}{2}"}));

  const auto all = invoke({"enumerate", "--n", "3", "--include-single-block"});
  EXPECT_EQ(payload_of(all).at("families").size(), 5u);
}

TEST(CliVerifyClaimsTest, ReportsComparisonAndWitnesses) {
  const auto r = invoke({"verify-claims", "--trials", "20", "--seed", "3"});
  EXPECT_EQ(r.code, cli::kExitFlagged);
  const auto p = payload_of(r);
  EXPECT_LE(p.at("eq5_counterexample").at("max_abs_deviation").get<double>(), 1e-12);
  EXPECT_EQ(p.at("eq6_trials").at("rhs_violations"), 0);
  EXPECT_EQ(p.at("eq6_trials").at("lhs_violations"), 0);
  EXPECT_TRUE(p.at("count_mismatch").get<bool>());
  const auto& table = p.at("counting_comparison");
  std::map<int, std::pair<std::string, Json>> by_n;
  for (const auto& row : table) by_n[row.at("n")] = {row.at("canonical_count"), row.at("paper_count")};
  EXPECT_EQ(by_n[5], std::make_pair(std::string("51"), Json(66)));
  EXPECT_EQ(by_n[6], std::make_pair(std::string("202"), Json(332)));
  EXPECT_EQ(by_n[7], std::make_pair(std::string("876"), Json(1681)));
}

TEST(CliVerifyClaimsTest, RejectsOtherPartyCounts) {
  const auto r = invoke({"verify-claims", "--n", "4"});
  EXPECT_EQ(r.code, cli::kExitError);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(CliReeTest, BellConverges) {
  const auto r = invoke({"ree", "--target", "bell", "--families", "fully-product"});
  EXPECT_EQ(r.code, cli::kExitOk);
  const auto j = Json::parse(r.out);
  const auto& p = j.at("payload");
  EXPECT_NEAR(p.at("value").get<double>(), std::log(2.0), 5e-3);
  EXPECT_TRUE(p.at("converged").get<bool>());
  EXPECT_TRUE(j.at("timing").contains("wall_time"));
  double total = 0.0;
  for (const auto& s : p.at("support")) total += s.at("weight").get<double>();
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(CliReeTest, NonConvergenceIsFlagged) {
  const auto r = invoke({"ree", "--target", "bell", "--max-iterations", "3"});
  EXPECT_EQ(r.code, cli::kExitFlagged);
  EXPECT_FALSE(payload_of(r).at("converged").get<bool>());
}

TEST(CliErrorsTest, BadInvocations) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"count", "--n", "1"},
           {"count", "--n", "65"},
           {"enumerate", "--n", "15"},
           {"ree", "--target", "nonsense"},
           {"ree", "--target", "bell", "--families", "0/12"},
           {"ree", "--target", "ghz", "--n", "5"},
           {"bench", "--n-list", "15"},
           {"count", "--n", "3", "--format", "xml"},
           {"frobnicate"},
           {}}) {
    const auto r = invoke(args);
    EXPECT_EQ(r.code, cli::kExitError) << (args.empty() ? "<none>" : args[0]);
    EXPECT_NE(r.err.find("error"), std::string::npos);
  }
}

TEST(CliErrorsTest, HelpAndVersionSucceed) {
  EXPECT_EQ(invoke({"--help"}).code, cli::kExitOk);
  EXPECT_EQ(invoke({"ree", "--help"}).code, cli::kExitOk);
  const auto v = invoke({"--version"});
  EXPECT_EQ(v.code, cli::kExitOk);
  EXPECT_NE((v.out + v.err).find(DISENT_VERSION), std::string::npos);
}

TEST_F(DensityFileTest, LoadDensityVerdicts) {
  const auto ok = dir_ / "mixed.txt";
  save_density(ok, DensityMatrix::maximally_mixed(2));
  EXPECT_EQ(load_density(ok).data(), DensityMatrix::maximally_mixed(2).data());

  const auto short_trace = dir_ / "short.txt";
  {
    std::ofstream f(short_trace);
    f << "n=1\n# trace 0.9\n0 0 0.5 0\n1 1 0.4 0\n";
  }
  try {
    load_density(short_trace);
    FAIL() << "expected input_error";
  } catch (const input_error& e) {
    EXPECT_NE(std::string(e.what()).find("trace"), std::string::npos);
  }

  const auto unordered = dir_ / "unordered.txt";
  {
    std::ofstream f(unordered);
    f << "n=1\n1 1 0.5 0\n0 0 0.5 0\n";
  }
  EXPECT_THROW(load_density(unordered), input_error);
}

TEST_F(DensityFileTest, DensityRoundTripIsExact) {
  const auto path = dir_ / "ghz.txt";
  const auto ghz = named_state("ghz", 3);
  save_density(path, ghz);
  EXPECT_EQ((load_density(path).data() - ghz.data()).cwiseAbs().maxCoeff(), 0.0);

  const auto random = sample_ginibre_density(2, 17);
  save_density(path, random);
  EXPECT_EQ(load_density(path).data(), random.data());
}

TEST_F(DensityFileTest, TargetFileAndOutputFile) {
  const auto target = dir_ / "bell.txt";
  save_density(target, named_state("phi+", 2));
  const auto report = dir_ / "report.json";
  const auto r = invoke({"ree", "--target", target.string(), "--families", "fully-product", "--gap-tolerance",
                         "0.05", "-o", report.string()});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(report);
  const auto j = Json::parse(in);
  EXPECT_EQ(j.at("payload").at("n"), 2);
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    EXPECT_EQ(entry.path().string().find(".tmp"), std::string::npos) << entry.path();
  }
}

TEST(EnvelopeTest, JsonRoundTrip) {
  const auto r = invoke({"count", "--n", "7", "--seed", "12"});
  const auto j = Json::parse(r.out);
  const auto e = cli::ReportEnvelope::from_json(j);
  EXPECT_EQ(e.seed, 12u);
  EXPECT_EQ(e.status, cli::Status::flagged);
  EXPECT_EQ(e.to_json(), j);
  EXPECT_EQ(cli::ReportEnvelope::from_json(e.to_json()), e);
  EXPECT_EQ(e.to_json().dump(2) + "\n", r.out);
}

TEST(EnvelopeTest, CsvCarriesTheSameNumbers) {
  const std::vector<std::string> base{"ree", "--target", "bell", "--families", "fully-product", "--gap-tolerance",
                                      "0.05"};
  auto json_args = base;
  auto csv_args = base;
  csv_args.insert(csv_args.end(), {"--format", "csv"});
  const auto p = payload_of(invoke(json_args));
  const auto cells = csv_pairs(invoke(csv_args).out);
  EXPECT_EQ(std::stod(cells.at("value")), p.at("value").get<double>());
  EXPECT_EQ(std::stod(cells.at("final_gap")), p.at("final_gap").get<double>());
  EXPECT_EQ(std::stoi(cells.at("iterations")), p.at("iterations").get<int>());
  const auto& history = p.at("objective_history");
  for (std::size_t k = 0; k < history.size(); ++k) {
    EXPECT_EQ(std::stod(cells.at("objective_history[" + std::to_string(k) + "]")), history[k].get<double>());
  }
}

TEST(EnvelopeTest, RepeatedRunsAreByteIdentical) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"verify-claims", "--trials", "10", "--seed", "5"},
           {"ree", "--target", "w", "--families", "fully-product", "--gap-tolerance", "0.05", "--seed", "4"},
           {"enumerate", "--n", "5"}}) {
    const auto a = payload_of(invoke(args)).dump();
    const auto b = payload_of(invoke(args)).dump();
    EXPECT_EQ(a, b) << args[0];
  }
}
