#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "orbi/cli.hpp"

namespace orbi {
namespace {

struct CliRun {
  int status;
  std::string out;
  std::string err;
};

CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  int s = cli::run(args, out, err);
  return {s, out.str(), err.str()};
}

bool contains(const std::string& text, const std::string& part) { return text.find(part) != std::string::npos; }

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).status, cli::usage);
  EXPECT_EQ(run({"bogus"}).status, cli::usage);
  EXPECT_EQ(run({"validate", "--samples", "-3", "mirror"}).status, cli::usage);
  CliRun missing = run({"validate", "/nonexistent/atlas.json"});
  EXPECT_EQ(missing.status, cli::usage);
  EXPECT_TRUE(contains(missing.err, "ParseError")) << missing.err;
  EXPECT_EQ(run({"validate", "no-such-fixture"}).status, cli::usage);
}

TEST(Cli, ParseErrorInFileExitsTwo) {
  const auto path = std::filesystem::temp_directory_path() / "orbi_cli_bad.json";
  std::ofstream(path) << R"({"name": "bad", "charts": [{"id": "A", "dim": 2, "region": {"kind": "full"},
    "group": {"scalarMode": "exact", "generators": [[["0.5","0"],["0","1"]]]}}]})";
  CliRun r = run({"validate", path.string()});
  EXPECT_EQ(r.status, cli::usage);
  EXPECT_TRUE(contains(r.err, "ParseError")) << r.err;
  std::filesystem::remove(path);
}

TEST(Cli, ValidFixturesExitZero) {
  CliRun r = run({"validate", "bad-union-F-union-Fsecond"});
  EXPECT_EQ(r.status, cli::ok) << r.out;
  EXPECT_TRUE(contains(r.out, "valid=true"));
}

TEST(Cli, BadUnionReportsMonodromy) {
  CliRun r = run({"validate", "bad-union-F-union-Fprime"});
  EXPECT_EQ(r.status, cli::violations);
  EXPECT_TRUE(contains(r.out, "condition (2): no injection (monodromy -I)")) << r.out;
}

TEST(Cli, StructureGroupAtConePoint) {
  CliRun r = run({"structure-group", "teardrop(3)", "--point", "0,0", "--chart", "cone"});
  EXPECT_EQ(r.status, cli::ok);
  EXPECT_TRUE(contains(r.out, "group.order=3")) << r.out;
  EXPECT_TRUE(contains(r.out, "group.reflection_free=true"));
}

TEST(Cli, Example2Demo) {
  CliRun r = run({"demo", "example2", "--radius", "0.25"});
  EXPECT_EQ(r.status, cli::violations);
  EXPECT_TRUE(contains(r.out, "NonLiftable: annuli n=4 (trivial), n=5 (identity)")) << r.out;
}

TEST(Cli, OutputIsDeterministic) {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"validate", "bad-union-F-union-Fprime"},
        std::vector<std::string>{"compare", "bad-union-F", "bad-union-Fprime"},
        std::vector<std::string>{"demo", "example2", "--radius", "0.25"}}) {
    CliRun a = run(args);
    CliRun b = run(args);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.out, b.out) << args[0];
  }
}

TEST(Cli, JsonReportMatchesText) {
  const auto path = std::filesystem::temp_directory_path() / "orbi_cli_report.json";
  CliRun r = run({"structure-group", "teardrop(3)", "--point", "0,0", "--chart", "cone", "--out", path.string()});
  ASSERT_EQ(r.status, cli::ok);
  std::ifstream in(path);
  nlohmann::json j = nlohmann::json::parse(in);
  EXPECT_EQ(j["summary"]["order"], "3");
  bool found = false;
  for (const auto& rec : j["records"]) found = found || (rec[0] == "group.order" && rec[1] == "3");
  EXPECT_TRUE(found);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace orbi
