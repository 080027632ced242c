#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "oracles.hpp"

using namespace casray;
using namespace casray::cli;

static const char* kForceHeader =
    "a,s,h,F_even,F_odd,F_pfa,F_neumann,F_dirichlet,F_total,"
    "F_total_over_Fpfa,converged,orders";

TEST_CASE("grid parsing") {
  auto g = parseGrid("0:1:0.25");
  REQUIRE(g.size() == 5);
  CHECK(g.front() == 0.0);
  CHECK(g[2] == doctest::Approx(0.5));
  CHECK(g.back() == doctest::Approx(1.0));

  g = parseGrid("1:1:0.5");
  REQUIRE(g.size() == 1);
  CHECK(g[0] == 1.0);

  CHECK_THROWS_AS(parseGrid("nonsense"), UsageError);
  CHECK_THROWS_AS(parseGrid("0:1"), UsageError);
  CHECK_THROWS_AS(parseGrid("0:1:0"), UsageError);
  CHECK_THROWS_AS(parseGrid("0:1:-0.1"), UsageError);
  CHECK_THROWS_AS(parseGrid("1:0:0.1"), UsageError);
  CHECK_THROWS_AS(parseGrid("0:1:0.1x"), UsageError);
}

TEST_CASE("argument parsing") {
  const RunConfig cfg = parseArgs({"force", "--a", "2", "--s", "0.5", "--h",
                                   "0.1", "--tol", "1e-3", "--max-order", "9",
                                   "--format", "json", "--threads", "2"});
  CHECK(cfg.command == Command::Force);
  CHECK(cfg.a == 2.0);
  CHECK(cfg.s == 0.5);
  CHECK(cfg.h == 0.1);
  CHECK(cfg.tolerance == 1e-3);
  CHECK(cfg.maxOrder == 9);
  CHECK(cfg.format == Format::Json);
  CHECK(cfg.threads == 2);

  const RunConfig d = parseArgs({"energy"});
  CHECK(d.command == Command::Energy);
  CHECK(d.a == 1.0);
  CHECK(d.s == 1.0);
  CHECK(d.h == 0.25);
  CHECK(d.format == Format::Csv);

  const RunConfig sh = parseArgs({"sweep-h", "--h-grid", "0:0.5:0.1"});
  CHECK(sh.command == Command::SweepH);
  CHECK(sh.hGrid.size() == 6);

  const RunConfig sa =
      parseArgs({"sweep-a", "--a-grid", "1:4:1", "--normalize", "piston"});
  CHECK(sa.command == Command::SweepA);
  CHECK(sa.aGrid.size() == 4);
  CHECK(sa.normalize == assembly::Normalization::PistonAtSameA);
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(parseArgs({}), UsageError);               // no subcommand
  CHECK_THROWS_AS(parseArgs({"frobnicate"}), UsageError);   // unknown
  CHECK_THROWS_AS(parseArgs({"force", "--bogus"}), UsageError);
  CHECK_THROWS_AS(parseArgs({"force", "--a", "-1"}), UsageError);
  CHECK_THROWS_AS(parseArgs({"force", "--s", "0"}), UsageError);
  CHECK_THROWS_AS(parseArgs({"force", "--h", "-0.1"}), UsageError);
  CHECK_THROWS_AS(parseArgs({"force", "--tol", "0"}), UsageError);
  CHECK_THROWS_AS(parseArgs({"force", "--format", "xml"}), UsageError);
  CHECK_THROWS_AS(parseArgs({"force", "--normalize", "none"}), UsageError);
  CHECK_THROWS_AS(parseArgs({"sweep-h"}), UsageError);      // grid required
  CHECK_THROWS_AS(parseArgs({"sweep-a"}), UsageError);
  CHECK_THROWS_AS(parseArgs({"sweep-a", "--a-grid", "0:1:0.5"}), UsageError);
  CHECK_THROWS_AS(parseArgs({"--help"}), HelpRequested);
  CHECK_THROWS_AS(parseArgs({"force", "--help"}), HelpRequested);
}

static std::vector<assembly::SweepRecord> oneRecord() {
  assembly::SweepRecord rec{Geometry(1.0, 1.0, 0.25), {}, true, 12, 7,
                            0.0,                      -48.75, 0.0};
  rec.force.force.evenPaths = 1.0 / 3.0;
  rec.force.force.oddPaths = -0.123456789012345;
  rec.force.force.pfa = -2.0 / 300.0;
  rec.force.force.neumann = 0.2;
  rec.force.force.dirichlet = 0.45;
  rec.force.force.total = 0.65;
  return {rec};
}

TEST_CASE("CSV serialization: exact header, 12 significant digits") {
  std::ostringstream out;
  writeRecords(oneRecord(), Format::Csv, out);
  std::istringstream lines(out.str());
  std::string header, row, extra;
  REQUIRE(std::getline(lines, header));
  REQUIRE(std::getline(lines, row));
  CHECK_FALSE(std::getline(lines, extra));
  CHECK(header == kForceHeader);
  CHECK(row ==
        "1,1,0.25,0.333333333333,-0.123456789012,-0.00666666666667,0.2,0.45,"
        "0.65,-48.75,1,e12:o7");
}

TEST_CASE("CSV serialization is byte-stable") {
  std::ostringstream a, b;
  writeRecords(oneRecord(), Format::Csv, a);
  writeRecords(oneRecord(), Format::Csv, b);
  CHECK(a.str() == b.str());
}

TEST_CASE("JSON serialization carries the same fields") {
  std::ostringstream out;
  writeRecords(oneRecord(), Format::Json, out);
  const std::string j = out.str();
  CHECK(j.find("\"F_total\": 0.65") != std::string::npos);
  CHECK(j.find("\"converged\": true") != std::string::npos);
  CHECK(j.find("\"orders\": \"e12:o7\"") != std::string::npos);
  CHECK(j.find("\"F_total_over_Fpfa\": -48.75") != std::string::npos);
}

TEST_CASE("piston subcommand: exit 0 and frozen reference values") {
  std::ostringstream out, err;
  const int code = run({"piston", "--a", "1", "--s", "1"}, out, err);
  CHECK(code == 0);
  std::istringstream lines(out.str());
  std::string header, row;
  REQUIRE(std::getline(lines, header));
  REQUIRE(std::getline(lines, row));
  CHECK(header == "a,s,E_even,E_odd,E_pfa,F_even,F_odd,F_pfa,F_total,Z2");
  CHECK(row.find("1.056348517") != std::string::npos);         // Z2
  CHECK(row.find("-0.0654498469498") != std::string::npos);    // F_odd
}

TEST_CASE("force at h = 0: converged exit code and exact header") {
  std::ostringstream out, err;
  const int code = run({"force", "--a", "1", "--s", "1", "--h", "0"}, out, err);
  CHECK(code == 0);
  std::istringstream lines(out.str());
  std::string header;
  REQUIRE(std::getline(lines, header));
  CHECK(header == kForceHeader);
}

TEST_CASE("repeat runs produce identical bytes") {
  std::ostringstream o1, o2, err;
  run({"force", "--h", "0"}, o1, err);
  run({"force", "--h", "0"}, o2, err);
  CHECK(o1.str() == o2.str());
}

TEST_CASE("capped run reports partial convergence with exit 2") {
  std::ostringstream out, err;
  const int code = run({"force", "--h", "0", "--max-order", "5", "--tol",
                        "1e-6"},
                       out, err);
  CHECK(code == 2);
  std::istringstream lines(out.str());
  std::string header, row;
  REQUIRE(std::getline(lines, header));
  REQUIRE(std::getline(lines, row));
  CHECK(row.find(",0,e") != std::string::npos);  // converged column is 0
}

TEST_CASE("usage errors exit 1 with a message on stderr") {
  std::ostringstream out, err;
  CHECK(run({"force", "--a", "-2"}, out, err) == 1);
  CHECK(err.str().find("error:") != std::string::npos);
  CHECK(out.str().empty());

  std::ostringstream out2, err2;
  CHECK(run({}, out2, err2) == 1);
  CHECK(err2.str().find("error:") != std::string::npos);
}

TEST_CASE("--help exits 0 and prints option summaries") {
  std::ostringstream out, err;
  CHECK(run({"--help"}, out, err) == 0);
  CHECK(out.str().find("sweep-h") != std::string::npos);

  std::ostringstream out2, err2;
  CHECK(run({"force", "--help"}, out2, err2) == 0);
  CHECK(out2.str().find("--h-grid") != std::string::npos);
}

TEST_CASE("--out writes the same bytes as stdout") {
  const std::string path = "cli_out_test.csv";
  std::ostringstream direct, err;
  REQUIRE(run({"piston", "--a", "2", "--s", "1"}, direct, err) == 0);
  std::ostringstream ignored;
  REQUIRE(run({"piston", "--a", "2", "--s", "1", "--out", path}, ignored,
              err) == 0);
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream fileContents;
  fileContents << in.rdbuf();
  CHECK(fileContents.str() == direct.str());
  in.close();
  std::remove(path.c_str());
}

TEST_CASE("unwritable --out path exits 1") {
  std::ostringstream out, err;
  CHECK(run({"piston", "--out", "no/such/dir/x.csv"}, out, err) == 1);
  CHECK(err.str().find("error:") != std::string::npos);
}
