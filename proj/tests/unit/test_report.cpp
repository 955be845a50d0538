#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "pspin/errors.hpp"
#include "pspin/report.hpp"

using namespace pspin;
namespace fs = std::filesystem;

namespace {

std::vector<ResultRow> fixture() {
  return {
      {"gs", "instance", 100, "gaussian", 3, "gs_per_site", 1.3912345678901234, std::nullopt, 12.5},
      {"gs", "aggregate", 100, "gaussian", std::nullopt, "mean_gs_per_site", 0.1, 1e-300, 0.0},
      {"gs", "gap", 100, "gaussian|student_t:5.0", std::nullopt, "gap_gs_per_site", 0.015, 0.004, 0.0},
      {"pca", "aggregate", 500, "family,with \"quotes\"", std::nullopt, "detection@lambda=2", -2.5e-17, 3.0, 1.0},
      {"baiyin", kDivergenceWitness, 4000, "student_t:2.5", 18446744073709551615ULL, "moment",
       std::numeric_limits<double>::infinity(), std::nullopt, 0.0},
      {"pca", "check", 500, "gaussian", std::nullopt, "gap_shrinking", 1.0, std::nullopt, 0.0},
  };
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("CSV round trip reproduces rows exactly") {
    auto rows = fixture();
    const auto csv = to_csv(rows);
    CHECK(csv.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
    const auto back = parse_csv(csv);
    CHECK(back == rows);
    CHECK(to_csv(back) == csv);
  }

  TEST_CASE("deterministic statistics are tagged") {
    const auto csv = to_csv(fixture());
    CHECK(csv.find(",gs_per_site,1.3912345678901235,deterministic,12.5") != std::string::npos);
    CHECK(csv.find(",mean_gs_per_site,0.1,1e-300,") != std::string::npos);
  }

  TEST_CASE("non-finite values are only allowed in divergence witnesses") {
    std::vector<ResultRow> rows{{"gs", "instance", 10, "g", 1, "x", std::nan(""), std::nullopt, 0.0}};
    CHECK_THROWS_AS(to_csv(rows), InvariantError);
  }

  TEST_CASE("JSON lines mirror one object per row") {
    const auto text = to_jsonl(fixture());
    std::istringstream is(text);
    std::string line;
    int count = 0;
    while (std::getline(is, line)) ++count;
    CHECK(count == 6);
    CHECK(text.find("\"stderr\":\"deterministic\"") != std::string::npos);
  }

  TEST_CASE("tolerance evaluation") {
    const Tolerances tol{{"gap_gs_per_site", 0.02}, {"mean_gs_per_site", 0.05}};
    const auto lines = evaluate_tolerances(fixture(), tol);
    int checked = 0;
    for (const auto& l : lines) {
      if (l.stat == "gap_gs_per_site") CHECK(l.pass);
      if (l.stat == "mean_gs_per_site") CHECK_FALSE(l.pass);
      if (l.stat == "gap_shrinking") CHECK(l.pass);
      ++checked;
    }
    CHECK(checked == 3);
    const auto md = markdown_summary(fixture(), tol);
    CHECK(md.find("FAIL") != std::string::npos);
    CHECK(md.find("PASS") != std::string::npos);
  }

  TEST_CASE("write_report writes three files and refuses empty input") {
    const auto dir = fs::temp_directory_path() / "pspin_unit_report";
    fs::create_directories(dir);
    const auto files = write_report(fixture(), dir / "out.csv", {{"gap_gs_per_site", 0.02}});
    CHECK(fs::exists(files.csv));
    CHECK(fs::exists(files.jsonl));
    CHECK(fs::exists(files.markdown));
    auto rows = fixture();
    sort_rows(rows);
    CHECK(read_csv(files.csv) == rows);
    CHECK_THROWS(write_report({}, dir / "empty.csv"));
    try {
      read_csv(dir / "nope.csv");
      FAIL("expected an error");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("nope.csv") != std::string::npos);
    }
  }
}
