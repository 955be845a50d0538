#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pspin {

/// One statistic. `std_error` empty means the value is deterministic;
/// `seed` empty marks an aggregate over seeds.
struct ResultRow {
  std::string experiment;
  std::string kind;
  int n = 0;
  std::string family;
  std::optional<std::uint64_t> seed;
  std::string stat;
  double value = 0.0;
  std::optional<double> std_error;
  double wall_ms = 0.0;

  bool operator==(const ResultRow&) const = default;
};

/// Row kind allowed to carry a non-finite value.
inline constexpr const char* kDivergenceWitness = "divergence_witness";

inline const char* kCsvHeader = "experiment,kind,N,family,seed,stat,value,stderr,wall_ms";

/// Orders rows by (experiment, kind, N, family, seed, stat).
void sort_rows(std::vector<ResultRow>& rows);

std::string to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_csv(const std::string& text);
std::string to_jsonl(const std::vector<ResultRow>& rows);

/// Upper tolerance per statistic name: an aggregate row passes when value <= limit.
/// Aggregate rows of kind "check" hold 1 (pass) or 0 (fail) and are always evaluated.
using Tolerances = std::map<std::string, double>;

struct SummaryLine {
  std::string experiment;
  std::string stat;
  int n;
  std::string family;
  double value;
  double limit;
  bool pass;
};

std::vector<SummaryLine> evaluate_tolerances(const std::vector<ResultRow>& rows, const Tolerances& tolerances);
std::string markdown_summary(const std::vector<ResultRow>& rows, const Tolerances& tolerances);

struct ReportFiles {
  std::filesystem::path csv;
  std::filesystem::path jsonl;
  std::filesystem::path markdown;
};

/// Writes <stem>.csv, <stem>.jsonl and <stem>.md next to `csv_path`.
ReportFiles write_report(std::vector<ResultRow> rows, const std::filesystem::path& csv_path,
                         const Tolerances& tolerances = {});

std::vector<ResultRow> read_csv(const std::filesystem::path& path);

}  // namespace pspin
