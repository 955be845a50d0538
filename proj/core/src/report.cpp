#include "pspin/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <tuple>

#include "pspin/errors.hpp"

namespace pspin {
namespace {

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& s, std::size_t line) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("CSV line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line, std::size_t lineno) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ConfigError("CSV line " + std::to_string(lineno) + ": unterminated quote");
  fields.push_back(std::move(cur));
  return fields;
}

void check_row(const ResultRow& r) {
  if (!std::isfinite(r.value) && r.kind != kDivergenceWitness) {
    throw InvariantError("non-finite value for " + r.experiment + "/" + r.stat + " outside a divergence witness");
  }
}

std::string plain(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    const std::uint64_t sa = a.seed.value_or(UINT64_MAX), sb = b.seed.value_or(UINT64_MAX);
    return std::tie(a.experiment, a.kind, a.n, a.family, sa, a.stat) <
           std::tie(b.experiment, b.kind, b.n, b.family, sb, b.stat);
  });
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    check_row(r);
    out += quote(r.experiment) + ',' + quote(r.kind) + ',' + std::to_string(r.n) + ',' + quote(r.family) + ',' +
           (r.seed ? std::to_string(*r.seed) : std::string()) + ',' + quote(r.stat) + ',' + number(r.value) + ',' +
           (r.std_error ? number(*r.std_error) : std::string("deterministic")) + ',' + number(r.wall_ms) + '\n';
  }
  return out;
}

std::vector<ResultRow> parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw ConfigError("CSV header does not match the result schema");
  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line, lineno);
    if (f.size() != 9) throw ConfigError("CSV line " + std::to_string(lineno) + ": expected 9 fields");
    ResultRow r;
    r.experiment = f[0];
    r.kind = f[1];
    r.n = static_cast<int>(parse_double(f[2], lineno));
    r.family = f[3];
    if (!f[4].empty()) {
      std::uint64_t s = 0;
      auto [ptr, ec] = std::from_chars(f[4].data(), f[4].data() + f[4].size(), s);
      if (ec != std::errc() || ptr != f[4].data() + f[4].size()) {
        throw ConfigError("CSV line " + std::to_string(lineno) + ": bad seed '" + f[4] + "'");
      }
      r.seed = s;
    }
    r.stat = f[5];
    r.value = parse_double(f[6], lineno);
    if (f[7] != "deterministic") r.std_error = parse_double(f[7], lineno);
    r.wall_ms = parse_double(f[8], lineno);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string to_jsonl(const std::vector<ResultRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    check_row(r);
    nlohmann::json j = {{"experiment", r.experiment}, {"kind", r.kind},   {"N", r.n},
                        {"family", r.family},         {"stat", r.stat},   {"wall_ms", r.wall_ms}};
    j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr);
    j["value"] = std::isfinite(r.value) ? nlohmann::json(r.value) : nlohmann::json(number(r.value));
    j["stderr"] = r.std_error ? nlohmann::json(*r.std_error) : nlohmann::json("deterministic");
    out += j.dump() + '\n';
  }
  return out;
}

std::vector<SummaryLine> evaluate_tolerances(const std::vector<ResultRow>& rows, const Tolerances& tolerances) {
  std::vector<SummaryLine> out;
  for (const auto& r : rows) {
    if (r.seed) continue;
    if (r.kind == "check") {
      out.push_back({r.experiment, r.stat, r.n, r.family, r.value, 1.0, r.value >= 0.5});
      continue;
    }
    auto it = tolerances.find(r.stat);
    if (it == tolerances.end()) continue;
    out.push_back({r.experiment, r.stat, r.n, r.family, r.value, it->second, r.value <= it->second});
  }
  return out;
}

std::string markdown_summary(const std::vector<ResultRow>& rows, const Tolerances& tolerances) {
  std::ostringstream md;
  md << "# Experiment summary\n\n";
  std::vector<std::string> experiments;
  for (const auto& r : rows) {
    if (std::find(experiments.begin(), experiments.end(), r.experiment) == experiments.end()) {
      experiments.push_back(r.experiment);
    }
  }
  const auto checks = evaluate_tolerances(rows, tolerances);
  for (const auto& e : experiments) {
    std::size_t instances = 0;
    md << "## " << e << "\n\n| kind | N | family | stat | value | stderr |\n|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
      if (r.experiment != e) continue;
      if (r.seed) {
        ++instances;
        continue;
      }
      md << "| " << r.kind << " | " << r.n << " | " << r.family << " | " << r.stat << " | " << plain(r.value) << " | "
         << (r.std_error ? plain(*r.std_error) : "deterministic") << " |\n";
    }
    md << "\n" << instances << " per-seed rows omitted (see CSV).\n\n";
    bool any = false;
    for (const auto& c : checks) {
      if (c.experiment != e) continue;
      if (!any) md << "| check | N | family | value | limit | result |\n|---|---|---|---|---|---|\n";
      any = true;
      md << "| " << c.stat << " | " << c.n << " | " << c.family << " | " << plain(c.value) << " | " << plain(c.limit)
         << " | " << (c.pass ? "PASS" : "FAIL") << " |\n";
    }
    if (any) md << "\n";
  }
  return md.str();
}

ReportFiles write_report(std::vector<ResultRow> rows, const std::filesystem::path& csv_path,
                         const Tolerances& tolerances) {
  if (rows.empty()) throw ConfigError("refusing to write a report without rows");
  sort_rows(rows);
  ReportFiles files{csv_path, csv_path, csv_path};
  files.jsonl.replace_extension(".jsonl");
  files.markdown.replace_extension(".md");
  if (files.csv.extension() != ".csv") files.csv.replace_extension(".csv");

  auto write = [](const std::filesystem::path& p, const std::string& content) {
    if (p.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream os(p, std::ios::trunc);
    if (!os) throw ConfigError("cannot open " + p.string() + " for writing");
    os << content;
    if (!os) throw ConfigError("failed writing " + p.string());
  };
  write(files.csv, to_csv(rows));
  write(files.jsonl, to_jsonl(rows));
  write(files.markdown, markdown_summary(rows, tolerances));
  return files;
}

std::vector<ResultRow> read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return parse_csv(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace pspin
