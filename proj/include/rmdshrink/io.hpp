#pragma once

// CSV ingestion, scenario configuration, and report serialization.
// Numbers are written with std::to_chars (shortest round-trip form, '.' decimal
// separator independent of the locale).

#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "rmdshrink/common.hpp"
#include "rmdshrink/depth.hpp"
#include "rmdshrink/detector.hpp"
#include "rmdshrink/simulation.hpp"

namespace rmd::io {

using nlohmann::json;

inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partially written file.
inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot rename " + tmp.string() + " to " + path.string());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
  DataMatrix data;
  std::vector<std::string> columns;
};

namespace detail {

// Splits RFC 4180-style records: quoted fields, doubled quotes, CRLF or LF.
inline std::vector<std::vector<std::string>> split_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  std::size_t i = 0;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;  // UTF-8 BOM
  for (; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      record.clear();
      field.clear();
      any = false;
    } else {
      field += ch;
      any = true;
    }
  }
  if (quoted) throw Error("csv: unterminated quoted field");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Parses a rectangular numeric table. Blank, non-numeric, NaN or infinite
/// cells are rejected with their (1-based) row and column.
inline CsvTable parse_csv(std::string_view text, bool has_header) {
  auto records = detail::split_csv(text);
  CsvTable out;
  std::size_t first = 0;
  if (has_header) {
    if (records.empty()) throw Error("csv: missing header row");
    for (const auto& name : records[0]) out.columns.emplace_back(detail::trim(name));
    first = 1;
  }
  if (records.size() <= first) throw Error("csv: no data rows");
  const std::size_t p = has_header ? out.columns.size() : records[first].size();
  const std::size_t n = records.size() - first;
  out.data.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t r = first; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::size_t line = r + 1;
    if (rec.size() != p)
      throw Error("csv: row " + std::to_string(line) + " has " + std::to_string(rec.size()) +
                  " fields, expected " + std::to_string(p));
    for (std::size_t c = 0; c < p; ++c) {
      const std::string_view cell = detail::trim(rec[c]);
      const std::string where = "row " + std::to_string(line) + ", column " + std::to_string(c + 1);
      if (cell.empty()) throw Error("csv: blank cell at " + where);
      double v = 0.0;
      const char* begin = cell.data();
      if (*begin == '+') ++begin;
      const auto res = std::from_chars(begin, cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw Error("csv: non-numeric cell '" + std::string(cell) + "' at " + where);
      if (!std::isfinite(v)) throw Error("csv: non-finite cell '" + std::string(cell) + "' at " + where);
      out.data(static_cast<Eigen::Index>(r - first), static_cast<Eigen::Index>(c)) = v;
    }
  }
  if (!has_header)
    for (std::size_t c = 0; c < p; ++c) out.columns.push_back("x" + std::to_string(c + 1));
  return out;
}

inline CsvTable load_csv(const std::filesystem::path& path, bool has_header) {
  try {
    return parse_csv(read_file(path), has_header);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Scenario configuration

inline ScenarioSpec scenario_from_json(const json& j, std::size_t index) {
  const std::string where = "scenario " + std::to_string(index);
  if (!j.is_object()) throw Error(where + ": expected an object");
  static const std::set<std::string> known{"id",    "family", "p",    "n",    "alpha",
                                           "delta", "lambda", "reps", "seed", "variant"};
  static const std::set<std::string> required{"family", "p", "n", "alpha", "reps", "seed", "variant"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw Error(where + ": unknown key '" + key + "'");
  for (const auto& key : required)
    if (!j.contains(key)) throw Error(where + ": missing key '" + key + "'");

  ScenarioSpec s;
  try {
    s.id = j.value("id", std::string("scenario") + std::to_string(index));
    const auto fam = parse_family(j.at("family").get<std::string>());
    if (!fam) throw Error("unknown family '" + j.at("family").get<std::string>() + "'");
    s.family = *fam;
    s.p = j.at("p").get<int>();
    s.n = j.at("n").get<int>();
    s.alpha = j.at("alpha").get<double>();
    s.delta = j.value("delta", s.delta);
    s.lambda = j.value("lambda", s.lambda);
    s.reps = j.at("reps").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    const auto var = parse_variant(j.at("variant").get<std::string>());
    if (!var) throw Error("unknown variant '" + j.at("variant").get<std::string>() + "'");
    s.variant = *var;
    validate(s);
  } catch (const json::exception& e) {
    throw Error(where + ": " + e.what());
  } catch (const Error& e) {
    throw Error(where + ": " + e.what());
  }
  return s;
}

inline json scenario_to_json(const ScenarioSpec& s) {
  return json{{"id", s.id},         {"family", std::string(to_string(s.family))},
              {"p", s.p},           {"n", s.n},
              {"alpha", s.alpha},   {"delta", s.delta},
              {"lambda", s.lambda}, {"reps", s.reps},
              {"seed", s.seed},     {"variant", to_string(s.variant)}};
}

/// Accepts either a JSON array of scenario objects or {"scenarios": [...]}.
inline std::vector<ScenarioSpec> parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  if (j.is_object()) {
    for (const auto& [key, _] : j.items())
      if (key != "scenarios") throw Error("config: unknown top-level key '" + key + "'");
    if (!j.contains("scenarios")) throw Error("config: missing 'scenarios'");
    j = j.at("scenarios");
  }
  if (!j.is_array()) throw Error("config: expected an array of scenarios");
  std::vector<ScenarioSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(scenario_from_json(j[i], i));
  if (out.empty()) throw Error("config: no scenarios");
  return out;
}

inline std::vector<ScenarioSpec> load_config(const std::filesystem::path& path) {
  try {
    return parse_config(read_file(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Metrics reports

inline json metrics_to_json(const MetricsReport& m) {
  return json{{"id", m.id},
              {"spec", scenario_to_json(m.spec)},
              {"c", m.c_mean},
              {"f", m.f_mean},
              {"fscore", m.fscore_mean},
              {"wall_seconds", m.wall_seconds},
              {"per_rep", {{"c", m.c}, {"f", m.f}, {"fscore", m.fscore}}}};
}

inline MetricsReport metrics_from_json(const json& j) {
  try {
    MetricsReport m;
    m.id = j.at("id").get<std::string>();
    m.spec = scenario_from_json(j.at("spec"), 0);
    m.c_mean = j.at("c").get<double>();
    m.f_mean = j.at("f").get<double>();
    m.fscore_mean = j.at("fscore").get<double>();
    m.wall_seconds = j.at("wall_seconds").get<double>();
    const auto& per = j.at("per_rep");
    m.c = per.at("c").get<std::vector<double>>();
    m.f = per.at("f").get<std::vector<double>>();
    m.fscore = per.at("fscore").get<std::vector<double>>();
    return m;
  } catch (const json::exception& e) {
    throw Error(std::string("metrics report: ") + e.what());
  }
}

inline std::string metrics_json(const std::vector<MetricsReport>& reports) {
  json arr = json::array();
  for (const auto& m : reports) arr.push_back(metrics_to_json(m));
  return json{{"reports", arr}}.dump(2) + "\n";
}

inline std::vector<MetricsReport> parse_metrics_json(std::string_view text) {
  std::vector<MetricsReport> out;
  try {
    const json j = json::parse(text);
    for (const auto& r : j.at("reports")) out.push_back(metrics_from_json(r));
  } catch (const json::exception& e) {
    throw Error(std::string("metrics report: ") + e.what());
  }
  return out;
}

inline const char* kMetricsCsvHeader =
    "id,family,variant,p,n,alpha,delta,lambda,reps,seed,c,f,fscore,wall_seconds";

/// One summary row per scenario (per-replicate vectors are JSON only).
inline std::string metrics_csv(const std::vector<MetricsReport>& reports) {
  std::string out = std::string(kMetricsCsvHeader) + "\n";
  for (const auto& m : reports) {
    const auto& s = m.spec;
    out += m.id + "," + std::string(to_string(s.family)) + "," + to_string(s.variant) + "," + std::to_string(s.p) +
           "," + std::to_string(s.n) + "," + format_double(s.alpha) + "," + format_double(s.delta) + "," +
           format_double(s.lambda) + "," + std::to_string(s.reps) + "," + std::to_string(s.seed) + "," +
           format_double(m.c_mean) + "," + format_double(m.f_mean) + "," + format_double(m.fscore_mean) + "," +
           format_double(m.wall_seconds) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Detection and boxplot reports

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline std::string detection_json(const DetectionReport& r, const std::vector<std::string>& columns) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < r.d2.size(); ++i)
    rows.push_back({{"index", i}, {"d2", r.d2(i)}, {"outlier", static_cast<bool>(r.flags[static_cast<std::size_t>(i)])}});
  json center = json::array();
  for (Eigen::Index j = 0; j < r.location.center.size(); ++j) center.push_back(r.location.center(j));
  const json j{{"variant", to_string(r.variant)},
               {"quantile", r.quantile},
               {"threshold", r.threshold},
               {"n", r.d2.size()},
               {"p", columns.size()},
               {"columns", columns},
               {"center", center},
               {"eta_location", optional_number(r.eta_location)},
               {"eta_scatter", r.eta_scatter},
               {"outliers", r.outlier_count()},
               {"warnings", r.warnings},
               {"rows", rows}};
  return j.dump(2) + "\n";
}

inline std::string detection_csv(const DetectionReport& r) {
  std::string out = "index,d2,threshold,outlier,eta_location,eta_scatter\n";
  const std::string eta_loc = r.eta_location ? format_double(*r.eta_location) : "";
  const std::string eta_sc = format_double(r.eta_scatter);
  const std::string thr = format_double(r.threshold);
  for (Eigen::Index i = 0; i < r.d2.size(); ++i)
    out += std::to_string(i) + "," + format_double(r.d2(i)) + "," + thr + "," +
           (r.flags[static_cast<std::size_t>(i)] ? "1" : "0") + "," + eta_loc + "," + eta_sc + "\n";
  return out;
}

inline json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index j = 0; j < v.size(); ++j) a.push_back(v(j));
  return a;
}

/// Plot data for a parallel-coordinates view: rows with flags, the box, the
/// fences and the L1 median.
inline std::string boxplot_json(const DataMatrix& data, const std::vector<std::string>& columns,
                                const DetectionReport& det, const BoxplotSummary& b) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    rows.push_back({{"index", i},
                    {"values", vector_json(data.row(i).transpose())},
                    {"depth", b.depths(i)},
                    {"outlier", static_cast<bool>(det.flags[static_cast<std::size_t>(i)])}});
  const json j{{"variant", to_string(det.variant)},
               {"threshold", det.threshold},
               {"columns", columns},
               {"box", {{"q1", vector_json(b.q1)}, {"q3", vector_json(b.q3)}}},
               {"fences", {{"lo", vector_json(b.fence_lo)}, {"hi", vector_json(b.fence_hi)}}},
               {"median_point", vector_json(b.median_point)},
               {"depth_order", b.depth_order},
               {"counts",
                {{"inside", b.flagged_inside},
                 {"outside", b.flagged_outside},
                 {"total", b.flagged_total},
                 {"central", b.flagged_central},
                 {"central_rows", b.central_count}}},
               {"rows", rows}};
  return j.dump(2) + "\n";
}

inline std::string bench_csv(const std::vector<BenchResult>& results) {
  std::string out = "id,variant,p,n,measurements,median_seconds,min_seconds,max_seconds\n";
  for (const auto& r : results) {
    const auto [lo, hi] = std::minmax_element(r.seconds.begin(), r.seconds.end());
    out += r.id + "," + to_string(r.variant) + "," + std::to_string(r.p) + "," + std::to_string(r.n) + "," +
           std::to_string(r.seconds.size()) + "," + format_double(r.median_seconds) + "," + format_double(*lo) +
           "," + format_double(*hi) + "\n";
  }
  return out;
}

}  // namespace rmd::io
