#pragma once

// File formats.
//
//   population CSV   ID,X[,Y]
//   sample CSV       rank[,ID][,y]     missing y as NA or an empty field
//
// Header names are matched case-insensitively; column order is free. Data
// values are written in shortest round-trip form so a written file parses
// back to identical doubles.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rss/core.hpp"
#include "rss/errors.hpp"

namespace rss {

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

inline std::string format_shortest(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Fixed significant-digit form for human-facing tables.
inline std::string format_sig(double v, int digits = 7) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// One CSV record. Double-quoted fields may contain commas and "" escapes;
// quoted fields spanning lines are not supported.
inline std::vector<std::string> split_csv(std::string_view line, std::size_t lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false, was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = was_quoted = true;
    } else if (c == ',') {
      out.push_back(was_quoted ? cur : std::string(trim(cur)));
      cur.clear();
      was_quoted = false;
    } else {
      cur += c;
    }
  }
  if (quoted) throw FormatError("unterminated quoted field", lineno);
  out.push_back(was_quoted ? cur : std::string(trim(cur)));
  return out;
}

inline bool is_missing(std::string_view s) { return s.empty() || s == "NA" || s == "na" || s == "NaN"; }

inline double parse_double(std::string_view s, std::size_t lineno, std::string_view column) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw FormatError("invalid number '" + std::string(s) + "' in column " + std::string(column), lineno);
  }
  return v;
}

inline int parse_int(std::string_view s, std::size_t lineno, std::string_view column) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("invalid integer '" + std::string(s) + "' in column " + std::string(column), lineno);
  }
  return v;
}

struct CsvTable {
  std::vector<std::string> header;  // lower-cased
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;   // source line of every row

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  }
};

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split_csv(line, lineno);
    if (!have_header) {
      for (auto& f : fields) t.header.push_back(lower(f));
      for (std::size_t i = 0; i < t.header.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
          if (t.header[i] == t.header[j]) throw FormatError("duplicate column '" + t.header[i] + "'", lineno);
        }
      }
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw FormatError("expected " + std::to_string(t.header.size()) + " fields, found " +
                            std::to_string(fields.size()),
                        lineno);
    }
    t.rows.push_back(std::move(fields));
    t.lines.push_back(lineno);
  }
  if (!have_header) throw FormatError("missing header row", 0);
  return t;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace detail

inline PopulationFrame read_population_csv(std::istream& in) {
  const auto t = detail::read_csv(in);
  const auto id = t.column("id");
  const auto x = t.column("x");
  const auto y = t.column("y");
  if (!id) throw FormatError("population file needs an ID column", 1);
  if (!x) throw FormatError("population file needs an X column", 1);
  PopulationFrame pop;
  pop.rows.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& f = t.rows[i];
    PopulationRow row;
    row.id = f[*id];
    if (row.id.empty()) throw FormatError("empty ID", t.lines[i]);
    if (detail::is_missing(f[*x])) throw FormatError("missing X value", t.lines[i]);
    row.x = detail::parse_double(f[*x], t.lines[i], "X");
    if (y && !detail::is_missing(f[*y])) row.y = detail::parse_double(f[*y], t.lines[i], "Y");
    pop.rows.push_back(std::move(row));
  }
  try {
    return validate_population(std::move(pop));
  } catch (const FormatError&) {
    throw;
  } catch (const DataError& e) {
    throw FormatError(e.what(), 0);
  }
}

/// Reads a sample CSV. `set_size` defaults to the largest rank present.
inline RssDataset read_rss_csv(std::istream& in, OutcomeKind kind = OutcomeKind::continuous,
                               std::optional<int> set_size = std::nullopt) {
  const auto t = detail::read_csv(in);
  const auto rank = t.column("rank");
  const auto id = t.column("id");
  const auto y = t.column("y");
  if (!rank) throw FormatError("sample file needs a rank column", 1);
  RssDataset data;
  data.kind = kind;
  int max_rank = 0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& f = t.rows[i];
    RssRecord r;
    r.rank = detail::parse_int(f[*rank], t.lines[i], "rank");
    if (r.rank < 1) throw FormatError("rank must be positive", t.lines[i]);
    if (set_size && r.rank > *set_size) {
      throw FormatError("rank out of range: " + std::to_string(r.rank) + " exceeds set size " +
                            std::to_string(*set_size),
                        t.lines[i]);
    }
    if (id && !f[*id].empty()) r.id = f[*id];
    if (y && !detail::is_missing(f[*y])) {
      r.y = detail::parse_double(f[*y], t.lines[i], "y");
      if (kind == OutcomeKind::binary && *r.y != 0.0 && *r.y != 1.0) {
        throw FormatError("non-binary outcome '" + f[*y] + "'", t.lines[i]);
      }
    }
    max_rank = std::max(max_rank, r.rank);
    data.records.push_back(std::move(r));
  }
  data.set_size = set_size.value_or(max_rank);
  if (data.records.empty()) throw FormatError("no data rows", 0);
  return validate_dataset(std::move(data));
}

inline void write_rss_csv(std::ostream& out, const RssDataset& data) {
  const bool ids = data.has_ids();
  const bool ys = data.has_outcomes();
  out << "rank";
  if (ids) out << ",ID";
  if (ys) out << ",y";
  out << '\n';
  for (const auto& r : data.records) {
    out << r.rank;
    if (ids) out << ',' << detail::csv_field(r.id.value_or(""));
    if (ys) out << ',' << (r.y ? format_shortest(*r.y) : "NA");
    out << '\n';
  }
}

inline void write_population_csv(std::ostream& out, const PopulationFrame& pop) {
  const bool ys = pop.has_outcomes();
  out << (ys ? "ID,X,Y\n" : "ID,X\n");
  for (const auto& r : pop.rows) {
    out << detail::csv_field(r.id) << ',' << format_shortest(r.x);
    if (ys) out << ',' << (r.y ? format_shortest(*r.y) : "NA");
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

// Non-finite values (open interval ends, infeasible statistics) become null.
inline nlohmann::ordered_json json_number(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json to_json(const TestResult& r) {
  nlohmann::ordered_json j;
  j["estimate"] = json_number(r.estimate);
  j["ci"] = nlohmann::ordered_json::array({json_number(r.ci_lower), json_number(r.ci_upper)});
  j["statistic"] = json_number(r.statistic);
  j["df"] = r.df ? json_number(*r.df) : nlohmann::ordered_json(nullptr);
  j["p_value"] = json_number(r.p_value);
  j["method"] = to_string(r.method);
  j["alpha"] = r.alpha;
  j["alternative"] = to_string(r.alternative);
  if (!r.feasible) j["feasible"] = false;
  return j;
}

inline nlohmann::ordered_json to_json(const DesignReport& rep) {
  nlohmann::ordered_json j;
  j["original"] = rep.original.counts();
  nlohmann::ordered_json rec = nlohmann::ordered_json::object();
  for (const auto& [name, a] : rep.recommendations) rec[name] = a.counts();
  if (rep.neyman_proportion) rec["neyman_proportion"] = *rep.neyman_proportion;
  j["recommendations"] = rec;
  nlohmann::ordered_json add = nlohmann::ordered_json::object();
  for (const auto& [name, a] : rep.additions) add[name] = a.counts();
  j["additions"] = add;
  j["warnings"] = rep.warnings;
  return j;
}

}  // namespace rss
