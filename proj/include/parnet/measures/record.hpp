#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "parnet/corpus.hpp"
#include "parnet/error.hpp"
#include "parnet/format.hpp"

namespace parnet {

inline constexpr std::size_t kFeatureCount = 33;

/// Column order of every record, CSV and report.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "k_mean",        "k_std",        "B_mean",      "B_std",      "cc_mean",     "cc_std",     "N_mean",
    "N_std",         "Ecc_mean",     "Ecc_std",     "EC_mean",    "EC_std",      "C_mean",     "C_std",
    "Sb2_mean",      "Sb2_std",      "Sm2_mean",    "Sm2_std",    "Sb3_mean",    "Sb3_std",    "Sm3_mean",
    "Sm3_std",       "Sb4_mean",     "Sb4_std",     "Sm4_mean",   "Sm4_std",     "alphaInf_mean",
    "alphaInf_std",  "alpha2_mean",  "alpha2_std",  "alpha3_mean", "alpha3_std", "Q"};

inline std::size_t feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    if (kFeatureNames[i] == name) return i;
  throw Error("unknown feature '" + std::string(name) + "'");
}

inline constexpr std::size_t kQ = kFeatureCount - 1;

struct MeasurementRecord {
  std::string doc_id;
  DocKind kind = DocKind::RT;
  std::optional<int> sample_index;
  std::array<double, kFeatureCount> features{};

  double operator[](std::size_t i) const { return features[i]; }
  double& operator[](std::size_t i) { return features[i]; }
  double get(std::string_view name) const { return features[feature_index(name)]; }
  friend bool operator==(const MeasurementRecord&, const MeasurementRecord&) = default;
};

struct MeanStd {
  double mean = 0;
  double std = 0;  // population
};

inline MeanStd mean_std(const std::vector<double>& v) {
  if (v.empty()) return {};
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double var = 0;
  for (double x : v) var += (x - m) * (x - m);
  return {m, std::sqrt(var / static_cast<double>(v.size()))};
}

/// Per-node measures in record order: k, B, cc, N, Ecc, EC, C, Sb2, Sm2,
/// Sb3, Sm3, Sb4, Sm4, alphaInf, alpha2, alpha3.
using NodeMeasures = std::array<std::vector<double>, 16>;

inline std::array<double, kFeatureCount> summarize(const NodeMeasures& m, double q) {
  std::array<double, kFeatureCount> f{};
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto s = mean_std(m[i]);
    f[2 * i] = s.mean;
    f[2 * i + 1] = s.std;
  }
  f[kQ] = q;
  return f;
}

// ---------------------------------------------------------------------------
// CSV: doc_id,kind,sample_index,<features>. sample_index is empty for RT.

inline std::string csv_header() {
  std::string h = "doc_id,kind,sample_index";
  for (auto n : kFeatureNames) (h += ',') += n;
  return h;
}

inline std::string to_csv(const std::vector<MeasurementRecord>& rows) {
  std::ostringstream o;
  o << csv_header() << '\n';
  for (const auto& r : rows) {
    if (r.doc_id.find_first_of(",\"\n") != std::string::npos)
      throw Error("document id '" + r.doc_id + "' cannot be written to CSV");
    o << r.doc_id << ',' << to_string(r.kind) << ',';
    if (r.sample_index) o << *r.sample_index;
    for (double x : r.features) o << ',' << format_double(x);
    o << '\n';
  }
  return o.str();
}

inline std::vector<MeasurementRecord> parse_csv(std::string_view text, const std::string& source = "<csv>") {
  std::vector<MeasurementRecord> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fail = [&](const std::string& why) {
      return Error("malformed measurements '" + source + "' line " + std::to_string(line_no) + ": " + why);
    };
    if (line_no == 1) {
      if (line != csv_header()) throw fail("unexpected header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 3 + kFeatureCount)
      throw fail("expected " + std::to_string(3 + kFeatureCount) + " columns, got " + std::to_string(cells.size()));
    MeasurementRecord r;
    try {
      r.doc_id = cells[0];
      r.kind = parse_kind(cells[1]);
      if (!cells[2].empty()) r.sample_index = static_cast<int>(parse_integer(cells[2]));
      for (std::size_t i = 0; i < kFeatureCount; ++i) r.features[i] = parse_double(cells[3 + i]);
    } catch (const Error& e) {
      throw fail(e.what());
    }
    rows.push_back(std::move(r));
  }
  if (line_no == 0) throw Error("malformed measurements '" + source + "': empty file");
  return rows;
}

}  // namespace parnet
