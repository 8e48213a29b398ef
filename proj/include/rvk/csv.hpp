#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "rvk/errors.hpp"

namespace rvk {

inline constexpr const char* kToolVersion = "rvk 0.1.0";

struct SweepRow {
  std::string experiment;
  double sigma = 0.0;
  double beta = 0.0;
  double R = 0.0;
  std::string quantity;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct SweepSummary {
  double max_value = 0.0;         // max measured quantity over the sweep
  double uniformity_ratio = 0.0;  // quantity at sigma_max / at sigma_min
  bool all_pass = true;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  SweepSummary summary;

  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return summary.all_pass;
  }
};

namespace csv_detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace csv_detail

// Deterministic CSV emission plus a sidecar metadata file ("<path>.meta")
// echoing the configuration and the tool version.
inline void emit(const SweepReport& report, const std::string& path,
                 const std::string& config_echo) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out.good()) throw IoError("cannot open output file: " + path);
  out << "experiment,sigma,beta,R,quantity,value,bound,pass\n";
  for (const auto& r : report.rows)
    out << r.experiment << ',' << csv_detail::num(r.sigma) << ','
        << csv_detail::num(r.beta) << ',' << csv_detail::num(r.R) << ','
        << r.quantity << ',' << csv_detail::num(r.value) << ','
        << csv_detail::num(r.bound) << ',' << (r.pass ? '1' : '0') << '\n';
  if (!out.good()) throw IoError("write failed: " + path);
  out.close();

  std::ofstream meta(path + ".meta", std::ios::binary | std::ios::trunc);
  if (!meta.good()) throw IoError("cannot open metadata file: " + path);
  meta << "tool = " << kToolVersion << "\n"
       << "rows = " << report.rows.size() << "\n"
       << "max_value = " << csv_detail::num(report.summary.max_value) << "\n"
       << "uniformity_ratio = "
       << csv_detail::num(report.summary.uniformity_ratio) << "\n"
       << "all_pass = " << (report.all_pass() ? 1 : 0) << "\n"
       << "config:\n"
       << config_echo << "\n";
  if (!meta.good()) throw IoError("write failed: " + path + ".meta");
}

}  // namespace rvk
