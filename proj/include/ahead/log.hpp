#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ahead/errors.hpp"
#include "ahead/metrics.hpp"
#include "ahead/solver.hpp"
#include "ahead/verification.hpp"

namespace ahead {

inline constexpr const char* kMetricsSchema = "ahead-metrics-v1";
inline constexpr const char* kSnapshotsSchema = "ahead-snapshots-v1";
inline constexpr const char* kMetricsColumns =
    "k,phi,grad_phi_sq,grad_approx_sq,inner_err_sq,pen_inner_err_sq,"
    "cons_x_sq,cons_y_sq,cons_z_sq,V";

namespace detail {

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Per-iteration log: '#'-prefixed header lines (schema version, column
/// names, caller-provided key=value echo), then one comma-separated numeric
/// row per logged iteration. Oracle flags are emitted as '# flag' lines
/// right after the affected row.
inline void write_metrics_csv(const std::string& path,
                              const std::vector<MetricsRecord>& records,
                              const std::vector<std::string>& header_lines = {}) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "# " << kMetricsSchema << "\n";
  for (const std::string& h : header_lines) out << "# " << h << "\n";
  out << "# columns: " << kMetricsColumns << "\n";
  for (const MetricsRecord& r : records) {
    out << r.k << "," << detail::fmt_double(r.phi) << ","
        << detail::fmt_double(r.grad_phi_sq) << ","
        << detail::fmt_double(r.grad_approx_sq) << ","
        << detail::fmt_double(r.inner_err_sq) << ","
        << detail::fmt_double(r.pen_inner_err_sq) << ","
        << detail::fmt_double(r.cons_x_sq) << ","
        << detail::fmt_double(r.cons_y_sq) << ","
        << detail::fmt_double(r.cons_z_sq) << ","
        << detail::fmt_double(r.potential) << "\n";
    if (!r.flags.inner_converged)
      out << "# flag k=" << r.k << " inner_solve_not_converged\n";
    if (!r.flags.penalized_converged)
      out << "# flag k=" << r.k << " penalized_solve_not_converged\n";
    if (!r.flags.hypergrad_converged)
      out << "# flag k=" << r.k << " hypergradient_not_converged\n";
    if (r.flags.hypergrad_finite_diff)
      out << "# flag k=" << r.k << " hypergradient_via_finite_differences\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

inline std::vector<MetricsRecord> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::vector<MetricsRecord> records;
  std::string line;
  bool schema_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find(kMetricsSchema) != std::string::npos) schema_seen = true;
      continue;
    }
    if (!schema_seen)
      throw DataError(path + ": missing schema line '# " +
                      std::string(kMetricsSchema) + "'");
    std::string norm = line;
    for (char& ch : norm)
      if (ch == ',') ch = ' ';
    std::istringstream ss(norm);
    MetricsRecord r;
    if (!(ss >> r.k >> r.phi >> r.grad_phi_sq >> r.grad_approx_sq >>
          r.inner_err_sq >> r.pen_inner_err_sq >> r.cons_x_sq >>
          r.cons_y_sq >> r.cons_z_sq >> r.potential))
      throw DataError(path + ": malformed metrics row: " + line);
    records.push_back(r);
  }
  return records;
}

/// State snapshots: per logged iteration a "k <k>" line followed by one line
/// per node holding that node's x, y, and z blocks.
inline void write_snapshots(const std::string& path,
                            const std::vector<SolverState>& states) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "# " << kSnapshotsSchema << "\n";
  if (!states.empty())
    out << "# dims m=" << states.front().x.rows()
        << " n=" << states.front().x.cols()
        << " r=" << states.front().y.cols() << "\n";
  for (const SolverState& st : states) {
    out << "k " << st.k << "\n";
    for (Eigen::Index i = 0; i < st.x.rows(); ++i) {
      for (Eigen::Index j = 0; j < st.x.cols(); ++j)
        out << detail::fmt_double(st.x(i, j)) << " ";
      for (Eigen::Index j = 0; j < st.y.cols(); ++j)
        out << detail::fmt_double(st.y(i, j)) << " ";
      for (Eigen::Index j = 0; j < st.z.cols(); ++j)
        out << detail::fmt_double(st.z(i, j)) << (j + 1 < st.z.cols() ? " " : "");
      out << "\n";
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

inline std::vector<SolverState> read_snapshots(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string line;
  int m = 0, n = 0, r = 0;
  std::vector<SolverState> states;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string word;
      if (hs >> word && word == "dims") {
        std::string tok;
        while (hs >> tok) {
          if (tok.rfind("m=", 0) == 0) m = std::stoi(tok.substr(2));
          if (tok.rfind("n=", 0) == 0) n = std::stoi(tok.substr(2));
          if (tok.rfind("r=", 0) == 0) r = std::stoi(tok.substr(2));
        }
      }
      continue;
    }
    if (line[0] == 'k') {
      if (m <= 0 || n <= 0 || r <= 0)
        throw DataError(path + ": snapshot dims header missing");
      SolverState st;
      st.k = std::stoll(line.substr(2));
      st.x.resize(m, n);
      st.y.resize(m, r);
      st.z.resize(m, r);
      for (int i = 0; i < m; ++i) {
        if (!std::getline(in, line))
          throw DataError(path + ": truncated snapshot block");
        std::istringstream ls(line);
        for (int j = 0; j < n; ++j)
          if (!(ls >> st.x(i, j)))
            throw DataError(path + ": malformed snapshot row: " + line);
        for (int j = 0; j < r; ++j)
          if (!(ls >> st.y(i, j)))
            throw DataError(path + ": malformed snapshot row: " + line);
        for (int j = 0; j < r; ++j)
          if (!(ls >> st.z(i, j)))
            throw DataError(path + ": malformed snapshot row: " + line);
      }
      states.push_back(std::move(st));
      continue;
    }
    throw DataError(path + ": unexpected line: " + line);
  }
  return states;
}

/// Plain-text table plus machine-readable key=value rendering of a
/// BoundReport.
inline std::string render_bound_report(const BoundReport& report) {
  std::ostringstream out;
  out << "check                                     status      points  "
         "violations  worst_lhs      worst_rhs      margin\n";
  for (const BoundCheck& c : report.checks) {
    char line[256];
    const char* status = !c.applicable ? "skipped" : (c.pass ? "pass" : "FAIL");
    std::snprintf(line, sizeof(line),
                  "%-40s  %-10s  %6d  %10d  %-13.6g  %-13.6g  %-13.6g\n",
                  c.name.c_str(), status, c.points, c.violations, c.worst_lhs,
                  c.worst_rhs,
                  c.points > 0 ? c.worst_margin : 0.0);
    out << line;
    if (!c.note.empty()) out << "    note: " << c.note << "\n";
  }
  return out.str();
}

inline void write_bound_report(const std::string& text_path,
                               const std::string& kv_path,
                               const BoundReport& report) {
  {
    std::ofstream out(text_path);
    if (!out) throw IoError("cannot open for writing: " + text_path);
    out << render_bound_report(report);
  }
  std::ofstream out(kv_path);
  if (!out) throw IoError("cannot open for writing: " + kv_path);
  for (const BoundCheck& c : report.checks) {
    out << c.name << ".applicable=" << (c.applicable ? 1 : 0) << "\n";
    out << c.name << ".pass=" << (c.pass ? 1 : 0) << "\n";
    out << c.name << ".points=" << c.points << "\n";
    out << c.name << ".violations=" << c.violations << "\n";
    out << c.name << ".worst_lhs=" << detail::fmt_double(c.worst_lhs) << "\n";
    out << c.name << ".worst_rhs=" << detail::fmt_double(c.worst_rhs) << "\n";
    out << c.name << ".worst_margin="
        << detail::fmt_double(c.points > 0 ? c.worst_margin : 0.0) << "\n";
    if (!c.note.empty()) out << c.name << ".note=" << c.note << "\n";
  }
}

}  // namespace ahead
