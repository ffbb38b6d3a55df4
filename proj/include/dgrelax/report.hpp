#ifndef DGRELAX_REPORT_HPP_
#define DGRELAX_REPORT_HPP_

#include "dgrelax/discrete_energy.hpp"
#include "dgrelax/minimizer.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace dgrelax {

/// One row of report.csv.
struct RunRecord {
  std::string experiment;
  std::string run;
  std::string model;
  std::string formulation;
  std::string penalty_variant;
  std::string status = "ok"; // ok | error
  std::string reason;        // minimizer termination reason
  int nx = 0, ny = 0, triangles = 0, degree = 1;
  int stable_rewrite = 0;
  int iterations = 0;
  int restart = 0;
  double alpha = 0.0;
  double eps_pen = 0.0;
  double total = 0.0;
  double bulk = 0.0;
  double consistency = 0.0;
  double penalty = 0.0;
  double jump_aggregate = 0.0;
  double boundary_jump = 0.0;
  double seminorm = 0.0;
  double homogeneous = 0.0; // int W(grad y0)
  double initial_energy = 0.0;
  double error_l1 = 0.0;
  double error_l2 = 0.0;
  double error_w11 = 0.0;
  double grad_inf = 0.0;
  double wall_time = 0.0;
  std::string message;

  /// Every column except wall_time; used to compare runs for reproducibility.
  bool same_outcome(const RunRecord& o) const;
};

namespace detail {

using RecordField = std::variant<std::string RunRecord::*, int RunRecord::*, double RunRecord::*>;

inline const std::vector<std::pair<const char*, RecordField>>& record_columns() {
  static const std::vector<std::pair<const char*, RecordField>> cols = {
      {"experiment", &RunRecord::experiment},
      {"run", &RunRecord::run},
      {"model", &RunRecord::model},
      {"formulation", &RunRecord::formulation},
      {"penalty_variant", &RunRecord::penalty_variant},
      {"nx", &RunRecord::nx},
      {"ny", &RunRecord::ny},
      {"triangles", &RunRecord::triangles},
      {"degree", &RunRecord::degree},
      {"alpha", &RunRecord::alpha},
      {"stable_rewrite", &RunRecord::stable_rewrite},
      {"eps_pen", &RunRecord::eps_pen},
      {"restart", &RunRecord::restart},
      {"total", &RunRecord::total},
      {"bulk", &RunRecord::bulk},
      {"consistency", &RunRecord::consistency},
      {"penalty", &RunRecord::penalty},
      {"jump_aggregate", &RunRecord::jump_aggregate},
      {"boundary_jump", &RunRecord::boundary_jump},
      {"seminorm", &RunRecord::seminorm},
      {"homogeneous", &RunRecord::homogeneous},
      {"initial_energy", &RunRecord::initial_energy},
      {"error_l1", &RunRecord::error_l1},
      {"error_l2", &RunRecord::error_l2},
      {"error_w11", &RunRecord::error_w11},
      {"iterations", &RunRecord::iterations},
      {"reason", &RunRecord::reason},
      {"grad_inf", &RunRecord::grad_inf},
      {"wall_time", &RunRecord::wall_time},
      {"status", &RunRecord::status},
      {"message", &RunRecord::message},
  };
  return cols;
}

/// Shortest text that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw std::invalid_argument("report: bad number '" + s + "'");
  return v;
}

/// Strings are written bare; separators and line breaks are replaced.
inline std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

} // namespace detail

inline bool RunRecord::same_outcome(const RunRecord& o) const {
  for (const auto& [name, field] : detail::record_columns()) {
    if (std::string_view(name) == "wall_time") continue;
    const bool eq = std::visit(
        [&](auto member) {
          using T = std::remove_reference_t<decltype(this->*member)>;
          if constexpr (std::is_same_v<T, double>) {
            const double a = this->*member, b = o.*member;
            return a == b || (std::isnan(a) && std::isnan(b));
          } else {
            return this->*member == o.*member;
          }
        },
        field);
    if (!eq) return false;
  }
  return true;
}

inline std::string report_header() {
  std::string h;
  for (const auto& [name, field] : detail::record_columns()) {
    if (!h.empty()) h += ',';
    h += name;
  }
  return h;
}

inline std::string format_record(const RunRecord& r) {
  std::string line;
  bool first = true;
  for (const auto& [name, field] : detail::record_columns()) {
    if (!first) line += ',';
    first = false;
    std::visit(
        [&](auto member) {
          using T = std::remove_cvref_t<decltype(r.*member)>;
          if constexpr (std::is_same_v<T, double>) line += detail::format_double(r.*member);
          else if constexpr (std::is_same_v<T, int>) line += std::to_string(r.*member);
          else line += detail::sanitize(r.*member);
        },
        field);
  }
  return line;
}

inline void write_report_csv(const std::vector<RunRecord>& records, std::ostream& os) {
  os << report_header() << '\n';
  for (const auto& r : records) os << format_record(r) << '\n';
}

inline void write_report_csv(const std::vector<RunRecord>& records, const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  write_report_csv(records, os);
}

/// Reads a report written by write_report_csv. Columns are matched by
/// header name; unknown columns are ignored and missing ones keep defaults.
inline std::vector<RunRecord> read_report_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("report: empty input");
  const auto header = detail::split_csv_line(line);
  const auto& cols = detail::record_columns();
  std::vector<const detail::RecordField*> slots;
  for (const auto& h : header) {
    const detail::RecordField* f = nullptr;
    for (const auto& [name, field] : cols)
      if (h == name) f = &field;
    slots.push_back(f);
  }
  std::vector<RunRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) throw std::runtime_error("report: row has the wrong number of cells");
    RunRecord r;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!slots[i]) continue;
      std::visit(
          [&](auto member) {
            using T = std::remove_cvref_t<decltype(r.*member)>;
            if constexpr (std::is_same_v<T, double>) r.*member = detail::parse_double(cells[i]);
            else if constexpr (std::is_same_v<T, int>) r.*member = std::stoi(cells[i]);
            else r.*member = cells[i];
          },
          *slots[i]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<RunRecord> read_report_csv(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("cannot read " + file.string());
  return read_report_csv(is);
}

/// Per-iteration log: minimizer trace zipped with the term breakdown at each
/// accepted iterate.
inline void write_trace_csv(const MinimizeResult& result, const std::vector<AssembledEnergy>& terms,
                            const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  using detail::format_double;
  os << "iteration,energy,grad_inf,step,bulk,consistency,penalty,jump_aggregate\n";
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    const auto& t = result.trace[i];
    os << t.iteration << ',' << format_double(t.energy) << ',' << format_double(t.grad_inf) << ','
       << format_double(t.step);
    if (i < terms.size())
      os << ',' << format_double(terms[i].bulk) << ',' << format_double(terms[i].consistency) << ','
         << format_double(terms[i].penalty) << ',' << format_double(terms[i].jump_aggregate);
    else
      os << ",,,,";
    os << '\n';
  }
}

} // namespace dgrelax

#endif
