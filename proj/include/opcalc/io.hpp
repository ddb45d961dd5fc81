#pragma once

#include "opcalc/hp.hpp"
#include "opcalc/types.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace opcalc {

// Plain-text CSV, row-major, first line `dim=N`; complex entries as `a+bi`
// tokens (pure reals written without the imaginary part).

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline Complex parse_complex_token(const std::string& raw) {
  std::string t = detail::trim(raw);
  if (t.empty()) throw std::invalid_argument("empty numeric token");
  const char* p = t.c_str();
  char* end = nullptr;
  double re = std::strtod(p, &end);
  if (end == p) throw std::invalid_argument("malformed numeric token: " + t);
  if (*end == '\0') return Complex(re, 0.0);
  // remainder must be a signed float followed by 'i'
  const char* q = end;
  char* end2 = nullptr;
  double im = std::strtod(q, &end2);
  if (end2 == q || *end2 != 'i' || *(end2 + 1) != '\0')
    throw std::invalid_argument("malformed complex token: " + t);
  return Complex(re, im);
}

namespace detail {

inline std::vector<std::string> stream_tokens(std::istream& in, int& dim) {
  dim = -1;
  std::vector<std::string> toks;
  std::string line;
  while (std::getline(in, line)) {
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (dim < 0) {
      if (s.rfind("dim=", 0) != 0)
        throw std::invalid_argument("expected dim=N header, got: " + s);
      dim = std::atoi(s.c_str() + 4);
      if (dim <= 0) throw std::invalid_argument("invalid dimension in header: " + s);
      continue;
    }
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell = trim(cell);
      if (!cell.empty()) toks.push_back(cell);
    }
  }
  if (dim < 0) throw std::invalid_argument("missing dim=N header");
  return toks;
}

}  // namespace detail

inline Mat read_matrix_csv(std::istream& in, const std::string& where = "<stream>") {
  int dim = 0;
  std::vector<std::string> toks = detail::stream_tokens(in, dim);
  if (static_cast<int>(toks.size()) != dim * dim)
    throw std::invalid_argument(where + ": expected " + std::to_string(dim * dim) +
                                " entries, found " + std::to_string(toks.size()));
  Mat A(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) A(i, j) = parse_complex_token(toks[i * dim + j]);
  return A;
}

inline Mat read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  return read_matrix_csv(in, path);
}

inline Vec read_vector_csv(std::istream& in, const std::string& where = "<stream>") {
  int dim = 0;
  std::vector<std::string> toks = detail::stream_tokens(in, dim);
  if (static_cast<int>(toks.size()) != dim)
    throw std::invalid_argument(where + ": expected " + std::to_string(dim) + " entries, found " +
                                std::to_string(toks.size()));
  Vec x(dim);
  for (int i = 0; i < dim; ++i) x(i) = parse_complex_token(toks[i]);
  return x;
}

inline Vec read_vector_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  return read_vector_csv(in, path);
}

inline void write_matrix_csv(std::ostream& out, const Mat& A) {
  out << "dim=" << A.rows() << "\n";
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = 0; j < A.cols(); ++j) out << (j ? "," : "") << format_scalar(A(i, j));
    out << "\n";
  }
}

inline void write_matrix_csv(const std::string& path, const Mat& A) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  write_matrix_csv(out, A);
}

inline void write_vector_csv(std::ostream& out, const Vec& x) {
  out << "dim=" << x.size() << "\n";
  for (int i = 0; i < x.size(); ++i) out << format_scalar(x(i)) << "\n";
}

inline void write_vector_csv(const std::string& path, const Vec& x) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  write_vector_csv(out, x);
}

// ---------------------------------------------------------------------------
// Result tables
// ---------------------------------------------------------------------------

inline void write_result_csv(const std::string& path, const ApplyResult& r) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << "index,value,error_estimate,T_star,panels,domain_verdict\n";
  for (int i = 0; i < r.value.size(); ++i)
    out << i << "," << format_scalar(r.value(i)) << "," << format_real(r.error_estimate) << ","
        << format_real(r.T_star) << "," << r.panels_used << "," << verdict_name(r.domain_verdict)
        << "\n";
}

inline void write_oracle_delta_csv(const std::string& path, const Vec& engine, const Vec& oracle) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << "index,engine_value,oracle_value,abs_error,rel_error\n";
  double denom = std::max(oracle.norm(), 1e-290);
  for (int i = 0; i < engine.size(); ++i) {
    double d = std::abs(engine(i) - oracle(i));
    out << i << "," << format_scalar(engine(i)) << "," << format_scalar(oracle(i)) << ","
        << format_real(d) << "," << format_real(d / denom) << "\n";
  }
}

// One suite assertion with its quadrature diagnostics.
struct AssertionRow {
  std::string suite;
  std::string name;
  double deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double error_estimate = 0.0;  // engine-reported certified error, 0 if n/a
  double T_star = 0.0;
  int panels = 0;
};

inline void write_report_csv(const std::string& path, const std::vector<AssertionRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << "suite,assertion,deviation,tolerance,status,error_estimate,T_star,panels\n";
  for (const auto& r : rows)
    out << r.suite << "," << r.name << "," << format_real(r.deviation) << ","
        << format_real(r.tolerance) << "," << (r.pass ? "pass" : "fail") << ","
        << format_real(r.error_estimate) << "," << format_real(r.T_star) << "," << r.panels
        << "\n";
}

inline void write_report_md(const std::string& path, const std::vector<AssertionRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  int failed = 0;
  for (const auto& r : rows)
    if (!r.pass) ++failed;
  out << "# Verification report\n\n";
  out << rows.size() << " assertions, " << failed << " failed.\n\n";
  out << "| suite | assertion | deviation | tolerance | status | error_estimate | T_star | "
         "panels |\n";
  out << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows)
    out << "| " << r.suite << " | " << r.name << " | " << format_real(r.deviation) << " | "
        << format_real(r.tolerance) << " | " << (r.pass ? "pass" : "fail") << " | "
        << format_real(r.error_estimate) << " | " << format_real(r.T_star) << " | " << r.panels
        << " |\n";
}

// ---------------------------------------------------------------------------
// Flat key=value config with [section] headers; '#' starts a comment.
// Section names prefix keys as "section.key".
// ---------------------------------------------------------------------------

inline std::map<std::string, std::string> parse_config(std::istream& in,
                                                       const std::string& path = "<stream>") {
  std::map<std::string, std::string> kv;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = detail::trim(line);
    std::size_t hash = s.find('#');
    if (hash != std::string::npos) s = detail::trim(s.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": malformed section");
      section = detail::trim(s.substr(1, s.size() - 2));
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = detail::trim(s.substr(0, eq));
    std::string val = detail::trim(s.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": empty key");
    kv[section.empty() ? key : section + "." + key] = val;
  }
  return kv;
}

inline std::map<std::string, std::string> parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path);
  return parse_config(in, path);
}

}  // namespace opcalc
