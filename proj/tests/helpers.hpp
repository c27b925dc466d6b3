#pragma once

// Shared test-side utilities: running the CLI binary, parsing its CSV
// output, and the least-squares regression oracle used by the Gaussian
// exactness checks. Test-only code; the library never includes this.

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "pcme/matrix.hpp"

namespace testutil {

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr interleaved
};

inline CommandResult run_command(const std::string& cmd) {
  CommandResult result;
  FILE* pipe = ::popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed: " + cmd);
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe))
    result.output.append(buf.data(), n);
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string cell;
    if (first) {
      while (std::getline(cells, cell, ',')) table.header.push_back(cell);
      first = false;
      continue;
    }
    std::vector<double> row;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    table.rows.push_back(std::move(row));
  }
  return table;
}

/// Ordinary least squares of outputs X in R^n on regressors (1, Y) in
/// R^{p}, from accumulated sufficient statistics. Returns coefficients
/// (p x n), their standard errors, and the per-output residual variance.
struct OlsFit {
  pcme::Matrix coef;      // p x n
  pcme::Matrix std_err;   // p x n
  pcme::Vec residual_var; // length n
  std::int64_t samples = 0;
};

class OlsAccumulator {
 public:
  OlsAccumulator(std::size_t p, std::size_t n)
      : p_(p), n_(n), ztz_(p, p), ztx_(p, n), xtx_diag_(n, 0.0) {}

  void add(const pcme::Vec& z, const pcme::Vec& x) {
    for (std::size_t i = 0; i < p_; ++i) {
      for (std::size_t j = 0; j < p_; ++j) ztz_(i, j) += z[i] * z[j];
      for (std::size_t k = 0; k < n_; ++k) ztx_(i, k) += z[i] * x[k];
    }
    for (std::size_t k = 0; k < n_; ++k) xtx_diag_[k] += x[k] * x[k];
    ++count_;
  }

  OlsFit fit() const {
    OlsFit f;
    f.samples = count_;
    f.coef = pcme::solve(ztz_, ztx_);
    const pcme::Matrix cov_base = pcme::inverse(ztz_);
    f.std_err = pcme::Matrix(p_, n_);
    f.residual_var.assign(n_, 0.0);
    for (std::size_t k = 0; k < n_; ++k) {
      double rss = xtx_diag_[k];
      for (std::size_t i = 0; i < p_; ++i) rss -= f.coef(i, k) * ztx_(i, k);
      const double sigma2 =
          std::max(0.0, rss) / static_cast<double>(count_ - static_cast<std::int64_t>(p_));
      f.residual_var[k] = sigma2;
      for (std::size_t i = 0; i < p_; ++i)
        f.std_err(i, k) = std::sqrt(std::max(0.0, sigma2 * cov_base(i, i)));
    }
    return f;
  }

 private:
  std::size_t p_, n_;
  pcme::Matrix ztz_, ztx_;
  pcme::Vec xtx_diag_;
  std::int64_t count_ = 0;
};

}  // namespace testutil
