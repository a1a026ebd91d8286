#include "factorcop/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "factorcop/stats.hpp"

namespace factorcop {

UniformData::UniformData(Eigen::MatrixXd vals, GroupStructure g)
    : values(std::move(vals)), groups(std::move(g)) {
  if (values.rows() < 1) throw std::invalid_argument("UniformData: need at least one row");
  if (values.cols() != groups.total())
    throw std::invalid_argument("UniformData: column count does not match group sizes");
  const double lo = kClampLow, hi = 1.0 - kClampLow;
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      double& x = values(i, j);
      if (x < lo) { x = lo; ++clamped; }
      else if (x > hi) { x = hi; ++clamped; }
    }
}

std::vector<double> rank_to_uniform(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  if (n < 1) throw std::invalid_argument("rank_to_uniform: empty input");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  // stable sort keeps tied entries in first-occurrence order
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return x[a] < x[b]; });
  std::vector<double> out(n);
  for (int r = 0; r < n; ++r) out[order[r]] = (r + 0.5) / n;
  return out;
}

Eigen::VectorXd rank_to_uniform(const Eigen::VectorXd& x) {
  std::vector<double> v(x.data(), x.data() + x.size());
  std::vector<double> r = rank_to_uniform(v);
  return Eigen::Map<Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
}

NormalScores to_normal_scores(const UniformData& u) {
  NormalScores z;
  z.groups = u.groups;
  z.values.resize(u.values.rows(), u.values.cols());
  for (Eigen::Index i = 0; i < u.values.rows(); ++i)
    for (Eigen::Index j = 0; j < u.values.cols(); ++j) {
      const double p = u.values(i, j);
      if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("to_normal_scores: entry outside (0,1)");
      z.values(i, j) = norm_quantile(p);
    }
  return z;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

Eigen::MatrixXd load_csv_matrix(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header && lineno == 1) continue;
    const auto cells = split_line(line);
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      throw std::runtime_error("load_csv: ragged row at line " + std::to_string(lineno));
    std::vector<double> row;
    row.reserve(cells.size());
    for (size_t c = 0; c < cells.size(); ++c) {
      try {
        size_t used = 0;
        double v = std::stod(cells[c], &used);
        while (used < cells[c].size() && std::isspace(static_cast<unsigned char>(cells[c][used]))) ++used;
        if (used != cells[c].size()) throw std::invalid_argument("trailing");
        row.push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error("load_csv: non-numeric cell at (" + std::to_string(lineno) +
                                 "," + std::to_string(c + 1) + ")");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("load_csv: " + path + " has no data rows");
  Eigen::MatrixXd m(rows.size(), width);
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < width; ++j) m(i, j) = rows[i][j];
  return m;
}

UniformData load_csv(const std::string& path, const GroupStructure& groups, bool header) {
  Eigen::MatrixXd m = load_csv_matrix(path, header);
  if (m.cols() != groups.total())
    throw std::runtime_error("load_csv: file has " + std::to_string(m.cols()) +
                             " columns, groups expect " + std::to_string(groups.total()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!(m(i, j) > 0.0 && m(i, j) < 1.0))
        throw std::runtime_error("load_csv: value out of (0,1) at (" + std::to_string(i + 1) +
                                 "," + std::to_string(j + 1) + ")");
  return UniformData(std::move(m), groups);
}

void save_csv(const Eigen::MatrixXd& m, const std::string& path,
              const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_csv: cannot open " + path);
  if (!header.empty()) {
    for (size_t j = 0; j < header.size(); ++j)
      out << header[j] << (j + 1 < header.size() ? "," : "\n");
  }
  char buf[40];
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.15g", m(i, j));
      out << buf << (j + 1 < m.cols() ? ',' : '\n');
    }
}

}  // namespace factorcop
