#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "factorcop/groups.hpp"

namespace factorcop {

// N x D observations with entries strictly inside (0,1).  Values outside
// [kClampLow, 1-kClampLow] are clamped on construction and counted, so
// downstream log-densities stay finite.
struct UniformData {
  static constexpr double kClampLow = 1e-10;

  Eigen::MatrixXd values;
  GroupStructure groups;
  int clamped = 0;  // entries adjusted on ingestion

  UniformData() = default;
  UniformData(Eigen::MatrixXd vals, GroupStructure g);

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
};

struct NormalScores {
  Eigen::MatrixXd values;
  GroupStructure groups;

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
};

// One latent realization per observation row: v0 (global factor, when the
// structure has one) and v (group factors, or the single factor).
struct LatentRealization {
  Eigen::VectorXd v0;  // size 0 when absent
  Eigen::MatrixXd v;   // N x G, or N x 1

  bool has_v0() const { return v0.size() > 0; }
};

// (rank - 0.5)/N with ties broken in first-occurrence order.
std::vector<double> rank_to_uniform(const std::vector<double>& x);
Eigen::VectorXd rank_to_uniform(const Eigen::VectorXd& x);

NormalScores to_normal_scores(const UniformData& u);

// CSV: comma-separated, '.' decimal, no quoting, optional single header row.
UniformData load_csv(const std::string& path, const GroupStructure& groups,
                     bool header = false);
void save_csv(const Eigen::MatrixXd& m, const std::string& path,
              const std::vector<std::string>& header = {});
Eigen::MatrixXd load_csv_matrix(const std::string& path, bool header = false);

}  // namespace factorcop
