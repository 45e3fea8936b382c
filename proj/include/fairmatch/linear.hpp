#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fairmatch/error.hpp"
#include "fairmatch/features.hpp"

namespace fairmatch {

struct LinearModel {
  std::vector<double> weights;
  double intercept = 0.0;

  double predict_row(const double* row, size_t cols) const {
    double z = intercept;
    for (size_t c = 0; c < cols; ++c) z += weights[c] * row[c];
    return z;
  }
};

// Ridge regression via the normal equations; the intercept is unpenalized.
// The L2 term keeps the system solvable even with fewer rows than columns.
inline LinearModel fit_linear(const FeatureMatrix& X, const std::vector<double>& y,
                              double lambda) {
  require(X.rows > 0, "fit_linear: empty input");
  require(X.rows == y.size(), "fit_linear: row/target length mismatch");
  require(lambda >= 0, "fit_linear: negative lambda");

  const auto d = static_cast<Eigen::Index>(X.cols);
  const auto n = static_cast<Eigen::Index>(X.rows);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      Xm(X.data.data(), n, d);
  Eigen::Map<const Eigen::VectorXd> ym(y.data(), n);

  Eigen::MatrixXd G(d + 1, d + 1);
  G.topLeftCorner(d, d).noalias() = Xm.transpose() * Xm;
  G.topLeftCorner(d, d).diagonal().array() += lambda;
  Eigen::VectorXd col_sums = Xm.colwise().sum();
  G.block(0, d, d, 1) = col_sums;
  G.block(d, 0, 1, d) = col_sums.transpose();
  G(d, d) = static_cast<double>(n);

  Eigen::VectorXd rhs(d + 1);
  rhs.head(d).noalias() = Xm.transpose() * ym;
  rhs(d) = ym.sum();

  Eigen::VectorXd theta = G.ldlt().solve(rhs);
  LinearModel model;
  model.weights.assign(theta.data(), theta.data() + d);
  model.intercept = theta(d);
  return model;
}

inline std::vector<double> predict(const LinearModel& m, const FeatureMatrix& X) {
  require(m.weights.size() == X.cols, "linear predict: column count mismatch");
  std::vector<double> out(X.rows);
  for (size_t r = 0; r < X.rows; ++r) out[r] = m.predict_row(X.row(r), X.cols);
  return out;
}

}  // namespace fairmatch
