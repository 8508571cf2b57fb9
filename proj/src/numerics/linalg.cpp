#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "sfwm/numerics.hpp"

namespace sfwm::numerics {

void RealGrid::validate() const {
  if (static_cast<Eigen::Index>(row_axis.size()) != values.rows() ||
      static_cast<Eigen::Index>(col_axis.size()) != values.cols()) {
    throw GridMismatch("RealGrid: axis lengths do not match matrix dimensions");
  }
  auto increasing = [](const std::vector<double>& axis) {
    for (std::size_t j = 1; j < axis.size(); ++j)
      if (!(axis[j] > axis[j - 1])) return false;
    return true;
  };
  if (!increasing(row_axis) || !increasing(col_axis)) {
    throw GridMismatch("RealGrid: axes must be strictly increasing");
  }
}

SvdResult svd(const Eigen::MatrixXcd& a, bool compute_vectors) {
  if (!a.allFinite()) throw NoConvergence("svd: matrix has non-finite entries");
  const unsigned options = compute_vectors ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : 0u;
  Eigen::BDCSVD<Eigen::MatrixXcd> solver(a, options);
  if (solver.info() != Eigen::Success) throw NoConvergence("svd: decomposition failed");

  SvdResult result;
  result.singular_values = solver.singularValues();
  if (!result.singular_values.allFinite()) throw NoConvergence("svd: non-finite singular values");
  if (compute_vectors) {
    result.u = solver.matrixU();
    result.v = solver.matrixV();
  }
  return result;
}

SvdResult svd(const RealGrid& grid, bool compute_vectors) {
  grid.validate();
  return svd(Eigen::MatrixXcd(grid.values.cast<Complex>()), compute_vectors);
}

}  // namespace sfwm::numerics
