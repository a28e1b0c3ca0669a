#include <matcol/incoherence.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

namespace matcol {

namespace {

double max_row_concentration(const Eigen::Ref<const Matrix>& basis, Index dim, Index rank) {
  const double scale = static_cast<double>(dim) / static_cast<double>(rank);
  return scale * basis.rowwise().squaredNorm().maxCoeff();
}

}  // namespace

double mu_r(const Matrix& m, Index r) {
  const Index rows = m.rows();
  const Index cols = m.cols();
  if (r < 1 || r > std::min(rows, cols))
    throw ConfigError("mu_r: rank must lie in [1, min(m, n)]");
  require_finite(m, "mu_r input");

  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  if (!(sv(0) > 0.0)) throw DegenerateInputError("mu_r: zero matrix has no singular basis");
  if (sv(r - 1) <= kDefaultRankTolerance * sv(0))
    warn("mu_r: requested rank " + std::to_string(r) +
         " exceeds the numerical rank; the basis is not unique there");

  const double left = max_row_concentration(svd.matrixU().leftCols(r), rows, r);
  const double right = max_row_concentration(svd.matrixV().leftCols(r), cols, r);
  return std::max(left, right);
}

double mu_hat(const ColumnSpaceBasis& basis) {
  if (basis.effective_rank < 1 || basis.basis.cols() != basis.effective_rank)
    throw ConfigError("mu_hat: malformed basis");
  return max_row_concentration(basis.basis, basis.basis.rows(), basis.effective_rank);
}

double mu_matrix(const Matrix& m) {
  require_finite(m, "mu_matrix input");
  const double total = m.squaredNorm();
  if (!(total > 0.0)) throw DegenerateInputError("mu_matrix: zero matrix");
  const double max_col = m.colwise().squaredNorm().maxCoeff();
  return static_cast<double>(m.cols()) * max_col / total;
}

double mu_vector(const Vector& x) {
  require_finite(x, "mu_vector input");
  const double norm2 = x.squaredNorm();
  if (!(norm2 > 0.0)) throw DegenerateInputError("mu_vector: zero vector");
  const double peak = x.cwiseAbs().maxCoeff();
  return static_cast<double>(x.size()) * peak * peak / norm2;
}

CoherenceProfile coherence_profile(const Matrix& m, Index r, bool per_column) {
  CoherenceProfile profile;
  profile.mu_r = mu_r(m, r);
  profile.mu_m = mu_matrix(m);
  profile.mu_hat = mu_hat(column_space(m, r, kDefaultRankTolerance));
  if (per_column) {
    std::vector<double> values(m.cols());
    for (Index i = 0; i < m.cols(); ++i) values[i] = mu_vector(m.col(i));
    profile.per_column = std::move(values);
  }
  return profile;
}

SamplingThresholds theorem_thresholds(Index m, Index n, Index r, double mu, double delta,
                                      std::optional<double> p_min) {
  if (m < 1 || n < 1) throw ConfigError("theorem_thresholds: empty shape");
  if (r < 1 || r > std::min(m, n))
    throw ConfigError("theorem_thresholds: rank must lie in [1, min(m, n)]");
  if (!(mu >= 1.0)) throw ConfigError("theorem_thresholds: mu must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("theorem_thresholds: delta not in (0, 1)");

  double factor = 1.0;  // n * p_min, identically 1 under uniform sampling
  if (p_min) {
    if (!(*p_min > 0.0)) throw ConfigError("theorem_thresholds: p_min must be positive");
    factor = static_cast<double>(n) * *p_min;
    if (std::abs(factor - 1.0) <= 1e-9) factor = 1.0;  // snap uniform-rounding noise
  }

  const double base = 7.0 * mu * static_cast<double>(r);
  const double d_raw = base * std::log(2.0 * static_cast<double>(r) / delta) / factor;
  const double s_raw =
      base * std::log(2.0 * static_cast<double>(r) * static_cast<double>(n) / delta);
  const auto clamp = [](double x) {
    return x <= 1.0 ? Index{1} : static_cast<Index>(std::ceil(x));
  };
  return SamplingThresholds{clamp(d_raw), clamp(s_raw)};
}

}  // namespace matcol
