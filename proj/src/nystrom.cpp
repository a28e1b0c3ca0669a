#include <matcol/nystrom.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <matcol/rng.hpp>

namespace matcol {

namespace {

constexpr double kPinvRelTol = 1e-10;

// Uniform sample without replacement: partial Fisher-Yates, draw order kept.
std::vector<Index> sample_without_replacement(Index population, Index count, Rng& rng) {
  std::vector<Index> pool(population);
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < count; ++i) {
    const Index j = i + static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(population - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

void NystromConfig::validate(Index m, Index n) const {
  if (num_columns < 1 || num_rows < 1)
    throw ConfigError("nystrom config: row and column counts must be at least 1");
  if (target_rank < 1) throw ConfigError("nystrom config: target rank must be at least 1");
  if (num_columns > n)
    throw ConfigError("nystrom config: cannot sample " + std::to_string(num_columns) +
                      " distinct columns from " + std::to_string(n));
  if (num_rows > m)
    throw ConfigError("nystrom config: cannot sample " + std::to_string(num_rows) +
                      " distinct rows from " + std::to_string(m));
}

Matrix nystrom_approx(const Matrix& source, const NystromConfig& config) {
  const Index m = source.rows();
  const Index n = source.cols();
  config.validate(m, n);
  require_finite(source, "nystrom source");

  Rng col_rng(derive_seed(config.seed, kStreamNystromColumns));
  Rng row_rng(derive_seed(config.seed, kStreamNystromRows));
  const std::vector<Index> cols = sample_without_replacement(n, config.num_columns, col_rng);
  const std::vector<Index> rows = sample_without_replacement(m, config.num_rows, row_rng);

  Matrix col_sample(m, config.num_columns);
  for (Index j = 0; j < config.num_columns; ++j) col_sample.col(j) = source.col(cols[j]);
  Matrix row_sample(config.num_rows, n);
  for (Index i = 0; i < config.num_rows; ++i) row_sample.row(i) = source.row(rows[i]);
  Matrix intersection(config.num_rows, config.num_columns);
  for (Index j = 0; j < config.num_columns; ++j)
    intersection.col(j) = row_sample.col(cols[j]);

  Eigen::BDCSVD<Matrix> svd(intersection, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  if (!(sv(0) > 0.0)) {
    warn("nystrom: sampled intersection is zero; returning the zero matrix");
    return Matrix::Zero(m, n);
  }

  Index rank = 0;
  for (Index k = 0; k < sv.size(); ++k)
    if (sv(k) > kPinvRelTol * sv(0)) ++rank;
  if (rank < config.target_rank)
    warn("nystrom: intersection rank " + std::to_string(rank) + " is below target rank " +
         std::to_string(config.target_rank) + "; truncating");
  rank = std::min(rank, config.target_rank);

  // pinv_r(W) = V_r diag(1/sigma) U_r^T, applied to the row sample first.
  const Matrix projected = svd.matrixU().leftCols(rank).transpose() * row_sample;  // rank x n
  const Matrix lifted = sv.head(rank).cwiseInverse().asDiagonal() * projected;
  return col_sample * (svd.matrixV().leftCols(rank) * lifted);
}

NystromConfig match_budget(Index d, Index s, Index n, Index m, Index r, std::uint64_t seed) {
  if (d < 1 || s < 1 || n < 1 || m < 1 || r < 1)
    throw ConfigError("match_budget: all inputs must be positive");

  const double alpha = static_cast<double>(d + s) /
                       (static_cast<double>(r) + static_cast<double>(r) * static_cast<double>(r));
  Index c = static_cast<Index>(std::ceil(alpha * static_cast<double>(r)));
  Index rho = static_cast<Index>(
      std::ceil(alpha * static_cast<double>(r) * static_cast<double>(r)));
  c = std::max<Index>(c, 1);
  rho = std::max<Index>(rho, 1);
  if (c > n) {
    warn("match_budget: alpha r = " + std::to_string(c) + " exceeds n = " + std::to_string(n) +
         "; clamping (budget mismatch)");
    c = n;
  }
  if (rho > m) {
    warn("match_budget: alpha r^2 = " + std::to_string(rho) + " exceeds m = " +
         std::to_string(m) + "; clamping (budget mismatch)");
    rho = m;
  }
  return NystromConfig{c, rho, r, seed};
}

}  // namespace matcol
