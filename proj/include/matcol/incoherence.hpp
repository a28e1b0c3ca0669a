#pragma once

#include <optional>

#include <matcol/core.hpp>
#include <matcol/types.hpp>

namespace matcol {

// Row-norm concentration of the top-r left and right singular bases of M:
// max over the two bases of max_i (dim/r) * ||row_i||^2. In [1, max(m,n)/r].
// When r exceeds the numerical rank the definition still evaluates on the
// returned singular vectors; a warning is emitted because the basis is not
// unique there.
double mu_r(const Matrix& m, Index r);

// Row-norm concentration of a recovered basis: max_i (m/r_hat) * ||U_(i)||^2.
double mu_hat(const ColumnSpaceBasis& basis);

// Column-norm concentration: n * max_i ||m_i||^2 / ||M||_F^2. In [1, n].
double mu_matrix(const Matrix& m);

// Vector coherence: m * ||x||_inf^2 / ||x||_2^2. In [1, m].
double mu_vector(const Vector& x);

struct CoherenceProfile {
  double mu_r = 0.0;
  double mu_hat = 0.0;
  double mu_m = 0.0;
  std::optional<std::vector<double>> per_column;  // mu(x) per column
};

CoherenceProfile coherence_profile(const Matrix& m, Index r, bool per_column = false);

struct SamplingThresholds {
  Index d_min;
  Index s_min;
};

// Sufficient sample sizes for exact recovery at failure probability delta:
// d >= 7 mu r ln(2r/delta) / (n p_min) and s >= 7 mu r ln(2rn/delta).
// Without p_min the distribution is uniform and n p_min = 1. Results are
// clamped to at least 1.
SamplingThresholds theorem_thresholds(Index m, Index n, Index r, double mu, double delta,
                                      std::optional<double> p_min = std::nullopt);

}  // namespace matcol
