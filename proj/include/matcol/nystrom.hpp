#pragma once

#include <cstdint>

#include <matcol/types.hpp>

namespace matcol {

struct NystromConfig {
  Index num_columns;  // c
  Index num_rows;     // rho
  Index target_rank;  // r; may exceed min(c, rho), the approximation then truncates
  std::uint64_t seed = 0;

  void validate(Index m, Index n) const;
};

// Generalized Nystrom / CUR approximation: c columns and rho rows sampled
// uniformly without replacement, M_hat = C * pinv_r(W) * R with W the
// row-column intersection and pinv_r the rank-r truncated pseudo-inverse
// (singular values below 1e-10 * sigma_1(W) are dropped). Warns and truncates
// when rank(W) < r; a zero W yields the zero matrix.
Matrix nystrom_approx(const Matrix& source, const NystromConfig& config);

// Equal-budget configuration: alpha r + alpha r^2 = d + s, c = ceil(alpha r),
// rho = ceil(alpha r^2), clamped to the matrix shape with a warning.
NystromConfig match_budget(Index d, Index s, Index n, Index m, Index r, std::uint64_t seed = 0);

}  // namespace matcol
