#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <matcol/rng.hpp>
#include <matcol/types.hpp>

namespace matcol {

// Numerical rank of a column sample counts singular values above
// rank_tolerance * sigma_1.
inline constexpr double kDefaultRankTolerance = 1e-9;

// A normal-equation system whose eigenvalue ratio falls below this is
// treated as singular; well-conditioned systems sit many orders above it.
inline constexpr double kSingularRelTol = 1e-12;

// Probability distribution {p_i} over column indices used to draw fully
// observed columns. Validates p_i > 0 and sum(p) = 1 (tolerance 1e-12) on
// construction.
class ColumnSamplingDistribution {
 public:
  explicit ColumnSamplingDistribution(Vector probs);

  static ColumnSamplingDistribution uniform(Index n);

  Index size() const { return probs_.size(); }
  double prob(Index i) const { return probs_[i]; }
  const Vector& probs() const { return probs_; }
  double min_prob() const { return min_prob_; }

  // One draw by inverse CDF; Pr[result = i] = p_i.
  Index sample(Rng& rng) const;

 private:
  Vector probs_;
  std::vector<double> cdf_;
  double min_prob_ = 0.0;
};

enum class ObservationMode {
  kAligned,      // all partial columns share one row multiset
  kIndependent,  // each partial column draws its own row multiset
};

struct FullColumn {
  Index index;
  Vector values;  // the unscaled source column, length m
};

struct PartialColumn {
  Index index;
  std::vector<Index> rows;  // multiset of row indices, |rows| = s, with repeats
  Vector values;            // aligned with rows
};

// Which columns were drawn fully (in draw order, duplicates kept: each draw
// carries its own 1/sqrt(d p) weight in the column sample) and, for every
// remaining column, the observed row multiset and values.
struct ObservationSet {
  Index rows = 0;                // m
  Index cols = 0;                // n
  Index entries_per_column = 0;  // s
  ObservationMode mode = ObservationMode::kIndependent;
  std::vector<FullColumn> full_columns;        // d draws
  std::vector<PartialColumn> partial_columns;  // ascending column index

  Index num_draws() const { return static_cast<Index>(full_columns.size()); }

  // Throws ConfigError unless every column index appears either among the
  // full draws (at least once) or as exactly one partial column, never both,
  // all indices are in range, every partial column has s entries, and all
  // values are finite.
  void validate() const;
};

struct CompletionConfig {
  Index target_rank;         // r
  Index num_full_columns;    // d, counted in draws (repeats allowed)
  Index entries_per_column;  // s, drawn with replacement
  ColumnSamplingDistribution distribution;
  std::uint64_t rng_seed = 0;
  double rank_tolerance = kDefaultRankTolerance;
  double regularization = 0.0;  // 0 fails loudly on singular systems

  // Shape checks against an m x n source; d > n and s > m only warn since
  // draws are with replacement.
  void validate(Index m, Index n) const;
};

// Orthonormal basis of the recovered column space.
struct ColumnSpaceBasis {
  Matrix basis;          // m x r_hat, orthonormal columns
  Index effective_rank;  // r_hat = min(target rank, numerical rank)
};

struct CompletionReport {
  Matrix recovered;  // m x n
  Index effective_rank = 0;
  std::vector<Index> partial_column_indices;
  std::vector<double> per_column_min_eigenvalue;  // aligned with indices above
  Index regularized_columns = 0;  // singular systems rescued by regularization
  std::optional<double> relative_frobenius_error;  // set when truth is given
};

struct ColumnSample {
  std::vector<Index> indices;  // d draws in order
  Matrix scaled;               // m x d, column j = source(:, i_j) / sqrt(d p_{i_j})
};

// Draws d column indices with Pr[i_j = i] = p_i and assembles the scaled
// column sample. Reproducible from the seed.
ColumnSample sample_full_columns(const Matrix& source, const ColumnSamplingDistribution& dist,
                                 Index d, std::uint64_t seed);

// Top left singular vectors of the scaled column sample. The effective rank
// is min(target_rank, numerical rank at rank_tolerance). Throws
// DegenerateInputError when the sample is identically zero.
ColumnSpaceBasis column_space(const Matrix& sample, Index target_rank, double rank_tolerance);

struct RecoveredColumn {
  Vector values;         // length m
  double min_eigenvalue; // smallest eigenvalue of the unregularized system
  bool singular;         // system was singular before regularization
};

// Closed-form recovery of one partially observed column: solves the normal
// equations of min_z ||values - U_rows z||_2 over the row multiset (repeats
// contribute repeated equations) and lifts by the basis. With
// regularization > 0 the system matrix gets a ridge term; the reported
// min_eigenvalue is always the unregularized one. Throws SingularSystemError
// (column = -1) when the system is singular and regularization is 0.
RecoveredColumn recover_column(const ColumnSpaceBasis& basis, std::span<const Index> rows,
                               const Vector& values, double regularization);

// Runs the full completion: scaled column sample from the full draws, column
// space extraction, per-column recovery of every partial column, and verbatim
// copy of fully observed columns. Deterministic given the observation set;
// per-column solves run on up to `jobs` threads. SingularSystemError carries
// the offending column index (the smallest such index when several fail).
CompletionReport complete(const ObservationSet& obs, const CompletionConfig& config,
                          int jobs = 1, const Matrix* ground_truth = nullptr);

// Best rank-r approximation in Frobenius norm (truncated SVD).
Matrix best_rank_r(const Matrix& m, Index r);

}  // namespace matcol
