#include <matcol/core.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include <matcol/parallel.hpp>

namespace matcol {

ColumnSamplingDistribution::ColumnSamplingDistribution(Vector probs) : probs_(std::move(probs)) {
  const Index n = probs_.size();
  if (n < 1) throw ConfigError("column distribution must have at least one entry");
  require_finite(probs_, "column distribution");
  cdf_.resize(n);
  double sum = 0.0;
  min_prob_ = probs_[0];
  for (Index i = 0; i < n; ++i) {
    if (probs_[i] <= 0.0)
      throw ConfigError("column distribution: p_" + std::to_string(i) + " must be positive");
    min_prob_ = std::min(min_prob_, probs_[i]);
    sum += probs_[i];
    cdf_[i] = sum;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ConfigError("column distribution: probabilities sum to " + std::to_string(sum) +
                      ", expected 1");
  cdf_.back() = 1.0;
}

ColumnSamplingDistribution ColumnSamplingDistribution::uniform(Index n) {
  if (n < 1) throw ConfigError("column distribution must have at least one entry");
  return ColumnSamplingDistribution(Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

Index ColumnSamplingDistribution::sample(Rng& rng) const {
  const double u = rng.next_unit();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const Index i = static_cast<Index>(it - cdf_.begin());
  return std::min(i, size() - 1);
}

void ObservationSet::validate() const {
  if (rows < 1 || cols < 1) throw ConfigError("observation set: empty shape");
  if (entries_per_column < 1) throw ConfigError("observation set: s must be at least 1");
  if (full_columns.empty()) throw ConfigError("observation set: no full columns drawn");

  std::vector<char> state(cols, 0);  // 0 unseen, 1 full, 2 partial
  for (const auto& fc : full_columns) {
    if (fc.index < 0 || fc.index >= cols)
      throw ConfigError("observation set: full column index out of range");
    if (fc.values.size() != rows)
      throw ConfigError("observation set: full column " + std::to_string(fc.index) +
                        " has wrong length");
    require_finite(fc.values, "observation set: full column");
    state[fc.index] = 1;
  }
  for (const auto& pc : partial_columns) {
    if (pc.index < 0 || pc.index >= cols)
      throw ConfigError("observation set: partial column index out of range");
    if (state[pc.index] == 1)
      throw ConfigError("observation set: column " + std::to_string(pc.index) +
                        " is both full and partial");
    if (state[pc.index] == 2)
      throw ConfigError("observation set: duplicate partial column " + std::to_string(pc.index));
    if (static_cast<Index>(pc.rows.size()) != entries_per_column)
      throw ConfigError("observation set: partial column " + std::to_string(pc.index) +
                        " has " + std::to_string(pc.rows.size()) + " entries, expected s = " +
                        std::to_string(entries_per_column));
    if (pc.values.size() != static_cast<Index>(pc.rows.size()))
      throw ConfigError("observation set: rows/values length mismatch in column " +
                        std::to_string(pc.index));
    for (const Index row : pc.rows)
      if (row < 0 || row >= rows)
        throw ConfigError("observation set: row index out of range in column " +
                          std::to_string(pc.index));
    require_finite(pc.values, "observation set: partial column");
    state[pc.index] = 2;
  }
  for (Index i = 0; i < cols; ++i)
    if (state[i] == 0)
      throw ConfigError("observation set: column " + std::to_string(i) +
                        " is neither full nor partial");
}

void CompletionConfig::validate(Index m, Index n) const {
  if (target_rank < 1 || target_rank > std::min(m, n))
    throw ConfigError("target rank must lie in [1, min(m, n)]");
  if (num_full_columns < 1) throw ConfigError("d must be at least 1");
  if (entries_per_column < 1) throw ConfigError("s must be at least 1");
  if (distribution.size() != n)
    throw ConfigError("column distribution length " + std::to_string(distribution.size()) +
                      " does not match n = " + std::to_string(n));
  if (rank_tolerance < 0.0) throw ConfigError("rank tolerance must be nonnegative");
  if (regularization < 0.0) throw ConfigError("regularization must be nonnegative");
  // Draws are with replacement, so exceeding the shape is legitimate.
  if (num_full_columns > n)
    warn("d = " + std::to_string(num_full_columns) + " exceeds n = " + std::to_string(n) +
         "; duplicate column draws will occur");
  if (entries_per_column > m)
    warn("s = " + std::to_string(entries_per_column) + " exceeds m = " + std::to_string(m) +
         "; repeated row draws will occur");
}

ColumnSample sample_full_columns(const Matrix& source, const ColumnSamplingDistribution& dist,
                                 Index d, std::uint64_t seed) {
  if (dist.size() != source.cols())
    throw ConfigError("column distribution length " + std::to_string(dist.size()) +
                      " does not match matrix with " + std::to_string(source.cols()) +
                      " columns");
  if (d < 1) throw ConfigError("d must be at least 1");

  Rng rng(seed);
  ColumnSample out;
  out.indices.resize(d);
  out.scaled.resize(source.rows(), d);
  for (Index j = 0; j < d; ++j) {
    const Index i = dist.sample(rng);
    out.indices[j] = i;
    out.scaled.col(j) = source.col(i) / std::sqrt(static_cast<double>(d) * dist.prob(i));
  }
  return out;
}

ColumnSpaceBasis column_space(const Matrix& sample, Index target_rank, double rank_tolerance) {
  if (sample.rows() < 1 || sample.cols() < 1)
    throw ConfigError("column sample must be nonempty");
  if (target_rank < 1) throw ConfigError("target rank must be at least 1");
  require_finite(sample, "column sample");

  Eigen::BDCSVD<Matrix> svd(sample, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const double sigma1 = sv(0);
  if (!(sigma1 > 0.0))
    throw DegenerateInputError("column sample is identically zero; no column space");

  Index numerical_rank = 0;
  for (Index k = 0; k < sv.size(); ++k)
    if (sv(k) > rank_tolerance * sigma1) ++numerical_rank;

  const Index r_hat = std::min(target_rank, numerical_rank);
  return ColumnSpaceBasis{svd.matrixU().leftCols(r_hat), r_hat};
}

RecoveredColumn recover_column(const ColumnSpaceBasis& basis, std::span<const Index> rows,
                               const Vector& values, double regularization) {
  const Matrix& u = basis.basis;
  const Index r_hat = basis.effective_rank;
  const Index m = u.rows();
  const Index s = static_cast<Index>(rows.size());
  if (s < 1) throw ConfigError("recover_column: at least one observed entry required");
  if (values.size() != s) throw ConfigError("recover_column: rows/values length mismatch");
  if (regularization < 0.0) throw ConfigError("recover_column: negative regularization");

  Matrix u_obs(s, r_hat);
  for (Index k = 0; k < s; ++k) {
    const Index row = rows[k];
    if (row < 0 || row >= m) throw ConfigError("recover_column: row index out of range");
    u_obs.row(k) = u.row(row);
  }

  Matrix gram = u_obs.transpose() * u_obs;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues()(0);
  const double max_eig = eig.eigenvalues()(r_hat - 1);
  const bool singular = !(max_eig > 0.0) || min_eig <= max_eig * kSingularRelTol;

  if (singular && regularization == 0.0)
    throw SingularSystemError(
        "normal-equation system is singular (min eigenvalue " + std::to_string(min_eig) +
            "); retry with regularization > 0",
        -1, min_eig);

  if (regularization > 0.0) gram.diagonal().array() += regularization;
  const Vector rhs = u_obs.transpose() * values;
  const Vector z = gram.ldlt().solve(rhs);
  return RecoveredColumn{u * z, min_eig, singular};
}

CompletionReport complete(const ObservationSet& obs, const CompletionConfig& config, int jobs,
                          const Matrix* ground_truth) {
  obs.validate();
  const Index m = obs.rows;
  const Index n = obs.cols;
  config.validate(m, n);
  if (obs.num_draws() != config.num_full_columns)
    throw ConfigError("observation set has " + std::to_string(obs.num_draws()) +
                      " full draws, config expects d = " +
                      std::to_string(config.num_full_columns));
  if (obs.entries_per_column != config.entries_per_column)
    throw ConfigError("observation set has s = " + std::to_string(obs.entries_per_column) +
                      ", config expects s = " + std::to_string(config.entries_per_column));
  if (ground_truth && (ground_truth->rows() != m || ground_truth->cols() != n))
    throw ConfigError("ground truth shape does not match observation set");

  // Scaled column sample; duplicate draws keep their individual weights.
  const Index d = obs.num_draws();
  Matrix sample(m, d);
  for (Index j = 0; j < d; ++j) {
    const auto& fc = obs.full_columns[j];
    sample.col(j) = fc.values / std::sqrt(static_cast<double>(d) * config.distribution.prob(fc.index));
  }

  const ColumnSpaceBasis basis = column_space(sample, config.target_rank, config.rank_tolerance);

  CompletionReport report;
  report.effective_rank = basis.effective_rank;
  report.recovered.resize(m, n);

  // Fully observed columns are emitted unscaled, exactly as observed.
  for (const auto& fc : obs.full_columns) report.recovered.col(fc.index) = fc.values;

  const Index num_partial = static_cast<Index>(obs.partial_columns.size());
  report.partial_column_indices.resize(num_partial);
  report.per_column_min_eigenvalue.resize(num_partial);
  std::vector<char> was_singular(num_partial, 0);
  std::vector<char> failed(num_partial, 0);
  std::vector<double> failed_min_eig(num_partial, 0.0);

  parallel_for(num_partial, jobs, [&](Index k) {
    const auto& pc = obs.partial_columns[k];
    report.partial_column_indices[k] = pc.index;
    try {
      RecoveredColumn rec = recover_column(basis, pc.rows, pc.values, config.regularization);
      report.recovered.col(pc.index) = rec.values;
      report.per_column_min_eigenvalue[k] = rec.min_eigenvalue;
      was_singular[k] = rec.singular ? 1 : 0;
    } catch (const SingularSystemError& e) {
      failed[k] = 1;
      failed_min_eig[k] = e.min_eigenvalue;
      report.per_column_min_eigenvalue[k] = e.min_eigenvalue;
    }
  });

  for (Index k = 0; k < num_partial; ++k) {
    if (failed[k]) {
      const Index column = obs.partial_columns[k].index;
      throw SingularSystemError("column " + std::to_string(column) +
                                    ": normal-equation system is singular (min eigenvalue " +
                                    std::to_string(failed_min_eig[k]) +
                                    "); retry with regularization > 0",
                                column, failed_min_eig[k]);
    }
    if (was_singular[k]) ++report.regularized_columns;
  }

  if (ground_truth) {
    const double denom = ground_truth->norm();
    if (denom == 0.0)
      throw DegenerateInputError("ground truth matrix is zero; relative error undefined");
    report.relative_frobenius_error = (*ground_truth - report.recovered).norm() / denom;
  }
  return report;
}

Matrix best_rank_r(const Matrix& m, Index r) {
  if (r < 1 || r > std::min(m.rows(), m.cols()))
    throw ConfigError("best_rank_r: rank must lie in [1, min(m, n)]");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU().leftCols(r) * svd.singularValues().head(r).asDiagonal() *
         svd.matrixV().leftCols(r).transpose();
}

}  // namespace matcol
