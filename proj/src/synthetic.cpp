#include <matcol/synthetic.hpp>

#include <algorithm>
#include <cmath>

#include <matcol/rng.hpp>

namespace matcol {

namespace {

// Column-major fill order, fixed so instances are bit-reproducible.
void fill_gaussian(Matrix& m, Rng& rng, double scale) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) m(i, j) = scale * rng.next_gaussian();
}

}  // namespace

void SyntheticSpec::validate() const {
  if (rows < 1 || cols < 1) throw ConfigError("synthetic spec: empty shape");
  if (rank < 1 || rank > std::min(rows, cols))
    throw ConfigError("synthetic spec: rank must lie in [1, min(m, n)]");
  if (sigma < 0.0) throw ConfigError("synthetic spec: sigma must be nonnegative");
}

Matrix gen_lowrank(const SyntheticSpec& spec) {
  spec.validate();
  if (spec.sigma != 0.0) throw ConfigError("gen_lowrank requires sigma = 0");

  Rng rng(derive_seed(spec.seed, kStreamCleanFactors));
  Matrix left(spec.rows, spec.rank);
  Matrix right(spec.rank, spec.cols);
  fill_gaussian(left, rng, 1.0);
  fill_gaussian(right, rng, 1.0);
  return left * right;
}

NoisyMatrix gen_noisy(const SyntheticSpec& spec) {
  spec.validate();
  if (!(spec.sigma > 0.0)) throw ConfigError("gen_noisy requires sigma > 0");

  SyntheticSpec clean_spec = spec;
  clean_spec.sigma = 0.0;
  NoisyMatrix out;
  out.clean = gen_lowrank(clean_spec);

  Rng rng(derive_seed(spec.seed, kStreamNoise));
  Matrix noise(spec.rows, spec.cols);
  fill_gaussian(noise, rng, spec.sigma);
  out.noisy = out.clean + noise;
  return out;
}

ObservationSet gen_observation(const Matrix& m, const CompletionConfig& config,
                               ObservationMode mode) {
  const Index rows = m.rows();
  const Index cols = m.cols();
  config.validate(rows, cols);
  require_finite(m, "observation source");

  ObservationSet obs;
  obs.rows = rows;
  obs.cols = cols;
  obs.entries_per_column = config.entries_per_column;
  obs.mode = mode;

  Rng col_rng(derive_seed(config.rng_seed, kStreamColumnDraws));
  std::vector<char> drawn(cols, 0);
  obs.full_columns.reserve(config.num_full_columns);
  for (Index j = 0; j < config.num_full_columns; ++j) {
    const Index i = config.distribution.sample(col_rng);
    drawn[i] = 1;
    obs.full_columns.push_back(FullColumn{i, m.col(i)});
  }

  const Index s = config.entries_per_column;
  std::vector<Index> shared_rows;
  if (mode == ObservationMode::kAligned) {
    Rng row_rng(derive_seed(config.rng_seed, kStreamRowDraws));
    shared_rows.resize(s);
    for (Index k = 0; k < s; ++k)
      shared_rows[k] = static_cast<Index>(row_rng.next_below(static_cast<std::uint64_t>(rows)));
  }

  for (Index i = 0; i < cols; ++i) {
    if (drawn[i]) continue;
    PartialColumn pc;
    pc.index = i;
    if (mode == ObservationMode::kAligned) {
      pc.rows = shared_rows;
    } else {
      Rng row_rng(derive_seed(config.rng_seed, kStreamRowDraws, static_cast<std::uint64_t>(i)));
      pc.rows.resize(s);
      for (Index k = 0; k < s; ++k)
        pc.rows[k] = static_cast<Index>(row_rng.next_below(static_cast<std::uint64_t>(rows)));
    }
    pc.values.resize(s);
    for (Index k = 0; k < s; ++k) pc.values[k] = m(pc.rows[k], i);
    obs.partial_columns.push_back(std::move(pc));
  }
  return obs;
}

}  // namespace matcol
