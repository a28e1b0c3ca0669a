#pragma once

#include <cstdint>

#include <matcol/core.hpp>
#include <matcol/types.hpp>

namespace matcol {

struct SyntheticSpec {
  Index rows;    // m
  Index cols;    // n
  Index rank;    // r
  double sigma;  // noise standard deviation, 0 for exact low rank
  std::uint64_t seed;

  void validate() const;
};

// Rank-r product of two standard gaussian factor matrices (m x r) * (r x n).
// Requires sigma == 0.
Matrix gen_lowrank(const SyntheticSpec& spec);

struct NoisyMatrix {
  Matrix noisy;  // M = C + R
  Matrix clean;  // C, for error accounting
};

// Low-rank matrix plus i.i.d. N(0, sigma^2) noise. Requires sigma > 0. The
// clean part equals gen_lowrank of the same spec with sigma = 0.
NoisyMatrix gen_noisy(const SyntheticSpec& spec);

// Draws the observation set for `m` under the given config: full columns by
// the config's distribution, then s row draws (with replacement) for every
// remaining column — one shared multiset in aligned mode, fresh ones per
// column in independent mode. Bit-reproducible from config.rng_seed.
ObservationSet gen_observation(const Matrix& m, const CompletionConfig& config,
                               ObservationMode mode);

}  // namespace matcol
