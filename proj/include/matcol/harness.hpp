#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include <matcol/types.hpp>

namespace matcol {

// Grid and search parameters for the minimal-(d, s) phase-transition sweep.
// Matrices are square (m = n). A cell succeeds at a probe value only if all
// `trials` trials reach success_threshold relative Frobenius error.
struct SweepSpec {
  std::vector<Index> sizes;
  std::vector<Index> ranks;
  int trials = 10;
  double success_threshold = 1e-8;
  double delta = 0.1;  // failure probability for the theorem thresholds
  std::uint64_t base_seed = 0;
  int jobs = 1;

  std::vector<std::string> validate() const;  // all violations, empty when valid
};

struct ProbeTrial {
  std::uint64_t seed;
  double rel_error;
  bool success;
};

struct Probe {
  Index value;
  bool all_success;
  std::vector<ProbeTrial> trials;
};

// Outcome of one doubling-plus-bisection search over d or s for one (n, r)
// cell. `probes` is the full probe log (the sampled recovery-rate curve);
// the certificate fields witness that `minimal` succeeds and minimal - 1
// fails (vacuous when minimal == 1).
struct SearchResult {
  Index n = 0;
  Index r = 0;
  char searched = 'd';   // 'd' or 's'
  Index fixed_value = 0; // the non-searched parameter
  bool found = false;
  Index minimal = 0;
  bool lower_neighbor_failed = false;
  double reference_mu_r = 0.0;  // mu(r) of the cell's reference instance
  Index threshold_d = 0;        // theorem thresholds at reference_mu_r
  Index threshold_s = 0;
  std::vector<Probe> probes;
};

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double residual_sum = 0.0;  // RSS
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SearchResult> d_cells;
  std::vector<SearchResult> s_cells;
  RegressionFit d_vs_r_ln_r, d_vs_r2_ln_r;
  RegressionFit s_vs_r_ln_r, s_vs_r2_ln_r;
};

// Smallest d (s fixed) such that all trials recover exactly; doubling until
// success, then bisection, fresh deterministic seeds per probe. Returns the
// populated SearchResult; found == false when no d <= n succeeds.
SearchResult find_minimal_d(Index n, Index r, Index s_fixed, const SweepSpec& spec);

// Same search over s with d fixed; the search is capped at s = m.
SearchResult find_minimal_s(Index n, Index r, Index d_fixed, const SweepSpec& spec);

// Runs both searches over the whole grid and fits minimal_d and minimal_s
// against r ln r and r^2 ln r. The non-searched parameter defaults to twice
// the theorem threshold of the cell's reference instance; for the s-search
// the fixed d is additionally capped near n/4 so partial columns remain.
SweepResult run_sweep(const SweepSpec& spec);

// Equal-budget comparison grid on noisy square matrices. Budgets are d
// values with s = d; Nystrom row/column counts come from match_budget.
struct ComparisonSpec {
  Index n = 1000;
  std::vector<Index> ranks;
  std::vector<double> sigmas;
  std::vector<Index> budgets;
  int trials = 10;
  double delta = 0.1;
  std::uint64_t base_seed = 0;
  int jobs = 1;

  std::vector<std::string> validate() const;
};

struct ComparisonCell {
  Index r = 0;
  double sigma = 0.0;
  Index budget = 0;  // d = s
  std::vector<double> alg1_errors;     // ||M - M_hat||_F per trial
  std::vector<double> nystrom_errors;
  double alg1_mean = 0.0, alg1_stddev = 0.0;
  double nystrom_mean = 0.0, nystrom_stddev = 0.0;
  // Additive-bound check per trial: ||M-M_hat||_F^2 <= ||M-M_r||_F^2 +
  // eps ||M||_F^2 with eps = sqrt(64 ln(2/delta) mu(M) r / d).
  int bound_holds = 0;
  double epsilon_mean = 0.0;
  Index regularized_columns = 0;  // singular solves rescued across trials
  // Entry-budget audit (conventions reported as-is, not forced equal).
  std::int64_t alg1_entries = 0;     // d m + (n - d) s
  std::int64_t nystrom_entries = 0;  // c m + rho n - c rho
  Index nystrom_cols = 0, nystrom_rows = 0;
};

struct ComparisonResult {
  ComparisonSpec spec;
  std::vector<ComparisonCell> cells;
};

ComparisonResult run_comparison(const ComparisonSpec& spec);

// Machine-readable emitters. JSON carries the full structure including probe
// logs; CSV is flat, one row per cell/trial.
nlohmann::json to_json(const SweepResult& result);
std::string to_csv(const SweepResult& result);
nlohmann::json to_json(const ComparisonResult& result);
std::string to_csv(const ComparisonResult& result);

// Ordinary least squares y = intercept + slope x with R^2 and RSS.
RegressionFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace matcol
