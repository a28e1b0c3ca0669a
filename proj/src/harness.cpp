#include <matcol/harness.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include <matcol/core.hpp>
#include <matcol/incoherence.hpp>
#include <matcol/parallel.hpp>
#include <matcol/rng.hpp>
#include <matcol/synthetic.hpp>
#include <matcol/nystrom.hpp>

namespace matcol {

namespace {

// One exact-recovery trial: fresh rank-r instance, fresh observation, full
// completion. Returns the relative Frobenius error (infinity on singular or
// degenerate draws, which simply count as failures).
double recovery_trial(Index n, Index r, Index d, Index s, std::uint64_t seed) {
  const SyntheticSpec spec{n, n, r, 0.0, seed};
  const Matrix m = gen_lowrank(spec);
  CompletionConfig config{r,
                          d,
                          s,
                          ColumnSamplingDistribution::uniform(n),
                          derive_seed(seed, kStreamObservation),
                          kDefaultRankTolerance,
                          0.0};
  try {
    const ObservationSet obs = gen_observation(m, config, ObservationMode::kIndependent);
    const CompletionReport report = complete(obs, config, 1, &m);
    return *report.relative_frobenius_error;
  } catch (const SingularSystemError&) {
    return std::numeric_limits<double>::infinity();
  } catch (const DegenerateInputError&) {
    return std::numeric_limits<double>::infinity();
  }
}

std::uint64_t trial_seed(const SweepSpec& spec, SeedStream stream, Index n, Index r,
                         Index probe_value, int trial) {
  return derive_seed(spec.base_seed, stream, static_cast<std::uint64_t>(n),
                     static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(probe_value),
                     static_cast<std::uint64_t>(trial));
}

// Runs all trials at one probe value; trials execute in parallel, the probe
// log is assembled by trial index.
Probe run_probe(Index n, Index r, Index value, Index d, Index s, SeedStream stream,
                const SweepSpec& spec) {
  Probe probe;
  probe.value = value;
  probe.trials.resize(spec.trials);
  parallel_for(spec.trials, spec.jobs, [&](Index t) {
    const std::uint64_t seed = trial_seed(spec, stream, n, r, value, static_cast<int>(t));
    const double err = recovery_trial(n, r, d, s, seed);
    probe.trials[t] = ProbeTrial{seed, err, err <= spec.success_threshold};
  });
  probe.all_success = std::all_of(probe.trials.begin(), probe.trials.end(),
                                  [](const ProbeTrial& t) { return t.success; });
  return probe;
}

// Doubling until all trials succeed, then bisection. The searched parameter
// is d when stream == kStreamSweepD, s otherwise.
SearchResult search_minimal(Index n, Index r, Index fixed_value, Index cap, SeedStream stream,
                            const SweepSpec& spec) {
  SearchResult result;
  result.n = n;
  result.r = r;
  result.searched = stream == kStreamSweepD ? 'd' : 's';
  result.fixed_value = fixed_value;

  const auto probe_at = [&](Index value) -> const Probe& {
    const Index d = stream == kStreamSweepD ? value : fixed_value;
    const Index s = stream == kStreamSweepD ? fixed_value : value;
    result.probes.push_back(run_probe(n, r, value, d, s, stream, spec));
    return result.probes.back();
  };

  Index lo = 0;  // largest value that failed (0 = none probed below)
  Index hi = 0;  // smallest value that succeeded so far
  Index value = 1;
  for (;;) {
    const Probe& probe = probe_at(value);
    if (probe.all_success) {
      hi = value;
      break;
    }
    lo = value;
    if (value >= cap) {
      result.found = false;
      return result;
    }
    value = std::min<Index>(value * 2, cap);
  }

  while (hi - lo > 1) {
    const Index mid = lo + (hi - lo) / 2;
    const Probe& probe = probe_at(mid);
    if (probe.all_success)
      hi = mid;
    else
      lo = mid;
  }

  result.found = true;
  result.minimal = hi;
  result.lower_neighbor_failed = lo == hi - 1 && lo >= 1;
  return result;
}

double stddev(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  for (const double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

// Cell-level reference instance: its mu(r) pins the theorem thresholds used
// to fix the non-searched parameter.
struct CellReference {
  double mu;
  SamplingThresholds thresholds;
};

CellReference cell_reference(Index n, Index r, const SweepSpec& spec) {
  const std::uint64_t seed = derive_seed(spec.base_seed, kStreamReference,
                                         static_cast<std::uint64_t>(n),
                                         static_cast<std::uint64_t>(r));
  const Matrix m = gen_lowrank(SyntheticSpec{n, n, r, 0.0, seed});
  const double mu = mu_r(m, r);
  return CellReference{mu, theorem_thresholds(n, n, r, mu, spec.delta)};
}

void annotate(SearchResult& result, const CellReference& ref) {
  result.reference_mu_r = ref.mu;
  result.threshold_d = ref.thresholds.d_min;
  result.threshold_s = ref.thresholds.s_min;
}

std::vector<std::string> check_common(int trials, double threshold, Index n_count) {
  std::vector<std::string> violations;
  if (n_count == 0) violations.push_back("sizes must not be empty");
  if (trials < 1) violations.push_back("trials must be at least 1");
  if (!(threshold > 0.0)) violations.push_back("success threshold must be positive");
  return violations;
}

}  // namespace

std::vector<std::string> SweepSpec::validate() const {
  auto violations = check_common(trials, success_threshold, static_cast<Index>(sizes.size()));
  if (ranks.empty()) violations.push_back("ranks must not be empty");
  for (const Index n : sizes)
    if (n < 2) violations.push_back("size " + std::to_string(n) + " is too small");
  for (const Index r : ranks) {
    if (r < 1) violations.push_back("rank " + std::to_string(r) + " is not positive");
    for (const Index n : sizes)
      if (r > n)
        violations.push_back("rank " + std::to_string(r) + " exceeds size " + std::to_string(n));
  }
  if (!(delta > 0.0 && delta < 1.0)) violations.push_back("delta must lie in (0, 1)");
  return violations;
}

SearchResult find_minimal_d(Index n, Index r, Index s_fixed, const SweepSpec& spec) {
  const CellReference ref = cell_reference(n, r, spec);
  SearchResult result = search_minimal(n, r, s_fixed, /*cap=*/n, kStreamSweepD, spec);
  annotate(result, ref);
  return result;
}

SearchResult find_minimal_s(Index n, Index r, Index d_fixed, const SweepSpec& spec) {
  const CellReference ref = cell_reference(n, r, spec);
  SearchResult result = search_minimal(n, r, d_fixed, /*cap=*/n, kStreamSweepS, spec);
  annotate(result, ref);
  return result;
}

RegressionFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  RegressionFit fit;
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) return fit;
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double resid = y[i] - (fit.intercept + fit.slope * x[i]);
    rss += resid * resid;
  }
  fit.residual_sum = rss;
  fit.r_squared = syy == 0.0 ? (rss == 0.0 ? 1.0 : 0.0) : 1.0 - rss / syy;
  return fit;
}

SweepResult run_sweep(const SweepSpec& spec) {
  const auto violations = spec.validate();
  if (!violations.empty()) {
    std::string message = "invalid sweep spec:";
    for (const auto& v : violations) message += " " + v + ";";
    throw ConfigError(message);
  }

  SweepResult result;
  result.spec = spec;

  for (const Index n : spec.sizes) {
    for (const Index r : spec.ranks) {
      const CellReference ref = cell_reference(n, r, spec);

      // d-search: s fixed at twice the theorem threshold keeps s non-binding.
      const Index s_fixed = 2 * ref.thresholds.s_min;
      SearchResult d_cell = search_minimal(n, r, s_fixed, n, kStreamSweepD, spec);
      annotate(d_cell, ref);
      result.d_cells.push_back(std::move(d_cell));

      // s-search: twice the theorem threshold can exceed n at desk scale,
      // which would observe every column fully and leave s unconstrained.
      // Cap near n/4 (but keep enough draws to capture the rank) so partial
      // columns always remain.
      const Index d_fixed =
          std::min<Index>(n, std::max<Index>(4 * r, std::min<Index>(2 * ref.thresholds.d_min,
                                                                    std::max<Index>(n / 4, 1))));
      SearchResult s_cell = search_minimal(n, r, d_fixed, n, kStreamSweepS, spec);
      annotate(s_cell, ref);
      result.s_cells.push_back(std::move(s_cell));
    }
  }

  const auto collect = [](const std::vector<SearchResult>& cells, bool squared,
                          std::vector<double>& xs, std::vector<double>& ys) {
    for (const auto& cell : cells) {
      if (!cell.found) continue;
      const double r = static_cast<double>(cell.r);
      xs.push_back((squared ? r * r : r) * std::log(r));
      ys.push_back(static_cast<double>(cell.minimal));
    }
  };

  std::vector<double> xs, ys;
  collect(result.d_cells, false, xs, ys);
  result.d_vs_r_ln_r = fit_line(xs, ys);
  xs.clear();
  ys.clear();
  collect(result.d_cells, true, xs, ys);
  result.d_vs_r2_ln_r = fit_line(xs, ys);
  xs.clear();
  ys.clear();
  collect(result.s_cells, false, xs, ys);
  result.s_vs_r_ln_r = fit_line(xs, ys);
  xs.clear();
  ys.clear();
  collect(result.s_cells, true, xs, ys);
  result.s_vs_r2_ln_r = fit_line(xs, ys);
  return result;
}

std::vector<std::string> ComparisonSpec::validate() const {
  std::vector<std::string> violations;
  if (n < 2) violations.push_back("n is too small");
  if (ranks.empty()) violations.push_back("ranks must not be empty");
  if (sigmas.empty()) violations.push_back("sigmas must not be empty");
  if (budgets.empty()) violations.push_back("budgets must not be empty");
  if (trials < 2) violations.push_back("trials must be at least 2");
  if (!(delta > 0.0 && delta < 1.0)) violations.push_back("delta must lie in (0, 1)");
  for (const Index r : ranks)
    if (r < 1 || r > n) violations.push_back("rank " + std::to_string(r) + " out of range");
  for (const double sigma : sigmas)
    if (sigma < 0.0) violations.push_back("sigma must be nonnegative");
  for (const Index budget : budgets)
    if (budget < 1 || budget > n)
      violations.push_back("budget " + std::to_string(budget) + " out of range");
  return violations;
}

ComparisonResult run_comparison(const ComparisonSpec& spec) {
  const auto violations = spec.validate();
  if (!violations.empty()) {
    std::string message = "invalid comparison spec:";
    for (const auto& v : violations) message += " " + v + ";";
    throw ConfigError(message);
  }

  ComparisonResult result;
  result.spec = spec;

  struct TrialOutcome {
    double alg1_error;
    double nystrom_error;
    double epsilon;
    bool bound_holds;
    Index regularized;
  };

  const Index n = spec.n;
  for (std::size_t ri = 0; ri < spec.ranks.size(); ++ri) {
    for (std::size_t si = 0; si < spec.sigmas.size(); ++si) {
      const Index r = spec.ranks[ri];
      const double sigma = spec.sigmas[si];

      // Matrices are shared across budgets: one instance per trial.
      std::vector<Matrix> noisy(spec.trials);
      std::vector<double> mu_m(spec.trials), norm_sq(spec.trials), rank_residual_sq(spec.trials);
      parallel_for(spec.trials, spec.jobs, [&](Index t) {
        const std::uint64_t seed =
            derive_seed(spec.base_seed, kStreamComparison, static_cast<std::uint64_t>(ri),
                        static_cast<std::uint64_t>(si), static_cast<std::uint64_t>(t));
        Matrix m;
        if (sigma > 0.0) {
          m = gen_noisy(SyntheticSpec{n, n, r, sigma, seed}).noisy;
        } else {
          m = gen_lowrank(SyntheticSpec{n, n, r, 0.0, seed});
        }
        mu_m[t] = mu_matrix(m);
        norm_sq[t] = m.squaredNorm();
        // ||M - M_r||_F^2 from singular values alone.
        Eigen::BDCSVD<Matrix> svd(m);
        const Vector& sv = svd.singularValues();
        double tail = 0.0;
        for (Index k = r; k < sv.size(); ++k) tail += sv(k) * sv(k);
        rank_residual_sq[t] = tail;
        noisy[t] = std::move(m);
      });

      for (const Index budget : spec.budgets) {
        ComparisonCell cell;
        cell.r = r;
        cell.sigma = sigma;
        cell.budget = budget;
        const Index d = budget;
        const Index s = budget;

        const NystromConfig nys_template = match_budget(d, s, n, n, r, 0);
        cell.nystrom_cols = nys_template.num_columns;
        cell.nystrom_rows = nys_template.num_rows;
        cell.alg1_entries =
            static_cast<std::int64_t>(d) * n + static_cast<std::int64_t>(n - d) * s;
        cell.nystrom_entries = static_cast<std::int64_t>(cell.nystrom_cols) * n +
                               static_cast<std::int64_t>(cell.nystrom_rows) * n -
                               static_cast<std::int64_t>(cell.nystrom_cols) * cell.nystrom_rows;

        std::vector<TrialOutcome> outcomes(spec.trials);
        parallel_for(spec.trials, spec.jobs, [&](Index t) {
          const Matrix& m = noisy[t];
          const std::uint64_t trial_seed =
              derive_seed(spec.base_seed, kStreamComparison, static_cast<std::uint64_t>(ri),
                          static_cast<std::uint64_t>(si), static_cast<std::uint64_t>(t),
                          static_cast<std::uint64_t>(budget));

          CompletionConfig config{r,
                                  d,
                                  s,
                                  ColumnSamplingDistribution::uniform(n),
                                  derive_seed(trial_seed, kStreamObservation),
                                  kDefaultRankTolerance,
                                  1e-10 * static_cast<double>(s) / static_cast<double>(n)};
          const ObservationSet obs = gen_observation(m, config, ObservationMode::kIndependent);
          const CompletionReport report = complete(obs, config, 1, &m);
          const double alg1_error = (m - report.recovered).norm();

          NystromConfig nys = nys_template;
          nys.seed = derive_seed(trial_seed, kStreamNystromColumns);
          const double nystrom_error = (m - nystrom_approx(m, nys)).norm();

          const double epsilon =
              std::sqrt(64.0 * std::log(2.0 / spec.delta) * mu_m[t] * static_cast<double>(r) /
                        static_cast<double>(d));
          const bool holds = alg1_error * alg1_error <=
                             rank_residual_sq[t] + epsilon * norm_sq[t];
          outcomes[t] = TrialOutcome{alg1_error, nystrom_error, epsilon, holds,
                                     report.regularized_columns};
        });

        for (const auto& o : outcomes) {
          cell.alg1_errors.push_back(o.alg1_error);
          cell.nystrom_errors.push_back(o.nystrom_error);
          cell.epsilon_mean += o.epsilon;
          cell.bound_holds += o.bound_holds ? 1 : 0;
          cell.regularized_columns += o.regularized;
        }
        cell.epsilon_mean /= static_cast<double>(spec.trials);
        cell.alg1_mean = mean_of(cell.alg1_errors);
        cell.alg1_stddev = stddev(cell.alg1_errors, cell.alg1_mean);
        cell.nystrom_mean = mean_of(cell.nystrom_errors);
        cell.nystrom_stddev = stddev(cell.nystrom_errors, cell.nystrom_mean);
        result.cells.push_back(std::move(cell));
      }
    }
  }
  return result;
}

namespace {

nlohmann::json to_json(const RegressionFit& fit) {
  return {{"slope", fit.slope},
          {"intercept", fit.intercept},
          {"r_squared", fit.r_squared},
          {"residual_sum", fit.residual_sum}};
}

nlohmann::json to_json(const SearchResult& cell) {
  nlohmann::json probes = nlohmann::json::array();
  for (const auto& probe : cell.probes) {
    nlohmann::json trials = nlohmann::json::array();
    int successes = 0;
    for (const auto& t : probe.trials) {
      trials.push_back({{"seed", t.seed}, {"rel_error", t.rel_error}, {"success", t.success}});
      successes += t.success ? 1 : 0;
    }
    probes.push_back({{"value", probe.value},
                      {"all_success", probe.all_success},
                      {"success_rate",
                       static_cast<double>(successes) / static_cast<double>(probe.trials.size())},
                      {"trials", std::move(trials)}});
  }
  return {{"n", cell.n},
          {"r", cell.r},
          {"searched", std::string(1, cell.searched)},
          {"fixed_value", cell.fixed_value},
          {"found", cell.found},
          {"minimal", cell.minimal},
          {"lower_neighbor_failed", cell.lower_neighbor_failed},
          {"reference_mu_r", cell.reference_mu_r},
          {"threshold_d", cell.threshold_d},
          {"threshold_s", cell.threshold_s},
          {"probes", std::move(probes)}};
}

void append_cell_csv(std::ostringstream& out, const SearchResult& cell) {
  for (const auto& probe : cell.probes)
    for (std::size_t t = 0; t < probe.trials.size(); ++t) {
      const auto& trial = probe.trials[t];
      out << cell.n << ',' << cell.r << ',' << cell.searched << ',' << cell.fixed_value << ','
          << probe.value << ',' << t << ',' << trial.seed << ',' << trial.rel_error << ','
          << (trial.success ? 1 : 0) << ',' << (cell.found ? cell.minimal : -1) << '\n';
    }
}

}  // namespace

nlohmann::json to_json(const SweepResult& result) {
  nlohmann::json d_cells = nlohmann::json::array();
  for (const auto& cell : result.d_cells) d_cells.push_back(to_json(cell));
  nlohmann::json s_cells = nlohmann::json::array();
  for (const auto& cell : result.s_cells) s_cells.push_back(to_json(cell));
  return {{"spec",
           {{"sizes", result.spec.sizes},
            {"ranks", result.spec.ranks},
            {"trials", result.spec.trials},
            {"success_threshold", result.spec.success_threshold},
            {"delta", result.spec.delta},
            {"base_seed", result.spec.base_seed}}},
          {"d_cells", std::move(d_cells)},
          {"s_cells", std::move(s_cells)},
          {"regressions",
           {{"d_vs_r_ln_r", to_json(result.d_vs_r_ln_r)},
            {"d_vs_r2_ln_r", to_json(result.d_vs_r2_ln_r)},
            {"s_vs_r_ln_r", to_json(result.s_vs_r_ln_r)},
            {"s_vs_r2_ln_r", to_json(result.s_vs_r2_ln_r)}}}};
}

std::string to_csv(const SweepResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << "n,r,searched,fixed_value,probe,trial,seed,rel_error,success,minimal\n";
  for (const auto& cell : result.d_cells) append_cell_csv(out, cell);
  for (const auto& cell : result.s_cells) append_cell_csv(out, cell);
  return out.str();
}

nlohmann::json to_json(const ComparisonResult& result) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& cell : result.cells) {
    cells.push_back({{"r", cell.r},
                     {"sigma", cell.sigma},
                     {"budget", cell.budget},
                     {"alg1_errors", cell.alg1_errors},
                     {"nystrom_errors", cell.nystrom_errors},
                     {"alg1_mean", cell.alg1_mean},
                     {"alg1_stddev", cell.alg1_stddev},
                     {"nystrom_mean", cell.nystrom_mean},
                     {"nystrom_stddev", cell.nystrom_stddev},
                     {"bound_holds", cell.bound_holds},
                     {"epsilon_mean", cell.epsilon_mean},
                     {"regularized_columns", cell.regularized_columns},
                     {"alg1_entries", cell.alg1_entries},
                     {"nystrom_entries", cell.nystrom_entries},
                     {"nystrom_cols", cell.nystrom_cols},
                     {"nystrom_rows", cell.nystrom_rows}});
  }
  return {{"spec",
           {{"n", result.spec.n},
            {"ranks", result.spec.ranks},
            {"sigmas", result.spec.sigmas},
            {"budgets", result.spec.budgets},
            {"trials", result.spec.trials},
            {"delta", result.spec.delta},
            {"base_seed", result.spec.base_seed}}},
          {"cells", std::move(cells)}};
}

std::string to_csv(const ComparisonResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << "n,r,sigma,budget,trial,alg1_error,nystrom_error,epsilon,alg1_entries,nystrom_entries\n";
  for (const auto& cell : result.cells)
    for (std::size_t t = 0; t < cell.alg1_errors.size(); ++t)
      out << result.spec.n << ',' << cell.r << ',' << cell.sigma << ',' << cell.budget << ','
          << t << ',' << cell.alg1_errors[t] << ',' << cell.nystrom_errors[t] << ','
          << cell.epsilon_mean << ',' << cell.alg1_entries << ',' << cell.nystrom_entries
          << '\n';
  return out.str();
}

}  // namespace matcol
