#include "xychain/localization.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "xychain/ensemble.hpp"
#include "xychain/exact_oracle.hpp"

namespace xychain {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cd = std::complex<double>;

// Re-raises per-realization numerical failures with the replay coordinates
// (base seed, realization index).
[[noreturn]] void rethrow_with_replay(const numerical_error& e, std::uint64_t seed,
                                      int index) {
  throw numerical_error("realization " + std::to_string(index) + " (seed " +
                        std::to_string(seed) + "): " + e.what());
}

std::vector<int> default_reference_sites(int n) {
  if (n <= 16) {
    std::vector<int> all(n);
    for (int j = 0; j < n; ++j) all[j] = j + 1;
    return all;
  }
  std::vector<int> sites{(n + 2) / 4, (n + 1) / 2, (3 * n + 2) / 4};
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  for (int& s : sites) s = std::clamp(s, 1, n);
  return sites;
}

VectorXcd deterministic_unit_vector(long dim) {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
  VectorXcd v(dim);
  for (long i = 0; i < dim; ++i) {
    const double re = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    const double im = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    v[i] = cd(re, im);
  }
  v.normalize();
  return v;
}

// Largest singular value by power iteration on m^H m, warm-started from the
// previous time step so consecutive grid points converge in a few sweeps.
double sigma_max_warm(const MatrixXcd& m, VectorXcd& warm) {
  if (warm.size() != m.cols()) warm = deterministic_unit_vector(m.cols());
  double sigma = -1.0;
  for (int iter = 0; iter < 600; ++iter) {
    const VectorXcd w = m * warm;
    const double estimate = w.norm();
    if (estimate == 0.0) return 0.0;
    const VectorXcd u = m.adjoint() * w;
    const double u_norm = u.norm();
    if (u_norm == 0.0) return estimate;
    warm = u / u_norm;
    if (std::abs(estimate - sigma) <= 1e-10 * estimate) return estimate;
    sigma = estimate;
  }
  return sigma;
}

// ---------------------------------------------------------------------------
// Oracle-side commutator machinery shared by the sweep and the clustering
// check. For a sigma^z right operator the commutator with any T is
// [[0, -2 T_{+-}], [2 T_{-+}, 0]] in the basis split by the sigma^z sign,
// so its norm is twice the larger block singular value.
// ---------------------------------------------------------------------------

class CommutatorEngine {
 public:
  CommutatorEngine(const ChainSpec& spec, int oracle_cap, const ObservablePair& pair,
                   const std::vector<int>& right_sites)
      : ctx_(spec, oracle_cap), pair_(pair) {
    const int n = spec.n;
    left_ = observable(pair.left, pair.j, n, pair.unit_row, pair.unit_col);
    left_tilde_ = ctx_.to_eigenbasis(left_.matrix);
    left_norm_ = operator_norm(left_.matrix);

    const long dim = ctx_.dim();
    rights_.resize(right_sites.size());
    any_diagonal_ = false;
    for (size_t i = 0; i < right_sites.size(); ++i) {
      RightSide& r = rights_[i];
      r.site = right_sites[i];
      r.op = observable(pair.right, r.site, n, pair.unit_row, pair.unit_col);
      r.norm = operator_norm(r.op.matrix);
      r.diagonal = pair.right == ObservableKind::SigmaZ;
      if (r.diagonal) {
        any_diagonal_ = true;
        const long mask = 1L << (n - r.site);
        for (long b = 0; b < dim; ++b)
          ((b & mask) ? r.minus_idx : r.plus_idx).push_back(static_cast<int>(b));
      } else {
        r.tilde = ctx_.to_eigenbasis(r.op.matrix);
      }
    }
  }

  const EvolutionContext& context() const { return ctx_; }
  const ManyBodyOperator& left() const { return left_; }
  double left_norm() const { return left_norm_; }
  const ManyBodyOperator& right_op(size_t i) const { return rights_[i].op; }
  double right_norm(size_t i) const { return rights_[i].norm; }

  /// ||[tau_t(A), B_k]|| for every configured right site.
  std::vector<double> norms_at(double t) {
    std::vector<double> out(rights_.size(), 0.0);
    if (t == 0.0) {
      for (size_t i = 0; i < rights_.size(); ++i) {
        if (left_.disjoint_from(rights_[i].op)) continue;  // exact zero
        out[i] = commutator_norm(left_, rights_[i].op);
      }
      return out;
    }

    const long dim = ctx_.dim();
    VectorXcd phase(dim);
    for (long r = 0; r < dim; ++r) {
      const double angle = ctx_.energies()[r] * t;
      phase[r] = cd(std::cos(angle), std::sin(angle));
    }
    const MatrixXcd orbit =
        phase.asDiagonal() * left_tilde_ * phase.conjugate().asDiagonal();

    MatrixXcd evolved;  // computational basis; only needed for diagonal rights
    if (any_diagonal_) {
      evolved.resize(dim, dim);
      evolved.real() = ctx_.basis() * orbit.real() * ctx_.basis().transpose();
      evolved.imag() = ctx_.basis() * orbit.imag() * ctx_.basis().transpose();
    }

    for (size_t i = 0; i < rights_.size(); ++i) {
      RightSide& r = rights_[i];
      if (r.diagonal) {
        const MatrixXcd upper = evolved(r.plus_idx, r.minus_idx);
        const MatrixXcd lower = evolved(r.minus_idx, r.plus_idx);
        out[i] = 2.0 * std::max(sigma_max_warm(upper, r.warm_upper),
                                sigma_max_warm(lower, r.warm_lower));
      } else {
        const MatrixXcd comm = orbit * r.tilde - r.tilde * orbit;
        out[i] = sigma_max_warm(comm, r.warm_upper);
      }
    }
    return out;
  }

 private:
  struct RightSide {
    int site = 0;
    bool diagonal = false;
    ManyBodyOperator op;
    MatrixXcd tilde;
    double norm = 0.0;
    std::vector<int> plus_idx, minus_idx;
    VectorXcd warm_upper, warm_lower;
  };

  EvolutionContext ctx_;
  ObservablePair pair_;
  ManyBodyOperator left_;
  MatrixXcd left_tilde_;
  double left_norm_ = 0.0;
  std::vector<RightSide> rights_;
  bool any_diagonal_ = false;
};

}  // namespace

// ---------------------------------------------------------------------------
// Dynamical-localization correlator
// ---------------------------------------------------------------------------

std::vector<std::pair<int, double>> LocalizationReport::distance_means(
    int variant) const {
  std::map<int, std::pair<double, int>> classes;
  for (const auto& entry : entries) {
    const double value = variant == 0 ? entry.grid_sup.mean : entry.eigencorr.mean;
    auto& [sum, count] = classes[entry.distance()];
    sum += value;
    ++count;
  }
  std::vector<std::pair<int, double>> out;
  out.reserve(classes.size());
  for (const auto& [d, acc] : classes)
    out.emplace_back(d, acc.first / acc.second);
  return out;
}

LocalizationReport dynloc_correlator(const EnsembleConfig& config,
                                     const DynlocOptions& options) {
  config.validate();
  const int n = config.chain_template.n;
  const std::vector<int> refs = options.reference_sites.empty()
                                    ? default_reference_sites(n)
                                    : options.reference_sites;
  for (int j : refs)
    if (j < 1 || j > n) throw config_error("reference site out of range");

  const std::vector<double> grid = config.time_grid.points();
  const int rows = static_cast<int>(refs.size());

  struct Sample {
    MatrixXd grid_vals, eig_vals;  // rows x n
  };

  auto one_realization = [&](int index) -> Sample {
    const ChainSpec spec = draw_realization(config.disorder, config.chain_template, index);
    const BlockHamiltonian block = build_block_hamiltonian(spec);
    const DiagPath path =
        spec.isotropic() ? DiagPath::IsotropicEigen : DiagPath::AnisotropicSvd;
    FermionDiagonalization diag;
    try {
      diag = diagonalize(block, path);
    } catch (const numerical_error& e) {
      rethrow_with_replay(e, config.disorder.base_seed, index);
    }

    MatrixXd direct_max = MatrixXd::Zero(rows, n);     // sup_t |M_{j,k}|
    MatrixXd anomalous_max = MatrixXd::Zero(rows, n);  // sup_t |M_{j,n+k}|
    for (double t : grid) {
      const MatrixXcd prop_rows = propagator_rows(diag, t, refs);
      const MatrixXd abs_rows = prop_rows.cwiseAbs();
      direct_max = direct_max.cwiseMax(abs_rows.leftCols(n));
      anomalous_max = anomalous_max.cwiseMax(abs_rows.rightCols(n));
    }

    const MatrixXd eig_rows = eigencorrelator_rows(diag, refs);
    Sample sample;
    sample.grid_vals = direct_max + anomalous_max;
    sample.eig_vals = eig_rows.leftCols(n) + eig_rows.rightCols(n);
    return sample;
  };

  const std::vector<Sample> samples = run_indexed<Sample>(
      config.disorder.realizations, options.workers, one_realization);

  LocalizationReport report;
  report.reference_sites = refs;
  report.realizations = config.disorder.realizations;
  report.seed = config.disorder.base_seed;
  report.entries.reserve(static_cast<size_t>(rows) * n);
  for (int r = 0; r < rows; ++r)
    for (int k = 1; k <= n; ++k) {
      CorrelatorEntry entry;
      entry.j = refs[r];
      entry.k = k;
      report.entries.push_back(entry);
    }
  for (const Sample& sample : samples) {
    size_t at = 0;
    for (int r = 0; r < rows; ++r)
      for (int k = 0; k < n; ++k, ++at) {
        report.entries[at].grid_sup.add(sample.grid_vals(r, k));
        report.entries[at].eigencorr.add(sample.eig_vals(r, k));
      }
  }

  try {
    report.fit = fit_exponential_decay(report.distance_means(0), config.window.d_min,
                                       config.window.d_max);
    report.eigencorr_fit = fit_exponential_decay(
        report.distance_means(1), config.window.d_min, config.window.d_max);
  } catch (const numerical_error&) {
    if (options.require_fit) throw;
    report.fit = DecayFit{};
    report.eigencorr_fit = DecayFit{};
  }

  report.localized = report.fit.ok && report.fit.rate > options.localized_min_rate &&
                     report.fit.r2 >= options.localized_min_r2;

  // Lift the eigencorrelator fit amplitude until the envelope dominates every
  // distance-class mean; only then is amplitude*exp(-rate*d) a usable
  // dynamical-localization constant.
  if (report.eigencorr_fit.rate > 0.0) {
    double amplitude = 0.0;
    for (const auto& [d, mean] : report.distance_means(1))
      amplitude = std::max(amplitude, mean * std::exp(report.eigencorr_fit.rate * d));
    report.envelope_amplitude = amplitude;
  } else {
    report.envelope_amplitude = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

double lr_constant_from_fit(double amplitude, double rate) {
  if (!(rate > 0.0))
    throw numerical_error("zero-velocity constant undefined: decay rate is not positive");
  const double denom = 1.0 - std::exp(-rate);
  return 96.0 * amplitude / (denom * denom);
}

// ---------------------------------------------------------------------------
// Oracle-backed sweeps
// ---------------------------------------------------------------------------

CommutatorSweep spin_commutator_sweep(const EnsembleConfig& config,
                                      const ObservablePair& pair,
                                      const std::vector<double>& grid, int workers) {
  config.validate();
  const int n = config.chain_template.n;
  pair.validate(n);
  if (n > config.oracle_cap)
    throw capacity_error("commutator sweep needs the exact oracle: n exceeds oracle_cap");

  CommutatorSweep sweep;
  sweep.pair = pair;
  sweep.grid = grid;
  for (int k = pair.k; k <= n; ++k) sweep.right_sites.push_back(k);
  const size_t nk = sweep.right_sites.size();
  const size_t nt = grid.size();
  sweep.means.assign(nk, std::vector<WelfordAccumulator>(nt));
  sweep.sup_means.assign(nk, WelfordAccumulator{});
  sweep.realizations = config.disorder.realizations;

  struct Sample {
    std::vector<std::vector<double>> norms;  // [k][t]
    double left_norm = 0.0;
    std::vector<double> right_norms;
  };

  auto one_realization = [&](int index) -> Sample {
    const ChainSpec spec = draw_realization(config.disorder, config.chain_template, index);
    try {
    CommutatorEngine engine(spec, config.oracle_cap, pair, sweep.right_sites);
    Sample sample;
    sample.norms.assign(nk, std::vector<double>(nt, 0.0));
    for (size_t ti = 0; ti < nt; ++ti) {
      const std::vector<double> norms = engine.norms_at(grid[ti]);
      for (size_t ki = 0; ki < nk; ++ki) sample.norms[ki][ti] = norms[ki];
    }
    sample.left_norm = engine.left_norm();
    for (size_t ki = 0; ki < nk; ++ki)
      sample.right_norms.push_back(engine.right_norm(ki));
    return sample;
    } catch (const numerical_error& e) {
      rethrow_with_replay(e, config.disorder.base_seed, index);
    }
  };

  const std::vector<Sample> samples =
      run_indexed<Sample>(config.disorder.realizations, workers, one_realization);

  for (const Sample& sample : samples) {
    for (size_t ki = 0; ki < nk; ++ki) {
      double sup = 0.0;
      for (size_t ti = 0; ti < nt; ++ti) {
        sweep.means[ki][ti].add(sample.norms[ki][ti]);
        sup = std::max(sup, sample.norms[ki][ti]);
      }
      sweep.sup_means[ki].add(sup);
    }
  }
  // Operator norms do not depend on the realization.
  sweep.left_norm = samples.empty() ? 0.0 : samples.front().left_norm;
  sweep.right_norms = samples.empty() ? std::vector<double>(nk, 0.0)
                                      : samples.front().right_norms;
  return sweep;
}

SmallTimeFit fit_small_time(const CommutatorSweep& sweep, int k, double envelope_rate) {
  const auto it =
      std::find(sweep.right_sites.begin(), sweep.right_sites.end(), k);
  if (it == sweep.right_sites.end())
    throw config_error("small-time fit: right site not part of the sweep");
  const size_t ki = static_cast<size_t>(it - sweep.right_sites.begin());

  SmallTimeFit fit;
  fit.k = k;
  std::vector<double> ts, ms;
  for (size_t ti = 0; ti < sweep.grid.size(); ++ti) {
    const double t = sweep.grid[ti];
    const double mean = sweep.means[ki][ti].mean;
    if (t == 0.0) {
      fit.mean_at_zero = mean;
      continue;
    }
    if (t > 1.0) continue;
    ts.push_back(t);
    ms.push_back(mean);
    fit.max_ratio = std::max(fit.max_ratio, mean / t);
  }
  if (ts.empty()) throw config_error("small-time fit: no grid points with 0 < t <= 1");
  fit.slope = slope_through_origin(ts, ms);

  const double d = k - sweep.pair.j;
  const double scale = sweep.left_norm * sweep.right_norms[ki] *
                       std::exp(-envelope_rate * d);
  fit.normalized = scale > 0.0 ? fit.slope / scale : 0.0;
  return fit;
}

// ---------------------------------------------------------------------------
// Wegner / gap statistics
// ---------------------------------------------------------------------------

WegnerReport wegner_gap_stats(const EnsembleConfig& config,
                              const std::vector<double>& epsilon_grid, int workers) {
  config.validate();
  if (!config.chain_template.isotropic())
    throw config_error("gap statistics are defined for isotropic chains");

  const int n = config.chain_template.n;
  auto one_realization = [&](int index) -> double {
    const ChainSpec spec = draw_realization(config.disorder, config.chain_template, index);
    const BlockHamiltonian block = build_block_hamiltonian(spec);
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(block.a_block,
                                                   Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
      throw numerical_error("Anderson-block eigenvalues failed at realization " +
                            std::to_string(index));
    return solver.eigenvalues().cwiseAbs().minCoeff();
  };

  const std::vector<double> distances =
      run_indexed<double>(config.disorder.realizations, workers, one_realization);

  WegnerReport report;
  report.n = n;
  report.realizations = config.disorder.realizations;
  report.epsilon_grid = epsilon_grid;
  report.gaps.reserve(distances.size());
  for (double dist : distances) report.gaps.push_back(2.0 * dist);

  const double r = static_cast<double>(distances.size());
  for (double eps : epsilon_grid) {
    long hits = 0;
    for (double dist : distances)
      if (dist < eps) ++hits;
    const double p = static_cast<double>(hits) / r;
    report.empirical_prob.push_back(p);
    report.prob_stderr.push_back(std::sqrt(p * (1.0 - p) / r));
  }

  // Slope of the linear regime of P(dist < eps) against eps*n; saturated
  // points would bias it downward and are excluded.
  std::vector<double> xs, ys;
  for (size_t i = 0; i < epsilon_grid.size(); ++i) {
    if (epsilon_grid[i] <= 0.0) continue;
    if (report.empirical_prob[i] > 0.6) continue;
    xs.push_back(epsilon_grid[i] * n);
    ys.push_back(report.empirical_prob[i]);
  }
  report.slope_estimate = slope_through_origin(xs, ys);
  return report;
}

// ---------------------------------------------------------------------------
// Clustering inequality
// ---------------------------------------------------------------------------

double clustering_rhs(double c_jk, double rate, int d, double gap,
                      double left_norm, double right_norm) {
  const double log_term = std::log(gap / std::sqrt(M_PI * rate * d));
  const double prefactor = 1.0 + c_jk / M_PI * (2.0 - log_term);
  return prefactor * left_norm * right_norm * std::exp(-rate * d);
}

ClusteringResult clustering_check(const EnsembleConfig& config,
                                  const ObservablePair& pair, double rate,
                                  const std::vector<double>& grid, int workers) {
  config.validate();
  const int n = config.chain_template.n;
  pair.validate(n);
  if (n > config.oracle_cap)
    throw capacity_error("clustering check needs the exact oracle: n exceeds oracle_cap");
  if (!config.chain_template.isotropic())
    throw config_error("clustering check is defined for isotropic chains");
  if (!(rate > 0.0)) throw config_error("clustering check requires a positive rate");

  const int d = pair.distance();

  auto one_realization = [&](int index) -> ClusteringRow {
    ClusteringRow row;
    row.realization = index;
    row.d = d;

    const ChainSpec spec = draw_realization(config.disorder, config.chain_template, index);
    const FermionDiagonalization diag =
        diagonalize(build_block_hamiltonian(spec), DiagPath::IsotropicEigen);
    const GroundStateData gs = ground_state_data(diag);
    row.gap = gs.gap;
    if (gs.degenerate) {
      row.skipped = true;
      row.skip_reason = "degenerate ground state";
      return row;
    }

    CommutatorEngine engine(spec, config.oracle_cap, pair, {pair.k});
    if (engine.context().ground_degenerate()) {
      row.skipped = true;
      row.skip_reason = "degenerate ground state (oracle)";
      return row;
    }

    // Norm of the truncated right observable B - <B> Id; the commutator is
    // unchanged by the truncation, so the grid sweep can use B itself.
    const VectorXcd psi = engine.context().ground_vector().cast<cd>();
    const cd right_mean = psi.dot(engine.right_op(0).matrix * psi);
    const double right_norm =
        operator_norm(engine.right_op(0).matrix -
                      right_mean * MatrixXcd::Identity(engine.context().dim(),
                                                       engine.context().dim()));
    const double norms_scale = engine.left_norm() * right_norm;

    double c_jk = 0.0;
    for (double t : grid) {
      if (t <= 0.0) continue;
      const double norm = engine.norms_at(t)[0];
      c_jk = std::max(c_jk, norm * std::exp(rate * d) /
                                (std::min(t, 1.0) * norms_scale));
    }
    row.c_jk = c_jk;
    row.alpha = gs.gap * gs.gap / (4.0 * rate * d);
    row.lambda = 0.5 * std::sqrt(M_PI / row.alpha);
    row.lhs = std::abs(
        ground_correlation(engine.context(), engine.left(), engine.right_op(0)));
    row.rhs = clustering_rhs(c_jk, rate, d, gs.gap, engine.left_norm(), right_norm);
    row.satisfied = row.lhs <= row.rhs;
    row.within_tolerance = row.lhs <= 1.05 * row.rhs;
    return row;
  };

  ClusteringResult result;
  result.pair = pair;
  result.rate = rate;
  result.rows = run_indexed<ClusteringRow>(config.disorder.realizations, workers,
                                           one_realization);
  long kept = 0, within = 0;
  for (const ClusteringRow& row : result.rows) {
    if (row.skipped) {
      ++result.skipped;
      continue;
    }
    ++kept;
    if (row.within_tolerance) ++within;
  }
  result.fraction_within_tolerance =
      kept > 0 ? static_cast<double>(within) / static_cast<double>(kept) : 0.0;
  return result;
}

// ---------------------------------------------------------------------------
// Ground-state correlation decay
// ---------------------------------------------------------------------------

CorrelationDecay correlation_decay_sweep(const EnsembleConfig& config,
                                         const CorrelationDecayOptions& options) {
  config.validate();
  if (!config.chain_template.isotropic())
    throw config_error("correlation decay sweep is defined for isotropic chains");
  const int n = config.chain_template.n;
  const int margin =
      options.edge_margin >= 0 ? options.edge_margin : std::max(2, n / 20);
  const int lo = 1 + margin, hi = n - margin;  // 1-based usable sites
  if (hi - lo < 2) throw config_error("correlation sweep: edge margin leaves too few sites");
  const int max_d = hi - lo;

  const bool with_oracle = options.with_oracle && n <= config.oracle_cap;
  const int oracle_lo = 2, oracle_hi = n - 1;

  struct Sample {
    bool degenerate = false;
    std::vector<double> mean_abs;         // per distance 1..max_d
    std::vector<double> oracle_mean_abs;  // per distance, oracle window
  };

  auto one_realization = [&](int index) -> Sample {
    Sample sample;
    const ChainSpec spec = draw_realization(config.disorder, config.chain_template, index);
    const FermionDiagonalization diag =
        diagonalize(build_block_hamiltonian(spec), DiagPath::IsotropicEigen);
    const GroundStateData gs = ground_state_data(diag);
    if (gs.degenerate) {
      sample.degenerate = true;
      return sample;
    }

    sample.mean_abs.assign(max_d, 0.0);
    for (int dist = 1; dist <= max_d; ++dist) {
      double sum = 0.0;
      int count = 0;
      for (int j = lo; j + dist <= hi; ++j) {
        sum += std::abs(gs.fermi_projection(j - 1, j - 1 + dist));
        ++count;
      }
      sample.mean_abs[dist - 1] = count > 0 ? sum / count : 0.0;
    }

    if (with_oracle) {
      const EvolutionContext ctx(spec, config.oracle_cap);
      if (ctx.ground_degenerate()) {
        sample.degenerate = true;
        return sample;
      }
      const int span = oracle_hi - oracle_lo;
      sample.oracle_mean_abs.assign(span, 0.0);
      std::vector<ManyBodyOperator> z_ops;
      for (int site = oracle_lo; site <= oracle_hi; ++site)
        z_ops.push_back(pauli(site, 'z', n));
      for (int dist = 1; dist <= span; ++dist) {
        double sum = 0.0;
        int count = 0;
        for (int j = oracle_lo; j + dist <= oracle_hi; ++j) {
          sum += std::abs(ground_correlation(ctx, z_ops[j - oracle_lo],
                                             z_ops[j - oracle_lo + dist]));
          ++count;
        }
        sample.oracle_mean_abs[dist - 1] = count > 0 ? sum / count : 0.0;
      }
    }
    return sample;
  };

  const std::vector<Sample> samples =
      run_indexed<Sample>(config.disorder.realizations, options.workers,
                          one_realization);

  CorrelationDecay decay;
  for (int dist = 1; dist <= max_d; ++dist) decay.distances.push_back(dist);
  decay.mean_abs.assign(max_d, WelfordAccumulator{});
  decay.has_oracle = with_oracle;
  if (with_oracle) {
    const int span = oracle_hi - oracle_lo;
    for (int dist = 1; dist <= span; ++dist) decay.oracle_distances.push_back(dist);
    decay.oracle_mean_abs.assign(span, WelfordAccumulator{});
  }

  for (const Sample& sample : samples) {
    if (sample.degenerate) {
      ++decay.skipped_degenerate;
      continue;
    }
    for (int i = 0; i < max_d; ++i) decay.mean_abs[i].add(sample.mean_abs[i]);
    for (size_t i = 0; i < sample.oracle_mean_abs.size(); ++i)
      decay.oracle_mean_abs[i].add(sample.oracle_mean_abs[i]);
  }

  std::vector<std::pair<int, double>> means;
  for (int i = 0; i < max_d; ++i)
    means.emplace_back(decay.distances[i], decay.mean_abs[i].mean);
  try {
    decay.fit = fit_exponential_decay(means, config.window.d_min, config.window.d_max);
  } catch (const numerical_error&) {
    // A window spanning enough distances but with unusable data (all-zero
    // correlations in the trivial product-state regime) reports an empty fit;
    // a geometrically too-small window is a configuration defect.
    if (std::min(config.window.d_max, max_d) - config.window.d_min + 1 < 3) throw;
    decay.fit = DecayFit{};
  }
  decay.exponential = decay.fit.ok && decay.fit.rate > options.exponential_min_rate &&
                      decay.fit.r2 >= options.exponential_min_r2;

  if (with_oracle && !decay.oracle_distances.empty()) {
    std::vector<std::pair<int, double>> oracle_means;
    for (size_t i = 0; i < decay.oracle_mean_abs.size(); ++i)
      oracle_means.emplace_back(decay.oracle_distances[i],
                                decay.oracle_mean_abs[i].mean);
    const int od_max = std::min(config.window.d_max, oracle_hi - oracle_lo);
    try {
      decay.oracle_fit = fit_exponential_decay(oracle_means, 1, od_max);
    } catch (const numerical_error&) {
      decay.oracle_fit = DecayFit{};  // window too small on tiny chains
    }
  }
  return decay;
}

}  // namespace xychain
