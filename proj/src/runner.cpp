#include "xychain/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "xychain/ensemble.hpp"
#include "xychain/exact_oracle.hpp"
#include "xychain/quadrature.hpp"
#include "xychain/report_io.hpp"

namespace xychain {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double out = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw config_error("config: bad number for " + key + ": '" + value + "'");
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const long long out = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw config_error("config: bad integer for " + key + ": '" + value + "'");
  }
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw config_error("config: empty list for " + key);
  return out;
}

// Scalar values broadcast over the sequence; lists must match exactly.
std::vector<double> broadcast(const std::string& key, const std::vector<double>& values,
                              int length) {
  if (static_cast<int>(values.size()) == length) return values;
  if (values.size() == 1) return std::vector<double>(length, values[0]);
  throw config_error("config: " + key + " needs 1 or " + std::to_string(length) +
                     " values");
}

void parse_family(const std::string& value, DisorderSpec& disorder) {
  const auto open = value.find('(');
  const auto close = value.find(')');
  const std::string name = trim(value.substr(0, open));
  if (name != "uniform")
    throw config_error("config: unknown nu_family '" + value +
                       "' (supported: uniform(a,b))");
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw config_error("config: nu_family needs the form uniform(a,b)");
  const std::vector<double> bounds =
      parse_list("nu_family", value.substr(open + 1, close - open - 1));
  if (bounds.size() != 2) throw config_error("config: nu_family needs two bounds");
  disorder.family = DisorderFamily::UniformInterval;
  disorder.a = bounds[0];
  disorder.b = bounds[1];
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream stream(text);
  std::string line;
  int lineno = 0;
  while (std::getline(stream, line)) {
    ++lineno;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') continue;  // section header
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(lineno) +
                         ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw config_error("config line " + std::to_string(lineno) +
                         ": empty key or value");
    if (!kv.emplace(key, value).second)
      throw config_error("config: duplicate key " + key);
  }

  static const std::set<std::string> known{
      "n",          "mu",           "gamma",      "nu",          "nu_family",
      "nu_strength", "seed",        "realizations", "t_max",     "t_step",
      "d_min",      "d_max",        "oracle_cap", "obs_j",       "obs_k",
      "obs_left",   "obs_right",    "obs_unit_row", "obs_unit_col",
      "cluster_eta", "cluster_t_max", "cluster_t_step", "lr_t_max", "lr_t_step",
      "smallt_max", "smallt_step",  "eps_grid"};
  for (const auto& [key, value] : kv)
    if (!known.count(key)) throw config_error("config: unknown key " + key);

  const auto get = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  RunConfig run;
  const std::string* n_value = get("n");
  if (!n_value) throw config_error("config: key n is required");
  const long long n = parse_int("n", *n_value);
  if (n < 1 || n > 1000000) throw config_error("config: n out of range");

  ChainSpec& chain = run.ensemble.chain_template;
  chain.n = static_cast<int>(n);
  std::vector<double> mu{1.0}, gamma{0.0}, nu{0.0};
  if (const auto* v = get("mu")) mu = parse_list("mu", *v);
  if (const auto* v = get("gamma")) gamma = parse_list("gamma", *v);
  if (const auto* v = get("nu")) nu = parse_list("nu", *v);
  chain.coupling = broadcast("mu", mu, chain.n - 1);
  chain.anisotropy = broadcast("gamma", gamma, chain.n - 1);
  chain.field = broadcast("nu", nu, chain.n);

  DisorderSpec& disorder = run.ensemble.disorder;
  if (const auto* v = get("nu_family")) parse_family(*v, disorder);
  if (const auto* v = get("nu_strength")) disorder.strength = parse_double("nu_strength", *v);
  if (const auto* v = get("seed"))
    disorder.base_seed = static_cast<std::uint64_t>(parse_int("seed", *v));
  if (const auto* v = get("realizations"))
    disorder.realizations = static_cast<int>(parse_int("realizations", *v));

  if (const auto* v = get("t_max")) run.ensemble.time_grid.t_max = parse_double("t_max", *v);
  if (const auto* v = get("t_step")) run.ensemble.time_grid.step = parse_double("t_step", *v);
  run.ensemble.window.d_max = std::min(40, chain.n - 1);
  if (const auto* v = get("d_min"))
    run.ensemble.window.d_min = static_cast<int>(parse_int("d_min", *v));
  if (const auto* v = get("d_max"))
    run.ensemble.window.d_max = static_cast<int>(parse_int("d_max", *v));
  if (const auto* v = get("oracle_cap"))
    run.ensemble.oracle_cap = static_cast<int>(parse_int("oracle_cap", *v));

  if (const auto* v = get("obs_j")) run.pair.j = static_cast<int>(parse_int("obs_j", *v));
  run.pair.k = std::min(chain.n, 3);
  if (const auto* v = get("obs_k")) run.pair.k = static_cast<int>(parse_int("obs_k", *v));
  if (const auto* v = get("obs_left")) run.pair.left = observable_kind_from_string(*v);
  if (const auto* v = get("obs_right")) run.pair.right = observable_kind_from_string(*v);
  if (const auto* v = get("obs_unit_row"))
    run.pair.unit_row = static_cast<int>(parse_int("obs_unit_row", *v));
  if (const auto* v = get("obs_unit_col"))
    run.pair.unit_col = static_cast<int>(parse_int("obs_unit_col", *v));

  if (const auto* v = get("cluster_eta")) run.cluster_rate = parse_double("cluster_eta", *v);
  if (const auto* v = get("cluster_t_max"))
    run.cluster_grid.t_max = parse_double("cluster_t_max", *v);
  if (const auto* v = get("cluster_t_step"))
    run.cluster_grid.step = parse_double("cluster_t_step", *v);
  if (const auto* v = get("lr_t_max")) run.lr_grid.t_max = parse_double("lr_t_max", *v);
  if (const auto* v = get("lr_t_step")) run.lr_grid.step = parse_double("lr_t_step", *v);
  if (const auto* v = get("smallt_max"))
    run.small_time_grid.t_max = parse_double("smallt_max", *v);
  if (const auto* v = get("smallt_step"))
    run.small_time_grid.step = parse_double("smallt_step", *v);
  if (const auto* v = get("eps_grid")) run.epsilon_grid = parse_list("eps_grid", *v);

  run.ensemble.validate();
  return run;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

// ---------------------------------------------------------------------------
// Time grids
// ---------------------------------------------------------------------------

namespace {

std::vector<double> dedup_sorted(std::vector<double> points) {
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               points.end());
  return points;
}

}  // namespace

std::vector<double> cluster_time_points(const TimeGrid& coarse) {
  std::vector<double> points = coarse.points();
  for (double t : {0.05, 0.1, 0.2, 0.3, 0.4, 0.6, 0.8})
    if (t < coarse.t_max) points.push_back(t);
  return dedup_sorted(std::move(points));
}

std::vector<double> merged_time_points(const TimeGrid& fine, const TimeGrid& coarse) {
  std::vector<double> points = fine.points();
  const std::vector<double> extra = coarse.points();
  points.insert(points.end(), extra.begin(), extra.end());
  return dedup_sorted(std::move(points));
}

// ---------------------------------------------------------------------------
// Command helpers
// ---------------------------------------------------------------------------

namespace {

struct RunScope {
  RunScope(const RunSettings& settings, std::string command_name)
      : settings_(settings), command_(std::move(command_name)),
        started_(utc_timestamp()) {
    fs::create_directories(settings.output_dir);
  }
  void finish() const {
    write_manifest(settings_.output_dir, command_, settings_.config_path,
                   settings_.workers, settings_.config.ensemble.disorder.base_seed,
                   started_, utc_timestamp());
  }
  fs::path file(const std::string& name) const { return settings_.output_dir / name; }

  const RunSettings& settings_;
  std::string command_;
  std::string started_;
};

void write_json(const fs::path& path, const json& value) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw numerical_error("cannot write " + path.string());
  out << value.dump(2) << '\n';
}

json fit_to_json(const DecayFit& fit) {
  return json{{"C", fit.amplitude}, {"eta", fit.rate},     {"r2", fit.r2},
              {"d_min", fit.d_min}, {"d_max", fit.d_max},  {"points", fit.points}};
}

}  // namespace

// ---------------------------------------------------------------------------
// diagonalize
// ---------------------------------------------------------------------------

void cmd_diagonalize(const RunSettings& settings) {
  RunScope scope(settings, "diagonalize");
  const EnsembleConfig& config = settings.config.ensemble;
  config.validate();
  const bool isotropic = config.chain_template.isotropic();
  const DiagPath path =
      isotropic ? DiagPath::IsotropicEigen : DiagPath::AnisotropicSvd;

  struct Row {
    Eigen::VectorXd modes;
    double energy = 0.0, gap = 0.0;
    int occupied = 0;
  };
  auto one = [&](int index) -> Row {
    const ChainSpec spec = draw_realization(config.disorder, config.chain_template, index);
    const FermionDiagonalization diag = diagonalize(build_block_hamiltonian(spec), path);
    Row row;
    row.modes = diag.mode_energies;
    row.energy = -diag.mode_energies.cwiseAbs().sum();
    row.gap = 2.0 * diag.mode_energies.cwiseAbs().minCoeff();
    for (int l = 0; l < diag.n; ++l)
      if (diag.mode_energies[l] < 0.0) ++row.occupied;
    return row;
  };
  const std::vector<Row> rows =
      run_indexed<Row>(config.disorder.realizations, settings.workers, one);

  CsvWriter spectra(scope.file("spectra.csv"), {"realization", "mode", "lambda"});
  CsvWriter ground(scope.file("ground.csv"),
                   {"realization", "E0", "gap", "occupied"});
  WelfordAccumulator gap_stats, energy_stats;
  for (size_t i = 0; i < rows.size(); ++i) {
    for (int l = 0; l < rows[i].modes.size(); ++l)
      spectra.write_row({csv_int(static_cast<long long>(i)), csv_int(l + 1),
                         csv_double(rows[i].modes[l])});
    ground.write_row({csv_int(static_cast<long long>(i)), csv_double(rows[i].energy),
                      csv_double(rows[i].gap), csv_int(rows[i].occupied)});
    gap_stats.add(rows[i].gap);
    energy_stats.add(rows[i].energy);
  }

  write_json(scope.file("summary.json"),
             json{{"n", config.chain_template.n},
                  {"path", isotropic ? "isotropic_eigen" : "anisotropic_svd"},
                  {"realizations", config.disorder.realizations},
                  {"seed", config.disorder.base_seed},
                  {"mean_gap", gap_stats.mean},
                  {"mean_E0", energy_stats.mean}});
  scope.finish();
}

// ---------------------------------------------------------------------------
// dynloc
// ---------------------------------------------------------------------------

namespace {

json dynloc_summary(const LocalizationReport& report, const EnsembleConfig& config) {
  json summary{{"C", report.fit.amplitude},
               {"eta", report.fit.rate},
               {"r2", report.fit.r2},
               {"window", {config.window.d_min, config.window.d_max}},
               {"realizations", report.realizations},
               {"seed", report.seed},
               {"localized", report.localized},
               {"method_tag", report.method_tag},
               {"grid_fit", fit_to_json(report.fit)},
               {"eigencorr_fit", fit_to_json(report.eigencorr_fit)},
               {"C_env", report.envelope_amplitude}};
  try {
    summary["C_prime"] =
        lr_constant_from_fit(report.envelope_amplitude, report.eigencorr_fit.rate);
  } catch (const numerical_error&) {
    summary["C_prime"] = nullptr;
  }
  return summary;
}

void write_correlator_csv(const fs::path& path, const LocalizationReport& report) {
  CsvWriter csv(path, {"j", "k", "distance", "grid_sup_mean", "eigencorr_mean",
                       "stderr"});
  for (const CorrelatorEntry& entry : report.entries)
    csv.write_row({csv_int(entry.j), csv_int(entry.k), csv_int(entry.distance()),
                   csv_double(entry.grid_sup.mean), csv_double(entry.eigencorr.mean),
                   csv_double(entry.grid_sup.std_error())});
}

}  // namespace

void cmd_dynloc(const RunSettings& settings) {
  RunScope scope(settings, "dynloc");
  const EnsembleConfig& config = settings.config.ensemble;
  DynlocOptions options;
  options.workers = settings.workers;
  const LocalizationReport report = dynloc_correlator(config, options);

  write_correlator_csv(scope.file("correlator.csv"), report);
  write_json(scope.file("summary.json"), dynloc_summary(report, config));
  scope.finish();
}

// ---------------------------------------------------------------------------
// lr (zero-velocity bound sweep + small-time profile)
// ---------------------------------------------------------------------------

void cmd_lr(const RunSettings& settings) {
  RunScope scope(settings, "lr");
  const EnsembleConfig& config = settings.config.ensemble;
  const ObservablePair& pair = settings.config.pair;

  DynlocOptions envelope_options;
  envelope_options.workers = settings.workers;
  const LocalizationReport envelope = dynloc_correlator(config, envelope_options);
  double c_prime = std::numeric_limits<double>::quiet_NaN();
  try {
    c_prime = lr_constant_from_fit(envelope.envelope_amplitude,
                                   envelope.eigencorr_fit.rate);
  } catch (const numerical_error&) {
  }

  const std::vector<double> grid =
      merged_time_points(settings.config.small_time_grid, settings.config.lr_grid);
  const CommutatorSweep sweep =
      spin_commutator_sweep(config, pair, grid, settings.workers);

  CsvWriter table(scope.file("commutators.csv"), {"d", "t", "mean", "stderr"});
  for (size_t ki = 0; ki < sweep.right_sites.size(); ++ki) {
    const int d = sweep.right_sites[ki] - pair.j;
    for (size_t ti = 0; ti < sweep.grid.size(); ++ti)
      table.write_row({csv_int(d), csv_double(sweep.grid[ti]),
                       csv_double(sweep.means[ki][ti].mean),
                       csv_double(sweep.means[ki][ti].std_error())});
  }

  bool bound_satisfied = true;
  CsvWriter sup(scope.file("commutator_sup.csv"),
                {"d", "sup_mean", "stderr", "bound"});
  json smalltime = json::array();
  for (size_t ki = 0; ki < sweep.right_sites.size(); ++ki) {
    const int k = sweep.right_sites[ki];
    const int d = k - pair.j;
    const double bound =
        std::isnan(c_prime)
            ? std::numeric_limits<double>::quiet_NaN()
            : c_prime * std::exp(-envelope.eigencorr_fit.rate * d);
    if (!std::isnan(bound) && sweep.sup_means[ki].mean > bound)
      bound_satisfied = false;
    sup.write_row({csv_int(d), csv_double(sweep.sup_means[ki].mean),
                   csv_double(sweep.sup_means[ki].std_error()), csv_double(bound)});

    const SmallTimeFit st = fit_small_time(sweep, k, envelope.eigencorr_fit.rate);
    smalltime.push_back(json{{"k", k},
                             {"d", d},
                             {"slope", st.slope},
                             {"max_ratio", st.max_ratio},
                             {"normalized", st.normalized},
                             {"mean_at_zero", st.mean_at_zero}});
  }

  json summary{{"pair_j", pair.j},
               {"pair_k_start", pair.k},
               {"left", to_string(pair.left)},
               {"right", to_string(pair.right)},
               {"eta", envelope.eigencorr_fit.rate},
               {"C_env", envelope.envelope_amplitude},
               {"C_prime", c_prime},
               {"bound_satisfied", bound_satisfied},
               {"realizations", sweep.realizations},
               {"seed", config.disorder.base_seed},
               {"smalltime", smalltime}};
  write_json(scope.file("summary.json"), summary);
  scope.finish();
}

// ---------------------------------------------------------------------------
// cluster
// ---------------------------------------------------------------------------

void cmd_cluster(const RunSettings& settings) {
  RunScope scope(settings, "cluster");
  const ClusteringResult result = clustering_check(
      settings.config.ensemble, settings.config.pair, settings.config.cluster_rate,
      cluster_time_points(settings.config.cluster_grid), settings.workers);

  CsvWriter csv(scope.file("clustering.csv"),
                {"realization", "gap", "d", "C_JK", "alpha", "lambda", "lhs", "rhs",
                 "satisfied", "within_tolerance", "skipped", "reason"});
  for (const ClusteringRow& row : result.rows)
    csv.write_row({csv_int(row.realization), csv_double(row.gap), csv_int(row.d),
                   csv_double(row.c_jk), csv_double(row.alpha), csv_double(row.lambda),
                   csv_double(row.lhs), csv_double(row.rhs),
                   csv_int(row.satisfied ? 1 : 0),
                   csv_int(row.within_tolerance ? 1 : 0), csv_int(row.skipped ? 1 : 0),
                   row.skip_reason});

  write_json(scope.file("summary.json"),
             json{{"eta", result.rate},
                  {"fraction_within_tolerance", result.fraction_within_tolerance},
                  {"skipped", result.skipped},
                  {"realizations", settings.config.ensemble.disorder.realizations},
                  {"seed", settings.config.ensemble.disorder.base_seed}});
  scope.finish();
}

// ---------------------------------------------------------------------------
// gap-stats
// ---------------------------------------------------------------------------

void cmd_gapstats(const RunSettings& settings) {
  RunScope scope(settings, "gap-stats");
  const EnsembleConfig& config = settings.config.ensemble;
  const WegnerReport report =
      wegner_gap_stats(config, settings.config.epsilon_grid, settings.workers);

  CsvWriter wegner(scope.file("wegner.csv"),
                   {"epsilon", "epsilon_n", "empirical_prob", "stderr"});
  for (size_t i = 0; i < report.epsilon_grid.size(); ++i)
    wegner.write_row({csv_double(report.epsilon_grid[i]),
                      csv_double(report.epsilon_grid[i] * report.n),
                      csv_double(report.empirical_prob[i]),
                      csv_double(report.prob_stderr[i])});

  const double max_gap =
      report.gaps.empty() ? 0.0
                          : *std::max_element(report.gaps.begin(), report.gaps.end());
  const int bins = 40;
  const double width = max_gap > 0.0 ? max_gap / bins : 1.0;
  std::vector<long long> counts(bins, 0);
  for (double gap : report.gaps) {
    int bin = static_cast<int>(gap / width);
    bin = std::clamp(bin, 0, bins - 1);
    ++counts[bin];
  }
  CsvWriter hist(scope.file("gaps.csv"), {"bin_lo", "bin_hi", "count"});
  for (int b = 0; b < bins; ++b)
    hist.write_row({csv_double(b * width), csv_double((b + 1) * width),
                    csv_int(counts[b])});

  write_json(scope.file("summary.json"),
             json{{"slope", report.slope_estimate},
                  {"n", report.n},
                  {"realizations", report.realizations},
                  {"seed", config.disorder.base_seed},
                  {"eps_grid", report.epsilon_grid},
                  {"empirical_prob", report.empirical_prob}});
  scope.finish();
}

// ---------------------------------------------------------------------------
// correlations
// ---------------------------------------------------------------------------

void cmd_correlations(const RunSettings& settings) {
  RunScope scope(settings, "correlations");
  const EnsembleConfig& config = settings.config.ensemble;
  CorrelationDecayOptions options;
  options.workers = settings.workers;
  options.with_oracle = config.chain_template.n <= config.oracle_cap;
  const CorrelationDecay decay = correlation_decay_sweep(config, options);

  CsvWriter csv(scope.file("correlations.csv"), {"distance", "mean_abs", "stderr"});
  for (size_t i = 0; i < decay.distances.size(); ++i)
    csv.write_row({csv_int(decay.distances[i]), csv_double(decay.mean_abs[i].mean),
                   csv_double(decay.mean_abs[i].std_error())});

  json summary{{"eta_prime", decay.fit.rate},
               {"C", decay.fit.amplitude},
               {"r2", decay.fit.r2},
               {"window", {decay.fit.d_min, decay.fit.d_max}},
               {"exponential", decay.exponential},
               {"skipped_degenerate", decay.skipped_degenerate},
               {"realizations", config.disorder.realizations},
               {"seed", config.disorder.base_seed}};

  if (decay.has_oracle) {
    CsvWriter oracle_csv(scope.file("oracle_correlations.csv"),
                         {"distance", "mean_abs", "stderr"});
    for (size_t i = 0; i < decay.oracle_distances.size(); ++i)
      oracle_csv.write_row({csv_int(decay.oracle_distances[i]),
                            csv_double(decay.oracle_mean_abs[i].mean),
                            csv_double(decay.oracle_mean_abs[i].std_error())});
    summary["oracle_fit"] = fit_to_json(decay.oracle_fit);
  }
  write_json(scope.file("summary.json"), summary);
  scope.finish();
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

namespace {

struct Check {
  std::string name;
  double residual = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

Check make_check(const std::string& name, double residual, double threshold) {
  return Check{name, residual, threshold, residual <= threshold};
}

}  // namespace

bool cmd_verify(const RunSettings& settings, bool negative_control) {
  RunScope scope(settings, "verify");
  const EnsembleConfig& config = settings.config.ensemble;
  config.validate();
  if (config.oracle_cap < 6)
    throw config_error("verify requires oracle_cap >= 6");

  const int n = config.chain_template.n;
  const int oracle_n = std::min({n, config.oracle_cap, 8});
  const int realizations = config.disorder.realizations;
  const int oracle_realizations = std::min(realizations, 20);
  const bool isotropic = config.chain_template.isotropic();
  const DiagPath path =
      isotropic ? DiagPath::IsotropicEigen : DiagPath::AnisotropicSvd;

  ChainSpec oracle_template = config.chain_template;
  oracle_template.n = oracle_n;
  oracle_template.coupling.resize(oracle_n - 1);
  oracle_template.anisotropy.resize(oracle_n - 1);
  oracle_template.field.resize(oracle_n);

  double car_residual = 0.0;
  double orth_residual = 0.0;
  double diag_residual = 0.0;
  double unitarity_residual = 0.0;
  double expansion_residual = 0.0;
  double spectrum_residual = 0.0;
  double gap_residual = 0.0;

  // CAR depends only on the chain length, not the realization.
  {
    std::vector<ManyBodyOperator> cs;
    for (int j = 1; j <= oracle_n; ++j) cs.push_back(jordan_wigner_c(j, oracle_n));
    const long dim = cs[0].dim();
    for (int j = 0; j < oracle_n; ++j)
      for (int k = 0; k < oracle_n; ++k) {
        Eigen::MatrixXcd anti = cs[j].matrix * cs[k].matrix.adjoint() +
                                cs[k].matrix.adjoint() * cs[j].matrix;
        if (j == k) anti -= Eigen::MatrixXcd::Identity(dim, dim);
        car_residual = std::max(car_residual, operator_norm(anti));
        const Eigen::MatrixXcd anti2 =
            cs[j].matrix * cs[k].matrix + cs[k].matrix * cs[j].matrix;
        car_residual = std::max(car_residual, operator_norm(anti2));
      }
  }

  for (int index = 0; index < realizations; ++index) {
    const ChainSpec spec = draw_realization(config.disorder, config.chain_template, index);
    const BlockHamiltonian block = build_block_hamiltonian(spec);
    FermionDiagonalization diag = diagonalize(block, path);
    if (negative_control) diag.w.col(0) = -diag.w.col(0);

    const Eigen::MatrixXd orth =
        diag.w * diag.w.transpose() - Eigen::MatrixXd::Identity(2 * n, 2 * n);
    orth_residual = std::max(orth_residual, orth.cwiseAbs().maxCoeff());

    const double m_norm = diag.mode_energies.cwiseAbs().maxCoeff();
    const Eigen::MatrixXd resid =
        diag.w * block.m * diag.w.transpose() - diag.mode_diagonal();
    diag_residual = std::max(diag_residual,
                             resid.cwiseAbs().maxCoeff() / std::max(m_norm, 1e-300));

    for (double t : {0.5, 3.0, 17.0}) {
      const Eigen::MatrixXcd prop = propagator(diag, t);
      for (int c = 0; c < prop.cols(); ++c)
        unitarity_residual =
            std::max(unitarity_residual, std::abs(prop.col(c).norm() - 1.0));
    }
  }

  for (int index = 0; index < oracle_realizations; ++index) {
    const ChainSpec spec = draw_realization(config.disorder, oracle_template, index);
    const BlockHamiltonian block = build_block_hamiltonian(spec);
    FermionDiagonalization diag = diagonalize(block, path);
    if (negative_control) diag.w.col(0) = -diag.w.col(0);
    const EvolutionContext ctx(spec, config.oracle_cap);

    std::vector<ManyBodyOperator> cs;
    for (int j = 1; j <= oracle_n; ++j) cs.push_back(jordan_wigner_c(j, oracle_n));

    const std::vector<int> probe_sites{1, (oracle_n + 1) / 2, oracle_n};
    for (double t : {0.1, 1.0, 10.0}) {
      const Eigen::MatrixXcd rows = propagator_rows(diag, 2.0 * t, probe_sites);
      for (size_t p = 0; p < probe_sites.size(); ++p) {
        const int j = probe_sites[p];
        const ManyBodyOperator evolved = heisenberg_evolve(ctx, cs[j - 1], t);
        Eigen::MatrixXcd expansion =
            Eigen::MatrixXcd::Zero(evolved.dim(), evolved.dim());
        for (int k = 0; k < oracle_n; ++k) {
          expansion += rows(p, k) * cs[k].matrix;
          expansion += rows(p, oracle_n + k) * cs[k].matrix.adjoint();
        }
        expansion_residual = std::max(
            expansion_residual,
            (evolved.matrix - expansion).cwiseAbs().maxCoeff());
      }
    }

    // Free-fermion spectrum: the 2^n many-body energies are all signed sums
    // of the mode energies.
    std::vector<double> predicted;
    predicted.reserve(ctx.dim());
    const long combos = 1L << oracle_n;
    for (long mask = 0; mask < combos; ++mask) {
      double sum = 0.0;
      for (int l = 0; l < oracle_n; ++l)
        sum += (mask & (1L << l)) ? diag.mode_energies[l] : -diag.mode_energies[l];
      predicted.push_back(sum);
    }
    std::sort(predicted.begin(), predicted.end());
    for (long i = 0; i < ctx.dim(); ++i)
      spectrum_residual =
          std::max(spectrum_residual, std::abs(predicted[i] - ctx.energies()[i]));

    if (isotropic) {
      const double mode_gap = 2.0 * diag.mode_energies.cwiseAbs().minCoeff();
      gap_residual = std::max(gap_residual, std::abs(ctx.energy_gap() - mode_gap));
    }
  }

  double gaussian_residual = 0.0;
  for (double energy : {0.5, 1.0, 2.0})
    for (double alpha : {0.5, 1.0})
      for (double eps : {0.1, 0.01}) {
        const std::complex<double> lhs = gaussian_halfline_lhs(energy, alpha, eps);
        const double rhs = gaussian_halfline_rhs(energy, alpha, eps);
        gaussian_residual =
            std::max(gaussian_residual, std::abs(lhs - std::complex<double>(rhs)));
      }

  std::vector<Check> checks;
  checks.push_back(make_check("car", car_residual, 1e-12));
  checks.push_back(make_check("w_orthogonality", orth_residual, 1e-10));
  checks.push_back(make_check("diagonalization_residual", diag_residual, 1e-8));
  checks.push_back(make_check("propagator_unitarity", unitarity_residual, 1e-10));
  checks.push_back(make_check("propagator_expansion", expansion_residual, 1e-8));
  checks.push_back(make_check("spectrum_equivalence", spectrum_residual, 1e-8));
  if (isotropic) checks.push_back(make_check("gap_equivalence", gap_residual, 1e-8));
  checks.push_back(make_check("gaussian_identity", gaussian_residual, 1e-8));

  bool all_pass = true;
  json check_json = json::array();
  for (const Check& check : checks) {
    all_pass = all_pass && check.pass;
    std::printf("%-26s residual=%.3e threshold=%.0e [%s]\n", check.name.c_str(),
                check.residual, check.threshold, check.pass ? "ok" : "FAIL");
    check_json.push_back(json{{"name", check.name},
                              {"residual", check.residual},
                              {"threshold", check.threshold},
                              {"pass", check.pass}});
  }

  write_json(scope.file("verify.json"),
             json{{"all_pass", all_pass},
                  {"negative_control", negative_control},
                  {"n", n},
                  {"oracle_n", oracle_n},
                  {"realizations", realizations},
                  {"seed", config.disorder.base_seed},
                  {"checks", check_json}});
  scope.finish();
  return all_pass;
}

}  // namespace xychain
