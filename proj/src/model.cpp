#include "xychain/model.hpp"

#include <cmath>
#include <random>

namespace xychain {

bool ChainSpec::isotropic() const {
  for (double g : anisotropy) {
    if (g != 0.0) return false;
  }
  for (double mu : coupling) {
    if (mu != coupling.front()) return false;
  }
  return true;
}

void ChainSpec::validate() const {
  if (n < 1) throw config_error("chain: n must be >= 1");
  if (static_cast<int>(coupling.size()) != n - 1)
    throw config_error("chain: coupling sequence must have n-1 entries");
  if (static_cast<int>(anisotropy.size()) != n - 1)
    throw config_error("chain: anisotropy sequence must have n-1 entries");
  if (static_cast<int>(field.size()) != n)
    throw config_error("chain: field sequence must have n entries");
  for (double mu : coupling) {
    if (mu == 0.0)
      throw config_error("chain: zero coupling splits the chain; all mu_j must be nonzero");
    if (!std::isfinite(mu)) throw config_error("chain: non-finite coupling");
  }
  for (double g : anisotropy)
    if (!std::isfinite(g)) throw config_error("chain: non-finite anisotropy");
  for (double v : field)
    if (!std::isfinite(v)) throw config_error("chain: non-finite field");
}

ChainSpec ChainSpec::uniform(int n, double mu, double g, double nu) {
  ChainSpec spec;
  spec.n = n;
  spec.coupling.assign(n > 0 ? n - 1 : 0, mu);
  spec.anisotropy.assign(n > 0 ? n - 1 : 0, g);
  spec.field.assign(n, nu);
  spec.validate();
  return spec;
}

void DisorderSpec::validate() const {
  if (!(a < b)) throw config_error("disorder: interval requires a < b");
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(strength))
    throw config_error("disorder: non-finite parameters");
  if (realizations < 1) throw config_error("disorder: realizations must be >= 1");
}

ObservableKind observable_kind_from_string(const std::string& name) {
  if (name == "a") return ObservableKind::Lowering;
  if (name == "a_dagger") return ObservableKind::Raising;
  if (name == "a_dagger_a") return ObservableKind::NumberOcc;
  if (name == "a_a_dagger") return ObservableKind::NumberHole;
  if (name == "sigma_x") return ObservableKind::SigmaX;
  if (name == "sigma_y") return ObservableKind::SigmaY;
  if (name == "sigma_z") return ObservableKind::SigmaZ;
  if (name == "c") return ObservableKind::FermiC;
  if (name == "c_dagger") return ObservableKind::FermiCDagger;
  if (name == "matrix_unit") return ObservableKind::MatrixUnit;
  throw config_error("unknown observable kind: " + name);
}

std::string to_string(ObservableKind kind) {
  switch (kind) {
    case ObservableKind::Lowering: return "a";
    case ObservableKind::Raising: return "a_dagger";
    case ObservableKind::NumberOcc: return "a_dagger_a";
    case ObservableKind::NumberHole: return "a_a_dagger";
    case ObservableKind::SigmaX: return "sigma_x";
    case ObservableKind::SigmaY: return "sigma_y";
    case ObservableKind::SigmaZ: return "sigma_z";
    case ObservableKind::FermiC: return "c";
    case ObservableKind::FermiCDagger: return "c_dagger";
    case ObservableKind::MatrixUnit: return "matrix_unit";
  }
  throw config_error("unknown observable kind");
}

void ObservablePair::validate(int n) const {
  if (j < 1 || j > n) throw config_error("observable pair: left site out of range");
  if (!(j < k && k <= n))
    throw config_error("observable pair: requires j < k <= n (disjoint supports)");
  if (left == ObservableKind::MatrixUnit || right == ObservableKind::MatrixUnit) {
    if (unit_row < 1 || unit_row > 2 || unit_col < 1 || unit_col > 2)
      throw config_error("observable pair: matrix unit indices must be in {1,2}");
  }
}

void TimeGrid::validate() const {
  if (!(step > 0.0)) throw config_error("time grid: step must be positive");
  if (!(t_max >= step)) throw config_error("time grid: t_max must be >= step");
}

std::vector<double> TimeGrid::points() const {
  validate();
  std::vector<double> out;
  const int count = static_cast<int>(std::floor(t_max / step + 1e-9)) + 1;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(i * step);
  return out;
}

void EnsembleConfig::validate() const {
  chain_template.validate();
  disorder.validate();
  time_grid.validate();
  if (window.d_min < 1) throw config_error("window: d_min must be >= 1");
  if (window.d_max >= chain_template.n)
    throw config_error("window: d_max must be < n");
  if (oracle_cap < 1 || oracle_cap > kOracleCapHardLimit)
    throw capacity_error("oracle_cap must be in [1, 14]");
}

ChainSpec draw_realization(const DisorderSpec& disorder, const ChainSpec& templ,
                           int index) {
  disorder.validate();
  templ.validate();
  if (index < 0 || index >= disorder.realizations)
    throw config_error("draw_realization: index out of range");

  // Per-realization stream keyed by (base_seed, index). mt19937_64 and
  // seed_seq are pinned by the standard, and the uniform mapping below is
  // explicit, so draws are identical across platforms.
  std::seed_seq seq{static_cast<std::uint32_t>(disorder.base_seed >> 32),
                    static_cast<std::uint32_t>(disorder.base_seed & 0xffffffffu),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);

  ChainSpec out = templ;
  for (int site = 0; site < templ.n; ++site) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    out.field[site] = disorder.strength * (disorder.a + (disorder.b - disorder.a) * u);
  }
  return out;
}

}  // namespace xychain
