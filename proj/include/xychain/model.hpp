#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace xychain {

// Error taxonomy shared by all modules. The CLI maps these to exit codes:
// config_error -> 1, numerical_error -> 2.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct capacity_error : config_error {
  using config_error::config_error;
};

struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct degeneracy_error : numerical_error {
  using numerical_error::numerical_error;
};

/// Parameters of one open chain: nearest-neighbour couplings, anisotropies
/// and the on-site transverse field. Sites are 1-based in every public
/// interface; vectors are stored 0-based internally.
struct ChainSpec {
  int n = 1;
  std::vector<double> coupling;    // n-1 entries, all nonzero
  std::vector<double> anisotropy;  // n-1 entries
  std::vector<double> field;       // n entries

  bool isotropic() const;
  void validate() const;

  /// Uniform chain: coupling mu, anisotropy g at every bond, field nu at
  /// every site.
  static ChainSpec uniform(int n, double mu, double g, double nu);
};

enum class DisorderFamily { UniformInterval };

/// Disorder model for the field sequence. Values are drawn i.i.d. from
/// strength * Uniform[a, b]; the pair (base_seed, realization index) fully
/// determines a realization, independent of platform and worker count.
struct DisorderSpec {
  DisorderFamily family = DisorderFamily::UniformInterval;
  double a = 0.0;
  double b = 1.0;
  double strength = 1.0;
  std::uint64_t base_seed = 0;
  int realizations = 1;

  void validate() const;
};

enum class ObservableKind {
  Lowering,        // a_j
  Raising,         // a_j^*
  NumberOcc,       // a_j^* a_j
  NumberHole,      // a_j a_j^*
  SigmaX,
  SigmaY,
  SigmaZ,
  FermiC,          // c_j
  FermiCDagger,    // c_j^*
  MatrixUnit,      // e_j(r, s), r, s in {1, 2}
};

ObservableKind observable_kind_from_string(const std::string& name);
std::string to_string(ObservableKind kind);

/// A left observable at site j and a right observable at site k > j.
struct ObservablePair {
  int j = 1;
  int k = 2;
  ObservableKind left = ObservableKind::Lowering;
  ObservableKind right = ObservableKind::SigmaZ;
  int unit_row = 1;  // only used by MatrixUnit
  int unit_col = 1;

  int distance() const { return k - j; }
  void validate(int n) const;
};

struct TimeGrid {
  double t_max = 200.0;
  double step = 0.1;

  void validate() const;
  std::vector<double> points() const;  // 0, step, 2*step, ..., <= t_max
};

struct DistanceWindow {
  int d_min = 5;
  int d_max = 40;
};

constexpr int kOracleCapHardLimit = 14;

/// Everything an ensemble run needs: the chain template (its field sequence
/// is overwritten per realization), the disorder model, grids and windows.
struct EnsembleConfig {
  ChainSpec chain_template;
  DisorderSpec disorder;
  TimeGrid time_grid;
  DistanceWindow window;
  int oracle_cap = 10;

  void validate() const;
};

/// Returns the template with the field sequence replaced by draws from the
/// scaled disorder family. Deterministic in (base_seed, index).
ChainSpec draw_realization(const DisorderSpec& disorder, const ChainSpec& templ,
                           int index);

}  // namespace xychain
