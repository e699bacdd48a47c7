#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "escape/analytic_model.hpp"
#include "escape/random.hpp"

// Monte Carlo simulation of random-walking attackers hunting one container on
// a 2-D torus of hosts.
namespace escape::mc {

/// Invalid simulation configuration (bad lattice size, too many attackers...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Cell {
  int x = 0;
  int y = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

struct LatticeShape {
  int width = 0;
  int height = 0;

  int size() const { return width * height; }
};

/// Picks the most nearly square width x height factorisation of V with
/// width >= height and width <= 2 * height. Throws ConfigError if V < 2 or no
/// such factorisation exists.
LatticeShape lattice_shape(int v_total);

enum class PreyMode { Static, Mobile };

struct SimConfig {
  int v_total = 400;
  analytic::GrowthModel growth = analytic::StaticGrowth{5.0};
  PreyMode mode = PreyMode::Static;
  double t_d = 0.0;  // attacker success per encounter is 1 - exp(-t_d)
  int t_max = 200;
  int trials = 1000;
  std::uint64_t seed = 0;
  // 0 selects std::thread::hardware_concurrency(). Results do not depend on it.
  unsigned threads = 1;
};

/// Throws ConfigError describing the first violated constraint.
void validate(const SimConfig& config);

struct LatticeWorld {
  LatticeShape shape;
  Cell prey;
  std::vector<Cell> predators;
  int tick = 0;

  bool contains(Cell c) const {
    return c.x >= 0 && c.y >= 0 && c.x < shape.width && c.y < shape.height;
  }
  bool has_predator_at(Cell c) const;
};

enum class Encounter { NoContact, Escaped, Captured };

/// Target attacker count at `tick`: round(N(tick)) clamped to [0, V].
int target_predator_count(const SimConfig& config, int tick);

/// Places the prey uniformly at random and round(N(0)) predators uniformly on
/// the remaining hosts. Deterministic in `trial_seed`.
LatticeWorld init_world(const SimConfig& config, std::uint64_t trial_seed);

/// Same as above, drawing from an existing stream.
LatticeWorld init_world(const SimConfig& config, random::Engine& rng);

/// The four torus neighbours of `c` in the order +x, -x, +y, -y.
std::vector<Cell> neighbors(const LatticeShape& shape, Cell c);

/// Resolves a possible encounter at the prey's host. A mobile prey that escapes
/// is relocated to a uniformly chosen predator-free host.
Encounter resolve_encounter(LatticeWorld& world, const SimConfig& config,
                            random::Engine& rng);

/// Advances the world by one tick: every predator hops to a random neighbour,
/// new predators spawn next to existing ones if the growth law calls for it,
/// then the encounter at the prey's host is resolved.
Encounter step(LatticeWorld& world, const SimConfig& config,
               random::Engine& rng);

struct TrialOutcome {
  bool survived = true;
  std::optional<int> capture_tick;
  int migrations = 0;
  int encounters = 0;  // ticks on which a predator shared the prey's host
};

/// Runs one trial to t_max. Fully determined by (config.seed, trial_index).
TrialOutcome run_trial(const SimConfig& config, std::uint64_t trial_index);

struct EmpiricalPoint {
  int tick = 0;
  double surviving_fraction = 1.0;
  double half_width_95ci = 0.0;
};

struct EmpiricalCurve {
  std::vector<EmpiricalPoint> points;  // ticks 0..t_max
  int trials = 0;
  long long encounters = 0;
  long long escapes = 0;
  // With fewer than two trials the normal-approximation interval is
  // meaningless; half-widths are reported as 0 and this flag is set.
  bool degenerate_ci = false;

  double final_fraction() const {
    return points.empty() ? 1.0 : points.back().surviving_fraction;
  }
  double mean_half_width() const;
};

/// Runs `config.trials` independent trials (possibly on several threads) and
/// aggregates the surviving fraction at every tick with a 95% normal CI.
EmpiricalCurve run_experiment(const SimConfig& config);

}  // namespace escape::mc
