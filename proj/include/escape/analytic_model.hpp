#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace escape::analytic {

/// Thrown when a formula is evaluated outside its domain (e.g. t <= 1).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct PopulationParams {
  double n_hacked = 0.0;  // N
  int v_total = 1;        // V

  double density() const { return n_hacked / static_cast<double>(v_total); }

  /// Builds a population with N clamped into [0, V].
  static PopulationParams clamped(double n, int v);
};

struct StaticGrowth {
  double n = 0.0;
};

struct ExponentialGrowth {
  double n0 = 1.0;
  double k = 0.0;
};

struct LogisticGrowth {
  double n0 = 1.0;
  double k = 0.0;
  double mu = 1.0;  // carrying capacity
};

using GrowthModel = std::variant<StaticGrowth, ExponentialGrowth, LogisticGrowth>;

struct DetectionParams {
  double t_d = 0.0;
  bool enabled = false;

  static DetectionParams disabled() { return {}; }
  static DetectionParams with_time(double t_d) { return {t_d, true}; }
};

enum class Mobility { Static, Mobile };

struct CurvePoint {
  double t = 0.0;
  double p = 0.0;
};

struct SurvivalCurve {
  std::vector<CurvePoint> points;
};

/// Throws std::invalid_argument if the growth parameters violate n0 > 0,
/// k >= 0, mu >= n0 (or n >= 0 for static growth).
void validate(const GrowthModel& g);

/// Throws std::invalid_argument unless V >= 1 and 0 <= N <= V.
void validate(const PopulationParams& pop);

/// Mean number of distinct lattice sites visited by a 2-D random walk after
/// t steps, using the asymptotic form pi*t/ln(t). Requires t > 1.
double distinct_sites_visited(double t);

/// Fraction of visits that succeed before detection: 1 - exp(-t_d), or 1 when
/// detection is disabled.
double detection_success_fraction(const DetectionParams& d);

/// ln of the static-container survival probability, -(N/V) * S_eff(t).
double log_survival_static(double t, const PopulationParams& pop,
                           const DetectionParams& d);

double survival_static(double t, const PopulationParams& pop,
                       const DetectionParams& d);

/// exp((N/V)^2 * ln P_static(t)).
double survival_mobile(double t, const PopulationParams& pop,
                       const DetectionParams& d);

double survival(Mobility mode, double t, const PopulationParams& pop,
                const DetectionParams& d);

/// Attacker population N(t) under the given growth law. Not clamped.
double attackers_at(const GrowthModel& g, double t);

/// Evaluates N(t) at every grid point, clamps it to [0, V] and applies the
/// survival formula for `mode`. The grid must be strictly increasing and every
/// point must exceed 1.
SurvivalCurve survival_curve(Mobility mode, const GrowthModel& g, int v_total,
                             const DetectionParams& d,
                             std::span<const double> t_grid);

std::string to_string(Mobility mode);

}  // namespace escape::analytic
