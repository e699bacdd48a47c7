#include "escape/analytic_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "escape/text.hpp"

namespace escape::analytic {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

PopulationParams PopulationParams::clamped(double n, int v) {
  if (v < 1) {
    throw std::invalid_argument("host count V must be at least 1, got " +
                                std::to_string(v));
  }
  return {std::clamp(n, 0.0, static_cast<double>(v)), v};
}

void validate(const PopulationParams& pop) {
  if (pop.v_total < 1) {
    throw std::invalid_argument("host count V must be at least 1, got " +
                                std::to_string(pop.v_total));
  }
  if (!(pop.n_hacked >= 0.0) ||
      pop.n_hacked > static_cast<double>(pop.v_total)) {
    throw std::invalid_argument("hacked host count N=" +
                                text::format_real(pop.n_hacked) +
                                " outside [0, V=" +
                                std::to_string(pop.v_total) + "]");
  }
}

void validate(const GrowthModel& g) {
  std::visit(
      Overloaded{
          [](const StaticGrowth& s) {
            if (!(s.n >= 0.0)) {
              throw std::invalid_argument("static growth requires n >= 0");
            }
          },
          [](const ExponentialGrowth& e) {
            if (!(e.n0 > 0.0)) {
              throw std::invalid_argument("exponential growth requires n0 > 0");
            }
            if (!(e.k >= 0.0)) {
              throw std::invalid_argument("exponential growth requires k >= 0");
            }
          },
          [](const LogisticGrowth& l) {
            if (!(l.n0 > 0.0)) {
              throw std::invalid_argument("logistic growth requires n0 > 0");
            }
            if (!(l.k >= 0.0)) {
              throw std::invalid_argument("logistic growth requires k >= 0");
            }
            if (!(l.mu >= l.n0)) {
              throw std::invalid_argument(
                  "logistic growth requires mu >= n0 (carrying capacity below "
                  "initial population)");
            }
          },
      },
      g);
}

double distinct_sites_visited(double t) {
  if (!(t > 1.0)) {
    throw DomainError("distinct-sites formula pi*t/ln(t) requires t > 1, got t=" +
                      text::format_real(t));
  }
  return std::numbers::pi * t / std::log(t);
}

double detection_success_fraction(const DetectionParams& d) {
  if (!d.enabled) {
    return 1.0;
  }
  if (!(d.t_d >= 0.0)) {
    throw std::invalid_argument("detection time t_d must be >= 0, got " +
                                text::format_real(d.t_d));
  }
  // -expm1(-x) == 1 - exp(-x) without cancellation for small t_d.
  return -std::expm1(-d.t_d);
}

double log_survival_static(double t, const PopulationParams& pop,
                           const DetectionParams& d) {
  validate(pop);
  const double visited = distinct_sites_visited(t);
  const double effective = detection_success_fraction(d) * visited;
  return -pop.density() * effective;
}

double survival_static(double t, const PopulationParams& pop,
                       const DetectionParams& d) {
  return std::exp(log_survival_static(t, pop, d));
}

double survival_mobile(double t, const PopulationParams& pop,
                       const DetectionParams& d) {
  const double rho = pop.n_hacked / static_cast<double>(pop.v_total);
  // ln P_static is taken directly rather than via log(exp(.)) so that very
  // small static survival values do not underflow to log(0).
  return std::exp(rho * rho * log_survival_static(t, pop, d));
}

double survival(Mobility mode, double t, const PopulationParams& pop,
                const DetectionParams& d) {
  return mode == Mobility::Static ? survival_static(t, pop, d)
                                  : survival_mobile(t, pop, d);
}

double attackers_at(const GrowthModel& g, double t) {
  if (!(t >= 0.0)) {
    throw DomainError("growth models are defined for t >= 0, got t=" +
                      text::format_real(t));
  }
  validate(g);
  return std::visit(
      Overloaded{
          [](const StaticGrowth& s) { return s.n; },
          [t](const ExponentialGrowth& e) { return e.n0 * std::exp(e.k * t); },
          [t](const LogisticGrowth& l) {
            const double grown = l.n0 * std::exp(l.k * t);
            if (std::isinf(grown)) {
              return l.mu;
            }
            return l.mu * grown / (grown + l.mu - l.n0);
          },
      },
      g);
}

SurvivalCurve survival_curve(Mobility mode, const GrowthModel& g, int v_total,
                             const DetectionParams& d,
                             std::span<const double> t_grid) {
  validate(g);
  SurvivalCurve curve;
  curve.points.reserve(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    if (!(t > 1.0)) {
      throw DomainError("time grid point t=" + text::format_real(t) +
                        " (index " + std::to_string(i) +
                        ") is singular: survival formulas require t > 1");
    }
    if (i > 0 && !(t > t_grid[i - 1])) {
      throw std::invalid_argument("time grid must be strictly increasing at index " +
                                  std::to_string(i));
    }
    const auto pop = PopulationParams::clamped(attackers_at(g, t), v_total);
    curve.points.push_back({t, survival(mode, t, pop, d)});
  }
  return curve;
}

std::string to_string(Mobility mode) {
  return mode == Mobility::Static ? "static" : "mobile";
}

}  // namespace escape::analytic
