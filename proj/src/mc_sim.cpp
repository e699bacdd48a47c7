#include "escape/mc_sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>
#include <thread>

namespace escape::mc {

namespace {

constexpr double kZ95 = 1.959963984540054;

int cell_index(const LatticeShape& shape, Cell c) {
  return c.y * shape.width + c.x;
}

Cell cell_at(const LatticeShape& shape, int index) {
  return {index % shape.width, index / shape.width};
}

std::vector<int> occupancy(const LatticeWorld& world) {
  std::vector<int> count(static_cast<std::size_t>(world.shape.size()), 0);
  for (const auto& p : world.predators) {
    ++count[static_cast<std::size_t>(cell_index(world.shape, p))];
  }
  return count;
}

void spawn_predators(LatticeWorld& world, int how_many, random::Engine& rng) {
  auto occupied = occupancy(world);
  auto is_free = [&](Cell c) {
    return occupied[static_cast<std::size_t>(cell_index(world.shape, c))] == 0;
  };
  std::vector<std::size_t> parents;
  std::vector<Cell> free_cells;
  for (int n = 0; n < how_many; ++n) {
    parents.clear();
    for (std::size_t i = 0; i < world.predators.size(); ++i) {
      const auto around = neighbors(world.shape, world.predators[i]);
      if (std::any_of(around.begin(), around.end(), is_free)) {
        parents.push_back(i);
      }
    }
    if (parents.empty()) {
      return;  // every host next to an attacker is already taken
    }
    const auto parent =
        world.predators[parents[random::uniform_index(rng, parents.size())]];
    free_cells.clear();
    for (const auto c : neighbors(world.shape, parent)) {
      if (is_free(c) &&
          std::find(free_cells.begin(), free_cells.end(), c) == free_cells.end()) {
        free_cells.push_back(c);
      }
    }
    const auto child = free_cells[random::uniform_index(rng, free_cells.size())];
    world.predators.push_back(child);
    ++occupied[static_cast<std::size_t>(cell_index(world.shape, child))];
  }
}

}  // namespace

LatticeShape lattice_shape(int v_total) {
  if (v_total < 2) {
    throw ConfigError("lattice needs at least 2 hosts, got V=" +
                      std::to_string(v_total));
  }
  // Largest divisor not above sqrt(V).
  int height = static_cast<int>(std::sqrt(static_cast<double>(v_total)));
  while (height * height > v_total) {
    --height;
  }
  while ((height + 1) * (height + 1) <= v_total) {
    ++height;
  }
  while (v_total % height != 0) {
    --height;
  }
  const int width = v_total / height;
  if (width > 2 * height) {
    throw ConfigError("V=" + std::to_string(v_total) +
                      " has no near-square factorisation (best is " +
                      std::to_string(width) + "x" + std::to_string(height) +
                      ", aspect ratio above 2)");
  }
  return {width, height};
}

void validate(const SimConfig& config) {
  lattice_shape(config.v_total);
  try {
    analytic::validate(config.growth);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (config.t_max < 1) {
    throw ConfigError("t_max must be >= 1");
  }
  if (config.trials < 1) {
    throw ConfigError("trials must be >= 1");
  }
  if (!(config.t_d >= 0.0)) {
    throw ConfigError("detection time t_d must be >= 0");
  }
}

bool LatticeWorld::has_predator_at(Cell c) const {
  return std::find(predators.begin(), predators.end(), c) != predators.end();
}

int target_predator_count(const SimConfig& config, int tick) {
  const double n = analytic::attackers_at(config.growth, tick);
  const double rounded = std::round(n);
  return static_cast<int>(
      std::clamp(rounded, 0.0, static_cast<double>(config.v_total)));
}

std::vector<Cell> neighbors(const LatticeShape& shape, Cell c) {
  const int w = shape.width;
  const int h = shape.height;
  return {
      {(c.x + 1) % w, c.y},
      {(c.x + w - 1) % w, c.y},
      {c.x, (c.y + 1) % h},
      {c.x, (c.y + h - 1) % h},
  };
}

LatticeWorld init_world(const SimConfig& config, std::uint64_t trial_seed) {
  random::Engine rng(trial_seed);
  return init_world(config, rng);
}

LatticeWorld init_world(const SimConfig& config, random::Engine& rng) {
  validate(config);
  LatticeWorld world;
  world.shape = lattice_shape(config.v_total);
  const int v = world.shape.size();
  const int n0 = target_predator_count(config, 0);
  if (n0 >= v) {
    throw ConfigError("initial attacker count " + std::to_string(n0) +
                      " leaves no free host for the prey (V=" +
                      std::to_string(v) + ")");
  }
  const int prey_index = static_cast<int>(random::uniform_index(rng, v));
  world.prey = cell_at(world.shape, prey_index);

  // Partial Fisher-Yates over the hosts other than the prey's.
  std::vector<int> hosts(static_cast<std::size_t>(v - 1));
  std::iota(hosts.begin(), hosts.end(), 0);
  for (auto& h : hosts) {
    if (h >= prey_index) {
      ++h;
    }
  }
  world.predators.reserve(static_cast<std::size_t>(n0));
  for (int i = 0; i < n0; ++i) {
    const auto j = static_cast<std::size_t>(i) +
                   random::uniform_index(rng, hosts.size() - static_cast<std::size_t>(i));
    std::swap(hosts[static_cast<std::size_t>(i)], hosts[j]);
    world.predators.push_back(cell_at(world.shape, hosts[static_cast<std::size_t>(i)]));
  }
  return world;
}

Encounter resolve_encounter(LatticeWorld& world, const SimConfig& config,
                            random::Engine& rng) {
  if (!world.has_predator_at(world.prey)) {
    return Encounter::NoContact;
  }
  if (config.mode == PreyMode::Static) {
    return Encounter::Captured;
  }
  if (!random::bernoulli(rng, std::exp(-config.t_d))) {
    return Encounter::Captured;  // attacker finished before detection
  }
  const auto occupied = occupancy(world);
  std::vector<int> free_hosts;
  for (int i = 0; i < world.shape.size(); ++i) {
    if (occupied[static_cast<std::size_t>(i)] == 0) {
      free_hosts.push_back(i);
    }
  }
  if (free_hosts.empty()) {
    return Encounter::Captured;
  }
  world.prey = cell_at(world.shape,
                       free_hosts[random::uniform_index(rng, free_hosts.size())]);
  return Encounter::Escaped;
}

Encounter step(LatticeWorld& world, const SimConfig& config,
               random::Engine& rng) {
  for (auto& p : world.predators) {
    p = neighbors(world.shape, p)[random::uniform_index(rng, 4)];
  }
  // At most V-1 attackers, so a live prey always has a host of its own.
  const int target =
      std::min(target_predator_count(config, world.tick + 1), world.shape.size() - 1);
  const int grow = target - static_cast<int>(world.predators.size());
  if (grow > 0) {
    spawn_predators(world, grow, rng);
  }
  const auto outcome = resolve_encounter(world, config, rng);
  ++world.tick;
  return outcome;
}

TrialOutcome run_trial(const SimConfig& config, std::uint64_t trial_index) {
  auto rng = random::make_engine(config.seed, trial_index);
  auto world = init_world(config, rng);
  TrialOutcome out;
  while (world.tick < config.t_max) {
    const auto e = step(world, config, rng);
    if (e == Encounter::NoContact) {
      continue;
    }
    ++out.encounters;
    if (e == Encounter::Escaped) {
      ++out.migrations;
      continue;
    }
    out.survived = false;
    out.capture_tick = world.tick;
    break;
  }
  return out;
}

double EmpiricalCurve::mean_half_width() const {
  if (points.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (const auto& p : points) {
    sum += p.half_width_95ci;
  }
  return sum / static_cast<double>(points.size());
}

EmpiricalCurve run_experiment(const SimConfig& config) {
  validate(config);
  const auto trials = static_cast<std::size_t>(config.trials);
  std::vector<TrialOutcome> outcomes(trials);

  unsigned workers = config.threads == 0 ? std::thread::hardware_concurrency()
                                         : config.threads;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(trials)));

  if (workers == 1) {
    for (std::size_t i = 0; i < trials; ++i) {
      outcomes[i] = run_trial(config, i);
    }
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < trials; i += workers) {
            outcomes[i] = run_trial(config, i);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) {
      t.join();
    }
    for (const auto& e : errors) {
      if (e) {
        std::rethrow_exception(e);
      }
    }
  }

  std::vector<long long> captured_at(static_cast<std::size_t>(config.t_max) + 1, 0);
  EmpiricalCurve curve;
  curve.trials = config.trials;
  curve.degenerate_ci = config.trials < 2;
  for (const auto& o : outcomes) {
    curve.encounters += o.encounters;
    curve.escapes += o.migrations;
    if (o.capture_tick) {
      ++captured_at[static_cast<std::size_t>(*o.capture_tick)];
    }
  }
  const auto n = static_cast<double>(config.trials);
  long long captured = 0;
  curve.points.reserve(captured_at.size());
  for (int tick = 0; tick <= config.t_max; ++tick) {
    captured += captured_at[static_cast<std::size_t>(tick)];
    const double p = 1.0 - static_cast<double>(captured) / n;
    const double hw = curve.degenerate_ci ? 0.0 : kZ95 * std::sqrt(p * (1.0 - p) / n);
    curve.points.push_back({tick, p, hw});
  }
  return curve;
}

}  // namespace escape::mc
