#include "escape/scenario.hpp"

#include <cmath>
#include <ostream>
#include <set>
#include <sstream>
#include <variant>

#include "escape/analytic_model.hpp"
#include "escape/detector.hpp"
#include "escape/mc_sim.hpp"
#include "escape/mtd_policy.hpp"
#include "escape/text.hpp"

namespace escape::scenario {

namespace {

// Typed access to a parameter map. Every key read is recorded so that
// leftovers can be reported as unknown.
class Params {
 public:
  explicit Params(const std::map<std::string, std::string>& raw) : raw_(raw) {}

  bool has(const std::string& key) const { return raw_.contains(key); }

  std::optional<std::string> get(const std::string& key) {
    used_.insert(key);
    const auto it = raw_.find(key);
    if (it == raw_.end()) {
      return std::nullopt;
    }
    return it->second;
  }

  std::string require(const std::string& key) {
    auto v = get(key);
    if (!v) {
      throw SpecError("missing required parameter '" + key + "'");
    }
    return *v;
  }

  std::string text(const std::string& key, std::string fallback) {
    return get(key).value_or(std::move(fallback));
  }

  double real(const std::string& key) { return to_real(key, require(key)); }
  double real(const std::string& key, double fallback) {
    const auto v = get(key);
    return v ? to_real(key, *v) : fallback;
  }

  long long integer(const std::string& key) { return to_int(key, require(key)); }
  long long integer(const std::string& key, long long fallback) {
    const auto v = get(key);
    return v ? to_int(key, *v) : fallback;
  }

  std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
    const auto v = get(key);
    if (!v) {
      return fallback;
    }
    try {
      return text::parse_u64(*v, key);
    } catch (const std::invalid_argument& e) {
      throw SpecError(e.what());
    }
  }

  /// Throws SpecError listing every key that no reader asked for.
  void reject_unknown() const {
    std::string unknown;
    for (const auto& [key, value] : raw_) {
      if (!used_.contains(key)) {
        unknown += (unknown.empty() ? "" : ", ") + key;
      }
    }
    if (!unknown.empty()) {
      throw SpecError("unknown parameter(s): " + unknown);
    }
  }

 private:
  static double to_real(const std::string& key, const std::string& v) {
    try {
      return text::parse_real(v, key);
    } catch (const std::invalid_argument& e) {
      throw SpecError(e.what());
    }
  }
  static long long to_int(const std::string& key, const std::string& v) {
    try {
      return text::parse_int(v, key);
    } catch (const std::invalid_argument& e) {
      throw SpecError(e.what());
    }
  }

  const std::map<std::string, std::string>& raw_;
  std::set<std::string> used_;
};

int positive_int(Params& p, const std::string& key, long long fallback) {
  const auto v = p.integer(key, fallback);
  if (v < 1 || v > 1'000'000'000) {
    throw SpecError("parameter '" + key + "' must be a positive integer");
  }
  return static_cast<int>(v);
}

analytic::GrowthModel read_growth(Params& p) {
  const auto law = p.text("growth", "static");
  analytic::GrowthModel g;
  if (law == "static") {
    g = analytic::StaticGrowth{p.real("n")};
  } else if (law == "exponential") {
    g = analytic::ExponentialGrowth{p.real("n0"), p.real("k")};
  } else if (law == "logistic") {
    g = analytic::LogisticGrowth{p.real("n0"), p.real("k"), p.real("mu")};
  } else {
    throw SpecError("unknown growth law '" + law +
                    "' (expected static, exponential or logistic)");
  }
  try {
    analytic::validate(g);
  } catch (const std::invalid_argument& e) {
    throw SpecError(e.what());
  }
  return g;
}

std::string describe(const analytic::GrowthModel& g) {
  using text::format_real;
  if (const auto* s = std::get_if<analytic::StaticGrowth>(&g)) {
    return "growth=static n=" + format_real(s->n);
  }
  if (const auto* e = std::get_if<analytic::ExponentialGrowth>(&g)) {
    return "growth=exponential n0=" + format_real(e->n0) + " k=" + format_real(e->k);
  }
  const auto& l = std::get<analytic::LogisticGrowth>(g);
  return "growth=logistic n0=" + format_real(l.n0) + " k=" + format_real(l.k) +
         " mu=" + format_real(l.mu);
}

// --- analytic ---------------------------------------------------------------

struct AnalyticJob {
  std::vector<analytic::Mobility> modes;
  analytic::GrowthModel growth;
  int v_total = 0;
  analytic::DetectionParams detection;
  std::vector<double> grid;
};

AnalyticJob parse_analytic(Params& p) {
  AnalyticJob job;
  const auto mode = p.text("mode", "both");
  if (mode == "static") {
    job.modes = {analytic::Mobility::Static};
  } else if (mode == "mobile") {
    job.modes = {analytic::Mobility::Mobile};
  } else if (mode == "both") {
    job.modes = {analytic::Mobility::Static, analytic::Mobility::Mobile};
  } else {
    throw SpecError("unknown mode '" + mode + "' (expected static, mobile or both)");
  }
  job.growth = read_growth(p);
  job.v_total = positive_int(p, "v", 20);
  if (const auto td = p.get("td")) {
    job.detection = analytic::DetectionParams::with_time(p.real("td"));
    if (!(job.detection.t_d >= 0.0)) {
      throw SpecError("td must be >= 0");
    }
  }
  if (const auto grid = p.get("grid")) {
    if (p.has("t_min") || p.has("t_max") || p.has("t_step")) {
      throw SpecError("'grid' cannot be combined with t_min/t_max/t_step");
    }
    for (const auto& cell : text::split(*grid, ',')) {
      try {
        job.grid.push_back(text::parse_real(cell, "grid"));
      } catch (const std::invalid_argument& e) {
        throw SpecError(e.what());
      }
    }
  } else {
    const double t_min = p.real("t_min", 2.0);
    const double t_max = p.real("t_max", 100.0);
    const double t_step = p.real("t_step", 1.0);
    if (!(t_step > 0.0) || !(t_max >= t_min)) {
      throw SpecError("time grid needs t_step > 0 and t_max >= t_min");
    }
    const auto n = static_cast<std::size_t>(std::floor((t_max - t_min) / t_step + 1e-9)) + 1;
    if (n > 10'000'000) {
      throw SpecError("time grid is too large");
    }
    for (std::size_t i = 0; i < n; ++i) {
      job.grid.push_back(t_min + static_cast<double>(i) * t_step);
    }
  }
  return job;
}

std::string render_analytic(const ScenarioSpec& spec, const AnalyticJob& job) {
  std::vector<analytic::SurvivalCurve> curves;
  for (const auto mode : job.modes) {
    curves.push_back(
        analytic::survival_curve(mode, job.growth, job.v_total, job.detection, job.grid));
  }
  std::ostringstream out;
  out << "# engine=analytic name=" << spec.name << '\n';
  out << "# " << describe(job.growth) << " V=" << job.v_total << " detection="
      << (job.detection.enabled ? "td=" + text::format_real(job.detection.t_d)
                                : std::string("disabled"))
      << '\n';
  out << 't';
  for (const auto mode : job.modes) {
    out << ",p_" << analytic::to_string(mode);
  }
  out << '\n';
  for (std::size_t i = 0; i < job.grid.size(); ++i) {
    out << text::format_csv(job.grid[i]);
    for (const auto& c : curves) {
      out << ',' << text::format_csv(c.points[i].p);
    }
    out << '\n';
  }
  return std::move(out).str();
}

// --- montecarlo -------------------------------------------------------------

mc::SimConfig parse_montecarlo(Params& p) {
  mc::SimConfig cfg;
  cfg.v_total = positive_int(p, "v", 400);
  cfg.growth = read_growth(p);
  const auto mode = p.text("mode", "static");
  if (mode == "static") {
    cfg.mode = mc::PreyMode::Static;
  } else if (mode == "mobile") {
    cfg.mode = mc::PreyMode::Mobile;
  } else {
    throw SpecError("unknown prey mode '" + mode + "' (expected static or mobile)");
  }
  cfg.t_d = p.real("td", 0.0);
  cfg.t_max = positive_int(p, "t_max", 200);
  cfg.trials = positive_int(p, "trials", 1000);
  cfg.seed = p.u64("seed", 0);
  cfg.threads = static_cast<unsigned>(p.integer("threads", 1));
  try {
    mc::validate(cfg);
  } catch (const mc::ConfigError& e) {
    throw SpecError(e.what());
  }
  return cfg;
}

std::string render_montecarlo(const ScenarioSpec& spec, const mc::SimConfig& cfg) {
  const auto curve = mc::run_experiment(cfg);
  const auto shape = mc::lattice_shape(cfg.v_total);
  std::ostringstream out;
  out << "# engine=montecarlo name=" << spec.name << '\n';
  out << "# lattice=" << shape.width << 'x' << shape.height << " torus "
      << describe(cfg.growth) << " mode="
      << (cfg.mode == mc::PreyMode::Static ? "static" : "mobile")
      << " td=" << text::format_real(cfg.t_d) << '\n';
  out << "# trials=" << cfg.trials << " t_max=" << cfg.t_max << " seed=" << cfg.seed
      << '\n';
  out << "# encounters=" << curve.encounters << " escapes=" << curve.escapes
      << " degenerate_ci=" << (curve.degenerate_ci ? 1 : 0) << '\n';
  out << "tick,surviving_fraction,ci_half_width\n";
  for (const auto& pt : curve.points) {
    out << pt.tick << ',' << text::format_csv(pt.surviving_fraction) << ','
        << text::format_csv(pt.half_width_95ci) << '\n';
  }
  return std::move(out).str();
}

// --- detector ---------------------------------------------------------------

struct DetectorJob {
  enum class Action { Train, Run, TrainRun } action = Action::TrainRun;
  std::filesystem::path trace;
  std::optional<std::filesystem::path> train_trace;
  std::optional<std::filesystem::path> db;
  std::optional<std::string> container;
  detector::EpochConfig epochs;
};

DetectorJob parse_detector(Params& p) {
  DetectorJob job;
  const auto action = p.text("action", "train-run");
  if (action == "train") {
    job.action = DetectorJob::Action::Train;
  } else if (action == "run") {
    job.action = DetectorJob::Action::Run;
  } else if (action == "train-run") {
    job.action = DetectorJob::Action::TrainRun;
  } else {
    throw SpecError("unknown detector action '" + action +
                    "' (expected train, run or train-run)");
  }
  job.trace = p.require("trace");
  if (const auto t = p.get("train_trace")) {
    if (job.action != DetectorJob::Action::TrainRun) {
      throw SpecError("'train_trace' only applies to action train-run");
    }
    job.train_trace = *t;
  }
  if (const auto db = p.get("db")) {
    job.db = *db;
  } else if (job.action == DetectorJob::Action::Run) {
    throw SpecError("missing required parameter 'db'");
  }
  job.container = p.get("container");
  job.epochs.epoch_size = static_cast<std::size_t>(positive_int(p, "epoch_size", 1000));
  job.epochs.threshold = static_cast<std::size_t>(positive_int(p, "threshold", 10));
  try {
    detector::validate(job.epochs);
  } catch (const std::invalid_argument& e) {
    throw SpecError(e.what());
  }
  return job;
}

std::vector<detector::SyscallEvent> load_trace(const std::filesystem::path& path,
                                               const std::optional<std::string>& container) {
  auto events = detector::parse_trace(text::read_file(path));
  if (container) {
    events = detector::filter_container(events, *container);
  }
  return events;
}

std::string render_detector(const ScenarioSpec& spec, const DetectorJob& job) {
  using Action = DetectorJob::Action;
  const auto events = load_trace(job.trace, job.container);
  if (job.action == Action::Train) {
    detector::NormalBehaviorDb db;
    if (job.db && std::filesystem::exists(*job.db)) {
      db = detector::load_db(*job.db);
    }
    return detector::serialize_db(detector::train(events, std::move(db), job.epochs));
  }
  detector::NormalBehaviorDb db;
  if (job.action == Action::Run) {
    db = detector::load_db(*job.db);
  } else {
    const auto training =
        job.train_trace ? load_trace(*job.train_trace, job.container) : events;
    db = detector::train(training, {}, job.epochs);
    if (job.db) {
      detector::save_db(db, *job.db);
    }
  }
  const auto report = detector::detect(events, db, job.epochs);
  std::ostringstream out;
  out << "# engine=detector name=" << spec.name << " epoch_size=" << job.epochs.epoch_size
      << " window=" << detector::kWindowSize << '\n';
  out << "# anomalous_epochs=";
  const auto flagged = detector::emit_anomaly_signal(report);
  for (std::size_t i = 0; i < flagged.size(); ++i) {
    out << (i ? "," : "") << flagged[i];
  }
  out << '\n' << detector::report_to_csv(report);
  return std::move(out).str();
}

// --- policy -----------------------------------------------------------------

struct PolicyJob {
  std::vector<std::size_t> anomaly_epochs;
  std::vector<policy::HostDescriptor> hosts;
  policy::ContainerRecord record;
  policy::PolicyConfig config;
  std::uint64_t seed = 0;
};

std::vector<std::size_t> anomalies_from_report(const std::string& csv) {
  std::vector<std::size_t> epochs;
  bool header_seen = false;
  for (const auto& raw : text::split(csv, '\n')) {
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    if (!header_seen) {
      if (line != "epoch,windows,mismatches,anomalous") {
        throw SpecError("anomaly report has an unexpected header: '" + std::string(line) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto cells = text::split(line, ',');
    if (cells.size() != 4) {
      throw SpecError("malformed anomaly report row: '" + std::string(line) + "'");
    }
    try {
      if (text::parse_int(cells[3], "anomalous") != 0) {
        epochs.push_back(static_cast<std::size_t>(text::parse_u64(cells[0], "epoch")));
      }
    } catch (const std::invalid_argument& e) {
      throw SpecError(e.what());
    }
  }
  return epochs;
}

PolicyJob parse_policy(Params& p, bool read_files) {
  PolicyJob job;
  const auto report = p.get("anomalies");
  const auto epochs = p.get("epochs");
  if (report.has_value() == epochs.has_value()) {
    throw SpecError("exactly one of 'anomalies' (report CSV) or 'epochs' (list) is required");
  }
  if (epochs) {
    for (const auto& cell : text::split(*epochs, ',')) {
      if (text::trim(cell).empty()) {
        continue;
      }
      try {
        job.anomaly_epochs.push_back(static_cast<std::size_t>(text::parse_u64(cell, "epochs")));
      } catch (const std::invalid_argument& e) {
        throw SpecError(e.what());
      }
    }
  }
  const auto hosts_path = p.require("hosts");
  job.record.container_id = p.text("container", "app");
  const auto kind = p.text("kind", "stateful");
  if (kind == "stateful") {
    job.record.kind = policy::ContainerKind::Stateful;
  } else if (kind == "stateless") {
    job.record.kind = policy::ContainerKind::Stateless;
  } else {
    throw SpecError("unknown container kind '" + kind + "'");
  }
  const auto start_host = p.get("start_host");
  job.config.rollback_limit = positive_int(p, "rollback_limit", job.config.rollback_limit);
  const auto strategy = p.text("strategy", "max_logical_distance");
  if (strategy == "max_logical_distance") {
    job.config.destination_strategy = policy::DestinationStrategy::MaxLogicalDistance;
  } else if (strategy == "uniform_random") {
    job.config.destination_strategy = policy::DestinationStrategy::UniformRandom;
  } else {
    throw SpecError("unknown destination strategy '" + strategy + "'");
  }
  job.config.checkpoint_cost_ms = p.real("checkpoint_ms", job.config.checkpoint_cost_ms);
  job.config.restore_cost_ms = p.real("restore_ms", job.config.restore_cost_ms);
  job.config.migration_downtime_ms = p.real("migration_ms", job.config.migration_downtime_ms);
  job.config.restart_cost_ms = p.real("restart_ms", job.config.restart_cost_ms);
  job.config.memory_dump_mb = p.real("memory_dump_mb", job.config.memory_dump_mb);
  job.config.image_size_mb = p.real("image_size_mb", job.config.image_size_mb);
  try {
    policy::validate(job.config);
  } catch (const std::invalid_argument& e) {
    throw SpecError(e.what());
  }
  job.seed = p.u64("seed", 0);

  if (read_files) {
    if (report) {
      job.anomaly_epochs = anomalies_from_report(text::read_file(*report));
    }
    try {
      job.hosts = policy::parse_hosts(text::read_file(hosts_path));
    } catch (const std::invalid_argument& e) {
      throw SpecError(e.what());
    }
    if (job.hosts.empty()) {
      throw SpecError("host set '" + hosts_path + "' is empty");
    }
    job.record.current_host = start_host.value_or(job.hosts.front().host_id);
  }
  return job;
}

std::string render_policy(const ScenarioSpec& spec, PolicyJob job) {
  auto rng = random::make_engine(job.seed, 0);
  const auto final_record =
      policy::run_policy_session(job.anomaly_epochs, job.record, job.config, job.hosts, rng);
  std::ostringstream out;
  out << "# engine=policy name=" << spec.name << " kind=" << policy::to_string(job.record.kind)
      << " rollback_limit=" << job.config.rollback_limit
      << " strategy=" << policy::to_string(job.config.destination_strategy)
      << " seed=" << job.seed << '\n';
  out << "# costs_ms checkpoint=" << text::format_real(job.config.checkpoint_cost_ms)
      << " restore=" << text::format_real(job.config.restore_cost_ms)
      << " migration=" << text::format_real(job.config.migration_downtime_ms)
      << " restart=" << text::format_real(job.config.restart_cost_ms)
      << " memory_dump_mb=" << text::format_real(job.config.memory_dump_mb)
      << " image_size_mb=" << text::format_real(job.config.image_size_mb) << '\n';
  out << "# final_host=" << final_record.current_host
      << " total_downtime_ms=" << text::format_real(final_record.cumulative_downtime_ms) << '\n';
  out << policy::session_log_csv(final_record);
  return std::move(out).str();
}

// --- figure / trace ---------------------------------------------------------

TraceSpec parse_trace_spec(Params& p) {
  TraceSpec t;
  const auto alphabet = p.integer("alphabet", 20);
  const auto length = p.integer("length", 10000);
  if (alphabet < 1) {
    throw SpecError("alphabet must be >= 1");
  }
  if (length < 0) {
    throw SpecError("length must be >= 0");
  }
  t.alphabet_size = static_cast<std::size_t>(alphabet);
  t.length = static_cast<std::size_t>(length);
  t.seed = p.u64("seed", 0);
  const auto offset = p.get("inject_offset");
  const auto count = p.get("inject_count");
  if (offset.has_value() != count.has_value()) {
    throw SpecError("inject_offset and inject_count must be given together");
  }
  if (offset) {
    const auto o = p.integer("inject_offset");
    const auto c = p.integer("inject_count");
    if (o < 0 || c < 0) {
      throw SpecError("injection offset and count must be non-negative");
    }
    t.injection = Injection{static_cast<std::size_t>(o), static_cast<std::size_t>(c)};
  }
  return t;
}

struct Parsed {
  std::variant<AnalyticJob, mc::SimConfig, DetectorJob, PolicyJob, Figure, TraceSpec> job;
};

Parsed parse_spec(const ScenarioSpec& spec, bool read_files) {
  Params p(spec.params);
  Parsed parsed;
  switch (spec.engine) {
    case Engine::Analytic:
      parsed.job = parse_analytic(p);
      p.get("seed");
      break;
    case Engine::MonteCarlo:
      parsed.job = parse_montecarlo(p);
      break;
    case Engine::Detector:
      parsed.job = parse_detector(p);
      p.get("seed");
      break;
    case Engine::Policy:
      parsed.job = parse_policy(p, read_files);
      break;
    case Engine::Figure:
      parsed.job = parse_figure(p.require("which"));
      p.get("seed");
      break;
    case Engine::Trace:
      parsed.job = parse_trace_spec(p);
      break;
  }
  p.reject_unknown();
  return parsed;
}

}  // namespace

std::string to_string(Engine engine) {
  switch (engine) {
    case Engine::Analytic:
      return "analytic";
    case Engine::MonteCarlo:
      return "montecarlo";
    case Engine::Detector:
      return "detector";
    case Engine::Policy:
      return "policy";
    case Engine::Figure:
      return "figure";
    case Engine::Trace:
      return "trace";
  }
  return "?";
}

Engine parse_engine(std::string_view name) {
  for (const auto e : {Engine::Analytic, Engine::MonteCarlo, Engine::Detector, Engine::Policy,
                       Engine::Figure, Engine::Trace}) {
    if (to_string(e) == name) {
      return e;
    }
  }
  throw SpecError("unknown engine '" + std::string(name) + "'");
}

ScenarioSpec parse_config(std::string_view text) {
  ScenarioSpec spec;
  bool have_engine = false;
  std::string section = "scenario";
  std::size_t line_no = 0;
  for (const auto& raw : text::split(text, '\n')) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    const auto where = "config line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw SpecError(where + "malformed section header");
      }
      section = std::string(text::trim(line.substr(1, line.size() - 2)));
      if (section != "scenario" && section != "params") {
        throw SpecError(where + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw SpecError(where + "expected 'key = value'");
    }
    const std::string key(text::trim(line.substr(0, eq)));
    const std::string value(text::trim(line.substr(eq + 1)));
    if (key.empty()) {
      throw SpecError(where + "empty key");
    }
    if (section == "params") {
      if (!spec.params.emplace(key, value).second) {
        throw SpecError(where + "duplicate parameter '" + key + "'");
      }
    } else if (key == "name") {
      spec.name = value;
    } else if (key == "engine") {
      spec.engine = parse_engine(value);
      have_engine = true;
    } else if (key == "out") {
      spec.output = value;
    } else {
      throw SpecError(where + "unknown scenario key '" + key + "'");
    }
  }
  if (!have_engine) {
    throw SpecError("config does not name an engine");
  }
  return spec;
}

void validate(const ScenarioSpec& spec) { parse_spec(spec, false); }

std::string render(const ScenarioSpec& spec) {
  auto parsed = parse_spec(spec, true);
  return std::visit(
      [&](auto& job) -> std::string {
        using T = std::decay_t<decltype(job)>;
        if constexpr (std::is_same_v<T, AnalyticJob>) {
          return render_analytic(spec, job);
        } else if constexpr (std::is_same_v<T, mc::SimConfig>) {
          return render_montecarlo(spec, job);
        } else if constexpr (std::is_same_v<T, DetectorJob>) {
          return render_detector(spec, job);
        } else if constexpr (std::is_same_v<T, PolicyJob>) {
          return render_policy(spec, std::move(job));
        } else if constexpr (std::is_same_v<T, Figure>) {
          return run_figure(job);
        } else {
          try {
            return trace_text(generate_synthetic_trace(job));
          } catch (const std::out_of_range& e) {
            throw SpecError(e.what());
          }
        }
      },
      parsed.job);
}

ExitCode run_scenario(const ScenarioSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    const auto artifact = render(spec);
    if (spec.output.empty() || spec.output == "-") {
      out << artifact;
      out.flush();
    } else {
      text::write_file_atomic(spec.output, artifact);
    }
    return ExitCode::Ok;
  } catch (const analytic::DomainError& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::DomainError;
  } catch (const std::invalid_argument& e) {
    err << "error: invalid " << to_string(spec.engine) << " scenario: " << e.what() << '\n';
    return ExitCode::InvalidSpec;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::Failure;
  }
}

}  // namespace escape::scenario
