#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Scenario runner that wires the engines to CSV artifacts.
namespace escape::scenario {

/// Invalid scenario description: unknown engine, missing or unknown keys,
/// malformed values.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Engine { Analytic, MonteCarlo, Detector, Policy, Figure, Trace };

std::string to_string(Engine engine);
Engine parse_engine(std::string_view name);

struct ScenarioSpec {
  std::string name = "scenario";
  Engine engine = Engine::Analytic;
  std::map<std::string, std::string> params;
  std::filesystem::path output;  // empty: write to the provided stream
};

/// Parses the "key = value" config format. Keys before any section header, or
/// under [scenario], describe the scenario (name, engine, out); keys under
/// [params] are engine parameters. '#' starts a comment line.
ScenarioSpec parse_config(std::string_view text);

/// Rejects unknown keys and reports missing required ones.
void validate(const ScenarioSpec& spec);

/// Runs the scenario and returns the artifact text (the detector "train"
/// action returns the serialised database). Throws on any error.
std::string render(const ScenarioSpec& spec);

enum class ExitCode : int { Ok = 0, Failure = 1, InvalidSpec = 2, DomainError = 3 };

/// Validates, renders and writes the artifact to spec.output (atomically) or
/// to `out` when no output path is set. Diagnostics go to `err`. On failure
/// no output file is created.
ExitCode run_scenario(const ScenarioSpec& spec, std::ostream& out, std::ostream& err);

enum class Figure { Fig5, Fig6, Fig8, Fig9 };

Figure parse_figure(std::string_view name);
std::string to_string(Figure figure);

/// Plot-ready CSV for one of the survival figures, with the parameter grids
/// written as '#' comment lines above the header.
std::string run_figure(Figure figure);

struct Injection {
  std::size_t offset = 0;
  std::size_t count = 0;
};

struct TraceSpec {
  std::size_t alphabet_size = 20;
  std::size_t length = 10000;
  std::uint64_t seed = 0;
  std::optional<Injection> injection;
};

/// Repeating-pattern syscall trace over `alphabet_size` names. An injection
/// replaces [offset, offset + count) with distinct names outside the alphabet.
std::vector<std::string> generate_synthetic_trace(const TraceSpec& spec);

/// One name per line.
std::string trace_text(const std::vector<std::string>& calls);

/// Names used for the first alphabet entries; later ones are "sys_<i>".
std::string alphabet_name(std::size_t index);

}  // namespace escape::scenario
