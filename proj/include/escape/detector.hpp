#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

// Bag-of-system-calls (BoSC) behaviour learning and anomaly detection.
namespace escape::detector {

inline constexpr std::size_t kWindowSize = 10;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyDatabaseError : public std::logic_error {
 public:
  EmptyDatabaseError()
      : std::logic_error("normal-behavior database has no entries") {}
};

class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SyscallEvent {
  std::uint64_t sequence_number = 0;
  std::string syscall_name;
  std::string container_id;  // empty for single-column traces

  friend bool operator==(const SyscallEvent&, const SyscallEvent&) = default;
};

/// Parses a trace: one syscall per line, optionally "container<TAB>syscall".
/// Blank lines and '#' comments are skipped; tokens are trimmed.
std::vector<SyscallEvent> parse_trace(std::string_view text);

/// Keeps only events from `container_id` and renumbers them from 0.
std::vector<SyscallEvent> filter_container(const std::vector<SyscallEvent>& events,
                                           std::string_view container_id);

/// Insertion-ordered dense mapping from syscall name to index. Index 0 is
/// reserved for syscalls not seen during training.
class SyscallIndexMap {
 public:
  static constexpr std::size_t kUnknown = 0;

  /// Index of `name`, appending it if new.
  std::size_t intern(std::string_view name);
  /// Index of `name`, or kUnknown.
  std::size_t lookup(std::string_view name) const;

  /// Number of known syscalls (indices 1..size()).
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  friend bool operator==(const SyscallIndexMap& a, const SyscallIndexMap& b) {
    return a.names_ == b.names_;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Counts per syscall index over one window. Kept in canonical form: no
/// trailing zero entries.
class Bosc {
 public:
  Bosc() = default;
  explicit Bosc(std::vector<std::uint32_t> counts);

  const std::vector<std::uint32_t>& counts() const { return counts_; }
  std::uint64_t mass() const;

  auto operator<=>(const Bosc&) const = default;

 private:
  std::vector<std::uint32_t> counts_;
};

struct EpochConfig {
  std::size_t epoch_size = 1000;
  std::size_t threshold = 10;  // anomalous iff mismatches > threshold
};

void validate(const EpochConfig& config);

struct NormalBehaviorDb {
  std::map<Bosc, std::uint64_t> entries;
  SyscallIndexMap index_map;
  std::uint64_t training_traces = 0;

  bool empty() const { return entries.empty(); }
  std::uint64_t total_frequency() const;

  friend bool operator==(const NormalBehaviorDb&, const NormalBehaviorDb&) = default;
};

/// Adds every window of `events` to `db` (epoch by epoch, stride one syscall,
/// windows never crossing an epoch boundary) and returns the updated copy.
NormalBehaviorDb train(const std::vector<SyscallEvent>& events,
                       NormalBehaviorDb db, const EpochConfig& config = {});

struct EpochRecord {
  std::size_t epoch_index = 0;
  std::size_t windows_evaluated = 0;
  std::size_t mismatch_count = 0;
  bool anomalous = false;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct DetectionReport {
  std::vector<EpochRecord> epochs;
  std::size_t threshold = 0;

  std::size_t total_mismatches() const;
  friend bool operator==(const DetectionReport&, const DetectionReport&) = default;
};

/// Counts windows whose bag is absent from `db`, per epoch. Does not modify db.
/// Throws EmptyDatabaseError if db has no entries.
DetectionReport detect(const std::vector<SyscallEvent>& events,
                       const NormalBehaviorDb& db, const EpochConfig& config = {});

/// Indices of anomalous epochs, ascending.
std::vector<std::size_t> emit_anomaly_signal(const DetectionReport& report);

/// Serialises in the "BOSCDB v1" text format.
std::string serialize_db(const NormalBehaviorDb& db);
/// Throws LoadError on any version or payload problem; never returns a
/// partially populated database.
NormalBehaviorDb deserialize_db(std::string_view text);

void save_db(const NormalBehaviorDb& db, const std::filesystem::path& path);
NormalBehaviorDb load_db(const std::filesystem::path& path);

/// CSV rendering: "epoch,windows,mismatches,anomalous".
std::string report_to_csv(const DetectionReport& report);

}  // namespace escape::detector
