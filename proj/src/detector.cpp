#include "escape/detector.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "escape/text.hpp"

namespace escape::detector {

namespace {

constexpr std::string_view kDbHeader = "BOSCDB v1";
constexpr std::string_view kDbSeparator = "---";

// Calls `visit(epoch_index, first, last)` for consecutive epochs of `events`;
// the final epoch may be short.
template <class Visit>
void for_each_epoch(std::size_t n_events, std::size_t epoch_size, Visit&& visit) {
  for (std::size_t start = 0, epoch = 0; start < n_events; start += epoch_size, ++epoch) {
    visit(epoch, start, std::min(n_events, start + epoch_size));
  }
}

// Slides a window of kWindowSize over `indices` and calls `on_bag` for each
// window's bag.
template <class OnBag>
void for_each_window(const std::vector<std::size_t>& indices, std::size_t alphabet,
                     OnBag&& on_bag) {
  if (indices.size() < kWindowSize) {
    return;
  }
  std::vector<std::uint32_t> counts(alphabet + 1, 0);
  for (std::size_t i = 0; i < kWindowSize; ++i) {
    ++counts[indices[i]];
  }
  on_bag(Bosc(counts));
  for (std::size_t i = kWindowSize; i < indices.size(); ++i) {
    --counts[indices[i - kWindowSize]];
    ++counts[indices[i]];
    on_bag(Bosc(counts));
  }
}

[[noreturn]] void load_fail(std::size_t line, const std::string& what) {
  throw LoadError("database line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<SyscallEvent> parse_trace(std::string_view text) {
  std::vector<SyscallEvent> events;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    const auto raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    SyscallEvent ev;
    ev.sequence_number = events.size();
    const auto tab = raw.find('\t');
    if (tab != std::string_view::npos && !text::trim(raw.substr(0, tab)).empty()) {
      ev.container_id = std::string(text::trim(raw.substr(0, tab)));
      ev.syscall_name = std::string(text::trim(raw.substr(tab + 1)));
    } else {
      ev.syscall_name = std::string(line);
    }
    if (ev.syscall_name.empty()) {
      throw ParseError(line_no, "empty syscall name");
    }
    if (ev.syscall_name.find_first_of(" \t") != std::string::npos) {
      throw ParseError(line_no, "syscall name '" + ev.syscall_name +
                                    "' contains whitespace");
    }
    events.push_back(std::move(ev));
  }
  return events;
}

std::vector<SyscallEvent> filter_container(const std::vector<SyscallEvent>& events,
                                           std::string_view container_id) {
  std::vector<SyscallEvent> out;
  for (const auto& ev : events) {
    if (ev.container_id == container_id) {
      out.push_back(ev);
      out.back().sequence_number = out.size() - 1;
    }
  }
  return out;
}

std::size_t SyscallIndexMap::intern(std::string_view name) {
  const auto [it, inserted] =
      index_.try_emplace(std::string(name), names_.size() + 1);
  if (inserted) {
    names_.emplace_back(name);
  }
  return it->second;
}

std::size_t SyscallIndexMap::lookup(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  return it == index_.end() ? kUnknown : it->second;
}

Bosc::Bosc(std::vector<std::uint32_t> counts) : counts_(std::move(counts)) {
  while (!counts_.empty() && counts_.back() == 0) {
    counts_.pop_back();
  }
}

std::uint64_t Bosc::mass() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

void validate(const EpochConfig& config) {
  if (config.epoch_size < kWindowSize) {
    throw std::invalid_argument("epoch size " + std::to_string(config.epoch_size) +
                                " is smaller than the window size " +
                                std::to_string(kWindowSize));
  }
  if (config.threshold < 1) {
    throw std::invalid_argument("mismatch threshold must be positive");
  }
}

std::uint64_t NormalBehaviorDb::total_frequency() const {
  std::uint64_t sum = 0;
  for (const auto& [bag, freq] : entries) {
    sum += freq;
  }
  return sum;
}

NormalBehaviorDb train(const std::vector<SyscallEvent>& events,
                       NormalBehaviorDb db, const EpochConfig& config) {
  validate(config);
  std::vector<std::size_t> indices;
  for_each_epoch(events.size(), config.epoch_size,
                 [&](std::size_t, std::size_t first, std::size_t last) {
                   indices.clear();
                   for (std::size_t i = first; i < last; ++i) {
                     indices.push_back(db.index_map.intern(events[i].syscall_name));
                   }
                   for_each_window(indices, db.index_map.size(),
                                   [&](Bosc bag) { ++db.entries[std::move(bag)]; });
                 });
  ++db.training_traces;
  return db;
}

std::size_t DetectionReport::total_mismatches() const {
  std::size_t sum = 0;
  for (const auto& e : epochs) {
    sum += e.mismatch_count;
  }
  return sum;
}

DetectionReport detect(const std::vector<SyscallEvent>& events,
                       const NormalBehaviorDb& db, const EpochConfig& config) {
  validate(config);
  if (db.empty()) {
    throw EmptyDatabaseError();
  }
  DetectionReport report;
  report.threshold = config.threshold;
  std::vector<std::size_t> indices;
  for_each_epoch(events.size(), config.epoch_size,
                 [&](std::size_t epoch, std::size_t first, std::size_t last) {
                   indices.clear();
                   for (std::size_t i = first; i < last; ++i) {
                     indices.push_back(db.index_map.lookup(events[i].syscall_name));
                   }
                   EpochRecord rec;
                   rec.epoch_index = epoch;
                   for_each_window(indices, db.index_map.size(), [&](const Bosc& bag) {
                     ++rec.windows_evaluated;
                     if (!db.entries.contains(bag)) {
                       ++rec.mismatch_count;
                     }
                   });
                   rec.anomalous = rec.mismatch_count > config.threshold;
                   report.epochs.push_back(rec);
                 });
  return report;
}

std::vector<std::size_t> emit_anomaly_signal(const DetectionReport& report) {
  std::vector<std::size_t> flagged;
  for (const auto& e : report.epochs) {
    if (e.anomalous) {
      flagged.push_back(e.epoch_index);
    }
  }
  std::sort(flagged.begin(), flagged.end());
  return flagged;
}

// Layout:
//   BOSCDB v1
//   # entries=<n> training_traces=<m>
//   <syscall name for index 1>
//   ...
//   ---
//   <c0,c1,...,ck>:<frequency>
std::string serialize_db(const NormalBehaviorDb& db) {
  std::ostringstream out;
  out << kDbHeader << '\n';
  out << "# entries=" << db.entries.size()
      << " training_traces=" << db.training_traces << '\n';
  for (const auto& name : db.index_map.names()) {
    out << name << '\n';
  }
  out << kDbSeparator << '\n';
  for (const auto& [bag, freq] : db.entries) {
    const auto& c = bag.counts();
    for (std::size_t i = 0; i < c.size(); ++i) {
      out << (i ? "," : "") << c[i];
    }
    out << ':' << freq << '\n';
  }
  return std::move(out).str();
}

NormalBehaviorDb deserialize_db(std::string_view text) {
  if (text.empty() || text.back() != '\n') {
    throw LoadError("database is empty or truncated (missing final newline)");
  }
  const auto lines = text::split(text.substr(0, text.size() - 1), '\n');
  std::size_t i = 0;
  if (lines[i] != kDbHeader) {
    throw LoadError("unsupported database header '" + lines[i] + "' (expected '" +
                    std::string(kDbHeader) + "')");
  }
  ++i;
  if (i >= lines.size() || lines[i].rfind("# entries=", 0) != 0) {
    load_fail(i + 1, "missing metadata line");
  }
  std::uint64_t expected_entries = 0;
  NormalBehaviorDb db;
  {
    std::istringstream meta(lines[i].substr(2));
    std::string field;
    bool have_entries = false;
    bool have_traces = false;
    while (meta >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) {
        load_fail(i + 1, "malformed metadata field '" + field + "'");
      }
      const auto key = field.substr(0, eq);
      try {
        if (key == "entries") {
          expected_entries = text::parse_u64(field.substr(eq + 1), key);
          have_entries = true;
        } else if (key == "training_traces") {
          db.training_traces = text::parse_u64(field.substr(eq + 1), key);
          have_traces = true;
        } else {
          load_fail(i + 1, "unknown metadata field '" + key + "'");
        }
      } catch (const std::invalid_argument& e) {
        load_fail(i + 1, e.what());
      }
    }
    if (!have_entries || !have_traces) {
      load_fail(i + 1, "incomplete metadata line");
    }
  }
  ++i;
  for (; i < lines.size() && lines[i] != kDbSeparator; ++i) {
    const auto& name = lines[i];
    if (name.empty() || name.find_first_of(" \t\r") != std::string::npos) {
      load_fail(i + 1, "invalid syscall name '" + name + "'");
    }
    if (db.index_map.lookup(name) != SyscallIndexMap::kUnknown) {
      load_fail(i + 1, "duplicate syscall name '" + name + "'");
    }
    db.index_map.intern(name);
  }
  if (i >= lines.size()) {
    throw LoadError("database is truncated: separator line '---' not found");
  }
  ++i;
  for (; i < lines.size(); ++i) {
    const auto& line = lines[i];
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      load_fail(i + 1, "entry without ':frequency'");
    }
    std::vector<std::uint32_t> counts;
    std::uint64_t freq = 0;
    try {
      for (const auto& cell : text::split(std::string_view(line).substr(0, colon), ',')) {
        counts.push_back(static_cast<std::uint32_t>(text::parse_u64(cell, "count")));
      }
      freq = text::parse_u64(std::string_view(line).substr(colon + 1), "frequency");
    } catch (const std::invalid_argument& e) {
      load_fail(i + 1, e.what());
    }
    if (counts.size() > db.index_map.size() + 1) {
      load_fail(i + 1, "count vector longer than the syscall index");
    }
    if (counts.empty() || counts.back() == 0) {
      load_fail(i + 1, "count vector is not in canonical (trimmed) form");
    }
    if (counts[0] != 0) {
      load_fail(i + 1, "learned bag contains unknown syscalls");
    }
    Bosc bag(std::move(counts));
    if (bag.mass() != kWindowSize) {
      load_fail(i + 1, "bag mass " + std::to_string(bag.mass()) + " != window size " +
                           std::to_string(kWindowSize));
    }
    if (freq < 1) {
      load_fail(i + 1, "frequency must be positive");
    }
    if (!db.entries.emplace(std::move(bag), freq).second) {
      load_fail(i + 1, "duplicate bag");
    }
  }
  if (db.entries.size() != expected_entries) {
    throw LoadError("database is truncated: expected " + std::to_string(expected_entries) +
                    " entries, found " + std::to_string(db.entries.size()));
  }
  return db;
}

void save_db(const NormalBehaviorDb& db, const std::filesystem::path& path) {
  text::write_file_atomic(path, serialize_db(db));
}

NormalBehaviorDb load_db(const std::filesystem::path& path) {
  std::string contents;
  try {
    contents = text::read_file(path);
  } catch (const std::runtime_error& e) {
    throw LoadError(e.what());
  }
  return deserialize_db(contents);
}

std::string report_to_csv(const DetectionReport& report) {
  std::ostringstream out;
  out << "# threshold=" << report.threshold << '\n';
  out << "epoch,windows,mismatches,anomalous\n";
  for (const auto& e : report.epochs) {
    out << e.epoch_index << ',' << e.windows_evaluated << ',' << e.mismatch_count
        << ',' << (e.anomalous ? 1 : 0) << '\n';
  }
  return std::move(out).str();
}

}  // namespace escape::detector
