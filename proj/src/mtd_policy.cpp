#include "escape/mtd_policy.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "escape/text.hpp"

namespace escape::policy {

namespace {

const HostDescriptor& find_host(const std::vector<HostDescriptor>& hosts,
                                std::string_view id) {
  const auto it = std::find_if(hosts.begin(), hosts.end(),
                               [&](const HostDescriptor& h) { return h.host_id == id; });
  if (it == hosts.end()) {
    throw std::invalid_argument("host '" + std::string(id) + "' is not in the host set");
  }
  return *it;
}

}  // namespace

std::vector<HostDescriptor> parse_hosts(std::string_view text) {
  std::vector<HostDescriptor> hosts;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(text, '\n')) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    auto fields = text::split(line, ',');
    if (fields.size() != 4) {
      throw std::invalid_argument("host file line " + std::to_string(line_no) +
                                  ": expected 4 comma-separated fields");
    }
    for (auto& f : fields) {
      f = std::string(text::trim(f));
      if (f.empty()) {
        throw std::invalid_argument("host file line " + std::to_string(line_no) +
                                    ": empty field");
      }
    }
    if (!seen.insert(fields[0]).second) {
      throw std::invalid_argument("host file line " + std::to_string(line_no) +
                                  ": duplicate host id '" + fields[0] + "'");
    }
    hosts.push_back({fields[0], fields[1], fields[2], fields[3]});
  }
  return hosts;
}

std::string action_name(const Action& a) {
  switch (a.index()) {
    case 0:
      return "rollback";
    case 1:
      return "migrate";
    case 2:
      return "restart";
    default:
      return "noop";
  }
}

void validate(const PolicyConfig& policy) {
  if (policy.rollback_limit < 1) {
    throw std::invalid_argument("rollback_limit must be >= 1");
  }
  for (const double cost : {policy.checkpoint_cost_ms, policy.restore_cost_ms,
                            policy.migration_downtime_ms, policy.restart_cost_ms,
                            policy.memory_dump_mb, policy.image_size_mb}) {
    if (!(cost >= 0.0)) {
      throw std::invalid_argument("policy costs and sizes must be non-negative");
    }
  }
}

int logical_distance(const HostDescriptor& a, const HostDescriptor& b) {
  return (a.config_class != b.config_class) + (a.network_zone != b.network_zone) +
         (a.datacenter != b.datacenter);
}

std::string select_destination(const HostDescriptor& current,
                               const std::vector<HostDescriptor>& hosts,
                               DestinationStrategy strategy, random::Engine& rng) {
  std::vector<const HostDescriptor*> candidates;
  for (const auto& h : hosts) {
    if (h.host_id != current.host_id) {
      candidates.push_back(&h);
    }
  }
  if (candidates.empty()) {
    throw NoCandidateError("no migration destination other than host '" +
                           current.host_id + "'");
  }
  if (strategy == DestinationStrategy::UniformRandom) {
    return candidates[random::uniform_index(rng, candidates.size())]->host_id;
  }
  const auto* best = candidates.front();
  int best_distance = logical_distance(current, *best);
  for (const auto* h : candidates) {
    const int d = logical_distance(current, *h);
    if (d > best_distance || (d == best_distance && h->host_id < best->host_id)) {
      best = h;
      best_distance = d;
    }
  }
  return best->host_id;
}

Action on_anomaly(const ContainerRecord& record, const PolicyConfig& policy,
                  const std::vector<HostDescriptor>& hosts, random::Engine& rng) {
  if (record.state != ContainerState::Running) {
    throw InvalidTransition("container '" + record.container_id +
                            "' is not running; cannot respond to an anomaly");
  }
  const bool escalate = record.kind == ContainerKind::Stateful
                            ? record.rollback_count >= policy.rollback_limit
                            : record.restarted_on_current_host;
  if (!escalate) {
    return record.kind == ContainerKind::Stateful ? Action{Rollback{}} : Action{Restart{}};
  }
  const auto& current = find_host(hosts, record.current_host);
  return Migrate{select_destination(current, hosts, policy.destination_strategy, rng)};
}

ContainerRecord apply_action(ContainerRecord record, const Action& action,
                             const PolicyConfig& policy, std::int64_t tick) {
  if (record.state != ContainerState::Running) {
    throw InvalidTransition("container '" + record.container_id +
                            "' cannot take action '" + action_name(action) +
                            "' while not running");
  }
  ActionRecord entry;
  entry.tick = tick;
  entry.action = action_name(action);
  entry.source_host = record.current_host;

  if (std::holds_alternative<Rollback>(action)) {
    if (record.kind != ContainerKind::Stateful) {
      throw InvalidTransition("rollback requires a stateful container");
    }
    if (record.rollback_count >= policy.rollback_limit) {
      throw InvalidTransition("rollback limit of " + std::to_string(policy.rollback_limit) +
                              " already reached; migration required");
    }
    record.state = ContainerState::RollingBack;
    entry.downtime_ms = policy.checkpoint_cost_ms + policy.restore_cost_ms;
    ++record.rollback_count;
  } else if (const auto* m = std::get_if<Migrate>(&action)) {
    if (m->destination.empty() || m->destination == record.current_host) {
      throw InvalidTransition("migration destination must differ from the current host");
    }
    record.state = ContainerState::Migrating;
    entry.downtime_ms = policy.migration_downtime_ms;
    entry.dest_host = m->destination;
    record.current_host = m->destination;
    record.rollback_count = 0;
    record.restarted_on_current_host = false;
  } else if (std::holds_alternative<Restart>(action)) {
    record.state = ContainerState::Restarting;
    entry.downtime_ms = policy.restart_cost_ms;
    record.restarted_on_current_host = true;
  }
  record.cumulative_downtime_ms += entry.downtime_ms;
  entry.rollback_count = record.rollback_count;
  record.event_log.push_back(std::move(entry));
  record.state = ContainerState::Running;
  return record;
}

ContainerRecord run_policy_session(const std::vector<std::size_t>& anomaly_epochs,
                                   ContainerRecord record, const PolicyConfig& policy,
                                   const std::vector<HostDescriptor>& hosts,
                                   random::Engine& rng) {
  validate(policy);
  for (const auto epoch : anomaly_epochs) {
    const auto action = on_anomaly(record, policy, hosts, rng);
    record = apply_action(std::move(record), action, policy,
                          static_cast<std::int64_t>(epoch));
  }
  return record;
}

std::string session_log_csv(const ContainerRecord& record) {
  std::ostringstream out;
  out << "tick,container_id,action,source_host,dest_host,rollback_count,downtime_ms\n";
  for (const auto& e : record.event_log) {
    out << e.tick << ',' << record.container_id << ',' << e.action << ','
        << e.source_host << ',' << e.dest_host << ',' << e.rollback_count << ','
        << text::format_csv(e.downtime_ms) << '\n';
  }
  return std::move(out).str();
}

std::string to_string(ContainerKind kind) {
  return kind == ContainerKind::Stateful ? "stateful" : "stateless";
}

std::string to_string(DestinationStrategy strategy) {
  return strategy == DestinationStrategy::UniformRandom ? "uniform_random"
                                                        : "max_logical_distance";
}

}  // namespace escape::policy
