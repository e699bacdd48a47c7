#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "escape/random.hpp"

// Graded response policy: rollback (checkpoint/restore) first, live migration
// once an attack proves persistent. Costs are simulated, not measured.
namespace escape::policy {

class NoCandidateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidTransition : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct HostDescriptor {
  std::string host_id;
  std::string config_class;
  std::string network_zone;
  std::string datacenter;

  friend bool operator==(const HostDescriptor&, const HostDescriptor&) = default;
};

/// Parses the host set file: one "host_id,config_class,network_zone,datacenter"
/// per line, '#' comments and blank lines ignored. Host ids must be unique.
std::vector<HostDescriptor> parse_hosts(std::string_view text);

enum class ContainerKind { Stateless, Stateful };
enum class ContainerState { Running, RollingBack, Migrating, Restarting, Failed };

struct Rollback {};
struct Migrate {
  std::string destination;
};
struct Restart {};
struct NoOp {};

using Action = std::variant<Rollback, Migrate, Restart, NoOp>;

std::string action_name(const Action& a);

struct ActionRecord {
  std::int64_t tick = 0;
  std::string action;
  std::string source_host;
  std::string dest_host;  // empty unless the container moved
  int rollback_count = 0;  // after the action
  double downtime_ms = 0.0;

  friend bool operator==(const ActionRecord&, const ActionRecord&) = default;
};

struct ContainerRecord {
  std::string container_id;
  ContainerKind kind = ContainerKind::Stateful;
  ContainerState state = ContainerState::Running;
  std::string current_host;
  int rollback_count = 0;
  double cumulative_downtime_ms = 0.0;
  // Stateless escalation: set after a restart, cleared by a migration.
  bool restarted_on_current_host = false;
  std::vector<ActionRecord> event_log;

  friend bool operator==(const ContainerRecord&, const ContainerRecord&) = default;
};

enum class DestinationStrategy { UniformRandom, MaxLogicalDistance };

struct PolicyConfig {
  int rollback_limit = 3;
  DestinationStrategy destination_strategy = DestinationStrategy::MaxLogicalDistance;
  double checkpoint_cost_ms = 40.0;
  double restore_cost_ms = 60.0;
  double migration_downtime_ms = 5.0;
  double restart_cost_ms = 250.0;
  double memory_dump_mb = 10.0;
  double image_size_mb = 500.0;
};

void validate(const PolicyConfig& policy);

/// Number of differing attributes among config class, network zone and
/// datacenter.
int logical_distance(const HostDescriptor& a, const HostDescriptor& b);

std::string select_destination(const HostDescriptor& current,
                               const std::vector<HostDescriptor>& hosts,
                               DestinationStrategy strategy, random::Engine& rng);

Action on_anomaly(const ContainerRecord& record, const PolicyConfig& policy,
                  const std::vector<HostDescriptor>& hosts, random::Engine& rng);

ContainerRecord apply_action(ContainerRecord record, const Action& action,
                             const PolicyConfig& policy, std::int64_t tick);

/// One on_anomaly/apply_action round per anomalous epoch, in order. The epoch
/// index is used as the tick.
ContainerRecord run_policy_session(const std::vector<std::size_t>& anomaly_epochs,
                                   ContainerRecord record, const PolicyConfig& policy,
                                   const std::vector<HostDescriptor>& hosts,
                                   random::Engine& rng);

/// "tick,container_id,action,source_host,dest_host,rollback_count,downtime_ms"
std::string session_log_csv(const ContainerRecord& record);

std::string to_string(ContainerKind kind);
std::string to_string(DestinationStrategy strategy);

}  // namespace escape::policy
