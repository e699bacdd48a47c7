#include "escape/mtd_policy.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "doctest.h"

using namespace escape;
using namespace escape::policy;

namespace {

std::vector<HostDescriptor> cluster() {
  return parse_hosts(
      "# id,config,zone,dc\n"
      "h0,std,z1,dc1\n"
      "h1,std,z1,dc2\n"
      "h2,gpu,z2,dc1\n"
      "h3,gpu,z2,dc3\n"
      "h4,std,z1,dc1\n");
}

ContainerRecord container(ContainerKind kind, const std::string& host = "h0") {
  ContainerRecord r;
  r.container_id = "web";
  r.kind = kind;
  r.current_host = host;
  return r;
}

std::vector<std::string> actions_of(const ContainerRecord& r) {
  std::vector<std::string> out;
  for (const auto& e : r.event_log) {
    out.push_back(e.action);
  }
  return out;
}

}  // namespace

TEST_CASE("parse_hosts") {
  const auto hosts = cluster();
  REQUIRE(hosts.size() == 5);
  CHECK(hosts[2] == HostDescriptor{"h2", "gpu", "z2", "dc1"});
  CHECK_THROWS_AS(parse_hosts("a,b,c\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_hosts("a,b,c,d\na,x,y,z\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_hosts("a,,c,d\n"), std::invalid_argument);
}

TEST_CASE("logical_distance") {
  const HostDescriptor a{"a", "std", "z1", "dc1"};
  CHECK(logical_distance(a, a) == 0);
  CHECK(logical_distance(a, {"b", "std", "z1", "dc1"}) == 0);
  CHECK(logical_distance(a, {"b", "std", "z1", "dc9"}) == 1);
  CHECK(logical_distance(a, {"b", "gpu", "z2", "dc2"}) == 3);
  const auto hosts = cluster();
  for (const auto& x : hosts) {
    for (const auto& y : hosts) {
      REQUIRE(logical_distance(x, y) == logical_distance(y, x));
      REQUIRE(logical_distance(x, y) >= 0);
      REQUIRE(logical_distance(x, y) <= 3);
    }
  }
}

TEST_CASE("select_destination") {
  random::Engine rng(1);
  const HostDescriptor cur{"h0", "std", "z1", "dc1"};

  SUBCASE("two hosts") {
    const std::vector<HostDescriptor> two{cur, {"h9", "std", "z1", "dc1"}};
    CHECK(select_destination(cur, two, DestinationStrategy::MaxLogicalDistance, rng) == "h9");
    CHECK(select_destination(cur, two, DestinationStrategy::UniformRandom, rng) == "h9");
  }
  SUBCASE("max distance with lexicographic tie-break") {
    const std::vector<HostDescriptor> hosts{
        cur,
        {"h2", "std", "z1", "dc2"},  // distance 1
        {"h1", "gpu", "z2", "dc2"},  // distance 3
        {"h3", "gpu", "z3", "dc3"},  // distance 3
    };
    CHECK(select_destination(cur, hosts, DestinationStrategy::MaxLogicalDistance, rng) == "h1");
  }
  SUBCASE("no candidate") {
    const std::vector<HostDescriptor> alone{cur};
    CHECK_THROWS_AS(select_destination(cur, alone, DestinationStrategy::MaxLogicalDistance, rng),
                    NoCandidateError);
    CHECK_THROWS_AS(select_destination(cur, alone, DestinationStrategy::UniformRandom, rng),
                    NoCandidateError);
  }
  SUBCASE("uniform strategy covers every other host and is seed-deterministic") {
    const auto hosts = cluster();
    std::map<std::string, int> hits;
    random::Engine a(42);
    random::Engine b(42);
    for (int i = 0; i < 4000; ++i) {
      const auto pick = select_destination(hosts[0], hosts, DestinationStrategy::UniformRandom, a);
      REQUIRE(pick == select_destination(hosts[0], hosts, DestinationStrategy::UniformRandom, b));
      REQUIRE(pick != "h0");
      ++hits[pick];
    }
    CHECK(hits.size() == 4);
    for (const auto& [id, n] : hits) {
      CHECK(n > 850);
      CHECK(n < 1150);
    }
  }
}

TEST_CASE("on_anomaly") {
  const auto hosts = cluster();
  const PolicyConfig cfg;
  random::Engine rng(3);

  CHECK(std::holds_alternative<Rollback>(on_anomaly(container(ContainerKind::Stateful), cfg, hosts, rng)));
  CHECK(std::holds_alternative<Restart>(on_anomaly(container(ContainerKind::Stateless), cfg, hosts, rng)));

  auto exhausted = container(ContainerKind::Stateful);
  exhausted.rollback_count = cfg.rollback_limit;
  const auto a = on_anomaly(exhausted, cfg, hosts, rng);
  REQUIRE(std::holds_alternative<Migrate>(a));
  CHECK(std::get<Migrate>(a).destination == "h3");  // only host at distance 3 from h0

  auto restarted = container(ContainerKind::Stateless);
  restarted.restarted_on_current_host = true;
  CHECK(std::holds_alternative<Migrate>(on_anomaly(restarted, cfg, hosts, rng)));

  auto failed = container(ContainerKind::Stateful);
  failed.state = ContainerState::Failed;
  CHECK_THROWS_AS(on_anomaly(failed, cfg, hosts, rng), InvalidTransition);

  const std::vector<HostDescriptor> alone{hosts[0]};
  CHECK_THROWS_AS(on_anomaly(exhausted, cfg, alone, rng), NoCandidateError);
}

TEST_CASE("apply_action") {
  PolicyConfig cfg;
  cfg.checkpoint_cost_ms = 40.0;
  cfg.restore_cost_ms = 60.0;
  cfg.migration_downtime_ms = 7.5;
  cfg.restart_cost_ms = 300.0;

  SUBCASE("rollback") {
    const auto r = apply_action(container(ContainerKind::Stateful), Rollback{}, cfg, 4);
    CHECK(r.cumulative_downtime_ms == 100.0);
    CHECK(r.rollback_count == 1);
    CHECK(r.state == ContainerState::Running);
    REQUIRE(r.event_log.size() == 1);
    CHECK(r.event_log[0] == ActionRecord{4, "rollback", "h0", "", 1, 100.0});
  }
  SUBCASE("migrate resets the rollback counter") {
    auto r = container(ContainerKind::Stateful);
    r.rollback_count = 3;
    r = apply_action(r, Migrate{"h3"}, cfg, 9);
    CHECK(r.current_host == "h3");
    CHECK(r.rollback_count == 0);
    CHECK(r.cumulative_downtime_ms == 7.5);
    CHECK(r.event_log.back() == ActionRecord{9, "migrate", "h0", "h3", 0, 7.5});
  }
  SUBCASE("restart") {
    const auto r = apply_action(container(ContainerKind::Stateless), Restart{}, cfg, 0);
    CHECK(r.cumulative_downtime_ms == 300.0);
    CHECK(r.restarted_on_current_host);
  }
  SUBCASE("noop only logs") {
    const auto before = container(ContainerKind::Stateful);
    auto after = apply_action(before, NoOp{}, cfg, 2);
    REQUIRE(after.event_log.size() == 1);
    CHECK(after.event_log[0].action == "noop");
    after.event_log.clear();
    CHECK(after == before);
  }
  SUBCASE("invalid transitions") {
    auto failed = container(ContainerKind::Stateful);
    failed.state = ContainerState::Failed;
    CHECK_THROWS_AS(apply_action(failed, Rollback{}, cfg, 0), InvalidTransition);
    CHECK_THROWS_AS(apply_action(failed, NoOp{}, cfg, 0), InvalidTransition);
    CHECK_THROWS_AS(apply_action(container(ContainerKind::Stateful), Migrate{"h0"}, cfg, 0),
                    InvalidTransition);
    CHECK_THROWS_AS(apply_action(container(ContainerKind::Stateless), Rollback{}, cfg, 0),
                    InvalidTransition);
    auto at_limit = container(ContainerKind::Stateful);
    at_limit.rollback_count = cfg.rollback_limit;
    CHECK_THROWS_AS(apply_action(at_limit, Rollback{}, cfg, 0), InvalidTransition);
  }
}

TEST_CASE("run_policy_session") {
  const auto hosts = cluster();
  PolicyConfig cfg;
  cfg.rollback_limit = 3;

  SUBCASE("no anomalies") {
    random::Engine rng(1);
    const auto start = container(ContainerKind::Stateful);
    CHECK(run_policy_session({}, start, cfg, hosts, rng) == start);
  }
  SUBCASE("five anomalies, stateful, limit 3") {
    random::Engine rng(1);
    const auto r = run_policy_session({1, 2, 3, 4, 5}, container(ContainerKind::Stateful), cfg,
                                      hosts, rng);
    CHECK(actions_of(r) ==
          std::vector<std::string>{"rollback", "rollback", "rollback", "migrate", "rollback"});
    CHECK(r.current_host == "h3");
    CHECK(r.rollback_count == 1);
    CHECK(r.event_log[3].tick == 4);
  }
  SUBCASE("single anomaly, stateless") {
    random::Engine rng(1);
    const auto r = run_policy_session({0}, container(ContainerKind::Stateless), cfg, hosts, rng);
    CHECK(actions_of(r) == std::vector<std::string>{"restart"});
  }
  SUBCASE("stateless escalates on recurrence at the same host") {
    random::Engine rng(1);
    const auto r =
        run_policy_session({0, 1, 2, 3}, container(ContainerKind::Stateless), cfg, hosts, rng);
    CHECK(actions_of(r) ==
          std::vector<std::string>{"restart", "migrate", "restart", "migrate"});
  }
  SUBCASE("persistent stream: bounded rollbacks, periodic migration, exact downtime") {
    for (const auto strategy :
         {DestinationStrategy::MaxLogicalDistance, DestinationStrategy::UniformRandom}) {
      cfg.destination_strategy = strategy;
      for (int limit = 1; limit <= 5; ++limit) {
        cfg.rollback_limit = limit;
        std::vector<std::size_t> epochs(50);
        std::iota(epochs.begin(), epochs.end(), std::size_t{0});
        random::Engine rng(limit);
        const auto r =
            run_policy_session(epochs, container(ContainerKind::Stateful), cfg, hosts, rng);
        int since_migration = 0;
        double downtime = 0.0;
        std::string host = "h0";
        for (std::size_t i = 0; i < r.event_log.size(); ++i) {
          const auto& e = r.event_log[i];
          downtime += e.downtime_ms;
          REQUIRE(e.source_host == host);
          if (e.action == "migrate") {
            REQUIRE(since_migration == limit);
            REQUIRE(e.dest_host != e.source_host);
            if (strategy == DestinationStrategy::MaxLogicalDistance) {
              const auto& src = *std::find_if(hosts.begin(), hosts.end(),
                                              [&](const auto& h) { return h.host_id == host; });
              const auto& dst = *std::find_if(hosts.begin(), hosts.end(), [&](const auto& h) {
                return h.host_id == e.dest_host;
              });
              for (const auto& other : hosts) {
                if (other.host_id != host) {
                  REQUIRE(logical_distance(src, dst) >= logical_distance(src, other));
                }
              }
            }
            host = e.dest_host;
            since_migration = 0;
          } else {
            REQUIRE(e.action == "rollback");
            ++since_migration;
            REQUIRE(since_migration <= limit);
          }
        }
        CHECK(r.cumulative_downtime_ms == downtime);
        random::Engine replay(limit);
        CHECK(run_policy_session(epochs, container(ContainerKind::Stateful), cfg, hosts, replay) ==
              r);
      }
    }
  }
}

TEST_CASE("session_log_csv") {
  const auto hosts = cluster();
  random::Engine rng(1);
  const auto r =
      run_policy_session({2, 7}, container(ContainerKind::Stateless), PolicyConfig{}, hosts, rng);
  CHECK(session_log_csv(r) ==
        "tick,container_id,action,source_host,dest_host,rollback_count,downtime_ms\n"
        "2,web,restart,h0,,0,250\n"
        "7,web,migrate,h0,h3,0,5\n");
}
