#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pmguard/adversary.hpp"
#include "pmguard/pm_code.hpp"

namespace pmguard {

/// One step of a scenario. Empty `nodes` and target 0 mean "draw at random".
struct Event {
  enum class Kind { Repair, Reconstruct };
  Kind kind = Kind::Reconstruct;
  NodeId target = 0;           // failed node for repairs
  std::vector<NodeId> nodes;   // helpers (repair) or contacted nodes (reconstruct)

  friend bool operator==(const Event&, const Event&) = default;
};

/// "repair:2:1,3,4,5,6; reconstruct:1,2,3,4". '*' stands for random, so
/// "repair:*:*" and "reconstruct:*" are valid.
std::vector<Event> parse_events(std::string_view text);
std::string format_events(std::span<const Event> events);

struct ScenarioConfig {
  SystemParams params;
  Strategy strategy = Strategy::RandomError;
  std::optional<std::set<NodeId>> controlled;  // nullopt: b nodes placed at random per trial
  std::vector<Event> events;
  std::set<SymbolId> spared;                   // symbols the adversary leaves alone
  bool fresh_per_message = false;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Compromised {3}, repair node 2 via {1,3,4,5,6}, then reconstruct from
/// {1,2,3,4}. Needs k = 4, d = 5, n >= 6 and b >= 1.
ScenarioConfig pinned_config(const SystemParams& params, Strategy strategy);

/// Line-oriented key=value text; '#' starts a comment. Keys: params, strategy,
/// controlled (ids or "random"), events, spare (e.g. "3:4,1:2"), fresh,
/// trials, seed, threads, paper_mode. Throws MalformedInput / InvalidParams.
ScenarioConfig parse_config(std::string_view text);
std::string format_config(const ScenarioConfig& config);

/// Throws InvalidArgument when an event refers to impossible node choices.
void validate(const ScenarioConfig& config);

struct EventOutcome {
  Event::Kind kind = Event::Kind::Reconstruct;
  NodeId target = 0;
  std::vector<NodeId> contacted;
  std::set<NodeId> detected;
  std::set<NodeId> truth;     // compromised nodes among the contacted ones
  bool completed = false;     // protocol returned a result
  bool exact = false;         // result equals the ground truth
  bool undetected = false;    // completed with a wrong result
  bool inconclusive = false;  // aborted
  std::string error;          // error code name when aborted
  std::size_t pair_cells = 0;  // hash checks pairing one tampered and one honest symbol
  std::size_t pair_flips = 0;  // ... of which still matched
};

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::set<NodeId> controlled;
  std::vector<EventOutcome> events;

  std::set<NodeId> detected;  // union over events
  std::set<NodeId> truth;     // union over events
  bool exact_repair = true;   // every completed repair was exact
  bool exact_file = true;     // every completed reconstruction was exact
  bool undetected = false;    // some event completed with a wrong result
  bool inconclusive = false;  // some event aborted
  bool false_accusation = false;
  std::size_t pair_cells = 0;
  std::size_t pair_flips = 0;

  friend bool operator==(const TrialResult& a, const TrialResult& b);
};

bool operator==(const EventOutcome& a, const EventOutcome& b);

/// Runs the event script once with everything drawn from `seed`.
TrialResult run_trial(const ScenarioConfig& config, std::size_t trial_index, std::uint64_t seed);

struct CampaignStats {
  std::size_t trials = 0;
  std::size_t trials_with_truth = 0;
  double detection_rate = 0;       // among trials where a compromised node was contacted
  std::size_t undetected = 0;
  double undetected_rate = 0;
  double ci_low = 0;               // Wilson interval, z = 3
  double ci_high = 0;
  double reference = 0;            // 1/q
  double bound_3sigma = 0;         // 1/q + 3 sqrt((1/q)(1-1/q)/N)
  double inconclusive_rate = 0;
  std::size_t false_accusations = 0;
  std::size_t pair_cells = 0;
  double pair_flip_rate = 0;
};

struct Campaign {
  std::vector<TrialResult> results;
  CampaignStats stats;
};

/// Trial i uses derive_seed(config.seed, i). Threads only change wall time.
Campaign run_campaign(const ScenarioConfig& config);
CampaignStats summarize(std::span<const TrialResult> results, std::uint64_t q);

/// z-score Wilson interval for a binomial proportion.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n, double z);

void write_campaign_csv(std::ostream& out, std::span<const TrialResult> results);
void write_summary(std::ostream& out, const ScenarioConfig& config, const CampaignStats& stats);

}  // namespace pmguard
