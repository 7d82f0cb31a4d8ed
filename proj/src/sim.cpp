#include "pmguard/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "pmguard/error.hpp"
#include "pmguard/hashing.hpp"
#include "pmguard/random.hpp"
#include "pmguard/secure_protocol.hpp"

namespace pmguard {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedInput, what); }

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) {
      return out;
    }
    start = pos + 1;
  }
}

std::uint64_t parse_uint(const std::string& text, const std::string& what) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    malformed(what + ": expected a nonnegative integer, got '" + text + "'");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    malformed(what + ": number out of range '" + text + "'");
  }
}

std::vector<NodeId> parse_ids(const std::string& text, const std::string& what) {
  std::vector<NodeId> out;
  for (const auto& part : split(text, ',')) {
    out.push_back(static_cast<NodeId>(parse_uint(part, what)));
  }
  return out;
}

std::string join(const std::vector<NodeId>& ids, char sep) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out += (i ? std::string(1, sep) : std::string()) + std::to_string(ids[i]);
  }
  return out;
}

std::string join(const std::set<NodeId>& ids, char sep) { return join(std::vector<NodeId>(ids.begin(), ids.end()), sep); }

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "1" || text == "true" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "no") return false;
  malformed(what + ": expected a boolean, got '" + text + "'");
}

// Uniform m-subset of pool, returned in increasing order.
std::vector<NodeId> random_subset(std::vector<NodeId> pool, std::size_t m, Rng& rng) {
  for (std::size_t i = 0; i < m; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<NodeId> all_nodes(int n, NodeId except = 0) {
  std::vector<NodeId> out;
  for (NodeId i = 1; i <= n; ++i) {
    if (i != except) out.push_back(i);
  }
  return out;
}

}  // namespace

std::vector<Event> parse_events(std::string_view text) {
  std::vector<Event> events;
  for (const auto& item : split(text, ';')) {
    if (item.empty()) {
      continue;
    }
    const auto parts = split(item, ':');
    Event e;
    if (parts[0] == "repair") {
      if (parts.size() != 3) {
        malformed("repair event needs 'repair:<node>:<helpers>', got '" + item + "'");
      }
      e.kind = Event::Kind::Repair;
      e.target = parts[1] == "*" ? 0 : static_cast<NodeId>(parse_uint(parts[1], "repair target"));
      if (parts[2] != "*") e.nodes = parse_ids(parts[2], "helpers");
    } else if (parts[0] == "reconstruct") {
      if (parts.size() != 2) {
        malformed("reconstruct event needs 'reconstruct:<nodes>', got '" + item + "'");
      }
      e.kind = Event::Kind::Reconstruct;
      if (parts[1] != "*") e.nodes = parse_ids(parts[1], "nodes");
    } else {
      malformed("unknown event '" + item + "'");
    }
    events.push_back(std::move(e));
  }
  return events;
}

std::string format_events(std::span<const Event> events) {
  std::string out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    out += i ? "; " : "";
    const std::string nodes = e.nodes.empty() ? "*" : join(e.nodes, ',');
    if (e.kind == Event::Kind::Repair) {
      out += "repair:" + (e.target == 0 ? std::string("*") : std::to_string(e.target)) + ":" + nodes;
    } else {
      out += "reconstruct:" + nodes;
    }
  }
  return out;
}

ScenarioConfig pinned_config(const SystemParams& params, Strategy strategy) {
  if (params.k != 4 || params.d != 5 || params.n < 6 || params.b < 1) {
    throw Error(ErrorCode::InvalidArgument, "--paper-mode needs k=4, d=5, n>=6 and b>=1");
  }
  ScenarioConfig c;
  c.params = params;
  c.strategy = strategy;
  c.controlled = std::set<NodeId>{3};
  c.events = {Event{Event::Kind::Repair, 2, {1, 3, 4, 5, 6}}, Event{Event::Kind::Reconstruct, 0, {1, 2, 3, 4}}};
  return c;
}

ScenarioConfig parse_config(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      malformed("config line " + std::to_string(lineno) + " has no '='");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (!kv.emplace(key, trim(std::string_view(line).substr(eq + 1))).second) {
      malformed("config key '" + key + "' given twice");
    }
  }
  static const std::set<std::string> known{"params", "strategy", "controlled", "events", "spare",
                                           "fresh", "trials", "seed", "threads", "paper_mode"};
  for (const auto& [key, value] : kv) {
    if (!known.contains(key)) malformed("unknown config key '" + key + "'");
  }
  if (!kv.contains("params")) malformed("config needs params=n,k,d,b,q,v");
  const auto p = split(kv["params"], ',');
  if (p.size() != 6) malformed("params needs six values n,k,d,b,q,v");
  const SystemParams params =
      make_params(static_cast<int>(parse_uint(p[0], "n")), static_cast<int>(parse_uint(p[1], "k")),
                  static_cast<int>(parse_uint(p[2], "d")), static_cast<int>(parse_uint(p[3], "b")),
                  parse_uint(p[4], "q"), static_cast<std::size_t>(parse_uint(p[5], "v")));
  const Strategy strategy = kv.contains("strategy") ? parse_strategy(kv["strategy"]) : Strategy::RandomError;

  ScenarioConfig c;
  if (kv.contains("paper_mode") && parse_bool(kv["paper_mode"], "paper_mode")) {
    c = pinned_config(params, strategy);
  } else {
    c.params = params;
    c.strategy = strategy;
  }
  if (kv.contains("controlled")) {
    const auto& v = kv["controlled"];
    if (v == "random") {
      c.controlled.reset();
    } else if (v.empty()) {
      c.controlled = std::set<NodeId>{};
    } else {
      const auto ids = parse_ids(v, "controlled");
      c.controlled = std::set<NodeId>(ids.begin(), ids.end());
    }
  }
  if (kv.contains("events")) c.events = parse_events(kv["events"]);
  if (kv.contains("spare") && !kv["spare"].empty()) {
    for (const auto& item : split(kv["spare"], ',')) {
      const auto ends = split(item, ':');
      if (ends.size() != 2) malformed("spare entries look like 3:4, got '" + item + "'");
      c.spared.insert(SymbolId(static_cast<NodeId>(parse_uint(ends[0], "spare")),
                               static_cast<NodeId>(parse_uint(ends[1], "spare"))));
    }
  }
  if (kv.contains("fresh")) c.fresh_per_message = parse_bool(kv["fresh"], "fresh");
  if (kv.contains("trials")) c.trials = static_cast<std::size_t>(parse_uint(kv["trials"], "trials"));
  if (kv.contains("seed")) c.seed = parse_uint(kv["seed"], "seed");
  if (kv.contains("threads")) c.threads = static_cast<unsigned>(parse_uint(kv["threads"], "threads"));
  validate(c);
  return c;
}

std::string format_config(const ScenarioConfig& c) {
  std::ostringstream out;
  const auto& p = c.params;
  out << "params=" << p.n << ',' << p.k << ',' << p.d << ',' << p.b << ',' << p.q << ',' << p.v << '\n';
  out << "strategy=" << to_string(c.strategy) << '\n';
  out << "controlled=" << (c.controlled ? join(*c.controlled, ',') : std::string("random")) << '\n';
  out << "events=" << format_events(c.events) << '\n';
  out << "spare=";
  bool first = true;
  for (const auto& id : c.spared) {
    out << (first ? "" : ",") << id.lo() << ':' << id.hi();
    first = false;
  }
  out << '\n';
  out << "fresh=" << (c.fresh_per_message ? 1 : 0) << '\n';
  out << "trials=" << c.trials << '\n';
  out << "seed=" << c.seed << '\n';
  out << "threads=" << c.threads << '\n';
  return out.str();
}

void validate(const ScenarioConfig& c) {
  const auto& p = c.params;
  const auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  const auto check_ids = [&](const std::vector<NodeId>& ids, const std::string& what) {
    std::set<NodeId> seen;
    for (NodeId i : ids) {
      if (i < 1 || i > p.n) bad(what + " node " + std::to_string(i) + " out of range");
      if (!seen.insert(i).second) bad(what + " node " + std::to_string(i) + " repeated");
    }
  };
  if (c.trials < 1) bad("trials must be at least 1");
  if (c.controlled) {
    if (c.controlled->size() > static_cast<std::size_t>(p.b)) {
      throw Error(ErrorCode::BudgetExceeded, "more controlled nodes than b");
    }
    check_ids(std::vector<NodeId>(c.controlled->begin(), c.controlled->end()), "controlled");
  }
  for (const auto& id : c.spared) {
    if (id.hi() > p.n || id.lo() < 1) bad("spared symbol " + to_string(id) + " out of range");
  }
  for (const Event& e : c.events) {
    if (e.kind == Event::Kind::Repair) {
      if (e.target != 0 && (e.target < 1 || e.target > p.n)) bad("repair target out of range");
      if (!e.nodes.empty()) {
        if (e.nodes.size() != static_cast<std::size_t>(p.d)) bad("repair needs exactly d helpers");
        check_ids(e.nodes, "helper");
        if (e.target != 0 && std::find(e.nodes.begin(), e.nodes.end(), e.target) != e.nodes.end()) {
          bad("a node cannot help repair itself");
        }
      }
    } else if (!e.nodes.empty()) {
      if (e.nodes.size() != static_cast<std::size_t>(p.k)) bad("reconstruction needs exactly k nodes");
      check_ids(e.nodes, "user");
    }
  }
}

bool operator==(const EventOutcome& a, const EventOutcome& b) {
  return a.kind == b.kind && a.target == b.target && a.contacted == b.contacted && a.detected == b.detected &&
         a.truth == b.truth && a.completed == b.completed && a.exact == b.exact && a.undetected == b.undetected &&
         a.inconclusive == b.inconclusive && a.error == b.error && a.pair_cells == b.pair_cells &&
         a.pair_flips == b.pair_flips;
}

bool operator==(const TrialResult& a, const TrialResult& b) {
  return a.trial == b.trial && a.seed == b.seed && a.controlled == b.controlled && a.events == b.events &&
         a.detected == b.detected && a.truth == b.truth && a.exact_repair == b.exact_repair &&
         a.exact_file == b.exact_file && a.undetected == b.undetected && a.inconclusive == b.inconclusive &&
         a.false_accusation == b.false_accusation && a.pair_cells == b.pair_cells && a.pair_flips == b.pair_flips;
}

namespace {

class TrialRunner {
 public:
  TrialRunner(const ScenarioConfig& config, std::uint64_t seed)
      : config_(config), code_(config.params), field_(code_.field()), rng_(seed), store_(config.params) {}

  TrialResult run(std::size_t index, std::uint64_t seed) {
    const SystemParams& p = config_.params;
    for (int t = 0; t < p.file_size; ++t) {
      file_.push_back(field_.random_symbol(p.v, rng_));
    }
    truth_ = code_.encode(file_);
    store_.populate(truth_.symbols);
    current_ = truth_.nodes;

    std::set<NodeId> controlled = config_.controlled
                                      ? *config_.controlled
                                      : [&] {
                                          const auto pick = random_subset(all_nodes(p.n),
                                                                          static_cast<std::size_t>(p.b), rng_);
                                          return std::set<NodeId>(pick.begin(), pick.end());
                                        }();
    adversary_.emplace(Adversary::observe(code_, truth_, controlled, config_.strategy, rng_.next()));
    for (const auto& id : config_.spared) {
      adversary_->spare(id);
    }
    adversary_->set_fresh_per_message(config_.fresh_per_message);

    TrialResult r;
    r.trial = index;
    r.seed = seed;
    r.controlled = controlled;
    for (const Event& e : config_.events) {
      EventOutcome o = e.kind == Event::Kind::Repair ? repair(e) : reconstruct(e);
      r.detected.insert(o.detected.begin(), o.detected.end());
      r.truth.insert(o.truth.begin(), o.truth.end());
      if (o.completed && !o.exact) {
        (e.kind == Event::Kind::Repair ? r.exact_repair : r.exact_file) = false;
      }
      r.undetected = r.undetected || o.undetected;
      r.inconclusive = r.inconclusive || o.inconclusive;
      r.pair_cells += o.pair_cells;
      r.pair_flips += o.pair_flips;
      r.events.push_back(std::move(o));
    }
    for (NodeId d : r.detected) {
      r.false_accusation = r.false_accusation || !controlled.contains(d);
    }
    return r;
  }

 private:
  bool tampered(const SymbolId& id, const Symbol& value) const { return truth_.symbols.at(id) != value; }

  void count_pair(const CrossSymbol& a, const CrossSymbol& b, EventOutcome& o) const {
    if (a.id == b.id || tampered(a.id, a.value) == tampered(b.id, b.value)) {
      return;
    }
    ++o.pair_cells;
    if (field_.dot(a.value, b.value) == store_.hash(a.id, b.id)) {
      ++o.pair_flips;
    }
  }

  void record_error(const Error& err, EventOutcome& o) const {
    o.inconclusive = true;
    o.error = std::string(to_string(err.code()));
    if (const auto* d = dynamic_cast<const DetectionError*>(&err)) {
      o.detected = d->report().detected;
    }
  }

  EventOutcome repair(const Event& e) {
    const SystemParams& p = config_.params;
    EventOutcome o;
    o.kind = Event::Kind::Repair;
    if (e.target != 0) {
      o.target = e.target;
    } else {
      std::vector<NodeId> pool;
      for (NodeId i : all_nodes(p.n)) {
        if (std::find(e.nodes.begin(), e.nodes.end(), i) == e.nodes.end()) pool.push_back(i);
      }
      o.target = pool[rng_.below(pool.size())];
    }
    o.contacted = !e.nodes.empty() ? e.nodes
                                   : random_subset(all_nodes(p.n, o.target), static_cast<std::size_t>(p.d), rng_);
    std::vector<HelperResponse> responses;
    for (NodeId h : o.contacted) {
      Symbol value = code_.derive_symbol(current_[h - 1], o.target).value;
      if (adversary_->controls(h)) {
        o.truth.insert(h);
        value = adversary_->corrupt(SymbolId(h, o.target), value);
      }
      responses.push_back({h, std::move(value)});
    }
    for (std::size_t a = 0; a < responses.size(); ++a) {
      for (std::size_t b = a + 1; b < responses.size(); ++b) {
        count_pair({SymbolId(responses[a].helper, o.target), responses[a].value},
                   {SymbolId(responses[b].helper, o.target), responses[b].value}, o);
      }
    }
    try {
      RepairOutcome out = secure_repair(code_, o.target, responses, store_);
      o.completed = true;
      o.detected = out.report.detected;
      o.exact = out.node == truth_.node(o.target);
      current_[o.target - 1] = std::move(out.node);
    } catch (const Error& err) {
      record_error(err, o);
    }
    o.undetected = o.completed && !o.exact;
    return o;
  }

  EventOutcome reconstruct(const Event& e) {
    const SystemParams& p = config_.params;
    EventOutcome o;
    o.kind = Event::Kind::Reconstruct;
    o.contacted = !e.nodes.empty() ? e.nodes : random_subset(all_nodes(p.n), static_cast<std::size_t>(p.k), rng_);
    std::vector<NodeState> payloads;
    for (NodeId u : o.contacted) {
      if (adversary_->controls(u)) {
        o.truth.insert(u);
        payloads.push_back(adversary_->corrupt_node(current_[u - 1]));
      } else {
        payloads.push_back(current_[u - 1]);
      }
    }
    for (std::size_t i = 0; i < payloads.size(); ++i) {
      for (std::size_t j = i + 1; j < payloads.size(); ++j) {
        for (std::size_t s = 0; s < payloads[i].symbols.size(); ++s) {
          for (std::size_t t = 0; t < payloads[j].symbols.size(); ++t) {
            count_pair({payloads[i].id_at(s), payloads[i].symbols[s]}, {payloads[j].id_at(t), payloads[j].symbols[t]},
                       o);
          }
        }
      }
    }
    try {
      ReconstructionOutcome out = secure_reconstruct(code_, payloads, store_);
      o.completed = true;
      o.detected = out.report.detected;
      o.exact = out.file == file_;
    } catch (const Error& err) {
      record_error(err, o);
    }
    o.undetected = o.completed && !o.exact;
    return o;
  }

  const ScenarioConfig& config_;
  PmCode code_;
  const PrimeField& field_;
  Rng rng_;
  std::vector<Symbol> file_;
  EncodedSystem truth_;
  HashStore store_;
  std::vector<NodeState> current_;
  std::optional<Adversary> adversary_;
};

}  // namespace

TrialResult run_trial(const ScenarioConfig& config, std::size_t trial_index, std::uint64_t seed) {
  TrialRunner runner(config, seed);
  return runner.run(trial_index, seed);
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) {
    return {0.0, 1.0};
  }
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (phat + z2 / (2 * nn)) / denom;
  const double half = z * std::sqrt(phat * (1 - phat) / nn + z2 / (4 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

CampaignStats summarize(std::span<const TrialResult> results, std::uint64_t q) {
  CampaignStats s;
  s.trials = results.size();
  std::size_t detected_all = 0;
  std::size_t inconclusive = 0;
  std::size_t flips = 0;
  for (const auto& r : results) {
    bool any_truth = false;
    bool all_caught = true;
    for (const auto& e : r.events) {
      if (e.truth.empty()) continue;
      any_truth = true;
      all_caught = all_caught && std::includes(e.detected.begin(), e.detected.end(), e.truth.begin(), e.truth.end());
    }
    if (any_truth) {
      ++s.trials_with_truth;
      detected_all += all_caught;
    }
    s.undetected += r.undetected;
    inconclusive += r.inconclusive;
    s.false_accusations += r.false_accusation;
    s.pair_cells += r.pair_cells;
    flips += r.pair_flips;
  }
  const double n = static_cast<double>(std::max<std::size_t>(s.trials, 1));
  s.detection_rate = s.trials_with_truth ? static_cast<double>(detected_all) / static_cast<double>(s.trials_with_truth) : 0.0;
  s.undetected_rate = static_cast<double>(s.undetected) / n;
  std::tie(s.ci_low, s.ci_high) = wilson_interval(s.undetected, s.trials, 3.0);
  s.reference = 1.0 / static_cast<double>(q);
  s.bound_3sigma = s.reference + 3.0 * std::sqrt(s.reference * (1 - s.reference) / n);
  s.inconclusive_rate = static_cast<double>(inconclusive) / n;
  s.pair_flip_rate = s.pair_cells ? static_cast<double>(flips) / static_cast<double>(s.pair_cells) : 0.0;
  return s;
}

Campaign run_campaign(const ScenarioConfig& config) {
  validate(config);
  Campaign c;
  c.results.resize(config.trials);
  const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(config.trials)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.trials) return;
      try {
        c.results[i] = run_trial(config, i, derive_seed(config.seed, i));
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = config.trials;
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  c.stats = summarize(c.results, config.params.q);
  return c;
}

void write_campaign_csv(std::ostream& out, std::span<const TrialResult> results) {
  out << "trial,seed,detected,truth,exact_repair,exact_file,undetected,inconclusive\n";
  for (const auto& r : results) {
    out << r.trial << ',' << r.seed << ',' << join(r.detected, ';') << ',' << join(r.truth, ';') << ','
        << (r.exact_repair ? 1 : 0) << ',' << (r.exact_file ? 1 : 0) << ',' << (r.undetected ? 1 : 0) << ','
        << (r.inconclusive ? 1 : 0) << '\n';
  }
}

void write_summary(std::ostream& out, const ScenarioConfig& config, const CampaignStats& s) {
  const auto& p = config.params;
  std::ostringstream o;
  o << std::setprecision(6) << std::fixed;
  o << "params=" << p.n << ',' << p.k << ',' << p.d << ',' << p.b << ',' << p.q << ',' << p.v << '\n';
  o << "strategy=" << to_string(config.strategy) << '\n';
  o << "events=" << format_events(config.events) << '\n';
  o << "seed=" << config.seed << '\n';
  o << "trials=" << s.trials << '\n';
  o << "trials_with_compromised_contact=" << s.trials_with_truth << '\n';
  o << "detection_rate=" << s.detection_rate << '\n';
  o << "undetected=" << s.undetected << '\n';
  o << "undetected_rate=" << s.undetected_rate << '\n';
  o << "ci_method=wilson z=3\n";
  o << "ci_low=" << s.ci_low << '\n';
  o << "ci_high=" << s.ci_high << '\n';
  o << "reference_1_over_q=" << s.reference << '\n';
  o << "bound_3sigma=" << s.bound_3sigma << '\n';
  o << "within_bound=" << (s.undetected_rate <= s.bound_3sigma ? 1 : 0) << '\n';
  o << "inconclusive_rate=" << s.inconclusive_rate << '\n';
  o << "false_accusations=" << s.false_accusations << '\n';
  o << "pair_cells=" << s.pair_cells << '\n';
  o << "pair_flip_rate=" << s.pair_flip_rate << '\n';
  out << o.str();
}

}  // namespace pmguard
