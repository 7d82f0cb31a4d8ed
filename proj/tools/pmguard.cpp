// pmguard command line: capacity, encode, corrupt, repair, reconstruct, simulate.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pmguard/adversary.hpp"
#include "pmguard/error.hpp"
#include "pmguard/hashing.hpp"
#include "pmguard/pm_code.hpp"
#include "pmguard/random.hpp"
#include "pmguard/secure_protocol.hpp"
#include "pmguard/sim.hpp"
#include "pmguard/storage.hpp"

using namespace pmguard;

namespace {

std::vector<std::uint64_t> parse_list(const std::string& text, const char* what) {
  std::vector<std::uint64_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, std::string(what) + ": bad entry '" + item + "'");
    }
    out.push_back(std::stoull(item));
  }
  return out;
}

std::vector<NodeId> parse_nodes(const std::string& text, const char* what) {
  std::vector<NodeId> out;
  for (auto x : parse_list(text, what)) out.push_back(static_cast<NodeId>(x));
  return out;
}

std::uint64_t smallest_prime_above(std::uint64_t n) {
  std::uint64_t q = n + 1;
  while (!is_prime(q)) ++q;
  return q;
}

// n,k,d,b,q,v; q and v may be left off for capacity queries.
SystemParams parse_params(const std::string& text, bool allow_short) {
  const auto v = parse_list(text, "--params");
  if (v.size() == 6) {
    return make_params(static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]),
                       static_cast<int>(v[3]), v[4], static_cast<std::size_t>(v[5]));
  }
  if (allow_short && v.size() == 4) {
    return make_params(static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]),
                       static_cast<int>(v[3]), smallest_prime_above(std::max<std::uint64_t>(v[0], 1)), 1);
  }
  throw Error(ErrorCode::InvalidArgument, "--params expects n,k,d,b,q,v");
}

std::string join(const std::vector<NodeId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? "," : "") + std::to_string(ids[i]);
  return out;
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

// Default contact set: the lowest-numbered nodes whose directories exist.
std::vector<NodeId> present_nodes(const StorageLayout& layout, const SystemParams& p, NodeId except,
                                  std::size_t count) {
  std::vector<NodeId> out;
  for (NodeId i = 1; i <= p.n && out.size() < count; ++i) {
    if (i != except && layout.has_node(i)) out.push_back(i);
  }
  if (out.size() < count) {
    throw Error(ErrorCode::NotEnoughNodes, "only " + std::to_string(out.size()) + " node directories available, need " +
                                               std::to_string(count));
  }
  return out;
}

void merge(DetectionReport& into, const DetectionReport& r) {
  into.detected.insert(r.detected.begin(), r.detected.end());
  into.inconclusive = into.inconclusive || r.inconclusive;
  into.residual_mismatches += r.residual_mismatches;
}

int cmd_capacity(const std::string& params_text) {
  const auto p = parse_params(params_text, true);
  const auto overhead = overhead_ratio(p);
  const auto theta = static_cast<long long>(p.n) * (p.n - 1) / 2;
  std::cout << "n=" << p.n << " k=" << p.k << " d=" << p.d << " b=" << p.b << " q=" << p.q << " v=" << p.v << '\n'
            << "k_prime=" << p.k_prime << '\n'
            << "d_prime=" << p.d_prime << '\n'
            << "alpha=" << p.alpha << '\n'
            << "beta=" << p.beta << '\n'
            << "file_size=" << p.file_size << '\n'
            << "secure_capacity=" << p.secure_capacity << '\n'
            << "cut_set_bound=" << capacity_upper_bound(p, p.alpha, p.beta) << '\n'
            << "cross_symbols=" << theta << '\n'
            << "stored_hashes=" << theta * (theta - 1) / 2 << '\n'
            << "hash_overhead=" << overhead.num << '/' << overhead.den << '\n';
  return 0;
}

int cmd_encode(const std::string& params_text, const std::string& input, const std::string& dir) {
  const auto p = parse_params(params_text, false);
  const PmCode code(p);
  const auto bytes = read_bytes(input);
  const auto stripes = bytes_to_stripes(p, bytes);
  const StorageLayout layout(dir);
  std::vector<std::vector<NodeState>> nodes(static_cast<std::size_t>(p.n));
  std::vector<HashStore> stores;
  stores.reserve(stripes.size());
  for (const auto& file : stripes) {
    EncodedSystem sys = code.encode(file);
    stores.emplace_back(p);
    stores.back().populate(sys.symbols);
    for (std::size_t i = 0; i < sys.nodes.size(); ++i) nodes[i].push_back(std::move(sys.nodes[i]));
  }
  const Manifest manifest{p, stripes.size()};
  layout.save_manifest(manifest);
  layout.save_trust(stores);
  for (NodeId i = 1; i <= p.n; ++i) layout.save_node(i, nodes[static_cast<std::size_t>(i - 1)]);
  std::cout << "encoded bytes=" << bytes.size() << " stripes=" << stripes.size() << " nodes=" << p.n
            << " dir=" << dir << '\n';
  return 0;
}

int cmd_corrupt(const std::string& dir, NodeId node, const std::string& strategy_name, std::uint64_t seed) {
  const StorageLayout layout(dir);
  const auto manifest = layout.load_manifest();
  const auto& p = manifest.params;
  const Strategy strategy = parse_strategy(strategy_name);
  const PmCode code(p);
  if (node < 1 || node > p.n) throw Error(ErrorCode::InvalidArgument, "node out of range");

  // Only the omniscient adversary gets to read other nodes.
  std::vector<std::vector<NodeState>> all(static_cast<std::size_t>(p.n));
  for (NodeId i = 1; i <= p.n; ++i) {
    if (i == node || (strategy == Strategy::Omniscient && layout.has_node(i))) {
      all[static_cast<std::size_t>(i - 1)] = layout.load_node(i, manifest);
    }
  }
  Rng rng(seed);
  std::vector<NodeState> corrupted;
  for (std::size_t s = 0; s < manifest.stripes; ++s) {
    EncodedSystem view;
    for (NodeId i = 1; i <= p.n; ++i) {
      const auto& stored = all[static_cast<std::size_t>(i - 1)];
      view.nodes.push_back(stored.empty() ? NodeState{i, {}, {}} : stored[s]);
      if (!stored.empty() && strategy == Strategy::Omniscient) {
        for (NodeId j = 1; j <= p.n; ++j) {
          if (j != i) {
            auto x = code.derive_symbol(stored[s], j);
            view.symbols.emplace(x.id, std::move(x.value));
          }
        }
      }
    }
    auto adversary = Adversary::observe(code, view, {node}, strategy, rng.next());
    corrupted.push_back(adversary.corrupt_node(view.node(node)));
  }
  layout.save_node(node, corrupted);
  std::cout << "corrupted node=" << node << " strategy=" << to_string(strategy) << " stripes=" << manifest.stripes
            << '\n';
  return 0;
}

int cmd_repair(const std::string& dir, NodeId failed, const std::string& helpers_text) {
  const StorageLayout layout(dir);
  const auto manifest = layout.load_manifest();
  const auto& p = manifest.params;
  const PmCode code(p);
  if (failed < 1 || failed > p.n) throw Error(ErrorCode::InvalidArgument, "node out of range");
  const auto helpers = helpers_text.empty() ? present_nodes(layout, p, failed, static_cast<std::size_t>(p.d))
                                            : parse_nodes(helpers_text, "--helpers");
  std::vector<std::vector<NodeState>> stored;
  for (NodeId h : helpers) {
    if (h == failed) throw Error(ErrorCode::InvalidArgument, "a node cannot help repair itself");
    stored.push_back(layout.load_node(h, manifest));
  }
  const auto stores = layout.load_trust(manifest);
  DetectionReport total;
  std::vector<NodeState> rebuilt;
  const std::string scenario = "repair:" + std::to_string(failed) + ":" + join(helpers);
  for (std::size_t s = 0; s < manifest.stripes; ++s) {
    std::vector<HelperResponse> responses;
    for (std::size_t h = 0; h < helpers.size(); ++h) {
      responses.push_back({helpers[h], code.derive_symbol(stored[h][s], failed).value});
    }
    try {
      auto out = secure_repair(code, failed, responses, stores[s]);
      merge(total, out.report);
      rebuilt.push_back(std::move(out.node));
    } catch (const DetectionError& e) {
      throw DetectionError(e.code(), "stripe " + std::to_string(s) + ": " + e.what(), e.report());
    }
  }
  layout.save_node(failed, rebuilt);
  std::cout << to_record(total, scenario) << '\n';
  return 0;
}

int cmd_reconstruct(const std::string& dir, const std::string& nodes_text, const std::string& out_path) {
  const StorageLayout layout(dir);
  const auto manifest = layout.load_manifest();
  const auto& p = manifest.params;
  const PmCode code(p);
  const auto nodes = nodes_text.empty() ? present_nodes(layout, p, 0, static_cast<std::size_t>(p.k))
                                        : parse_nodes(nodes_text, "--nodes");
  std::vector<std::vector<NodeState>> stored;
  for (NodeId i : nodes) stored.push_back(layout.load_node(i, manifest));
  const auto stores = layout.load_trust(manifest);
  DetectionReport total;
  std::vector<std::vector<Symbol>> stripes;
  for (std::size_t s = 0; s < manifest.stripes; ++s) {
    std::vector<NodeState> payloads;
    for (const auto& n : stored) payloads.push_back(n[s]);
    try {
      auto out = secure_reconstruct(code, payloads, stores[s]);
      merge(total, out.report);
      stripes.push_back(std::move(out.file));
    } catch (const DetectionError& e) {
      throw DetectionError(e.code(), "stripe " + std::to_string(s) + ": " + e.what(), e.report());
    }
  }
  write_bytes(out_path, stripes_to_bytes(p, stripes));
  std::cout << to_record(total, "reconstruct:" + join(nodes)) << '\n';
  return 0;
}

struct SimulateArgs {
  std::string config_path;
  std::string params;
  std::string strategy = "random_error";
  std::string controlled;
  std::string events;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool paper_mode = false;
  std::string out_dir = ".";
};

int cmd_simulate(const SimulateArgs& a, const CLI::App& sub) {
  ScenarioConfig c;
  if (!a.config_path.empty()) {
    std::ifstream in(a.config_path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + a.config_path);
    c = parse_config(std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()));
  } else {
    if (a.params.empty()) throw Error(ErrorCode::InvalidArgument, "simulate needs --params or --config");
    const auto p = parse_params(a.params, false);
    if (a.paper_mode) {
      c = pinned_config(p, parse_strategy(a.strategy));
    } else {
      c.params = p;
      c.strategy = parse_strategy(a.strategy);
      c.events = parse_events("repair:*:*; reconstruct:*");
    }
  }
  // flags given explicitly override the config file
  if (sub.count("--strategy")) c.strategy = parse_strategy(a.strategy);
  if (sub.count("--controlled")) {
    if (a.controlled == "random") {
      c.controlled.reset();
    } else {
      const auto ids = parse_nodes(a.controlled, "--controlled");
      c.controlled = std::set<NodeId>(ids.begin(), ids.end());
    }
  }
  if (sub.count("--events")) c.events = parse_events(a.events);
  if (sub.count("--trials") || a.config_path.empty()) c.trials = a.trials;
  if (sub.count("--seed") || a.config_path.empty()) c.seed = a.seed;
  if (sub.count("--threads") || a.config_path.empty()) c.threads = a.threads;
  validate(c);

  const auto campaign = run_campaign(c);
  std::filesystem::create_directories(a.out_dir);
  const auto csv_path = std::filesystem::path(a.out_dir) / "campaign.csv";
  const auto summary_path = std::filesystem::path(a.out_dir) / "summary.txt";
  std::ofstream csv(csv_path);
  std::ofstream summary(summary_path);
  if (!csv || !summary) throw Error(ErrorCode::Io, "cannot write reports under " + a.out_dir);
  write_campaign_csv(csv, campaign.results);
  write_summary(summary, c, campaign.stats);
  write_summary(std::cout, c, campaign.stats);
  return 0;
}

void print_error(const std::string& command, const Error& e) {
  std::cerr << "error command=" << command << " code=" << to_string(e.code());
  if (const auto* d = dynamic_cast<const DetectionError*>(&e)) {
    std::cerr << ' ' << to_record(d->report(), command);
  }
  std::cerr << " message=\"" << e.what() << "\"\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pmguard: product-matrix storage with hash-checked repair and reconstruction"};
  app.require_subcommand(1);

  std::string params;
  std::string dir;
  std::string input;
  std::string out;
  std::string strategy = "zeroing";
  std::string helpers;
  std::string nodes;
  NodeId node = 0;
  std::uint64_t seed = 1;

  auto* capacity = app.add_subcommand("capacity", "Capacity and hash-overhead figures for a parameter set");
  capacity->add_option("--params", params, "n,k,d,b[,q,v]")->required();

  auto* encode = app.add_subcommand("encode", "Encode a file into node directories");
  encode->add_option("--params", params, "n,k,d,b,q,v (q >= 257)")->required();
  encode->add_option("--input", input, "file to store")->required();
  encode->add_option("--dir,--out", dir, "output directory")->required();

  auto* corrupt = app.add_subcommand("corrupt", "Tamper with one node's stored symbols");
  corrupt->add_option("--dir", dir, "storage directory")->required();
  corrupt->add_option("--node", node, "node to compromise")->required();
  corrupt->add_option("--strategy", strategy, "zeroing, random_error, targeted or omniscient");
  corrupt->add_option("--seed", seed, "random seed");

  auto* repair = app.add_subcommand("repair", "Rebuild a node from d helpers");
  repair->add_option("--dir", dir, "storage directory")->required();
  repair->add_option("--node", node, "node to rebuild")->required();
  repair->add_option("--helpers", helpers, "comma-separated helper ids (default: first d available)");

  auto* reconstruct = app.add_subcommand("reconstruct", "Recover the file from k nodes");
  reconstruct->add_option("--dir", dir, "storage directory")->required();
  reconstruct->add_option("--nodes", nodes, "comma-separated node ids (default: first k available)");
  reconstruct->add_option("--out", out, "output file")->required();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo campaign");
  simulate->add_option("--config", sim.config_path, "key=value scenario file");
  simulate->add_option("--params", sim.params, "n,k,d,b,q,v");
  simulate->add_option("--strategy", sim.strategy, "zeroing, random_error, targeted or omniscient");
  simulate->add_option("--controlled", sim.controlled, "compromised ids or 'random'");
  simulate->add_option("--events", sim.events, "e.g. 'repair:2:1,3,4,5,6; reconstruct:1,2,3,4'");
  simulate->add_option("--trials", sim.trials, "number of trials");
  simulate->add_option("--seed", sim.seed, "master seed");
  simulate->add_option("--threads", sim.threads, "worker threads");
  simulate->add_flag("--paper-mode", sim.paper_mode, "compromised {3}, repair 2 via {1,3,4,5,6}, read {1,2,3,4}");
  simulate->add_option("--out", sim.out_dir, "directory for campaign.csv and summary.txt");

  CLI11_PARSE(app, argc, argv);

  std::string command = "unknown";
  try {
    if (*capacity) {
      command = "capacity";
      return cmd_capacity(params);
    }
    if (*encode) {
      command = "encode";
      return cmd_encode(params, input, dir);
    }
    if (*corrupt) {
      command = "corrupt";
      return cmd_corrupt(dir, node, strategy, seed);
    }
    if (*repair) {
      command = "repair";
      return cmd_repair(dir, node, helpers);
    }
    if (*reconstruct) {
      command = "reconstruct";
      return cmd_reconstruct(dir, nodes, out);
    }
    if (*simulate) {
      command = "simulate";
      return cmd_simulate(sim, *simulate);
    }
  } catch (const Error& e) {
    print_error(command, e);
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error command=" << command << " code=Internal message=\"" << e.what() << "\"\n";
    return 3;
  }
  return 1;
}
