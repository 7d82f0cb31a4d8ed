// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria. argv[1] is the pmguard executable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pmguard/adversary.hpp"
#include "pmguard/error.hpp"
#include "pmguard/hashing.hpp"
#include "pmguard/pm_code.hpp"
#include "pmguard/secure_protocol.hpp"
#include "pmguard/sim.hpp"
#include "test_support.hpp"

using namespace pmguard;
namespace fs = std::filesystem;

namespace {

// budgets and tolerances
constexpr double kSigmas = 3.0;
constexpr std::size_t kStatTrials = 10000;
constexpr std::size_t kPairSamples = 100000;
constexpr std::uint64_t kGoldenSeed = 3;
constexpr double kRatioLow = 5.0;
constexpr double kRatioHigh = 20.0;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [" << what << "]";
    }
  }
};

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string set_text(const std::set<NodeId>& s) {
  std::string out;
  for (NodeId x : s) out += (out.empty() ? "" : ",") + std::to_string(x);
  return "{" + out + "}";
}

void criterion_1(Verdict& v) {
  const auto p = make_params(7, 3, 4, 0, 11, 1);
  const auto psi = build_encoding_matrix(p);
  // as printed over F_11
  const std::uint64_t expect[7][4] = {{1, 1, 1, 1}, {1, 2, 4, 8}, {1, 3, 9, 5}, {1, 4, 5, 9},
                                      {1, 5, 3, 4}, {1, 6, 3, 7}, {1, 7, 5, 2}};
  int matched = 0;
  for (int i = 1; i <= 7; ++i) {
    const auto row = psi.row(i);
    for (int c = 0; c < 4; ++c) {
      matched += row[static_cast<std::size_t>(c)].value == expect[i - 1][c] &&
                 expect[i - 1][c] == testing::power_mod(static_cast<std::uint64_t>(i), c, 11);
    }
  }
  v.require(matched == 28, std::to_string(matched) + "/28 encoding entries");
  v.detail << " encoding entries " << matched << "/28";

  const std::vector<std::vector<NodeId>> stored{{2, 3, 4, 5}, {1, 3, 4, 5}, {1, 2, 4, 5}, {1, 2, 3, 5},
                                                {1, 2, 3, 4}, {1, 2, 3, 4}, {1, 2, 3, 4}};
  const PmCode code(make_params(7, 3, 4, 0, 11, 3));
  Rng rng(1);
  const auto sys = code.encode(testing::random_file(code.params(), rng));
  int rows = 0;
  for (NodeId i = 1; i <= 7; ++i) {
    const auto& node = sys.node(i);
    bool ok = node.partners == stored[static_cast<std::size_t>(i - 1)];
    for (std::size_t s = 0; ok && s < node.symbols.size(); ++s) {
      ok = node.symbols[s] == sys.symbols.at(SymbolId(i, node.partners[s]));
    }
    // the unstored pair is still derivable
    for (NodeId j = 1; ok && j <= 7; ++j) {
      if (j != i) ok = code.derive_symbol(node, j).value == sys.symbols.at(SymbolId(i, j));
    }
    rows += ok;
  }
  v.require(rows == 7, std::to_string(rows) + "/7 storage rows");
  v.detail << ", storage rows " << rows << "/7";
}

void criterion_2(Verdict& v) {
  std::size_t reconstructions = 0;
  std::size_t repairs = 0;
  std::size_t failures = 0;
  const auto triples = testing::subsets(7, 3);
  for (std::size_t len : {1u, 8u}) {
    const auto p = make_params(7, 3, 4, 0, 11, len);
    const PmCode code(p);
    Rng rng(100 + len);
    for (int f = 0; f < 100; ++f) {
      const auto file = testing::random_file(p, rng);
      const auto sys = code.encode(file);
      for (const auto& t : triples) {
        std::vector<NodeState> nodes;
        for (int i : t) nodes.push_back(sys.node(i));
        failures += code.reconstruct(nodes) != file;
        ++reconstructions;
      }
      for (NodeId target = 1; target <= 7; ++target) {
        const auto helper_sets = testing::subsets(7, 4, target);
        if (helper_sets.size() != 15) ++failures;
        for (const auto& h : helper_sets) {
          std::vector<HelperResponse> responses;
          for (int x : h) responses.push_back({x, code.derive_symbol(sys.node(x), target).value});
          failures += code.repair(target, responses) != sys.node(target);
          ++repairs;
        }
      }
    }
  }
  v.require(reconstructions == 2 * 100 * 35, "reconstruction count");
  v.require(repairs == 2 * 100 * 7 * 15, "repair count");
  v.require(failures == 0, std::to_string(failures) + " mismatches");
  v.detail << " reconstructions=" << reconstructions << " repairs=" << repairs << " mismatches=" << failures;
}

void criterion_3(Verdict& v) {
  const auto mbr = [](int k, int d) { return k * d - k * (k - 1) / 2; };
  const auto summed = [](int n, int k, int d, int b) {
    (void)n;
    int s = 0;
    for (int i = b + 1; i <= k; ++i) s += d - i + 1;
    return s;
  };
  const auto p = make_params(7, 4, 5, 1, 11, 1);
  v.require(p.secure_capacity == 9 && summed(7, 4, 5, 1) == 9, "C_s(7,4,5,1)");
  v.require(mbr_file_size(3, 4) == 9 && mbr(3, 4) == 9, "B(7,3,4)");
  std::size_t cases = 0;
  std::size_t bad = 0;
  for (int n = 2; n <= 12; ++n) {
    for (int k = 1; k < n; ++k) {
      for (int d = k; d < n; ++d) {
        for (int b = 0; 2 * b < k; ++b) {
          const auto q = make_params(n, k, d, b, 13, 1);
          const int expect = summed(n, k, d, b);
          bad += q.secure_capacity != expect || q.file_size != expect || mbr(k - b, d - b) != expect ||
                 secure_capacity(k, d, b) != expect;
          ++cases;
        }
      }
    }
  }
  v.require(bad == 0, std::to_string(bad) + " mismatched parameter sets");
  v.detail << " C_s(7,4,5,1)=" << p.secure_capacity << " B(7,3,4)=" << mbr_file_size(3, 4) << " exhaustive=" << cases
           << " mismatched=" << bad;
}

void criterion_4(Verdict& v) {
  for (std::size_t len : {1u, 2u, 8u, 15u, 256u}) {
    const auto p = make_params(7, 3, 4, 0, 11, len);
    const PmCode code(p);
    Rng rng(len);
    HashStore store(p);
    store.populate(code.encode(testing::random_file(p, rng)).symbols);
    const auto theta = 7 * 6 / 2;
    v.require(store.theta() == 21 && theta == 21, "theta");
    v.require(store.size() == 210 && theta * (theta - 1) / 2 == 210, "hash count");
    const auto r = overhead_ratio(p);
    // 15 / (2v) in lowest terms
    const auto expect = make_rational(15, 2 * static_cast<std::int64_t>(len));
    v.require(r == expect && r.num * 2 * static_cast<std::int64_t>(len) == 15 * r.den,
              "ratio at v=" + std::to_string(len));
    if (len == 8) v.detail << " theta=21 hashes=210 ratio(v=8)=" << r.num << "/" << r.den;
  }
}

const char* const kGoldenRepair =
    "1: . x v v v\n"
    "3: x . x x x\n"
    "4: v x . v v\n"
    "5: v x v . v\n"
    "6: v x v v .\n";

const char* const kGoldenReconstruction =
    "X12: . . . . | v v v v | x x v x | v v v v\n"
    "X13: . . . . | v v v v | x x v x | v v v v\n"
    "X14: . . . . | v v v v | x x v x | v v v v\n"
    "X15: . . . . | v v v v | x x v x | v v v v\n"
    "X21: v v v v | . . . . | x x v x | v v v v\n"
    "X23: v v v v | . . . . | x x v x | v v v v\n"
    "X24: v v v v | . . . . | x x v x | v v v v\n"
    "X25: v v v v | . . . . | x x v x | v v v v\n"
    "X31: x x x x | x x x x | . . . . | x x x x\n"
    "X32: x x x x | x x x x | . . . . | x x x x\n"
    "X34: v v v v | v v v v | . . . . | v v v v\n"
    "X35: x x x x | x x x x | . . . . | x x x x\n"
    "X41: v v v v | v v v v | x x v x | . . . .\n"
    "X42: v v v v | v v v v | x x v x | . . . .\n"
    "X43: v v v v | v v v v | x x v x | . . . .\n"
    "X45: v v v v | v v v v | x x v x | . . . .\n";

void criterion_5(Verdict& v) {
  const auto p = make_params(7, 4, 5, 1, 11, 8);
  const PmCode code(p);
  Rng rng(kGoldenSeed);
  const auto file = testing::random_file(p, rng);
  const auto sys = code.encode(file);
  HashStore store(p);
  store.populate(sys.symbols);
  auto adv = Adversary::observe(code, sys, {3}, Strategy::RandomError, rng.next());
  adv.spare(SymbolId(3, 4));

  std::vector<HelperResponse> responses;
  for (NodeId h : {1, 3, 4, 5, 6}) {
    auto x = code.derive_symbol(sys.node(h), 2).value;
    if (h == 3) x = adv.corrupt(SymbolId(3, 2), x);
    responses.push_back({h, x});
  }
  const auto rep = secure_repair(code, 2, responses, store);
  bool column_full = true;
  for (std::size_t a = 0; a < rep.table.size(); ++a) {
    if (a != 1) column_full = column_full && rep.table.mark(a, 1) == CellMark::Mismatch;
  }
  v.require(column_full, "repair column 3 not fully mismatched");
  v.require(rep.report.detected == std::set<NodeId>{3}, "repair detected " + set_text(rep.report.detected));
  v.require(rep.node == sys.node(2), "repaired node 2 differs");
  v.require(rep.table.render() == kGoldenRepair, "repair pattern differs from golden");

  const std::vector<NodeState> payloads{sys.node(1), rep.node, adv.corrupt_node(sys.node(3)), sys.node(4)};
  const auto rec = secure_reconstruct(code, payloads, store);
  const auto blocks = rec.table.mismatched_blocks(2);
  v.require(blocks >= 2, std::to_string(blocks) + " mismatched blocks for node 3");
  v.require(rec.report.detected == std::set<NodeId>{3}, "reconstruction detected " + set_text(rec.report.detected));
  v.require(rec.file == file, "file differs");
  v.require(rec.table.render() == kGoldenReconstruction, "reconstruction pattern differs from golden");
  v.detail << " seed=" << kGoldenSeed << " repair_detected=" << set_text(rep.report.detected)
           << " node3_blocks=" << blocks << " reconstruction_detected=" << set_text(rec.report.detected);
}

double three_sigma_bound(double p, std::size_t n) { return p + kSigmas * std::sqrt(p * (1 - p) / double(n)); }

CampaignStats statistical_campaign(std::uint64_t q, std::uint64_t seed) {
  auto c = pinned_config(make_params(7, 4, 5, 1, q, 4), Strategy::RandomError);
  c.trials = kStatTrials;
  c.seed = seed;
  c.threads = worker_count();
  return run_campaign(c).stats;
}

void criterion_6(Verdict& v) {
  const auto s = statistical_campaign(11, 6001);
  const double bound = three_sigma_bound(1.0 / 11, kStatTrials);
  v.require(s.trials == kStatTrials, "trial count");
  v.require(s.undetected_rate <= bound, "undetected rate above bound");
  v.require(std::abs(s.bound_3sigma - bound) < 1e-12, "reported bound");

  // one fixed nonzero error against a uniform symbol, computed by hand
  Rng rng(6002);
  std::size_t zero = 0;
  for (std::size_t i = 0; i < kPairSamples; ++i) {
    std::uint64_t e[4];
    do {
      for (auto& x : e) x = rng.below(11);
    } while (e[0] == 0 && e[1] == 0 && e[2] == 0 && e[3] == 0);
    std::uint64_t dot = 0;
    for (auto x : e) dot += x * rng.below(11);
    zero += dot % 11 == 0;
  }
  const double rate = double(zero) / kPairSamples;
  const double sigma = std::sqrt((1.0 / 11) * (10.0 / 11) / kPairSamples);
  v.require(std::abs(rate - 1.0 / 11) <= kSigmas * sigma, "pair orthogonality rate outside 3 sigma");
  v.detail << " undetected_rate=" << s.undetected_rate << " bound=" << bound << " detection_rate=" << s.detection_rate
           << " pair_rate=" << rate << " (1/11=" << 1.0 / 11 << " sigma=" << sigma << ")";
}

void criterion_7(Verdict& v) {
  const auto s11 = statistical_campaign(11, 7001);
  const auto s101 = statistical_campaign(101, 7002);
  const double bound = three_sigma_bound(1.0 / 101, kStatTrials);
  v.require(s101.undetected_rate <= bound, "q=101 rate above bound");
  v.detail << " rate(q=11)=" << s11.undetected_rate << " rate(q=101)=" << s101.undetected_rate
           << " bound(q=101)=" << bound;
  if (s101.undetected == 0 || s11.undetected == 0) {
    v.require(false, "ratio undefined: " + std::to_string(s11.undetected) + " and " +
                         std::to_string(s101.undetected) + " undetected trials");
    v.detail << " ratio=undefined";
  } else {
    const double ratio = s11.undetected_rate / s101.undetected_rate;
    v.require(ratio >= kRatioLow && ratio <= kRatioHigh, "ratio outside [5,20]");
    v.detail << " ratio=" << ratio;
  }
  // informational only, not part of the verdict
  v.detail << " (per-cell flip rates " << s11.pair_flip_rate << " and " << s101.pair_flip_rate << ")";
}

void criterion_8(Verdict& v) {
  const auto p = make_params(7, 4, 5, 1, 11, 8);
  std::vector<std::string> scripts;
  for (NodeId f = 1; f <= 7; ++f) {
    for (const auto& h : testing::subsets(7, 5, f)) {
      std::string s = "repair:" + std::to_string(f) + ":";
      for (std::size_t i = 0; i < h.size(); ++i) s += (i ? "," : "") + std::to_string(h[i]);
      scripts.push_back(s);
    }
  }
  for (const auto& u : testing::subsets(7, 4)) {
    std::string s = "reconstruct:";
    for (std::size_t i = 0; i < u.size(); ++i) s += (i ? "," : "") + std::to_string(u[i]);
    scripts.push_back(s);
  }
  std::size_t trials = 0;
  std::size_t accusations = 0;
  std::size_t contacted = 0;
  for (Strategy strategy : {Strategy::Zeroing, Strategy::RandomError, Strategy::TargetedCollision}) {
    for (NodeId c = 1; c <= 7; ++c) {
      for (const auto& script : scripts) {
        ScenarioConfig cfg;
        cfg.params = p;
        cfg.strategy = strategy;
        cfg.controlled = std::set<NodeId>{c};
        cfg.events = parse_events(script);
        cfg.trials = 10;
        cfg.seed = trials;
        const auto out = run_campaign(cfg);
        trials += out.stats.trials;
        accusations += out.stats.false_accusations;
        contacted += out.stats.trials_with_truth;
      }
    }
  }
  v.require(scripts.size() == 42 + 35, "script count");
  v.require(accusations == 0, std::to_string(accusations) + " honest nodes accused");
  v.detail << " scripts=" << scripts.size() << " trials=" << trials << " with_compromised_contact=" << contacted
           << " false_accusations=" << accusations;
}

void criterion_9(Verdict& v) {
  ScenarioConfig c;
  c.params = make_params(7, 4, 5, 1, 11, 16);
  c.strategy = Strategy::Omniscient;
  c.controlled = std::set<NodeId>{3};
  c.events = parse_events("reconstruct:1,2,3,4");
  // symbols node 3 shares with other contacted nodes stay honest
  c.spared = {SymbolId(3, 1), SymbolId(3, 2), SymbolId(3, 4)};
  c.trials = 200;
  c.seed = 9001;
  c.threads = worker_count();
  const auto out = run_campaign(c);
  std::size_t silent = 0;
  for (const auto& r : out.results) {
    silent += r.detected.empty() && !r.inconclusive && !r.exact_file && r.undetected;
  }
  v.require(silent == out.results.size(), std::to_string(silent) + "/" + std::to_string(out.results.size()) +
                                              " silent wrong decodes");
  v.require(out.stats.undetected_rate == 1.0, "undetected rate below 1");
  v.detail << " v=16 undetected_rate=" << out.stats.undetected_rate << " silent_wrong_decodes=" << silent << "/"
           << out.results.size();
}

struct Run {
  int status = -1;
  std::string output;
};

Run run(const std::string& command, const fs::path& log) {
  Run r;
  const int raw = std::system((command + " > \"" + log.string() + "\" 2>&1").c_str());
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(log);
  r.output.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return r;
}

std::vector<char> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void criterion_10(Verdict& v, const std::string& cli) {
  const fs::path dir = fs::temp_directory_path() / "pmguard_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path input = dir / "input.bin";
  const fs::path output = dir / "output.bin";
  const fs::path store = dir / "store";
  {
    Rng rng(10);
    std::vector<char> bytes(1u << 20);
    for (auto& b : bytes) b = static_cast<char>(rng.below(256));
    std::ofstream(input, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  const std::string exe = "\"" + cli + "\"";
  const auto enc = run(exe + " encode --params 7,4,5,1,257,256 --input \"" + input.string() + "\" --dir \"" +
                           store.string() + "\"",
                       dir / "encode.log");
  v.require(enc.status == 0, "encode exit " + std::to_string(enc.status));
  const auto cor = run(exe + " corrupt --dir \"" + store.string() + "\" --node 3 --strategy zeroing --seed 10",
                       dir / "corrupt.log");
  v.require(cor.status == 0, "corrupt exit " + std::to_string(cor.status));
  const auto rec = run(exe + " reconstruct --dir \"" + store.string() + "\" --nodes 1,2,3,4 --out \"" +
                           output.string() + "\"",
                       dir / "reconstruct.log");
  v.require(rec.status == 0, "reconstruct exit " + std::to_string(rec.status));
  std::string record = rec.output.substr(0, rec.output.find('\n'));
  std::set<NodeId> named;
  try {
    named = parse_record(record).detected;
  } catch (const Error&) {
    v.require(false, "unparseable report '" + record + "'");
  }
  v.require(named == std::set<NodeId>{3}, "report names " + set_text(named));
  const bool same = fs::exists(output) && slurp(input) == slurp(output);
  v.require(same, "output differs from input");
  v.detail << " bytes=" << fs::file_size(input) << " report='" << record << "' identical=" << (same ? "yes" : "no");
  if (v.pass) fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-pmguard>\n";
    return 64;
  }
  const std::string cli = argv[1];

  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<void(Verdict&)> body;
  };
  const std::vector<Criterion> criteria{
      {1, "encoding matrix and storage layout (7,3,4) q=11", 1, criterion_1},
      {2, "exhaustive repair and reconstruction (7,3,4) v=1,8", 30, criterion_2},
      {3, "secure capacity identities", 1, criterion_3},
      {4, "hash accounting", 1, criterion_4},
      {5, "golden detection tables, compromised {3}", 1, criterion_5},
      {6, "undetected rate under 1/q, q=11", 300, criterion_6},
      {7, "undetected rate scaling, q=11 vs q=101", 300, criterion_7},
      {8, "no false accusations, exhaustive placement", 120, criterion_8},
      {9, "omniscient negative control", 60, criterion_9},
      {10, "CLI 1 MiB round trip with a zeroed node", 30, [&](Verdict& v) { criterion_10(v, cli); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    v.require(seconds < c.budget_s, "over the " + std::to_string(int(c.budget_s)) + " s budget");
    failed += !v.pass;
    std::printf("%s criterion %d: %s (%.2f s)%s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, seconds,
                v.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed;
}
