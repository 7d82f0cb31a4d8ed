#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pmguard/error.hpp"
#include "pmguard/sim.hpp"

namespace pmguard {
namespace {

TEST(Events, ParseAndFormat) {
  const auto events = parse_events("repair:2:1,3,4,5,6; reconstruct:1,2,3,4 ;repair:*:*;reconstruct:*");
  ASSERT_EQ(events.size(), 4u);
  EXPECT_EQ(events[0], (Event{Event::Kind::Repair, 2, {1, 3, 4, 5, 6}}));
  EXPECT_EQ(events[1], (Event{Event::Kind::Reconstruct, 0, {1, 2, 3, 4}}));
  EXPECT_EQ(events[2], (Event{Event::Kind::Repair, 0, {}}));
  EXPECT_EQ(events[3], (Event{Event::Kind::Reconstruct, 0, {}}));
  EXPECT_EQ(format_events(events), "repair:2:1,3,4,5,6; reconstruct:1,2,3,4; repair:*:*; reconstruct:*");
  EXPECT_EQ(parse_events(format_events(events)), events);
  EXPECT_THROW(parse_events("fail:2"), Error);
  EXPECT_THROW(parse_events("repair:2"), Error);
  EXPECT_THROW(parse_events("reconstruct:1,x"), Error);
}

TEST(Config, ParseFormatRoundTrip) {
  const auto c = parse_config(
      "# comment\n"
      "params = 7,4,5,1,11,4\n"
      "strategy=zeroing\n"
      "controlled=3\n"
      "events=repair:2:1,3,4,5,6;reconstruct:1,2,3,4\n"
      "spare=3:4\n"
      "trials=25\n"
      "seed=99\n"
      "threads=2\n");
  EXPECT_EQ(c.params, make_params(7, 4, 5, 1, 11, 4));
  EXPECT_EQ(c.strategy, Strategy::Zeroing);
  EXPECT_EQ(c.controlled, (std::set<NodeId>{3}));
  EXPECT_EQ(c.events.size(), 2u);
  EXPECT_EQ(c.spared, (std::set<SymbolId>{SymbolId(3, 4)}));
  EXPECT_EQ(c.trials, 25u);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.threads, 2u);
  const auto again = parse_config(format_config(c));
  EXPECT_EQ(format_config(again), format_config(c));
}

TEST(Config, PinnedModeAndRandomPlacement) {
  const auto c = parse_config("params=7,4,5,1,11,8\npaper_mode=true\nstrategy=targeted\n");
  EXPECT_EQ(c.controlled, (std::set<NodeId>{3}));
  EXPECT_EQ(format_events(c.events), "repair:2:1,3,4,5,6; reconstruct:1,2,3,4");
  EXPECT_EQ(c.strategy, Strategy::TargetedCollision);
  const auto r = parse_config("params=7,4,5,1,11,8\ncontrolled=random\nevents=reconstruct:*\n");
  EXPECT_FALSE(r.controlled.has_value());
  EXPECT_THROW(parse_config("params=7,3,4,0,11,8\npaper_mode=1\n"), Error);
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config("strategy=zeroing\n"), Error);
  EXPECT_THROW(parse_config("params=7,4,5,1,11\n"), Error);
  EXPECT_THROW(parse_config("params=7,4,5,2,11,1\n"), Error);
  EXPECT_THROW(parse_config("params=7,4,5,1,11,1\nbogus=1\n"), Error);
  EXPECT_THROW(parse_config("params=7,4,5,1,11,1\nseed=1\nseed=2\n"), Error);
  EXPECT_THROW(parse_config("params=7,4,5,1,11,1\ncontrolled=1,2\n"), Error);
  EXPECT_THROW(parse_config("params=7,4,5,1,11,1\nevents=repair:2:1,3,4,5\n"), Error);
  EXPECT_THROW(parse_config("params=7,4,5,1,11,1\nevents=repair:2:1,2,4,5,6\n"), Error);
  EXPECT_THROW(parse_config("params=7,4,5,1,11,1\nevents=reconstruct:1,2,3,9\n"), Error);
  EXPECT_THROW(parse_config("params=7,4,5,1,11,1\nevents=reconstruct:1,1,2,3\n"), Error);
  EXPECT_THROW(parse_config("params=7,4,5,1,11,1\ntrials=0\n"), Error);
}

void expect_event_invariants(const TrialResult& r) {
  for (const auto& e : r.events) {
    if (e.undetected) {
      EXPECT_FALSE(e.exact);
      EXPECT_NE(e.detected, e.truth);
    }
    EXPECT_EQ(e.completed, !e.inconclusive);
    EXPECT_LE(e.detected.size(), 1u);
  }
}

TEST(Trial, ZeroingInPinnedScenario) {
  const auto c = pinned_config(make_params(7, 4, 5, 1, 11, 8), Strategy::Zeroing);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = run_trial(c, 0, seed);
    ASSERT_EQ(r.events.size(), 2u);
    const auto& rep = r.events[0];
    EXPECT_EQ(rep.truth, (std::set<NodeId>{3}));
    if (rep.completed) {
      EXPECT_EQ(rep.detected, (std::set<NodeId>{3}));
      EXPECT_TRUE(rep.exact);
    }
    const auto& rec = r.events[1];
    if (rec.completed) {
      EXPECT_EQ(rec.detected, (std::set<NodeId>{3}));
      EXPECT_TRUE(rec.exact);
    }
    EXPECT_FALSE(r.false_accusation);
    expect_event_invariants(r);
  }
}

TEST(Trial, NoAdversaryIsExact) {
  ScenarioConfig c;
  c.params = make_params(7, 3, 4, 0, 11, 3);
  c.strategy = Strategy::RandomError;
  c.events = parse_events("repair:*:*; reconstruct:*; repair:*:*; reconstruct:*");
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = run_trial(c, 0, seed);
    EXPECT_TRUE(r.controlled.empty());
    EXPECT_TRUE(r.detected.empty());
    EXPECT_TRUE(r.exact_repair);
    EXPECT_TRUE(r.exact_file);
    EXPECT_FALSE(r.undetected);
    EXPECT_FALSE(r.inconclusive);
    for (const auto& e : r.events) EXPECT_TRUE(e.completed && e.exact);
  }
}

TEST(Trial, RandomChoicesRespectParameters) {
  ScenarioConfig c;
  c.params = make_params(9, 5, 6, 2, 13, 2);
  c.strategy = Strategy::RandomError;
  c.events = parse_events("repair:*:*; reconstruct:*");
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto r = run_trial(c, 0, seed);
    EXPECT_EQ(r.controlled.size(), 2u);
    const auto& rep = r.events[0];
    EXPECT_EQ(rep.contacted.size(), 6u);
    EXPECT_EQ(std::count(rep.contacted.begin(), rep.contacted.end(), rep.target), 0);
    EXPECT_EQ(r.events[1].contacted.size(), 5u);
    EXPECT_FALSE(r.false_accusation);
  }
}

TEST(Campaign, ReproducibleAndThreadInvariant) {
  auto c = pinned_config(make_params(7, 4, 5, 1, 11, 2), Strategy::RandomError);
  c.trials = 200;
  c.seed = 1234;
  c.threads = 1;
  const auto a = run_campaign(c);
  const auto b = run_campaign(c);
  c.threads = 4;
  const auto t = run_campaign(c);
  EXPECT_EQ(a.results, b.results);
  EXPECT_EQ(a.results, t.results);
  std::ostringstream sa, st;
  write_summary(sa, c, a.stats);
  write_summary(st, c, t.stats);
  EXPECT_EQ(sa.str(), st.str());
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    EXPECT_EQ(a.results[i].trial, i);
    EXPECT_EQ(a.results[i].seed, derive_seed(1234, i));
    expect_event_invariants(a.results[i]);
  }
  // a single trial replays identically outside the campaign
  EXPECT_EQ(run_trial(c, 17, derive_seed(1234, 17)), a.results[17]);
}

TEST(Campaign, RandomErrorReconstructionBelowOneOverQ) {
  ScenarioConfig c;
  c.params = make_params(7, 4, 5, 1, 11, 4);
  c.strategy = Strategy::RandomError;
  c.controlled = std::set<NodeId>{3};
  c.events = parse_events("reconstruct:1,2,3,4");
  c.trials = 1000;
  c.seed = 5;
  c.threads = 4;
  const auto out = run_campaign(c);
  EXPECT_LE(out.stats.undetected_rate, out.stats.bound_3sigma);
  EXPECT_EQ(out.stats.false_accusations, 0u);
  EXPECT_GT(out.stats.detection_rate, 0.9);
}

TEST(Campaign, ZeroingDetectionRate) {
  ScenarioConfig c;
  c.params = make_params(7, 4, 5, 1, 11, 4);
  c.strategy = Strategy::Zeroing;
  c.controlled.reset();
  c.events = parse_events("repair:*:*; reconstruct:*");
  c.trials = 1000;
  c.seed = 6;
  c.threads = 4;
  const auto s = run_campaign(c).stats;
  EXPECT_GE(s.detection_rate, 1.0 - 1.0 / 11.0);
  EXPECT_EQ(s.false_accusations, 0u);
}

TEST(Campaign, NoFalseAccusationsAt946) {
  for (Strategy s : {Strategy::Zeroing, Strategy::RandomError, Strategy::TargetedCollision}) {
    ScenarioConfig c;
    c.params = make_params(9, 4, 6, 1, 11, 8);
    c.strategy = s;
    c.controlled.reset();
    c.events = parse_events("repair:*:*; reconstruct:*; repair:*:*; reconstruct:*");
    c.trials = 1500;
    c.seed = 946;
    c.threads = 4;
    const auto out = run_campaign(c);
    EXPECT_EQ(out.stats.false_accusations, 0u) << to_string(s);
    EXPECT_GT(out.stats.trials_with_truth, 0u);
  }
}

TEST(Stats, WilsonInterval) {
  const auto [lo, hi] = wilson_interval(0, 100, 3.0);
  EXPECT_DOUBLE_EQ(lo, 0.0);
  EXPECT_NEAR(hi, 0.09 / 1.09, 1e-12);
  const auto [lo2, hi2] = wilson_interval(50, 100, 3.0);
  // symmetric around 1/2
  EXPECT_NEAR(lo2 + hi2, 1.0, 1e-12);
  EXPECT_NEAR(hi2 - 0.5, 3.0 * std::sqrt(0.25 / 100 + 9.0 / 40000) / 1.09, 1e-12);
}

TEST(Stats, SummarizeCounts) {
  std::vector<TrialResult> rs(4);
  rs[0].undetected = true;
  rs[1].inconclusive = true;
  rs[2].false_accusation = true;
  rs[3].pair_cells = 10;
  rs[3].pair_flips = 1;
  const auto s = summarize(rs, 11);
  EXPECT_EQ(s.trials, 4u);
  EXPECT_EQ(s.undetected, 1u);
  EXPECT_DOUBLE_EQ(s.undetected_rate, 0.25);
  EXPECT_DOUBLE_EQ(s.inconclusive_rate, 0.25);
  EXPECT_EQ(s.false_accusations, 1u);
  EXPECT_DOUBLE_EQ(s.pair_flip_rate, 0.1);
  EXPECT_DOUBLE_EQ(s.reference, 1.0 / 11);
  EXPECT_NEAR(s.bound_3sigma, 1.0 / 11 + 3 * std::sqrt((1.0 / 11) * (10.0 / 11) / 4), 1e-12);
}

TEST(Reports, CsvLayout) {
  TrialResult r;
  r.trial = 3;
  r.seed = 77;
  r.detected = {3, 5};
  r.truth = {3};
  r.exact_file = false;
  r.undetected = true;
  std::ostringstream out;
  write_campaign_csv(out, std::vector<TrialResult>{r});
  EXPECT_EQ(out.str(),
            "trial,seed,detected,truth,exact_repair,exact_file,undetected,inconclusive\n"
            "3,77,3;5,3,1,0,1,0\n");
}

TEST(Reports, SummaryNamesCiMethod) {
  auto c = pinned_config(make_params(7, 4, 5, 1, 11, 2), Strategy::Zeroing);
  c.trials = 5;
  std::ostringstream out;
  write_summary(out, c, run_campaign(c).stats);
  EXPECT_NE(out.str().find("ci_method=wilson z=3\n"), std::string::npos);
  EXPECT_NE(out.str().find("reference_1_over_q=0.090909\n"), std::string::npos);
}

}  // namespace
}  // namespace pmguard
