// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "riskmon/geometry.hpp"
#include "riskmon/metrics.hpp"
#include "riskmon/retrieval.hpp"
#include "riskmon/simulator.hpp"
#include "riskmon/synthetic.hpp"
#include "riskmon/tuning.hpp"

using namespace riskmon;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

int failures = 0;

void run(int id, const char* title, double budget_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v{false, ""};
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool ok = v.pass && in_time;
  failures += !ok;
  std::printf("[%s] %2d %s: %s; %.2fs (budget %.0fs)\n", ok ? "PASS" : "FAIL", id, title,
              v.detail.c_str(), secs, budget_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<TrainingSample> samples_from(const FISConfig& fis, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const InferenceEngine engine(fis);
  std::vector<TrainingSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].frame_id = std::to_string(i);
    out[i].condition = "synthetic";
    out[i].mean_rdd = rng.uniform(-1, 1);
    out[i].mean_iou = rng.uniform(0, 1);
    const std::array<double, 2> x{out[i].mean_rdd, out[i].mean_iou};
    out[i].target = engine(x);
  }
  return out;
}

double monotonicity_violation(const FISConfig& fis) {
  const InferenceEngine engine(fis);
  double worst = 0.0;
  for (int j = 0; j <= 100; ++j) {
    double prev = -1.0;
    for (int i = 0; i <= 100; ++i) {
      const std::array<double, 2> x{0.01 * i, 0.01 * j};
      const double r = engine(x);
      if (i > 0) worst = std::max(worst, prev - r);
      prev = r;
    }
  }
  return worst;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

FISConfig learned_fis;  // produced by criterion 7, checked by criterion 8

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "riskmon";
  const fs::path work = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "riskmon_acceptance";

  run(1, "formula exactness on 30 hand cases", 1, [] {
    struct Case {
      Object25D p, g;
      double iou, iog, rdd, dr;
    };
    // Boxes are (cx, cy, w, h, d). Expected values worked out by hand.
    const Case cases[] = {
        {{5, 5, 10, 10, 10}, {5, 5, 10, 10, 10}, 1, 1, 0, 1},
        {{0.5, 0.5, 1, 1, 10}, {1, 0.5, 1, 1, 10}, 1.0 / 3, 0.5, 0, 1},
        {{0, 0, 2, 2, 20}, {10, 10, 2, 2, 10}, 0, 0, 1, 0.5},
        {{0, 0, 4, 4, 5}, {0, 0, 2, 2, 10}, 0.25, 1, -0.5, 1},
        {{0, 0, 2, 2, 10}, {0, 0, 4, 4, 10}, 0.25, 0.25, 0, 1},
        {{1, 0, 2, 2, 12}, {0, 0, 2, 2, 10}, 1.0 / 3, 0.5, 0.2, 10.0 / 12},
        {{1, 1, 2, 2, 8}, {0, 0, 2, 2, 10}, 1.0 / 7, 0.25, -0.2, 1},
        {{2, 0, 2, 2, 10}, {0, 0, 2, 2, 10}, 0, 0, 0, 1},
        {{0, 0, 6, 2, 30}, {0, 0, 2, 6, 10}, 4.0 / 20, 4.0 / 12, 1, 1.0 / 3},
        {{3, 0, 4, 2, 11}, {0, 0, 4, 2, 10}, 1.0 / 7, 0.25, 0.1, 10.0 / 11},
        {{0, 3, 2, 4, 9}, {0, 0, 2, 4, 10}, 1.0 / 7, 0.25, -0.1, 1},
        {{0, 0, 10, 10, 15}, {2.5, 2.5, 5, 5, 10}, 0.25, 1, 0.5, 2.0 / 3},
        {{2.5, 2.5, 5, 5, 10}, {0, 0, 10, 10, 15}, 0.25, 0.25, -1.0 / 3, 1},
        {{0, 0, 1, 1, 1}, {0, 0, 1, 1, 100}, 1, 1, -0.99, 1},
        {{0, 0, 1, 1, 100}, {0, 0, 1, 1, 1}, 1, 1, 1, 0.01},
        {{0, 0, 3, 3, 10}, {1, 1, 3, 3, 10}, 4.0 / 14, 4.0 / 9, 0, 1},
        {{0, 0, 8, 2, 14}, {0, 0, 2, 8, 7}, 4.0 / 28, 0.25, 1, 0.5},
        {{1, 0, 2, 4, 6}, {0, 0, 4, 2, 4}, 4.0 / 12, 0.5, 0.5, 4.0 / 6},
        {{0.25, 0, 0.5, 1, 10}, {0, 0, 1, 1, 10}, 0.5, 0.5, 0, 1},
        {{0, 0, 100, 100, 50}, {0, 0, 10, 10, 40}, 0.01, 1, 0.25, 0.8},
        {{5, 5, 10, 10, 25}, {10, 10, 10, 10, 20}, 25.0 / 175, 0.25, 0.25, 0.8},
        {{1.5, 0, 1, 1, 10}, {0, 0, 2, 2, 10}, 0, 0, 0, 1},
        {{1, 0, 1, 1, 10}, {0, 0, 2, 2, 10}, 0.5 / 4.5, 0.125, 0, 1},
        {{0, 0, 2, 2, 3}, {0, 0, 2, 2, 4}, 1, 1, -0.25, 1},
        {{0, 0, 2, 2, 6}, {0, 0, 2, 2, 4}, 1, 1, 0.5, 2.0 / 3},
        {{0, 0, 2, 2, 8}, {0, 0, 2, 2, 4}, 1, 1, 1, 0.5},
        {{0, 0, 2, 2, 12}, {0, 0, 2, 2, 4}, 1, 1, 1, 1.0 / 3},
        {{0, 0, 2, 2, 2}, {0, 0, 2, 2, 8}, 1, 1, -0.75, 1},
        {{10, 10, 4, 4, 9}, {11, 11, 4, 4, 10}, 9.0 / 23, 9.0 / 16, -0.1, 1},
        {{0, 0, 2, 10, 10}, {0, 4, 2, 2, 10}, 0.2, 1, 0, 1},
    };
    double worst = 0.0;
    for (const Case& c : cases) {
      worst = std::max(worst, std::abs(iou(c.p, c.g) - c.iou));
      worst = std::max(worst, std::abs(iog(c.p, c.g) - c.iog));
      worst = std::max(worst, std::abs(rdd(c.p.d, c.g.d) - c.rdd));
      worst = std::max(worst, std::abs(dr(c.p.d, c.g.d) - c.dr));
      worst = std::max(worst, std::abs(usc_pair(c.p, c.g) - c.iog * c.dr));
    }
    return Verdict{std::size(cases) == 30 && worst <= 1e-9,
                   fmt("%zu cases, max error %.3g (tol 1e-9)", std::size(cases), worst)};
  });

  run(2, "hungarian equals permutation minimum on 5x5", 5, [] {
    Rng rng(2024);
    int agree = 0;
    for (int trial = 0; trial < 100; ++trial) {
      CostMatrix c(5, 5);
      for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t k = 0; k < 5; ++k) c(r, k) = rng.uniform(0, 100);
      agree += std::abs(assignment_cost(c, hungarian(c)) - oracle::brute_force_assignment(c)) < 1e-9;
    }
    return Verdict{agree == 100, fmt("%d/100 matrices agree", agree)};
  });

  run(3, "centroid matches 1e5-sample integration", 30, [] {
    Rng rng(303);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const FISConfig fis = oracle::random_fis(rng);
      const std::vector<double> x{rng.uniform(-1, 1), rng.uniform(0, 1)};
      worst = std::max(worst, std::abs(infer(fis, x) - oracle::integrate_centroid(fis, x)));
    }
    return Verdict{worst <= 1e-3, fmt("200 cases, max |diff| %.2e (tol 1e-3)", worst)};
  });

  run(4, "gradient scaling of the normalized inverse", 5, [] {
    Rng rng(404);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const double d0 = rng.uniform(5, 20), gx = rng.uniform(-0.1, 0.1), gy = rng.uniform(0.02, 0.2);
      DepthMap d(96, 96);
      for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x) d.at(x, y) = static_cast<float>(d0 + 5 + gx * (x - 48) + gy * y);
      const IntensityImage img = normalize(invert(d));
      double lo = 1e300, hi = 0;
      for (int y = 1; y < 95; ++y)
        for (int x = 1; x < 95; ++x) {
          const double gi = 0.5 * std::hypot(img.at(x + 1, y) - img.at(x - 1, y),
                                             img.at(x, y + 1) - img.at(x, y - 1));
          const double D = d.at(x, y);
          const double ratio = gi * D * D / std::hypot(gx, gy);
          lo = std::min(lo, ratio);
          hi = std::max(hi, ratio);
        }
      worst = std::max(worst, (hi - lo) / lo);
    }
    return Verdict{worst < 0.01, fmt("max relative spread %.3g%% (limit 1%%)", 100 * worst)};
  });

  run(5, "retrieval recall on synthetic scenes", 60, [] {
    const SceneConfig cfg;
    const DepthMap mean = scene_mean_map(cfg);
    const RetrievalConfig rc;
    int injected = 0, recovered = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const SyntheticScene scene = generate_scene(cfg, seed);
      const ObjectList found = retrieve_safety_critical(scene.depth, mean, rc);
      for (const Object25D& g : scene.objects()) {
        if (g.d > rc.max_depth) continue;
        ++injected;
        for (const Object25D& f : found)
          if (iou(f, g) >= 0.7 && std::abs(f.d - g.d) <= 0.5) {
            ++recovered;
            break;
          }
      }
    }
    SceneConfig empty_cfg = cfg;
    empty_cfg.min_objects = empty_cfg.max_objects = 0;
    std::size_t spurious = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
      spurious += retrieve_safety_critical(generate_scene(empty_cfg, seed).depth, mean, rc).size();
    const double recall = static_cast<double>(recovered) / injected;
    return Verdict{recall >= 0.95 && spurious == 0,
                   fmt("recall %.4f (%d/%d, need >= 0.95), %zu objects on empty scenes", recall,
                       recovered, injected, spurious)};
  });

  run(6, "correlation trend on the perturbation harness", 120, [] {
    const MatchThresholds strict{0.5, 0.1}, loose{0.3, 0.2};
    PerturbationConfig clean;
    const auto f0 = generate_eval_frames(clean, 606);
    const auto s0 = correlation_experiment(f0, strict);
    const auto l0 = correlation_experiment(f0, loose);
    const double zero_min = std::min({s0.r_iou, s0.r_rdd, l0.r_iou, l0.r_rdd});

    PerturbationConfig moderate;
    moderate.retrieval_noise = 0.2;
    const auto f1 = generate_eval_frames(moderate, 606);
    const auto s1 = correlation_experiment(f1, strict);
    const auto l1 = correlation_experiment(f1, loose);
    const double gain = std::min(l1.r_iou - s1.r_iou, l1.r_rdd - s1.r_rdd);
    return Verdict{zero_min >= 0.9 && gain >= 0.03,
                   fmt("noise 0: min r %.3f (need >= 0.9); noise 0.2: strict (%.3f, %.3f) -> loose "
                       "(%.3f, %.3f), min gain %.3f (need >= 0.03)",
                       zero_min, s1.r_iou, s1.r_rdd, l1.r_iou, l1.r_rdd, gain)};
  });

  run(7, "FIS optimization efficacy", 180, [] {
    const FISConfig base = default_fis();
    OptimizerConfig opt;
    opt.seed = 7;

    // Risk rises with RDD and falls with IoU; differs from the handcrafted
    // table in six cells.
    const RuleTable oracle_table{{{kLow, kLow, kLow}, {kMedium, kMedium, kLow}, {kHigh, kHigh, kMedium}}};
    const auto rule_data = samples_from(with_rule_table(base, oracle_table), 500, 71);
    learned_fis = learn_rules(base, rule_data, opt);
    const bool exact = rule_table(learned_fis) == oracle_table;
    const bool rules_no_worse = fis_rmse(learned_fis, rule_data) <= fis_rmse(base, rule_data);

    FISConfig shifted = base;
    auto& high = shifted.inputs[0].terms[kHigh].mf;
    high.a += 0.2;
    high.b += 0.2;
    const auto train = samples_from(shifted, 500, 72);
    const auto valid = samples_from(shifted, 500, 73);
    const FISConfig tuned = tune_mfs(base, train, opt);
    const double before = fis_rmse(base, valid), after = fis_rmse(tuned, valid);
    const double gain = 1.0 - after / before;
    const bool mf_no_worse = fis_rmse(tuned, train) <= fis_rmse(base, train);
    return Verdict{exact && rules_no_worse && gain >= 0.2 && mf_no_worse,
                   fmt("rule table %s; validation RMSE %.4f -> %.4f (%.1f%%, need >= 20%%); "
                       "training RMSE no worse: rules %s, MFs %s",
                       exact ? "recovered" : "NOT recovered", before, after, 100 * gain,
                       rules_no_worse ? "yes" : "no", mf_no_worse ? "yes" : "no")};
  });

  run(8, "risk non-decreasing in RDD", 10, [] {
    const double d = monotonicity_violation(default_fis());
    const double l = learned_fis.rules.empty() ? 1.0 : monotonicity_violation(learned_fis);
    return Verdict{d <= 1e-9 && l <= 1e-9,
                   fmt("max violation default %.2e, learned %.2e (tol 1e-9)", d, l)};
  });

  run(9, "closed-loop shield", 300, [] {
    const FISConfig fis = default_fis();
    const RetrievalConfig rc;
    const MatchThresholds t{0.3, 0.2};
    SweepConfig sweep;
    sweep.runs = 100;
    ScenarioConfig noisy;
    noisy.seed = 9000;
    noisy.detector_miss_prob = 0.5;
    noisy.detector_depth_noise = 0.05;

    auto count = [](const std::vector<SweepRow>& rows) {
      int n = 0;
      for (const SweepRow& r : rows) n += r.outcome.collided;
      return n;
    };
    ScenarioConfig baseline = noisy;
    baseline.shield_enabled = false;
    const int base_hits = count(run_sweep(baseline, sweep, fis, rc, t));
    const int shield_hits = count(run_sweep(noisy, sweep, fis, rc, t));

    ScenarioConfig blind = noisy;
    blind.detector_miss_prob = 1.0;
    blind.detector_depth_noise = 0.0;
    const int blind_hits = count(run_sweep(blind, sweep, fis, rc, t));
    const double braking = sweep.speed_max * sweep.speed_max / (2 * noisy.decel);

    return Verdict{base_hits >= 90 && shield_hits <= 20 && blind_hits == 0 && braking < rc.max_depth,
                   fmt("baseline collisions %d%% (need >= 90%%); shielded avoidance %d%% (need >= "
                       "80%%); blind detector avoidance %d%% (need 100%%); braking distance %.1f m "
                       "< %.0f m",
                       base_hits, 100 - shield_hits, 100 - blind_hits, braking, rc.max_depth)};
  });

  run(10, "byte-identical CLI reruns", 240, [&] {
    fs::remove_all(work);
    fs::create_directories(work);
    const std::string q = "\"" + cli + "\"";
    const fs::path data = work / "data";
    auto sh = [&](const std::string& args) {
      const std::string cmd = q + " " + args + " 2>&1";
      if (std::system(cmd.c_str()) != 0) throw std::runtime_error("command failed: " + args);
    };
    sh("--seed 5 demo-data --frames 30 -o \"" + data.string() + "\"");
    const std::string cfg = "--config \"" + (data / "config.json").string() + "\" --seed 5 ";
    const std::string frames = "\"" + (data / "frames.jsonl").string() + "\"";
    sh(cfg + "targets " + frames + " -o \"" + (work / "targets.csv").string() + "\"");

    std::vector<std::string> names;
    for (int pass = 0; pass < 2; ++pass) {
      const std::string p = std::to_string(pass);
      const auto out = [&](const char* name) {
        return "\"" + (work / (std::string(name) + p)).string() + "\"";
      };
      sh(cfg + "monitor " + frames + " -o " + out("monitor.csv"));
      sh(cfg + "fit-fis --mode learn-rules --samples \"" + (work / "targets.csv").string() + "\" -o " +
         out("rules.json"));
      sh(cfg + "fit-fis --mode tune-mf --samples \"" + (work / "targets.csv").string() + "\" -o " +
         out("mfs.json"));
      sh(cfg + "simulate --runs 10 --miss-prob 0.5 -o " + out("outcomes.csv"));
    }
    int same = 0;
    std::string diffs;
    for (const char* name : {"monitor.csv", "rules.json", "mfs.json", "outcomes.csv"}) {
      const std::string a = slurp(work / (std::string(name) + "0"));
      const std::string b = slurp(work / (std::string(name) + "1"));
      if (!a.empty() && a == b) ++same;
      else diffs += std::string(" ") + name;
    }
    return Verdict{same == 4, fmt("%d/4 outputs identical%s", same, diffs.c_str())};
  });

  std::printf("%s: %d criterion(s) failed\n", failures ? "FAILED" : "OK", failures);
  return failures ? EXIT_FAILURE : EXIT_SUCCESS;
}
