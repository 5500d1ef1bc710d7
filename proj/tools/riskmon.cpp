// riskmon: command-line front end for the perception risk monitor.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "riskmon/pipeline.hpp"
#include "riskmon/random.hpp"
#include "riskmon/synthetic.hpp"

namespace fs = std::filesystem;
using namespace riskmon;

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<double> beta;
};

// Config paths are relative to the config file.
std::string resolve_against(const std::string& path, const fs::path& dir) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (dir / path).string();
}

PipelineConfig effective_config(const GlobalOptions& g) {
  PipelineConfig cfg;
  if (!g.config.empty()) {
    cfg = load_config(g.config);
    const fs::path dir = fs::path(g.config).parent_path();
    cfg.fis = resolve_against(cfg.fis, dir);
    cfg.mean_map = resolve_against(cfg.mean_map, dir);
  }
  if (g.seed) {
    cfg.optimizer.seed = *g.seed;
    cfg.scenario.seed = *g.seed;
  }
  if (g.alpha) cfg.thresholds.alpha = *g.alpha;
  if (g.beta) cfg.thresholds.beta = *g.beta;
  cfg.validate();
  return cfg;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

FISConfig select_fis(const std::string& flag, const PipelineConfig& cfg) {
  const std::string& path = flag.empty() ? cfg.fis : flag;
  return path.empty() ? default_fis() : load_fis(path);
}

DepthMap select_mean_map(const std::string& flag, const PipelineConfig& cfg) {
  const std::string& path = flag.empty() ? cfg.mean_map : flag;
  if (path.empty()) throw std::runtime_error("no mean map given (--mean-map or config mean_map)");
  return load_depth_map(path);
}

nlohmann::ordered_json objects_json(const ObjectList& objects) {
  auto arr = nlohmann::ordered_json::array();
  for (const Object25D& o : objects)
    arr.push_back({{"cx", o.cx}, {"cy", o.cy}, {"w", o.w}, {"h", o.h}, {"d", o.d}});
  return arr;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(9) << v;
  return ss.str();
}

// Synthetic detector: ground truth with box and depth jitter, occasionally
// missed. Harder conditions get noisier detections.
ObjectList detect(const ObjectList& truths, double miss, double jitter, Rng& rng) {
  ObjectList out;
  for (const Object25D& g : truths) {
    const bool missed = rng.bernoulli(miss);
    Object25D p = g;
    p.cx += jitter * g.w * rng.normal();
    p.cy += jitter * g.h * rng.normal();
    p.d *= std::max(0.2, 1.0 + jitter * rng.normal());
    if (!missed) out.push_back(p);
  }
  return out;
}

void write_demo_data(const fs::path& dir, int frames, std::uint64_t seed) {
  const SceneConfig scene_cfg;
  fs::create_directories(dir / "depth");
  save_depth_map(scene_mean_map(scene_cfg), dir / "mean_map.dm01");

  const CameraModel cam{300.0, 300.0, scene_cfg.width / 2.0, scene_cfg.height / 2.0,
                        scene_cfg.width, scene_cfg.height};
  struct Condition {
    const char* name;
    double miss;
    double jitter;
  };
  const Condition conditions[] = {{"clear", 0.1, 0.05}, {"rain", 0.3, 0.15}, {"night", 0.5, 0.3}};

  Rng detector(seed ^ 0xD1B54A32D192ED03ull);
  std::ofstream jsonl = open_output(dir / "frames.jsonl");
  for (int i = 0; i < frames; ++i) {
    const Condition& c = conditions[i % 3];
    const SyntheticScene scene = generate_scene(scene_cfg, seed + static_cast<std::uint64_t>(i));
    std::ostringstream name;
    name << "depth/frame_" << std::setw(4) << std::setfill('0') << i << ".dm01";
    save_depth_map(scene.depth, dir / name.str());

    FrameRecord f;
    f.frame_id = "frame_" + std::to_string(i);
    f.condition = c.name;
    f.depth_map = name.str();
    f.camera = cam;
    f.ground_truths = scene.objects();
    f.predictions = detect(scene.objects(), c.miss, c.jitter, detector);
    jsonl << frame_to_json(f) << '\n';
  }

  PipelineConfig cfg;
  cfg.mean_map = "mean_map.dm01";
  std::ofstream out = open_output(dir / "config.json");
  out << config_to_json(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perception risk monitor: depth-based object retrieval, alignment and fuzzy risk"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config, "Pipeline configuration JSON")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Override optimizer and scenario seeds");
  app.add_option("--alpha", g.alpha, "IoU matching threshold override");
  app.add_option("--beta", g.beta, "RDD matching threshold override");

  // retrieve
  auto* retrieve = app.add_subcommand("retrieve", "Depth maps to 2.5-D objects JSON");
  std::vector<std::string> depth_files;
  std::string mean_map_path, out_path;
  retrieve->add_option("depth", depth_files, "DM01 depth maps")->required()->check(CLI::ExistingFile);
  retrieve->add_option("--mean-map", mean_map_path, "Mean inverse map");
  retrieve->add_option("-o,--out", out_path, "Output JSON")->required();

  // mean-map
  auto* mean_map = app.add_subcommand("mean-map", "Average inverted depth maps");
  std::vector<std::string> mean_inputs;
  std::string dataset_path;
  mean_map->add_option("depth", mean_inputs, "DM01 depth maps")->check(CLI::ExistingFile);
  mean_map->add_option("--dataset", dataset_path, "Use every depth map of a dataset");
  mean_map->add_option("-o,--out", out_path, "Output DM01 file")->required();

  // monitor
  auto* monitor = app.add_subcommand("monitor", "Per-frame risk CSV");
  std::string fis_path;
  monitor->add_option("dataset", dataset_path, "Frame JSONL")->required();
  monitor->add_option("--mean-map", mean_map_path, "Mean inverse map");
  monitor->add_option("--fis", fis_path, "FIS JSON (default: handcrafted)");
  monitor->add_option("-o,--out", out_path, "Output CSV")->required();

  // targets
  auto* targets = app.add_subcommand("targets", "Tuning samples CSV");
  targets->add_option("dataset", dataset_path, "Frame JSONL")->required();
  targets->add_option("--mean-map", mean_map_path, "Mean inverse map");
  targets->add_option("-o,--out", out_path, "Output CSV")->required();

  // fit-fis
  auto* fit = app.add_subcommand("fit-fis", "Build or optimize a FIS");
  std::string mode = "handcrafted", samples_path;
  fit->add_option("--mode", mode, "handcrafted | tune-mf | learn-rules")
      ->check(CLI::IsMember({"handcrafted", "tune-mf", "learn-rules"}));
  fit->add_option("--samples", samples_path, "Tuning CSV (optimizing modes)");
  fit->add_option("--init", fis_path, "Initial FIS JSON (default: handcrafted)");
  fit->add_option("-o,--out", out_path, "Output FIS JSON")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Correlation, recall and RMSE reports");
  std::string out_dir;
  eval->add_option("dataset", dataset_path, "Frame JSONL")->required();
  eval->add_option("--mean-map", mean_map_path, "Mean inverse map");
  eval->add_option("--fis", fis_path, "FIS JSON (default: handcrafted)");
  eval->add_option("-o,--out-dir", out_dir, "Report directory")->required();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Closed-loop scenario sweep");
  std::optional<int> runs;
  std::optional<double> miss_prob, depth_noise;
  bool baseline = false;
  std::string trace_path;
  simulate->add_option("--fis", fis_path, "FIS JSON (default: handcrafted)");
  simulate->add_option("--runs", runs, "Number of scenarios");
  simulate->add_option("--miss-prob", miss_prob, "Detector miss probability");
  simulate->add_option("--depth-noise", depth_noise, "Relative detector depth noise");
  simulate->add_flag("--baseline", baseline, "Disable the shield");
  simulate->add_option("--trace", trace_path, "Risk trace CSV of the first run");
  simulate->add_option("-o,--out", out_path, "Outcomes CSV")->required();

  // demo-data
  auto* demo = app.add_subcommand("demo-data", "Write the synthetic corpus");
  int demo_frames = 60;
  demo->add_option("--frames", demo_frames, "Number of frames")->check(CLI::PositiveNumber);
  demo->add_option("-o,--out-dir", out_dir, "Corpus directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "riskmon: " << e.what() << '\n';
    return 2;
  }

  try {
    const PipelineConfig cfg = effective_config(g);

    if (*retrieve) {
      const DepthMap mean = select_mean_map(mean_map_path, cfg);
      auto doc = nlohmann::ordered_json::array();
      for (const std::string& path : depth_files) {
        try {
          const DepthMap depth = load_depth_map(path);
          doc.push_back({{"depth_map", path},
                         {"objects", objects_json(retrieve_safety_critical(depth, mean, cfg.retrieval))}});
        } catch (const std::exception& e) {
          throw std::runtime_error(path + ": " + e.what());
        }
      }
      open_output(out_path) << doc.dump(2) << '\n';
    } else if (*mean_map) {
      std::vector<std::string> paths = mean_inputs;
      if (!dataset_path.empty())
        for (const FrameRecord& f : load_dataset(dataset_path)) paths.push_back(f.depth_path.string());
      if (paths.empty()) throw std::runtime_error("mean-map needs depth maps or --dataset");
      std::vector<DepthMap> inv;
      for (const std::string& p : paths) {
        try {
          inv.push_back(invert(load_depth_map(p), cfg.retrieval.invert_epsilon));
        } catch (const std::exception& e) {
          throw std::runtime_error(p + ": " + e.what());
        }
      }
      save_depth_map(mean_inverse_map(inv), out_path);
    } else if (*monitor) {
      const auto frames = load_dataset(dataset_path);
      const auto rows = run_monitor(frames, cfg, select_mean_map(mean_map_path, cfg),
                                    select_fis(fis_path, cfg));
      auto out = open_output(out_path);
      write_monitor_csv(out, rows);
    } else if (*targets) {
      const auto samples =
          build_targets(load_dataset(dataset_path), cfg, select_mean_map(mean_map_path, cfg));
      auto out = open_output(out_path);
      write_samples_csv(out, samples);
    } else if (*fit) {
      FISConfig fis = select_fis(fis_path, cfg);
      if (mode != "handcrafted") {
        if (samples_path.empty()) throw std::runtime_error("--samples is required for " + mode);
        const auto samples = load_samples_csv(samples_path);
        OptimizerConfig opt = cfg.optimizer;
        if (mode == "tune-mf") {
          opt.mode = TuningMode::kMfTuning;
          fis = tune_mfs(fis, samples, opt);
        } else {
          opt.mode = TuningMode::kRuleLearning;
          fis = learn_rules(fis, samples, opt);
        }
      }
      open_output(out_path) << to_json(fis);
    } else if (*eval) {
      const auto frames = load_dataset(dataset_path);
      const DepthMap mean = select_mean_map(mean_map_path, cfg);
      const auto eval_frames = to_eval_frames(frames, cfg, mean);
      const MatchThresholds strict{0.5, 0.1};
      const MatchThresholds& loose = cfg.thresholds;

      auto corr = open_output(fs::path(out_dir) / "correlation.csv");
      corr << "thresholds,alpha,beta,r_iou,r_rdd\n";
      for (const auto& [label, t] : {std::pair{"strict", strict}, std::pair{"loose", loose}}) {
        const CorrelationResult r = correlation_experiment(eval_frames, t);
        corr << label << ',' << fmt(t.alpha) << ',' << fmt(t.beta) << ',' << fmt(r.r_iou) << ','
             << fmt(r.r_rdd) << '\n';
      }

      auto recall = open_output(fs::path(out_dir) / "recall.csv");
      write_recall_csv(recall, recall_analysis(eval_frames, strict, loose));

      const auto samples = build_targets(frames, cfg, mean);
      auto err = open_output(fs::path(out_dir) / "rmse.csv");
      err << "frames,rmse\n" << samples.size() << ',' << fmt(fis_rmse(select_fis(fis_path, cfg), samples)) << '\n';
    } else if (*simulate) {
      ScenarioConfig scenario = cfg.scenario;
      SweepConfig sweep = cfg.sweep;
      if (runs) sweep.runs = *runs;
      if (miss_prob) scenario.detector_miss_prob = *miss_prob;
      if (depth_noise) scenario.detector_depth_noise = *depth_noise;
      if (baseline) scenario.shield_enabled = false;
      const auto rows =
          run_sweep(scenario, sweep, select_fis(fis_path, cfg), cfg.retrieval, cfg.thresholds);
      auto out = open_output(out_path);
      write_outcomes_csv(out, rows);
      if (!trace_path.empty() && !rows.empty()) {
        auto trace = open_output(trace_path);
        write_trace_csv(trace, rows.front().outcome, scenario.dt);
      }
    } else if (*demo) {
      write_demo_data(out_dir, demo_frames, g.seed.value_or(0));
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& ch : msg)
      if (ch == '\n' || ch == '\r') ch = ' ';
    std::cerr << "riskmon: error: " << msg << '\n';
    return 1;
  }
  return 0;
}
