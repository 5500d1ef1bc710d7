#include "riskmon/pipeline.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace riskmon {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// Runs fn(i) for i in [0, n) on a small worker pool. Results are written by
// index, so output order never depends on scheduling. The exception of the
// lowest failing index is rethrown.
template <class Fn>
void parallel_for(std::size_t n, Fn fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run(i);
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

template <class Fn>
auto with_frame_context(const FrameRecord& f, Fn fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw std::runtime_error("frame '" + f.frame_id + "': " + e.what());
  }
}

double number_field(const json& j, const char* key) {
  if (!j.contains(key)) throw DatasetError(std::string("missing field '") + key + "'");
  if (!j[key].is_number()) throw DatasetError(std::string("field '") + key + "' must be a number");
  return j[key].get<double>();
}

std::array<double, 3> triple_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3)
    throw DatasetError(std::string("field '") + key + "' must be a 3-element array");
  return {j[key][0].get<double>(), j[key][1].get<double>(), j[key][2].get<double>()};
}

ObjectSet parse_objects(const json& j, const char* key) {
  if (!j.contains(key)) throw DatasetError(std::string("missing field '") + key + "'");
  const json& arr = j[key];
  if (!arr.is_array()) throw DatasetError(std::string("field '") + key + "' must be an array");
  if (arr.empty()) return ObjectList{};

  const bool three_d = arr[0].contains("center");
  if (three_d) {
    std::vector<Box3D> boxes;
    for (const json& o : arr) {
      if (!o.contains("center"))
        throw DatasetError(std::string("field '") + key + "' mixes 3-D and 2.5-D objects");
      Box3D b;
      b.center = triple_field(o, "center");
      b.size = triple_field(o, "size");
      if (!(b.size[0] > 0 && b.size[1] > 0 && b.size[2] > 0))
        throw DatasetError(std::string("field '") + key + "': box sizes must be > 0");
      b.yaw = o.contains("yaw") ? number_field(o, "yaw") : 0.0;
      b.score = o.contains("score") ? number_field(o, "score") : 1.0;
      boxes.push_back(b);
    }
    return boxes;
  }
  ObjectList objects;
  for (const json& o : arr) {
    if (o.contains("center"))
      throw DatasetError(std::string("field '") + key + "' mixes 3-D and 2.5-D objects");
    Object25D obj{number_field(o, "cx"), number_field(o, "cy"), number_field(o, "w"),
                  number_field(o, "h"), number_field(o, "d")};
    if (!(obj.w > 0 && obj.h > 0 && obj.d > 0))
      throw DatasetError(std::string("field '") + key + "': w, h and d must be > 0");
    objects.push_back(obj);
  }
  return objects;
}

ojson objects_to_json(const ObjectSet& set) {
  ojson arr = ojson::array();
  if (const auto* objs = std::get_if<ObjectList>(&set)) {
    for (const Object25D& o : *objs)
      arr.push_back({{"cx", o.cx}, {"cy", o.cy}, {"w", o.w}, {"h", o.h}, {"d", o.d}});
  } else {
    for (const Box3D& b : std::get<std::vector<Box3D>>(set))
      arr.push_back({{"center", b.center}, {"size", b.size}, {"yaw", b.yaw}, {"score", b.score}});
  }
  return arr;
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(9) << v;
  return ss.str();
}

}  // namespace

ObjectList resolve_objects(const ObjectSet& set, const CameraModel& cam) {
  if (const auto* objs = std::get_if<ObjectList>(&set)) return *objs;
  ObjectList out;
  for (const Box3D& b : std::get<std::vector<Box3D>>(set))
    if (auto o = project_box3d(b, cam)) out.push_back(*o);
  return out;
}

FrameRecord parse_frame(const std::string& line, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DatasetError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw DatasetError("frame must be a JSON object");

  FrameRecord f;
  try {
    for (const char* key : {"frame_id", "condition", "depth_map"})
      if (!j.contains(key) || !j[key].is_string())
        throw DatasetError(std::string("missing field '") + key + "'");
    f.frame_id = j["frame_id"].get<std::string>();
    f.condition = j["condition"].get<std::string>();
    f.depth_map = j["depth_map"].get<std::string>();
    const std::filesystem::path p(f.depth_map);
    f.depth_path = p.is_absolute() ? p : base_dir / p;

    if (!j.contains("camera") || !j["camera"].is_object())
      throw DatasetError("missing field 'camera'");
    const json& c = j["camera"];
    f.camera.fx = number_field(c, "fx");
    f.camera.fy = number_field(c, "fy");
    f.camera.cx = number_field(c, "cx");
    f.camera.cy = number_field(c, "cy");
    f.camera.width = static_cast<int>(number_field(c, "width"));
    f.camera.height = static_cast<int>(number_field(c, "height"));
    f.camera.validate();

    f.predictions = parse_objects(j, "predictions");
    f.ground_truths = parse_objects(j, "ground_truths");
  } catch (const json::exception& e) {
    throw DatasetError(std::string("schema violation: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DatasetError(e.what());
  }
  return f;
}

std::string frame_to_json(const FrameRecord& f) {
  ojson j;
  j["frame_id"] = f.frame_id;
  j["condition"] = f.condition;
  j["depth_map"] = f.depth_map;
  j["camera"] = {{"fx", f.camera.fx}, {"fy", f.camera.fy}, {"cx", f.camera.cx},
                 {"cy", f.camera.cy}, {"width", f.camera.width}, {"height", f.camera.height}};
  j["predictions"] = objects_to_json(f.predictions);
  j["ground_truths"] = objects_to_json(f.ground_truths);
  return j.dump();
}

std::vector<FrameRecord> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset: " + path.string());
  const std::filesystem::path base = path.parent_path();
  std::vector<FrameRecord> frames;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      FrameRecord f = parse_frame(line, base);
      if (!std::filesystem::exists(f.depth_path))
        throw DatasetError("depth map not found: " + f.depth_path.string());
      frames.push_back(std::move(f));
    } catch (const DatasetError& e) {
      throw DatasetError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return frames;
}

void PipelineConfig::validate() const {
  thresholds.validate();
  retrieval.validate();
  scenario.validate();
  if (optimizer.folds < 2) throw std::invalid_argument("optimizer: folds must be >= 2");
  if (optimizer.pattern.max_iterations < 1 || optimizer.swarm.iterations < 1)
    throw std::invalid_argument("optimizer: iterations must be >= 1");
}

PipelineConfig config_from_json(const std::string& text) {
  PipelineConfig cfg;
  try {
    const json j = json::parse(text);
    if (j.contains("thresholds")) {
      const json& t = j["thresholds"];
      cfg.thresholds.alpha = t.value("alpha", cfg.thresholds.alpha);
      cfg.thresholds.beta = t.value("beta", cfg.thresholds.beta);
    }
    if (j.contains("retrieval")) {
      const json& r = j["retrieval"];
      RetrievalConfig& rc = cfg.retrieval;
      rc.canny_low = r.value("canny_low", rc.canny_low);
      rc.canny_high = r.value("canny_high", rc.canny_high);
      rc.min_box_area = r.value("min_box_area", rc.min_box_area);
      rc.max_depth = r.value("max_depth", rc.max_depth);
      rc.blur_radius = r.value("blur_radius", rc.blur_radius);
      rc.invert_epsilon = r.value("invert_epsilon", rc.invert_epsilon);
    }
    cfg.fis = j.value("fis", std::string{});
    cfg.mean_map = j.value("mean_map", std::string{});
    if (j.contains("optimizer")) {
      const json& o = j["optimizer"];
      OptimizerConfig& oc = cfg.optimizer;
      const std::string mode = o.value("mode", std::string("tune-mf"));
      if (mode == "tune-mf") oc.mode = TuningMode::kMfTuning;
      else if (mode == "learn-rules") oc.mode = TuningMode::kRuleLearning;
      else throw std::invalid_argument("optimizer.mode must be tune-mf or learn-rules");
      oc.folds = o.value("folds", oc.folds);
      oc.seed = o.value("seed", oc.seed);
      oc.pattern.max_iterations = o.value("iterations", oc.pattern.max_iterations);
      oc.pattern.initial_mesh = o.value("initial_mesh", oc.pattern.initial_mesh);
      oc.pattern.min_mesh = o.value("min_mesh", oc.pattern.min_mesh);
      oc.swarm.swarm_size = o.value("swarm_size", oc.swarm.swarm_size);
      oc.swarm.iterations = o.value("generations", oc.swarm.iterations);
    }
    if (j.contains("scenario")) {
      const json& s = j["scenario"];
      ScenarioConfig& sc = cfg.scenario;
      sc.ego_speed0 = s.value("ego_speed0", sc.ego_speed0);
      sc.obstacle_distance0 = s.value("obstacle_distance0", sc.obstacle_distance0);
      const std::string kind = s.value("obstacle_kind", std::string("static"));
      if (kind == "static") sc.obstacle_kind = ObstacleKind::kStatic;
      else if (kind == "crossing") sc.obstacle_kind = ObstacleKind::kCrossing;
      else throw std::invalid_argument("scenario.obstacle_kind must be static or crossing");
      sc.detector_miss_prob = s.value("detector_miss_prob", sc.detector_miss_prob);
      sc.detector_depth_noise = s.value("detector_depth_noise", sc.detector_depth_noise);
      sc.shield_threshold = s.value("shield_threshold", sc.shield_threshold);
      sc.decel = s.value("decel", sc.decel);
      sc.dt = s.value("dt", sc.dt);
      sc.horizon = s.value("horizon", sc.horizon);
      sc.seed = s.value("seed", sc.seed);
      sc.shield_enabled = s.value("shield_enabled", sc.shield_enabled);
      sc.lateral_offset0 = s.value("lateral_offset0", sc.lateral_offset0);
      sc.lateral_speed = s.value("lateral_speed", sc.lateral_speed);
    }
    if (j.contains("sweep")) {
      const json& s = j["sweep"];
      SweepConfig& w = cfg.sweep;
      w.runs = s.value("runs", w.runs);
      w.speed_min = s.value("speed_min", w.speed_min);
      w.speed_max = s.value("speed_max", w.speed_max);
      w.gap_min = s.value("gap_min", w.gap_min);
      w.gap_max = s.value("gap_max", w.gap_max);
      w.crossing_fraction = s.value("crossing_fraction", w.crossing_fraction);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return config_from_json(ss.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::string config_to_json(const PipelineConfig& cfg) {
  const RetrievalConfig& r = cfg.retrieval;
  const OptimizerConfig& o = cfg.optimizer;
  const ScenarioConfig& s = cfg.scenario;
  const SweepConfig& w = cfg.sweep;
  ojson j;
  j["thresholds"] = {{"alpha", cfg.thresholds.alpha}, {"beta", cfg.thresholds.beta}};
  j["retrieval"] = {{"canny_low", r.canny_low},       {"canny_high", r.canny_high},
                    {"min_box_area", r.min_box_area}, {"max_depth", r.max_depth},
                    {"blur_radius", r.blur_radius},   {"invert_epsilon", r.invert_epsilon}};
  j["fis"] = cfg.fis;
  j["mean_map"] = cfg.mean_map;
  j["optimizer"] = {{"mode", o.mode == TuningMode::kMfTuning ? "tune-mf" : "learn-rules"},
                    {"folds", o.folds},
                    {"seed", o.seed},
                    {"iterations", o.pattern.max_iterations},
                    {"initial_mesh", o.pattern.initial_mesh},
                    {"min_mesh", o.pattern.min_mesh},
                    {"swarm_size", o.swarm.swarm_size},
                    {"generations", o.swarm.iterations}};
  j["scenario"] = {{"ego_speed0", s.ego_speed0},
                   {"obstacle_distance0", s.obstacle_distance0},
                   {"obstacle_kind", s.obstacle_kind == ObstacleKind::kStatic ? "static" : "crossing"},
                   {"detector_miss_prob", s.detector_miss_prob},
                   {"detector_depth_noise", s.detector_depth_noise},
                   {"shield_threshold", s.shield_threshold},
                   {"decel", s.decel},
                   {"dt", s.dt},
                   {"horizon", s.horizon},
                   {"seed", s.seed},
                   {"shield_enabled", s.shield_enabled},
                   {"lateral_offset0", s.lateral_offset0},
                   {"lateral_speed", s.lateral_speed}};
  j["sweep"] = {{"runs", w.runs},       {"speed_min", w.speed_min}, {"speed_max", w.speed_max},
                {"gap_min", w.gap_min}, {"gap_max", w.gap_max},
                {"crossing_fraction", w.crossing_fraction}};
  return j.dump(2) + "\n";
}

std::vector<ObjectList> retrieve_frames(const std::vector<FrameRecord>& frames,
                                        const DepthMap& mean_inv, const RetrievalConfig& cfg) {
  std::vector<ObjectList> out(frames.size());
  parallel_for(frames.size(), [&](std::size_t i) {
    out[i] = with_frame_context(frames[i], [&] {
      const DepthMap depth = load_depth_map(frames[i].depth_path);
      if (!depth.same_shape(mean_inv))
        throw std::invalid_argument("depth map and mean map differ in size");
      return retrieve_safety_critical(depth, mean_inv, cfg);
    });
  });
  return out;
}

std::vector<MonitorRow> run_monitor(const std::vector<FrameRecord>& frames,
                                    const PipelineConfig& cfg, const DepthMap& mean_inv,
                                    const FISConfig& fis) {
  const InferenceEngine engine(fis);
  const std::vector<ObjectList> refs = retrieve_frames(frames, mean_inv, cfg.retrieval);
  std::vector<MonitorRow> rows(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FrameRecord& f = frames[i];
    rows[i] = with_frame_context(f, [&] {
      const ObjectList preds = resolve_objects(f.predictions, f.camera);
      const AlignmentResult a = align_frame(preds, refs[i], cfg.thresholds);
      const std::array<double, 2> x{a.mean_rdd, a.mean_iou};
      return MonitorRow{f.frame_id, f.condition, a.mean_iou, a.mean_rdd, engine(x)};
    });
  }
  return rows;
}

std::vector<TrainingSample> build_targets(const std::vector<FrameRecord>& frames,
                                          const PipelineConfig& cfg,
                                          const DepthMap& mean_inv) {
  const std::vector<ObjectList> refs = retrieve_frames(frames, mean_inv, cfg.retrieval);
  std::vector<TrainingSample> out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FrameRecord& f = frames[i];
    out.push_back(with_frame_context(f, [&] {
      const ObjectList preds = resolve_objects(f.predictions, f.camera);
      const ObjectList gts = resolve_objects(f.ground_truths, f.camera);
      const AlignmentResult a = align_frame(preds, refs[i], cfg.thresholds);
      const UscScore usc = usc_frame(preds, gts, cfg.thresholds);
      return TrainingSample{f.frame_id, f.condition, a.mean_iou, a.mean_rdd, usc.target};
    }));
  }
  return out;
}

std::vector<EvalFrame> to_eval_frames(const std::vector<FrameRecord>& frames,
                                      const PipelineConfig& cfg, const DepthMap& mean_inv) {
  const std::vector<ObjectList> refs = retrieve_frames(frames, mean_inv, cfg.retrieval);
  std::vector<EvalFrame> out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FrameRecord& f = frames[i];
    out.push_back({f.frame_id, f.condition, resolve_objects(f.predictions, f.camera), refs[i],
                   resolve_objects(f.ground_truths, f.camera)});
  }
  return out;
}

void write_monitor_csv(std::ostream& out, const std::vector<MonitorRow>& rows) {
  out << "frame_id,condition,mean_iou,mean_rdd,risk\n";
  for (const MonitorRow& r : rows)
    out << r.frame_id << ',' << r.condition << ',' << format_double(r.mean_iou) << ','
        << format_double(r.mean_rdd) << ',' << format_double(r.risk) << '\n';
}

void write_outcomes_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "seed,collided,min_gap,stop_time\n";
  for (const SweepRow& r : rows)
    out << r.seed << ',' << (r.outcome.collided ? 1 : 0) << ',' << format_double(r.outcome.min_gap)
        << ',' << (r.outcome.stop_time ? format_double(*r.outcome.stop_time) : std::string{})
        << '\n';
}

void write_trace_csv(std::ostream& out, const ScenarioOutcome& outcome, double dt) {
  out << "step,t,risk\n";
  for (std::size_t k = 0; k < outcome.risk_trace.size(); ++k)
    out << k << ',' << format_double(static_cast<double>(k) * dt) << ','
        << format_double(outcome.risk_trace[k]) << '\n';
}

void write_recall_csv(std::ostream& out, const std::vector<RecallReport>& reports) {
  out << "condition,thresholds,alpha,beta,gts,recall_s,recall_p,approved_tp,tp_total,"
         "identified_fn,fn_total\n";
  for (const RecallReport& r : reports)
    out << r.condition << ',' << r.thresholds << ',' << format_double(r.t.alpha) << ','
        << format_double(r.t.beta) << ',' << r.gt_count << ',' << format_double(r.recall_s())
        << ',' << format_double(r.recall_p()) << ',' << r.approved_tp.retrieved << ','
        << r.approved_tp.total << ',' << r.identified_fn.retrieved << ','
        << r.identified_fn.total << '\n';
}

}  // namespace riskmon
