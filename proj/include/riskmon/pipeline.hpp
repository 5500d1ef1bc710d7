#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "riskmon/alignment.hpp"
#include "riskmon/fuzzy.hpp"
#include "riskmon/geometry.hpp"
#include "riskmon/metrics.hpp"
#include "riskmon/retrieval.hpp"
#include "riskmon/simulator.hpp"
#include "riskmon/tuning.hpp"

namespace riskmon {

/// An object list in exactly one representation: 3-D boxes or 2.5-D objects.
using ObjectSet = std::variant<ObjectList, std::vector<Box3D>>;

/// 3-D boxes are projected on demand; boxes behind the camera or outside
/// the image are skipped.
ObjectList resolve_objects(const ObjectSet& set, const CameraModel& cam);

struct FrameRecord {
  std::string frame_id;
  std::string condition;
  std::string depth_map;            ///< as written in the dataset
  std::filesystem::path depth_path; ///< resolved against the dataset directory
  CameraModel camera;
  ObjectSet predictions;
  ObjectSet ground_truths;
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses one JSONL line. `base_dir` resolves relative depth paths.
FrameRecord parse_frame(const std::string& line, const std::filesystem::path& base_dir);
std::string frame_to_json(const FrameRecord& frame);

/// Reads a JSON-Lines dataset. Errors name the offending line; every
/// referenced depth file must exist.
std::vector<FrameRecord> load_dataset(const std::filesystem::path& path);

struct PipelineConfig {
  MatchThresholds thresholds{0.3, 0.2};
  RetrievalConfig retrieval;
  std::string fis;       ///< FIS JSON path; empty selects the handcrafted system
  std::string mean_map;  ///< DM01 mean inverse map
  OptimizerConfig optimizer;
  ScenarioConfig scenario;
  SweepConfig sweep;

  void validate() const;
};

PipelineConfig config_from_json(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const PipelineConfig& cfg);

struct MonitorRow {
  std::string frame_id;
  std::string condition;
  double mean_iou = 1.0;
  double mean_rdd = 0.0;
  double risk = 0.0;
};

/// Loads each frame's depth map and retrieves its safety-critical objects.
std::vector<ObjectList> retrieve_frames(const std::vector<FrameRecord>& frames,
                                        const DepthMap& mean_inv, const RetrievalConfig& cfg);

/// retrieve -> project predictions -> align -> infer, one row per frame in
/// input order.
std::vector<MonitorRow> run_monitor(const std::vector<FrameRecord>& frames,
                                    const PipelineConfig& cfg, const DepthMap& mean_inv,
                                    const FISConfig& fis);

/// Alignment of predictions against retrieved objects, with 1 - USC-tilde of
/// predictions against ground truths as target.
std::vector<TrainingSample> build_targets(const std::vector<FrameRecord>& frames,
                                          const PipelineConfig& cfg,
                                          const DepthMap& mean_inv);

std::vector<EvalFrame> to_eval_frames(const std::vector<FrameRecord>& frames,
                                      const PipelineConfig& cfg, const DepthMap& mean_inv);

void write_monitor_csv(std::ostream& out, const std::vector<MonitorRow>& rows);
void write_outcomes_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_trace_csv(std::ostream& out, const ScenarioOutcome& outcome, double dt);
void write_recall_csv(std::ostream& out, const std::vector<RecallReport>& reports);

}  // namespace riskmon
