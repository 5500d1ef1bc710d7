#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "riskmon/pipeline.hpp"
#include "riskmon/synthetic.hpp"

using namespace riskmon;
namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path dir;
  Workspace() : dir(fs::temp_directory_path() / "riskmon_pipeline_test") {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return dir / name;
  }
};

const char* kLine =
    R"({"frame_id":"f0","condition":"day","depth_map":"d.dm01",)"
    R"("camera":{"fx":300.0,"fy":300.0,"cx":160.0,"cy":120.0,"width":320,"height":240},)"
    R"("predictions":[{"center":[0.0,0.0,10.0],"size":[2.0,2.0,2.0],"yaw":0.0,"score":0.9}],)"
    R"("ground_truths":[{"cx":160.0,"cy":120.0,"w":60.0,"h":60.0,"d":9.0}]})";

}  // namespace

TEST_CASE("dataset loading") {
  Workspace ws;
  save_depth_map(DepthMap(320, 240, 30.0f), ws.dir / "d.dm01");
  CHECK(load_dataset(ws.write("empty.jsonl", "")).empty());

  const auto frames = load_dataset(ws.write("one.jsonl", std::string(kLine) + "\n"));
  REQUIRE(frames.size() == 1);
  CHECK(frames[0].depth_path == ws.dir / "d.dm01");
  CHECK(std::holds_alternative<std::vector<Box3D>>(frames[0].predictions));
  CHECK(nlohmann::json::parse(frame_to_json(frames[0])) == nlohmann::json::parse(kLine));

  std::string no_depth = kLine;
  no_depth.replace(no_depth.find("\"depth_map\""), 21, "");
  try {
    load_dataset(ws.write("bad.jsonl", std::string(kLine) + "\n" + no_depth + "\n"));
    FAIL("expected an error");
  } catch (const DatasetError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(":2:") != std::string::npos);
    CHECK(msg.find("depth_map") != std::string::npos);
  }

  std::string missing_file = kLine;
  missing_file.replace(missing_file.find("d.dm01"), 6, "x.dm01");
  CHECK_THROWS_AS(load_dataset(ws.write("missing.jsonl", missing_file)), DatasetError);

  std::string mixed = kLine;
  mixed.replace(mixed.find("\"ground_truths\":["), 17,
                R"("ground_truths":[{"center":[0,0,5],"size":[1,1,1]},)");
  CHECK_THROWS_AS(load_dataset(ws.write("mixed.jsonl", mixed)), DatasetError);
  CHECK_THROWS_AS(load_dataset(ws.write("junk.jsonl", "{oops")), DatasetError);
}

TEST_CASE("monitor rows for empty and unmatched frames") {
  Workspace ws;
  const SceneConfig scene;
  const DepthMap ramp = ground_ramp(scene.width, scene.height, scene.near_depth, scene.far_depth);
  const DepthMap mean = scene_mean_map(scene);
  save_depth_map(ramp, ws.dir / "empty.dm01");
  save_depth_map(render_rectangles(ramp, {{100, 60, 139, 99, 10.0}}), ws.dir / "obj.dm01");

  FrameRecord a;
  a.frame_id = "a";
  a.condition = "day";
  a.depth_path = ws.dir / "empty.dm01";
  a.camera = {300, 300, 160, 120, 320, 240};
  FrameRecord b = a;
  b.frame_id = "b";
  b.depth_path = ws.dir / "obj.dm01";

  const PipelineConfig cfg;
  const FISConfig fis = default_fis();
  const auto rows = run_monitor({a, b}, cfg, mean, fis);
  REQUIRE(rows.size() == 2);
  const std::array<double, 2> low{0.0, 1.0}, high{1.0, 0.0};
  CHECK(rows[0].mean_iou == 1.0);
  CHECK(rows[0].mean_rdd == 0.0);
  CHECK(rows[0].risk == doctest::Approx(infer(fis, low)));
  CHECK(rows[1].mean_iou == 0.0);
  CHECK(rows[1].mean_rdd == 1.0);
  CHECK(rows[1].risk == doctest::Approx(infer(fis, high)));

  std::ostringstream first, second;
  write_monitor_csv(first, rows);
  write_monitor_csv(second, run_monitor({a, b}, cfg, mean, fis));
  CHECK(first.str() == second.str());

  FrameRecord broken = a;
  broken.frame_id = "broken";
  broken.depth_path = ws.dir / "none.dm01";
  try {
    run_monitor({a, broken}, cfg, mean, fis);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("broken") != std::string::npos);
  }
}

TEST_CASE("targets") {
  Workspace ws;
  const SceneConfig scene;
  const DepthMap ramp = ground_ramp(scene.width, scene.height, scene.near_depth, scene.far_depth);
  const RectObject rect{100, 60, 139, 99, 10.0};
  save_depth_map(render_rectangles(ramp, {rect}), ws.dir / "obj.dm01");
  const DepthMap mean = scene_mean_map(scene);
  const ObjectList retrieved =
      retrieve_safety_critical(load_depth_map(ws.dir / "obj.dm01"), mean, RetrievalConfig{});
  REQUIRE(retrieved.size() == 1);

  FrameRecord f;
  f.frame_id = "f";
  f.condition = "day";
  f.depth_path = ws.dir / "obj.dm01";
  f.camera = {300, 300, 160, 120, 320, 240};
  f.predictions = retrieved;
  f.ground_truths = retrieved;
  FrameRecord blind = f;
  blind.predictions = ObjectList{};

  const auto samples = build_targets({f, blind}, PipelineConfig{}, mean);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].mean_iou == doctest::Approx(1.0));
  CHECK(samples[0].mean_rdd == 0.0);
  CHECK(samples[0].target == doctest::Approx(0.0));
  CHECK(samples[1].mean_iou == 0.0);
  CHECK(samples[1].mean_rdd == 1.0);
  CHECK(samples[1].target == 1.0);
}

TEST_CASE("config parsing") {
  const PipelineConfig d = config_from_json("{}");
  CHECK(d.thresholds.alpha == 0.3);
  CHECK(d.thresholds.beta == 0.2);
  const PipelineConfig back = config_from_json(config_to_json(d));
  CHECK(config_to_json(back) == config_to_json(d));
  const PipelineConfig c = config_from_json(
      R"({"thresholds":{"alpha":0.5},"optimizer":{"mode":"learn-rules","generations":7},)"
      R"("scenario":{"obstacle_kind":"crossing"}})");
  CHECK(c.thresholds.alpha == 0.5);
  CHECK(c.optimizer.mode == TuningMode::kRuleLearning);
  CHECK(c.optimizer.swarm.iterations == 7);
  CHECK(c.scenario.obstacle_kind == ObstacleKind::kCrossing);
  CHECK_THROWS(config_from_json(R"({"thresholds":{"alpha":2}})"));
  CHECK_THROWS(config_from_json(R"({"optimizer":{"mode":"gradient"}})"));
  CHECK_THROWS(config_from_json("[1,"));
}
