#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "riskmon/pipeline.hpp"
#include "riskmon/synthetic.hpp"

namespace py = pybind11;
using namespace riskmon;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

DepthMap to_map(const FloatArray& a) {
  if (a.ndim() != 2) throw std::invalid_argument("depth array must be 2-D (rows, cols)");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  return DepthMap(w, h, std::vector<float>(a.data(), a.data() + a.size()));
}

FloatArray to_array(const DepthMap& m) {
  FloatArray out({m.height, m.width});
  std::copy(m.data.begin(), m.data.end(), out.mutable_data());
  return out;
}

FISConfig fis_or_default(const std::optional<std::string>& json) {
  return json ? fis_from_json(*json) : default_fis();
}

}  // namespace

PYBIND11_MODULE(riskmon, m) {
  m.doc() = "Perception risk monitor: depth-based object retrieval, alignment and fuzzy risk.";

  py::class_<Object25D>(m, "Object25D")
      .def(py::init<double, double, double, double, double>(), py::arg("cx"), py::arg("cy"),
           py::arg("w"), py::arg("h"), py::arg("d"))
      .def_readwrite("cx", &Object25D::cx)
      .def_readwrite("cy", &Object25D::cy)
      .def_readwrite("w", &Object25D::w)
      .def_readwrite("h", &Object25D::h)
      .def_readwrite("d", &Object25D::d)
      .def("__eq__", [](const Object25D& a, const Object25D& b) { return a == b; })
      .def("__repr__", [](const Object25D& o) {
        return "Object25D(cx=" + std::to_string(o.cx) + ", cy=" + std::to_string(o.cy) +
               ", w=" + std::to_string(o.w) + ", h=" + std::to_string(o.h) +
               ", d=" + std::to_string(o.d) + ")";
      });

  py::class_<CameraModel>(m, "CameraModel")
      .def(py::init([](double fx, double fy, double cx, double cy, int width, int height) {
             CameraModel c{fx, fy, cx, cy, width, height};
             c.validate();
             return c;
           }),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"), py::arg("width"),
           py::arg("height"));

  py::class_<Box3D>(m, "Box3D")
      .def(py::init([](std::array<double, 3> center, std::array<double, 3> size, double yaw,
                       double score) { return Box3D{center, size, yaw, score}; }),
           py::arg("center"), py::arg("size"), py::arg("yaw") = 0.0, py::arg("score") = 1.0)
      .def_readwrite("center", &Box3D::center)
      .def_readwrite("size", &Box3D::size)
      .def_readwrite("yaw", &Box3D::yaw)
      .def_readwrite("score", &Box3D::score);

  m.def("iou", &iou, py::arg("a"), py::arg("b"));
  m.def("iog", &iog, py::arg("p"), py::arg("g"));
  m.def("rdd", &rdd, py::arg("d_p"), py::arg("d_s"));
  m.def("dr", &dr, py::arg("d_p"), py::arg("d_g"));
  m.def("usc_pair", &usc_pair, py::arg("p"), py::arg("g"));
  m.def("project_box3d", &project_box3d, py::arg("box"), py::arg("camera"),
        "2.5-D object of a camera-frame box, or None when it is not visible.");

  m.def(
      "hungarian",
      [](const std::vector<std::vector<double>>& rows) {
        const std::size_t cols = rows.empty() ? 0 : rows[0].size();
        CostMatrix c(rows.size(), cols);
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (rows[r].size() != cols) throw std::invalid_argument("ragged cost matrix");
          for (std::size_t k = 0; k < cols; ++k) c(r, k) = rows[r][k];
        }
        return hungarian(c);
      },
      py::arg("cost"), "Minimum-cost assignment as (row, col) pairs.");

  m.def(
      "align_frame",
      [](const ObjectList& preds, const ObjectList& refs, double alpha, double beta) {
        const MatchThresholds t{alpha, beta};
        t.validate();
        const AlignmentResult r = align_frame(preds, refs, t);
        py::list pairs;
        for (const MatchedPair& p : r.pairs)
          pairs.append(py::make_tuple(p.prediction, p.reference, p.iou, p.rdd));
        py::dict out;
        out["mean_iou"] = r.mean_iou;
        out["mean_rdd"] = r.mean_rdd;
        out["pairs"] = pairs;
        out["unmatched_refs"] = r.unmatched_refs;
        out["unmatched_preds"] = r.unmatched_preds;
        return out;
      },
      py::arg("predictions"), py::arg("references"), py::arg("alpha") = 0.3,
      py::arg("beta") = 0.2);

  m.def("default_fis_json", [] { return to_json(default_fis()); });
  m.def(
      "infer",
      [](double mean_rdd, double mean_iou, const std::optional<std::string>& fis) {
        const std::array<double, 2> x{mean_rdd, mean_iou};
        return infer(fis_or_default(fis), x);
      },
      py::arg("mean_rdd"), py::arg("mean_iou"), py::arg("fis_json") = py::none(),
      "Risk for one frame; the handcrafted system unless a FIS JSON is given.");

  m.def("load_depth_map", [](const std::string& path) { return to_array(load_depth_map(path)); });
  m.def(
      "save_depth_map",
      [](const FloatArray& a, const std::string& path) { save_depth_map(to_map(a), path); },
      py::arg("depth"), py::arg("path"));
  m.def(
      "mean_inverse_map",
      [](const std::vector<FloatArray>& maps) {
        std::vector<DepthMap> inv;
        for (const auto& a : maps) inv.push_back(invert(to_map(a)));
        return to_array(mean_inverse_map(inv));
      },
      py::arg("depth_maps"), "Pixel-wise mean of the inverted depth maps.");
  m.def(
      "retrieve",
      [](const FloatArray& depth, const FloatArray& mean_inv, double max_depth) {
        RetrievalConfig cfg;
        cfg.max_depth = max_depth;
        return retrieve_safety_critical(to_map(depth), to_map(mean_inv), cfg);
      },
      py::arg("depth"), py::arg("mean_inverse"), py::arg("max_depth") = 20.0,
      "Safety-critical 2.5-D objects of a metric depth map.");

  m.def(
      "synthetic_scene",
      [](std::uint64_t seed) {
        const SceneConfig cfg;
        const SyntheticScene s = generate_scene(cfg, seed);
        return py::make_tuple(to_array(s.depth), s.objects(), to_array(scene_mean_map(cfg)));
      },
      py::arg("seed"), "(depth, injected objects, mean inverse map) of a seeded scene.");

  m.def(
      "run_scenario",
      [](double speed, double gap, double miss_prob, double depth_noise, bool shield,
         std::uint64_t seed) {
        ScenarioConfig cfg;
        cfg.ego_speed0 = speed;
        cfg.obstacle_distance0 = gap;
        cfg.detector_miss_prob = miss_prob;
        cfg.detector_depth_noise = depth_noise;
        cfg.shield_enabled = shield;
        cfg.seed = seed;
        const ScenarioOutcome o = run_scenario(cfg, default_fis(), RetrievalConfig{}, {0.3, 0.2});
        py::dict out;
        out["collided"] = o.collided;
        out["min_gap"] = o.min_gap;
        out["stop_time"] = o.stop_time;
        out["shield_triggered"] = o.shield_triggered;
        out["risk_trace"] = o.risk_trace;
        return out;
      },
      py::arg("speed") = 10.0, py::arg("gap") = 40.0, py::arg("miss_prob") = 0.0,
      py::arg("depth_noise") = 0.05, py::arg("shield") = true, py::arg("seed") = 0);
}
