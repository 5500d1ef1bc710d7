#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "riskmon/fuzzy.hpp"
#include "riskmon/optimize.hpp"

namespace riskmon {

struct TrainingSample {
  std::string frame_id;
  std::string condition;
  double mean_iou = 1.0;
  double mean_rdd = 0.0;
  double target = 0.0;  ///< 1 - USC-tilde
};

inline constexpr const char* kSampleCsvHeader = "frame_id,condition,mean_iou,mean_rdd,target";

void write_samples_csv(std::ostream& out, std::span<const TrainingSample> samples);
std::vector<TrainingSample> read_samples_csv(std::istream& in);
std::vector<TrainingSample> load_samples_csv(const std::string& path);

enum class TuningMode { kMfTuning, kRuleLearning };

struct OptimizerConfig {
  TuningMode mode = TuningMode::kMfTuning;
  int folds = 5;
  std::uint64_t seed = 0;
  PatternSearchConfig pattern;  ///< used by tune_mfs
  SwarmConfig swarm;            ///< used by learn_rules; its seed is overridden by `seed`
};

/// Seeded random partition of [0, n) into k folds whose sizes differ by at
/// most one.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k,
                                                  std::uint64_t seed);

/// Root mean squared error of the system over the samples (inputs rdd, iou).
double fis_rmse(const FISConfig& fis, std::span<const TrainingSample> data);

/// Mean over folds of the per-fold validation RMSE.
double fis_cv_rmse(const FISConfig& fis, std::span<const TrainingSample> data,
                   const std::vector<std::vector<std::size_t>>& folds);

/// Flattens all membership-function vertices (inputs, then output).
std::vector<double> mf_parameters(const FISConfig& fis);
/// Writes vertices back, sorting each quadruple and clamping to the domain.
FISConfig apply_mf_parameters(FISConfig fis, std::span<const double> params);

/// Pattern search over all MF vertices minimizing cross-validated RMSE. The
/// rule base is unchanged.
FISConfig tune_mfs(const FISConfig& fis, std::span<const TrainingSample> data,
                   const OptimizerConfig& cfg);

/// Particle swarm over the 3x3 consequent table (each cell encoded in [0, 3)
/// and decoded by floor) minimizing training RMSE. The current table is
/// injected as the first particle. Membership functions are unchanged.
FISConfig learn_rules(const FISConfig& fis, std::span<const TrainingSample> data,
                      const OptimizerConfig& cfg);

}  // namespace riskmon
