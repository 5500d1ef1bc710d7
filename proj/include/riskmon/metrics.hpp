#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "riskmon/alignment.hpp"
#include "riskmon/object.hpp"

namespace riskmon {

struct UscScore {
  std::vector<std::pair<std::size_t, double>> per_gt;
  double mean_usc = 1.0;
  double target = 0.0;  ///< 1 - mean_usc
};

/// IoG(p, g) * DR(d_p, d_g).
double usc_pair(const Object25D& p, const Object25D& g);

/// Frame-level USC: matched ground truths score usc_pair, the rest 0.
UscScore usc_frame(const ObjectList& preds, const ObjectList& gts,
                   const MatchThresholds& t);

/// Sample Pearson correlation. Throws on length mismatch, fewer than two
/// samples, or a constant series.
double pearson(std::span<const double> xs, std::span<const double> ys);

double rmse(std::span<const double> est, std::span<const double> tgt);

/// One frame of an offline evaluation: detector predictions P, depth-retrieved
/// objects S and annotations G.
struct EvalFrame {
  std::string frame_id;
  std::string condition;
  ObjectList predictions;
  ObjectList retrieved;
  ObjectList ground_truths;
};

struct CorrelationResult {
  double r_iou = 0.0;
  double r_rdd = 0.0;
};

/// Pearson r between per-frame alignment of P against S and of P against G.
CorrelationResult correlation_experiment(std::span<const EvalFrame> frames,
                                         const MatchThresholds& t);

struct RetrievalCount {
  std::size_t retrieved = 0;
  std::size_t total = 0;
  double ratio() const {
    return total == 0 ? 0.0 : static_cast<double>(retrieved) / static_cast<double>(total);
  }
};

struct RecallReport {
  std::string condition;
  std::string thresholds;  ///< "strict" or "loose"
  MatchThresholds t;
  std::size_t gt_count = 0;
  std::size_t retrieved_by_s = 0;
  std::size_t retrieved_by_p = 0;
  RetrievalCount approved_tp;    ///< detector TPs also recovered by S
  RetrievalCount identified_fn;  ///< detector FNs recovered by S

  double recall_s() const {
    return gt_count == 0 ? 0.0 : static_cast<double>(retrieved_by_s) / gt_count;
  }
  double recall_p() const {
    return gt_count == 0 ? 0.0 : static_cast<double>(retrieved_by_p) / gt_count;
  }
};

/// Per condition (in order of first appearance) and per threshold setting
/// (strict first, then loose).
std::vector<RecallReport> recall_analysis(std::span<const EvalFrame> frames,
                                          const MatchThresholds& t_strict,
                                          const MatchThresholds& t_loose);

}  // namespace riskmon
