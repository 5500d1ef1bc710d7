#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "riskmon/object.hpp"

namespace riskmon {

/// Minimum-cost assignment on a dense row-major cost matrix.
class CostMatrix {
 public:
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

using Assignment = std::vector<std::pair<std::size_t, std::size_t>>;

/// Hungarian algorithm (shortest augmenting paths with potentials), O(n^2 m).
/// Returns min(rows, cols) (row, col) pairs sorted by row.
Assignment hungarian(const CostMatrix& cost);

double assignment_cost(const CostMatrix& cost, const Assignment& a);

struct MatchThresholds {
  double alpha = 0.5;  ///< a pair needs IoU > alpha
  double beta = 0.1;   ///< and |RDD| < beta

  void validate() const;
};

struct MatchedPair {
  std::size_t prediction = 0;
  std::size_t reference = 0;
  double iou = 0.0;
  double rdd = 0.0;
};

struct AlignmentResult {
  std::vector<MatchedPair> pairs;
  std::vector<std::size_t> unmatched_refs;
  std::vector<std::size_t> unmatched_preds;
  double mean_iou = 1.0;
  double mean_rdd = 0.0;
};

/// Center-distance Hungarian matching followed by threshold filtering.
/// Pairs failing IoU > alpha or |RDD| < beta are dissolved.
std::vector<MatchedPair> match_objects(const ObjectList& preds, const ObjectList& refs,
                                       const MatchThresholds& t);

/// Matches predictions against references and averages (IoU, RDD) over all
/// references, scoring unmatched references (0, 1). With no references the
/// result is (1, 0).
AlignmentResult align_frame(const ObjectList& preds, const ObjectList& refs,
                            const MatchThresholds& t);

}  // namespace riskmon
