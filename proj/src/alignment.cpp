#include "riskmon/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "riskmon/geometry.hpp"

namespace riskmon {
namespace {

// Requires rows <= cols. Classic potentials formulation with 1-based
// sentinel column 0.
Assignment hungarian_wide(const CostMatrix& a) {
  const std::size_t n = a.rows();
  const std::size_t m = a.cols();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment out;
  for (std::size_t j = 1; j <= m; ++j)
    if (p[j] != 0) out.emplace_back(p[j] - 1, j - 1);
  std::sort(out.begin(), out.end());
  return out;
}

double center_distance(const Object25D& a, const Object25D& b) {
  return std::hypot(a.cx - b.cx, a.cy - b.cy);
}

}  // namespace

Assignment hungarian(const CostMatrix& cost) {
  if (cost.rows() == 0 || cost.cols() == 0) return {};
  for (std::size_t r = 0; r < cost.rows(); ++r)
    for (std::size_t c = 0; c < cost.cols(); ++c)
      if (!std::isfinite(cost(r, c)))
        throw std::invalid_argument("hungarian: non-finite cost");
  if (cost.rows() <= cost.cols()) return hungarian_wide(cost);

  CostMatrix t(cost.cols(), cost.rows());
  for (std::size_t r = 0; r < cost.rows(); ++r)
    for (std::size_t c = 0; c < cost.cols(); ++c) t(c, r) = cost(r, c);
  Assignment out = hungarian_wide(t);
  for (auto& [r, c] : out) std::swap(r, c);
  std::sort(out.begin(), out.end());
  return out;
}

double assignment_cost(const CostMatrix& cost, const Assignment& a) {
  double total = 0.0;
  for (const auto& [r, c] : a) total += cost(r, c);
  return total;
}

void MatchThresholds::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
}

std::vector<MatchedPair> match_objects(const ObjectList& preds, const ObjectList& refs,
                                       const MatchThresholds& t) {
  t.validate();
  std::vector<MatchedPair> pairs;
  if (preds.empty() || refs.empty()) return pairs;

  CostMatrix cost(preds.size(), refs.size());
  for (std::size_t i = 0; i < preds.size(); ++i)
    for (std::size_t j = 0; j < refs.size(); ++j)
      cost(i, j) = center_distance(preds[i], refs[j]);

  for (const auto& [pi, ri] : hungarian(cost)) {
    const double o = iou(preds[pi], refs[ri]);
    const double r = rdd(preds[pi].d, refs[ri].d);
    if (o > t.alpha && std::abs(r) < t.beta) pairs.push_back({pi, ri, o, r});
  }
  return pairs;
}

AlignmentResult align_frame(const ObjectList& preds, const ObjectList& refs,
                            const MatchThresholds& t) {
  AlignmentResult res;
  res.pairs = match_objects(preds, refs, t);

  std::vector<char> ref_used(refs.size(), 0), pred_used(preds.size(), 0);
  double sum_iou = 0.0;
  double sum_rdd = 0.0;
  for (const MatchedPair& p : res.pairs) {
    ref_used[p.reference] = 1;
    pred_used[p.prediction] = 1;
    sum_iou += p.iou;
    sum_rdd += p.rdd;
  }
  for (std::size_t j = 0; j < refs.size(); ++j)
    if (!ref_used[j]) {
      res.unmatched_refs.push_back(j);
      sum_rdd += 1.0;
    }
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (!pred_used[i]) res.unmatched_preds.push_back(i);

  if (!refs.empty()) {
    const double n = static_cast<double>(refs.size());
    res.mean_iou = sum_iou / n;
    res.mean_rdd = sum_rdd / n;
  }
  return res;
}

}  // namespace riskmon
