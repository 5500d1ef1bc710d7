#include "riskmon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "riskmon/geometry.hpp"

namespace riskmon {

double usc_pair(const Object25D& p, const Object25D& g) {
  return iog(p, g) * dr(p.d, g.d);
}

UscScore usc_frame(const ObjectList& preds, const ObjectList& gts,
                   const MatchThresholds& t) {
  UscScore out;
  if (gts.empty()) return out;

  std::vector<double> score(gts.size(), 0.0);
  for (const MatchedPair& m : match_objects(preds, gts, t))
    score[m.reference] = usc_pair(preds[m.prediction], gts[m.reference]);

  double sum = 0.0;
  for (std::size_t j = 0; j < gts.size(); ++j) {
    out.per_gt.emplace_back(j, score[j]);
    sum += score[j];
  }
  out.mean_usc = sum / static_cast<double>(gts.size());
  out.target = 1.0 - out.mean_usc;
  return out;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("pearson: length mismatch");
  if (xs.size() < 2) throw std::invalid_argument("pearson: need at least two samples");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw std::invalid_argument("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double rmse(std::span<const double> est, std::span<const double> tgt) {
  if (est.size() != tgt.size()) throw std::invalid_argument("rmse: length mismatch");
  if (est.empty()) throw std::invalid_argument("rmse: empty series");
  double acc = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double e = est[i] - tgt[i];
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(est.size()));
}

CorrelationResult correlation_experiment(std::span<const EvalFrame> frames,
                                         const MatchThresholds& t) {
  std::vector<double> iou_s, iou_g, rdd_s, rdd_g;
  for (const EvalFrame& f : frames) {
    const AlignmentResult vs_s = align_frame(f.predictions, f.retrieved, t);
    const AlignmentResult vs_g = align_frame(f.predictions, f.ground_truths, t);
    iou_s.push_back(vs_s.mean_iou);
    rdd_s.push_back(vs_s.mean_rdd);
    iou_g.push_back(vs_g.mean_iou);
    rdd_g.push_back(vs_g.mean_rdd);
  }
  return {pearson(iou_s, iou_g), pearson(rdd_s, rdd_g)};
}

std::vector<RecallReport> recall_analysis(std::span<const EvalFrame> frames,
                                          const MatchThresholds& t_strict,
                                          const MatchThresholds& t_loose) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const EvalFrame*>> by_condition;
  for (const EvalFrame& f : frames) {
    if (f.condition.empty())
      throw std::invalid_argument("recall_analysis: frame '" + f.frame_id +
                                  "' has no condition label");
    auto [it, inserted] = by_condition.try_emplace(f.condition);
    if (inserted) order.push_back(f.condition);
    it->second.push_back(&f);
  }

  auto matched_refs = [](const ObjectList& preds, const ObjectList& refs,
                         const MatchThresholds& t) {
    std::vector<char> hit(refs.size(), 0);
    for (const MatchedPair& m : match_objects(preds, refs, t)) hit[m.reference] = 1;
    return hit;
  };

  std::vector<RecallReport> out;
  for (const std::string& cond : order) {
    for (const auto& [label, t] : {std::pair{"strict", t_strict}, std::pair{"loose", t_loose}}) {
      RecallReport rep;
      rep.condition = cond;
      rep.thresholds = label;
      rep.t = t;
      for (const EvalFrame* f : by_condition[cond]) {
        const auto by_s = matched_refs(f->retrieved, f->ground_truths, t);
        const auto by_p = matched_refs(f->predictions, f->ground_truths, t);
        for (std::size_t j = 0; j < f->ground_truths.size(); ++j) {
          ++rep.gt_count;
          rep.retrieved_by_s += by_s[j];
          rep.retrieved_by_p += by_p[j];
          RetrievalCount& bucket = by_p[j] ? rep.approved_tp : rep.identified_fn;
          ++bucket.total;
          bucket.retrieved += by_s[j];
        }
      }
      out.push_back(std::move(rep));
    }
  }
  return out;
}

}  // namespace riskmon
