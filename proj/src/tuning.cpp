#include "riskmon/tuning.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "riskmon/random.hpp"

namespace riskmon {

void write_samples_csv(std::ostream& out, std::span<const TrainingSample> samples) {
  out << kSampleCsvHeader << '\n';
  out << std::setprecision(17);
  for (const TrainingSample& s : samples)
    out << s.frame_id << ',' << s.condition << ',' << s.mean_iou << ',' << s.mean_rdd << ','
        << s.target << '\n';
}

std::vector<TrainingSample> read_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("samples csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSampleCsvHeader)
    throw std::invalid_argument(std::string("samples csv: expected header '") +
                                kSampleCsvHeader + "'");

  std::vector<TrainingSample> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 5)
      throw std::invalid_argument("samples csv line " + std::to_string(lineno) +
                                  ": expected 5 fields");
    TrainingSample s;
    s.frame_id = fields[0];
    s.condition = fields[1];
    try {
      s.mean_iou = std::stod(fields[2]);
      s.mean_rdd = std::stod(fields[3]);
      s.target = std::stod(fields[4]);
    } catch (const std::exception&) {
      throw std::invalid_argument("samples csv line " + std::to_string(lineno) +
                                  ": non-numeric value");
    }
    if (!(s.mean_iou >= 0.0 && s.mean_iou <= 1.0) || !(s.mean_rdd >= -1.0 && s.mean_rdd <= 1.0) ||
        !(s.target >= 0.0 && s.target <= 1.0))
      throw std::invalid_argument("samples csv line " + std::to_string(lineno) +
                                  ": value out of range");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TrainingSample> load_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open samples file: " + path);
  return read_samples_csv(in);
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k,
                                                  std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold_split: need at least two folds");
  if (n < k) throw std::invalid_argument("kfold_split: fewer samples than folds");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(idx[i], idx[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)))]);

  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t i = 0; i < n; ++i) folds[i % k].push_back(idx[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

namespace {

std::vector<double> predict(const FISConfig& fis, std::span<const TrainingSample> data) {
  const InferenceEngine engine(fis);
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::array<double, 2> x{data[i].mean_rdd, data[i].mean_iou};
    out[i] = engine(x);
  }
  return out;
}

std::string mode_name(TuningMode m) {
  return m == TuningMode::kMfTuning ? "tune-mf" : "learn-rules";
}

}  // namespace

double fis_rmse(const FISConfig& fis, std::span<const TrainingSample> data) {
  if (data.empty()) throw std::invalid_argument("fis_rmse: no samples");
  const std::vector<double> est = predict(fis, data);
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double e = est[i] - data[i].target;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(data.size()));
}

double fis_cv_rmse(const FISConfig& fis, std::span<const TrainingSample> data,
                   const std::vector<std::vector<std::size_t>>& folds) {
  const std::vector<double> est = predict(fis, data);
  double total = 0.0;
  for (const auto& fold : folds) {
    double acc = 0.0;
    for (std::size_t i : fold) {
      const double e = est[i] - data[i].target;
      acc += e * e;
    }
    total += std::sqrt(acc / static_cast<double>(fold.size()));
  }
  return total / static_cast<double>(folds.size());
}

std::vector<double> mf_parameters(const FISConfig& fis) {
  std::vector<double> p;
  auto add = [&](const FuzzyVariable& v) {
    for (const FuzzyTerm& t : v.terms) p.insert(p.end(), {t.mf.a, t.mf.b, t.mf.c, t.mf.d});
  };
  for (const auto& v : fis.inputs) add(v);
  add(fis.output);
  return p;
}

FISConfig apply_mf_parameters(FISConfig fis, std::span<const double> params) {
  std::size_t k = 0;
  auto set = [&](FuzzyVariable& v) {
    for (FuzzyTerm& t : v.terms) {
      if (k + 4 > params.size()) throw std::invalid_argument("apply_mf_parameters: too few params");
      std::array<double, 4> q{params[k], params[k + 1], params[k + 2], params[k + 3]};
      k += 4;
      for (double& x : q) x = std::clamp(x, v.lo, v.hi);
      std::sort(q.begin(), q.end());
      t.mf = {q[0], q[1], q[2], q[3]};
    }
  };
  for (auto& v : fis.inputs) set(v);
  set(fis.output);
  if (k != params.size()) throw std::invalid_argument("apply_mf_parameters: too many params");
  return fis;
}

FISConfig tune_mfs(const FISConfig& fis, std::span<const TrainingSample> data,
                   const OptimizerConfig& cfg) {
  fis.validate();
  if (data.empty()) throw std::invalid_argument("tune_mfs: no training samples");
  const auto folds = kfold_split(data.size(), static_cast<std::size_t>(cfg.folds), cfg.seed);

  Bounds bounds;
  auto add_bounds = [&](const FuzzyVariable& v) {
    for (std::size_t t = 0; t < v.terms.size(); ++t)
      for (int i = 0; i < 4; ++i) {
        bounds.lo.push_back(v.lo);
        bounds.hi.push_back(v.hi);
      }
  };
  for (const auto& v : fis.inputs) add_bounds(v);
  add_bounds(fis.output);

  const Objective objective = [&](std::span<const double> p) {
    const FISConfig candidate = apply_mf_parameters(fis, p);
    try {
      candidate.validate();
    } catch (const std::invalid_argument&) {
      return std::numeric_limits<double>::infinity();
    }
    return fis_cv_rmse(candidate, data, folds);
  };

  const std::vector<double> init = mf_parameters(fis);
  const OptimizationResult res = pattern_search(objective, init, bounds, cfg.pattern);
  FISConfig out = apply_mf_parameters(fis, res.params);
  out.provenance = FisProvenance{mode_name(TuningMode::kMfTuning), cfg.seed, res.iterations,
                                 res.cost};
  return out;
}

FISConfig learn_rules(const FISConfig& fis, std::span<const TrainingSample> data,
                      const OptimizerConfig& cfg) {
  fis.validate();
  if (data.empty()) throw std::invalid_argument("learn_rules: no training samples");
  const RuleTable initial = rule_table(fis);
  const int terms = static_cast<int>(fis.output.terms.size());

  auto decode = [&](std::span<const double> p) {
    RuleTable t{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        t[i][j] = std::clamp(static_cast<int>(std::floor(p[3 * i + j])), 0, terms - 1);
    return t;
  };

  const Objective objective = [&](std::span<const double> p) {
    return fis_rmse(with_rule_table(fis, decode(p)), data);
  };

  Bounds bounds{std::vector<double>(9, 0.0), std::vector<double>(9, static_cast<double>(terms))};
  std::vector<double> seed_particle(9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) seed_particle[3 * i + j] = initial[i][j] + 0.5;
  const std::vector<std::vector<double>> seeds{seed_particle};

  SwarmConfig swarm = cfg.swarm;
  swarm.seed = cfg.seed;
  const OptimizationResult res = particle_swarm(objective, bounds, swarm, seeds);

  FISConfig out = with_rule_table(fis, decode(res.params));
  out.provenance = FisProvenance{mode_name(TuningMode::kRuleLearning), cfg.seed,
                                 res.iterations, res.cost};
  return out;
}

}  // namespace riskmon
