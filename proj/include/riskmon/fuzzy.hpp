#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace riskmon {

/// Trapezoid with vertices a <= b <= c <= d; a triangle has b == c.
struct MembershipFunction {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  static MembershipFunction triangle(double a, double peak, double d) {
    return {a, peak, peak, d};
  }

  double operator()(double x) const;
  bool operator==(const MembershipFunction&) const = default;
};

/// Degree of `x` in `mf`; 0 outside [a, d], 1 on [b, c], linear shoulders.
double membership(const MembershipFunction& mf, double x);

struct FuzzyTerm {
  std::string name;
  MembershipFunction mf;
  bool operator==(const FuzzyTerm&) const = default;
};

struct FuzzyVariable {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<FuzzyTerm> terms;

  double clamp(double x) const;
  bool operator==(const FuzzyVariable&) const = default;
};

/// Conjunctive rule: one term index per input, one output term index.
struct FuzzyRule {
  std::vector<int> antecedent;
  int consequent = 0;
  std::string provenance;  ///< e.g. "inferred" for cells filled from tie rules
  bool operator==(const FuzzyRule&) const = default;
};

struct FisProvenance {
  std::string mode;
  std::uint64_t seed = 0;
  int iterations = 0;
  double final_rmse = 0.0;
  bool operator==(const FisProvenance&) const = default;
};

struct FISConfig {
  std::vector<FuzzyVariable> inputs;
  FuzzyVariable output;
  std::vector<FuzzyRule> rules;
  int defuzz_resolution = 1001;
  std::optional<FisProvenance> provenance;

  /// Vertex ordering, domain containment, term coverage, rule indices and
  /// completeness of the rule grid. Throws std::invalid_argument.
  void validate() const;

  /// Index of the rule whose antecedent equals `cells`, or -1.
  int find_rule(std::span<const int> cells) const;

  bool operator==(const FISConfig&) const = default;
};

/// Mamdani evaluator with the output membership functions pre-sampled.
/// min conjunction, min implication, max aggregation, discrete centroid.
class InferenceEngine {
 public:
  explicit InferenceEngine(const FISConfig& fis);

  double operator()(std::span<const double> inputs) const;

  /// Aggregated output membership on the sample grid for `inputs`.
  std::vector<double> aggregated(std::span<const double> inputs) const;
  const std::vector<double>& grid() const { return grid_; }

 private:
  std::vector<double> consequent_strengths(std::span<const double> inputs) const;

  std::vector<FuzzyVariable> inputs_;
  std::vector<FuzzyRule> rules_;
  int output_terms_ = 0;
  double midpoint_ = 0.0;
  std::vector<double> grid_;
  std::vector<std::vector<double>> output_samples_;  // [term][sample]
};

double infer(const FISConfig& fis, std::span<const double> inputs);

inline constexpr int kLow = 0;
inline constexpr int kMedium = 1;
inline constexpr int kHigh = 2;

/// low/medium/high terms spread uniformly over [lo, hi].
FuzzyVariable make_uniform_variable(std::string name, double lo, double hi);

/// Handcrafted system: inputs (rdd on [-1, 1], iou on [0, 1]), output risk on
/// [0, 1]. High RDD maps to high risk; otherwise IoU decides between medium
/// and low.
FISConfig default_fis();

/// The 3x3 consequent table of a two-input, three-term system, indexed
/// [rdd term][iou term].
using RuleTable = std::array<std::array<int, 3>, 3>;
RuleTable rule_table(const FISConfig& fis);
FISConfig with_rule_table(FISConfig fis, const RuleTable& table);

std::string to_json(const FISConfig& fis);
FISConfig fis_from_json(const std::string& text);
FISConfig load_fis(const std::string& path);
void save_fis(const FISConfig& fis, const std::string& path);

}  // namespace riskmon
