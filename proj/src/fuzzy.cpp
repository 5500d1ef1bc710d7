#include "riskmon/fuzzy.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace riskmon {

double MembershipFunction::operator()(double x) const {
  if (x < a || x > d) return 0.0;
  if (x < b) return (x - a) / (b - a);
  if (x <= c) return 1.0;
  return (d - x) / (d - c);
}

double membership(const MembershipFunction& mf, double x) { return mf(x); }

double FuzzyVariable::clamp(double x) const { return std::clamp(x, lo, hi); }

namespace {

void validate_variable(const FuzzyVariable& v) {
  const std::string where = "fuzzy variable '" + v.name + "': ";
  if (!(v.lo < v.hi)) throw std::invalid_argument(where + "empty domain");
  if (v.terms.size() < 2) throw std::invalid_argument(where + "needs at least two terms");

  std::vector<double> breaks{v.lo, v.hi};
  for (const FuzzyTerm& t : v.terms) {
    const auto& m = t.mf;
    if (!(m.a <= m.b && m.b <= m.c && m.c <= m.d))
      throw std::invalid_argument(where + "term '" + t.name + "' vertices out of order");
    if (m.a < v.lo || m.d > v.hi)
      throw std::invalid_argument(where + "term '" + t.name + "' leaves the domain");
    breaks.insert(breaks.end(), {m.a, m.b, m.c, m.d});
  }
  // Between consecutive breakpoints every term is either positive throughout
  // or zero throughout, so probing breakpoints and midpoints is exhaustive.
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  auto covered = [&](double x) {
    return std::any_of(v.terms.begin(), v.terms.end(),
                       [&](const FuzzyTerm& t) { return t.mf(x) > 0.0; });
  };
  for (std::size_t i = 0; i < breaks.size(); ++i) {
    if (!covered(breaks[i]))
      throw std::invalid_argument(where + "domain point " + std::to_string(breaks[i]) +
                                  " has no term with positive membership");
    if (i + 1 < breaks.size() && !covered(0.5 * (breaks[i] + breaks[i + 1])))
      throw std::invalid_argument(where + "coverage gap near " +
                                  std::to_string(0.5 * (breaks[i] + breaks[i + 1])));
  }
}

}  // namespace

void FISConfig::validate() const {
  if (inputs.empty()) throw std::invalid_argument("fis: no input variables");
  for (const auto& v : inputs) validate_variable(v);
  validate_variable(output);
  if (defuzz_resolution < 101)
    throw std::invalid_argument("fis: defuzz_resolution must be >= 101");

  for (const FuzzyRule& r : rules) {
    if (r.antecedent.size() != inputs.size())
      throw std::invalid_argument("fis: rule antecedent arity mismatch");
    for (std::size_t i = 0; i < inputs.size(); ++i)
      if (r.antecedent[i] < 0 || r.antecedent[i] >= static_cast<int>(inputs[i].terms.size()))
        throw std::invalid_argument("fis: rule antecedent index out of range");
    if (r.consequent < 0 || r.consequent >= static_cast<int>(output.terms.size()))
      throw std::invalid_argument("fis: rule consequent index out of range");
  }

  // Completeness over the antecedent grid.
  std::vector<int> cell(inputs.size(), 0);
  while (true) {
    if (find_rule(cell) < 0) throw std::invalid_argument("fis: rule grid is incomplete");
    std::size_t k = 0;
    while (k < cell.size() && ++cell[k] == static_cast<int>(inputs[k].terms.size()))
      cell[k++] = 0;
    if (k == cell.size()) break;
  }
}

int FISConfig::find_rule(std::span<const int> cells) const {
  for (std::size_t i = 0; i < rules.size(); ++i)
    if (std::equal(rules[i].antecedent.begin(), rules[i].antecedent.end(), cells.begin(),
                   cells.end()))
      return static_cast<int>(i);
  return -1;
}

InferenceEngine::InferenceEngine(const FISConfig& fis)
    : inputs_(fis.inputs),
      rules_(fis.rules),
      output_terms_(static_cast<int>(fis.output.terms.size())),
      midpoint_(0.5 * (fis.output.lo + fis.output.hi)) {
  fis.validate();
  const int n = fis.defuzz_resolution;
  const double step = (fis.output.hi - fis.output.lo) / (n - 1);
  grid_.resize(n);
  for (int k = 0; k < n; ++k) grid_[k] = fis.output.lo + step * k;
  grid_.back() = fis.output.hi;
  for (const FuzzyTerm& t : fis.output.terms) {
    std::vector<double> samples(n);
    for (int k = 0; k < n; ++k) samples[k] = t.mf(grid_[k]);
    output_samples_.push_back(std::move(samples));
  }
}

std::vector<double> InferenceEngine::consequent_strengths(
    std::span<const double> inputs) const {
  if (inputs.size() != inputs_.size())
    throw std::invalid_argument("infer: expected " + std::to_string(inputs_.size()) +
                                " inputs");
  // Rules sharing a consequent aggregate to the max of their strengths.
  std::vector<double> strength(output_terms_, 0.0);
  for (const FuzzyRule& r : rules_) {
    double s = 1.0;
    for (std::size_t i = 0; i < inputs_.size() && s > 0.0; ++i) {
      const FuzzyVariable& v = inputs_[i];
      s = std::min(s, v.terms[r.antecedent[i]].mf(v.clamp(inputs[i])));
    }
    strength[r.consequent] = std::max(strength[r.consequent], s);
  }
  return strength;
}

std::vector<double> InferenceEngine::aggregated(std::span<const double> inputs) const {
  const std::vector<double> strength = consequent_strengths(inputs);
  std::vector<double> mu(grid_.size(), 0.0);
  for (int t = 0; t < output_terms_; ++t) {
    if (strength[t] <= 0.0) continue;
    const std::vector<double>& s = output_samples_[t];
    for (std::size_t k = 0; k < mu.size(); ++k)
      mu[k] = std::max(mu[k], std::min(strength[t], s[k]));
  }
  return mu;
}

double InferenceEngine::operator()(std::span<const double> inputs) const {
  const std::vector<double> strength = consequent_strengths(inputs);
  double mass = 0.0;
  double moment = 0.0;
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    double mu = 0.0;
    for (int t = 0; t < output_terms_; ++t)
      mu = std::max(mu, std::min(strength[t], output_samples_[t][k]));
    mass += mu;
    moment += grid_[k] * mu;
  }
  if (!(mass > 0.0)) return midpoint_;
  return std::clamp(moment / mass, grid_.front(), grid_.back());
}

double infer(const FISConfig& fis, std::span<const double> inputs) {
  return InferenceEngine(fis)(inputs);
}

FuzzyVariable make_uniform_variable(std::string name, double lo, double hi) {
  const double w = hi - lo;
  FuzzyVariable v{std::move(name), lo, hi, {}};
  v.terms.push_back({"low", {lo, lo, lo + 0.2 * w, lo + 0.45 * w}});
  v.terms.push_back({"medium", MembershipFunction::triangle(lo + 0.3 * w, lo + 0.5 * w,
                                                            lo + 0.7 * w)});
  v.terms.push_back({"high", {lo + 0.55 * w, lo + 0.8 * w, hi, hi}});
  return v;
}

FISConfig default_fis() {
  FISConfig fis;
  fis.inputs.push_back(make_uniform_variable("rdd", -1.0, 1.0));
  fis.inputs.push_back(make_uniform_variable("iou", 0.0, 1.0));
  fis.output = make_uniform_variable("risk", 0.0, 1.0);

  // rows: rdd term, columns: iou term
  const RuleTable table = {{
      {kMedium, kMedium, kLow},  // low rdd
      {kMedium, kLow, kLow},     // medium rdd
      {kHigh, kHigh, kHigh},     // high rdd
  }};
  fis = with_rule_table(std::move(fis), table);
  // The medium-IoU cells of the low and medium RDD rows come from the tie
  // statements rather than the general rule.
  for (FuzzyRule& r : fis.rules)
    if (r.antecedent[1] == kMedium && r.antecedent[0] != kHigh) r.provenance = "inferred";
  return fis;
}

RuleTable rule_table(const FISConfig& fis) {
  if (fis.inputs.size() != 2 || fis.inputs[0].terms.size() != 3 ||
      fis.inputs[1].terms.size() != 3)
    throw std::invalid_argument("rule_table: expected two inputs with three terms each");
  RuleTable table{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const std::array<int, 2> cell{i, j};
      const int r = fis.find_rule(cell);
      if (r < 0) throw std::invalid_argument("rule_table: missing rule");
      table[i][j] = fis.rules[r].consequent;
    }
  return table;
}

FISConfig with_rule_table(FISConfig fis, const RuleTable& table) {
  fis.rules.clear();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) fis.rules.push_back({{i, j}, table[i][j], {}});
  return fis;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson variable_to_json(const FuzzyVariable& v) {
  ojson terms = ojson::array();
  for (const FuzzyTerm& t : v.terms)
    terms.push_back({{"name", t.name}, {"mf", {t.mf.a, t.mf.b, t.mf.c, t.mf.d}}});
  return {{"name", v.name}, {"domain", {v.lo, v.hi}}, {"terms", terms}};
}

FuzzyVariable variable_from_json(const ojson& j) {
  FuzzyVariable v;
  v.name = j.at("name").get<std::string>();
  const auto& dom = j.at("domain");
  if (!dom.is_array() || dom.size() != 2) throw std::invalid_argument("fis json: bad domain");
  v.lo = dom[0].get<double>();
  v.hi = dom[1].get<double>();
  for (const auto& t : j.at("terms")) {
    const auto& mf = t.at("mf");
    if (!mf.is_array() || mf.size() != 4)
      throw std::invalid_argument("fis json: mf needs four vertices");
    v.terms.push_back({t.at("name").get<std::string>(),
                       {mf[0].get<double>(), mf[1].get<double>(), mf[2].get<double>(),
                        mf[3].get<double>()}});
  }
  return v;
}

int term_index(const FuzzyVariable& v, const std::string& name) {
  for (std::size_t i = 0; i < v.terms.size(); ++i)
    if (v.terms[i].name == name) return static_cast<int>(i);
  throw std::invalid_argument("fis json: unknown term '" + name + "' for variable '" +
                              v.name + "'");
}

}  // namespace

std::string to_json(const FISConfig& fis) {
  ojson j;
  j["inputs"] = ojson::array();
  for (const auto& v : fis.inputs) j["inputs"].push_back(variable_to_json(v));
  j["output"] = variable_to_json(fis.output);
  j["rules"] = ojson::array();
  for (const FuzzyRule& r : fis.rules) {
    ojson cond = ojson::object();
    for (std::size_t i = 0; i < fis.inputs.size(); ++i)
      cond[fis.inputs[i].name] = fis.inputs[i].terms[r.antecedent[i]].name;
    ojson rule = {{"if", cond}, {"then", fis.output.terms[r.consequent].name}};
    if (!r.provenance.empty()) rule["provenance"] = r.provenance;
    j["rules"].push_back(rule);
  }
  j["defuzz_resolution"] = fis.defuzz_resolution;
  if (fis.provenance) {
    j["provenance"] = {{"mode", fis.provenance->mode},
                       {"seed", fis.provenance->seed},
                       {"iterations", fis.provenance->iterations},
                       {"final_rmse", fis.provenance->final_rmse}};
  }
  return j.dump(2) + "\n";
}

FISConfig fis_from_json(const std::string& text) {
  FISConfig fis;
  try {
    const ojson j = ojson::parse(text);
    for (const auto& v : j.at("inputs")) fis.inputs.push_back(variable_from_json(v));
    fis.output = variable_from_json(j.at("output"));
    for (const auto& r : j.at("rules")) {
      FuzzyRule rule;
      const auto& cond = r.at("if");
      for (const auto& v : fis.inputs)
        rule.antecedent.push_back(term_index(v, cond.at(v.name).get<std::string>()));
      rule.consequent = term_index(fis.output, r.at("then").get<std::string>());
      if (r.contains("provenance")) rule.provenance = r["provenance"].get<std::string>();
      fis.rules.push_back(std::move(rule));
    }
    fis.defuzz_resolution = j.value("defuzz_resolution", 1001);
    if (j.contains("provenance")) {
      const auto& p = j["provenance"];
      fis.provenance = FisProvenance{p.at("mode").get<std::string>(),
                                     p.at("seed").get<std::uint64_t>(),
                                     p.at("iterations").get<int>(),
                                     p.at("final_rmse").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("fis json: ") + e.what());
  }
  fis.validate();
  return fis;
}

FISConfig load_fis(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open FIS file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return fis_from_json(ss.str());
}

void save_fis(const FISConfig& fis, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write FIS file: " + path);
  out << to_json(fis);
}

}  // namespace riskmon
