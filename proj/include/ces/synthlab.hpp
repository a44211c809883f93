// Copyright 2026 The CES Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ces/reference_cdf.hpp"
#include "ces/rng.hpp"

namespace ces::synth {

/// Sampling oracle with a known CDF on [0, log d].
class Distribution {
 public:
  virtual ~Distribution() = default;
  virtual double Sample(Rng& rng) const = 0;
  virtual double Cdf(double x) const = 0;
  /// Generalized inverse inf{x : F(x) >= p}.
  virtual double Quantile(double p) const = 0;
  virtual double Mean() const = 0;
  /// sup{z : F(z) < 1}.
  virtual double RightEndpoint() const = 0;
  /// inf{z : F(z) > 0}.
  virtual double LeftEndpoint() const = 0;
  /// Sorted sample values of a pool, repeats kept; empty when continuous.
  virtual std::span<const double> Atoms() const { return {}; }
  /// The specification this distribution was built from.
  virtual nlohmann::json Spec() const = 0;
};

/// Normal(loc, scale) conditioned on [lo, hi].
std::shared_ptr<const Distribution> TruncatedNormal(double loc, double scale,
                                                    double lo, double hi);
/// Beta(a, b) mapped affinely onto [lo, hi].
std::shared_ptr<const Distribution> ScaledBeta(double a, double b, double lo,
                                               double hi);
std::shared_ptr<const Distribution> Uniform(double lo, double hi);
/// Resampling from a fixed entropy pool (its ECDF).
std::shared_ptr<const Distribution> Pool(std::vector<double> values,
                                         nlohmann::json spec = {});

/// Builds a distribution from {"family": "truncnorm"|"beta"|"uniform"|"pool",
/// ...}. Parametric families default to the support [0, log_d]; a pool
/// takes "values" inline or a "path" to a file of whitespace-separated
/// entropies.
std::shared_ptr<const Distribution> DistributionFromJson(
    const nlohmann::json& spec, double log_d);

/// sup_x |F(x) - G(x)| on a dense grid over [lo, hi] plus both CDFs'
/// atoms; exact for step CDFs, grid-accurate for continuous ones.
double KsDistance(const Distribution& f, const Distribution& g, double lo,
                  double hi, int grid = 100000);

/// Exact sup_z |F_hat(z) - F(z)| between an ECDF and a distribution.
double EcdfDeviation(const ReferenceCdf& ecdf, const Distribution& f);

struct DkwCell {
  std::int64_t sequences = 200;  // L
  double epsilon = 0.1;
};

struct SynthConfig {
  std::shared_ptr<const Distribution> f0;
  std::shared_ptr<const Distribution> f1;
  double log_d = 1.0;
  std::vector<std::int64_t> lengths{5, 10, 20, 50, 100, 200, 500, 1000};
  std::int64_t trials_per_cell = 1000;
  std::uint64_t seed = 42;
  int workers = 1;

  // DKW: per-sequence lengths ~ Uniform{length_min..length_max}.
  std::vector<DkwCell> dkw_cells{{200, 0.1}};
  std::int64_t length_min = 1;
  std::int64_t length_max = 20;

  // Error decay.
  std::int64_t pool_size = 20000;
  double reference_fraction = 0.3;
  std::int64_t reference_m = 50;
  std::vector<double> mu_fractions{0.25, 0.5, 0.75};

  // Contamination.
  std::vector<double> gammas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::int64_t calibration_tokens = 2000;
  double delta = 1e-6;
  std::int64_t test_size = 500;  // sequences per class
  std::int64_t test_m = 20;

  // Noisy judge.
  std::vector<double> flip_probs{0.0, 0.001, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
  std::int64_t repeats = 30;
  double hallucination_rate = 0.27;
  std::int64_t calibration_records = 500;

  // KS power.
  std::vector<std::int64_t> subsample_sizes{50, 100, 200, 500, 1000, 2000};
  double alpha = 0.05;

  void Validate() const;
  /// Reads a config object. Unknown keys are rejected.
  static SynthConfig FromJson(const nlohmann::json& j);
  /// Resolved configuration, echoed into every result header.
  nlohmann::json ToJson() const;
};

/// 3-sigma binomial slack sqrt(p (1 - p) / n).
double BinomialSe(double p, std::int64_t n);

// ---------------------------------------------------------------- DKW

struct DkwRow {
  std::int64_t sequences = 0;
  double epsilon = 0.0;
  std::int64_t trials = 0;
  std::int64_t violations = 0;
  double violation_rate = 0.0;
  double worst_case_bound = 0.0;      // 2 exp(-2 L eps^2)
  double length_averaged_bound = 0.0; // 2 E[exp(-2 T eps^2)]^L, exact
  double max_deviation = 0.0;
  bool pass_worst_case = false;
  bool pass_length_averaged = false;
};

std::vector<DkwRow> VerifyDkw(const SynthConfig& config);

// ---------------------------------------------------------- error decay

struct DecayRow {
  std::int64_t m = 0;
  std::int64_t trials = 0;
  double type1 = 0.0;  // P_F0(CES > c), ECDF reference, fitted threshold
  double type2 = 0.0;  // P_F1(CES <= c)
};

struct BoundRow {
  std::int64_t m = 0;
  double mu = 0.0;
  double zeta_fpr = 0.0;
  double zeta_tpr = 0.0;
  double fpr_threshold = 0.0;
  double tpr_threshold = 0.0;
  double fpr = 0.0;        // empirical, population-CDF score
  double fpr_bound = 0.0;
  double tpr = 0.0;
  double tpr_bound = 0.0;  // best of the basic and tighter forms
  bool pass_fpr = false;
  bool pass_tpr = false;
};

struct DecayResult {
  double threshold = 0.0;  // fitted by Youden at reference_m
  double mu0 = 0.0, mu1 = 0.0, zeta0 = 0.0, zeta1 = 0.0;
  std::vector<DecayRow> rows;
  std::vector<BoundRow> bounds;
  double slope_type1 = 0.0;  // d log(error) / dm
  double slope_type2 = 0.0;
};

/// One Monte-Carlo draw of the bound check: a length-m sequence from
/// class `cls`, scored against the population F0 and tested at `threshold`.
struct SynthTrialResult {
  std::int64_t m = 0;
  int cls = 0;
  double ces = 0.0;
  int rejected = 0;
  double bound = 1.0;  // FPR bound for class 0, TPR bound for class 1
};

/// Raw per-trial draws behind one BoundRow, in trial order.
std::vector<SynthTrialResult> BoundTrials(const SynthConfig& config,
                                            std::int64_t m,
                                            double mu_fraction, int cls);

DecayResult VerifyErrorDecay(const SynthConfig& config,
                             std::optional<std::int64_t> reference_m = {});

// -------------------------------------------------------- contamination

struct ContaminationRow {
  double gamma = 0.0;
  std::int64_t trials = 0;
  double epsilon = 0.0;  // DKW radius at delta for the pool size
  double budget = 0.0;   // epsilon + gamma
  double max_ks = 0.0;   // max over trials of d_KS(F_hat_gamma, F0)
  double mean_ks = 0.0;
  std::int64_t within_budget = 0;
  std::int64_t clean_event = 0;  // trials whose clean part is within eps
  /// Trials where the clean part was within eps yet the mixture left the
  /// eps + gamma ball; the bound says this never happens.
  std::int64_t violations = 0;
  double mean_auroc = 0.0;
  bool pass() const { return violations == 0; }
};

struct ContaminationResult {
  double ks_f0_f1 = 0.0;
  std::vector<ContaminationRow> rows;
};

ContaminationResult VerifyContamination(const SynthConfig& config);

// ---------------------------------------------------------- noisy judge

struct NoisyJudgeRow {
  double flip_prob = 0.0;
  std::int64_t repeats = 0;
  double median_supervised = 0.0;
  double unsupervised = 0.0;
  double gap = 0.0;     // median supervised - unsupervised
  double gap_se = 0.0;  // standard error of the median gap
  double mean_hallucinated_in_reference = 0.0;
};

std::vector<NoisyJudgeRow> VerifyNoisyJudge(const SynthConfig& config);

// ------------------------------------------------------------ KS power

struct KsPowerRow {
  std::int64_t n = 0;
  std::int64_t repeats = 0;
  double rejection_rate = 0.0;
  double mean_statistic = 0.0;
};

struct KsPowerResult {
  std::vector<KsPowerRow> rows;
  /// Rates never drop by more than 3 standard errors as n grows.
  bool monotone = true;
};

KsPowerResult KsPowerCurve(const SynthConfig& config);

// -------------------------------------------------------------- level

struct LevelResult {
  double alpha = 0.0;
  double threshold = 0.0;
  std::int64_t trials = 0;
  double fpr = 0.0;
  bool pass = false;  // |fpr - alpha| <= 3 se
};

/// Fits a max-TPR-at-FPR threshold on held-out F0/F1 sequences of length
/// m, then measures the FPR on fresh F0 sequences.
LevelResult VerifyLevel(const SynthConfig& config, std::int64_t m);

// ------------------------------------------------------------- output

nlohmann::json ToJson(const DkwRow& row);
nlohmann::json ToJson(const DecayRow& row);
nlohmann::json ToJson(const BoundRow& row);
nlohmann::json ToJson(const ContaminationRow& row);
nlohmann::json ToJson(const NoisyJudgeRow& row);
nlohmann::json ToJson(const KsPowerRow& row);

}  // namespace ces::synth
