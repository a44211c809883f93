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

#include "ces/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>

#include "ces/entropy.hpp"
#include "ces/error.hpp"
#include "ces/parallel.hpp"
#include "ces/reference_cdf.hpp"
#include "ces/rng.hpp"
#include "ces/stats.hpp"

namespace ces {

namespace {

void CheckScoresLabels(std::span<const double> scores,
                       std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw PreconditionError("scores and labels differ in length");
  }
  for (double s : scores) {
    if (std::isnan(s)) throw PreconditionError("NaN score");
  }
  for (int l : labels) {
    if (l != 0 && l != 1) throw PreconditionError("labels must be 0 or 1");
  }
}

// Average ranks (1-based, ascending) with ties sharing their mean rank.
std::vector<double> AverageRanks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = rank;
    i = j;
  }
  return ranks;
}

double AurocUnchecked(std::span<const double> scores,
                      std::span<const int> labels) {
  const std::vector<double> ranks = AverageRanks(scores);
  double pos = 0, rank_sum = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      pos += 1;
      rank_sum += ranks[i];
    }
  }
  const double neg = static_cast<double>(labels.size()) - pos;
  if (pos == 0 || neg == 0) {
    throw PreconditionError("AUROC needs both classes");
  }
  return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

double Mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

double SampleVariance(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

double Auroc(std::span<const double> scores, std::span<const int> labels) {
  CheckScoresLabels(scores, labels);
  return AurocUnchecked(scores, labels);
}

BootstrapResult BootstrapAuroc(std::span<const double> scores,
                               std::span<const int> labels, int iterations,
                               std::uint64_t seed, int workers) {
  CheckScoresLabels(scores, labels);
  if (iterations < 1) throw PreconditionError("iterations must be >= 1");
  BootstrapResult out;
  out.point = AurocUnchecked(scores, labels);

  constexpr int kMaxRedraws = 1000;
  const std::size_t n = scores.size();
  std::vector<double> values(static_cast<std::size_t>(iterations));
  std::vector<std::int64_t> redraws(values.size(), 0);
  ParallelFor(values.size(), workers, [&](std::size_t it) {
    Rng rng(seed, it);
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
      bool has_pos = false, has_neg = false;
      for (std::size_t k = 0; k < n; ++k) {
        const auto idx = static_cast<std::size_t>(rng.Below(n));
        s[k] = scores[idx];
        l[k] = labels[idx];
        (l[k] == 1 ? has_pos : has_neg) = true;
      }
      if (has_pos && has_neg) {
        values[it] = AurocUnchecked(s, l);
        return;
      }
      ++redraws[it];
    }
    throw PreconditionError("bootstrap resamples keep collapsing to one class");
  });
  out.redraws = std::accumulate(redraws.begin(), redraws.end(),
                                std::int64_t{0});
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  out.lo = SortedQuantile(sorted, 0.025);
  out.hi = SortedQuantile(sorted, 0.975);
  if (values.size() > 1) {
    out.std = std::sqrt(SampleVariance(values, Mean(values)));
  }
  return out;
}

KsResult KsTwoSample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw PreconditionError("empty KS sample");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  KsResult r;
  r.n1 = static_cast<std::int64_t>(sa.size());
  r.n2 = static_cast<std::int64_t>(sb.size());
  r.statistic = KsDistanceSorted(sa, sb);
  if (r.n1 >= 2 && r.n2 >= 2) {
    const double n1 = static_cast<double>(r.n1);
    const double n2 = static_cast<double>(r.n2);
    const double en = std::sqrt(n1 * n2 / (n1 + n2));
    r.p_value =
        stats::KolmogorovSurvival((en + 0.12 + 0.11 / en) * r.statistic);
  }
  return r;
}

double KsPermutationPValue(std::span<const double> a,
                           std::span<const double> b, int permutations,
                           std::uint64_t seed) {
  if (permutations < 1) throw PreconditionError("permutations must be >= 1");
  const double observed = KsTwoSample(a, b).statistic;
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  Rng rng(seed);
  int hits = 0;
  std::vector<double> x, y;
  for (int p = 0; p < permutations; ++p) {
    for (std::size_t i = pooled.size() - 1; i > 0; --i) {
      std::swap(pooled[i], pooled[rng.Below(i + 1)]);
    }
    x.assign(pooled.begin(), pooled.begin() + static_cast<long>(a.size()));
    y.assign(pooled.begin() + static_cast<long>(a.size()), pooled.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    if (KsDistanceSorted(x, y) >= observed - 1e-12) ++hits;
  }
  return (hits + 1.0) / (permutations + 1.0);
}

ShapeTestResult MeanCentredShapeTest(
    std::span<const std::vector<double>> seqs_a,
    std::span<const std::vector<double>> seqs_b) {
  ShapeTestResult out;
  auto centre = [](std::span<const std::vector<double>> seqs,
                   std::int64_t& excluded) {
    std::vector<double> pooled;
    for (const auto& s : seqs) {
      if (s.size() < 2) {
        ++excluded;
        continue;
      }
      const double mu = Mean(s);
      for (double v : s) pooled.push_back(v - mu);
    }
    return pooled;
  };
  const auto a = centre(seqs_a, out.excluded_a);
  const auto b = centre(seqs_b, out.excluded_b);
  if (a.empty() || b.empty()) {
    throw PreconditionError("shape test: every sequence in a class was "
                            "excluded (length < 2)");
  }
  out.ks = KsTwoSample(a, b);
  return out;
}

double CohensD(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw PreconditionError("Cohen's d needs at least 2 values per group");
  }
  const double ma = Mean(a), mb = Mean(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double pooled = std::sqrt(((na - 1) * SampleVariance(a, ma) +
                                   (nb - 1) * SampleVariance(b, mb)) /
                                  (na + nb - 2));
  if (!(pooled > 0.0)) throw PreconditionError("zero pooled variance");
  return (mb - ma) / pooled;
}

double NeffRatio(double rho1, double rho_cap) {
  const double r = std::clamp(rho1, -rho_cap, rho_cap);
  return (1.0 - r) / (1.0 + r);
}

DiagnosticsReport AutocorrDiagnostics(std::span<const double> seq,
                                      double rho_cap) {
  if (seq.size() < 3) {
    throw PreconditionError("autocorrelation needs at least 3 tokens");
  }
  const double mu = Mean(seq);
  double den = 0.0, num = 0.0;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    den += (seq[t] - mu) * (seq[t] - mu);
    if (t + 1 < seq.size()) num += (seq[t] - mu) * (seq[t + 1] - mu);
  }
  const bool constant = std::all_of(seq.begin(), seq.end(),
                                    [&](double v) { return v == seq[0]; });
  if (constant || !(den > 0.0)) {
    throw PreconditionError("autocorrelation of a constant sequence");
  }
  DiagnosticsReport r;
  r.rho1 = num / den;
  r.neff_ratio = NeffRatio(r.rho1, rho_cap);
  r.white_noise =
      std::abs(r.rho1) <= 1.96 / std::sqrt(static_cast<double>(seq.size()));
  return r;
}

std::vector<LengthBin> ParseLengthBins(const std::string& text) {
  std::vector<LengthBin> bins;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    try {
      LengthBin bin;
      if (dash == std::string::npos) {
        bin.lo = bin.hi = std::stoll(item);
      } else {
        bin.lo = std::stoll(item.substr(0, dash));
        const std::string upper = item.substr(dash + 1);
        bin.hi = upper.empty() ? std::numeric_limits<std::int64_t>::max()
                               : std::stoll(upper);
      }
      bins.push_back(bin);
    } catch (const std::logic_error&) {
      throw UsageError("invalid length bin '" + item + "'");
    }
  }
  if (bins.empty()) throw UsageError("no length bins given");
  return bins;
}

std::vector<BinAuroc> StratifiedAuroc(std::span<const double> scores,
                                      std::span<const int> labels,
                                      std::span<const std::int64_t> lengths,
                                      std::span<const LengthBin> bins) {
  CheckScoresLabels(scores, labels);
  if (lengths.size() != scores.size()) {
    throw PreconditionError("lengths and scores differ in length");
  }
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (bins[i].lo > bins[i].hi) throw PreconditionError("empty length bin");
    for (std::size_t j = i + 1; j < bins.size(); ++j) {
      if (bins[i].lo <= bins[j].hi && bins[j].lo <= bins[i].hi) {
        throw PreconditionError("length bins overlap");
      }
    }
  }
  std::vector<std::vector<double>> s(bins.size());
  std::vector<std::vector<int>> l(bins.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    bool placed = false;
    for (std::size_t b = 0; b < bins.size() && !placed; ++b) {
      if (lengths[i] >= bins[b].lo && lengths[i] <= bins[b].hi) {
        s[b].push_back(scores[i]);
        l[b].push_back(labels[i]);
        placed = true;
      }
    }
    if (!placed) {
      throw PreconditionError("length " + std::to_string(lengths[i]) +
                              " falls outside every bin");
    }
  }
  std::vector<BinAuroc> out(bins.size());
  for (std::size_t b = 0; b < bins.size(); ++b) {
    out[b].bin = bins[b];
    out[b].n = static_cast<std::int64_t>(s[b].size());
    out[b].positives = std::count(l[b].begin(), l[b].end(), 1);
    if (out[b].positives > 0 && out[b].positives < out[b].n) {
      out[b].auroc = AurocUnchecked(s[b], l[b]);
    }
  }
  return out;
}

double NemenyiCriticalDifference(int methods, int experiments, double alpha) {
  if (methods < 2 || experiments < 1) {
    throw PreconditionError("critical difference needs k >= 2, N >= 1");
  }
  const double q = stats::NormalRangeQuantile(alpha, methods) /
                   std::sqrt(2.0);
  const double k = methods;
  return q * std::sqrt(k * (k + 1.0) / (6.0 * experiments));
}

RankAnalysis FriedmanNemenyi(const std::vector<std::vector<double>>& matrix,
                             double alpha) {
  const std::size_t n = matrix.size();
  if (n < 2) throw PreconditionError("rank analysis needs >= 2 experiments");
  const std::size_t k = matrix.front().size();
  if (k < 2) throw PreconditionError("rank analysis needs >= 2 methods");
  RankAnalysis out;
  out.avg_ranks.assign(k, 0.0);
  for (const auto& row : matrix) {
    if (row.size() != k) throw PreconditionError("ragged rank matrix");
    std::vector<double> negated(k);
    for (std::size_t j = 0; j < k; ++j) {
      if (!std::isfinite(row[j])) {
        throw PreconditionError("non-finite entry in rank matrix");
      }
      negated[j] = -row[j];  // rank 1 = highest value
    }
    const auto ranks = AverageRanks(negated);
    for (std::size_t j = 0; j < k; ++j) out.avg_ranks[j] += ranks[j];
  }
  const double N = static_cast<double>(n);
  const double K = static_cast<double>(k);
  double sum_sq = 0.0;
  for (double& r : out.avg_ranks) {
    r /= N;
    sum_sq += r * r;
  }
  out.chi2_f = 12.0 * N / (K * (K + 1.0)) *
               (sum_sq - K * (K + 1.0) * (K + 1.0) / 4.0);
  out.chi2_f = std::max(0.0, out.chi2_f);
  boost::math::chi_squared chi(K - 1.0);
  out.chi2_p = boost::math::cdf(boost::math::complement(chi, out.chi2_f));
  const double denom = N * (K - 1.0) - out.chi2_f;
  if (denom > 0.0) {
    out.iman_davenport_f = (N - 1.0) * out.chi2_f / denom;
    boost::math::fisher_f f(K - 1.0, (K - 1.0) * (N - 1.0));
    out.iman_davenport_p =
        boost::math::cdf(boost::math::complement(f, out.iman_davenport_f));
  } else {
    out.iman_davenport_f = std::numeric_limits<double>::infinity();
    out.iman_davenport_p = 0.0;
  }
  out.q_alpha =
      stats::NormalRangeQuantile(alpha, static_cast<int>(k)) / std::sqrt(2.0);
  out.critical_difference =
      out.q_alpha * std::sqrt(K * (K + 1.0) / (6.0 * N));
  return out;
}

}  // namespace ces
