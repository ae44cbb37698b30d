// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ventrate/statistics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ventrate {

std::optional<double> Median(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lower + upper);
}

double Mean(std::span<const double> values) {
  if (values.empty()) throw UndefinedResultError("mean of empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double Quantile(std::span<const double> values, double q) {
  if (values.empty()) throw UndefinedResultError("quantile of empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double Pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("pearson: length mismatch");
  }
  if (xs.size() < 2) throw UndefinedResultError("pearson: need >= 2 points");
  const double mx = Mean(xs);
  const double my = Mean(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw UndefinedResultError("pearson: zero variance");
  }
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

double MeanAbsoluteError(std::span<const double> xs,
                         std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("mae: length mismatch");
  if (xs.empty()) throw UndefinedResultError("mae: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) total += std::abs(xs[i] - ys[i]);
  return total / static_cast<double>(xs.size());
}

std::vector<double> MidRanks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double MannWhitneyExactP(double u, std::size_t n1, std::size_t n2) {
  // counts[k] = number of arrangements with U = k, built by the standard
  // recurrence over sample sizes: f(a, b, k) = f(a-1, b, k-b) + f(a, b-1, k).
  const std::size_t max_u = n1 * n2;
  std::vector<std::vector<double>> prev(n2 + 1), cur(n2 + 1);
  for (std::size_t b = 0; b <= n2; ++b) prev[b].assign(1, 1.0);  // a = 0
  for (std::size_t a = 1; a <= n1; ++a) {
    cur[0].assign(1, 1.0);  // b = 0
    for (std::size_t b = 1; b <= n2; ++b) {
      cur[b].assign(a * b + 1, 0.0);
      for (std::size_t k = 0; k < cur[b].size(); ++k) {
        if (k >= b && k - b < prev[b].size()) cur[b][k] += prev[b][k - b];
        if (k < cur[b - 1].size()) cur[b][k] += cur[b - 1][k];
      }
    }
    std::swap(prev, cur);
  }
  const std::vector<double>& counts = prev[n2];
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  const auto k = static_cast<std::size_t>(std::llround(u));
  double lower = 0.0, upper = 0.0;
  for (std::size_t i = 0; i <= max_u; ++i) {
    if (i <= k) lower += counts[i];
    if (i >= k) upper += counts[i];
  }
  return std::clamp(2.0 * std::min(lower, upper) / total, 0.0, 1.0);
}

double MannWhitneyNormalP(double u, std::size_t n1, std::size_t n2,
                          double tie_term) {
  const double a = static_cast<double>(n1);
  const double b = static_cast<double>(n2);
  const double n = a + b;
  const double mean = 0.5 * a * b;
  const double var = a * b / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (!(var > 0.0)) return 1.0;
  const double z = std::max(0.0, std::abs(u - mean) - 0.5) / std::sqrt(var);
  return std::clamp(std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
}

MannWhitneyResult MannWhitneyU(std::span<const double> xs,
                               std::span<const double> ys) {
  if (xs.empty() || ys.empty()) {
    throw UndefinedResultError("mann-whitney: empty sample");
  }
  std::vector<double> pooled(xs.begin(), xs.end());
  pooled.insert(pooled.end(), ys.begin(), ys.end());
  const std::vector<double> ranks = MidRanks(pooled);
  const double n1 = static_cast<double>(xs.size());
  const double r1 = std::accumulate(ranks.begin(), ranks.begin() + xs.size(), 0.0);

  MannWhitneyResult result;
  result.u = r1 - n1 * (n1 + 1.0) / 2.0;

  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }

  if (tie_term == 0.0 && xs.size() * ys.size() <= kExactMannWhitneyLimit) {
    result.exact = true;
    result.p_value = MannWhitneyExactP(result.u, xs.size(), ys.size());
  } else {
    result.p_value =
        MannWhitneyNormalP(result.u, xs.size(), ys.size(), tie_term);
  }
  return result;
}

}  // namespace ventrate
