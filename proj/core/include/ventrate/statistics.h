// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef VENTRATE_STATISTICS_H_
#define VENTRATE_STATISTICS_H_

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace ventrate {

// Raised when a statistic is undefined for the given input (zero variance,
// empty sample, mismatched lengths).
class UndefinedResultError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Mean of the two central values for even counts; nullopt when empty.
std::optional<double> Median(std::span<const double> values);
double Mean(std::span<const double> values);

// Sample quantile with linear interpolation between order statistics.
double Quantile(std::span<const double> values, double q);

double Pearson(std::span<const double> xs, std::span<const double> ys);
double MeanAbsoluteError(std::span<const double> xs, std::span<const double> ys);

// Ranks with ties assigned the mean of the positions they span (1-based).
std::vector<double> MidRanks(std::span<const double> values);

struct MannWhitneyResult {
  double u = 0.0;  // statistic for the first sample
  double p_value = 1.0;  // two-sided
  bool exact = false;
};

// Exact enumeration is used when the samples are tie-free and
// |xs| * |ys| <= kExactMannWhitneyLimit; otherwise the normal approximation
// with tie and continuity corrections.
inline constexpr std::size_t kExactMannWhitneyLimit = 400;
MannWhitneyResult MannWhitneyU(std::span<const double> xs,
                               std::span<const double> ys);

// Two-sided p from the exact null distribution of U for sizes (n1, n2).
double MannWhitneyExactP(double u, std::size_t n1, std::size_t n2);
// Normal approximation; `tie_term` is sum(t^3 - t) over tie groups.
double MannWhitneyNormalP(double u, std::size_t n1, std::size_t n2,
                          double tie_term);

}  // namespace ventrate

#endif  // VENTRATE_STATISTICS_H_
