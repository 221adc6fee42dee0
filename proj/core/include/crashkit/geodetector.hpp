#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace crashkit::geodetector {

/// Optimal Jenks natural breaks: the contiguous k-partition of the sorted
/// distinct values (weighted by multiplicity) minimizing the total
/// within-class sum of squared deviations, solved exactly by dynamic
/// programming. Returns the k-1 interior breaks, each the largest value of
/// its class. Among equal-cost partitions the lexicographically smallest
/// break positions win. Throws std::invalid_argument if k is zero or
/// exceeds the number of distinct values.
std::vector<double> jenks_breaks(std::span<const double> values, std::size_t k);

/// Total within-class sum of squares for a partition defined by `breaks`.
double within_class_ss(std::span<const double> values, std::span<const double> breaks);

struct StrataAssignment {
  std::string factor;
  std::vector<std::size_t> labels;  // per zone, 0..strata_count()-1
  std::vector<double> breaks;  // empty for cross-product strata
  std::size_t count = 1;

  std::size_t strata_count() const noexcept { return count; }
};

/// Label h holds values v with breaks[h-1] < v <= breaks[h].
StrataAssignment assign_strata(std::string factor, std::span<const double> values,
                               std::vector<double> breaks);

/// Jenks breaks then labeling.
StrataAssignment stratify(std::string factor, std::span<const double> values, std::size_t k);

/// q-statistic: 1 - sum_h N_h var_h / (N var), population variances.
/// Throws std::domain_error on zero variance of y or an empty stratum.
double power_determinant(std::span<const double> y, std::span<const std::size_t> labels,
                         std::size_t strata_count);

struct FactorResult {
  std::string factor;
  double pd = 0.0;
  double p = 1.0;
  std::size_t k = 0;
  std::vector<double> breaks;
};

FactorResult factor_detector(std::span<const double> y, const StrataAssignment& strata);

enum class Interaction {
  weaken_nonlinear,
  weaken_univariate,
  enhance_bivariate,
  independent,
  enhance_nonlinear,
};
std::string_view to_string(Interaction i);

/// Classification of an interaction q value against the two individual ones.
/// Total over all triples; sums within 1e-9 count as independent.
Interaction classify_interaction(double pd_a, double pd_b, double pd_ab);

/// Cross-product strata of two assignments; empty label pairs are dropped and
/// the remaining pairs are numbered in (label_a, label_b) order.
StrataAssignment cross_strata(const StrataAssignment& a, const StrataAssignment& b);

struct InteractionResult {
  std::string factor_a;
  std::string factor_b;
  double pd_a = 0.0;
  double pd_b = 0.0;
  double pd_ab = 0.0;
  double p = 1.0;
  Interaction cls = Interaction::independent;
};

InteractionResult interaction_detector(std::span<const double> y, const StrataAssignment& a,
                                       const StrataAssignment& b);

/// Permutation pseudo p-value for a q statistic: y is shuffled over zones
/// with the strata held fixed. Deterministic in (seed, replicate index).
double pd_significance(std::span<const double> y, const StrataAssignment& strata,
                       std::size_t n_perm, std::uint64_t seed);

struct SuiteOptions {
  std::size_t default_k = 5;
  std::map<std::string, std::size_t> k_per_factor;
  std::size_t n_perm = 999;
  std::uint64_t seed = 0;
  std::size_t top_m = 0;  // interactions kept after ranking; 0 keeps all
};

struct SkippedFactor {
  std::string factor;
  std::string reason;
};

struct SuiteReport {
  std::vector<FactorResult> individual;         // PD descending, then name
  std::vector<InteractionResult> interactions;  // pd_ab descending, then names
  std::vector<SkippedFactor> skipped;
};

/// Stratifies every factor, runs the factor detector on each and the
/// interaction detector on every pair of usable factors.
SuiteReport run_detector_suite(std::span<const double> y,
                               const std::vector<std::pair<std::string, std::vector<double>>>& factors,
                               const SuiteOptions& options);

}  // namespace crashkit::geodetector
