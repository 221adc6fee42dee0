#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crashkit/common.hpp"
#include "crashkit/ingest.hpp"

namespace crashkit::tensor {

using Matrix = Eigen::MatrixXd;

/// Dense third-order tensor, first index fastest.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t d0, std::size_t d1, std::size_t d2, double fill = 0.0)
      : dims_{d0, d1, d2}, data_(d0 * d1 * d2, fill) {}

  const std::array<std::size_t, 3>& dims() const noexcept { return dims_; }
  std::size_t dim(int mode) const { return dims_.at(static_cast<std::size_t>(mode)); }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[i + dims_[0] * (j + dims_[1] * k)];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[i + dims_[0] * (j + dims_[1] * k)];
  }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::array<std::size_t, 3> dims_{0, 0, 0};
  std::vector<double> data_;
};

/// G x_mode A: contracts mode `mode` (0, 1 or 2) of G with the columns of A;
/// that mode's size becomes A.rows(). Throws std::invalid_argument when
/// A.cols() does not match.
Tensor3 n_mode_product(const Tensor3& g, const Matrix& a, int mode);

/// X_(mode) * Y_(mode)^T: contraction over every mode except `mode`.
Matrix mode_gram(const Tensor3& x, const Tensor3& y, int mode);

double frobenius_norm(const Tensor3& t);

/// Relative entropy D(M || N) between the tensors read as distributions:
/// both are scaled to sum 1, N is smoothed by 1e-12 per entry and
/// renormalized, and 0 log 0 = 0. Natural log.
double kl_divergence(const Tensor3& m, const Tensor3& n);

struct CoreSize {
  std::size_t spatial = 1;
  std::size_t age = 1;
  std::size_t time = 1;

  std::size_t operator[](int mode) const { return mode == 0 ? spatial : mode == 1 ? age : time; }
  friend bool operator==(const CoreSize&, const CoreSize&) = default;
};

struct NtdOptions {
  std::size_t max_iter = 500;
  double tol = 1e-6;
  std::size_t restarts = 5;
  std::uint64_t seed = 0;
  double eps = 1e-9;
  /// Multiplicative steps per block per iteration. The numerator and Gram
  /// matrix of a block are reused across its inner steps, which are cheap
  /// next to forming them; every step still decreases the objective.
  std::size_t inner_steps = 10;
};

struct TuckerModel {
  Tensor3 core;
  std::array<Matrix, 3> factors;  // spatial (I x J1), age (J x J2), time (K x J3)
  double objective = 0.0;         // 0.5 * ||reconstruction - data||_F^2
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::size_t restart = 0;
  std::vector<double> objective_trace;  // initial value first, one per iteration after
  bool monotone = true;
  std::vector<std::string> warnings;

  Tensor3 reconstruct() const;
};

/// One multiplicative-update run from the random start for (seed, restart).
/// Updates factors then core each iteration, clamping entries at eps; stops
/// when the relative objective change drops below tol or after max_iter.
TuckerModel fit_ntd_once(const Tensor3& data, const CoreSize& size, const NtdOptions& options,
                         std::size_t restart);

/// Best of `options.restarts` seeded runs. Factor columns are rescaled to
/// unit maximum with the scale moved into the core. An all-zero input yields
/// a zero core and a warning.
TuckerModel ntd(const Tensor3& data, const CoreSize& size, const NtdOptions& options);

struct LabeledTensor {
  Tensor3 values;                     // zones x 7 age bands x 24 hours, max-normalized
  std::vector<std::string> zone_ids;  // row labels
  double max_before_normalization = 0.0;
  double total_before_normalization = 0.0;
  std::size_t unassigned = 0;
};

/// Sums per-crash SWI weights into (zone, age band, hour) cells for the
/// chosen day class, then divides by the largest cell.
LabeledTensor build_tensor(std::span<const ingest::CrashRecord> crashes, const ingest::ZoneSet& zones,
                           ingest::DayClass day_class);

struct SweepRow {
  CoreSize size;
  double kl = 0.0;
  double objective = 0.0;
};

struct SweepResult {
  CoreSize selected;
  std::vector<SweepRow> rows;
};

/// Fits every spatial candidate with the age and time ranks fixed and scores
/// D(data || reconstruction). The selection is the last candidate before the
/// first improvement smaller than elbow_tol (the start of the plateau); the
/// final candidate if the curve never flattens.
SweepResult select_core_size(const Tensor3& data, std::span<const std::size_t> spatial_candidates,
                             std::size_t age_size, std::size_t time_size, double elbow_tol,
                             const NtdOptions& options);

/// Full grid over all three ranks. Selects the smallest core (by entry count,
/// then lexicographically) whose KL is within elbow_tol of the grid minimum.
SweepResult grid_search_core_size(const Tensor3& data, std::span<const std::size_t> spatial,
                                  std::span<const std::size_t> age, std::span<const std::size_t> time,
                                  double elbow_tol, const NtdOptions& options);

struct PeakWindow {
  std::string label;
  int begin = 0;  // hours, half-open [begin, end)
  int end = 0;
};

std::vector<PeakWindow> default_peak_windows();

struct TemporalPattern {
  std::size_t column = 0;
  std::vector<int> peak_hours;  // argmax, ties included
  std::string label;            // window label or "off-peak"
};

struct AgePattern {
  std::size_t column = 0;
  std::vector<std::string> dominant;  // argmax band(s)
};

struct SpatialPattern {
  std::size_t column = 0;
  std::vector<std::pair<std::string, double>> top_zones;
};

struct PatternReport {
  std::vector<TemporalPattern> temporal;
  std::vector<AgePattern> age;
  std::vector<SpatialPattern> spatial;
  std::vector<Matrix> core_slices;  // per age pattern: spatial x temporal
};

PatternReport extract_patterns(const TuckerModel& model, std::span<const std::string> zone_ids,
                               std::size_t top_q,
                               std::span<const PeakWindow> windows = default_peak_windows());

/// Intensity of one (age pattern, time pattern) cell per zone:
/// sum_s A_spatial(zone, s) * G(s, age_pattern, time_pattern).
ZoneField pattern_zone_field(const TuckerModel& model, std::span<const std::string> zone_ids,
                             std::size_t age_pattern, std::size_t time_pattern);

}  // namespace crashkit::tensor
