#include "crashkit/geodetector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "crashkit/random.hpp"

namespace crashkit::geodetector {

namespace {

constexpr double kTieTolerance = 1e-12;

struct Distinct {
  std::vector<double> value;
  std::vector<double> count;
};

Distinct distinct_values(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  Distinct d;
  for (double v : sorted) {
    if (!std::isfinite(v)) throw std::invalid_argument("jenks_breaks: non-finite value");
    if (d.value.empty() || v != d.value.back()) {
      d.value.push_back(v);
      d.count.push_back(1.0);
    } else {
      d.count.back() += 1.0;
    }
  }
  return d;
}

/// Weighted SS over ranges of the distinct values via centered prefix sums.
class RangeCost {
 public:
  explicit RangeCost(const Distinct& d) : w_(d.value.size() + 1, 0.0), s_(w_), q_(w_) {
    double total_w = 0.0, total_s = 0.0;
    for (std::size_t i = 0; i < d.value.size(); ++i) {
      total_w += d.count[i];
      total_s += d.count[i] * d.value[i];
    }
    center_ = total_s / total_w;
    for (std::size_t i = 0; i < d.value.size(); ++i) {
      const double x = d.value[i] - center_;
      w_[i + 1] = w_[i] + d.count[i];
      s_[i + 1] = s_[i] + d.count[i] * x;
      q_[i + 1] = q_[i] + d.count[i] * x * x;
    }
  }

  /// SS of distinct values [first, last].
  double operator()(std::size_t first, std::size_t last) const {
    const double w = w_[last + 1] - w_[first];
    const double s = s_[last + 1] - s_[first];
    const double q = q_[last + 1] - q_[first];
    return std::max(0.0, q - s * s / w);
  }

 private:
  std::vector<double> w_, s_, q_;
  double center_ = 0.0;
};

double population_ss(std::span<const double> y, std::span<const std::size_t> labels,
                     std::size_t strata, std::vector<double>& sum, std::vector<double>& count) {
  sum.assign(strata, 0.0);
  count.assign(strata, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    sum[labels[i]] += y[i];
    count[labels[i]] += 1.0;
  }
  double ssw = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double dev = y[i] - sum[labels[i]] / count[labels[i]];
    ssw += dev * dev;
  }
  return ssw;
}

}  // namespace

std::vector<double> jenks_breaks(std::span<const double> values, std::size_t k) {
  if (k == 0) throw std::invalid_argument("jenks_breaks: k must be at least 1");
  const auto d = distinct_values(values);
  const std::size_t m = d.value.size();
  if (k > m) {
    throw std::invalid_argument("jenks_breaks: k = " + std::to_string(k) + " exceeds the " +
                                std::to_string(m) + " distinct values");
  }
  if (k == 1) return {};
  const RangeCost cost(d);
  constexpr double inf = std::numeric_limits<double>::infinity();
  // tail[c][i]: best cost of splitting distinct values i..m-1 into c classes
  std::vector<std::vector<double>> tail(k + 1, std::vector<double>(m + 1, inf));
  for (std::size_t i = 0; i < m; ++i) tail[1][i] = cost(i, m - 1);
  for (std::size_t c = 2; c <= k; ++c) {
    for (std::size_t i = 0; i + c <= m; ++i) {
      double best = inf;
      for (std::size_t end = i; end + c <= m; ++end) {
        best = std::min(best, cost(i, end) + tail[c - 1][end + 1]);
      }
      tail[c][i] = best;
    }
  }
  // Forward pass picking the earliest break that still attains the optimum.
  std::vector<double> breaks;
  std::size_t start = 0;
  for (std::size_t c = k; c >= 2; --c) {
    const double target = tail[c][start];
    const double slack = 1e-12 * std::max(1.0, std::abs(target));
    std::size_t chosen = start;
    for (std::size_t end = start; end + c <= m; ++end) {
      if (cost(start, end) + tail[c - 1][end + 1] <= target + slack) {
        chosen = end;
        break;
      }
    }
    breaks.push_back(d.value[chosen]);
    start = chosen + 1;
  }
  return breaks;
}

double within_class_ss(std::span<const double> values, std::span<const double> breaks) {
  auto s = assign_strata("", values, std::vector<double>(breaks.begin(), breaks.end()));
  std::vector<double> sum, count;
  return population_ss(values, s.labels, s.strata_count(), sum, count);
}

StrataAssignment assign_strata(std::string factor, std::span<const double> values,
                               std::vector<double> breaks) {
  if (!std::is_sorted(breaks.begin(), breaks.end()) ||
      std::adjacent_find(breaks.begin(), breaks.end()) != breaks.end()) {
    throw std::invalid_argument("assign_strata: breaks must be strictly increasing");
  }
  StrataAssignment s{std::move(factor), {}, std::move(breaks), 0};
  s.count = s.breaks.size() + 1;
  s.labels.reserve(values.size());
  for (double v : values) {
    auto it = std::lower_bound(s.breaks.begin(), s.breaks.end(), v);
    s.labels.push_back(static_cast<std::size_t>(it - s.breaks.begin()));
  }
  return s;
}

StrataAssignment stratify(std::string factor, std::span<const double> values, std::size_t k) {
  auto breaks = jenks_breaks(values, k);
  return assign_strata(std::move(factor), values, std::move(breaks));
}

double power_determinant(std::span<const double> y, std::span<const std::size_t> labels,
                         std::size_t strata_count) {
  if (y.size() != labels.size()) throw std::invalid_argument("power_determinant: size mismatch");
  if (y.empty()) throw std::domain_error("power_determinant: no zones");
  std::vector<double> sum, count;
  for (auto l : labels) {
    if (l >= strata_count) throw std::invalid_argument("power_determinant: label out of range");
  }
  const double ssw = population_ss(y, labels, strata_count, sum, count);
  for (std::size_t h = 0; h < strata_count; ++h) {
    if (count[h] == 0.0) {
      throw std::domain_error("empty stratum " + std::to_string(h) + ": re-stratify with a smaller k");
    }
  }
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double sst = 0.0;
  double scale = 0.0;
  for (double v : y) {
    sst += (v - mean) * (v - mean);
    scale = std::max(scale, std::abs(v));
  }
  const double floor = 1e-12 * scale;
  if (sst <= static_cast<double>(y.size()) * floor * floor) {
    throw std::domain_error("zero variance: y is constant");
  }
  return std::clamp(1.0 - ssw / sst, 0.0, 1.0);
}

FactorResult factor_detector(std::span<const double> y, const StrataAssignment& strata) {
  return FactorResult{strata.factor, power_determinant(y, strata.labels, strata.strata_count()), 1.0,
                      strata.strata_count(), strata.breaks};
}

std::string_view to_string(Interaction i) {
  switch (i) {
    case Interaction::weaken_nonlinear: return "weaken_nonlinear";
    case Interaction::weaken_univariate: return "weaken_univariate";
    case Interaction::enhance_bivariate: return "enhance_bivariate";
    case Interaction::independent: return "independent";
    case Interaction::enhance_nonlinear: return "enhance_nonlinear";
  }
  return "?";
}

Interaction classify_interaction(double pd_a, double pd_b, double pd_ab) {
  constexpr double kIndependence = 1e-9;
  const double lo = std::min(pd_a, pd_b);
  const double hi = std::max(pd_a, pd_b);
  const double sum = pd_a + pd_b;
  if (std::abs(pd_ab - sum) <= kIndependence) return Interaction::independent;
  if (pd_ab < lo) return Interaction::weaken_nonlinear;
  if (pd_ab < hi) return Interaction::weaken_univariate;
  if (pd_ab > sum) return Interaction::enhance_nonlinear;
  return Interaction::enhance_bivariate;
}

StrataAssignment cross_strata(const StrataAssignment& a, const StrataAssignment& b) {
  if (a.labels.size() != b.labels.size()) throw std::invalid_argument("cross_strata: size mismatch");
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> ids;
  for (std::size_t i = 0; i < a.labels.size(); ++i) ids.emplace(std::pair{a.labels[i], b.labels[i]}, 0);
  std::size_t next = 0;
  for (auto& [key, id] : ids) id = next++;
  StrataAssignment out;
  out.factor = a.factor + "&" + b.factor;
  out.labels.reserve(a.labels.size());
  for (std::size_t i = 0; i < a.labels.size(); ++i) out.labels.push_back(ids.at({a.labels[i], b.labels[i]}));
  out.count = std::max<std::size_t>(next, 1);
  return out;
}

InteractionResult interaction_detector(std::span<const double> y, const StrataAssignment& a,
                                       const StrataAssignment& b) {
  InteractionResult r;
  r.factor_a = a.factor;
  r.factor_b = b.factor;
  r.pd_a = power_determinant(y, a.labels, a.strata_count());
  r.pd_b = power_determinant(y, b.labels, b.strata_count());
  const auto ab = cross_strata(a, b);
  r.pd_ab = power_determinant(y, ab.labels, ab.strata_count());
  r.cls = classify_interaction(r.pd_a, r.pd_b, r.pd_ab);
  return r;
}

double pd_significance(std::span<const double> y, const StrataAssignment& strata,
                       std::size_t n_perm, std::uint64_t seed) {
  if (n_perm < 1) throw std::invalid_argument("pd_significance: n_perm must be positive");
  const double observed = power_determinant(y, strata.labels, strata.strata_count());
  std::vector<double> shuffled(y.begin(), y.end());
  std::vector<double> base(y.begin(), y.end());
  std::size_t extreme = 0;
  for (std::size_t b = 0; b < n_perm; ++b) {
    auto rng = make_stream(seed, b);
    shuffled = base;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const double q = power_determinant(shuffled, strata.labels, strata.strata_count());
    if (q >= observed - kTieTolerance) ++extreme;
  }
  return static_cast<double>(1 + extreme) / static_cast<double>(1 + n_perm);
}

SuiteReport run_detector_suite(std::span<const double> y,
                               const std::vector<std::pair<std::string, std::vector<double>>>& factors,
                               const SuiteOptions& options) {
  SuiteReport report;
  std::vector<std::pair<std::string, std::vector<double>>> ordered = factors;
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<StrataAssignment> usable;
  for (const auto& [name, values] : ordered) {
    if (values.size() != y.size()) {
      report.skipped.push_back({name, "factor length differs from the zone count"});
      continue;
    }
    auto it = options.k_per_factor.find(name);
    const std::size_t k = it != options.k_per_factor.end() ? it->second : options.default_k;
    try {
      auto strata = stratify(name, values, k);
      auto result = factor_detector(y, strata);
      result.p = pd_significance(y, strata, options.n_perm, options.seed);
      report.individual.push_back(std::move(result));
      usable.push_back(std::move(strata));
    } catch (const std::exception& e) {
      report.skipped.push_back({name, e.what()});
    }
  }

  for (std::size_t a = 0; a < usable.size(); ++a) {
    for (std::size_t b = a + 1; b < usable.size(); ++b) {
      auto r = interaction_detector(y, usable[a], usable[b]);
      r.p = pd_significance(y, cross_strata(usable[a], usable[b]), options.n_perm, options.seed);
      report.interactions.push_back(std::move(r));
    }
  }

  std::stable_sort(report.individual.begin(), report.individual.end(),
                   [](const FactorResult& a, const FactorResult& b) { return a.pd > b.pd; });
  std::stable_sort(report.interactions.begin(), report.interactions.end(),
                   [](const InteractionResult& a, const InteractionResult& b) { return a.pd_ab > b.pd_ab; });
  if (options.top_m > 0 && report.interactions.size() > options.top_m) {
    report.interactions.resize(options.top_m);
  }
  return report;
}

}  // namespace crashkit::geodetector
