#include "crashkit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "crashkit/random.hpp"

namespace crashkit::tensor {

namespace {

using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

// Allowed relative rise of the objective between iterations before a run is
// flagged non-monotone (round-off only).
constexpr double kMonotoneSlack = 1e-12;

Tensor3 clamp_product(const Tensor3& current, const Tensor3& num, const Tensor3& den, double eps) {
  Tensor3 out = current;
  auto& d = out.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = std::max(eps, d[i] * num.data()[i] / den.data()[i]);
  }
  return out;
}

double half_squared_error(const Tensor3& data, const Tensor3& approx) {
  double acc = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = approx.data()[i] - data.data()[i];
    acc += r * r;
  }
  return 0.5 * acc;
}

Tensor3 reconstruct_from(const Tensor3& core, const std::array<Matrix, 3>& f) {
  return n_mode_product(n_mode_product(n_mode_product(core, f[0], 0), f[1], 1), f[2], 2);
}

/// Core multiplied by every factor except the one for `skip`.
Tensor3 partial_product(const Tensor3& core, const std::array<Matrix, 3>& f, int skip) {
  Tensor3 out = core;
  for (int m = 0; m < 3; ++m) {
    if (m != skip) out = n_mode_product(out, f[static_cast<std::size_t>(m)], m);
  }
  return out;
}

void validate_size(const Tensor3& data, const CoreSize& size) {
  for (int m = 0; m < 3; ++m) {
    if (size[m] < 1 || size[m] > data.dim(m)) {
      throw std::invalid_argument("core size out of range for mode " + std::to_string(m));
    }
  }
}

}  // namespace

Tensor3 n_mode_product(const Tensor3& g, const Matrix& a, int mode) {
  if (mode < 0 || mode > 2) throw std::invalid_argument("n_mode_product: mode must be 0, 1 or 2");
  const auto [d0, d1, d2] = g.dims();
  if (static_cast<std::size_t>(a.cols()) != g.dim(mode)) {
    throw std::invalid_argument("n_mode_product: matrix has " + std::to_string(a.cols()) +
                                " columns, tensor mode " + std::to_string(mode) + " has size " +
                                std::to_string(g.dim(mode)));
  }
  const auto rows = static_cast<std::size_t>(a.rows());
  if (mode == 0) {
    Tensor3 out(rows, d1, d2);
    MutMap(out.data().data(), idx(rows), idx(d1 * d2)).noalias() =
        a * ConstMap(g.data().data(), idx(d0), idx(d1 * d2));
    return out;
  }
  if (mode == 1) {
    Tensor3 out(d0, rows, d2);
    for (std::size_t k = 0; k < d2; ++k) {
      MutMap(out.data().data() + k * d0 * rows, idx(d0), idx(rows)).noalias() =
          ConstMap(g.data().data() + k * d0 * d1, idx(d0), idx(d1)) * a.transpose();
    }
    return out;
  }
  Tensor3 out(d0, d1, rows);
  MutMap(out.data().data(), idx(d0 * d1), idx(rows)).noalias() =
      ConstMap(g.data().data(), idx(d0 * d1), idx(d2)) * a.transpose();
  return out;
}

Matrix mode_gram(const Tensor3& x, const Tensor3& y, int mode) {
  for (int m = 0; m < 3; ++m) {
    if (m != mode && x.dim(m) != y.dim(m)) throw std::invalid_argument("mode_gram: shape mismatch");
  }
  const auto [x0, x1, x2] = x.dims();
  const auto [y0, y1, y2] = y.dims();
  if (mode == 0) {
    return ConstMap(x.data().data(), idx(x0), idx(x1 * x2)) *
           ConstMap(y.data().data(), idx(y0), idx(y1 * y2)).transpose();
  }
  if (mode == 1) {
    Matrix out = Matrix::Zero(idx(x1), idx(y1));
    for (std::size_t k = 0; k < x2; ++k) {
      out.noalias() += ConstMap(x.data().data() + k * x0 * x1, idx(x0), idx(x1)).transpose() *
                       ConstMap(y.data().data() + k * y0 * y1, idx(y0), idx(y1));
    }
    return out;
  }
  return ConstMap(x.data().data(), idx(x0 * x1), idx(x2)).transpose() *
         ConstMap(y.data().data(), idx(y0 * y1), idx(y2));
}

double frobenius_norm(const Tensor3& t) {
  double acc = 0.0;
  for (double v : t.data()) acc += v * v;
  return std::sqrt(acc);
}

double kl_divergence(const Tensor3& m, const Tensor3& n) {
  if (m.dims() != n.dims()) throw std::invalid_argument("kl_divergence: shape mismatch");
  constexpr double kSmoothing = 1e-12;
  double sm = 0.0, sn = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.data()[i] < 0.0 || n.data()[i] < 0.0) throw std::invalid_argument("kl_divergence: negative entry");
    sm += m.data()[i];
    sn += n.data()[i];
  }
  if (!(sm > 0.0) || !(sn > 0.0)) throw std::invalid_argument("kl_divergence: all-zero tensor");
  const double norm_n = 1.0 + kSmoothing * static_cast<double>(n.size());
  double d = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double p = m.data()[i] / sm;
    if (p == 0.0) continue;
    const double q = (n.data()[i] / sn + kSmoothing) / norm_n;
    d += p * std::log(p / q);
  }
  return d;
}

Tensor3 TuckerModel::reconstruct() const { return reconstruct_from(core, factors); }

TuckerModel fit_ntd_once(const Tensor3& data, const CoreSize& size, const NtdOptions& options,
                         std::size_t restart) {
  validate_size(data, size);
  if (!(options.eps > 0.0)) throw std::invalid_argument("ntd: eps must be positive");
  const double eps = options.eps;
  const std::size_t inner = std::max<std::size_t>(1, options.inner_steps);
  auto rng = make_stream(options.seed, restart);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  TuckerModel model;
  model.seed = options.seed;
  model.restart = restart;
  for (int m = 0; m < 3; ++m) {
    Matrix f(idx(data.dim(m)), idx(size[m]));
    for (Eigen::Index c = 0; c < f.cols(); ++c) {
      for (Eigen::Index r = 0; r < f.rows(); ++r) f(r, c) = std::max(eps, unit(rng));
    }
    model.factors[static_cast<std::size_t>(m)] = std::move(f);
  }
  model.core = Tensor3(size.spatial, size.age, size.time);
  for (auto& v : model.core.data()) v = std::max(eps, unit(rng));

  const double data_norm = frobenius_norm(data);
  if (data_norm == 0.0) {
    std::fill(model.core.data().begin(), model.core.data().end(), 0.0);
    model.warnings.push_back("input tensor is all zero; returning a zero core");
    model.objective_trace.push_back(0.0);
    return model;
  }
  // scale the start so its reconstruction norm matches the data
  const double start_norm = frobenius_norm(model.reconstruct());
  for (auto& v : model.core.data()) v = std::max(eps, v * data_norm / start_norm);

  const double data_energy = 0.5 * data_norm * data_norm;
  double previous = half_squared_error(data, model.reconstruct());
  model.objective_trace.push_back(previous);
  auto& f = model.factors;
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    for (int m = 0; m < 3; ++m) {
      const auto mi = static_cast<std::size_t>(m);
      const Tensor3 b = partial_product(model.core, f, m);
      const Matrix num = mode_gram(data, b, m);
      const Matrix gram = mode_gram(b, b, m);
      for (std::size_t s = 0; s < inner; ++s) {
        f[mi] = f[mi].cwiseProduct(num).cwiseQuotient(f[mi] * gram).cwiseMax(eps);
      }
    }
    std::array<Matrix, 3> transposed{f[0].transpose(), f[1].transpose(), f[2].transpose()};
    std::array<Matrix, 3> grams{f[0].transpose() * f[0], f[1].transpose() * f[1], f[2].transpose() * f[2]};
    const Tensor3 num = reconstruct_from(data, transposed);
    for (std::size_t s = 0; s < inner; ++s) {
      model.core = clamp_product(model.core, num, reconstruct_from(model.core, grams), eps);
    }

    const double current = half_squared_error(data, model.reconstruct());
    model.objective_trace.push_back(current);
    model.iterations = it + 1;
    // slack scaled by the data energy
    if (current > previous + kMonotoneSlack * std::max(previous, data_energy)) model.monotone = false;
    const double change = previous > 0.0 ? (previous - current) / previous : 0.0;
    previous = current;
    if (current == 0.0 || std::abs(change) < options.tol) break;
  }
  model.objective = previous;
  return model;
}

TuckerModel ntd(const Tensor3& data, const CoreSize& size, const NtdOptions& options) {
  if (options.restarts < 1) throw std::invalid_argument("ntd: at least one restart required");
  TuckerModel best;
  bool have = false;
  bool all_monotone = true;
  for (std::size_t r = 0; r < options.restarts; ++r) {
    auto model = fit_ntd_once(data, size, options, r);
    all_monotone = all_monotone && model.monotone;
    if (!have || model.objective < best.objective) {
      best = std::move(model);
      have = true;
    }
    if (!best.warnings.empty()) break;  // degenerate input: restarts are pointless
  }
  best.monotone = all_monotone;

  // unit-max factor columns, scale absorbed by the core
  for (int m = 0; m < 3; ++m) {
    auto& f = best.factors[static_cast<std::size_t>(m)];
    Matrix rescale = Matrix::Identity(f.cols(), f.cols());
    for (Eigen::Index c = 0; c < f.cols(); ++c) {
      const double mx = f.col(c).maxCoeff();
      if (mx > 0.0) {
        f.col(c) /= mx;
        rescale(c, c) = mx;
      }
    }
    best.core = n_mode_product(best.core, rescale, m);
  }
  if (best.warnings.empty()) best.objective = half_squared_error(data, best.reconstruct());
  return best;
}

LabeledTensor build_tensor(std::span<const ingest::CrashRecord> crashes, const ingest::ZoneSet& zones,
                           ingest::DayClass day_class) {
  LabeledTensor out;
  out.zone_ids = zones.ids();
  out.values = Tensor3(zones.size(), ingest::kAgeGroupCount, 24);
  const auto where = ingest::zone_indices(crashes, zones);
  for (std::size_t c = 0; c < crashes.size(); ++c) {
    const auto& crash = crashes[c];
    if (crash.when.day_class() != day_class) continue;
    if (!where[c]) {
      ++out.unassigned;
      continue;
    }
    const double w = static_cast<double>(ingest::severity_weight(crash.severity));
    out.values(*where[c], static_cast<std::size_t>(crash.age_group), static_cast<std::size_t>(crash.when.hour)) += w;
    out.total_before_normalization += w;
  }
  const auto& d = out.values.data();
  out.max_before_normalization = d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
  if (out.max_before_normalization > 0.0) {
    for (auto& v : out.values.data()) v /= out.max_before_normalization;
  }
  return out;
}

SweepResult select_core_size(const Tensor3& data, std::span<const std::size_t> spatial_candidates,
                             std::size_t age_size, std::size_t time_size, double elbow_tol,
                             const NtdOptions& options) {
  if (spatial_candidates.empty()) throw std::invalid_argument("select_core_size: no candidates");
  if (!std::is_sorted(spatial_candidates.begin(), spatial_candidates.end())) {
    throw std::invalid_argument("select_core_size: candidates must be ascending");
  }
  SweepResult result;
  for (std::size_t x : spatial_candidates) {
    const CoreSize size{x, age_size, time_size};
    const auto model = ntd(data, size, options);
    result.rows.push_back(SweepRow{size, kl_divergence(data, model.reconstruct()), model.objective});
  }
  result.selected = result.rows.back().size;
  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    if (result.rows[i - 1].kl - result.rows[i].kl < elbow_tol) {
      result.selected = result.rows[i - 1].size;
      break;
    }
  }
  return result;
}

SweepResult grid_search_core_size(const Tensor3& data, std::span<const std::size_t> spatial,
                                  std::span<const std::size_t> age, std::span<const std::size_t> time,
                                  double elbow_tol, const NtdOptions& options) {
  if (spatial.empty() || age.empty() || time.empty()) {
    throw std::invalid_argument("grid_search_core_size: empty candidate list");
  }
  SweepResult result;
  for (std::size_t s : spatial) {
    for (std::size_t a : age) {
      for (std::size_t t : time) {
        const CoreSize size{s, a, t};
        const auto model = ntd(data, size, options);
        result.rows.push_back(SweepRow{size, kl_divergence(data, model.reconstruct()), model.objective});
      }
    }
  }
  double best_kl = std::numeric_limits<double>::infinity();
  for (const auto& r : result.rows) best_kl = std::min(best_kl, r.kl);
  const SweepRow* pick = nullptr;
  auto volume = [](const CoreSize& c) { return c.spatial * c.age * c.time; };
  for (const auto& r : result.rows) {
    if (r.kl > best_kl + elbow_tol) continue;
    if (!pick || volume(r.size) < volume(pick->size) ||
        (volume(r.size) == volume(pick->size) &&
         std::tie(r.size.spatial, r.size.age, r.size.time) <
             std::tie(pick->size.spatial, pick->size.age, pick->size.time))) {
      pick = &r;
    }
  }
  result.selected = pick->size;
  return result;
}

std::vector<PeakWindow> default_peak_windows() {
  return {{"morning-peak", 6, 10}, {"afternoon-peak", 15, 19}, {"evening-peak", 19, 23}};
}

namespace {

std::vector<Eigen::Index> argmax_set(const Eigen::VectorXd& v) {
  std::vector<Eigen::Index> out;
  if (v.size() == 0) return out;
  const double mx = v.maxCoeff();
  const double slack = 1e-12 * std::max(1.0, std::abs(mx));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) >= mx - slack) out.push_back(i);
  }
  return out;
}

}  // namespace

PatternReport extract_patterns(const TuckerModel& model, std::span<const std::string> zone_ids,
                               std::size_t top_q, std::span<const PeakWindow> windows) {
  PatternReport report;
  const auto& spatial = model.factors[0];
  const auto& age = model.factors[1];
  const auto& time = model.factors[2];
  if (static_cast<std::size_t>(spatial.rows()) != zone_ids.size()) {
    throw std::invalid_argument("extract_patterns: zone labels do not match the spatial factor");
  }

  for (Eigen::Index c = 0; c < time.cols(); ++c) {
    TemporalPattern p;
    p.column = static_cast<std::size_t>(c);
    for (auto h : argmax_set(time.col(c))) p.peak_hours.push_back(static_cast<int>(h));
    p.label = "off-peak";
    for (const auto& w : windows) {
      const bool all_inside = std::all_of(p.peak_hours.begin(), p.peak_hours.end(),
                                          [&](int h) { return h >= w.begin && h < w.end; });
      if (!p.peak_hours.empty() && all_inside) {
        p.label = w.label;
        break;
      }
    }
    report.temporal.push_back(std::move(p));
  }

  for (Eigen::Index c = 0; c < age.cols(); ++c) {
    AgePattern p;
    p.column = static_cast<std::size_t>(c);
    for (auto band : argmax_set(age.col(c))) {
      if (age.rows() == static_cast<Eigen::Index>(ingest::kAgeGroupCount)) {
        p.dominant.emplace_back(ingest::to_string(static_cast<ingest::AgeGroup>(band)));
      } else {
        p.dominant.push_back(std::to_string(band));
      }
    }
    report.age.push_back(std::move(p));
  }

  for (Eigen::Index c = 0; c < spatial.cols(); ++c) {
    SpatialPattern p;
    p.column = static_cast<std::size_t>(c);
    std::vector<std::size_t> order(zone_ids.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t q = std::min(top_q, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(q), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (spatial(idx(a), c) != spatial(idx(b), c)) return spatial(idx(a), c) > spatial(idx(b), c);
                        return zone_ids[a] < zone_ids[b];
                      });
    for (std::size_t i = 0; i < q; ++i) p.top_zones.emplace_back(zone_ids[order[i]], spatial(idx(order[i]), c));
    report.spatial.push_back(std::move(p));
  }

  const auto& g = model.core;
  for (std::size_t a = 0; a < g.dim(1); ++a) {
    Matrix slice(idx(g.dim(0)), idx(g.dim(2)));
    for (std::size_t s = 0; s < g.dim(0); ++s) {
      for (std::size_t t = 0; t < g.dim(2); ++t) slice(idx(s), idx(t)) = g(s, a, t);
    }
    report.core_slices.push_back(std::move(slice));
  }
  return report;
}

ZoneField pattern_zone_field(const TuckerModel& model, std::span<const std::string> zone_ids,
                             std::size_t age_pattern, std::size_t time_pattern) {
  const auto& g = model.core;
  if (age_pattern >= g.dim(1) || time_pattern >= g.dim(2)) {
    throw std::out_of_range("pattern_zone_field: pattern index out of range");
  }
  const auto& spatial = model.factors[0];
  if (static_cast<std::size_t>(spatial.rows()) != zone_ids.size()) {
    throw std::invalid_argument("pattern_zone_field: zone labels do not match the spatial factor");
  }
  std::vector<double> values(zone_ids.size(), 0.0);
  for (std::size_t z = 0; z < zone_ids.size(); ++z) {
    double acc = 0.0;
    for (std::size_t s = 0; s < g.dim(0); ++s) acc += spatial(idx(z), idx(s)) * g(s, age_pattern, time_pattern);
    values[z] = acc;
  }
  return ZoneField(std::vector<std::string>(zone_ids.begin(), zone_ids.end()), std::move(values));
}

}  // namespace crashkit::tensor
