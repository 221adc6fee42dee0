#include <gtest/gtest.h>

#include <random>

#include "crashkit/tensor.hpp"
#include "oracles.hpp"

using namespace crashkit;
using namespace crashkit::tensor;

namespace {

Tensor3 random_tensor(std::size_t a, std::size_t b, std::size_t c, std::mt19937_64& rng) {
  Tensor3 t(a, b, c);
  for (auto& v : t.data()) v = std::uniform_real_distribution<double>(0, 1)(rng);
  return t;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = std::uniform_real_distribution<double>(-1, 1)(rng);
  return m;
}

oracle::Cube to_cube(const Tensor3& t) { return {t.dim(0), t.dim(1), t.dim(2), t.data()}; }

std::vector<std::vector<double>> rows(const Matrix& m) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)].push_back(m(i, j));
  return out;
}

Tensor3 tucker(const Tensor3& core, const Matrix& a, const Matrix& b, const Matrix& c) {
  return n_mode_product(n_mode_product(n_mode_product(core, a, 0), b, 1), c, 2);
}

double relative_error(const Tensor3& x, const Tensor3& y) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x.data()[i] - y.data()[i]) * (x.data()[i] - y.data()[i]);
    den += x.data()[i] * x.data()[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST(ModeProduct, MatchesBruteForce) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto g = random_tensor(3, 4, 5, rng);
    for (int mode = 0; mode < 3; ++mode) {
      const auto a = random_matrix(6, static_cast<Eigen::Index>(g.dim(mode)), rng);
      const auto got = n_mode_product(g, a, mode);
      const auto want = oracle::mode_product(to_cube(g), rows(a), mode);
      ASSERT_EQ(got.size(), want.v.size());
      for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got.data()[i], want.v[i], 1e-12);
    }
  }
}

TEST(ModeProduct, IdentityCommutationAndShapeErrors) {
  std::mt19937_64 rng(2);
  const auto g = random_tensor(2, 3, 4, rng);
  const auto same = n_mode_product(g, Matrix::Identity(3, 3), 1);
  EXPECT_EQ(same.data(), g.data());

  const auto a = random_matrix(5, 2, rng);
  const auto c = random_matrix(3, 4, rng);
  const auto ac = n_mode_product(n_mode_product(g, a, 0), c, 2);
  const auto ca = n_mode_product(n_mode_product(g, c, 2), a, 0);
  for (std::size_t i = 0; i < ac.size(); ++i) EXPECT_NEAR(ac.data()[i], ca.data()[i], 1e-12);

  EXPECT_THROW(n_mode_product(g, random_matrix(2, 5, rng), 0), std::invalid_argument);
}

TEST(ModeProduct, TwoByTwoExample) {
  Tensor3 g(2, 2, 2);
  for (std::size_t i = 0; i < 8; ++i) g.data()[i] = static_cast<double>(i + 1);
  Matrix a(2, 2);
  a << 1, 1, 0, 1;
  const auto r = n_mode_product(g, a, 0);
  // first row sums over mode 0, second copies index 1
  EXPECT_DOUBLE_EQ(r(0, 0, 0), 3.0);
  EXPECT_DOUBLE_EQ(r(1, 0, 0), 2.0);
  EXPECT_DOUBLE_EQ(r(0, 1, 1), 15.0);
  EXPECT_DOUBLE_EQ(r(1, 1, 1), 8.0);
}

TEST(Norms, FrobeniusAndModeGram) {
  Tensor3 ones(2, 2, 2, 1.0);
  EXPECT_DOUBLE_EQ(frobenius_norm(ones), std::sqrt(8.0));
  std::mt19937_64 rng(3);
  const auto t = random_tensor(3, 4, 5, rng);
  double flat = 0.0;
  for (double v : t.data()) flat += v * v;
  EXPECT_NEAR(frobenius_norm(t), std::sqrt(flat), 1e-12);
  const auto gram = mode_gram(t, t, 1);
  EXPECT_NEAR(gram.trace(), flat, 1e-10);
}

TEST(Kl, WorkedExampleAndIdentity) {
  Tensor3 m(2, 1, 1), n(2, 1, 1);
  m.data() = {1, 1};
  n.data() = {1, 3};
  EXPECT_NEAR(kl_divergence(m, n), 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 1e-10);
  EXPECT_NEAR(kl_divergence(m, n), 0.1438, 1e-4);
  EXPECT_NEAR(kl_divergence(m, m), 0.0, 1e-10);
}

TEST(Kl, MatchesDefinitionAndIsNonnegative) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    auto a = random_tensor(3, 4, 2, rng);
    auto b = random_tensor(3, 4, 2, rng);
    a.data()[t % 24] = 0.0;
    b.data()[(t + 5) % 24] = 0.0;
    const double d = kl_divergence(a, b);
    EXPECT_NEAR(d, oracle::kl(a.data(), b.data()), 1e-12);
    EXPECT_GE(d, -1e-12);
  }
}

TEST(Ntd, RecoversRankOneTensor) {
  std::mt19937_64 rng(5);
  Tensor3 x(8, 7, 24);
  std::vector<double> u(8), v(7), w(24);
  for (auto* vec : {&u, &v, &w})
    for (auto& e : *vec) e = std::uniform_real_distribution<double>(0.1, 1)(rng);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 7; ++j)
      for (std::size_t k = 0; k < 24; ++k) x(i, j, k) = u[i] * v[j] * w[k];
  NtdOptions opts;
  opts.seed = 9;
  const auto model = ntd(x, {1, 1, 1}, opts);
  EXPECT_LE(relative_error(x, model.reconstruct()), 1e-3);
  EXPECT_TRUE(model.monotone);
}

TEST(Ntd, ObjectiveNeverIncreasesAndFactorsStayPositive) {
  std::mt19937_64 rng(6);
  const auto x = random_tensor(10, 7, 24, rng);
  NtdOptions opts;
  opts.seed = 11;
  opts.max_iter = 200;
  opts.tol = 0.0;
  const auto model = fit_ntd_once(x, {3, 2, 4}, opts, 0);
  ASSERT_GE(model.objective_trace.size(), 2u);
  EXPECT_TRUE(model.monotone);
  const double slack = 1e-12 * 0.5 * frobenius_norm(x) * frobenius_norm(x);
  for (std::size_t i = 1; i < model.objective_trace.size(); ++i) {
    EXPECT_LE(model.objective_trace[i], model.objective_trace[i - 1] + slack) << "iteration " << i;
  }
  for (const auto& f : model.factors) EXPECT_GE(f.minCoeff(), opts.eps);
  for (double g : model.core.data()) EXPECT_GE(g, opts.eps);
  EXPECT_EQ(model.factors[0].rows(), 10);
  EXPECT_EQ(model.factors[0].cols(), 3);
  EXPECT_EQ(model.core.dims(), (std::array<std::size_t, 3>{3, 2, 4}));
}

TEST(Ntd, SameSeedSameModel) {
  std::mt19937_64 rng(7);
  const auto x = random_tensor(6, 7, 24, rng);
  NtdOptions opts;
  opts.seed = 3;
  opts.restarts = 2;
  opts.max_iter = 50;
  const auto a = ntd(x, {2, 2, 2}, opts);
  const auto b = ntd(x, {2, 2, 2}, opts);
  EXPECT_EQ(a.core.data(), b.core.data());
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.restart, b.restart);
}

TEST(Ntd, ZeroInputWarns) {
  Tensor3 zero(4, 7, 24);
  const auto model = ntd(zero, {2, 2, 2}, NtdOptions{});
  EXPECT_FALSE(model.warnings.empty());
  for (double g : model.core.data()) EXPECT_EQ(g, 0.0);
}

TEST(Ntd, FactorColumnsAreUnitMax) {
  std::mt19937_64 rng(8);
  const auto x = random_tensor(6, 7, 24, rng);
  NtdOptions opts;
  opts.max_iter = 100;
  const auto model = ntd(x, {2, 3, 2}, opts);
  for (const auto& f : model.factors)
    for (Eigen::Index c = 0; c < f.cols(); ++c) EXPECT_NEAR(f.col(c).maxCoeff(), 1.0, 1e-12);
}

namespace {

ingest::CrashRecord crash(const std::string& zone, int day, int hour, ingest::Severity s, ingest::AgeGroup g) {
  ingest::CrashRecord c;
  c.id = zone + std::to_string(day) + std::to_string(hour);
  c.zone_id = zone;
  c.when = {2024, 1, day, hour, 0};  // 2024-01-01 is a Monday
  c.severity = s;
  c.age_group = g;
  return c;
}

ingest::ZoneSet two_zones() {
  return ingest::ZoneSet(std::vector<ingest::Zone>{{"A", {}, {}}, {"B", {}, {}}});
}

}  // namespace

TEST(BuildTensor, SingleFatalNormalizesToOne) {
  using ingest::AgeGroup;
  using ingest::Severity;
  std::vector<ingest::CrashRecord> crashes = {crash("B", 2, 8, Severity::fatal, AgeGroup::age_26_35)};
  const auto t = build_tensor(crashes, two_zones(), ingest::DayClass::weekday);
  EXPECT_EQ(t.values.dims(), (std::array<std::size_t, 3>{2, 7, 24}));
  EXPECT_DOUBLE_EQ(t.values(1, 2, 8), 1.0);
  EXPECT_DOUBLE_EQ(t.max_before_normalization, 5.0);
  double sum = 0.0;
  for (double v : t.values.data()) sum += v;
  EXPECT_DOUBLE_EQ(sum, 1.0);
}

TEST(BuildTensor, RatiosTotalsAndDayClass) {
  using ingest::AgeGroup;
  using ingest::Severity;
  std::vector<ingest::CrashRecord> crashes = {
      crash("A", 1, 7, Severity::fatal, AgeGroup::over_65),
      crash("A", 3, 17, Severity::serious, AgeGroup::age_0_18),
      crash("A", 3, 17, Severity::slight, AgeGroup::age_0_18),
      crash("B", 6, 12, Severity::fatal, AgeGroup::age_19_25),  // Saturday
      crash("Z", 2, 9, Severity::slight, AgeGroup::age_19_25),  // unknown zone
  };
  const auto t = build_tensor(crashes, two_zones(), ingest::DayClass::weekday);
  EXPECT_DOUBLE_EQ(t.values(0, 0, 17), 4.0 / 5.0);
  EXPECT_DOUBLE_EQ(t.total_before_normalization, 9.0);
  EXPECT_EQ(t.unassigned, 1u);
  const auto weekend = build_tensor(crashes, two_zones(), ingest::DayClass::weekend);
  EXPECT_DOUBLE_EQ(weekend.values(1, 1, 12), 1.0);
  EXPECT_DOUBLE_EQ(weekend.total_before_normalization, 5.0);
}

namespace {

TuckerModel pattern_model(const Matrix& spatial, const Matrix& age, const Matrix& time) {
  TuckerModel m;
  m.factors = {spatial, age, time};
  m.core = Tensor3(static_cast<std::size_t>(spatial.cols()), static_cast<std::size_t>(age.cols()),
                   static_cast<std::size_t>(time.cols()), 1.0);
  return m;
}

}  // namespace

TEST(Patterns, PeakLabelsAndDominantBands) {
  Matrix spatial(3, 1);
  spatial << 0.2, 0.9, 0.5;
  Matrix age = Matrix::Constant(7, 1, 0.1);
  age(2, 0) = 1.0;
  Matrix time = Matrix::Constant(24, 2, 0.1);
  time(8, 0) = 1.0;
  time.col(1).setConstant(0.5);
  const auto model = pattern_model(spatial, age, time);
  const std::vector<std::string> ids = {"a", "b", "c"};
  const auto report = extract_patterns(model, ids, 2);

  ASSERT_EQ(report.temporal.size(), 2u);
  EXPECT_EQ(report.temporal[0].label, "morning-peak");
  EXPECT_EQ(report.temporal[0].peak_hours, (std::vector<int>{8}));
  EXPECT_EQ(report.temporal[1].label, "off-peak");
  EXPECT_EQ(report.temporal[1].peak_hours.size(), 24u);
  ASSERT_EQ(report.age.size(), 1u);
  EXPECT_EQ(report.age[0].dominant, (std::vector<std::string>{"26-35"}));
  ASSERT_EQ(report.spatial[0].top_zones.size(), 2u);
  EXPECT_EQ(report.spatial[0].top_zones[0].first, "b");
  EXPECT_EQ(report.spatial[0].top_zones[1].first, "c");
}

TEST(Patterns, WindowBoundariesAreHalfOpen) {
  Matrix time = Matrix::Constant(24, 3, 0.0);
  time(10, 0) = 1.0;
  time(19, 1) = 1.0;
  time(15, 2) = 1.0;
  time(18, 2) = 1.0;
  const auto model = pattern_model(Matrix::Ones(1, 1), Matrix::Ones(7, 1), time);
  const std::vector<std::string> ids = {"z"};
  const auto report = extract_patterns(model, ids, 1);
  EXPECT_EQ(report.temporal[0].label, "off-peak");
  EXPECT_EQ(report.temporal[1].label, "evening-peak");
  EXPECT_EQ(report.temporal[2].label, "afternoon-peak");
}

TEST(Patterns, ZoneFieldMatchesDirectSum) {
  std::mt19937_64 rng(10);
  TuckerModel model;
  model.factors = {random_matrix(5, 3, rng).cwiseAbs(), random_matrix(7, 2, rng).cwiseAbs(),
                   random_matrix(24, 4, rng).cwiseAbs()};
  model.core = random_tensor(3, 2, 4, rng);
  const std::vector<std::string> ids = {"a", "b", "c", "d", "e"};
  const auto field = pattern_zone_field(model, ids, 1, 3);
  // same number via the full reconstruction contracted with unit age/time vectors
  Matrix pick_age = Matrix::Zero(1, 2);
  pick_age(0, 1) = 1.0;
  Matrix pick_time = Matrix::Zero(1, 4);
  pick_time(0, 3) = 1.0;
  const auto direct = tucker(model.core, model.factors[0], pick_age, pick_time);
  for (std::size_t z = 0; z < 5; ++z) EXPECT_NEAR(field.values[z], direct(z, 0, 0), 1e-12);
  EXPECT_THROW(pattern_zone_field(model, ids, 2, 0), std::out_of_range);
}

TEST(Sweep, RejectsUnsortedCandidates) {
  Tensor3 x(3, 7, 24, 1.0);
  const std::vector<std::size_t> bad = {3, 1};
  EXPECT_THROW(select_core_size(x, bad, 1, 1, 0.01, NtdOptions{}), std::invalid_argument);
}
