#include "qkf/data_pipeline.hpp"
#include "qkf/errors.hpp"
#include "qkf/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

using namespace qkf;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected qkf::Error");
  return ErrorCode::Io;
}

// Path following sigma = stiffness * eps along a ray, with per-increment
// multiplicative softening on each component.
LoadPath ray_path(const Strain& direction, const std::vector<double>& scales,
                  const std::vector<std::array<double, 3>>& softening) {
  static constexpr std::array<double, 3> stiffness{1000.0, 1000.0, 1000.0};
  LoadPath p{"p", {}, std::nullopt};
  for (std::size_t i = 0; i < scales.size(); ++i) {
    HomogenizedIncrement inc;
    for (int c = 0; c < 3; ++c) {
      inc.eps[c] = scales[i] * direction[c];
      inc.sig[c] = softening[i][c] * stiffness[c] * inc.eps[c];
    }
    p.increments.push_back(inc);
  }
  return p;
}

}  // namespace

TEST_CASE("homogenize_strains: direct ratios") {
  const PlateGeometry g;
  auto e = homogenize_strains({0.3, 0, 0, 0}, g);
  CHECK(e[0] == doctest::Approx(0.01));
  CHECK(e[1] == 0.0);
  CHECK(e[2] == 0.0);

  e = homogenize_strains({0, 0, 0.3, 0.3}, g);
  CHECK(e[0] == 0.0);
  CHECK(e[2] == doctest::Approx(0.02));

  e = homogenize_strains({0.15, -0.3, 0, 0}, g);
  CHECK(e[0] == doctest::Approx(0.005));
  CHECK(e[1] == doctest::Approx(-0.01));
}

TEST_CASE("homogenize_strains is linear in U") {
  Rng rng(11);
  const PlateGeometry g{25.0, 35.0, 1.5, 5.0};
  for (int trial = 0; trial < 50; ++trial) {
    Dof4 u;
    for (auto& v : u) v = rng.uniform(-1, 1);
    Dof4 u2;
    for (int k = 0; k < 4; ++k) u2[k] = 2.0 * u[k];
    const auto a = homogenize_strains(u, g), b = homogenize_strains(u2, g);
    for (int c = 0; c < 3; ++c) CHECK(b[c] == 2.0 * a[c]);
  }
}

TEST_CASE("homogenize_strains rejects non-finite input and bad geometry") {
  CHECK(code_of([] { homogenize_strains({NAN, 0, 0, 0}, PlateGeometry{}); }) == ErrorCode::InvalidRecord);
  CHECK(code_of([] { homogenize_strains({0, 0, 0, 0}, PlateGeometry{0.0, 30, 1, 6}); }) == ErrorCode::Parameter);
}

TEST_CASE("homogenize_stresses") {
  const PlateGeometry g;
  auto s = homogenize_stresses({30, 0, 0, 0}, {0, 0, 0, 0}, 0.0, g);
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[2] == 0.0);

  s = homogenize_stresses({0, 0, 1, 0}, {0, 0, 0.3, 0}, 0.01, g);
  CHECK(s[2] == doctest::Approx(0.3 / 9.0));

  s = homogenize_stresses({0, 60, 0, 0}, {0, 0, 0, 0}, 0.0, PlateGeometry{20, 30, 2, 4});
  CHECK(s[1] == doctest::Approx(60.0 / (2.0 * 20.0)));

  CHECK(code_of([&] { homogenize_stresses({0, 0, 1, 0}, {0, 0, 0, 0}, 0.0, g); }) ==
        ErrorCode::ShearSingularity);
}

TEST_CASE("homogenize_path requires increasing time") {
  std::vector<RawIncrement> raw(2);
  raw[0].time = 0.5;
  raw[1].time = 0.5;
  raw[1].u = {0.3, 0, 0, 0};
  CHECK(code_of([&] { homogenize_path("x", raw, PlateGeometry{}); }) == ErrorCode::InvalidRecord);
  raw[1].time = 1.0;
  const auto p = homogenize_path("x", raw, PlateGeometry{});
  REQUIRE(p.increments.size() == 2);
  CHECK(p.increments[1].eps[0] == doctest::Approx(0.01));
}

TEST_CASE("stiffness_history: linear path has dS = 1 everywhere") {
  const auto p = ray_path({0.004, -0.002, 0.003}, {0.1, 0.5, 1.0, 2.0},
                          std::vector<std::array<double, 3>>(4, {1, 1, 1}));
  for (const auto& s : stiffness_history(p)) CHECK(s.ds == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stiffness_history: min picks the halved ratio") {
  const auto p = ray_path({0.004, -0.002, 0.003}, {0.25, 0.5, 1.0},
                          {{1, 1, 1}, {1, 1, 1}, {1, 0.5, 1}});
  const auto h = stiffness_history(p);
  CHECK(h[1].ds == doctest::Approx(1.0));
  CHECK(h[2].ds == doctest::Approx(0.5));
  REQUIRE(h[2].secant[1]);
  CHECK(*h[2].secant[1] == doctest::Approx(500.0));
}

TEST_CASE("stiffness_history: zero components are excluded") {
  // Hand evaluation: E1 falls from 1000 to 800, eps22 and gam12 stay zero.
  const auto p = ray_path({0.005, 0.0, 0.0}, {0.2, 0.6, 1.0}, {{1, 1, 1}, {0.9, 1, 1}, {0.8, 1, 1}});
  const auto h = stiffness_history(p);
  CHECK(h[2].ds == doctest::Approx(0.8));
  CHECK_FALSE(h[2].secant[1]);
  CHECK_FALSE(h[2].secant[2]);
}

TEST_CASE("stiffness_history: baseline skips increments below eps_div") {
  // Increment 0 sits at the origin; the baseline is increment 1.
  const auto p = ray_path({0.005, 0.002, 0.0}, {0.0, 0.2, 1.0}, {{1, 1, 1}, {1, 1, 1}, {0.7, 1, 1}});
  CHECK(baseline_window(p).begin == 1);
  const auto h = stiffness_history(p);
  CHECK(h[0].ds == 1.0);
  CHECK(h[2].ds == doctest::Approx(0.7));
}

TEST_CASE("stiffness_history: explicit baseline window averages secants") {
  auto p = ray_path({0.005, 0.0, 0.0}, {0.2, 0.4, 1.0}, {{1, 1, 1}, {0.9, 1, 1}, {0.76, 1, 1}});
  p.baseline_window = IndexRange{0, 2};
  const auto h = stiffness_history(p);
  CHECK(h[2].ds == doctest::Approx(0.76 / 0.95));
  p.baseline_window = IndexRange{2, 5};
  CHECK(code_of([&] { stiffness_history(p); }) == ErrorCode::DegeneratePath);
}

TEST_CASE("stiffness_history: degenerate paths") {
  const auto zero = ray_path({0, 0, 0}, {1, 2}, {{1, 1, 1}, {1, 1, 1}});
  CHECK(code_of([&] { stiffness_history(zero); }) == ErrorCode::DegeneratePath);
  const auto single = ray_path({0.01, 0, 0}, {1}, {{1, 1, 1}});
  CHECK(code_of([&] { stiffness_history(single); }) == ErrorCode::DegeneratePath);
}

TEST_CASE("constant secant law gives dS == 1 within 1e-12") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    LoadPath p{"c", {}, std::nullopt};
    Strain dir;
    for (auto& v : dir) v = rng.uniform(-0.01, 0.01);
    const double c11 = rng.uniform(1e4, 6e4), c12 = rng.uniform(0, 1e4), c66 = rng.uniform(5e3, 2e4);
    for (double s : {0.1, 0.3, 0.6, 1.0}) {
      HomogenizedIncrement inc;
      inc.eps = {s * dir[0], s * dir[1], s * dir[2]};
      inc.sig = {c11 * inc.eps[0] + c12 * inc.eps[1], c12 * inc.eps[0] + c11 * inc.eps[1], c66 * inc.eps[2]};
      p.increments.push_back(inc);
    }
    for (const auto& st : stiffness_history(p)) CHECK(std::abs(st.ds - 1.0) <= 1e-12);
  }
}

TEST_CASE("label_samples: strict threshold") {
  auto labels_for = [](double final_ratio) {
    const auto p = ray_path({0.005, 0.005, 0.005}, {0.2, 1.0}, {{1, 1, 1}, {final_ratio, 1, 1}});
    return label_samples({p}, 0.9);
  };
  CHECK(labels_for(0.85)[1].y == -1);
  CHECK(labels_for(0.95)[1].y == 1);
  CHECK(labels_for(0.9)[1].y == 1);
  CHECK(labels_for(0.85)[0].y == 1);
  CHECK(code_of([] { label_samples({}, 1.0); }) == ErrorCode::Parameter);
  CHECK(code_of([] { label_samples({}, 0.0); }) == ErrorCode::Parameter);
}

TEST_CASE("labeling is monotone in the threshold") {
  const auto synth = synth_oracle_dataset(200, 3);
  const auto low = label_samples(synth.paths, 0.5);
  for (double t : {0.6, 0.7, 0.8, 0.9, 0.95}) {
    const auto high = label_samples(synth.paths, t);
    for (std::size_t i = 0; i < low.size(); ++i)
      if (low[i].y == -1) CHECK(high[i].y == -1);
  }
}

TEST_CASE("scale_features maps the hypercube onto the target") {
  const auto c = Scaler::classical();
  CHECK(c.forward(0.01) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c.forward(-0.01) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(c.forward(0.0) == 0.0);
  const auto q = Scaler::quantum();
  CHECK(q.forward(0.01) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
  CHECK(q.forward(0.0) == 0.0);
  CHECK(code_of([] { Scaler::to_interval(1.0, 1.0); }) == ErrorCode::Parameter);

  const auto [scaled, scaler] = scale_features({{{0.01, 0.0, -0.005}, -1}}, c);
  CHECK(scaled[0].eps[0] == doctest::Approx(1.0));
  CHECK(scaled[0].eps[2] == doctest::Approx(-0.5));
  CHECK(scaled[0].y == -1);
  CHECK(scaler == c);
}

TEST_CASE("scaler is invertible within 1e-12") {
  Rng rng(9);
  for (const auto& s : {Scaler::classical(), Scaler::quantum(), Scaler::to_interval(-3.0, 7.0)}) {
    for (int i = 0; i < 200; ++i) {
      const double x = rng.uniform(-0.01, 0.01);
      CHECK(std::abs(s.inverse(s.forward(x)) - x) <= 1e-12);
    }
  }
}

TEST_CASE("split_dataset: sizes, stratification, determinism, partition") {
  Dataset ds;
  for (int i = 0; i < 10; ++i) ds.samples.push_back({{0.001 * i, 0, 0}, i < 5 ? 1 : -1});
  auto [train, test] = split_dataset(ds, 0.2, 42);
  CHECK(train.class_counts() == std::array<std::size_t, 2>{4, 4});
  CHECK(test.class_counts() == std::array<std::size_t, 2>{1, 1});

  const auto synth = synth_oracle_dataset(1960, 1).dataset;
  auto [tr, te] = split_dataset(synth, 0.2, 7);
  CHECK(tr.size() == 1568);
  CHECK(te.size() == 392);
  const auto all = synth.class_counts();
  const auto tc = te.class_counts();
  for (int c = 0; c < 2; ++c) CHECK(std::abs(double(tc[c]) - 0.2 * double(all[c])) <= 1.0);

  auto [tr2, te2] = split_dataset(synth, 0.2, 7);
  REQUIRE(tr2.size() == tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) CHECK(tr.path_ids[i] == tr2.path_ids[i]);

  std::set<std::string> seen;
  for (const auto& id : tr.path_ids) seen.insert(id);
  for (const auto& id : te.path_ids) CHECK(seen.insert(id).second);
  CHECK(seen.size() == synth.size());
}

TEST_CASE("split_dataset: stratification needs two members per class") {
  Dataset ds;
  ds.samples = {{{0, 0, 0}, 1}, {{0, 0, 0}, 1}, {{0, 0, 0}, 1}, {{0, 0, 0}, -1}};
  CHECK(code_of([&] { split_dataset(ds, 0.25, 0); }) == ErrorCode::Stratification);
  CHECK(code_of([&] { split_dataset(ds, 1.0, 0); }) == ErrorCode::Parameter);
}

TEST_CASE("synthetic oracle: closed-form labels") {
  CHECK(SyntheticOracle::closed_form_label({0, 0, 0}) == 1);
  // Point on the envelope along eps11: A11 * e^2 = 1.
  const double e = 1.0 / std::sqrt(SyntheticOracle::kEnvelope[0][0]);
  CHECK(SyntheticOracle::quadratic_form({e, 0, 0}) == doctest::Approx(1.0));
  CHECK(SyntheticOracle::closed_form_label({2 * e, 0, 0}) == -1);
  CHECK_THROWS(synth_oracle_dataset(3, 0));
}

TEST_CASE("synthetic oracle: pipeline labels agree with the closed form") {
  const auto synth = synth_oracle_dataset(200, 17);
  const auto labeled = label_samples(synth.paths, 0.9);
  REQUIRE(labeled.size() == 400);
  std::size_t agree = 0;
  for (const auto& s : labeled) agree += s.y == SyntheticOracle::closed_form_label(s.eps);
  CHECK(agree == labeled.size());
  for (std::size_t i = 0; i < synth.dataset.size(); ++i) {
    CHECK(labeled[2 * i + 1].y == synth.dataset.samples[i].y);
    for (double v : synth.dataset.samples[i].eps) CHECK(std::abs(v) <= kStrainBound);
  }
  const auto counts = synth.dataset.class_counts();
  CHECK(counts[0] + counts[1] == 200);
  CHECK(counts[0] > 0);
  CHECK(counts[1] > 0);
}
