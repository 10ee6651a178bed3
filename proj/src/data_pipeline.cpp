#include "qkf/data_pipeline.hpp"

#include "qkf/errors.hpp"
#include "qkf/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace qkf {

namespace {

bool all_finite(const Dof4& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void PlateGeometry::validate() const {
  const bool ok = d1 > 0 && d2 > 0 && t > 0 && hole_diameter > 0 &&
                  std::isfinite(d1) && std::isfinite(d2) && std::isfinite(t) &&
                  std::isfinite(hole_diameter);
  if (!ok)
    throw Error(ErrorCode::Parameter,
                "plate geometry requires strictly positive D1, D2, t and hole diameter");
}

Strain homogenize_strains(const Dof4& u, const PlateGeometry& geom) {
  geom.validate();
  if (!all_finite(u))
    throw Error(ErrorCode::InvalidRecord, "non-finite reference displacement");
  return {u[0] / geom.d1, u[1] / geom.d2, u[2] / geom.d1 + u[3] / geom.d2};
}

Stress homogenize_stresses(const Dof4& f, const Dof4& u, double gamma12,
                           const PlateGeometry& geom, double eps_div) {
  geom.validate();
  if (!all_finite(f) || !all_finite(u) || !std::isfinite(gamma12))
    throw Error(ErrorCode::InvalidRecord, "non-finite reaction force or displacement");
  const double shear_work = f[2] * u[2] + f[3] * u[3];
  double sig12 = 0.0;
  if (std::abs(gamma12) > eps_div) {
    sig12 = shear_work / (gamma12 * geom.t * geom.d1 * geom.d2);
  } else if (f[2] != 0.0 || f[3] != 0.0 || u[2] != 0.0 || u[3] != 0.0) {
    throw Error(ErrorCode::ShearSingularity,
                "shear strain below eps_div with nonzero shear DOFs");
  }
  return {f[0] / (geom.t * geom.d2), f[1] / (geom.t * geom.d1), sig12};
}

HomogenizedIncrement homogenize(const RawIncrement& raw, const PlateGeometry& geom,
                                double eps_div) {
  HomogenizedIncrement inc;
  inc.eps = homogenize_strains(raw.u, geom);
  inc.sig = homogenize_stresses(raw.f, raw.u, inc.eps[2], geom, eps_div);
  return inc;
}

LoadPath homogenize_path(std::string path_id, const std::vector<RawIncrement>& raw,
                         const PlateGeometry& geom, double eps_div) {
  LoadPath path{std::move(path_id), {}, std::nullopt};
  path.increments.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (i > 0 && !(raw[i].time > raw[i - 1].time))
      throw Error(ErrorCode::InvalidRecord,
                  "path " + path.path_id + ": time not strictly increasing at increment " +
                      std::to_string(i));
    path.increments.push_back(homogenize(raw[i], geom, eps_div));
  }
  return path;
}

namespace {

std::array<bool, 3> active_components(const LoadPath& path, double eps_div) {
  std::array<bool, 3> active{false, false, false};
  for (const auto& inc : path.increments)
    for (int c = 0; c < 3; ++c)
      if (std::abs(inc.eps[c]) > eps_div) active[c] = true;
  return active;
}

}  // namespace

IndexRange baseline_window(const LoadPath& path, double eps_div) {
  const auto n = path.increments.size();
  if (path.baseline_window) {
    const auto w = *path.baseline_window;
    if (w.begin >= w.end || w.end > n)
      throw Error(ErrorCode::DegeneratePath,
                  "path " + path.path_id + ": baseline window out of range");
    return w;
  }
  const auto active = active_components(path, eps_div);
  if (std::none_of(active.begin(), active.end(), [](bool a) { return a; }))
    throw Error(ErrorCode::DegeneratePath,
                "path " + path.path_id + ": no strain component exceeds eps_div");
  for (std::size_t i = 0; i < n; ++i) {
    bool ok = true;
    for (int c = 0; c < 3; ++c)
      if (active[c] && !(std::abs(path.increments[i].eps[c]) > eps_div)) ok = false;
    if (ok) return {i, i + 1};
  }
  throw Error(ErrorCode::DegeneratePath,
              "path " + path.path_id + ": no increment has every active component above eps_div");
}

std::vector<StiffnessState> stiffness_history(const LoadPath& path, double eps_div) {
  if (path.increments.size() < 2)
    throw Error(ErrorCode::DegeneratePath,
                "path " + path.path_id + ": fewer than 2 increments");

  auto secants = [eps_div](const HomogenizedIncrement& inc) {
    std::array<std::optional<double>, 3> s;
    for (int c = 0; c < 3; ++c)
      if (std::abs(inc.eps[c]) > eps_div) s[c] = inc.sig[c] / inc.eps[c];
    return s;
  };

  const auto window = baseline_window(path, eps_div);
  std::array<double, 3> reference{0.0, 0.0, 0.0};
  std::array<bool, 3> usable{false, false, false};
  for (int c = 0; c < 3; ++c) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = window.begin; i < window.end; ++i) {
      if (const auto s = secants(path.increments[i])[c]) {
        sum += *s;
        ++count;
      }
    }
    if (count > 0) {
      reference[c] = sum / static_cast<double>(count);
      usable[c] = std::isfinite(reference[c]) && reference[c] != 0.0;
    }
  }
  if (std::none_of(usable.begin(), usable.end(), [](bool u) { return u; }))
    throw Error(ErrorCode::DegeneratePath,
                "path " + path.path_id + ": no usable baseline stiffness");

  std::vector<StiffnessState> history;
  history.reserve(path.increments.size());
  for (const auto& inc : path.increments) {
    StiffnessState state;
    state.secant = secants(inc);
    double ds = 1.0;
    bool any = false;
    for (int c = 0; c < 3; ++c) {
      if (!usable[c] || !state.secant[c]) continue;
      const double ratio = *state.secant[c] / reference[c];
      ds = any ? std::min(ds, ratio) : ratio;
      any = true;
    }
    state.ds = ds;
    history.push_back(state);
  }
  return history;
}

std::vector<LabeledSample> label_samples(const std::vector<LoadPath>& paths,
                                         double threshold, double eps_div) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw Error(ErrorCode::Parameter, "degradation threshold must lie in (0, 1)");
  std::vector<LabeledSample> out;
  for (const auto& path : paths) {
    const auto history = stiffness_history(path, eps_div);
    for (std::size_t i = 0; i < history.size(); ++i)
      out.push_back({path.increments[i].eps, history[i].ds < threshold ? -1 : 1});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scaling

Scaler Scaler::classical() { return to_interval(-1.0, 1.0); }

Scaler Scaler::quantum() {
  return to_interval(-std::numbers::pi / 2, std::numbers::pi / 2);
}

Scaler Scaler::to_interval(double lo, double hi) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw Error(ErrorCode::Parameter, "scaler target interval is degenerate");
  Scaler s;
  s.target_lo = lo;
  s.target_hi = hi;
  return s;
}

double Scaler::forward(double v) const {
  const double src_mid = 0.5 * (source_lo + source_hi);
  const double tgt_mid = 0.5 * (target_lo + target_hi);
  return tgt_mid + (v - src_mid) * ((target_hi - target_lo) / (source_hi - source_lo));
}

double Scaler::inverse(double v) const {
  const double src_mid = 0.5 * (source_lo + source_hi);
  const double tgt_mid = 0.5 * (target_lo + target_hi);
  return src_mid + (v - tgt_mid) * ((source_hi - source_lo) / (target_hi - target_lo));
}

Strain Scaler::forward(const Strain& e) const {
  return {forward(e[0]), forward(e[1]), forward(e[2])};
}

Strain Scaler::inverse(const Strain& e) const {
  return {inverse(e[0]), inverse(e[1]), inverse(e[2])};
}

std::pair<std::vector<LabeledSample>, Scaler> scale_features(
    const std::vector<LabeledSample>& samples, const Scaler& scaler) {
  std::vector<LabeledSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({scaler.forward(s.eps), s.y});
  return {std::move(out), scaler};
}

// ---------------------------------------------------------------------------
// Dataset

std::array<std::size_t, 2> Dataset::class_counts() const {
  std::array<std::size_t, 2> counts{0, 0};
  for (const auto& s : samples) ++counts[s.y > 0 ? 0 : 1];
  return counts;
}

Labels Dataset::labels() const {
  Labels y;
  y.reserve(samples.size());
  for (const auto& s : samples) y.push_back(s.y);
  return y;
}

FeatureMatrix Dataset::features() const { return features(scaler); }

FeatureMatrix Dataset::features(const Scaler& with) const {
  FeatureMatrix X(static_cast<Eigen::Index>(samples.size()), 3);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto e = with.forward(samples[i].eps);
    for (int c = 0; c < 3; ++c) X(static_cast<Eigen::Index>(i), c) = e[c];
  }
  return X;
}

Dataset Dataset::subset(const std::vector<std::size_t>& idx) const {
  Dataset out;
  out.scaler = scaler;
  out.split_seed = split_seed;
  const bool provenance = path_ids.size() == samples.size();
  for (auto i : idx) {
    out.samples.push_back(samples.at(i));
    if (provenance) {
      out.path_ids.push_back(path_ids[i]);
      out.increments.push_back(increments[i]);
    }
  }
  return out;
}

Dataset make_dataset(const std::vector<LoadPath>& paths, double threshold,
                     double eps_div) {
  Dataset ds;
  ds.samples = label_samples(paths, threshold, eps_div);
  for (const auto& p : paths)
    for (std::size_t i = 0; i < p.increments.size(); ++i) {
      ds.path_ids.push_back(p.path_id);
      ds.increments.push_back(i);
    }
  return ds;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double test_fraction,
                                          std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(ErrorCode::Parameter, "test fraction must lie in (0, 1)");

  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    by_class[ds.samples[i].y > 0 ? 0 : 1].push_back(i);
  for (const auto& members : by_class)
    if (members.size() < 2)
      throw Error(ErrorCode::Stratification,
                  "stratified split needs at least 2 samples per class");

  const auto total = static_cast<double>(ds.samples.size());
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * total));
  std::array<std::size_t, 2> take{};
  std::array<double, 2> remainder{};
  std::size_t assigned = 0;
  for (int c = 0; c < 2; ++c) {
    const double exact = test_fraction * static_cast<double>(by_class[c].size());
    take[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - std::floor(exact);
    assigned += take[c];
  }
  while (assigned < n_test) {
    const int c = remainder[0] >= remainder[1] ? 0 : 1;
    ++take[c];
    remainder[c] = -1.0;
    ++assigned;
  }

  Rng rng(seed);
  std::vector<std::size_t> train_idx, test_idx;
  for (int c = 0; c < 2; ++c) {
    auto members = by_class[c];
    rng.shuffle(std::span<std::size_t>(members));
    test_idx.insert(test_idx.end(), members.begin(), members.begin() + take[c]);
    train_idx.insert(train_idx.end(), members.begin() + take[c], members.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  auto train = ds.subset(train_idx);
  auto test = ds.subset(test_idx);
  train.split_seed = test.split_seed = seed;
  return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// Synthetic oracle

const std::array<std::array<double, 3>, 3> SyntheticOracle::kEnvelope{{
    {1.0e4, 0.3e4, 0.1e4},
    {0.3e4, 1.3e4, -0.2e4},
    {0.1e4, -0.2e4, 0.8e4},
}};

double SyntheticOracle::quadratic_form(const Strain& e) {
  double q = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q += e[i] * kEnvelope[i][j] * e[j];
  return q;
}

int SyntheticOracle::closed_form_label(const Strain& e) {
  return quadratic_form(e) > 1.0 ? -1 : 1;
}

double SyntheticOracle::secant_factor(const Strain& e) {
  const double q = quadratic_form(e);
  return q > 1.0 ? 0.85 / std::sqrt(q) : 1.0;
}

Stress SyntheticOracle::stress(const Strain& e) {
  // Reference in-plane stiffness of a quasi-isotropic laminate, MPa.
  static constexpr double c11 = 5.0e4, c12 = 1.5e4, c66 = 1.8e4;
  const double d = secant_factor(e);
  return {d * (c11 * e[0] + c12 * e[1]), d * (c12 * e[0] + c11 * e[1]), d * c66 * e[2]};
}

SyntheticData synth_oracle_dataset(std::size_t n, std::uint64_t seed) {
  if (n < 4) throw Error(ErrorCode::Parameter, "synthetic dataset needs n >= 4");
  SyntheticData out;
  out.dataset.scaler = Scaler::classical();
  out.dataset.split_seed = seed;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    Strain e;
    for (auto& c : e) c = rng.uniform(-kStrainBound, kStrainBound);
    out.dataset.samples.push_back({e, SyntheticOracle::closed_form_label(e)});
    out.dataset.path_ids.push_back("syn" + std::to_string(i));
    out.dataset.increments.push_back(1);

    const Strain base{0.25 * e[0], 0.25 * e[1], 0.25 * e[2]};
    LoadPath path{"syn" + std::to_string(i), {}, std::nullopt};
    path.increments.push_back({base, SyntheticOracle::stress(base)});
    path.increments.push_back({e, SyntheticOracle::stress(e)});
    out.paths.push_back(std::move(path));
  }
  return out;
}

}  // namespace qkf
