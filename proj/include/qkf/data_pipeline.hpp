#pragma once

// Load-path post-processing for open-hole plate simulations: homogenized
// strains and stresses from periodic-boundary reference DOFs, secant
// stiffness degradation along a path, and failure labels.

#include "qkf/types.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qkf {

using Strain = std::array<double, 3>;  // [eps11, eps22, gam12]
using Stress = std::array<double, 3>;  // [sig11, sig22, sig12], MPa
using Dof4 = std::array<double, 4>;

inline constexpr double kDefaultEpsDiv = 1e-8;
inline constexpr double kDefaultThreshold = 0.9;
// Sampling hypercube half-width for every strain component.
inline constexpr double kStrainBound = 1e-2;

struct PlateGeometry {
  double d1 = 30.0;  // mm
  double d2 = 30.0;  // mm
  double t = 1.0;    // mm
  double hole_diameter = 6.0;  // mm

  void validate() const;
};

struct RawIncrement {
  Dof4 u{};  // reference-DOF displacements, mm
  Dof4 f{};  // conjugate reaction forces, N
  double time = 0.0;
};

struct HomogenizedIncrement {
  Strain eps{};
  Stress sig{};
};

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
};

struct LoadPath {
  std::string path_id;
  std::vector<HomogenizedIncrement> increments;
  // Increments used as the linear-elastic reference. When absent the first
  // increment whose active strain components all exceed eps_div is used.
  std::optional<IndexRange> baseline_window;
};

struct StiffnessState {
  // Secant stiffnesses E1, E2, G12 (MPa); empty when the strain component is
  // at or below eps_div at this increment.
  std::array<std::optional<double>, 3> secant;
  double ds = 1.0;
};

struct LabeledSample {
  Strain eps{};
  int y = 1;
};

Strain homogenize_strains(const Dof4& u, const PlateGeometry& geom);

// Throws ShearSingularity when |gamma12| <= eps_div while any shear DOF
// (U3, U4, F3, F4) is nonzero; sig12 = 0 when they all vanish.
Stress homogenize_stresses(const Dof4& f, const Dof4& u, double gamma12,
                           const PlateGeometry& geom,
                           double eps_div = kDefaultEpsDiv);

HomogenizedIncrement homogenize(const RawIncrement& raw,
                                const PlateGeometry& geom,
                                double eps_div = kDefaultEpsDiv);

// Converts a raw path; time must be strictly increasing.
LoadPath homogenize_path(std::string path_id,
                         const std::vector<RawIncrement>& raw,
                         const PlateGeometry& geom,
                         double eps_div = kDefaultEpsDiv);

IndexRange baseline_window(const LoadPath& path,
                           double eps_div = kDefaultEpsDiv);

std::vector<StiffnessState> stiffness_history(const LoadPath& path,
                                              double eps_div = kDefaultEpsDiv);

std::vector<LabeledSample> label_samples(const std::vector<LoadPath>& paths,
                                         double threshold = kDefaultThreshold,
                                         double eps_div = kDefaultEpsDiv);

// Per-feature affine map from the sampling hypercube [-1e-2, 1e-2] onto a
// target interval. Fixed by the hypercube, never fitted to data.
struct Scaler {
  double source_lo = -kStrainBound;
  double source_hi = kStrainBound;
  double target_lo = -1.0;
  double target_hi = 1.0;

  static Scaler classical();  // [-1, 1]
  static Scaler quantum();    // [-pi/2, pi/2]
  static Scaler to_interval(double lo, double hi);

  double forward(double v) const;
  double inverse(double v) const;
  Strain forward(const Strain& e) const;
  Strain inverse(const Strain& e) const;

  bool operator==(const Scaler&) const = default;
};

struct Dataset {
  std::vector<LabeledSample> samples;
  // Optional provenance, parallel to samples (path id, increment index).
  std::vector<std::string> path_ids;
  std::vector<std::size_t> increments;
  Scaler scaler;
  std::uint64_t split_seed = 0;

  std::size_t size() const { return samples.size(); }
  // {non-failed (+1), failed (-1)}
  std::array<std::size_t, 2> class_counts() const;
  Labels labels() const;
  // Rows are samples mapped through `scaler` (or an explicit one).
  FeatureMatrix features() const;
  FeatureMatrix features(const Scaler& with) const;
  Dataset subset(const std::vector<std::size_t>& idx) const;
};

Dataset make_dataset(const std::vector<LoadPath>& paths,
                     double threshold = kDefaultThreshold,
                     double eps_div = kDefaultEpsDiv);

std::pair<std::vector<LabeledSample>, Scaler> scale_features(
    const std::vector<LabeledSample>& samples, const Scaler& scaler);

// Stratified split. Total test size is round(test_fraction * N), shared
// between classes by largest remainder so each class is within one sample of
// its exact share.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds,
                                          double test_fraction,
                                          std::uint64_t seed);

// Analytic stand-in for FE data: the failure envelope is the ellipsoid
// eps^T A eps = 1 with A = kEnvelope.
struct SyntheticOracle {
  static const std::array<std::array<double, 3>, 3> kEnvelope;

  static double quadratic_form(const Strain& e);
  static int closed_form_label(const Strain& e);
  // Isotropic secant factor applied to a reference stiffness: 1 inside the
  // envelope, 0.85 / sqrt(q) outside (always below 0.9).
  static double secant_factor(const Strain& e);
  static Stress stress(const Strain& e);
};

struct SyntheticData {
  Dataset dataset;
  // One two-increment path per sample: a baseline at 25% of the terminal
  // strain followed by the sample itself.
  std::vector<LoadPath> paths;
};

SyntheticData synth_oracle_dataset(std::size_t n, std::uint64_t seed);

}  // namespace qkf
