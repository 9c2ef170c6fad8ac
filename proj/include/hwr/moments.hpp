#pragma once

#include <array>
#include <utility>
#include <vector>

#include "hwr/imaging.hpp"

namespace hwr {

/// Central moments v_pq for p + q <= 3, unit mass per ink pixel, x along
/// columns and y along rows.
struct CentralMoments {
  double v00 = 0.0;
  double v20 = 0.0, v11 = 0.0, v02 = 0.0;
  double v30 = 0.0, v21 = 0.0, v12 = 0.0, v03 = 0.0;
  double cx = 0.0, cy = 0.0;  // ink centroid

  // v10 and v01 vanish about the centroid.
  static constexpr double v10 = 0.0;
  static constexpr double v01 = 0.0;
};

CentralMoments central_moments(const GrayImage& binary);

using HuVector = std::array<double, 7>;

HuVector hu_invariants(const CentralMoments& m);

/// (order m, repetition n) with |n| <= m and m - |n| even.
struct ZernikeIndex {
  int m = 0;
  int n = 0;
  bool operator==(const ZernikeIndex&) const = default;
};

void validate_zernike_index(ZernikeIndex idx);

/// Radial polynomial R_mn(r).
double zernike_radial(int m, int n, double r);

enum class DiskMapping {
  /// Unit disk circumscribes the image: r_max is half the diagonal, so every
  /// pixel contributes.
  circumscribed,
  /// Unit disk inscribed in the image: r_max is half the shorter side;
  /// pixels outside the disk are dropped.
  inscribed,
};

/// |A_mn| / |A_00| for each requested index, in the order given.
std::vector<double> zernike_moments(const GrayImage& binary, const std::vector<ZernikeIndex>& indices,
                                    DiskMapping mapping = DiskMapping::circumscribed);

inline constexpr std::size_t kFeatureSize = 12;
using FeatureVector = std::array<double, kFeatureSize>;

/// |A_11|, |A_20|, |A_22|, |A_31|, |A_33|.
std::vector<ZernikeIndex> default_zernike_indices();

struct FeatureConfig {
  std::vector<ZernikeIndex> zernike = default_zernike_indices();
  DiskMapping mapping = DiskMapping::circumscribed;
};

/// [phi1..phi7, z1..z5]. Throws empty_ink on a blank image.
FeatureVector feature_vector(const GrayImage& binary, const FeatureConfig& config = {});

/// As feature_vector, but blank images yield the zero vector. `blank` is set
/// when that substitution happened.
FeatureVector feature_vector_or_zero(const GrayImage& binary, const FeatureConfig& config,
                                     bool* blank = nullptr);

}  // namespace hwr
