#include "hwr/moments.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <string>

#include "hwr/error.hpp"

namespace hwr {

CentralMoments central_moments(const GrayImage& binary) {
  std::int64_t n = 0, sx = 0, sy = 0;
  for (int y = 0; y < binary.height(); ++y)
    for (int x = 0; x < binary.width(); ++x)
      if (is_ink(binary.at(x, y))) {
        ++n;
        sx += x;
        sy += y;
      }
  if (n == 0) throw Error(ErrorCode::empty_ink, "image has no ink pixels");

  CentralMoments m;
  m.v00 = static_cast<double>(n);
  m.cx = static_cast<double>(sx) / m.v00;
  m.cy = static_cast<double>(sy) / m.v00;

  // Offsets scaled by N, n*x - sx, are exact integers, so the sums below are
  // exact: translating the ink changes nothing and mirroring flips the sign
  // of the odd moments bit-for-bit. 128-bit sums hold |offset|^3 * N for
  // images up to about a megapixel; beyond that fall back to doubles.
  const std::int64_t side = std::max(binary.width(), binary.height());
  if (n <= (std::int64_t{1} << 20) && side <= 4096) {
    __extension__ typedef __int128 wide;
    wide s20 = 0, s11 = 0, s02 = 0, s30 = 0, s21 = 0, s12 = 0, s03 = 0;
    for (int y = 0; y < binary.height(); ++y) {
      const wide dy = static_cast<wide>(n) * y - sy;
      for (int x = 0; x < binary.width(); ++x) {
        if (!is_ink(binary.at(x, y))) continue;
        const wide dx = static_cast<wide>(n) * x - sx;
        s20 += dx * dx;
        s11 += dx * dy;
        s02 += dy * dy;
        s30 += dx * dx * dx;
        s21 += dx * dx * dy;
        s12 += dx * dy * dy;
        s03 += dy * dy * dy;
      }
    }
    const double n2 = m.v00 * m.v00, n3 = n2 * m.v00;
    m.v20 = static_cast<double>(s20) / n2;
    m.v11 = static_cast<double>(s11) / n2;
    m.v02 = static_cast<double>(s02) / n2;
    m.v30 = static_cast<double>(s30) / n3;
    m.v21 = static_cast<double>(s21) / n3;
    m.v12 = static_cast<double>(s12) / n3;
    m.v03 = static_cast<double>(s03) / n3;
    return m;
  }

  for (int y = 0; y < binary.height(); ++y) {
    const double dy = y - m.cy;
    for (int x = 0; x < binary.width(); ++x) {
      if (!is_ink(binary.at(x, y))) continue;
      const double dx = x - m.cx;
      const double dx2 = dx * dx, dy2 = dy * dy;
      m.v20 += dx2;
      m.v11 += dx * dy;
      m.v02 += dy2;
      m.v30 += dx2 * dx;
      m.v21 += dx2 * dy;
      m.v12 += dx * dy2;
      m.v03 += dy2 * dy;
    }
  }
  return m;
}

HuVector hu_invariants(const CentralMoments& m) {
  // u_pq = v_pq / v00^(1 + (p+q)/2)
  const double s2 = m.v00 * m.v00;
  const double s3 = std::pow(m.v00, 2.5);
  const double u20 = m.v20 / s2, u02 = m.v02 / s2, u11 = m.v11 / s2;
  const double u30 = m.v30 / s3, u03 = m.v03 / s3, u21 = m.v21 / s3, u12 = m.v12 / s3;

  const double a = u30 + u12;        // appears throughout
  const double b = u21 + u03;
  const double c = u30 - 3.0 * u12;
  const double d = 3.0 * u21 - u03;

  HuVector phi;
  phi[0] = u20 + u02;
  phi[1] = (u20 - u02) * (u20 - u02) + 4.0 * u11 * u11;
  phi[2] = c * c + d * d;
  phi[3] = a * a + b * b;
  phi[4] = c * a * (a * a - 3.0 * b * b) + d * b * (3.0 * a * a - b * b);
  phi[5] = (u20 - u02) * (a * a - b * b) + 4.0 * u11 * a * b;
  phi[6] = d * a * (a * a - 3.0 * b * b) - c * b * (3.0 * a * a - b * b);
  return phi;
}

void validate_zernike_index(ZernikeIndex idx) {
  if (idx.m < 0 || std::abs(idx.n) > idx.m || (idx.m - std::abs(idx.n)) % 2 != 0)
    throw Error(ErrorCode::invalid_index,
                "Zernike index (" + std::to_string(idx.m) + ", " + std::to_string(idx.n) + ")");
}

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

double zernike_radial(int m, int n, double r) {
  validate_zernike_index({m, n});
  const int an = std::abs(n);
  double sum = 0.0;
  for (int s = 0; s <= (m - an) / 2; ++s) {
    const double coeff = factorial(m - s) /
                         (factorial(s) * factorial((m + an) / 2 - s) * factorial((m - an) / 2 - s));
    sum += (s % 2 == 0 ? coeff : -coeff) * std::pow(r, m - 2 * s);
  }
  return sum;
}

std::vector<double> zernike_moments(const GrayImage& binary, const std::vector<ZernikeIndex>& indices,
                                    DiskMapping mapping) {
  for (const auto& idx : indices) validate_zernike_index(idx);

  const double cx = (binary.width() - 1) / 2.0;
  const double cy = (binary.height() - 1) / 2.0;
  const double r_max = mapping == DiskMapping::circumscribed
                           ? std::hypot(binary.width(), binary.height()) / 2.0
                           : std::min(binary.width(), binary.height()) / 2.0;

  // Radial polynomials as (coefficient, power) term lists.
  struct Term {
    double coeff;
    int power;
  };
  std::vector<std::vector<Term>> radial(indices.size());
  int max_rep = 0;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto [m, n] = indices[k];
    const int an = std::abs(n);
    max_rep = std::max(max_rep, an);
    for (int s = 0; s <= (m - an) / 2; ++s) {
      const double c = factorial(m - s) /
                       (factorial(s) * factorial((m + an) / 2 - s) * factorial((m - an) / 2 - s));
      radial[k].push_back({s % 2 == 0 ? c : -c, m - 2 * s});
    }
  }

  // Sum of V*_mn = R_mn(r) e^{+j n theta} over ink pixels inside the disk.
  double ink_in_disk = 0.0;
  std::vector<std::complex<double>> acc(indices.size());
  std::vector<std::complex<double>> phase(static_cast<std::size_t>(max_rep) + 1);
  for (int y = 0; y < binary.height(); ++y) {
    for (int x = 0; x < binary.width(); ++x) {
      if (!is_ink(binary.at(x, y))) continue;
      const double px = (x - cx) / r_max;
      const double py = (y - cy) / r_max;
      const double r = std::hypot(px, py);
      if (r > 1.0) continue;
      ink_in_disk += 1.0;
      const std::complex<double> unit = r > 0.0 ? std::complex<double>(px / r, py / r) : 1.0;
      phase[0] = 1.0;
      for (int p = 1; p <= max_rep; ++p) phase[p] = phase[p - 1] * unit;
      for (std::size_t k = 0; k < indices.size(); ++k) {
        double rv = 0.0;
        for (const Term& t : radial[k]) rv += t.coeff * std::pow(r, t.power);
        const int n = indices[k].n;
        acc[k] += rv * (n >= 0 ? phase[n] : std::conj(phase[-n]));
      }
    }
  }
  if (ink_in_disk == 0.0) throw Error(ErrorCode::empty_ink, "no ink inside the unit disk");

  const double area = 1.0 / (r_max * r_max);
  const double norm00 = ink_in_disk * area / std::numbers::pi;
  std::vector<double> out(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const double scale = (indices[k].m + 1) / std::numbers::pi * area;
    out[k] = std::abs(acc[k]) * scale / norm00;
  }
  return out;
}

std::vector<ZernikeIndex> default_zernike_indices() { return {{1, 1}, {2, 0}, {2, 2}, {3, 1}, {3, 3}}; }

FeatureVector feature_vector(const GrayImage& binary, const FeatureConfig& config) {
  if (config.zernike.size() != kFeatureSize - 7)
    throw Error(ErrorCode::parameter, "feature vectors need exactly 5 Zernike indices");
  const HuVector hu = hu_invariants(central_moments(binary));
  const std::vector<double> z = zernike_moments(binary, config.zernike, config.mapping);
  FeatureVector f{};
  std::copy(hu.begin(), hu.end(), f.begin());
  std::copy(z.begin(), z.end(), f.begin() + 7);
  return f;
}

FeatureVector feature_vector_or_zero(const GrayImage& binary, const FeatureConfig& config, bool* blank) {
  if (blank) *blank = false;
  try {
    return feature_vector(binary, config);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::empty_ink) throw;
    if (blank) *blank = true;
    return FeatureVector{};
  }
}

}  // namespace hwr
