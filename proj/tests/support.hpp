#pragma once

// Test-only oracles and fixtures. Nothing here calls into the code paths it
// is used to check.

#include <cstdint>
#include <vector>

#include "hwr/dbn.hpp"
#include "hwr/imaging.hpp"
#include "hwr/staticbn.hpp"

namespace hwr::testing {

/// Centered ink disk of the given radius on a size x size canvas.
GrayImage disk_image(int size, double radius);

/// Asymmetric ink shape (ellipses plus a bar) on a size x size canvas,
/// centered so that rotations keep it inside the canvas.
GrayImage random_shape(int size, std::uint64_t seed);

/// Otsu by exhaustive search: for every t, split the pixel list explicitly
/// and evaluate w0 w1 (m0 - m1)^2. Lowest maximizing t.
int exhaustive_otsu(const GrayImage& img);

/// log P(obs) by summing over every joint hidden path, in long double.
long double path_sum_log_likelihood(const CoupledHmm& m, const ObservationPair& obs);

/// P(X_t^1 = i, X_t^2 = j | obs) by path enumeration.
std::vector<std::vector<long double>> path_sum_posteriors(const CoupledHmm& m, const ObservationPair& obs);

/// Unscaled forward recursion in long double.
long double unscaled_forward_log_likelihood(const CoupledHmm& m, const ObservationPair& obs);

/// Structured Q = 3 coupled model for class `c`: each chain follows a
/// class-specific permutation of its states with probability `stay`,
/// nudged by the other chain, and state k mostly emits symbol k.
CoupledHmm q3_class_model(int c, double stay = 0.8, double emit_peak = 0.8);

std::vector<ObservationPair> sample_many(const CoupledHmm& m, std::size_t count, std::size_t length, std::uint64_t seed);

}  // namespace hwr::testing
