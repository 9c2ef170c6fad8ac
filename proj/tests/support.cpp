#include "support.hpp"

#include <cmath>
#include <numbers>

#include "hwr/random.hpp"

namespace hwr::testing {

GrayImage disk_image(int size, double radius) {
  GrayImage img(size, size);
  const double c = (size - 1) / 2.0;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      if ((x - c) * (x - c) + (y - c) * (y - c) <= radius * radius) img.at(x, y) = kInk;
  return img;
}

GrayImage random_shape(int size, std::uint64_t seed) {
  Rng rng(seed);
  GrayImage img(size, size);
  const double c = (size - 1) / 2.0;
  // Keep all ink within 0.4 * size of the centre so any rotation stays on canvas.
  const double reach = 0.4 * size;
  auto paint = [&](double cx, double cy, double a, double b, double ang) {
    const double ca = std::cos(ang), sa = std::sin(ang);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double dx = x - cx, dy = y - cy;
        const double u = (ca * dx + sa * dy) / a, v = (-sa * dx + ca * dy) / b;
        const double r = std::hypot(x - c, y - c);
        if (u * u + v * v <= 1.0 && r <= reach) img.at(x, y) = kInk;
      }
  };
  const int blobs = 2 + static_cast<int>(uniform_index(rng, 2));
  for (int k = 0; k < blobs; ++k) {
    const double ang = uniform(rng, 0.0, 2 * std::numbers::pi);
    const double dist = uniform(rng, 0.05, 0.2) * size;
    paint(c + dist * std::cos(ang), c + dist * std::sin(ang), uniform(rng, 0.12, 0.22) * size,
          uniform(rng, 0.07, 0.12) * size, uniform(rng, 0.0, std::numbers::pi));
  }
  // A thin bar off to one side breaks any remaining symmetry.
  paint(c + 0.22 * size, c - 0.1 * size, 0.12 * size, 0.05 * size, uniform(rng, 0.2, 1.2));
  return img;
}

int exhaustive_otsu(const GrayImage& img) {
  const auto& px = img.pixels();
  double best = -1.0;
  int best_t = 0;
  for (int t = 0; t < 256; ++t) {
    std::vector<double> lo, hi;
    for (auto v : px) (v <= t ? lo : hi).push_back(v);
    double var = 0.0;
    if (!lo.empty() && !hi.empty()) {
      double m0 = 0.0, m1 = 0.0;
      for (double v : lo) m0 += v;
      for (double v : hi) m1 += v;
      m0 /= static_cast<double>(lo.size());
      m1 /= static_cast<double>(hi.size());
      const double w0 = static_cast<double>(lo.size()) / static_cast<double>(px.size());
      const double w1 = 1.0 - w0;
      var = w0 * w1 * (m0 - m1) * (m0 - m1);
    }
    if (var > best + 1e-9) {
      best = var;
      best_t = t;
    }
  }
  return best_t;
}

namespace {

// Visits every joint path z_0..z_{T-1} (z = i*Q2 + j) with its joint
// probability with the observations.
template <typename Fn>
void for_each_path(const CoupledHmm& m, const ObservationPair& obs, Fn&& fn) {
  const int q1 = m.states[0], q2 = m.states[1], s = q1 * q2;
  const std::size_t t_len = obs.length();
  std::vector<int> path(t_len, 0);
  while (true) {
    long double p = 1.0L;
    for (std::size_t t = 0; t < t_len; ++t) {
      const int i = path[t] / q2, j = path[t] % q2;
      if (t == 0) {
        p *= static_cast<long double>(m.pi[0][static_cast<std::size_t>(i)]) * m.pi[1][static_cast<std::size_t>(j)];
      } else {
        const int pi_ = path[t - 1] / q2, pj = path[t - 1] % q2;
        p *= static_cast<long double>(m.a(0, pi_, pj, i)) * m.a(1, pi_, pj, j);
      }
      p *= static_cast<long double>(m.b(0, i, obs.y1[t])) * m.b(1, j, obs.y2[t]);
    }
    fn(path, p);
    std::size_t k = 0;
    while (k < t_len && ++path[k] == s) path[k++] = 0;
    if (k == t_len) break;
  }
}

}  // namespace

long double path_sum_log_likelihood(const CoupledHmm& m, const ObservationPair& obs) {
  long double total = 0.0L;
  for_each_path(m, obs, [&](const std::vector<int>&, long double p) { total += p; });
  return std::log(total);
}

std::vector<std::vector<long double>> path_sum_posteriors(const CoupledHmm& m, const ObservationPair& obs) {
  const auto s = static_cast<std::size_t>(m.states[0] * m.states[1]);
  std::vector<std::vector<long double>> post(obs.length(), std::vector<long double>(s, 0.0L));
  long double total = 0.0L;
  for_each_path(m, obs, [&](const std::vector<int>& path, long double p) {
    total += p;
    for (std::size_t t = 0; t < path.size(); ++t) post[t][static_cast<std::size_t>(path[t])] += p;
  });
  for (auto& row : post)
    for (auto& v : row) v /= total;
  return post;
}

long double unscaled_forward_log_likelihood(const CoupledHmm& m, const ObservationPair& obs) {
  const int q1 = m.states[0], q2 = m.states[1];
  std::vector<long double> alpha(static_cast<std::size_t>(q1 * q2));
  for (int i = 0; i < q1; ++i)
    for (int j = 0; j < q2; ++j)
      alpha[static_cast<std::size_t>(i * q2 + j)] = static_cast<long double>(m.pi[0][static_cast<std::size_t>(i)]) *
                                                    m.pi[1][static_cast<std::size_t>(j)] * m.b(0, i, obs.y1[0]) *
                                                    m.b(1, j, obs.y2[0]);
  for (std::size_t t = 1; t < obs.length(); ++t) {
    std::vector<long double> next(alpha.size(), 0.0L);
    for (int i = 0; i < q1; ++i)
      for (int j = 0; j < q2; ++j)
        for (int k1 = 0; k1 < q1; ++k1)
          for (int k2 = 0; k2 < q2; ++k2)
            next[static_cast<std::size_t>(k1 * q2 + k2)] += alpha[static_cast<std::size_t>(i * q2 + j)] *
                                                            m.a(0, i, j, k1) * m.a(1, i, j, k2);
    for (int k1 = 0; k1 < q1; ++k1)
      for (int k2 = 0; k2 < q2; ++k2)
        next[static_cast<std::size_t>(k1 * q2 + k2)] *=
            static_cast<long double>(m.b(0, k1, obs.y1[t])) * m.b(1, k2, obs.y2[t]);
    alpha = std::move(next);
  }
  long double total = 0.0L;
  for (auto v : alpha) total += v;
  return std::log(total);
}

CoupledHmm q3_class_model(int c, double stay, double emit_peak) {
  // The six permutations of {0, 1, 2}; chain 1 and chain 2 take different
  // ones per class.
  static const int perms[6][3] = {{1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {1, 0, 2}, {2, 1, 0}, {0, 1, 2}};
  const int* p1 = perms[c % 6];
  const int* p2 = perms[(c * 5 + 1) % 6];

  CoupledHmm m;
  m.states = {3, 3};
  m.symbols = {3, 3};
  for (int l = 0; l < 2; ++l) {
    m.pi[l] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    m.trans[l].assign(27, 0.0);
    m.emit[l].assign(9, 0.0);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const int own = l == 0 ? i : j, other = l == 0 ? j : i;
        const int target = (l == 0 ? p1 : p2)[own];
        double* row = &m.trans[l][static_cast<std::size_t>((i * 3 + j) * 3)];
        for (int k = 0; k < 3; ++k) row[k] = (1.0 - stay) / 3.0;
        row[target] += stay * 0.85;
        row[other] += stay * 0.15;  // coupling to the other chain's state
      }
    for (int s = 0; s < 3; ++s)
      for (int k = 0; k < 3; ++k)
        m.emit[l][static_cast<std::size_t>(s * 3 + k)] = k == s ? emit_peak : (1.0 - emit_peak) / 2.0;
  }
  return m;
}

std::vector<ObservationPair> sample_many(const CoupledHmm& m, std::size_t count, std::size_t length,
                                         std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ObservationPair> out;
  for (std::size_t n = 0; n < count; ++n) out.push_back(sample_sequence(m, length, rng));
  return out;
}

}  // namespace hwr::testing
