#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "doctest.h"
#include "hwr/error.hpp"
#include "hwr/random.hpp"
#include "hwr/staticbn.hpp"

using namespace hwr;
using doctest::Approx;

namespace {

const double kLn2 = std::log(2.0);

DiscreteDataset make(int classes, std::vector<int> card, const std::vector<std::vector<int>>& rows) {
  DiscreteDataset d;
  d.num_classes = classes;
  d.cardinalities = std::move(card);
  for (const auto& r : rows) d.samples.push_back({std::vector<int>(r.begin(), r.end() - 1), r.back()});
  return d;
}

// Plug-in I(X; Y | Z) from a list of (x, y, z) triples, straight from
// the definition sum p(x,y,z) log p(z) p(x,y,z) / (p(x,z) p(y,z)).
double cmi_oracle(const std::vector<std::array<int, 3>>& t) {
  std::map<std::array<int, 3>, double> xyz;
  std::map<std::pair<int, int>, double> xz, yz;
  std::map<int, double> z;
  const double n = static_cast<double>(t.size());
  for (const auto& v : t) {
    xyz[v] += 1 / n;
    xz[{v[0], v[2]}] += 1 / n;
    yz[{v[1], v[2]}] += 1 / n;
    z[v[2]] += 1 / n;
  }
  double s = 0.0;
  for (const auto& [k, p] : xyz) s += p * std::log(z[k[2]] * p / (xz[{k[0], k[2]}] * yz[{k[1], k[2]}]));
  return s;
}

DiscreteDataset sample_dataset(std::uint64_t seed, int m, int n, double dependence) {
  Rng rng(seed);
  DiscreteDataset d;
  d.num_classes = 3;
  d.cardinalities.assign(static_cast<std::size_t>(m), 3);
  for (int s = 0; s < n; ++s) {
    DiscreteSample x;
    x.class_id = static_cast<int>(uniform_index(rng, 3));
    for (int i = 0; i < m; ++i) {
      int v = static_cast<int>(uniform_index(rng, 3));
      if (i == 0 && uniform01(rng) < 0.5) v = x.class_id;
      if (i > 0 && uniform01(rng) < dependence) v = (x.attributes.back() + x.class_id) % 3;
      x.attributes.push_back(v);
    }
    d.samples.push_back(std::move(x));
  }
  return d;
}

// Four binary attributes, two classes, eight samples. A2 copies A1 and A4 is
// A1 xor A3; within each class the other pairs form full factorials, so
// CMI(A1; A2 | C) = ln 2 and every other pair has CMI 0.
DiscreteDataset eight_sample_dataset() {
  std::vector<std::vector<int>> rows;
  for (int c = 0; c < 2; ++c)
    for (int a1 = 0; a1 < 2; ++a1)
      for (int a3 = 0; a3 < 2; ++a3) rows.push_back({a1, a1, a3, a1 ^ a3, c});
  return make(2, {2, 2, 2, 2}, rows);
}

}  // namespace

TEST_CASE("laplace_cpt") {
  CHECK(laplace_cpt({0, 0}, 2) == std::vector<double>{0.5, 0.5});
  const auto p = laplace_cpt({3, 1}, 2);
  CHECK(p[0] == Approx(4.0 / 6));
  CHECK(p[1] == Approx(2.0 / 6));
  const auto q = laplace_cpt({7, 0, 2, 11, 1}, 5);
  CHECK(std::accumulate(q.begin(), q.end(), 0.0) == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("mutual information") {
  // A0 mirrors C, A1 is constant
  const auto d = make(2, {2, 1}, {{0, 0, 0}, {0, 0, 0}, {1, 0, 1}, {1, 0, 1}});
  CHECK(mutual_information(d, 0) == Approx(kLn2));
  CHECK(mutual_information(d, 1) == 0.0);

  const auto e = make(3, {3}, {{0, 0}, {1, 1}, {2, 2}, {2, 2}});
  const double h = -(0.25 * std::log(0.25) * 2 + 0.5 * std::log(0.5));
  CHECK(mutual_information(e, 0) == Approx(h));
}

TEST_CASE("conditional mutual information") {
  const auto d = sample_dataset(3, 4, 400, 0.5);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      std::vector<std::array<int, 3>> t;
      for (const auto& s : d.samples)
        t.push_back(std::array<int, 3>{s.attributes[static_cast<std::size_t>(i)], s.attributes[static_cast<std::size_t>(j)], s.class_id});
      CHECK(conditional_mutual_information(d, i, j) == Approx(cmi_oracle(t)).epsilon(1e-12));
    }
  const auto m = cmi_matrix(d);
  for (int i = 0; i < 4; ++i) {
    CHECK(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] == 0.0);
    for (int j = 0; j < 4; ++j) CHECK(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] == m[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
  }

  // independent given C in the generating distribution
  const auto indep = sample_dataset(4, 3, 5000, 0.0);
  CHECK(conditional_mutual_information(indep, 1, 2) < 0.02);
}

TEST_CASE("naive Bayes: hand posterior") {
  // (a1, a2, c)
  const auto d = make(2, {2, 2}, {{0, 0, 0}, {0, 1, 0}, {1, 1, 1}, {0, 1, 1}});
  const auto nb = build_nb(d);
  CHECK(nb.structure().edges().empty());
  CHECK(nb.prior()[0] == Approx(0.5));
  CHECK(nb.cpt(0, 0, 0, 0) == Approx(3.0 / 4));
  CHECK(nb.cpt(1, 1, 0, 1) == Approx(3.0 / 4));
  // P(c0 | 0,0) ∝ 1/2 * 3/4 * 2/4,  P(c1 | 0,0) ∝ 1/2 * 2/4 * 1/4
  const auto post = block_posterior(nb, {0, 0});
  CHECK(post[0] == Approx(0.75).epsilon(1e-12));
  CHECK(post[1] == Approx(0.25).epsilon(1e-12));
}

TEST_CASE("naive Bayes: uniform data gives a uniform posterior") {
  const auto d = make(2, {2}, {{0, 0}, {1, 0}, {0, 1}, {1, 1}});
  const auto post = block_posterior(build_nb(d), {1});
  CHECK(post[0] == Approx(0.5));
  CHECK(post[1] == Approx(0.5));
}

TEST_CASE("naive Bayes: duplicated data keeps decisions") {
  const auto d = sample_dataset(8, 5, 300, 0.2);
  auto dd = d;
  dd.samples.insert(dd.samples.end(), d.samples.begin(), d.samples.end());
  const auto a = build_nb(d), b = build_nb(dd);
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    std::vector<int> x;
    for (int i = 0; i < 5; ++i) x.push_back(static_cast<int>(uniform_index(rng, 3)));
    CHECK(decide(block_posterior(a, x)) == decide(block_posterior(b, x)));
  }
}

TEST_CASE("fit_parameters: errors") {
  const auto missing = make(3, {2}, {{0, 0}, {1, 1}});
  try {
    build_nb(missing);
    FAIL("expected coverage");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::coverage);
  }
  const auto bad = make(2, {2}, {{2, 0}, {1, 1}});
  CHECK_THROWS_AS(build_nb(bad), Error);
  const auto nb = build_nb(make(2, {2}, {{0, 0}, {1, 1}}));
  try {
    nb.log_scores({5});
    FAIL("expected label_range");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::label_range);
  }
}

TEST_CASE("maximum spanning tree") {
  const std::vector<std::vector<double>> w{
      {0, 5, 1, 0}, {5, 0, 2, 4}, {1, 2, 0, 3}, {0, 4, 3, 0}};
  const auto t = maximum_spanning_tree(w);
  CHECK(t == std::vector<std::pair<int, int>>{{0, 1}, {1, 3}, {2, 3}});
  // all equal weights: lexicographic order gives a star at 0
  const std::vector<std::vector<double>> flat(4, std::vector<double>(4, 1.0));
  CHECK(maximum_spanning_tree(flat) == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {0, 3}});
}

TEST_CASE("TAN: m - 1 edges, root invariance, copied attribute") {
  for (int m = 2; m <= 7; ++m) {
    const auto d = sample_dataset(static_cast<std::uint64_t>(m), m, 300, 0.4);
    const auto t = build_tan(d, {0, 0});
    CHECK(t.structure().edges().size() == static_cast<std::size_t>(m - 1));
    CHECK(t.structure().undirected_edges() == build_tan(d, {m - 1, 0}).structure().undirected_edges());
    CHECK(t.structure().parent[0] == -1);
    // seeded random root also spans the tree
    CHECK(build_tan(d, {std::nullopt, 77}).structure().undirected_edges() == t.structure().undirected_edges());
  }
  // A1 := A0, A2 independent
  auto d = sample_dataset(5, 3, 500, 0.0);
  for (auto& s : d.samples) s.attributes[1] = s.attributes[0];
  const auto edges = build_tan(d, {0, 0}).structure().undirected_edges();
  CHECK(std::find(edges.begin(), edges.end(), std::pair<int, int>{0, 1}) != edges.end());

  CHECK_THROWS_AS(build_tan(make(2, {2}, {{0, 0}, {1, 1}})), Error);
}

TEST_CASE("FAN: eight-sample dataset keeps exactly the dependent pair") {
  const auto d = eight_sample_dataset();
  CHECK(conditional_mutual_information(d, 0, 1) == Approx(kLn2));
  for (auto [i, j] : std::vector<std::pair<int, int>>{{0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}})
    CHECK(std::abs(conditional_mutual_information(d, i, j)) < 1e-15);
  CHECK(average_cmi(cmi_matrix(d)) == Approx(kLn2 / 6));

  for (auto pruning : {FanPruning::bic, FanPruning::average}) {
    const auto fan = build_fan(d, {pruning});
    CHECK(fan.structure().undirected_edges() == std::vector<std::pair<int, int>>{{0, 1}});
    CHECK(fan.structure().kind == StructureKind::forest);
  }
}

TEST_CASE("FAN: subset of TAN above the average") {
  for (std::uint64_t s = 0; s < 8; ++s) {
    const auto d = sample_dataset(100 + s, 6, 400, 0.3);
    const auto tan = build_tan(d, {0, 0}).structure().undirected_edges();
    const std::set<std::pair<int, int>> tan_set(tan.begin(), tan.end());
    const auto cmi = cmi_matrix(d);
    const double avg = average_cmi(cmi);
    for (auto pruning : {FanPruning::bic, FanPruning::average}) {
      const auto fan = build_fan(d, {pruning}).structure();
      for (auto [i, j] : fan.undirected_edges()) {
        CHECK(tan_set.count({i, j}) == 1);
        CHECK(cmi[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] >= avg);
      }
      // a forest: every attribute has at most one parent, no cycles
      for (std::size_t a = 0; a < fan.parent.size(); ++a) {
        int hops = 0;
        for (int p = fan.parent[a]; p != -1; p = fan.parent[static_cast<std::size_t>(p)]) REQUIRE(++hops < 6);
      }
    }
  }
}

TEST_CASE("FAN: independent attributes collapse to naive Bayes") {
  const auto d = sample_dataset(21, 6, 5000, 0.0);
  const auto fan = build_fan(d);
  CHECK(fan.structure().edges().empty());
  const auto nb = build_nb(d);
  std::vector<int> x{0, 1, 2, 0, 1, 2};
  CHECK(fan.log_scores(x) == nb.log_scores(x));
  CHECK(parse_fan_pruning(to_string(FanPruning::average)) == FanPruning::average);
  CHECK_THROWS_AS(parse_fan_pruning("chi2"), Error);
}

TEST_CASE("classifier serialization round-trips exactly") {
  const auto d = sample_dataset(31, 5, 200, 0.5);
  for (const auto& model : {build_nb(d), build_tan(d, {2, 0}), build_fan(d, {FanPruning::average})}) {
    const auto back = DiscreteBnClassifier::parse(model.serialize());
    CHECK(back == model);
    CHECK(back.log_scores({0, 1, 2, 1, 0}) == model.log_scores({0, 1, 2, 1, 0}));
  }
}

TEST_CASE("posterior fusion and decision") {
  const auto fused = image_posterior({{0.9, 0.1}, {0.6, 0.4}, {0.3, 0.7}});
  CHECK(fused[0] == Approx(0.6).epsilon(1e-15));
  CHECK(fused[1] == Approx(0.4).epsilon(1e-15));
  const std::vector<double> p{0.2, 0.3, 0.5};
  const auto same = image_posterior({p, p, p});
  for (std::size_t c = 0; c < p.size(); ++c) CHECK(same[c] == Approx(p[c]).epsilon(1e-15));
  CHECK_THROWS_AS(image_posterior({{0.5, 0.5}, {1.0}}), Error);

  CHECK(decide({0.2, 0.5, 0.3}) == 1);
  CHECK(decide({0.5, 0.5}) == 0);
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v(7);
    for (auto& x : v) x = std::floor(uniform01(rng) * 5);
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] > v[best]) best = i;
    CHECK(decide(v) == best);
  }

  const auto d = sample_dataset(41, 4, 150, 0.3);
  const auto model = build_tan(d, {1, 0});
  for (const auto& s : d.samples) {
    const auto post = block_posterior(model, s.attributes);
    CHECK(std::accumulate(post.begin(), post.end(), 0.0) == Approx(1.0).epsilon(1e-12));
  }
}
