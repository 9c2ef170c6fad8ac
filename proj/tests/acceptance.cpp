// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "hwr/config.hpp"
#include "hwr/dbn.hpp"
#include "hwr/evaluation.hpp"
#include "hwr/moments.hpp"
#include "hwr/persist.hpp"
#include "hwr/pipeline.hpp"
#include "hwr/random.hpp"
#include "hwr/staticbn.hpp"
#include "support.hpp"

using namespace hwr;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// -- 1 ---------------------------------------------------------------------
Outcome inference_oracle() {
  Outcome o;
  double worst = 0.0;
  for (int q1 = 1; q1 <= 3; ++q1)
    for (int q2 = 1; q2 <= 3; ++q2)
      for (std::size_t t_len = 1; t_len <= 4; ++t_len)
        for (int rep = 0; rep < 20; ++rep) {
          Rng rng(derive_seed(1, {static_cast<std::uint64_t>(q1), static_cast<std::uint64_t>(q2), t_len,
                                  static_cast<std::uint64_t>(rep)}));
          const auto m = CoupledHmm::random({q1, q2}, {3, 4}, rng);
          const auto obs = sample_sequence(m, t_len, rng);
          const double got = joint_inference(m, obs).log_likelihood;
          const double want = static_cast<double>(testing::path_sum_log_likelihood(m, obs));
          worst = std::max(worst, std::abs(got - want));
        }
  o.require(worst <= 1e-9, "max |diff| " + fmt("%.3g", worst));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("max |diff| = ") + fmt("%.3g", worst);
  return o;
}

// -- 2 ---------------------------------------------------------------------
Outcome em_monotonicity() {
  Outcome o;
  double worst_drop = 0.0;
  for (int d = 0; d < 3; ++d) {
    Rng gen(derive_seed(2, {static_cast<std::uint64_t>(d)}));
    const auto truth = CoupledHmm::random({3, 3}, {4, 4}, gen);
    std::vector<ObservationPair> data;
    for (int n = 0; n < 100; ++n) data.push_back(sample_sequence(truth, 15, gen));
    Rng init(derive_seed(3, {static_cast<std::uint64_t>(d)}));
    auto model = CoupledHmm::random({3, 3}, {4, 4}, init);
    double prev = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < 50; ++it) {
      auto step = em_step(model, data);
      worst_drop = std::max(worst_drop, prev - step.log_likelihood);
      prev = step.log_likelihood;
      model = std::move(step.model);
    }
  }
  o.require(worst_drop <= 1e-8, "largest decrease " + fmt("%.3g", worst_drop));
  if (o.pass) o.detail = "largest decrease = " + fmt("%.3g", std::max(worst_drop, 0.0));
  return o;
}

// -- 3 ---------------------------------------------------------------------
Outcome hu_invariance() {
  Outcome o;
  double worst_translate = 0.0, worst_quarter = 0.0, worst_rotate = 0.0, worst_scale = 0.0;
  bool mirror_exact = true;
  for (int s = 0; s < 10; ++s) {
    const auto img = testing::random_shape(1024, derive_seed(4, {static_cast<std::uint64_t>(s)}));
    const auto base = hu_invariants(central_moments(img));

    const auto moved = hu_invariants(central_moments(translate(img, 7, -5)));
    for (int k = 0; k < 7; ++k) worst_translate = std::max(worst_translate, rel_err(moved[k], base[k]));

    for (int q = 1; q <= 3; ++q) {
      const auto rot = hu_invariants(central_moments(rotate_quarter(img, q)));
      for (int k = 0; k < 7; ++k) worst_quarter = std::max(worst_quarter, rel_err(rot[k], base[k]));
    }

    const auto rot = hu_invariants(central_moments(rotate(img, 37.0)));
    const auto big = hu_invariants(central_moments(scale_nearest(img, 2)));
    for (int k = 0; k < 6; ++k) {
      worst_rotate = std::max(worst_rotate, rel_err(rot[k], base[k]));
      worst_scale = std::max(worst_scale, rel_err(big[k], base[k]));
    }

    const auto mir = hu_invariants(central_moments(mirror_horizontal(img)));
    if (mir[6] != -base[6]) mirror_exact = false;
  }
  // "Exact" for translation: identical up to floating-point rounding.
  o.require(worst_translate <= 1e-12, "translation " + fmt("%.3g", worst_translate));
  o.require(worst_quarter <= 1e-6, "quarter turns " + fmt("%.3g", worst_quarter));
  o.require(worst_rotate <= 0.02, "rotation " + fmt("%.3g", worst_rotate));
  o.require(worst_scale <= 0.02, "scale " + fmt("%.3g", worst_scale));
  o.require(mirror_exact, "mirror does not negate phi7 exactly");
  if (o.pass)
    o.detail = "translate " + fmt("%.2g", worst_translate) + ", quarter " + fmt("%.2g", worst_quarter) +
               ", rotate " + fmt("%.3f", worst_rotate) + ", scale " + fmt("%.3f", worst_scale);
  return o;
}

// -- 4 ---------------------------------------------------------------------
Outcome moment_ground_truth() {
  Outcome o;
  const auto hu = hu_invariants(central_moments(testing::disk_image(401, 180.0)));
  const double phi1_err = rel_err(hu[0], 1.0 / (2.0 * std::numbers::pi));
  double rest = 0.0;
  for (int k = 1; k < 7; ++k) rest = std::max(rest, std::abs(hu[k]));
  o.require(phi1_err <= 0.01, "phi1 rel err " + fmt("%.3g", phi1_err));
  o.require(rest < 1e-4, "max |phi2..phi7| " + fmt("%.3g", rest));

  double radial = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double r = i / 999.0;
    radial = std::max(radial, std::abs(zernike_radial(0, 0, r) - 1.0));
    radial = std::max(radial, std::abs(zernike_radial(1, 1, r) - r));
    radial = std::max(radial, std::abs(zernike_radial(2, 0, r) - (2 * r * r - 1)));
    radial = std::max(radial, std::abs(zernike_radial(2, 2, r) - r * r));
  }
  o.require(radial <= 1e-12, "radial max err " + fmt("%.3g", radial));
  if (o.pass)
    o.detail = "phi1 rel err " + fmt("%.2g", phi1_err) + ", max |phi2..7| " + fmt("%.2g", rest) + ", radial " +
               fmt("%.2g", radial);
  return o;
}

// -- 5 ---------------------------------------------------------------------
DiscreteDataset random_dataset(std::uint64_t seed, int m, int n, bool dependent) {
  Rng rng(seed);
  DiscreteDataset d;
  d.num_classes = 3;
  d.cardinalities.assign(static_cast<std::size_t>(m), 4);
  for (int s = 0; s < n; ++s) {
    DiscreteSample x;
    x.class_id = static_cast<int>(uniform_index(rng, 3));
    for (int i = 0; i < m; ++i) {
      int v = static_cast<int>(uniform_index(rng, 4));
      if (dependent && i > 0 && uniform01(rng) < 0.6) v = (x.attributes.back() + x.class_id) % 4;
      x.attributes.push_back(v);
    }
    d.samples.push_back(std::move(x));
  }
  return d;
}

Outcome structure_learning() {
  Outcome o;
  int checked = 0;
  for (int s = 0; s < 10; ++s) {
    const int m = 3 + s % 6;
    const auto data = random_dataset(derive_seed(5, {static_cast<std::uint64_t>(s)}), m, 600, true);
    const auto tan = build_tan(data, {std::nullopt, static_cast<std::uint64_t>(s)});
    const auto tan_edges = tan.structure().undirected_edges();
    o.require(tan_edges.size() == static_cast<std::size_t>(m - 1), "TAN edge count on dataset " + std::to_string(s));

    const auto cmi = cmi_matrix(data);
    const double avg = average_cmi(cmi);
    const std::set<std::pair<int, int>> tan_set(tan_edges.begin(), tan_edges.end());
    for (auto pruning : {FanPruning::bic, FanPruning::average}) {
      const auto fan = build_fan(data, {pruning});
      for (auto [i, j] : fan.structure().undirected_edges()) {
        o.require(tan_set.count({i, j}) == 1, "FAN edge outside TAN");
        o.require(cmi[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] >= avg, "FAN edge below I_avg");
      }
    }
    ++checked;
  }
  const auto indep = random_dataset(derive_seed(6, {}), 6, 5000, false);
  const auto fan = build_fan(indep);
  o.require(fan.structure().undirected_edges().empty(),
            "independent data kept " + std::to_string(fan.structure().undirected_edges().size()) + " FAN edges");
  o.require(fan.structure().edges() == build_nb(indep).structure().edges(), "FAN arcs differ from NB");
  if (o.pass) o.detail = std::to_string(checked) + " datasets; independent N=5000 -> 0 FAN edges";
  return o;
}

// -- 6 ---------------------------------------------------------------------
Outcome posterior_fusion() {
  Outcome o;
  const auto fused = image_posterior({{0.9, 0.1}, {0.6, 0.4}, {0.3, 0.7}});
  o.require(std::abs(fused[0] - 0.6) <= 1e-12 && std::abs(fused[1] - 0.4) <= 1e-12, "worked example");

  Rng rng(derive_seed(7, {}));
  double worst_sum = 0.0;
  bool mean_exact = true;
  for (int trial = 0; trial < 20; ++trial) {
    const auto data = random_dataset(derive_seed(8, {static_cast<std::uint64_t>(trial)}), 5, 300, true);
    const auto model = build_fan(data, {FanPruning::average});
    std::vector<std::vector<double>> blocks;
    for (int b = 0; b < 3; ++b) {
      std::vector<int> x;
      for (int i = 0; i < 5; ++i) x.push_back(static_cast<int>(uniform_index(rng, 4)));
      blocks.push_back(block_posterior(model, x));
      worst_sum = std::max(worst_sum, std::abs(std::accumulate(blocks.back().begin(), blocks.back().end(), 0.0) - 1.0));
    }
    const auto img = image_posterior(blocks);
    for (std::size_t c = 0; c < img.size(); ++c)
      if (img[c] != (blocks[0][c] + blocks[1][c] + blocks[2][c]) / 3.0) mean_exact = false;
  }
  o.require(mean_exact, "image posterior differs from component-wise mean");
  o.require(worst_sum <= 1e-9, "block posterior sum error " + fmt("%.3g", worst_sum));
  if (o.pass) o.detail = "(0.6, 0.4); max |sum - 1| = " + fmt("%.2g", worst_sum);
  return o;
}

// -- 7 ---------------------------------------------------------------------
Outcome end_to_end() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  Config cfg;
  cfg.seed = 2024;
  auto samples = generate_synthetic(18, 200, 0.95, cfg.seed);
  samples = split_dataset(std::move(samples), {0.5, 0.25, 0.25, cfg.seed});

  cfg.classifier = ClassifierKind::fan;
  const auto fan = run_static_pipeline(samples, cfg);
  cfg.classifier = ClassifierKind::dbn;
  const auto dbn = run_dbn_pipeline(samples, cfg);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto& ft = fan.report.overall_top;
  o.require(ft[0] >= 90.0, "FAN Top-1 " + fmt("%.2f", ft[0]));
  o.require(dbn.report.overall_top[0] >= 90.0, "DBN Top-1 " + fmt("%.2f", dbn.report.overall_top[0]));
  o.require(ft[3] >= ft[0], "FAN Top-4 < Top-1");
  o.require(seconds < 600.0, "runtime " + fmt("%.0f s", seconds));
  if (o.pass)
    o.detail = "FAN Top-1 " + fmt("%.2f", ft[0]) + "% Top-4 " + fmt("%.2f", ft[3]) + "%, DBN Top-1 " +
               fmt("%.2f", dbn.report.overall_top[0]) + "%";
  return o;
}

// -- 8 ---------------------------------------------------------------------
Outcome report_fixtures() {
  Outcome o;
  // Published per-class Top-1 rates, classes 1..18.
  const std::vector<double> table3{85.8, 82.2, 81.9, 80.4, 80.9, 86.2, 85.0, 84.7, 87.4,
                                   81.5, 82.8, 85.1, 83.0, 82.3, 83.2, 83.0, 82.9, 80.4};
  const double t_m = average_rate(table3);
  o.require(std::abs(t_m - 83.26) <= 0.01, "T_m " + fmt("%.4f", t_m));

  // Confusion row for class 1 (classes 1..9; blanks are zero).
  const std::vector<double> row_c1{85.79, 0, 0, 0, 0, 6.32, 2.61, 5.28, 0};
  const double row_sum = std::accumulate(row_c1.begin(), row_c1.end(), 0.0);
  o.require(std::abs(row_sum - 100.0) <= 0.01, "C1 row sum " + fmt("%.4f", row_sum));
  if (o.pass) o.detail = "T_m = " + fmt("%.4f", t_m) + ", C1 row sum = " + fmt("%.2f", row_sum);
  return o;
}

// -- 9 ---------------------------------------------------------------------
Outcome state_selection() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::vector<ObservationPair>> train, validation;
  for (int c = 0; c < 5; ++c) {
    const auto m = testing::q3_class_model(c);
    train.push_back(testing::sample_many(m, 60, 20, derive_seed(9, {static_cast<std::uint64_t>(c), 0})));
    validation.push_back(testing::sample_many(m, 40, 20, derive_seed(9, {static_cast<std::uint64_t>(c), 1})));
  }
  TrainOptions base;
  base.seed = 11;
  const auto sel = select_states(train, validation, {2, 3, 4, 5, 6}, {3, 3}, base);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  int good = 0;
  std::string picks;
  for (int q : sel.q_per_class) {
    if (q == 3 || q == 4) ++good;
    picks += (picks.empty() ? "" : ",") + std::to_string(q);
  }
  o.require(good >= 4, "selected " + picks);
  o.require(seconds < 300.0, "runtime " + fmt("%.0f s", seconds));
  if (o.pass) o.detail = "selected Q = " + picks;
  return o;
}

// -- 10 --------------------------------------------------------------------
Outcome determinism() {
  Outcome o;
  Config cfg;
  cfg.seed = 99;
  cfg.q_range = {2};
  auto make = [&] {
    auto s = generate_synthetic(4, 24, 0.9, cfg.seed);
    return split_dataset(std::move(s), {0.5, 0.25, 0.25, cfg.seed});
  };
  const auto samples = make();
  o.require(samples.size() == make().size(), "dataset size differs");

  cfg.classifier = ClassifierKind::fan;
  const auto s1 = run_static_pipeline(samples, cfg);
  const auto s2 = run_static_pipeline(make(), cfg);
  o.require(s1.report.to_document() == s2.report.to_document(), "static reports differ");
  cfg.classifier = ClassifierKind::dbn;
  const auto d1 = run_dbn_pipeline(samples, cfg);
  const auto d2 = run_dbn_pipeline(make(), cfg);
  o.require(d1.report.to_document() == d2.report.to_document(), "DBN reports differ");

  const fs::path dir = fs::temp_directory_path() / "hwr_acceptance_roundtrip";
  fs::remove_all(dir);
  save_static_model(s1.model, dir / "static.hwr");
  save_dbn_model(d1.model, dir / "dbn");
  const auto s_loaded = load_static_model(dir / "static.hwr");
  const auto d_loaded = load_dbn_model(dir / "dbn");

  const auto probe = generate_synthetic(4, 13, 0.7, 555);  // 52 images
  std::size_t checked = 0;
  for (std::size_t i = 0; i < 50; ++i) {
    const auto& img = probe[i].image;
    if (s1.model.score(img) != s_loaded.score(img)) o.require(false, "static score differs on probe " + std::to_string(i));
    if (d1.model.score(img) != d_loaded.score(img)) o.require(false, "DBN score differs on probe " + std::to_string(i));
    ++checked;
  }
  fs::remove_all(dir);
  if (o.pass) o.detail = "reports byte-identical; " + std::to_string(checked) + " probes bit-identical after reload";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"inference oracle equivalence", inference_oracle},
      {"EM monotonicity", em_monotonicity},
      {"Hu invariance suite", hu_invariance},
      {"moment ground truth", moment_ground_truth},
      {"structure-learning correctness", structure_learning},
      {"posterior fusion arithmetic", posterior_fusion},
      {"end-to-end synthetic benchmark", end_to_end},
      {"report fixtures", report_fixtures},
      {"state-count selection", state_selection},
      {"determinism and persistence", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!out.pass) ++failures;
    std::printf("%s %2zu %s (%.1f s): %s\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, seconds,
                out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
