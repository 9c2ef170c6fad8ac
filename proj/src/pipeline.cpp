#include "hwr/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "hwr/error.hpp"
#include "hwr/persist.hpp"
#include "hwr/random.hpp"
#include "hwr/textio.hpp"

namespace hwr {

namespace {

Vector to_vector(const FeatureVector& f) { return Vector(f.begin(), f.end()); }

void warn_blank(const char* what, std::size_t blank, std::size_t total) {
  if (blank > 0)
    std::cerr << "warning: " << blank << " of " << total << ' ' << what
              << " had no ink; substituted all-zero feature vectors\n";
}

}  // namespace

std::vector<FeatureVector> block_features(const GrayImage& image, const Config& config, std::size_t* blank) {
  const GrayImage bin = binarize(image, config.binarize);
  const BlockSet set = split_blocks(bin, config.blocks);
  std::vector<FeatureVector> out;
  for (const auto& b : set.blocks) {
    bool was_blank = false;
    out.push_back(feature_vector_or_zero(b, config.features(), &was_blank));
    if (was_blank && blank) ++*blank;
  }
  return out;
}

WindowFeatures window_features(const GrayImage& image, const Config& config, std::size_t* blank) {
  const GrayImage bin = binarize(image, config.binarize);
  WindowFeatures out;
  for (Axis axis : {Axis::horizontal, Axis::vertical}) {
    auto& dst = axis == Axis::horizontal ? out.horizontal : out.vertical;
    for (const auto& w : sliding_windows(bin, axis, config.window).windows) {
      bool was_blank = false;
      dst.push_back(feature_vector_or_zero(w, config.features(), &was_blank));
      if (was_blank && blank) ++*blank;
    }
  }
  return out;
}

int count_classes(const std::vector<LabeledSample>& samples) {
  int n = 0;
  for (const auto& s : samples) n = std::max(n, s.class_id + 1);
  return n;
}

// ---------------------------------------------------------------------------

Discretizer fit_block_discretizer(const std::vector<std::vector<FeatureVector>>& train_blocks, const Config& config) {
  Points pooled;
  for (const auto& blocks : train_blocks)
    for (const auto& f : blocks) pooled.push_back(to_vector(f));
  if (pooled.empty()) throw Error(ErrorCode::coverage, "no training blocks");

  DiscretizerOptions opt;
  opt.mode = config.discretization;
  opt.k = config.codebook_k;
  opt.pca_components = config.pca_components;
  opt.seed = derive_seed(config.seed, {0x636f6465ULL});
  opt.max_iters = config.kmeans_max_iters;
  opt.restarts = config.kmeans_restarts;

  if (!config.codebook_k_range.empty()) {
    // Silhouette is quadratic in the point count; select K on a seeded subsample
    // of the standardized pooled vectors.
    Points sample = pooled;
    Rng rng(derive_seed(config.seed, {0x73696cULL}));
    for (std::size_t i = sample.size(); i > 1; --i) std::swap(sample[i - 1], sample[uniform_index(rng, i)]);
    sample.resize(std::min<std::size_t>(sample.size(), 1500));
    Vector means(kFeatureSize, 0.0), sds(kFeatureSize, 0.0);
    for (const auto& p : sample)
      for (std::size_t j = 0; j < kFeatureSize; ++j) means[j] += p[j] / static_cast<double>(sample.size());
    for (const auto& p : sample)
      for (std::size_t j = 0; j < kFeatureSize; ++j)
        sds[j] += (p[j] - means[j]) * (p[j] - means[j]) / static_cast<double>(sample.size());
    for (auto& p : sample)
      for (std::size_t j = 0; j < kFeatureSize; ++j)
        p[j] = (p[j] - means[j]) / (sds[j] > 1e-24 ? std::sqrt(sds[j]) : 1.0);
    const std::size_t distinct = count_distinct(sample);
    std::vector<std::size_t> range;
    for (std::size_t k : config.codebook_k_range)
      if (k >= 2 && k <= distinct) range.push_back(k);
    if (!range.empty()) opt.k = select_k(sample, range, opt.seed, opt.max_iters, opt.restarts).k;
  }
  return Discretizer::fit(pooled, opt);
}

std::vector<double> StaticModel::score_features(const std::vector<FeatureVector>& blocks) const {
  if (blocks.size() != classifiers.size())
    throw Error(ErrorCode::mismatch, "expected " + std::to_string(classifiers.size()) + " blocks");
  std::vector<std::vector<double>> posts;
  for (std::size_t t = 0; t < blocks.size(); ++t)
    posts.push_back(block_posterior(classifiers[t], discretizer.transform(to_vector(blocks[t]))));
  return image_posterior(posts);
}

std::vector<double> StaticModel::score(const GrayImage& image) const {
  return score_features(block_features(image, config));
}

StaticRun run_static_pipeline(const std::vector<LabeledSample>& samples, const Config& config) {
  if (config.classifier == ClassifierKind::dbn)
    throw Error(ErrorCode::parameter, "the static pipeline takes nb, tan or fan");
  StaticRun run;
  run.model.config = config;
  run.model.num_classes = count_classes(samples);

  std::vector<std::vector<FeatureVector>> features(samples.size());
  run_stage("features", [&] {
    for (std::size_t i = 0; i < samples.size(); ++i)
      features[i] = block_features(samples[i].image, config, &run.blank_blocks);
    return 0;
  });
  warn_blank("blocks", run.blank_blocks, samples.size() * static_cast<std::size_t>(config.blocks));

  std::vector<std::size_t> train;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (samples[i].split == Split::train) train.push_back(i);

  run.model.discretizer = run_stage("codebook", [&] {
    std::vector<std::vector<FeatureVector>> train_blocks;
    for (auto i : train) train_blocks.push_back(features[i]);
    return fit_block_discretizer(train_blocks, config);
  });

  run_stage("structure", [&] {
    const auto cards = run.model.discretizer.cardinalities();
    for (int t = 0; t < config.blocks; ++t) {
      DiscreteDataset data;
      data.num_classes = run.model.num_classes;
      data.cardinalities = cards;
      for (auto i : train)
        data.samples.push_back(
            {run.model.discretizer.transform(to_vector(features[i][static_cast<std::size_t>(t)])), samples[i].class_id});
      switch (config.classifier) {
        case ClassifierKind::nb: run.model.classifiers.push_back(build_nb(data)); break;
        case ClassifierKind::tan: {
          TanOptions opt;
          if (config.tan_root >= 0) opt.root = config.tan_root;
          opt.seed = derive_seed(config.seed, {0x726f6f74ULL, static_cast<std::uint64_t>(t)});
          run.model.classifiers.push_back(build_tan(data, opt));
          break;
        }
        case ClassifierKind::fan: run.model.classifiers.push_back(build_fan(data, {config.fan_pruning})); break;
        case ClassifierKind::dbn: break;
      }
    }
    return 0;
  });

  run.report = run_stage("evaluate", [&] {
    std::vector<int> truth;
    std::vector<std::vector<double>> scores;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].split != Split::test) continue;
      truth.push_back(samples[i].class_id);
      scores.push_back(run.model.score_features(features[i]));
    }
    return compute_report(truth, scores, run.model.num_classes);
  });
  return run;
}

// ---------------------------------------------------------------------------

ObservationPair DbnModel::observe_features(const WindowFeatures& f) const {
  std::vector<int> h, v;
  for (const auto& x : f.horizontal) h.push_back(horizontal.transform(to_vector(x)).front());
  for (const auto& x : f.vertical) v.push_back(vertical.transform(to_vector(x)).front());
  return make_observation_pair(std::move(h), std::move(v));
}

ObservationPair DbnModel::observe(const GrayImage& image) const {
  return observe_features(window_features(image, config));
}

std::vector<double> DbnModel::score(const GrayImage& image) const { return classify(bank, observe(image)).log_likelihoods; }

DbnRun run_dbn_pipeline(const std::vector<LabeledSample>& samples, const Config& config) {
  DbnRun run;
  run.model.config = config;
  const int classes = count_classes(samples);

  std::vector<WindowFeatures> features(samples.size());
  run_stage("features", [&] {
    for (std::size_t i = 0; i < samples.size(); ++i)
      features[i] = window_features(samples[i].image, config, &run.blank_windows);
    return 0;
  });
  {
    std::size_t total = 0;
    for (const auto& f : features) total += f.horizontal.size() + f.vertical.size();
    warn_blank("windows", run.blank_windows, total);
  }

  run_stage("codebook", [&] {
    Points h, v;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].split != Split::train) continue;
      for (const auto& f : features[i].horizontal) h.push_back(to_vector(f));
      for (const auto& f : features[i].vertical) v.push_back(to_vector(f));
    }
    if (h.empty()) throw Error(ErrorCode::coverage, "no training windows");
    DiscretizerOptions opt;
    opt.mode = Discretization::per_vector;
    opt.k = config.dbn_codebook_k;
    opt.max_iters = config.kmeans_max_iters;
    opt.restarts = config.kmeans_restarts;
    opt.seed = derive_seed(config.seed, {0x68ULL});
    run.model.horizontal = Discretizer::fit(h, opt);
    opt.seed = derive_seed(config.seed, {0x76ULL});
    run.model.vertical = Discretizer::fit(v, opt);
    return 0;
  });

  std::vector<std::vector<ObservationPair>> train(static_cast<std::size_t>(classes)),
      validation(static_cast<std::size_t>(classes));
  std::vector<ObservationPair> observed(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    observed[i] = run.model.observe_features(features[i]);
    const auto c = static_cast<std::size_t>(samples[i].class_id);
    if (samples[i].split == Split::train) train[c].push_back(observed[i]);
    else if (samples[i].split == Split::validation) validation[c].push_back(observed[i]);
  }
  for (int c = 0; c < classes; ++c)
    if (train[static_cast<std::size_t>(c)].empty())
      throw Error(ErrorCode::coverage, "[train] class " + std::to_string(c + 1) + " has no training samples");

  const std::array<int, 2> symbols{static_cast<int>(run.model.horizontal.cardinalities().front()),
                                   static_cast<int>(run.model.vertical.cardinalities().front())};
  TrainOptions base;
  base.seed = derive_seed(config.seed, {0x64626eULL});
  base.max_iters = config.em_max_iters;
  base.tol = config.em_tol;
  base.restarts = config.em_restarts;
  base.floor = config.em_floor;

  std::vector<int> q_per_class(static_cast<std::size_t>(classes), config.q_range.front());
  if (config.q_range.size() > 1) {
    run.selection = run_stage("select-states", [&] {
      return select_states(train, validation, config.q_range, symbols, base);
    });
    q_per_class = run.selection->q_per_class;
  }
  run.model.bank = run_stage("train", [&] { return train_bank(train, q_per_class, symbols, base); });

  run.report = run_stage("evaluate", [&] {
    std::vector<int> truth;
    std::vector<std::vector<double>> scores;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].split != Split::test) continue;
      truth.push_back(samples[i].class_id);
      scores.push_back(classify(run.model.bank, observed[i]).log_likelihoods);
    }
    return compute_report(truth, scores, classes);
  });
  return run;
}

// ---------------------------------------------------------------------------

EvaluationReport evaluate_static(const StaticModel& model, const std::vector<LabeledSample>& samples, Split split) {
  std::vector<int> truth;
  std::vector<std::vector<double>> scores;
  for (const auto& s : samples) {
    if (s.split != split) continue;
    if (s.class_id >= model.num_classes) throw Error(ErrorCode::label_range, s.id + ": class unknown to the model");
    truth.push_back(s.class_id);
    scores.push_back(model.score(s.image));
  }
  return compute_report(truth, scores, model.num_classes);
}

EvaluationReport evaluate_dbn(const DbnModel& model, const std::vector<LabeledSample>& samples, Split split) {
  const int classes = static_cast<int>(model.bank.models.size());
  std::vector<int> truth;
  std::vector<std::vector<double>> scores;
  for (const auto& s : samples) {
    if (s.split != split) continue;
    if (s.class_id >= classes) throw Error(ErrorCode::label_range, s.id + ": class unknown to the model");
    truth.push_back(s.class_id);
    scores.push_back(model.score(s.image));
  }
  return compute_report(truth, scores, classes);
}

// ---------------------------------------------------------------------------

std::string StaticModel::serialize() const {
  std::string out = make_section("config", config.to_text());
  out += make_section("classes", std::to_string(num_classes));
  out += make_section("discretizer", discretizer.serialize());
  for (const auto& c : classifiers) out += make_section("classifier", c.serialize());
  return out;
}

StaticModel StaticModel::parse(const std::string& body) {
  SectionReader in(body);
  StaticModel m;
  m.config = Config::parse(in.next("config"));
  textio::Reader classes(in.next("classes"));
  m.num_classes = static_cast<int>(classes.integer());
  m.discretizer = Discretizer::parse(in.next("discretizer"));
  for (int t = 0; t < m.config.blocks; ++t) m.classifiers.push_back(DiscreteBnClassifier::parse(in.next("classifier")));
  if (!in.done()) throw Error(ErrorCode::format, "trailing data after static model");
  for (const auto& c : m.classifiers)
    if (c.num_classes() != m.num_classes || c.cardinalities() != m.discretizer.cardinalities())
      throw Error(ErrorCode::format, "classifier does not match the discretizer");
  return m;
}

void save_static_model(const StaticModel& model, const std::filesystem::path& path) {
  save_document(path, "static-model", model.serialize());
}

StaticModel load_static_model(const std::filesystem::path& path) {
  return StaticModel::parse(load_document(path, "static-model"));
}

void save_dbn_model(const DbnModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string index = make_section("config", model.config.to_text());
  index += make_section("horizontal", model.horizontal.serialize());
  index += make_section("vertical", model.vertical.serialize());
  std::ostringstream files;
  files << model.bank.models.size() << '\n';
  for (std::size_t c = 0; c < model.bank.models.size(); ++c) {
    char name[32];
    std::snprintf(name, sizeof name, "class-%02zu.hwr", c + 1);
    files << name << '\n';
    save_document(dir / name, "coupled-hmm", model.bank.models[c].serialize());
  }
  index += make_section("classes", files.str());
  save_document(dir / "index.hwr", "dbn-bank", index);
}

DbnModel load_dbn_model(const std::filesystem::path& dir) {
  SectionReader in(load_document(dir / "index.hwr", "dbn-bank"));
  DbnModel m;
  m.config = Config::parse(in.next("config"));
  m.horizontal = Discretizer::parse(in.next("horizontal"));
  m.vertical = Discretizer::parse(in.next("vertical"));
  textio::Reader files(in.next("classes"));
  const auto n = files.integer();
  if (n < 1) throw Error(ErrorCode::format, "bank lists no classes");
  for (long long c = 0; c < n; ++c) {
    CoupledHmm hmm = CoupledHmm::parse(load_document(dir / files.word(), "coupled-hmm"));
    if (hmm.symbols[0] != m.horizontal.cardinalities().front() || hmm.symbols[1] != m.vertical.cardinalities().front())
      throw Error(ErrorCode::format, "class model symbol counts do not match the codebooks");
    m.bank.models.push_back(std::move(hmm));
  }
  return m;
}

std::string state_selection_table(const StateSelection& selection) {
  std::ostringstream out;
  out << "# Q cost seconds mean_rate";
  for (std::size_t c = 0; c < (selection.rates.empty() ? 0 : selection.rates.front().size()); ++c)
    out << " rate_C" << c + 1;
  out << '\n';
  for (std::size_t k = 0; k < selection.rates.size(); ++k) {
    out << selection.candidates[k] << ' ' << textio::format_double(selection.cost[k]) << ' '
        << textio::format_double(selection.seconds[k], 6) << ' '
        << textio::format_double(average_rate(selection.rates[k]), 9);
    for (double r : selection.rates[k]) out << ' ' << textio::format_double(r, 9);
    out << '\n';
  }
  out << "# selected";
  for (int q : selection.q_per_class) out << ' ' << q;
  out << '\n';
  return out.str();
}

}  // namespace hwr
