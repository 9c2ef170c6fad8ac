// Batch command-line front end: dataset generation, feature dumps, codebook
// fitting, training, evaluation and prediction.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "hwr/config.hpp"
#include "hwr/error.hpp"
#include "hwr/evaluation.hpp"
#include "hwr/persist.hpp"
#include "hwr/pipeline.hpp"
#include "hwr/textio.hpp"

namespace fs = std::filesystem;

namespace {

/// Flags shared by most verbs; each overrides the matching config key.
struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> classifier;
  std::optional<int> blocks;
  std::optional<int> window;
  std::optional<std::size_t> codebook_k;
  std::optional<std::string> q_range;
  std::string out;

  void attach(CLI::App* app, bool out_required) {
    app->add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "random seed");
    app->add_option("--classifier", classifier, "nb | tan | fan | dbn");
    app->add_option("--blocks", blocks, "blocks per word image");
    app->add_option("--window", window, "sliding window size in pixels");
    app->add_option("--codebook-k", codebook_k, "k-means cluster count");
    app->add_option("--q-range", q_range, "hidden state range A..B");
    auto* o = app->add_option("--out", out, "output path");
    if (out_required) o->required();
  }

  hwr::Config resolve() const {
    hwr::Config c;
    if (!config_path.empty()) c.load_file(config_path);
    if (seed) c.seed = *seed;
    if (classifier) c.classifier = hwr::parse_classifier(*classifier);
    if (blocks) c.blocks = *blocks;
    if (window) c.window = *window;
    if (codebook_k) {
      c.codebook_k = *codebook_k;
      c.dbn_codebook_k = *codebook_k;
    }
    if (q_range) c.q_range = hwr::parse_int_range(*q_range);
    return c;
  }
};

void write_report(const hwr::EvaluationReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  hwr::save_document(dir / "report.hwr", "report", report.to_document());
  hwr::write_text_file(dir / "report.txt", report.to_table());
}

hwr::SplitConfig split_config(const hwr::Config& c) {
  return {c.split_train, c.split_validation, c.split_test, c.seed};
}

std::vector<hwr::ManifestEntry> to_manifest(const std::vector<hwr::LabeledSample>& samples) {
  std::vector<hwr::ManifestEntry> entries;
  for (const auto& s : samples) entries.push_back({s.id, s.class_id, s.split});
  return entries;
}

void print_scores(const std::string& name, const std::vector<double>& scores) {
  const auto order = hwr::rank_classes(scores);
  std::cout << name << '\t' << order.front() + 1 << '\t';
  for (std::size_t k = 0; k < order.size() && k < hwr::kMaxTopN; ++k)
    std::cout << (k ? "," : "") << 'C' << order[k] + 1 << ':' << hwr::textio::format_double(scores[order[k]], 6);
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline handwritten word recognition with Bayesian network classifiers"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic labeled dataset");
  CommonFlags synth_flags;
  synth_flags.attach(synth, true);
  int classes = 18, per_class = 200;
  double separability = 0.95;
  std::string format = "png";
  bool assign_splits = false;
  synth->add_option("--classes", classes, "number of classes")->check(CLI::Range(2, 1000));
  synth->add_option("--per-class", per_class, "images per class")->check(CLI::PositiveNumber);
  synth->add_option("--separability", separability, "class separability in [0,1]")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--format", format, "png | pgm")->check(CLI::IsMember({"png", "pgm"}));
  synth->add_flag("--split", assign_splits, "also assign train/validation/test splits");

  // split
  auto* split = app.add_subcommand("split", "assign stratified train/validation/test splits to a manifest");
  CommonFlags split_flags;
  split_flags.attach(split, true);
  std::string manifest;
  split->add_option("--manifest", manifest, "input manifest")->required()->check(CLI::ExistingFile);

  // features
  auto* features = app.add_subcommand("features", "dump 12-component feature vectors as CSV");
  CommonFlags feat_flags;
  feat_flags.attach(features, true);
  std::string axis = "blocks";
  features->add_option("--manifest", manifest, "dataset manifest")->required()->check(CLI::ExistingFile);
  features->add_option("--axis", axis, "blocks | horizontal | vertical")
      ->check(CLI::IsMember({"blocks", "horizontal", "vertical"}));

  // codebook
  auto* codebook = app.add_subcommand("codebook", "fit the block-feature discretizer on the train split");
  CommonFlags cb_flags;
  cb_flags.attach(codebook, true);
  std::string k_range;
  codebook->add_option("--manifest", manifest, "dataset manifest")->required()->check(CLI::ExistingFile);
  codebook->add_option("--k-range", k_range, "choose K by mean silhouette over A..B");

  // train-static
  auto* train_static = app.add_subcommand("train-static", "train NB/TAN/FAN block classifiers and report on test");
  CommonFlags ts_flags;
  ts_flags.attach(train_static, true);
  train_static->add_option("--manifest", manifest, "dataset manifest")->required()->check(CLI::ExistingFile);

  // train-dbn
  auto* train_dbn = app.add_subcommand("train-dbn", "train per-class coupled HMMs and report on test");
  CommonFlags td_flags;
  td_flags.attach(train_dbn, true);
  train_dbn->add_option("--manifest", manifest, "dataset manifest")->required()->check(CLI::ExistingFile);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score a saved model on one split of a manifest");
  CommonFlags ev_flags;
  ev_flags.attach(evaluate, true);
  std::string model_path, split_name = "test";
  evaluate->add_option("--model", model_path, "static model file or DBN model directory")->required();
  evaluate->add_option("--manifest", manifest, "dataset manifest")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--split", split_name, "train | validation | test")
      ->check(CLI::IsMember({"train", "validation", "test"}));

  // predict
  auto* predict = app.add_subcommand("predict", "classify images with a saved model");
  std::vector<std::string> images;
  predict->add_option("--model", model_path, "static model file or DBN model directory")->required();
  predict->add_option("images", images, "PNG or PGM images")->required()->check(CLI::ExistingFile);

  // report
  auto* report = app.add_subcommand("report", "render a saved report document as a table");
  std::string report_path, report_out;
  report->add_option("--report", report_path, "report.hwr document")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_out, "write the table here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      const hwr::Config c = synth_flags.resolve();
      hwr::SyntheticOptions opt;
      opt.blocks = c.blocks;
      auto samples = hwr::generate_synthetic(classes, per_class, separability, c.seed, opt);
      if (assign_splits) samples = hwr::split_dataset(std::move(samples), split_config(c));
      const fs::path dir = synth_flags.out;
      for (auto& s : samples) {
        if (format == "pgm") s.id = fs::path(s.id).replace_extension(".pgm").string();
        fs::create_directories((dir / s.id).parent_path());
        if (format == "pgm") hwr::write_pgm(s.image, dir / s.id);
        else hwr::write_png(s.image, dir / s.id);
      }
      hwr::write_manifest(to_manifest(samples), dir / "manifest.tsv");
      std::cout << "wrote " << samples.size() << " images and " << (dir / "manifest.tsv").string() << '\n';
    } else if (split->parsed()) {
      const hwr::Config c = split_flags.resolve();
      auto entries = hwr::read_manifest(manifest);
      std::vector<hwr::LabeledSample> samples;
      for (const auto& e : entries) samples.push_back({e.path, {}, e.class_id, e.split});
      samples = hwr::split_dataset(std::move(samples), split_config(c));
      hwr::write_manifest(to_manifest(samples), split_flags.out);
    } else if (features->parsed()) {
      const hwr::Config c = feat_flags.resolve();
      const auto samples = hwr::load_dataset(manifest);
      std::ofstream out(feat_flags.out);
      if (!out) throw hwr::Error(hwr::ErrorCode::io, "cannot write " + feat_flags.out);
      for (const auto& s : samples) {
        std::vector<hwr::FeatureVector> rows;
        if (axis == "blocks") {
          rows = hwr::block_features(s.image, c);
        } else {
          auto w = hwr::window_features(s.image, c);
          rows = axis == "horizontal" ? w.horizontal : w.vertical;
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
          out << s.id << ',' << i;
          for (double v : rows[i]) out << ',' << hwr::textio::format_double(v, 9);
          out << '\n';
        }
      }
    } else if (codebook->parsed()) {
      hwr::Config c = cb_flags.resolve();
      if (!k_range.empty()) {
        c.codebook_k_range.clear();
        for (int k : hwr::parse_int_range(k_range)) c.codebook_k_range.push_back(static_cast<std::size_t>(k));
      }
      const auto samples = hwr::load_dataset(manifest);
      std::vector<std::vector<hwr::FeatureVector>> train;
      for (const auto& s : samples)
        if (s.split == hwr::Split::train) train.push_back(hwr::block_features(s.image, c));
      const auto disc = hwr::run_stage("codebook", [&] { return hwr::fit_block_discretizer(train, c); });
      hwr::save_document(cb_flags.out, "discretizer", disc.serialize());
      std::cout << "cardinalities";
      for (int k : disc.cardinalities()) std::cout << ' ' << k;
      std::cout << '\n';
    } else if (train_static->parsed()) {
      const hwr::Config c = ts_flags.resolve();
      const auto samples = hwr::run_stage("load", [&] { return hwr::load_dataset(manifest); });
      const auto run = hwr::run_static_pipeline(samples, c);
      const fs::path dir = ts_flags.out;
      hwr::save_static_model(run.model, dir / "model.hwr");
      hwr::write_text_file(dir / "config.txt", c.to_text());
      write_report(run.report, dir);
      std::cout << run.report.to_table();
    } else if (train_dbn->parsed()) {
      hwr::Config c = td_flags.resolve();
      c.classifier = hwr::ClassifierKind::dbn;
      const auto samples = hwr::run_stage("load", [&] { return hwr::load_dataset(manifest); });
      const auto run = hwr::run_dbn_pipeline(samples, c);
      const fs::path dir = td_flags.out;
      hwr::save_dbn_model(run.model, dir / "model");
      hwr::write_text_file(dir / "config.txt", c.to_text());
      if (run.selection) hwr::write_text_file(dir / "states.dat", hwr::state_selection_table(*run.selection));
      write_report(run.report, dir);
      std::cout << run.report.to_table();
    } else if (evaluate->parsed()) {
      const auto samples = hwr::run_stage("load", [&] { return hwr::load_dataset(manifest); });
      const hwr::Split which = hwr::parse_split(split_name);
      hwr::EvaluationReport r;
      if (fs::is_directory(model_path)) r = hwr::evaluate_dbn(hwr::load_dbn_model(model_path), samples, which);
      else r = hwr::evaluate_static(hwr::load_static_model(model_path), samples, which);
      write_report(r, ev_flags.out);
      std::cout << r.to_table();
    } else if (predict->parsed()) {
      if (fs::is_directory(model_path)) {
        const auto model = hwr::load_dbn_model(model_path);
        for (const auto& p : images) print_scores(p, model.score(hwr::read_image(p)));
      } else {
        const auto model = hwr::load_static_model(model_path);
        for (const auto& p : images) print_scores(p, model.score(hwr::read_image(p)));
      }
    } else if (report->parsed()) {
      const auto r = hwr::EvaluationReport::parse(hwr::load_document(report_path, "report"));
      if (report_out.empty()) std::cout << r.to_table();
      else hwr::write_text_file(report_out, r.to_table());
    }
  } catch (const hwr::Error& e) {
    std::cerr << "hwr: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "hwr: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
