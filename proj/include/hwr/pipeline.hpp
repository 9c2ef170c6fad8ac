#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hwr/config.hpp"
#include "hwr/dbn.hpp"
#include "hwr/error.hpp"
#include "hwr/evaluation.hpp"
#include "hwr/imaging.hpp"
#include "hwr/moments.hpp"
#include "hwr/quantize.hpp"
#include "hwr/staticbn.hpp"

namespace hwr {

/// Runs `fn`, prefixing any hwr::Error message with "[stage] ".
template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("[") + stage + "] " + e.detail());
  }
}

/// binarize -> split_blocks -> feature vector per block (blank blocks give
/// zeros and bump `blank`).
std::vector<FeatureVector> block_features(const GrayImage& image, const Config& config, std::size_t* blank = nullptr);

struct WindowFeatures {
  std::vector<FeatureVector> horizontal;  // right to left
  std::vector<FeatureVector> vertical;    // top to bottom
};

WindowFeatures window_features(const GrayImage& image, const Config& config, std::size_t* blank = nullptr);

int count_classes(const std::vector<LabeledSample>& samples);

// ---------------------------------------------------------------------------

/// Block classifiers (one per block position) over a shared discretizer.
struct StaticModel {
  Config config;
  int num_classes = 0;
  Discretizer discretizer;
  std::vector<DiscreteBnClassifier> classifiers;

  /// Image posterior over classes from precomputed block features.
  std::vector<double> score_features(const std::vector<FeatureVector>& blocks) const;
  std::vector<double> score(const GrayImage& image) const;

  std::string serialize() const;
  static StaticModel parse(const std::string& body);
};

struct StaticRun {
  StaticModel model;
  EvaluationReport report;
  std::size_t blank_blocks = 0;
};

/// Trains on the train split and reports on the test split.
StaticRun run_static_pipeline(const std::vector<LabeledSample>& samples, const Config& config);

/// Fits the block-feature discretizer on train-split images only.
Discretizer fit_block_discretizer(const std::vector<std::vector<FeatureVector>>& train_blocks, const Config& config);

// ---------------------------------------------------------------------------

struct DbnModel {
  Config config;
  Discretizer horizontal;
  Discretizer vertical;
  ClassModelBank bank;

  ObservationPair observe_features(const WindowFeatures& f) const;
  ObservationPair observe(const GrayImage& image) const;
  /// Per-class log-likelihoods.
  std::vector<double> score(const GrayImage& image) const;
};

struct DbnRun {
  DbnModel model;
  EvaluationReport report;
  std::optional<StateSelection> selection;
  std::size_t blank_windows = 0;
};

/// Codebooks and models come from the train split; the validation split
/// only drives state-count selection; the test split is scored last.
DbnRun run_dbn_pipeline(const std::vector<LabeledSample>& samples, const Config& config);

// ---------------------------------------------------------------------------

EvaluationReport evaluate_static(const StaticModel& model, const std::vector<LabeledSample>& samples, Split split);
EvaluationReport evaluate_dbn(const DbnModel& model, const std::vector<LabeledSample>& samples, Split split);

void save_static_model(const StaticModel& model, const std::filesystem::path& path);
StaticModel load_static_model(const std::filesystem::path& path);

/// Writes `index.hwr` plus one `class-NN.hwr` document per class into `dir`.
void save_dbn_model(const DbnModel& model, const std::filesystem::path& dir);
DbnModel load_dbn_model(const std::filesystem::path& dir);

/// Rate-vs-Q and time-vs-Q columns for plotting.
std::string state_selection_table(const StateSelection& selection);

}  // namespace hwr
