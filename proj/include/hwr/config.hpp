#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hwr/imaging.hpp"
#include "hwr/moments.hpp"
#include "hwr/quantize.hpp"
#include "hwr/staticbn.hpp"

namespace hwr {

enum class ClassifierKind { nb, tan, fan, dbn };

const char* to_string(ClassifierKind kind);
ClassifierKind parse_classifier(const std::string& text);

/// Every experiment hyperparameter. Files hold flat `key = value` lines;
/// `#` starts a comment.
struct Config {
  std::uint64_t seed = 7;
  ClassifierKind classifier = ClassifierKind::fan;
  BinarizeMethod binarize = BinarizeMethod::otsu();
  std::vector<ZernikeIndex> zernike = default_zernike_indices();

  // static path
  int blocks = 3;
  Discretization discretization = Discretization::per_attribute;
  std::size_t codebook_k = 22;
  /// When non-empty, K is chosen by mean silhouette over this range.
  std::vector<std::size_t> codebook_k_range;
  std::size_t pca_components = 0;
  int kmeans_restarts = 5;
  int kmeans_max_iters = 100;
  int tan_root = -1;  // -1: seeded random root
  FanPruning fan_pruning = FanPruning::bic;

  // dynamic path
  int window = 10;
  std::size_t dbn_codebook_k = 22;
  std::vector<int> q_range{3};
  double em_tol = 1e-4;
  int em_max_iters = 100;
  int em_restarts = 3;
  double em_floor = 1e-6;

  // splits
  double split_train = 0.50;
  double split_validation = 0.25;
  double split_test = 0.25;

  /// Applies one key; throws parameter on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  void load_file(const std::filesystem::path& path);
  /// Canonical `key = value` rendering, one key per line, fixed order.
  std::string to_text() const;
  static Config parse(const std::string& text);

  FeatureConfig features() const { return {zernike, DiskMapping::circumscribed}; }
};

/// "A..B" or a single integer.
std::vector<int> parse_int_range(const std::string& text);
std::string format_int_range(const std::vector<int>& range);

}  // namespace hwr
