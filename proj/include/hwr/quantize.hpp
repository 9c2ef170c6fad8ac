#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hwr {

using Vector = std::vector<double>;
using Points = std::vector<Vector>;  // row-major sample matrix

struct StandardizedMatrix {
  Points rows;
  Vector col_means;
  Vector col_stds;  // population convention (divisor N)
};

/// Centres and scales every column. Throws zero_variance naming the first
/// constant column.
StandardizedMatrix standardize(const Points& data);

/// Principal axes of the correlation matrix of standardized data.
struct PcaModel {
  Points components;  // q unit vectors, each of length P
  Vector eigenvalues;  // non-increasing
  std::size_t q = 0;

  Vector project(const Vector& x) const;
  /// Inverse rotation of a projected vector back to the standardized space.
  Vector reconstruct(const Vector& scores) const;
};

PcaModel pca_fit(const StandardizedMatrix& data, std::size_t q);

/// K centroids in feature space.
struct Codebook {
  Points centroids;
  std::uint64_t seed = 0;
  double inertia = 0.0;

  std::size_t k() const noexcept { return centroids.size(); }
  std::size_t dimension() const noexcept { return centroids.empty() ? 0 : centroids.front().size(); }

  bool operator==(const Codebook&) const = default;
};

struct KMeansOptions {
  std::size_t k = 22;
  std::uint64_t seed = 0;
  int max_iters = 100;
  int restarts = 5;
};

struct KMeansResult {
  std::vector<std::size_t> assignments;
  Codebook codebook;
  double inertia = 0.0;
  /// Inertia after every assignment step of the winning restart.
  Vector inertia_history;
  bool converged = false;
};

std::size_t count_distinct(const Points& points);

/// Lloyd's algorithm from K distinct seeded points; keeps the restart with
/// the lowest inertia.
KMeansResult kmeans(const Points& points, const KMeansOptions& options);

/// Per-point silhouette (b - a) / max(a, b); singleton clusters score 0.
Vector silhouette(const Points& points, const std::vector<std::size_t>& assignments);

struct SelectKResult {
  std::size_t k = 0;
  std::vector<std::size_t> candidates;
  Vector mean_silhouette;
  Vector negative_fraction;
};

/// K maximizing mean silhouette; fewer negative silhouettes, then smaller K,
/// break ties.
SelectKResult select_k(const Points& points, const std::vector<std::size_t>& k_range, std::uint64_t seed,
                       int max_iters = 100, int restarts = 5);

/// Index of the nearest centroid (Euclidean), lowest index on ties.
std::size_t quantize_vector(const Vector& v, const Codebook& codebook);

std::string serialize_codebook(const Codebook& cb);
Codebook parse_codebook(const std::string& body);

// ---------------------------------------------------------------------------

enum class Discretization { per_attribute, per_vector };

const char* to_string(Discretization d);
Discretization parse_discretization(const std::string& text);

struct DiscretizerOptions {
  Discretization mode = Discretization::per_attribute;
  std::size_t k = 22;
  /// Retained principal components before per-vector clustering; 0 disables
  /// PCA.
  std::size_t pca_components = 0;
  std::uint64_t seed = 0;
  int max_iters = 100;
  int restarts = 5;
};

/// Maps continuous feature vectors to discrete attribute labels. Per-
/// attribute mode clusters each component with its own scalar codebook and
/// yields one label per component; per-vector mode standardizes (and
/// optionally rotates onto principal axes) and yields a single label.
class Discretizer {
 public:
  Discretizer() = default;

  static Discretizer fit(const Points& training, const DiscretizerOptions& options);

  std::vector<int> transform(const Vector& v) const;
  /// Cardinality of each produced attribute.
  std::vector<int> cardinalities() const;
  std::size_t input_dimension() const noexcept { return dim_; }
  Discretization mode() const noexcept { return mode_; }

  std::string serialize() const;
  static Discretizer parse(const std::string& body);

  bool operator==(const Discretizer&) const = default;

 private:
  Discretization mode_ = Discretization::per_attribute;
  std::size_t dim_ = 0;
  std::vector<Codebook> codebooks_;  // one per attribute, or a single one
  Vector means_, scales_;           // per-vector mode
  Points pca_components_;           // per-vector mode with PCA, q x P
};

}  // namespace hwr
