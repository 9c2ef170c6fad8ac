#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hwr {

struct DiscreteSample {
  std::vector<int> attributes;
  int class_id = 0;
};

struct DiscreteDataset {
  int num_classes = 0;
  std::vector<int> cardinalities;  // one per attribute
  std::vector<DiscreteSample> samples;

  std::size_t num_attributes() const noexcept { return cardinalities.size(); }
  /// Throws label_range if any label or class id is out of bounds.
  void validate() const;
};

enum class StructureKind { none, tree, forest };

const char* to_string(StructureKind kind);

/// Attribute-to-attribute arcs on top of the class node.
struct AugmentingStructure {
  StructureKind kind = StructureKind::none;
  std::vector<int> parent;  // attribute parent per attribute, -1 when none
  std::vector<int> roots;   // attributes without an attribute parent that head a tree

  /// Directed (parent, child) arcs in child order.
  std::vector<std::pair<int, int>> edges() const;
  /// Undirected edges as (min, max), sorted.
  std::vector<std::pair<int, int>> undirected_edges() const;

  bool operator==(const AugmentingStructure&) const = default;
};

/// P(c) and P(a_i | a_parent(i), c), all Laplace-smoothed.
class DiscreteBnClassifier {
 public:
  int num_classes() const noexcept { return num_classes_; }
  const std::vector<int>& cardinalities() const noexcept { return cardinalities_; }
  const std::vector<double>& prior() const noexcept { return prior_; }
  const AugmentingStructure& structure() const noexcept { return structure_; }

  /// P(a_i = value | a_parent = parent_value, c). parent_value is ignored
  /// for attributes without a parent.
  double cpt(int attribute, int class_id, int parent_value, int value) const;

  /// log P(c) + sum_i log P(a_i | parents, c) for every class.
  std::vector<double> log_scores(const std::vector<int>& attributes) const;

  std::string serialize() const;
  static DiscreteBnClassifier parse(const std::string& body);

  bool operator==(const DiscreteBnClassifier&) const = default;

 private:
  friend DiscreteBnClassifier fit_parameters(const DiscreteDataset&, AugmentingStructure);

  int parent_cardinality(int attribute) const;

  int num_classes_ = 0;
  std::vector<int> cardinalities_;
  std::vector<double> prior_;
  AugmentingStructure structure_;
  // cpts_[i][(c * parent_card + parent_value) * card_i + value]
  std::vector<std::vector<double>> cpts_;
};

/// (count + 1) / (total + cardinality) per cell.
std::vector<double> laplace_cpt(const std::vector<double>& counts, int cardinality);

/// Plug-in I(A_i; C) in nats.
double mutual_information(const DiscreteDataset& data, int attribute);
/// Plug-in I(A_i; A_j | C) in nats.
double conditional_mutual_information(const DiscreteDataset& data, int i, int j);
/// Symmetric m x m matrix of pairwise CMI, zero diagonal.
std::vector<std::vector<double>> cmi_matrix(const DiscreteDataset& data);

/// Maximum-weight spanning tree over the complete attribute graph by
/// sorted-edge greedy selection; equal weights go to the lexicographically
/// smaller pair. Returns undirected (i, j) edges with i < j.
std::vector<std::pair<int, int>> maximum_spanning_tree(const std::vector<std::vector<double>>& weights);

/// Sum over ordered pairs i != j of CMI, divided by m(m - 1).
double average_cmi(const std::vector<std::vector<double>>& cmi);

/// Fills the CPTs for a fixed structure.
DiscreteBnClassifier fit_parameters(const DiscreteDataset& data, AugmentingStructure structure);

DiscreteBnClassifier build_nb(const DiscreteDataset& data);

struct TanOptions {
  /// Root attribute; drawn uniformly with `seed` when absent.
  std::optional<int> root;
  std::uint64_t seed = 0;
};

DiscreteBnClassifier build_tan(const DiscreteDataset& data, const TanOptions& options = {});

enum class FanPruning {
  /// Keep every tree edge whose CMI reaches the average.
  average,
  /// Additionally require the edge to pay for its parameters:
  /// N * CMI > (dof / 2) ln N, dof = (r_i - 1)(r_j - 1) C.
  bic,
};

const char* to_string(FanPruning pruning);
FanPruning parse_fan_pruning(const std::string& text);

struct FanOptions {
  FanPruning pruning = FanPruning::bic;
};

DiscreteBnClassifier build_fan(const DiscreteDataset& data, const FanOptions& options = {});

/// Normalized class posterior for one block.
std::vector<double> block_posterior(const DiscreteBnClassifier& model, const std::vector<int>& attributes);

/// Component-wise mean of the block posteriors.
std::vector<double> image_posterior(const std::vector<std::vector<double>>& block_posteriors);

/// Argmax, lowest index on ties.
std::size_t decide(const std::vector<double>& distribution);

}  // namespace hwr
