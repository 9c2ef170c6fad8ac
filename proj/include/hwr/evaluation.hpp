#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hwr/imaging.hpp"

namespace hwr {

struct SplitConfig {
  double train = 0.50;
  double validation = 0.25;
  double test = 0.25;
  std::uint64_t seed = 0;
};

/// Stratified, seeded assignment of every sample to a split. Per class,
/// validation and test sizes are rounded from their fractions and the
/// remainder goes to train.
std::vector<LabeledSample> split_dataset(std::vector<LabeledSample> samples, const SplitConfig& config);

inline constexpr int kMaxTopN = 4;

struct EvaluationReport {
  int num_classes = 0;
  std::vector<std::size_t> counts;                        // test samples per class
  std::vector<std::array<double, kMaxTopN>> per_class_top;  // percent, Top-1..Top-4
  std::array<double, kMaxTopN> overall_top{};             // percent over all samples
  std::vector<std::vector<double>> confusion;             // percent, row = true class
  double t_m = 0.0;                                       // mean per-class Top-1

  /// Fixed-width table for terminals.
  std::string to_table() const;
  /// Structured key/value document; byte-identical for identical inputs.
  std::string to_document() const;
  static EvaluationReport parse(const std::string& body);
};

/// Ranks classes by descending score (lowest index first on ties).
std::vector<std::size_t> rank_classes(const std::vector<double>& scores);

EvaluationReport compute_report(const std::vector<int>& truth, const std::vector<std::vector<double>>& scores,
                                int num_classes);

/// Average of per-class rates, the T_m statistic.
double average_rate(const std::vector<double>& per_class_rates);

}  // namespace hwr
