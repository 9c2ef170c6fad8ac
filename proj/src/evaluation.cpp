#include "hwr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "hwr/error.hpp"
#include "hwr/random.hpp"
#include "hwr/textio.hpp"

namespace hwr {

std::vector<LabeledSample> split_dataset(std::vector<LabeledSample> samples, const SplitConfig& config) {
  if (config.train < 0.0 || config.validation < 0.0 || config.test < 0.0 ||
      std::abs(config.train + config.validation + config.test - 1.0) > 1e-9)
    throw Error(ErrorCode::parameter, "split fractions must be non-negative and sum to 1");

  int classes = 0;
  for (const auto& s : samples) classes = std::max(classes, s.class_id + 1);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < samples.size(); ++i) members[static_cast<std::size_t>(samples[i].class_id)].push_back(i);

  for (int c = 0; c < classes; ++c) {
    auto& idx = members[static_cast<std::size_t>(c)];
    if (idx.empty()) continue;
    if (idx.size() < 4)
      throw Error(ErrorCode::class_too_small,
                  "class " + std::to_string(c + 1) + " has " + std::to_string(idx.size()) + " samples; at least 4 needed");
    Rng rng(derive_seed(config.seed, {0x73706c6974ULL, static_cast<std::uint64_t>(c)}));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[uniform_index(rng, i)]);

    const double n = static_cast<double>(idx.size());
    const auto n_val = static_cast<std::size_t>(std::lround(n * config.validation));
    const auto n_test = static_cast<std::size_t>(std::lround(n * config.test));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      Split s = Split::train;
      if (k < n_test) s = Split::test;
      else if (k < n_test + n_val) s = Split::validation;
      samples[idx[k]].split = s;
    }
  }
  return samples;
}

std::vector<std::size_t> rank_classes(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

double average_rate(const std::vector<double>& per_class_rates) {
  if (per_class_rates.empty()) return 0.0;
  return std::accumulate(per_class_rates.begin(), per_class_rates.end(), 0.0) /
         static_cast<double>(per_class_rates.size());
}

EvaluationReport compute_report(const std::vector<int>& truth, const std::vector<std::vector<double>>& scores,
                                int num_classes) {
  if (truth.size() != scores.size()) throw Error(ErrorCode::mismatch, "one score vector per sample expected");
  if (num_classes < 1) throw Error(ErrorCode::parameter, "report needs at least one class");
  const auto nc = static_cast<std::size_t>(num_classes);

  EvaluationReport r;
  r.num_classes = num_classes;
  r.counts.assign(nc, 0);
  r.per_class_top.assign(nc, {});
  r.confusion.assign(nc, std::vector<double>(nc, 0.0));
  std::vector<std::array<double, kMaxTopN>> hits(nc, std::array<double, kMaxTopN>{});
  std::array<double, kMaxTopN> all_hits{};

  for (std::size_t s = 0; s < truth.size(); ++s) {
    if (scores[s].size() != nc) throw Error(ErrorCode::mismatch, "score vector does not cover every class");
    if (truth[s] < 0 || truth[s] >= num_classes) throw Error(ErrorCode::label_range, "true class out of range");
    const auto c = static_cast<std::size_t>(truth[s]);
    const auto order = rank_classes(scores[s]);
    ++r.counts[c];
    r.confusion[c][order.front()] += 1.0;
    const auto pos = static_cast<std::size_t>(std::find(order.begin(), order.end(), c) - order.begin());
    for (std::size_t n = pos; n < kMaxTopN; ++n) {
      hits[c][n] += 1.0;
      all_hits[n] += 1.0;
    }
  }

  std::vector<double> top1;
  for (std::size_t c = 0; c < nc; ++c) {
    if (r.counts[c] == 0) continue;
    const double n = static_cast<double>(r.counts[c]);
    for (int k = 0; k < kMaxTopN; ++k) r.per_class_top[c][k] = 100.0 * hits[c][k] / n;
    for (auto& v : r.confusion[c]) v = 100.0 * v / n;
    top1.push_back(r.per_class_top[c][0]);
  }
  if (!truth.empty())
    for (int k = 0; k < kMaxTopN; ++k) r.overall_top[k] = 100.0 * all_hits[k] / static_cast<double>(truth.size());
  r.t_m = average_rate(top1);
  return r;
}

std::string EvaluationReport::to_table() const {
  std::ostringstream out;
  char line[256];
  out << "class      n   Top-1   Top-2   Top-3   Top-4\n";
  for (int c = 0; c < num_classes; ++c) {
    const auto& t = per_class_top[static_cast<std::size_t>(c)];
    std::snprintf(line, sizeof line, "C%-4d %6zu %7.2f %7.2f %7.2f %7.2f\n", c + 1, counts[static_cast<std::size_t>(c)],
                  t[0], t[1], t[2], t[3]);
    out << line;
  }
  std::snprintf(line, sizeof line, "all   %6zu %7.2f %7.2f %7.2f %7.2f\n",
                std::accumulate(counts.begin(), counts.end(), std::size_t{0}), overall_top[0], overall_top[1],
                overall_top[2], overall_top[3]);
  out << line;
  std::snprintf(line, sizeof line, "T_m = %.2f%%\n\nconfusion (%% of true class, rows = truth)\n     ", t_m);
  out << line;
  for (int c = 0; c < num_classes; ++c) {
    std::snprintf(line, sizeof line, " %6s", ("C" + std::to_string(c + 1)).c_str());
    out << line;
  }
  out << '\n';
  for (int r = 0; r < num_classes; ++r) {
    std::snprintf(line, sizeof line, "C%-4d", r + 1);
    out << line;
    for (double v : confusion[static_cast<std::size_t>(r)]) {
      if (v == 0.0) {
        out << "      .";
      } else {
        std::snprintf(line, sizeof line, " %6.2f", v);
        out << line;
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string EvaluationReport::to_document() const {
  using textio::format_double;
  std::ostringstream out;
  out << "classes " << num_classes << '\n';
  out << "t_m " << format_double(t_m) << '\n';
  out << "overall";
  for (double v : overall_top) out << ' ' << format_double(v);
  out << '\n';
  for (int c = 0; c < num_classes; ++c) {
    const auto i = static_cast<std::size_t>(c);
    out << "class " << c + 1 << " count " << counts[i] << " top";
    for (double v : per_class_top[i]) out << ' ' << format_double(v);
    out << " confusion";
    for (double v : confusion[i]) out << ' ' << format_double(v);
    out << '\n';
  }
  return out.str();
}

EvaluationReport EvaluationReport::parse(const std::string& body) {
  textio::Reader in(body);
  EvaluationReport r;
  r.num_classes = in.keyed_integer<int>("classes");
  if (r.num_classes < 1) throw Error(ErrorCode::format, "report needs at least one class");
  const auto nc = static_cast<std::size_t>(r.num_classes);
  r.t_m = in.keyed_number("t_m");
  in.expect("overall");
  for (auto& v : r.overall_top) v = in.number();
  r.counts.resize(nc);
  r.per_class_top.resize(nc);
  r.confusion.assign(nc, std::vector<double>(nc));
  for (std::size_t c = 0; c < nc; ++c) {
    if (in.keyed_integer<std::size_t>("class") != c + 1) throw Error(ErrorCode::format, "report rows out of order");
    r.counts[c] = in.keyed_integer<std::size_t>("count");
    in.expect("top");
    for (auto& v : r.per_class_top[c]) v = in.number();
    in.expect("confusion");
    for (auto& v : r.confusion[c]) v = in.number();
  }
  return r;
}

}  // namespace hwr
