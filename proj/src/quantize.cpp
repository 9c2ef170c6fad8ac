#include "hwr/quantize.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "hwr/error.hpp"
#include "hwr/random.hpp"
#include "hwr/textio.hpp"

namespace hwr {

namespace {

void check_rectangular(const Points& data) {
  if (data.empty()) throw Error(ErrorCode::dimension, "no samples");
  const std::size_t p = data.front().size();
  if (p == 0) throw Error(ErrorCode::dimension, "samples have no features");
  for (const auto& row : data)
    if (row.size() != p) throw Error(ErrorCode::dimension, "ragged sample matrix");
}

double squared_distance(const Vector& a, const Vector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

// Column means and population standard deviations.
void column_stats(const Points& data, Vector& means, Vector& stds) {
  const std::size_t n = data.size(), p = data.front().size();
  means.assign(p, 0.0);
  stds.assign(p, 0.0);
  for (const auto& row : data)
    for (std::size_t j = 0; j < p; ++j) means[j] += row[j];
  for (auto& m : means) m /= static_cast<double>(n);
  for (const auto& row : data)
    for (std::size_t j = 0; j < p; ++j) stds[j] += (row[j] - means[j]) * (row[j] - means[j]);
  for (auto& s : stds) s = std::sqrt(s / static_cast<double>(n));
}

}  // namespace

StandardizedMatrix standardize(const Points& data) {
  check_rectangular(data);
  if (data.size() < 2) throw Error(ErrorCode::parameter, "standardization needs at least 2 samples");
  StandardizedMatrix out;
  column_stats(data, out.col_means, out.col_stds);
  for (std::size_t j = 0; j < out.col_stds.size(); ++j) {
    // Relative test so that columns like [1e9, 1e9] count as constant.
    const double scale = std::max(1.0, std::abs(out.col_means[j]));
    if (out.col_stds[j] <= 1e-12 * scale)
      throw Error(ErrorCode::zero_variance, "column " + std::to_string(j) + " is constant");
  }
  out.rows = data;
  for (auto& row : out.rows)
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - out.col_means[j]) / out.col_stds[j];
  return out;
}

// ---------------------------------------------------------------------------

Vector PcaModel::project(const Vector& x) const {
  Vector s(q, 0.0);
  for (std::size_t k = 0; k < q; ++k)
    for (std::size_t j = 0; j < x.size(); ++j) s[k] += components[k][j] * x[j];
  return s;
}

Vector PcaModel::reconstruct(const Vector& scores) const {
  const std::size_t p = components.empty() ? 0 : components.front().size();
  Vector x(p, 0.0);
  for (std::size_t k = 0; k < q; ++k)
    for (std::size_t j = 0; j < p; ++j) x[j] += scores[k] * components[k][j];
  return x;
}

PcaModel pca_fit(const StandardizedMatrix& data, std::size_t q) {
  check_rectangular(data.rows);
  const std::size_t n = data.rows.size(), p = data.rows.front().size();
  if (q < 1 || q > p) throw Error(ErrorCode::parameter, "retained component count out of range");

  Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (const auto& row : data.rows) {
    const Eigen::Map<const Eigen::VectorXd> r(row.data(), static_cast<Eigen::Index>(p));
    corr.noalias() += r * r.transpose();
  }
  corr /= static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::parameter, "eigendecomposition failed");

  PcaModel model;
  model.q = q;
  // Eigen returns ascending eigenvalues.
  for (std::size_t k = 0; k < q; ++k) {
    const auto col = static_cast<Eigen::Index>(p - 1 - k);
    model.eigenvalues.push_back(std::max(0.0, solver.eigenvalues()(col)));
    Vector v(p);
    for (std::size_t j = 0; j < p; ++j) v[j] = solver.eigenvectors()(static_cast<Eigen::Index>(j), col);
    // Sign convention: largest-magnitude entry positive.
    const auto big = std::max_element(v.begin(), v.end(),
                                      [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (*big < 0.0)
      for (auto& x : v) x = -x;
    model.components.push_back(std::move(v));
  }
  return model;
}

// ---------------------------------------------------------------------------

std::size_t count_distinct(const Points& points) {
  Points sorted = points;
  std::sort(sorted.begin(), sorted.end());
  return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

namespace {

struct LloydRun {
  std::vector<std::size_t> assignments;
  Points centroids;
  double inertia = 0.0;
  Vector history;
  bool converged = false;
};

double assign(const Points& points, const Points& centroids, std::vector<std::size_t>& out) {
  double inertia = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const double d = squared_distance(points[i], centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    out[i] = best;
    inertia += best_d;
  }
  return inertia;
}

LloydRun lloyd(const Points& points, std::size_t k, Rng& rng, int max_iters) {
  const std::size_t n = points.size(), p = points.front().size();

  // K distinct points, uniformly at random.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  LloydRun run;
  for (std::size_t idx : order) {
    if (run.centroids.size() == k) break;
    if (std::find(run.centroids.begin(), run.centroids.end(), points[idx]) == run.centroids.end())
      run.centroids.push_back(points[idx]);
  }

  run.assignments.assign(n, k);  // sentinel: nothing assigned yet
  std::vector<std::size_t> next(n);
  for (int iter = 0; iter < max_iters; ++iter) {
    run.inertia = assign(points, run.centroids, next);
    run.history.push_back(run.inertia);
    if (next == run.assignments) {
      run.converged = true;
      break;
    }
    run.assignments = next;

    Points sums(k, Vector(p, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[run.assignments[i]];
      for (std::size_t j = 0; j < p; ++j) s[j] += points[i][j];
      ++counts[run.assignments[i]];
    }
    std::vector<std::size_t> empty;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        empty.push_back(c);
        continue;
      }
      for (std::size_t j = 0; j < p; ++j) run.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
    }
    if (!empty.empty()) {
      // Reseed each empty cluster with the point farthest from its centroid.
      std::vector<std::pair<double, std::size_t>> far;
      for (std::size_t i = 0; i < n; ++i)
        far.emplace_back(squared_distance(points[i], run.centroids[run.assignments[i]]), i);
      std::stable_sort(far.begin(), far.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      for (std::size_t e = 0; e < empty.size() && e < far.size(); ++e)
        run.centroids[empty[e]] = points[far[e].second];
      // Force another assignment pass.
      run.assignments.assign(n, k);
    }
  }
  if (run.assignments.front() == k) run.assignments = next;
  return run;
}

}  // namespace

KMeansResult kmeans(const Points& points, const KMeansOptions& options) {
  check_rectangular(points);
  if (options.k < 1) throw Error(ErrorCode::parameter, "K must be >= 1");
  if (options.max_iters < 1 || options.restarts < 1)
    throw Error(ErrorCode::parameter, "max_iters and restarts must be >= 1");
  const std::size_t distinct = count_distinct(points);
  if (options.k > distinct)
    throw Error(ErrorCode::parameter, "K = " + std::to_string(options.k) + " exceeds the " +
                                          std::to_string(distinct) + " distinct points");

  Rng rng(derive_seed(options.seed, {0x6b6d65616e73ULL}));
  LloydRun best;
  bool have = false;
  for (int r = 0; r < options.restarts; ++r) {
    LloydRun run = lloyd(points, options.k, rng, options.max_iters);
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }

  KMeansResult out;
  out.assignments = std::move(best.assignments);
  out.codebook.centroids = std::move(best.centroids);
  out.codebook.seed = options.seed;
  out.codebook.inertia = best.inertia;
  out.inertia = best.inertia;
  out.inertia_history = std::move(best.history);
  out.converged = best.converged;
  return out;
}

// ---------------------------------------------------------------------------

Vector silhouette(const Points& points, const std::vector<std::size_t>& assignments) {
  check_rectangular(points);
  if (points.size() != assignments.size())
    throw Error(ErrorCode::mismatch, "one assignment per point expected");
  const std::size_t k = *std::max_element(assignments.begin(), assignments.end()) + 1;
  std::vector<std::size_t> sizes(k, 0);
  for (auto a : assignments) ++sizes[a];
  const auto clusters = std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; });
  if (clusters < 2) throw Error(ErrorCode::undefined_silhouette, "silhouette needs at least 2 clusters");

  const std::size_t n = points.size();
  Vector s(n, 0.0);
  Vector dist_sum(k);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t own = assignments[i];
    if (sizes[own] == 1) continue;  // singleton
    std::fill(dist_sum.begin(), dist_sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) dist_sum[assignments[j]] += std::sqrt(squared_distance(points[i], points[j]));
    const double a = dist_sum[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != own && sizes[c] > 0) b = std::min(b, dist_sum[c] / static_cast<double>(sizes[c]));
    const double denom = std::max(a, b);
    s[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return s;
}

SelectKResult select_k(const Points& points, const std::vector<std::size_t>& k_range, std::uint64_t seed,
                       int max_iters, int restarts) {
  if (k_range.empty()) throw Error(ErrorCode::parameter, "empty K range");
  SelectKResult out;
  if (k_range.size() == 1) {
    out.k = k_range.front();
    out.candidates = k_range;
    return out;
  }
  double best_mean = -std::numeric_limits<double>::infinity(), best_neg = 2.0;
  for (std::size_t k : k_range) {
    const KMeansResult km = kmeans(points, {k, seed, max_iters, restarts});
    const Vector s = silhouette(points, km.assignments);
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    const double neg = static_cast<double>(std::count_if(s.begin(), s.end(), [](double v) { return v < 0.0; })) /
                       static_cast<double>(s.size());
    out.candidates.push_back(k);
    out.mean_silhouette.push_back(mean);
    out.negative_fraction.push_back(neg);
    const bool better = mean > best_mean || (mean == best_mean && neg < best_neg) ||
                        (mean == best_mean && neg == best_neg && k < out.k);
    if (out.k == 0 || better) {
      out.k = k;
      best_mean = mean;
      best_neg = neg;
    }
  }
  return out;
}

std::size_t quantize_vector(const Vector& v, const Codebook& codebook) {
  if (codebook.k() == 0) throw Error(ErrorCode::parameter, "empty codebook");
  if (v.size() != codebook.dimension())
    throw Error(ErrorCode::dimension, "vector has " + std::to_string(v.size()) + " components, codebook expects " +
                                          std::to_string(codebook.dimension()));
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < codebook.k(); ++c) {
    const double d = squared_distance(v, codebook.centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

std::string serialize_codebook(const Codebook& cb) {
  std::ostringstream out;
  out << "k " << cb.k() << "\ndimension " << cb.dimension() << "\nseed " << cb.seed << "\ninertia "
      << textio::format_double(cb.inertia) << '\n';
  for (const auto& c : cb.centroids) {
    out << 'c';
    for (double v : c) out << ' ' << textio::format_double(v);
    out << '\n';
  }
  return out.str();
}

namespace {

Codebook read_codebook(textio::Reader& in) {
  Codebook cb;
  const auto k = in.keyed_integer<std::size_t>("k");
  const auto dim = in.keyed_integer<std::size_t>("dimension");
  cb.seed = in.keyed_integer<std::uint64_t>("seed");
  cb.inertia = in.keyed_number("inertia");
  if (k < 1 || dim < 1) throw Error(ErrorCode::format, "codebook must have K >= 1 and dimension >= 1");
  cb.centroids.assign(k, Vector(dim));
  for (auto& c : cb.centroids) {
    in.expect("c");
    for (auto& v : c) v = in.number();
  }
  return cb;
}

}  // namespace

Codebook parse_codebook(const std::string& body) {
  textio::Reader in(body);
  return read_codebook(in);
}

// ---------------------------------------------------------------------------

const char* to_string(Discretization d) {
  return d == Discretization::per_attribute ? "per_attribute" : "per_vector";
}

Discretization parse_discretization(const std::string& text) {
  if (text == "per_attribute") return Discretization::per_attribute;
  if (text == "per_vector") return Discretization::per_vector;
  throw Error(ErrorCode::parameter, "unknown discretization '" + text + "'");
}

Discretizer Discretizer::fit(const Points& training, const DiscretizerOptions& options) {
  check_rectangular(training);
  Discretizer d;
  d.mode_ = options.mode;
  d.dim_ = training.front().size();

  if (options.mode == Discretization::per_attribute) {
    for (std::size_t j = 0; j < d.dim_; ++j) {
      Points column;
      column.reserve(training.size());
      for (const auto& row : training) column.push_back({row[j]});
      // Attributes with fewer distinct values than K get one cluster per value.
      const std::size_t k = std::min(options.k, count_distinct(column));
      const KMeansResult km = kmeans(
          column, {k, derive_seed(options.seed, {j}), options.max_iters, options.restarts});
      d.codebooks_.push_back(km.codebook);
    }
    return d;
  }

  // Constant columns keep unit scale instead of failing.
  column_stats(training, d.means_, d.scales_);
  for (auto& s : d.scales_)
    if (s <= 1e-12) s = 1.0;
  Points z = training;
  for (auto& row : z)
    for (std::size_t j = 0; j < d.dim_; ++j) row[j] = (row[j] - d.means_[j]) / d.scales_[j];
  if (options.pca_components > 0) {
    StandardizedMatrix sm{z, d.means_, d.scales_};
    const PcaModel pca = pca_fit(sm, options.pca_components);
    d.pca_components_ = pca.components;
    for (auto& row : z) row = pca.project(row);
  }
  const std::size_t k = std::min(options.k, count_distinct(z));
  d.codebooks_.push_back(kmeans(z, {k, options.seed, options.max_iters, options.restarts}).codebook);
  return d;
}

std::vector<int> Discretizer::transform(const Vector& v) const {
  if (v.size() != dim_)
    throw Error(ErrorCode::dimension, "discretizer expects " + std::to_string(dim_) + " components");
  if (mode_ == Discretization::per_attribute) {
    std::vector<int> labels(dim_);
    for (std::size_t j = 0; j < dim_; ++j)
      labels[j] = static_cast<int>(quantize_vector({v[j]}, codebooks_[j]));
    return labels;
  }
  Vector z(dim_);
  for (std::size_t j = 0; j < dim_; ++j) z[j] = (v[j] - means_[j]) / scales_[j];
  if (!pca_components_.empty()) {
    Vector s(pca_components_.size(), 0.0);
    for (std::size_t k = 0; k < s.size(); ++k)
      for (std::size_t j = 0; j < dim_; ++j) s[k] += pca_components_[k][j] * z[j];
    z = std::move(s);
  }
  return {static_cast<int>(quantize_vector(z, codebooks_.front()))};
}

std::vector<int> Discretizer::cardinalities() const {
  std::vector<int> out;
  for (const auto& cb : codebooks_) out.push_back(static_cast<int>(cb.k()));
  return out;
}

std::string Discretizer::serialize() const {
  std::ostringstream out;
  out << "mode " << to_string(mode_) << "\ninput_dimension " << dim_ << '\n';
  if (mode_ == Discretization::per_vector) {
    out << "means";
    for (double v : means_) out << ' ' << textio::format_double(v);
    out << "\nscales";
    for (double v : scales_) out << ' ' << textio::format_double(v);
    out << "\npca " << pca_components_.size() << '\n';
    for (const auto& c : pca_components_) {
      out << 'p';
      for (double v : c) out << ' ' << textio::format_double(v);
      out << '\n';
    }
  }
  out << "codebooks " << codebooks_.size() << '\n';
  for (const auto& cb : codebooks_) out << serialize_codebook(cb);
  return out.str();
}

Discretizer Discretizer::parse(const std::string& body) {
  textio::Reader in(body);
  Discretizer d;
  d.mode_ = parse_discretization(in.keyed_word("mode"));
  d.dim_ = in.keyed_integer<std::size_t>("input_dimension");
  if (d.mode_ == Discretization::per_vector) {
    in.expect("means");
    d.means_.resize(d.dim_);
    for (auto& v : d.means_) v = in.number();
    in.expect("scales");
    d.scales_.resize(d.dim_);
    for (auto& v : d.scales_) v = in.number();
    const auto q = in.keyed_integer<std::size_t>("pca");
    d.pca_components_.assign(q, Vector(d.dim_));
    for (auto& c : d.pca_components_) {
      in.expect("p");
      for (auto& v : c) v = in.number();
    }
  }
  const auto n = in.keyed_integer<std::size_t>("codebooks");
  for (std::size_t i = 0; i < n; ++i) d.codebooks_.push_back(read_codebook(in));
  const std::size_t expected_dim =
      d.mode_ == Discretization::per_attribute ? 1 : (d.pca_components_.empty() ? d.dim_ : d.pca_components_.size());
  const std::size_t expected_books = d.mode_ == Discretization::per_attribute ? d.dim_ : 1;
  if (d.codebooks_.size() != expected_books) throw Error(ErrorCode::format, "wrong number of codebooks");
  for (const auto& cb : d.codebooks_)
    if (cb.dimension() != expected_dim) throw Error(ErrorCode::format, "codebook dimension mismatch");
  return d;
}

}  // namespace hwr
