#include "hwr/staticbn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "hwr/error.hpp"
#include "hwr/random.hpp"
#include "hwr/textio.hpp"

namespace hwr {

void DiscreteDataset::validate() const {
  if (num_classes < 1) throw Error(ErrorCode::parameter, "dataset needs at least one class");
  for (int c : cardinalities)
    if (c < 1) throw Error(ErrorCode::parameter, "attribute cardinality must be >= 1");
  for (const auto& s : samples) {
    if (s.class_id < 0 || s.class_id >= num_classes)
      throw Error(ErrorCode::label_range, "class id " + std::to_string(s.class_id) + " out of range");
    if (s.attributes.size() != cardinalities.size())
      throw Error(ErrorCode::dimension, "sample has the wrong number of attributes");
    for (std::size_t i = 0; i < s.attributes.size(); ++i)
      if (s.attributes[i] < 0 || s.attributes[i] >= cardinalities[i])
        throw Error(ErrorCode::label_range, "attribute " + std::to_string(i) + " label " +
                                                std::to_string(s.attributes[i]) + " out of range");
  }
}

const char* to_string(StructureKind kind) {
  switch (kind) {
    case StructureKind::none: return "none";
    case StructureKind::tree: return "tree";
    case StructureKind::forest: return "forest";
  }
  return "none";
}

namespace {

StructureKind parse_kind(const std::string& s) {
  if (s == "none") return StructureKind::none;
  if (s == "tree") return StructureKind::tree;
  if (s == "forest") return StructureKind::forest;
  throw Error(ErrorCode::format, "unknown structure kind '" + s + "'");
}

}  // namespace

std::vector<std::pair<int, int>> AugmentingStructure::edges() const {
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < parent.size(); ++i)
    if (parent[i] >= 0) out.emplace_back(parent[i], static_cast<int>(i));
  return out;
}

std::vector<std::pair<int, int>> AugmentingStructure::undirected_edges() const {
  std::vector<std::pair<int, int>> out;
  for (auto [p, c] : edges()) out.emplace_back(std::min(p, c), std::max(p, c));
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> laplace_cpt(const std::vector<double>& counts, int cardinality) {
  if (cardinality < 1) throw Error(ErrorCode::parameter, "cardinality must be >= 1");
  if (counts.size() != static_cast<std::size_t>(cardinality))
    throw Error(ErrorCode::dimension, "one count per value expected");
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  std::vector<double> row(counts.size());
  for (std::size_t v = 0; v < counts.size(); ++v) row[v] = (counts[v] + 1.0) / (total + cardinality);
  return row;
}

namespace {

double plogp_ratio(double joint, double num, double den) {
  // joint * log(joint * num / den); callers guarantee den > 0 when joint > 0.
  return joint > 0.0 ? joint * std::log(joint * num / den) : 0.0;
}

}  // namespace

double mutual_information(const DiscreteDataset& data, int attribute) {
  if (data.samples.empty()) throw Error(ErrorCode::parameter, "mutual information needs at least one sample");
  const int card = data.cardinalities.at(static_cast<std::size_t>(attribute));
  const int nc = data.num_classes;
  std::vector<double> joint(static_cast<std::size_t>(card * nc), 0.0), pa(static_cast<std::size_t>(card), 0.0),
      pc(static_cast<std::size_t>(nc), 0.0);
  for (const auto& s : data.samples) {
    const int a = s.attributes[static_cast<std::size_t>(attribute)];
    joint[static_cast<std::size_t>(a * nc + s.class_id)] += 1.0;
    pa[static_cast<std::size_t>(a)] += 1.0;
    pc[static_cast<std::size_t>(s.class_id)] += 1.0;
  }
  const double n = static_cast<double>(data.samples.size());
  double mi = 0.0;
  for (int a = 0; a < card; ++a)
    for (int c = 0; c < nc; ++c)
      mi += plogp_ratio(joint[static_cast<std::size_t>(a * nc + c)] / n, 1.0,
                        (pa[static_cast<std::size_t>(a)] / n) * (pc[static_cast<std::size_t>(c)] / n));
  return std::max(0.0, mi);
}

double conditional_mutual_information(const DiscreteDataset& data, int i, int j) {
  if (data.samples.empty()) throw Error(ErrorCode::parameter, "mutual information needs at least one sample");
  const auto ci = static_cast<std::size_t>(data.cardinalities.at(static_cast<std::size_t>(i)));
  const auto cj = static_cast<std::size_t>(data.cardinalities.at(static_cast<std::size_t>(j)));
  const auto nc = static_cast<std::size_t>(data.num_classes);
  std::vector<double> nijc(ci * cj * nc, 0.0), nic(ci * nc, 0.0), njc(cj * nc, 0.0), nclass(nc, 0.0);
  for (const auto& s : data.samples) {
    const auto a = static_cast<std::size_t>(s.attributes[static_cast<std::size_t>(i)]);
    const auto b = static_cast<std::size_t>(s.attributes[static_cast<std::size_t>(j)]);
    const auto c = static_cast<std::size_t>(s.class_id);
    nijc[(a * cj + b) * nc + c] += 1.0;
    nic[a * nc + c] += 1.0;
    njc[b * nc + c] += 1.0;
    nclass[c] += 1.0;
  }
  // I = sum p(a,b,c) log [ n(a,b,c) n(c) / (n(a,c) n(b,c)) ]
  const double n = static_cast<double>(data.samples.size());
  double cmi = 0.0;
  for (std::size_t a = 0; a < ci; ++a)
    for (std::size_t b = 0; b < cj; ++b)
      for (std::size_t c = 0; c < nc; ++c) {
        const double k = nijc[(a * cj + b) * nc + c];
        if (k > 0.0) cmi += k / n * std::log(k * nclass[c] / (nic[a * nc + c] * njc[b * nc + c]));
      }
  return std::max(0.0, cmi);
}

std::vector<std::vector<double>> cmi_matrix(const DiscreteDataset& data) {
  const auto m = data.num_attributes();
  std::vector<std::vector<double>> w(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      w[i][j] = w[j][i] = conditional_mutual_information(data, static_cast<int>(i), static_cast<int>(j));
  return w;
}

std::vector<std::pair<int, int>> maximum_spanning_tree(const std::vector<std::vector<double>>& weights) {
  const int m = static_cast<int>(weights.size());
  struct Edge {
    double w;
    int i, j;
  };
  std::vector<Edge> edges;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) edges.push_back({weights[i][j], i, j});
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.w > b.w; });

  std::vector<int> group(static_cast<std::size_t>(m));
  std::iota(group.begin(), group.end(), 0);
  auto find = [&group](int x) {
    while (group[x] != x) x = group[x] = group[group[x]];
    return x;
  };

  std::vector<std::pair<int, int>> tree;
  for (const auto& e : edges) {
    const int a = find(e.i), b = find(e.j);
    if (a == b) continue;
    group[a] = b;
    tree.emplace_back(e.i, e.j);
    if (static_cast<int>(tree.size()) == m - 1) break;
  }
  std::sort(tree.begin(), tree.end());
  return tree;
}

double average_cmi(const std::vector<std::vector<double>>& cmi) {
  const auto m = cmi.size();
  if (m < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j) sum += cmi[i][j];
  return sum / static_cast<double>(m * (m - 1));
}

namespace {

// Orients undirected edges away from the given heads; each head claims its
// connected component. Heads are visited in order.
AugmentingStructure orient(int m, const std::vector<std::pair<int, int>>& undirected,
                           const std::vector<int>& head_order, StructureKind kind) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(m));
  for (auto [a, b] : undirected) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& n : adj) std::sort(n.begin(), n.end());

  AugmentingStructure s;
  s.kind = kind;
  s.parent.assign(static_cast<std::size_t>(m), -1);
  std::vector<bool> seen(static_cast<std::size_t>(m), false);
  for (int head : head_order) {
    if (seen[static_cast<std::size_t>(head)]) continue;
    seen[static_cast<std::size_t>(head)] = true;
    if (!adj[static_cast<std::size_t>(head)].empty()) s.roots.push_back(head);
    std::queue<int> q;
    q.push(head);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[static_cast<std::size_t>(u)]) {
        if (seen[static_cast<std::size_t>(v)]) continue;
        seen[static_cast<std::size_t>(v)] = true;
        s.parent[static_cast<std::size_t>(v)] = u;
        q.push(v);
      }
    }
  }
  return s;
}

void require_coverage(const DiscreteDataset& data) {
  std::vector<bool> present(static_cast<std::size_t>(data.num_classes), false);
  for (const auto& s : data.samples) present[static_cast<std::size_t>(s.class_id)] = true;
  for (int c = 0; c < data.num_classes; ++c)
    if (!present[static_cast<std::size_t>(c)])
      throw Error(ErrorCode::coverage, "class " + std::to_string(c) + " has no training samples");
}

}  // namespace

// ---------------------------------------------------------------------------

int DiscreteBnClassifier::parent_cardinality(int attribute) const {
  const int p = structure_.parent[static_cast<std::size_t>(attribute)];
  return p < 0 ? 1 : cardinalities_[static_cast<std::size_t>(p)];
}

double DiscreteBnClassifier::cpt(int attribute, int class_id, int parent_value, int value) const {
  const auto i = static_cast<std::size_t>(attribute);
  const int pc = parent_cardinality(attribute);
  const int pv = structure_.parent[i] < 0 ? 0 : parent_value;
  return cpts_[i][static_cast<std::size_t>((class_id * pc + pv) * cardinalities_[i] + value)];
}

std::vector<double> DiscreteBnClassifier::log_scores(const std::vector<int>& attributes) const {
  if (attributes.size() != cardinalities_.size())
    throw Error(ErrorCode::dimension, "expected " + std::to_string(cardinalities_.size()) + " attributes");
  for (std::size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i] < 0 || attributes[i] >= cardinalities_[i])
      throw Error(ErrorCode::label_range, "attribute " + std::to_string(i) + " label " +
                                              std::to_string(attributes[i]) + " out of range");
  std::vector<double> scores(static_cast<std::size_t>(num_classes_));
  for (int c = 0; c < num_classes_; ++c) {
    double s = std::log(prior_[static_cast<std::size_t>(c)]);
    for (std::size_t i = 0; i < attributes.size(); ++i) {
      const int p = structure_.parent[i];
      s += std::log(cpt(static_cast<int>(i), c, p < 0 ? 0 : attributes[static_cast<std::size_t>(p)], attributes[i]));
    }
    scores[static_cast<std::size_t>(c)] = s;
  }
  return scores;
}

DiscreteBnClassifier fit_parameters(const DiscreteDataset& data, AugmentingStructure structure) {
  data.validate();
  require_coverage(data);
  const auto m = data.num_attributes();
  if (structure.parent.empty()) structure.parent.assign(m, -1);
  if (structure.parent.size() != m) throw Error(ErrorCode::structure, "structure does not match attribute count");

  DiscreteBnClassifier model;
  model.num_classes_ = data.num_classes;
  model.cardinalities_ = data.cardinalities;
  model.structure_ = std::move(structure);

  std::vector<double> class_counts(static_cast<std::size_t>(data.num_classes), 0.0);
  for (const auto& s : data.samples) class_counts[static_cast<std::size_t>(s.class_id)] += 1.0;
  model.prior_ = laplace_cpt(class_counts, data.num_classes);

  model.cpts_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const int card = data.cardinalities[i];
    const int p = model.structure_.parent[i];
    const int pc = model.parent_cardinality(static_cast<int>(i));
    std::vector<double> counts(static_cast<std::size_t>(data.num_classes * pc * card), 0.0);
    for (const auto& s : data.samples) {
      const int pv = p < 0 ? 0 : s.attributes[static_cast<std::size_t>(p)];
      counts[static_cast<std::size_t>((s.class_id * pc + pv) * card + s.attributes[i])] += 1.0;
    }
    auto& table = model.cpts_[i];
    table.resize(counts.size());
    for (std::size_t row = 0; row < counts.size(); row += static_cast<std::size_t>(card)) {
      const std::vector<double> slice(counts.begin() + static_cast<std::ptrdiff_t>(row),
                                      counts.begin() + static_cast<std::ptrdiff_t>(row) + card);
      const auto probs = laplace_cpt(slice, card);
      std::copy(probs.begin(), probs.end(), table.begin() + static_cast<std::ptrdiff_t>(row));
    }
  }
  return model;
}

DiscreteBnClassifier build_nb(const DiscreteDataset& data) {
  AugmentingStructure s;
  s.kind = StructureKind::none;
  s.parent.assign(data.num_attributes(), -1);
  return fit_parameters(data, std::move(s));
}

DiscreteBnClassifier build_tan(const DiscreteDataset& data, const TanOptions& options) {
  const int m = static_cast<int>(data.num_attributes());
  if (m < 2) throw Error(ErrorCode::structure, "TAN needs at least 2 attributes");
  data.validate();
  int root = 0;
  if (options.root) {
    root = *options.root;
    if (root < 0 || root >= m) throw Error(ErrorCode::parameter, "TAN root out of range");
  } else {
    Rng rng(derive_seed(options.seed, {0x74616eULL}));
    root = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(m)));
  }
  const auto tree = maximum_spanning_tree(cmi_matrix(data));
  return fit_parameters(data, orient(m, tree, {root}, StructureKind::tree));
}

const char* to_string(FanPruning pruning) { return pruning == FanPruning::bic ? "bic" : "average"; }

FanPruning parse_fan_pruning(const std::string& text) {
  if (text == "bic") return FanPruning::bic;
  if (text == "average") return FanPruning::average;
  throw Error(ErrorCode::parameter, "unknown FAN pruning '" + text + "' (expected bic or average)");
}

DiscreteBnClassifier build_fan(const DiscreteDataset& data, const FanOptions& options) {
  const int m = static_cast<int>(data.num_attributes());
  if (m < 2) throw Error(ErrorCode::structure, "FAN needs at least 2 attributes");
  data.validate();

  const auto cmi = cmi_matrix(data);
  const double threshold = average_cmi(cmi);
  const double n = static_cast<double>(data.samples.size());

  std::vector<std::pair<int, int>> kept;
  for (auto [i, j] : maximum_spanning_tree(cmi)) {
    const double w = cmi[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    if (w < threshold) continue;
    if (options.pruning == FanPruning::bic) {
      const double dof = (data.cardinalities[static_cast<std::size_t>(i)] - 1.0) *
                         (data.cardinalities[static_cast<std::size_t>(j)] - 1.0) * data.num_classes;
      if (dof <= 0.0 || n * w <= 0.5 * dof * std::log(n)) continue;
    }
    kept.emplace_back(i, j);
  }

  int root = 0;
  double best = -1.0;
  for (int i = 0; i < m; ++i) {
    const double mi = mutual_information(data, i);
    if (mi > best) {
      best = mi;
      root = i;
    }
  }
  // Root first, then every other component from its lowest-index vertex.
  std::vector<int> heads{root};
  for (int i = 0; i < m; ++i)
    if (i != root) heads.push_back(i);
  return fit_parameters(data, orient(m, kept, heads, StructureKind::forest));
}

// ---------------------------------------------------------------------------

std::vector<double> block_posterior(const DiscreteBnClassifier& model, const std::vector<int>& attributes) {
  std::vector<double> s = model.log_scores(attributes);
  const double top = *std::max_element(s.begin(), s.end());
  double z = 0.0;
  for (auto& v : s) {
    v = std::exp(v - top);
    z += v;
  }
  for (auto& v : s) v /= z;
  return s;
}

std::vector<double> image_posterior(const std::vector<std::vector<double>>& block_posteriors) {
  if (block_posteriors.empty()) throw Error(ErrorCode::parameter, "no block posteriors");
  const std::size_t c = block_posteriors.front().size();
  std::vector<double> out(c, 0.0);
  for (const auto& p : block_posteriors) {
    if (p.size() != c) throw Error(ErrorCode::mismatch, "block posteriors cover different class sets");
    for (std::size_t k = 0; k < c; ++k) out[k] += p[k];
  }
  for (auto& v : out) v /= static_cast<double>(block_posteriors.size());
  return out;
}

std::size_t decide(const std::vector<double>& distribution) {
  if (distribution.empty()) throw Error(ErrorCode::parameter, "empty distribution");
  std::size_t best = 0;
  for (std::size_t k = 1; k < distribution.size(); ++k)
    if (distribution[k] > distribution[best]) best = k;
  return best;
}

// ---------------------------------------------------------------------------

std::string DiscreteBnClassifier::serialize() const {
  std::ostringstream out;
  out << "classes " << num_classes_ << "\nattributes " << cardinalities_.size() << "\nkind "
      << to_string(structure_.kind) << "\ncardinalities";
  for (int c : cardinalities_) out << ' ' << c;
  out << "\nparents";
  for (int p : structure_.parent) out << ' ' << p;
  out << "\nroots " << structure_.roots.size();
  for (int r : structure_.roots) out << ' ' << r;
  out << "\nprior";
  for (double p : prior_) out << ' ' << textio::format_double(p);
  out << '\n';
  for (std::size_t i = 0; i < cpts_.size(); ++i) {
    out << "cpt " << i << ' ' << cpts_[i].size();
    for (double p : cpts_[i]) out << ' ' << textio::format_double(p);
    out << '\n';
  }
  return out.str();
}

DiscreteBnClassifier DiscreteBnClassifier::parse(const std::string& body) {
  textio::Reader in(body);
  DiscreteBnClassifier model;
  model.num_classes_ = in.keyed_integer<int>("classes");
  const auto m = in.keyed_integer<std::size_t>("attributes");
  if (model.num_classes_ < 1) throw Error(ErrorCode::format, "classifier needs at least one class");
  model.structure_.kind = parse_kind(in.keyed_word("kind"));
  in.expect("cardinalities");
  model.cardinalities_.resize(m);
  for (auto& c : model.cardinalities_) {
    c = static_cast<int>(in.integer());
    if (c < 1) throw Error(ErrorCode::format, "bad cardinality");
  }
  in.expect("parents");
  model.structure_.parent.resize(m);
  for (auto& p : model.structure_.parent) {
    p = static_cast<int>(in.integer());
    if (p < -1 || p >= static_cast<int>(m)) throw Error(ErrorCode::format, "bad parent index");
  }
  model.structure_.roots.resize(in.keyed_integer<std::size_t>("roots"));
  for (auto& r : model.structure_.roots) r = static_cast<int>(in.integer());
  in.expect("prior");
  model.prior_.resize(static_cast<std::size_t>(model.num_classes_));
  for (auto& p : model.prior_) p = in.number();
  model.cpts_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    in.expect("cpt");
    if (in.integer() != static_cast<long long>(i)) throw Error(ErrorCode::format, "CPT out of order");
    const auto size = in.integer();
    const long long expected = static_cast<long long>(model.num_classes_) *
                               model.parent_cardinality(static_cast<int>(i)) * model.cardinalities_[i];
    if (size != expected) throw Error(ErrorCode::format, "CPT " + std::to_string(i) + " has the wrong size");
    model.cpts_[i].resize(static_cast<std::size_t>(size));
    for (auto& p : model.cpts_[i]) p = in.number();
  }
  return model;
}

}  // namespace hwr
