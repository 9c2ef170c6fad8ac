#include "hwr/dbn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "hwr/error.hpp"
#include "hwr/textio.hpp"

namespace hwr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_rows(const std::vector<double>& table, std::size_t row, double tolerance, const char* what) {
  for (std::size_t r = 0; r < table.size(); r += row) {
    double s = 0.0;
    for (std::size_t k = 0; k < row; ++k) {
      if (!(table[r + k] >= 0.0)) throw Error(ErrorCode::parameter, std::string(what) + " has a negative entry");
      s += table[r + k];
    }
    if (std::abs(s - 1.0) > tolerance)
      throw Error(ErrorCode::parameter, std::string(what) + " row does not sum to 1");
  }
}

void random_rows(std::vector<double>& table, std::size_t size, std::size_t row, Rng& rng) {
  table.resize(size);
  for (std::size_t r = 0; r < size; r += row) {
    double s = 0.0;
    for (std::size_t k = 0; k < row; ++k) s += table[r + k] = 1e-3 + uniform01(rng);
    for (std::size_t k = 0; k < row; ++k) table[r + k] /= s;
  }
}

void check_symbols(const CoupledHmm& m, const ObservationPair& obs) {
  if (obs.y1.size() != obs.y2.size()) throw Error(ErrorCode::dimension, "observation streams differ in length");
  if (obs.y1.empty()) throw Error(ErrorCode::dimension, "empty observation sequence");
  for (int l = 0; l < 2; ++l)
    for (int y : l == 0 ? obs.y1 : obs.y2)
      if (y < 0 || y >= m.symbols[l])
        throw Error(ErrorCode::label_range, "symbol " + std::to_string(y) + " out of range for chain " +
                                                std::to_string(l + 1));
}

struct Counts {
  std::array<std::vector<double>, 2> pi, trans, emit;

  explicit Counts(const CoupledHmm& m) {
    for (int l = 0; l < 2; ++l) {
      pi[l].assign(m.pi[l].size(), 0.0);
      trans[l].assign(m.trans[l].size(), 0.0);
      emit[l].assign(m.emit[l].size(), 0.0);
    }
  }
};

// Scaled forward-backward on the joint chain z = i*Q2 + j. Fills `result`
// and/or accumulates expected counts when given; returns log P(obs).
double forward_backward(const CoupledHmm& m, const ObservationPair& obs, InferenceResult* result, Counts* counts) {
  check_symbols(m, obs);
  const int q1 = m.states[0], q2 = m.states[1];
  const auto s = static_cast<std::size_t>(q1 * q2);
  const std::size_t t_len = obs.length();

  std::vector<double> e(t_len * s);
  for (std::size_t t = 0; t < t_len; ++t)
    for (int i = 0; i < q1; ++i)
      for (int j = 0; j < q2; ++j)
        e[t * s + static_cast<std::size_t>(i * q2 + j)] = m.b(0, i, obs.y1[t]) * m.b(1, j, obs.y2[t]);

  std::vector<double> alpha(t_len * s), scale(t_len);
  for (int i = 0; i < q1; ++i)
    for (int j = 0; j < q2; ++j) {
      const auto z = static_cast<std::size_t>(i * q2 + j);
      alpha[z] = m.pi[0][static_cast<std::size_t>(i)] * m.pi[1][static_cast<std::size_t>(j)] * e[z];
    }

  double loglik = 0.0;
  std::vector<double> pred(s);
  for (std::size_t t = 0;; ++t) {
    double* a = &alpha[t * s];
    double c = 0.0;
    for (std::size_t z = 0; z < s; ++z) c += a[z];
    if (!(c > 0.0)) return kNegInf;
    for (std::size_t z = 0; z < s; ++z) a[z] /= c;
    scale[t] = c;
    loglik += std::log(c);
    if (t + 1 == t_len) break;

    std::fill(pred.begin(), pred.end(), 0.0);
    for (std::size_t z = 0; z < s; ++z) {
      if (a[z] == 0.0) continue;
      const double* a1 = &m.trans[0][z * static_cast<std::size_t>(q1)];
      const double* a2 = &m.trans[1][z * static_cast<std::size_t>(q2)];
      for (int k1 = 0; k1 < q1; ++k1) {
        const double w = a[z] * a1[k1];
        double* p = &pred[static_cast<std::size_t>(k1 * q2)];
        for (int k2 = 0; k2 < q2; ++k2) p[k2] += w * a2[k2];
      }
    }
    double* next = &alpha[(t + 1) * s];
    for (std::size_t z = 0; z < s; ++z) next[z] = pred[z] * e[(t + 1) * s + z];
  }

  if (!result && !counts) return loglik;

  std::vector<double> beta(t_len * s, 1.0);
  for (std::size_t t = t_len - 1; t > 0; --t) {
    // w(z') = e_t(z') beta_t(z') / c_t
    for (std::size_t z = 0; z < s; ++z) pred[z] = e[t * s + z] * beta[t * s + z] / scale[t];
    for (std::size_t z = 0; z < s; ++z) {
      const double* a1 = &m.trans[0][z * static_cast<std::size_t>(q1)];
      const double* a2 = &m.trans[1][z * static_cast<std::size_t>(q2)];
      double acc = 0.0;
      for (int k1 = 0; k1 < q1; ++k1) {
        const double* w = &pred[static_cast<std::size_t>(k1 * q2)];
        double inner = 0.0;
        for (int k2 = 0; k2 < q2; ++k2) inner += a2[k2] * w[k2];
        acc += a1[k1] * inner;
      }
      beta[(t - 1) * s + z] = acc;
    }
  }

  if (result) {
    result->log_likelihood = loglik;
    result->joint.assign(t_len, std::vector<double>(s));
    for (int l = 0; l < 2; ++l)
      result->pair[l].assign(t_len - 1, std::vector<double>(s * static_cast<std::size_t>(m.states[l]), 0.0));
  }

  for (std::size_t t = 0; t < t_len; ++t) {
    for (int i = 0; i < q1; ++i)
      for (int j = 0; j < q2; ++j) {
        const auto z = static_cast<std::size_t>(i * q2 + j);
        const double g = alpha[t * s + z] * beta[t * s + z];
        if (result) result->joint[t][z] = g;
        if (counts) {
          if (t == 0) {
            counts->pi[0][static_cast<std::size_t>(i)] += g;
            counts->pi[1][static_cast<std::size_t>(j)] += g;
          }
          counts->emit[0][static_cast<std::size_t>(i * m.symbols[0] + obs.y1[t])] += g;
          counts->emit[1][static_cast<std::size_t>(j * m.symbols[1] + obs.y2[t])] += g;
        }
      }
    if (t == 0) continue;

    // xi(z, z') = alpha_{t-1}(z) T(z, z') e_t(z') beta_t(z') / c_t
    for (std::size_t z = 0; z < s; ++z) pred[z] = e[t * s + z] * beta[t * s + z] / scale[t];
    for (std::size_t z = 0; z < s; ++z) {
      const double ap = alpha[(t - 1) * s + z];
      if (ap == 0.0) continue;
      const double* a1 = &m.trans[0][z * static_cast<std::size_t>(q1)];
      const double* a2 = &m.trans[1][z * static_cast<std::size_t>(q2)];
      for (int k1 = 0; k1 < q1; ++k1)
        for (int k2 = 0; k2 < q2; ++k2) {
          const double xi = ap * a1[k1] * a2[k2] * pred[static_cast<std::size_t>(k1 * q2 + k2)];
          const std::size_t c1 = z * static_cast<std::size_t>(q1) + static_cast<std::size_t>(k1);
          const std::size_t c2 = z * static_cast<std::size_t>(q2) + static_cast<std::size_t>(k2);
          if (result) {
            result->pair[0][t - 1][c1] += xi;
            result->pair[1][t - 1][c2] += xi;
          }
          if (counts) {
            counts->trans[0][c1] += xi;
            counts->trans[1][c2] += xi;
          }
        }
    }
  }
  return loglik;
}

// counts + floor, renormalized per row; empty rows keep `fallback`.
void renormalize(std::vector<double>& counts, const std::vector<double>& fallback, std::size_t row, double floor) {
  for (std::size_t r = 0; r < counts.size(); r += row) {
    double s = 0.0;
    for (std::size_t k = 0; k < row; ++k) s += counts[r + k] += floor;
    if (s > 0.0) {
      for (std::size_t k = 0; k < row; ++k) counts[r + k] /= s;
    } else {
      std::copy_n(fallback.begin() + static_cast<std::ptrdiff_t>(r), row, counts.begin() + static_cast<std::ptrdiff_t>(r));
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

void CoupledHmm::validate(double tolerance) const {
  for (int l = 0; l < 2; ++l) {
    if (states[l] < 1 || symbols[l] < 1) throw Error(ErrorCode::parameter, "state and symbol counts must be >= 1");
    const auto q = static_cast<std::size_t>(states[l]);
    if (pi[l].size() != q || trans[l].size() != static_cast<std::size_t>(joint_states()) * q ||
        emit[l].size() != q * static_cast<std::size_t>(symbols[l]))
      throw Error(ErrorCode::parameter, "coupled HMM table has the wrong size");
    check_rows(pi[l], q, tolerance, "initial distribution");
    check_rows(trans[l], q, tolerance, "transition table");
    check_rows(emit[l], static_cast<std::size_t>(symbols[l]), tolerance,
                   "emission table");
  }
}

CoupledHmm CoupledHmm::random(std::array<int, 2> states, std::array<int, 2> symbols, Rng& rng) {
  CoupledHmm m;
  m.states = states;
  m.symbols = symbols;
  for (int l = 0; l < 2; ++l) {
    if (states[l] < 1 || symbols[l] < 1) throw Error(ErrorCode::parameter, "state and symbol counts must be >= 1");
    const auto q = static_cast<std::size_t>(states[l]);
    random_rows(m.pi[l], q, q, rng);
    random_rows(m.trans[l], static_cast<std::size_t>(m.joint_states()) * q, q, rng);
    random_rows(m.emit[l], q * static_cast<std::size_t>(symbols[l]), static_cast<std::size_t>(symbols[l]), rng);
  }
  return m;
}

std::string CoupledHmm::serialize() const {
  std::ostringstream out;
  out << "states " << states[0] << ' ' << states[1] << "\nsymbols " << symbols[0] << ' ' << symbols[1] << '\n';
  auto table = [&out](const char* name, int l, const std::vector<double>& v) {
    out << name << ' ' << l + 1 << ' ' << v.size();
    for (double x : v) out << ' ' << textio::format_double(x);
    out << '\n';
  };
  for (int l = 0; l < 2; ++l) {
    table("pi", l, pi[l]);
    table("trans", l, trans[l]);
    table("emit", l, emit[l]);
  }
  return out.str();
}

CoupledHmm CoupledHmm::parse(const std::string& body) {
  textio::Reader in(body);
  CoupledHmm m;
  in.expect("states");
  m.states = {static_cast<int>(in.integer()), static_cast<int>(in.integer())};
  in.expect("symbols");
  m.symbols = {static_cast<int>(in.integer()), static_cast<int>(in.integer())};
  auto table = [&in](const char* name, int l, std::vector<double>& v) {
    in.expect(name);
    if (in.integer() != l + 1) throw Error(ErrorCode::format, std::string(name) + " table out of order");
    const auto n = in.integer();
    if (n < 1 || n > (1LL << 26)) throw Error(ErrorCode::format, "bad table size");
    v.resize(static_cast<std::size_t>(n));
    for (auto& x : v) x = in.number();
  };
  for (int l = 0; l < 2; ++l) {
    table("pi", l, m.pi[l]);
    table("trans", l, m.trans[l]);
    table("emit", l, m.emit[l]);
  }
  try {
    m.validate(1e-6);
  } catch (const Error& e) {
    throw Error(ErrorCode::format, e.detail());
  }
  return m;
}

ObservationPair make_observation_pair(std::vector<int> horizontal, std::vector<int> vertical) {
  if (horizontal.empty() || vertical.empty()) throw Error(ErrorCode::dimension, "empty observation stream");
  const std::size_t t = std::max(horizontal.size(), vertical.size());
  horizontal.resize(t, horizontal.back());
  vertical.resize(t, vertical.back());
  return {std::move(horizontal), std::move(vertical)};
}

// ---------------------------------------------------------------------------

InferenceResult joint_inference(const CoupledHmm& model, const ObservationPair& obs) {
  InferenceResult r;
  const double ll = forward_backward(model, obs, &r, nullptr);
  r.log_likelihood = ll;
  return r;
}

double log_likelihood(const CoupledHmm& model, const ObservationPair& obs) {
  return forward_backward(model, obs, nullptr, nullptr);
}

EmStepResult em_step(const CoupledHmm& model, const std::vector<ObservationPair>& data, double floor) {
  if (data.empty()) throw Error(ErrorCode::parameter, "EM needs at least one sequence");
  if (floor < 0.0) throw Error(ErrorCode::parameter, "count floor must be non-negative");
  Counts counts(model);
  double total = 0.0;
  for (const auto& obs : data) {
    Counts local(model);
    const double ll = forward_backward(model, obs, nullptr, &local);
    total += ll;
    if (!std::isfinite(ll)) continue;  // impossible under the model; contributes no counts
    for (int l = 0; l < 2; ++l) {
      for (std::size_t k = 0; k < local.pi[l].size(); ++k) counts.pi[l][k] += local.pi[l][k];
      for (std::size_t k = 0; k < local.trans[l].size(); ++k) counts.trans[l][k] += local.trans[l][k];
      for (std::size_t k = 0; k < local.emit[l].size(); ++k) counts.emit[l][k] += local.emit[l][k];
    }
  }

  EmStepResult out;
  out.log_likelihood = total;
  out.model = model;
  for (int l = 0; l < 2; ++l) {
    const auto q = static_cast<std::size_t>(model.states[l]);
    renormalize(counts.pi[l], model.pi[l], q, floor);
    renormalize(counts.trans[l], model.trans[l], q, floor);
    renormalize(counts.emit[l], model.emit[l], static_cast<std::size_t>(model.symbols[l]), floor);
    out.model.pi[l] = std::move(counts.pi[l]);
    out.model.trans[l] = std::move(counts.trans[l]);
    out.model.emit[l] = std::move(counts.emit[l]);
  }
  return out;
}

namespace {

double total_log_likelihood(const CoupledHmm& model, const std::vector<ObservationPair>& data) {
  double s = 0.0;
  for (const auto& obs : data) s += log_likelihood(model, obs);
  return s;
}

}  // namespace

TrainResult train_class_model(const std::vector<ObservationPair>& data, std::array<int, 2> symbols,
                              const TrainOptions& options) {
  if (data.empty()) throw Error(ErrorCode::parameter, "no training sequences");
  if (options.max_iters < 1 || options.restarts < 1)
    throw Error(ErrorCode::parameter, "max_iters and restarts must be >= 1");
  if (!(options.tol >= 0.0)) throw Error(ErrorCode::parameter, "tolerance must be non-negative");

  TrainResult best;
  bool have = false;
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng(derive_seed(options.seed, {0x656dULL, static_cast<std::uint64_t>(r)}));
    CoupledHmm model = CoupledHmm::random(options.states, symbols, rng);
    std::vector<double> history;
    double prev = kNegInf;
    int iters = 0;
    for (int it = 0; it < options.max_iters; ++it) {
      EmStepResult step = em_step(model, data, options.floor);
      model = std::move(step.model);
      history.push_back(step.log_likelihood);
      ++iters;
      const double change = std::isfinite(prev) && prev != 0.0
                                ? std::abs(step.log_likelihood - prev) / std::abs(prev)
                                : std::numeric_limits<double>::infinity();
      if (std::isinf(options.tol) || change < options.tol) break;
      prev = step.log_likelihood;
    }
    const double final_ll = total_log_likelihood(model, data);
    if (!have || final_ll > best.log_likelihood) {
      best.model = std::move(model);
      best.log_likelihood = final_ll;
      best.iterations = iters;
      best.history = std::move(history);
      have = true;
    }
  }
  return best;
}

ObservationPair sample_sequence(const CoupledHmm& model, std::size_t length, Rng& rng) {
  auto draw = [&rng](const double* row, int n) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      acc += row[k];
      if (u < acc) return k;
    }
    for (int k = n - 1; k > 0; --k)
      if (row[k] > 0.0) return k;
    return 0;
  };
  ObservationPair obs;
  int x1 = draw(model.pi[0].data(), model.states[0]);
  int x2 = draw(model.pi[1].data(), model.states[1]);
  for (std::size_t t = 0; t < length; ++t) {
    if (t > 0) {
      const auto z = static_cast<std::size_t>(x1 * model.states[1] + x2);
      const int n1 = draw(&model.trans[0][z * static_cast<std::size_t>(model.states[0])], model.states[0]);
      const int n2 = draw(&model.trans[1][z * static_cast<std::size_t>(model.states[1])], model.states[1]);
      x1 = n1;
      x2 = n2;
    }
    obs.y1.push_back(draw(&model.emit[0][static_cast<std::size_t>(x1 * model.symbols[0])], model.symbols[0]));
    obs.y2.push_back(draw(&model.emit[1][static_cast<std::size_t>(x2 * model.symbols[1])], model.symbols[1]));
  }
  return obs;
}

// ---------------------------------------------------------------------------

std::vector<int> ClassModelBank::states_per_class() const {
  std::vector<int> q;
  for (const auto& m : models) q.push_back(m.states[0]);
  return q;
}

Classification classify(const ClassModelBank& bank, const ObservationPair& obs) {
  if (bank.models.empty()) throw Error(ErrorCode::parameter, "empty model bank");
  Classification out;
  for (const auto& m : bank.models) out.log_likelihoods.push_back(log_likelihood(m, obs));
  for (std::size_t c = 1; c < out.log_likelihoods.size(); ++c)
    if (out.log_likelihoods[c] > out.log_likelihoods[out.class_id]) out.class_id = c;
  return out;
}

ClassModelBank train_bank(const std::vector<std::vector<ObservationPair>>& train, const std::vector<int>& q_per_class,
                          std::array<int, 2> symbols, const TrainOptions& base) {
  if (train.size() != q_per_class.size()) throw Error(ErrorCode::mismatch, "one state count per class expected");
  ClassModelBank bank;
  for (std::size_t c = 0; c < train.size(); ++c) {
    TrainOptions opt = base;
    opt.states = {q_per_class[c], q_per_class[c]};
    opt.seed = derive_seed(base.seed, {static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(q_per_class[c])});
    bank.models.push_back(train_class_model(train[c], symbols, opt).model);
  }
  return bank;
}

StateSelection select_states(const std::vector<std::vector<ObservationPair>>& train,
                             const std::vector<std::vector<ObservationPair>>& validation,
                             const std::vector<int>& q_range, std::array<int, 2> symbols,
                             const TrainOptions& base) {
  if (q_range.empty()) throw Error(ErrorCode::parameter, "empty state-count range");
  if (train.size() != validation.size()) throw Error(ErrorCode::mismatch, "train and validation class counts differ");
  const std::size_t classes = train.size();

  StateSelection sel;
  sel.candidates = q_range;
  if (q_range.size() == 1) {
    sel.q_per_class.assign(classes, q_range.front());
    return sel;
  }
  for (int q : q_range) {
    if (q < 1) throw Error(ErrorCode::parameter, "state counts must be >= 1");
    const ClassModelBank bank = train_bank(train, std::vector<int>(classes, q), symbols, base);
    std::vector<double> rate(classes, 0.0);
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t c = 0; c < classes; ++c) {
      if (validation[c].empty()) continue;
      std::size_t hits = 0;
      for (const auto& obs : validation[c])
        if (classify(bank, obs).class_id == c) ++hits;
      rate[c] = static_cast<double>(hits) / static_cast<double>(validation[c].size());
    }
    sel.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    sel.cost.push_back(std::pow(static_cast<double>(q) * q, 2.0));
    sel.rates.push_back(std::move(rate));
  }

  sel.q_per_class.resize(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < q_range.size(); ++k) {
      const double r = sel.rates[k][c], rb = sel.rates[best][c];
      if (r > rb || (r == rb && (sel.cost[k] < sel.cost[best] ||
                                 (sel.cost[k] == sel.cost[best] && q_range[k] < q_range[best]))))
        best = k;
    }
    sel.q_per_class[c] = q_range[best];
  }
  return sel;
}

}  // namespace hwr
