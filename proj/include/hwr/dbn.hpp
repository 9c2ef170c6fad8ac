#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hwr/random.hpp"

namespace hwr {

/// Two coupled discrete HMM chains. Chain l's state at t depends on both
/// chains' states at t - 1; each chain emits its own symbol stream.
///
///   pi[l][i]                  P(X_1^l = i)
///   trans[l][(i*Q2 + j)*Ql + k] P(X_t^l = k | X_{t-1}^1 = i, X_{t-1}^2 = j)
///   emit[l][j*Ml + k]         P(Y_t^l = k | X_t^l = j)
struct CoupledHmm {
  std::array<int, 2> states{1, 1};   // Q1, Q2
  std::array<int, 2> symbols{1, 1};  // M1, M2
  std::array<std::vector<double>, 2> pi;
  std::array<std::vector<double>, 2> trans;
  std::array<std::vector<double>, 2> emit;

  int joint_states() const noexcept { return states[0] * states[1]; }

  double a(int l, int i, int j, int k) const {
    return trans[l][static_cast<std::size_t>((i * states[1] + j) * states[l] + k)];
  }
  double b(int l, int j, int k) const { return emit[l][static_cast<std::size_t>(j * symbols[l] + k)]; }

  /// Throws parameter if a table has the wrong size or a row does not sum to
  /// 1 within `tolerance`.
  void validate(double tolerance = 1e-9) const;

  /// Positive uniform-random rows, normalized.
  static CoupledHmm random(std::array<int, 2> states, std::array<int, 2> symbols, Rng& rng);

  std::string serialize() const;
  static CoupledHmm parse(const std::string& body);

  bool operator==(const CoupledHmm&) const = default;
};

/// Horizontal-scan and vertical-scan label streams of equal length.
struct ObservationPair {
  std::vector<int> y1;
  std::vector<int> y2;

  std::size_t length() const noexcept { return y1.size(); }
  bool operator==(const ObservationPair&) const = default;
};

/// Pads the shorter stream by repeating its last symbol.
ObservationPair make_observation_pair(std::vector<int> horizontal, std::vector<int> vertical);

struct InferenceResult {
  double log_likelihood = 0.0;
  /// joint[t][i*Q2 + j] = P(X_t^1 = i, X_t^2 = j | obs)
  std::vector<std::vector<double>> joint;
  /// pair[l][t-1][(i*Q2 + j)*Ql + k] = P(X_{t-1}^1 = i, X_{t-1}^2 = j, X_t^l = k | obs), t >= 1
  std::array<std::vector<std::vector<double>>, 2> pair;
};

/// Exact forward-backward on the joint chain (X^1, X^2) with per-step
/// scaling.
InferenceResult joint_inference(const CoupledHmm& model, const ObservationPair& obs);

/// Forward pass only.
double log_likelihood(const CoupledHmm& model, const ObservationPair& obs);

struct EmStepResult {
  CoupledHmm model;
  double log_likelihood = 0.0;  // of the data under the input model
};

/// One Baum-Welch iteration. `floor` is added to every expected-count cell
/// before renormalizing; rows with no mass keep their input values.
EmStepResult em_step(const CoupledHmm& model, const std::vector<ObservationPair>& data, double floor = 0.0);

struct TrainOptions {
  std::array<int, 2> states{3, 3};
  std::uint64_t seed = 0;
  int max_iters = 100;
  double tol = 1e-4;  // relative log-likelihood change
  int restarts = 3;
  double floor = 1e-6;
};

struct TrainResult {
  CoupledHmm model;
  double log_likelihood = 0.0;  // final model on the training data
  int iterations = 0;           // of the winning restart
  std::vector<double> history;  // per-iteration log-likelihood of the winning restart
};

TrainResult train_class_model(const std::vector<ObservationPair>& data, std::array<int, 2> symbols,
                              const TrainOptions& options);

/// Draws one observation pair of length T.
ObservationPair sample_sequence(const CoupledHmm& model, std::size_t length, Rng& rng);

struct ClassModelBank {
  std::vector<CoupledHmm> models;  // one per class, indexed by class id

  std::vector<int> states_per_class() const;
};

struct Classification {
  std::size_t class_id = 0;
  std::vector<double> log_likelihoods;
};

/// Maximum-likelihood class, lowest index on ties.
Classification classify(const ClassModelBank& bank, const ObservationPair& obs);

struct StateSelection {
  std::vector<int> q_per_class;
  std::vector<int> candidates;
  /// rates[q_index][class]: validation Top-1 rate in [0, 1]
  std::vector<std::vector<double>> rates;
  /// Inference cost proxy per candidate: (Q*Q)^2 joint transitions per step.
  std::vector<double> cost;
  /// Wall-clock seconds spent scoring the validation set per candidate.
  std::vector<double> seconds;
};

/// Per class, the Q (Q1 = Q2 = Q) with the best validation recognition rate;
/// ties go to lower inference cost, then smaller Q. Data is indexed by class.
StateSelection select_states(const std::vector<std::vector<ObservationPair>>& train,
                             const std::vector<std::vector<ObservationPair>>& validation,
                             const std::vector<int>& q_range, std::array<int, 2> symbols,
                             const TrainOptions& base);

/// Trains one model per class with per-class state counts.
ClassModelBank train_bank(const std::vector<std::vector<ObservationPair>>& train, const std::vector<int>& q_per_class,
                          std::array<int, 2> symbols, const TrainOptions& base);

}  // namespace hwr
