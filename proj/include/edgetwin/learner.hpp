#pragma once
// Digital-twin training loop: explore association schemes around the DNN
// output, label each epoch with the best scheme found by the twin, and train
// the network from a replay memory.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "edgetwin/digital_twin.hpp"
#include "edgetwin/neural_net.hpp"
#include "edgetwin/parallel.hpp"
#include "edgetwin/rng.hpp"

namespace edgetwin {

/// Ring buffer of (features, target association) pairs; a full buffer
/// replaces the oldest entry first.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity = 1024) : capacity_(capacity) {}

  void push(std::vector<double> features, std::vector<double> target) {
    if (entries_.size() < capacity_) {
      entries_.push_back({std::move(features), std::move(target)});
    } else {
      entries_[next_] = {std::move(features), std::move(target)};
    }
    next_ = (next_ + 1) % capacity_;
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }

  const std::vector<double>& features(std::size_t i) const { return entries_[i].first; }
  const std::vector<double>& target(std::size_t i) const { return entries_[i].second; }

  /// Uniform sample of min(count, size) indices without replacement.
  std::vector<std::size_t> sample(std::size_t count, std::mt19937_64& rng) const {
    std::vector<std::size_t> idx(entries_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (count >= idx.size()) return idx;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_uniform(rng) * (idx.size() - i));
      std::swap(idx[i], idx[std::min(j, idx.size() - 1)]);
    }
    idx.resize(count);
    return idx;
  }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<std::pair<std::vector<double>, std::vector<double>>> entries_;
};

struct ExplorationConfig {
  int one_step_count = -1;     // mu_OS; negative means "all neighbors"
  int random_count = 0;        // mu_RE
  int batch_size = 128;        // N_t
  double loss_threshold = 0.1; // sigma_L, reported training-finished level
};

/// Per-user argmax over the DNN output block; ties go to the lowest AP index.
inline AssociationScheme exploit_map(std::span<const double> beta_hat, int num_users,
                                     int num_aps) {
  if (static_cast<int>(beta_hat.size()) != num_users * num_aps) {
    throw std::invalid_argument("exploit_map: output size mismatch");
  }
  AssociationScheme s;
  s.num_aps = num_aps;
  s.ap_of_user.resize(static_cast<size_t>(num_users));
  for (int k = 0; k < num_users; ++k) {
    int best = 0;
    double best_v = beta_hat[static_cast<size_t>(k) * num_aps];
    for (int m = 1; m < num_aps; ++m) {
      const double v = beta_hat[static_cast<size_t>(k) * num_aps + m];
      if (v > best_v) {
        best_v = v;
        best = m;
      }
    }
    s.ap_of_user[static_cast<size_t>(k)] = best;
  }
  return s;
}

/// Flattened one-hot M*K target vector matching the DNN output layout.
inline std::vector<double> flatten_association(const AssociationScheme& s) {
  std::vector<double> v(s.ap_of_user.size() * static_cast<size_t>(s.num_aps), 0.0);
  for (size_t k = 0; k < s.ap_of_user.size(); ++k) {
    v[k * static_cast<size_t>(s.num_aps) + static_cast<size_t>(s.ap_of_user[k])] = 1.0;
  }
  return v;
}

/// Schemes differing from the base in exactly one user's AP. There are
/// K*(M-1) of them; `count` < 0 or >= that returns all (deterministic order),
/// otherwise a uniform sample without replacement.
inline std::vector<AssociationScheme> one_step_neighbors(const AssociationScheme& base,
                                                         int count,
                                                         std::mt19937_64& rng) {
  const int num_users = static_cast<int>(base.ap_of_user.size());
  const int available = num_users * (base.num_aps - 1);
  std::vector<int> slots(static_cast<size_t>(available));
  for (int i = 0; i < available; ++i) slots[static_cast<size_t>(i)] = i;
  int take = (count < 0 || count >= available) ? available : count;
  if (take < available) {
    for (int i = 0; i < take; ++i) {
      const int j = i + rng_index(rng, available - i);
      std::swap(slots[static_cast<size_t>(i)], slots[static_cast<size_t>(j)]);
    }
  }
  std::vector<AssociationScheme> out;
  out.reserve(static_cast<size_t>(take));
  for (int i = 0; i < take; ++i) {
    const int slot = slots[static_cast<size_t>(i)];
    const int user = slot / (base.num_aps - 1);
    int ap = slot % (base.num_aps - 1);
    if (ap >= base.ap_of_user[static_cast<size_t>(user)]) ++ap;  // skip current AP
    AssociationScheme s = base;
    s.ap_of_user[static_cast<size_t>(user)] = ap;
    out.push_back(std::move(s));
  }
  return out;
}

/// Independent uniform one-hot rows: every user picks one of M APs with
/// probability 1/M.
inline std::vector<AssociationScheme> random_schemes(int count, int num_users,
                                                     int num_aps,
                                                     std::mt19937_64& rng) {
  std::vector<AssociationScheme> out;
  out.reserve(static_cast<size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    AssociationScheme s;
    s.num_aps = num_aps;
    s.ap_of_user.resize(static_cast<size_t>(num_users));
    for (auto& m : s.ap_of_user) m = rng_index(rng, num_aps);
    out.push_back(std::move(s));
  }
  return out;
}

struct SelectionResult {
  std::optional<std::size_t> best_index;  // empty when every candidate is infeasible
  double q_best = std::numeric_limits<double>::infinity();
  std::vector<double> q_values;           // one per candidate
  long objective_evaluations = 0;
};

/// Evaluates every candidate in the twin and returns the feasible minimizer;
/// ties resolve to the earliest candidate, so the exploitation scheme wins
/// ties against explorations.
inline SelectionResult select_best(const Scenario& sc,
                                   const std::vector<AssociationScheme>& candidates,
                                   const SearchTolerances& tol = {}, int workers = 1) {
  SelectionResult res;
  res.q_values.assign(candidates.size(), std::numeric_limits<double>::infinity());
  parallel_for(candidates.size(), workers, [&](std::size_t i) {
    res.q_values[i] = evaluate_association(sc, candidates[i], tol).q;
  });
  res.objective_evaluations = static_cast<long>(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (res.q_values[i] < res.q_best) {
      res.q_best = res.q_values[i];
      res.best_index = i;
    }
  }
  return res;
}

struct LearnerState {
  MlpParams params;
  AdamState adam;
  ReplayMemory memory;
  std::int64_t epoch = 0;
  int num_users = 0;
  int num_aps = 0;
};

inline LearnerState make_learner(int num_users, int num_aps, std::mt19937_64& rng,
                                 int hidden_width = 100, int hidden_layers = 4,
                                 double lr = 0.001, std::size_t memory_capacity = 1024) {
  LearnerState st;
  st.num_users = num_users;
  st.num_aps = num_aps;
  std::vector<int> sizes{num_users * num_aps};
  for (int i = 0; i < hidden_layers; ++i) sizes.push_back(hidden_width);
  sizes.push_back(num_users * num_aps);
  st.params = make_mlp(sizes, rng);
  st.adam = make_adam(st.params, lr);
  st.memory = ReplayMemory(memory_capacity);
  return st;
}

struct EpochMetrics {
  std::int64_t epoch = 0;
  double loss = std::numeric_limits<double>::quiet_NaN();
  double q_best = std::numeric_limits<double>::infinity();
  double q_exploit = std::numeric_limits<double>::infinity();
  double feasible_fraction = 0.0;
  bool drift = false;
  bool skipped = false;
  long objective_evaluations = 0;
};

/// One learning epoch against a fresh scenario: forward pass, candidate
/// generation (exploitation + one-step + random), twin evaluation, replay
/// push and a single Adam step on a sampled batch. Epochs where every
/// candidate is infeasible skip the memory push and the training step.
inline EpochMetrics train_epoch(LearnerState& st, const Scenario& sc,
                                const ExplorationConfig& expl, std::mt19937_64& rng,
                                const SearchTolerances& tol = {}, int workers = 1) {
  EpochMetrics met;
  met.epoch = st.epoch;
  const std::vector<double> features = dnn_input_features(sc);
  const std::vector<double> beta_hat = forward(st.params, features);
  std::vector<AssociationScheme> candidates;
  candidates.push_back(exploit_map(beta_hat, st.num_users, st.num_aps));
  for (auto& s : one_step_neighbors(candidates.front(), expl.one_step_count, rng)) {
    candidates.push_back(std::move(s));
  }
  for (auto& s : random_schemes(expl.random_count, st.num_users, st.num_aps, rng)) {
    candidates.push_back(std::move(s));
  }
  const SelectionResult sel = select_best(sc, candidates, tol, workers);
  met.q_exploit = sel.q_values.front();
  met.q_best = sel.q_best;
  met.objective_evaluations = sel.objective_evaluations;
  std::size_t feasible = 0;
  for (double q : sel.q_values) {
    if (std::isfinite(q)) ++feasible;
  }
  met.feasible_fraction = static_cast<double>(feasible) / static_cast<double>(sel.q_values.size());
  if (!sel.best_index) {
    met.skipped = true;
    ++st.epoch;
    return met;
  }
  st.memory.push(features, flatten_association(candidates[*sel.best_index]));
  const auto idx = st.memory.sample(static_cast<std::size_t>(expl.batch_size), rng);
  std::vector<std::vector<double>> inputs, targets;
  inputs.reserve(idx.size());
  targets.reserve(idx.size());
  for (std::size_t i : idx) {
    inputs.push_back(st.memory.features(i));
    targets.push_back(st.memory.target(i));
  }
  const BackwardResult back = backward(st.params, inputs, targets);
  adam_step(st.params, st.adam, back.grads);
  met.loss = back.loss;
  ++st.epoch;
  return met;
}

struct DriftEvent {
  std::int64_t epoch = 0;
  double ratio_region1 = 5.0;
  double ratio_region2 = 5.0;
};

struct LearnerRunConfig {
  GenerationConfig generation;
  ExplorationConfig exploration;
  std::int64_t epochs = 0;
  std::uint64_t seed = 1;
  SearchTolerances tol;
  int workers = 1;
  std::vector<DriftEvent> drift_schedule;
  // When set, training stops once the epoch loss falls below the
  // exploration config's loss_threshold (sigma_L).
  bool stop_at_loss_threshold = false;
};

/// Full learning run: one fresh scenario per epoch, drift events applied to
/// the generation config at their epochs (the network warm-starts across
/// drift, it is never reinitialized). The callback sees each epoch's metrics
/// together with the scenario, after the training step.
inline LearnerState run_learning(
    const LearnerRunConfig& cfg, LearnerState st,
    const std::function<void(const EpochMetrics&, const Scenario&, const LearnerState&)>&
        on_epoch = nullptr) {
  GenerationConfig gen = cfg.generation;
  std::mt19937_64 learn_rng = rng_substream(cfg.seed, 0xe11);
  const std::int64_t last = st.epoch + cfg.epochs;
  while (st.epoch < last) {
    bool drifted = false;
    for (const auto& ev : cfg.drift_schedule) {
      if (ev.epoch == st.epoch) {
        gen = apply_drift(gen, ev.ratio_region1, ev.ratio_region2);
        drifted = true;
      }
    }
    std::mt19937_64 scen_rng =
        rng_substream(cfg.seed, 0x5ce0000 + static_cast<std::uint64_t>(st.epoch));
    const Scenario sc = generate_scenario(gen, scen_rng);
    EpochMetrics met = train_epoch(st, sc, cfg.exploration, learn_rng, cfg.tol, cfg.workers);
    met.drift = drifted;
    if (on_epoch) on_epoch(met, sc, st);
    if (cfg.stop_at_loss_threshold && !met.skipped &&
        met.loss < cfg.exploration.loss_threshold) {
      break;
    }
  }
  return st;
}

}  // namespace edgetwin
