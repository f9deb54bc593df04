#pragma once
// Reference association and offloading policies: geometric and channel-gain
// association rules, exhaustive search, a coalition-game style local search,
// and the all-MEC / all-local offloading strawmen.

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "edgetwin/digital_twin.hpp"
#include "edgetwin/parallel.hpp"
#include "edgetwin/rng.hpp"

namespace edgetwin {

/// Every user joins the closest AP; equidistant ties go to the lowest index.
inline AssociationScheme nearest_ap(const Scenario& sc) {
  AssociationScheme s;
  s.num_aps = static_cast<int>(sc.aps.size());
  for (const auto& u : sc.users) {
    int best = 0;
    for (int m = 1; m < s.num_aps; ++m) {
      if (u.gains.at(m).distance_m < u.gains.at(best).distance_m) best = m;
    }
    s.ap_of_user.push_back(best);
  }
  return s;
}

/// Every user joins the AP with the strongest large-scale gain.
inline AssociationScheme highest_alpha(const Scenario& sc) {
  AssociationScheme s;
  s.num_aps = static_cast<int>(sc.aps.size());
  for (const auto& u : sc.users) {
    int best = 0;
    for (int m = 1; m < s.num_aps; ++m) {
      if (u.gains.at(m).alpha > u.gains.at(best).alpha) best = m;
    }
    s.ap_of_user.push_back(best);
  }
  return s;
}

struct SearchOutcome {
  AssociationScheme beta;
  double q = std::numeric_limits<double>::infinity();
  long objective_evaluations = 0;
};

/// Global minimum over all M^K association schemes. Refuses (empty) when the
/// scheme count exceeds the cap.
inline std::optional<SearchOutcome> exhaustive_optimal(const Scenario& sc,
                                                       const SearchTolerances& tol = {},
                                                       long cap = 4096,
                                                       int workers = 1) {
  const int num_aps = static_cast<int>(sc.aps.size());
  const int num_users = static_cast<int>(sc.users.size());
  double total_d = 1.0;
  for (int k = 0; k < num_users; ++k) total_d *= num_aps;
  if (total_d > static_cast<double>(cap)) return std::nullopt;
  const long total = static_cast<long>(total_d);

  std::vector<double> qs(static_cast<size_t>(total));
  auto scheme_at = [&](long code) {
    AssociationScheme s;
    s.num_aps = num_aps;
    s.ap_of_user.resize(static_cast<size_t>(num_users));
    for (int k = 0; k < num_users; ++k) {
      s.ap_of_user[static_cast<size_t>(k)] = static_cast<int>(code % num_aps);
      code /= num_aps;
    }
    return s;
  };
  parallel_for(static_cast<size_t>(total), workers, [&](std::size_t i) {
    qs[i] = evaluate_association(sc, scheme_at(static_cast<long>(i)), tol).q;
  });
  SearchOutcome out;
  out.objective_evaluations = total;
  long best = 0;
  for (long i = 1; i < total; ++i) {
    if (qs[static_cast<size_t>(i)] < qs[static_cast<size_t>(best)]) best = i;
  }
  out.beta = scheme_at(best);
  out.q = qs[static_cast<size_t>(best)];
  return out;
}

struct CoalitionOptions {
  int max_iters = 100;
  int stall_limit = 25;  // consecutive rejected moves before stopping
  std::optional<AssociationScheme> start;
};

/// Coalition-style local search over user partitions: repeatedly move a
/// random user to another AP or exchange two users' APs, keeping a change
/// only when the twin objective strictly improves. Starts from the
/// highest-gain association unless a start is supplied.
inline SearchOutcome coalition_game(const Scenario& sc, std::mt19937_64& rng,
                                    const CoalitionOptions& opt = {},
                                    const SearchTolerances& tol = {}) {
  const int num_aps = static_cast<int>(sc.aps.size());
  const int num_users = static_cast<int>(sc.users.size());
  SearchOutcome out;
  out.beta = opt.start ? *opt.start : highest_alpha(sc);
  out.q = evaluate_association(sc, out.beta, tol).q;
  out.objective_evaluations = 1;
  if (num_aps < 2 || num_users < 1) return out;

  int stall = 0;
  for (int it = 0; it < opt.max_iters && stall < opt.stall_limit; ++it) {
    AssociationScheme cand = out.beta;
    const bool exchange = rng_uniform(rng) < 0.5;
    bool changed = false;
    if (exchange) {
      const int k1 = rng_index(rng, num_users);
      std::vector<int> others;
      for (int k = 0; k < num_users; ++k) {
        if (cand.ap_of_user[static_cast<size_t>(k)] !=
            cand.ap_of_user[static_cast<size_t>(k1)]) {
          others.push_back(k);
        }
      }
      if (!others.empty()) {
        const int k2 = others[static_cast<size_t>(rng_index(rng, static_cast<int>(others.size())))];
        std::swap(cand.ap_of_user[static_cast<size_t>(k1)],
                  cand.ap_of_user[static_cast<size_t>(k2)]);
        changed = true;
      }
    }
    if (!changed) {
      const int k = rng_index(rng, num_users);
      const int shift = 1 + rng_index(rng, num_aps - 1);
      cand.ap_of_user[static_cast<size_t>(k)] =
          (cand.ap_of_user[static_cast<size_t>(k)] + shift) % num_aps;
    }
    const double q = evaluate_association(sc, cand, tol).q;
    ++out.objective_evaluations;
    if (q < out.q) {
      out.q = q;
      out.beta = std::move(cand);
      stall = 0;
    } else {
      ++stall;
    }
  }
  return out;
}

/// Everything offloads: URLLC thresholds drop to the power-limited minimum
/// gain and delay-tolerant users push x to 1 while keeping the proposed
/// bandwidth split. Feasibility (power cap, MEC workload) is rechecked and
/// the energy is reported either way.
inline ApSolution all_mec_policy(const ApProblem& p, const ApSolution& proposed) {
  ApSolution out = proposed;
  if (!proposed.feasible) return out;
  out.feasible = true;
  double max_eta = 0.0;
  MecLoad load;
  load.server_cycles_per_slot = p.server_cycles_per_slot;
  double rho_cap = 1.0;
  bool any_urllc = false;

  for (size_t i = 0; i < p.urllc_users.size(); ++i) {
    const UserProfile& u = p.urllc_users[i];
    auto& sol = out.urllc[i];
    const UrllcLocal local = urllc_local_plan(u, p.qos);
    if (sol.n_sub <= 0.0) {
      sol.eta = local.energy_price_j / u.packet_bits;
      sol.offload_prob = 0.0;
      sol.power_w = 0.0;
    } else {
      const double varrho = urllc_power_coefficient(
          sol.n_sub, u.gains.at(p.ap_index), p.radio, u.packet_bits,
          p.qos.max_violation_prob / 2.0);
      const double g_min = varrho / p.radio.max_tx_power_w;
      sol.offload_prob = std::exp(-g_min);
      sol.power_w = p.radio.max_tx_power_w;
      sol.eta = eta_urllc(sol.offload_prob, local.energy_price_j, sol.power_w,
                          p.radio.slot_s, u.packet_bits);
    }
    sol.local_qos_ok = local.qos_ok;
    if (!local.qos_ok && sol.offload_prob < 1.0) out.feasible = false;
    if (sol.offload_prob > 0.0) {
      any_urllc = true;
      rho_cap = std::min(rho_cap, rho_threshold(p.qos.max_violation_prob, u.packet_cycles,
                                                p.server_cycles_per_slot,
                                                p.qos.max_delay_slots)
                                      .value_or(0.0));
    }
    load.urllc.push_back({sol.offload_prob, u.arrival_per_slot, u.packet_cycles});
    max_eta = std::max(max_eta, sol.eta);
  }
  for (size_t i = 0; i < p.dt_users.size(); ++i) {
    const UserProfile& u = p.dt_users[i];
    auto& sol = out.dt[i];
    sol.offload_prob = 1.0;
    sol.local_cycles_per_slot = 0.0;
    const double rate = u.packet_bits * u.arrival_per_slot / p.radio.slot_s;
    const auto power = sol.n_sub > 0.0
                           ? required_power_dt(rate, sol.n_sub, u.gains.at(p.ap_index),
                                               p.radio, 1e6 * p.radio.max_tx_power_w)
                           : std::nullopt;
    if (!power) {
      sol.power_w = std::numeric_limits<double>::infinity();
      sol.eta = std::numeric_limits<double>::infinity();
      out.feasible = false;
    } else {
      sol.power_w = *power;
      sol.eta = eta_dt(1.0, u.arrival_per_slot, u.packet_cycles, u.packet_bits,
                       sol.power_w, p.radio.slot_s, u.local.k0);
      if (sol.power_w > p.radio.max_tx_power_w) out.feasible = false;
    }
    load.dt.push_back({1.0, u.arrival_per_slot, u.packet_cycles});
    max_eta = std::max(max_eta, sol.eta);
  }
  if (!any_urllc) rho_cap = 1.0;
  if (mec_workload(load) > rho_cap) out.feasible = false;
  out.eta_star = max_eta;
  return out;
}

inline ApSolution all_mec_policy(const ApProblem& p) {
  return all_mec_policy(p, solve_ap(p));
}

/// Everything runs locally: x = 0 and no bandwidth for every user. URLLC
/// users take the minimal QoS-feasible CPU rate when it exists; delay
/// tolerant users pin the stability equality C = lambda * c̄. Violations of
/// the queueing QoS or of C^max clear the feasible flag but the energy is
/// still reported.
inline ApSolution all_local_policy(const ApProblem& p) {
  ApSolution out;
  out.urllc.resize(p.urllc_users.size());
  out.dt.resize(p.dt_users.size());
  out.feasible = true;
  out.eta_star = 0.0;
  for (size_t i = 0; i < p.urllc_users.size(); ++i) {
    const UserProfile& u = p.urllc_users[i];
    const UrllcLocal local = urllc_local_plan(u, p.qos);
    auto& sol = out.urllc[i];
    sol.local_cycles_per_slot = local.cycles_per_slot;
    sol.local_qos_ok = local.qos_ok;
    sol.eta = local.energy_price_j / u.packet_bits;
    if (!local.qos_ok) out.feasible = false;
    out.eta_star = std::max(out.eta_star, sol.eta);
  }
  for (size_t i = 0; i < p.dt_users.size(); ++i) {
    const UserProfile& u = p.dt_users[i];
    auto& sol = out.dt[i];
    sol.local_cycles_per_slot = u.arrival_per_slot * u.packet_cycles;
    sol.local_qos_ok = sol.local_cycles_per_slot <= u.local.max_cycles_per_slot;
    sol.eta = eta_dt(0.0, u.arrival_per_slot, u.packet_cycles, u.packet_bits, 0.0,
                     p.radio.slot_s, u.local.k0);
    if (!sol.local_qos_ok) out.feasible = false;
    out.eta_star = std::max(out.eta_star, sol.eta);
  }
  return out;
}

}  // namespace edgetwin
