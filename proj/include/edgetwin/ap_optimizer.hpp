#pragma once
// Exact single-AP solver: min-max normalized energy over subcarrier counts
// and offloading probabilities. Outer bisection on the energy threshold,
// per-user bisection on bandwidth, closed-form URLLC offloading threshold and
// golden-section search for delay-tolerant offloading.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "edgetwin/energy.hpp"
#include "edgetwin/phy.hpp"
#include "edgetwin/queueing.hpp"
#include "edgetwin/user.hpp"

namespace edgetwin {

struct SearchTolerances {
  double eta = 1e-10;         // sigma_eta, J/bit
  double subcarriers = 1e-3;  // sigma_N
  double offload = 1e-6;      // sigma_x
};

struct ApProblem {
  std::vector<UserProfile> urllc_users;
  std::vector<UserProfile> dt_users;
  int ap_index = 0;
  RadioConfig radio;
  double server_cycles_per_slot = 200000.0;  // S
  UrllcQos qos;
  SearchTolerances tol;
};

struct ApUserSolution {
  double n_sub = 0.0;
  double offload_prob = 0.0;
  double power_w = 0.0;
  double eta = 0.0;
  double local_cycles_per_slot = 0.0;
  bool local_qos_ok = true;
};

struct ApSolution {
  std::vector<ApUserSolution> urllc;
  std::vector<ApUserSolution> dt;
  double eta_star = std::numeric_limits<double>::infinity();
  bool feasible = false;
  long inner_evaluations = 0;  // per-(user, bandwidth) optimizations requested
  int outer_iterations = 0;
};

namespace detail {

template <typename F>
inline std::pair<double, double> golden_section_min(F&& f, double lo, double hi,
                                                    double tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  const double xm = 0.5 * (a + b);
  return {xm, f(xm)};
}

}  // namespace detail

/// Local-execution plan of a short-packet user: the minimal QoS-feasible CPU
/// rate when one exists. When the queueing deadline cannot be met even at
/// C^max, the user is priced at the hardware's maximum local energy, which
/// pushes the offloading optimum toward the channel threshold g_min; the
/// remaining feasibility question is settled by the AP's workload check.
struct UrllcLocal {
  bool qos_ok = false;
  double cycles_per_slot = 0.0;   // C* when qos_ok, else C^max
  int processing_slots = 0;       // D_lc when qos_ok
  double energy_price_j = 0.0;    // k0 C^2 c at the rate above
};

inline UrllcLocal urllc_local_plan(const UserProfile& u, const UrllcQos& qos) {
  UrllcLocal plan;
  const auto rate = min_urllc_local_rate(u.arrival_per_slot, u.packet_cycles, qos,
                                         u.local.max_cycles_per_slot);
  if (rate) {
    plan.qos_ok = true;
    plan.cycles_per_slot = rate->cycles_per_slot;
    plan.processing_slots = rate->processing_slots;
  } else {
    plan.qos_ok = false;
    plan.cycles_per_slot = u.local.max_cycles_per_slot;
  }
  plan.energy_price_j =
      local_energy_per_packet(u.local.k0, plan.cycles_per_slot, u.packet_cycles);
  return plan;
}

struct UrllcOffload {
  double g_threshold = std::numeric_limits<double>::infinity();
  double offload_prob = 0.0;
  double power_w = 0.0;
  double eta = 0.0;
};

/// Optimal channel-gain threshold at a fixed bandwidth: unique stationary
/// point of the energy-per-bit in the threshold, clipped at the power-limited
/// minimum gain g_min = varrho / P^max.
inline UrllcOffload urllc_offload_opt(double n_sub, const UserProfile& u, int ap,
                                      const RadioConfig& rc, const UrllcQos& qos,
                                      double local_energy_price_j) {
  UrllcOffload res;
  const double decode_err = qos.max_violation_prob / 2.0;
  const double varrho =
      urllc_power_coefficient(n_sub, u.gains.at(ap), rc, u.packet_bits, decode_err);
  if (!std::isfinite(varrho)) {
    // Bandwidth too small to carry the packet at any finite power: all-local.
    res.eta = local_energy_price_j / u.packet_bits;
    return res;
  }
  const double g_min = varrho / rc.max_tx_power_w;
  const double ratio = varrho * rc.slot_s / local_energy_price_j;
  const double g_tilde = 0.5 * (ratio + std::sqrt(ratio * ratio + 4.0 * ratio));
  res.g_threshold = std::max(g_min, g_tilde);
  res.offload_prob = std::exp(-res.g_threshold);
  if (res.offload_prob == 0.0) {
    res.power_w = 0.0;
    res.eta = local_energy_price_j / u.packet_bits;
    return res;
  }
  res.power_w = res.g_threshold > 0.0 ? varrho / res.g_threshold : 0.0;
  res.eta = eta_urllc(res.offload_prob, local_energy_price_j, res.power_w, rc.slot_s,
                      u.packet_bits);
  return res;
}

struct DtOffload {
  double offload_prob = 0.0;
  double power_w = 0.0;
  double eta = 0.0;
};

/// Optimal offloading probability of a delay-tolerant user at a fixed
/// bandwidth: golden-section minimization of the convex energy-per-bit over
/// the interval pinned by the local-CPU cap (lower bound) and the wireless
/// rate at P^max (upper bound). Empty when the interval is empty.
inline std::optional<DtOffload> dt_offload_opt(double n_sub, const UserProfile& u,
                                               int ap, const RadioConfig& rc,
                                               double sigma_x) {
  const double lam = u.arrival_per_slot;
  const double cbar = u.packet_cycles;
  const double bbar = u.packet_bits;
  const double x_lb = std::max(0.0, 1.0 - u.local.max_cycles_per_slot / (lam * cbar));
  double x_ub = 0.0;
  if (n_sub > 0.0) {
    const double cap = ergodic_capacity(n_sub, rc.max_tx_power_w, u.gains.at(ap), rc);
    x_ub = std::min(1.0, cap * rc.slot_s / (bbar * lam));
  }
  if (x_lb > x_ub) return std::nullopt;

  auto power_at = [&](double x) {
    if (x <= 0.0) return 0.0;
    const auto p = required_power_dt(x * bbar * lam / rc.slot_s, n_sub, u.gains.at(ap),
                                     rc, rc.max_tx_power_w);
    return p.value_or(rc.max_tx_power_w);
  };
  auto eta_at = [&](double x) {
    return eta_dt(x, lam, cbar, bbar, power_at(x), rc.slot_s, u.local.k0);
  };

  double x_best = x_lb, f_best = eta_at(x_lb);
  const double f_hi = eta_at(x_ub);
  if (f_hi < f_best) {
    x_best = x_ub;
    f_best = f_hi;
  }
  if (x_ub - x_lb > sigma_x) {
    const auto [xm, fm] = detail::golden_section_min(eta_at, x_lb, x_ub, sigma_x);
    if (fm < f_best) {
      x_best = xm;
      f_best = fm;
    }
  }
  return DtOffload{x_best, power_at(x_best), f_best};
}

/// Stationary point of the power coefficient in the bandwidth: the largest
/// useful subcarrier count for a short-packet user (adding bandwidth past it
/// raises the required power). Golden section over [1, N^max].
inline double urllc_subcarrier_cap(const UserProfile& u, int ap, const RadioConfig& rc,
                                   const UrllcQos& qos, double sigma_n) {
  const double decode_err = qos.max_violation_prob / 2.0;
  auto varrho = [&](double n) {
    return urllc_power_coefficient(n, u.gains.at(ap), rc, u.packet_bits, decode_err);
  };
  return detail::golden_section_min(varrho, 1.0,
                                    static_cast<double>(rc.max_subcarriers), sigma_n)
      .first;
}

/// Per-user optimum at one bandwidth, as consumed by the bandwidth bisection.
struct InnerPoint {
  bool feasible = false;
  double offload_prob = 0.0;
  double power_w = 0.0;
  double eta = std::numeric_limits<double>::infinity();
  double local_cycles_per_slot = 0.0;
};

struct PerUserPlan {
  double n_sub = 0.0;
  InnerPoint point;
};

/// Bandwidth bisection of the inner loop: smallest subcarrier count whose
/// per-user optimum meets eta_th. A user whose optimum prefers x = 0 needs no
/// bandwidth at all and short-circuits to n = 0. Empty when eta_th is
/// unreachable even at n_upper.
template <typename Inner>
inline std::optional<PerUserPlan> min_subcarriers_for_eta(Inner&& inner, double eta_th,
                                                          double n_upper,
                                                          double sigma_n) {
  double n_lb = 0.0, n_ub = n_upper;
  std::optional<InnerPoint> witness;
  while (n_ub - n_lb > sigma_n) {
    const double mid = 0.5 * (n_ub + n_lb);
    const InnerPoint pt = inner(mid);
    if (pt.feasible && pt.offload_prob == 0.0 && pt.eta <= eta_th) {
      // The optimum keeps everything local here, so no bandwidth is needed.
      // When the local cost misses the threshold this is just an
      // under-provisioned bandwidth probe; keep searching upward.
      return PerUserPlan{0.0, pt};
    }
    if (pt.feasible && pt.eta < eta_th) {
      n_ub = mid;
      witness = pt;
    } else {
      n_lb = mid;
    }
  }
  if (!witness) {
    const InnerPoint pt = inner(n_ub);
    if (pt.feasible && pt.offload_prob == 0.0 && pt.eta <= eta_th) {
      return PerUserPlan{0.0, pt};
    }
    if (!pt.feasible || pt.eta > eta_th) return std::nullopt;
    witness = pt;
  }
  return PerUserPlan{n_ub, *witness};
}

/// The full per-AP algorithm: outer bisection on the max energy-per-bit with
/// the subcarrier-budget and MEC-workload feasibility test at each threshold.
inline ApSolution solve_ap(const ApProblem& p) {
  const size_t ku = p.urllc_users.size();
  const size_t kb = p.dt_users.size();
  ApSolution out;
  out.urllc.resize(ku);
  out.dt.resize(kb);
  if (ku + kb == 0) {
    out.feasible = true;
    out.eta_star = 0.0;
    return out;
  }

  std::vector<UrllcLocal> local(ku);
  std::vector<double> n_cap(ku);
  std::vector<double> rho_cap(ku);
  for (size_t i = 0; i < ku; ++i) {
    const UserProfile& u = p.urllc_users[i];
    local[i] = urllc_local_plan(u, p.qos);
    n_cap[i] = urllc_subcarrier_cap(u, p.ap_index, p.radio, p.qos, p.tol.subcarriers);
    rho_cap[i] = rho_threshold(p.qos.max_violation_prob, u.packet_cycles,
                               p.server_cycles_per_slot, p.qos.max_delay_slots)
                     .value_or(0.0);
  }

  // Upper end of the bisection: energy at the C^max / P^max equalities.
  double eta_hi = 0.0;
  for (const auto& u : p.urllc_users) {
    const double e_loc =
        local_energy_per_packet(u.local.k0, u.local.max_cycles_per_slot, u.packet_cycles);
    eta_hi = std::max(eta_hi, (e_loc + p.radio.max_tx_power_w * p.radio.slot_s) /
                                  u.packet_bits);
  }
  for (const auto& u : p.dt_users) {
    const double e_loc =
        local_energy_per_packet(u.local.k0, u.local.max_cycles_per_slot, u.packet_cycles);
    eta_hi = std::max(eta_hi, e_loc / u.packet_bits +
                                  p.radio.max_tx_power_w * p.radio.slot_s /
                                      (u.arrival_per_slot * u.packet_bits));
  }

  std::vector<std::unordered_map<double, InnerPoint>> memo_u(ku), memo_d(kb);
  auto inner_u = [&](size_t i, double n) {
    ++out.inner_evaluations;
    auto [it, fresh] = memo_u[i].try_emplace(n);
    if (fresh) {
      const UrllcOffload o = urllc_offload_opt(n, p.urllc_users[i], p.ap_index, p.radio,
                                               p.qos, local[i].energy_price_j);
      it->second = InnerPoint{true, o.offload_prob, o.power_w, o.eta,
                              local[i].cycles_per_slot};
    }
    return it->second;
  };
  auto inner_d = [&](size_t i, double n) {
    ++out.inner_evaluations;
    auto [it, fresh] = memo_d[i].try_emplace(n);
    if (fresh) {
      const auto o = dt_offload_opt(n, p.dt_users[i], p.ap_index, p.radio, p.tol.offload);
      if (o) {
        const double kept = (1.0 - o->offload_prob) * p.dt_users[i].arrival_per_slot *
                            p.dt_users[i].packet_cycles;
        it->second = InnerPoint{true, o->offload_prob, o->power_w, o->eta, kept};
      }
    }
    return it->second;
  };

  struct Snapshot {
    std::vector<PerUserPlan> urllc, dt;
    double max_eta = 0.0;
  };
  auto try_threshold = [&](double eta_th) -> std::optional<Snapshot> {
    Snapshot s;
    s.urllc.resize(ku);
    s.dt.resize(kb);
    double sum_n = 0.0;
    bool all_met = true;
    for (size_t i = 0; i < ku; ++i) {
      auto plan = min_subcarriers_for_eta([&](double n) { return inner_u(i, n); },
                                          eta_th, n_cap[i], p.tol.subcarriers);
      if (!plan) {
        all_met = false;
        continue;
      }
      s.urllc[i] = *plan;
      sum_n += plan->n_sub;
      s.max_eta = std::max(s.max_eta, plan->point.eta);
    }
    for (size_t i = 0; i < kb; ++i) {
      auto plan = min_subcarriers_for_eta(
          [&](double n) { return inner_d(i, n); }, eta_th,
          static_cast<double>(p.radio.max_subcarriers), p.tol.subcarriers);
      if (!plan) {
        all_met = false;
        continue;
      }
      s.dt[i] = *plan;
      sum_n += plan->n_sub;
      s.max_eta = std::max(s.max_eta, plan->point.eta);
    }
    if (!all_met) return std::nullopt;
    if (sum_n > p.radio.max_subcarriers) return std::nullopt;
    MecLoad load;
    load.server_cycles_per_slot = p.server_cycles_per_slot;
    double cap = 1.0;
    bool urllc_offloads = false;
    for (size_t i = 0; i < ku; ++i) {
      const double x = s.urllc[i].point.offload_prob;
      load.urllc.push_back({x, p.urllc_users[i].arrival_per_slot,
                            p.urllc_users[i].packet_cycles});
      if (x > 0.0) {
        urllc_offloads = true;
        cap = std::min(cap, rho_cap[i]);
      }
    }
    for (size_t i = 0; i < kb; ++i) {
      load.dt.push_back({s.dt[i].point.offload_prob, p.dt_users[i].arrival_per_slot,
                         p.dt_users[i].packet_cycles});
    }
    if (!urllc_offloads) cap = 1.0;
    if (mec_workload(load) > cap) return std::nullopt;
    return s;
  };

  std::optional<Snapshot> best;
  double lo = 0.0, hi = eta_hi;
  while (hi - lo > p.tol.eta && out.outer_iterations < 200) {
    ++out.outer_iterations;
    const double th = 0.5 * (lo + hi);
    if (auto s = try_threshold(th)) {
      hi = th;
      best = std::move(s);
    } else {
      lo = th;
    }
  }
  if (!best) return out;  // infeasible: eta_star stays +inf

  out.feasible = true;
  out.eta_star = best->max_eta;
  for (size_t i = 0; i < ku; ++i) {
    const auto& pl = best->urllc[i];
    out.urllc[i] = ApUserSolution{pl.n_sub,
                                  pl.point.offload_prob,
                                  pl.point.power_w,
                                  pl.point.eta,
                                  pl.point.local_cycles_per_slot,
                                  local[i].qos_ok};
  }
  for (size_t i = 0; i < kb; ++i) {
    const auto& pl = best->dt[i];
    out.dt[i] = ApUserSolution{pl.n_sub,          pl.point.offload_prob,
                               pl.point.power_w,  pl.point.eta,
                               pl.point.local_cycles_per_slot,
                               true};
  }
  return out;
}

}  // namespace edgetwin
