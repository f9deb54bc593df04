#pragma once
// Discrete-time queueing: Geo/D/1 waiting-delay tail for the local CPU queue
// and the processor-sharing delay/workload constraints at the MEC server.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace edgetwin {

struct UrllcQos {
  int max_delay_slots = 8;           // end-to-end deadline D^max in slots
  double max_violation_prob = 1e-7;  // eps^max
};

struct MecLoadTerm {
  double offload_prob = 0.0;       // x
  double arrival_per_slot = 0.0;   // lambda
  double cycles_per_packet = 0.0;  // c (mean for delay-tolerant)
};

struct MecLoad {
  double server_cycles_per_slot = 0.0;  // S
  std::vector<MecLoadTerm> urllc;
  std::vector<MecLoadTerm> dt;
};

/// Pr{W > i} for the waiting delay W of a Geo/D/1 FCFS queue with Bernoulli
/// arrival probability `lambda` per slot and deterministic service of
/// `service_slots` slots. Alternating binomial form, clamped to [0,1]
/// against floating-point dust.
inline double geo_d1_delay_ccdf(double lambda, int service_slots, int i) {
  if (service_slots < 1) throw std::domain_error("geo_d1_delay_ccdf: service_slots must be >= 1");
  if (i < 0) throw std::domain_error("geo_d1_delay_ccdf: delay index must be >= 0");
  if (!(lambda >= 0.0) || lambda * service_slots >= 1.0) {
    throw std::domain_error("geo_d1_delay_ccdf: queue must be stable (lambda*D < 1)");
  }
  if (lambda == 0.0) return 0.0;
  // One-slot service with at most one arrival per slot never queues.
  if (service_slots == 1) return 0.0;
  const int j = i / service_slots;
  const double base = lambda * std::pow(1.0 - lambda, service_slots - 1);
  double sum = 0.0;
  for (int l = 0; l <= j; ++l) {
    const int n = i + l - l * service_slots;  // always >= l for l <= i/D
    double binom = 1.0;
    for (int t = 1; t <= l; ++t) binom *= static_cast<double>(n - l + t) / t;
    const double term = std::pow(base, l) * binom;
    sum += (l % 2 == 0) ? term : -term;
  }
  const double ccdf =
      1.0 - (1.0 - lambda * service_slots) / std::pow(1.0 - lambda, i + 1) * sum;
  return std::clamp(ccdf, 0.0, 1.0);
}

/// Slot-by-slot Geo/D/1 simulation. Returns the empirical CCDF Pr{W > i} for
/// i in [0, max_delay]. Arrivals join at slot start and wait for the backlog
/// present at that instant; service progresses one slot per slot.
inline std::vector<double> simulate_geo_d1(double lambda, int service_slots,
                                           std::int64_t n_slots, std::mt19937_64& rng,
                                           int max_delay) {
  if (service_slots < 1) throw std::domain_error("simulate_geo_d1: service_slots must be >= 1");
  if (!(lambda >= 0.0) || lambda * service_slots >= 1.0) {
    throw std::domain_error("simulate_geo_d1: queue must be stable (lambda*D < 1)");
  }
  std::vector<std::int64_t> wait_count(static_cast<size_t>(max_delay) + 2, 0);
  std::int64_t arrivals = 0;
  std::int64_t backlog = 0;  // unfinished work, in slots
  constexpr double inv_2_53 = 1.0 / 9007199254740992.0;
  for (std::int64_t t = 0; t < n_slots; ++t) {
    const double u = static_cast<double>(rng() >> 11) * inv_2_53;
    if (u < lambda) {
      const std::int64_t w = std::min<std::int64_t>(backlog, max_delay + 1);
      ++wait_count[static_cast<size_t>(w)];
      ++arrivals;
      backlog += service_slots;
    }
    if (backlog > 0) --backlog;
  }
  std::vector<double> ccdf(static_cast<size_t>(max_delay) + 1, 0.0);
  if (arrivals == 0) return ccdf;
  std::int64_t tail = 0;
  for (int i = max_delay; i >= 0; --i) {
    tail += wait_count[static_cast<size_t>(i) + 1];
    ccdf[static_cast<size_t>(i)] = static_cast<double>(tail) / static_cast<double>(arrivals);
  }
  return ccdf;
}

struct LocalServiceRate {
  double cycles_per_slot = 0.0;  // C*
  int processing_slots = 0;      // D_lc achieving it
};

/// Minimal local CPU rate meeting the end-to-end deadline and the queueing
/// violation cap. Scans integer processing times D_lc from max_delay-1 down
/// to 1 and returns cycles_per_packet / D_lc for the largest admissible D_lc.
inline std::optional<LocalServiceRate> min_urllc_local_rate(double lambda,
                                                            double cycles_per_packet,
                                                            const UrllcQos& qos,
                                                            double max_cycles_per_slot) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::domain_error("min_urllc_local_rate: lambda must lie in (0,1)");
  }
  if (!(cycles_per_packet > 0.0)) {
    throw std::domain_error("min_urllc_local_rate: cycles_per_packet must be positive");
  }
  for (int d_lc = qos.max_delay_slots - 1; d_lc >= 1; --d_lc) {
    const double rate = cycles_per_packet / d_lc;
    if (rate > max_cycles_per_slot) continue;
    if (lambda * d_lc >= 1.0) continue;  // local queue unstable at this rate
    const double viol = geo_d1_delay_ccdf(lambda, d_lc, qos.max_delay_slots - d_lc);
    if (viol <= qos.max_violation_prob) {
      return LocalServiceRate{rate, d_lc};
    }
  }
  return std::nullopt;
}

/// Offered load rho of the shared processor-sharing server.
inline double mec_workload(const MecLoad& load) {
  if (!(load.server_cycles_per_slot > 0.0)) {
    throw std::domain_error("mec_workload: server rate must be positive");
  }
  double cycles = 0.0;
  for (const auto& t : load.urllc) cycles += t.offload_prob * t.arrival_per_slot * t.cycles_per_packet;
  for (const auto& t : load.dt) cycles += t.offload_prob * t.arrival_per_slot * t.cycles_per_packet;
  return cycles / load.server_cycles_per_slot;
}

/// Workload cap (eps/2)^(c / (S*(Dmax-1) - c)) that keeps the PS-server delay
/// violation of a short packet below eps/2. Empty when the server cannot meet
/// the deadline even when idle.
inline std::optional<double> rho_threshold(double eps_max, double cycles_per_packet,
                                           double server_cycles_per_slot,
                                           int max_delay_slots) {
  const double budget = server_cycles_per_slot * (max_delay_slots - 1);
  if (budget <= cycles_per_packet) return std::nullopt;
  return std::pow(eps_max / 2.0, cycles_per_packet / (budget - cycles_per_packet));
}

/// PS-server delay violation Pr{D > proc_delay_slots} ~ rho^(S*D/c - 1).
/// Returns 1 for rho >= 1 (unstable server).
inline double ps_delay_violation(double rho, double server_cycles_per_slot,
                                 double cycles_per_packet, int proc_delay_slots) {
  if (rho >= 1.0) return 1.0;
  if (rho <= 0.0) rho = 0.0;
  const double expo =
      server_cycles_per_slot * proc_delay_slots / cycles_per_packet - 1.0;
  return std::pow(rho, expo);
}

}  // namespace edgetwin
