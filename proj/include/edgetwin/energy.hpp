#pragma once
// Energy-per-packet and normalized energy-per-bit objectives.

#include <stdexcept>

namespace edgetwin {

struct LocalCompute {
  double k0 = 1e-15;                   // J per cycle per (cycles/slot)^2
  double cycles_per_slot = 0.0;        // current service rate C
  double max_cycles_per_slot = 5000.0; // hardware cap C^max
};

/// k0 * C^2 * c joules to process one packet of c cycles at rate C.
inline double local_energy_per_packet(double k0, double cycles_per_slot,
                                      double cycles_per_packet) {
  if (!(k0 > 0.0)) throw std::domain_error("local_energy_per_packet: k0 must be positive");
  return k0 * cycles_per_slot * cycles_per_slot * cycles_per_packet;
}

/// Energy per bit of a short-packet user splitting between local execution
/// and offloading: (1-x) E_loc/b + x P Ts / b.
inline double eta_urllc(double offload_prob, double local_energy_j, double power_w,
                        double slot_s, double packet_bits) {
  if (!(offload_prob >= 0.0 && offload_prob <= 1.0)) {
    throw std::domain_error("eta_urllc: offload probability outside [0,1]");
  }
  return ((1.0 - offload_prob) * local_energy_j + offload_prob * power_w * slot_s) /
         packet_bits;
}

/// Energy per bit of a delay-tolerant user with the local rate pinned to the
/// stability equality C = (1-x) lambda c̄: cubic local term plus the average
/// transmit term P Ts / (lambda b̄). The transmit term is zero when x = 0.
inline double eta_dt(double offload_prob, double arrival_per_slot, double mean_cycles,
                     double mean_bits, double power_w, double slot_s, double k0) {
  if (!(offload_prob >= 0.0 && offload_prob <= 1.0)) {
    throw std::domain_error("eta_dt: offload probability outside [0,1]");
  }
  const double keep = 1.0 - offload_prob;
  const double local = k0 * arrival_per_slot * arrival_per_slot * mean_cycles *
                       mean_cycles * mean_cycles * keep * keep * keep / mean_bits;
  if (offload_prob == 0.0) return local;
  return local + power_w * slot_s / (arrival_per_slot * mean_bits);
}

}  // namespace edgetwin
