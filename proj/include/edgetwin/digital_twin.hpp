#pragma once
// The virtual replica of the network: seeded scenario generation, evaluation
// of a user-association scheme through the per-AP optimizer, and the
// distribution-drift hook used for non-stationary experiments.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "edgetwin/ap_optimizer.hpp"
#include "edgetwin/rng.hpp"
#include "edgetwin/user.hpp"

namespace edgetwin {

struct ApConfig {
  std::array<double, 2> position_m{0.0, 0.0};
  double server_cycles_per_slot = 200000.0;
  int max_subcarriers = 128;
};

struct Scenario {
  std::vector<ApConfig> aps;
  std::vector<UserProfile> users;  // URLLC users first, then delay-tolerant
  RadioConfig radio;
  UrllcQos qos;
  std::uint64_t seed = 0;
};

inline int count_urllc(const Scenario& sc) {
  int n = 0;
  for (const auto& u : sc.users) {
    if (u.service_class == ServiceClass::urllc) ++n;
  }
  return n;
}

/// One-hot user-to-AP assignment; row k of the binary K x M matrix is
/// the unit vector at ap_of_user[k].
struct AssociationScheme {
  int num_aps = 0;
  std::vector<int> ap_of_user;

  bool valid() const {
    if (num_aps < 1) return false;
    for (int m : ap_of_user) {
      if (m < 0 || m >= num_aps) return false;
    }
    return true;
  }
  bool operator==(const AssociationScheme&) const = default;
};

struct TwinEvaluation {
  double q = std::numeric_limits<double>::infinity();  // max eta over all users
  bool feasible = false;
  std::vector<ApSolution> per_ap;
};

/// Splits the users by the given association and solves every AP's resource
/// allocation; Q is the maximal per-user energy-per-bit, infinite as soon as
/// one AP cannot satisfy its users.
inline TwinEvaluation evaluate_association(const Scenario& sc,
                                           const AssociationScheme& beta,
                                           const SearchTolerances& tol = {}) {
  if (beta.num_aps != static_cast<int>(sc.aps.size()) ||
      beta.ap_of_user.size() != sc.users.size() || !beta.valid()) {
    throw std::invalid_argument("evaluate_association: malformed association scheme");
  }
  TwinEvaluation ev;
  ev.per_ap.resize(sc.aps.size());
  ev.feasible = true;
  double q = 0.0;
  for (size_t m = 0; m < sc.aps.size(); ++m) {
    ApProblem prob;
    prob.ap_index = static_cast<int>(m);
    prob.radio = sc.radio;
    prob.radio.max_subcarriers = sc.aps[m].max_subcarriers;
    prob.server_cycles_per_slot = sc.aps[m].server_cycles_per_slot;
    prob.qos = sc.qos;
    prob.tol = tol;
    for (size_t k = 0; k < sc.users.size(); ++k) {
      if (beta.ap_of_user[k] != static_cast<int>(m)) continue;
      if (sc.users[k].service_class == ServiceClass::urllc) {
        prob.urllc_users.push_back(sc.users[k]);
      } else {
        prob.dt_users.push_back(sc.users[k]);
      }
    }
    ev.per_ap[m] = solve_ap(prob);
    if (!ev.per_ap[m].feasible) {
      ev.feasible = false;
    } else {
      q = std::max(q, ev.per_ap[m].eta_star);
    }
  }
  ev.q = ev.feasible ? q : std::numeric_limits<double>::infinity();
  return ev;
}

/// DNN input vector of length M*K, user-major over APs:
/// element (k, m) is 10 log10((e^lambda_k - 1)/alpha_{m,k} + 1).
inline std::vector<double> dnn_input_features(const Scenario& sc) {
  std::vector<double> features;
  features.reserve(sc.users.size() * sc.aps.size());
  for (const auto& u : sc.users) {
    const double num = std::expm1(u.arrival_per_slot);
    for (size_t m = 0; m < sc.aps.size(); ++m) {
      const double alpha = u.gains.at(m).alpha;
      if (!(alpha > 0.0)) {
        throw std::domain_error("dnn_input_features: channel gain must be positive");
      }
      features.push_back(10.0 * std::log10(num / alpha + 1.0));
    }
  }
  return features;
}

struct GenerationConfig {
  int num_aps = 2;
  int num_urllc = 5;
  int num_dt = 5;
  double ratio_region1 = 5.0;  // user-density ratio between the two regions
  double ratio_region2 = 5.0;
  double ap_spacing_m = 200.0;
  double region_radius_m = 100.0;
  double min_distance_m = 1.0;
  double shadowing_std_db = 8.0;
  double lambda_urllc_per_s = 500.0;
  double lambda_dt_min_per_s = 5.0;
  double lambda_dt_max_per_s = 10.0;
  double urllc_packet_bytes = 32.0;
  double dt_packet_min_kb = 50.0;
  double dt_packet_max_kb = 100.0;
  double cycles_per_byte = 330.0;  // k1
  double k0 = 1e-15;
  double max_local_cycles_per_slot = 5000.0;
  double server_cycles_per_slot = 200000.0;
  RadioConfig radio;
  UrllcQos qos;
};

inline void validate(const GenerationConfig& g) {
  if (g.num_aps < 1 || g.num_urllc < 0 || g.num_dt < 0) {
    throw std::invalid_argument("generation config: invalid population");
  }
  if (!(g.ratio_region1 >= 0.0) || !(g.ratio_region2 >= 0.0) ||
      g.ratio_region1 + g.ratio_region2 <= 0.0) {
    throw std::invalid_argument("generation config: invalid distribution ratio");
  }
}

/// Returns the generation config with the user-distribution ratio replaced;
/// scenarios drawn afterwards follow the new ratio.
inline GenerationConfig apply_drift(GenerationConfig g, double ratio_region1,
                                    double ratio_region2) {
  g.ratio_region1 = ratio_region1;
  g.ratio_region2 = ratio_region2;
  validate(g);
  return g;
}

/// Draws a full network realization. APs sit on a line ap_spacing_m apart;
/// users fall in the disk around AP 1 with probability r1/(r1+r2), else in
/// the disk around AP 2, uniformly within the disk. All randomness comes from
/// the supplied engine, so equal seeds replay bit-identical scenarios.
inline Scenario generate_scenario(const GenerationConfig& g, std::mt19937_64& rng) {
  validate(g);
  Scenario sc;
  sc.radio = g.radio;
  sc.qos = g.qos;
  for (int m = 0; m < g.num_aps; ++m) {
    sc.aps.push_back(ApConfig{{m * g.ap_spacing_m, 0.0}, g.server_cycles_per_slot,
                              g.radio.max_subcarriers});
  }
  const double p_region1 = g.ratio_region1 / (g.ratio_region1 + g.ratio_region2);
  const int total = g.num_urllc + g.num_dt;
  for (int k = 0; k < total; ++k) {
    UserProfile u;
    u.service_class = k < g.num_urllc ? ServiceClass::urllc : ServiceClass::delay_tolerant;
    const int region = rng_uniform(rng) < p_region1 ? 0 : 1;
    const int anchor = std::min(region, g.num_aps - 1);
    const double radius = g.region_radius_m * std::sqrt(rng_uniform(rng));
    const double angle = 2.0 * std::numbers::pi * rng_uniform(rng);
    u.position_m = {sc.aps[anchor].position_m[0] + radius * std::cos(angle),
                    sc.aps[anchor].position_m[1] + radius * std::sin(angle)};
    for (int m = 0; m < g.num_aps; ++m) {
      const double dx = u.position_m[0] - sc.aps[m].position_m[0];
      const double dy = u.position_m[1] - sc.aps[m].position_m[1];
      const double d = std::max(g.min_distance_m, std::hypot(dx, dy));
      const double shadow = rng_normal(rng, 0.0, g.shadowing_std_db);
      u.gains.push_back(LinkGain{path_loss_gain(d, shadow), d, shadow});
    }
    u.local.k0 = g.k0;
    u.local.max_cycles_per_slot = g.max_local_cycles_per_slot;
    if (u.service_class == ServiceClass::urllc) {
      u.arrival_per_slot = g.lambda_urllc_per_s * g.radio.slot_s;
      u.packet_bits = g.urllc_packet_bytes * 8.0;
      u.packet_cycles = g.cycles_per_byte * g.urllc_packet_bytes;
    } else {
      u.arrival_per_slot =
          rng_uniform(rng, g.lambda_dt_min_per_s, g.lambda_dt_max_per_s) * g.radio.slot_s;
      const double bytes = rng_uniform(rng, g.dt_packet_min_kb, g.dt_packet_max_kb) * 1024.0;
      u.packet_bits = bytes * 8.0;
      u.packet_cycles = g.cycles_per_byte * bytes;
    }
    sc.users.push_back(std::move(u));
  }
  return sc;
}

}  // namespace edgetwin
