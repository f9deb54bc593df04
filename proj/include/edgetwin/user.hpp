#pragma once
// Per-user traffic profile shared by the AP optimizer and the digital twin.

#include <array>
#include <vector>

#include "edgetwin/energy.hpp"
#include "edgetwin/phy.hpp"

namespace edgetwin {

enum class ServiceClass { urllc, delay_tolerant };

struct UserProfile {
  ServiceClass service_class = ServiceClass::urllc;
  double arrival_per_slot = 0.0;  // lambda, packets/slot
  double packet_bits = 0.0;       // b (mean for delay-tolerant)
  double packet_cycles = 0.0;     // c = k1 * bytes (mean for delay-tolerant)
  std::array<double, 2> position_m{0.0, 0.0};
  LocalCompute local;             // k0 and C^max of the device
  std::vector<LinkGain> gains;    // one entry per AP
};

}  // namespace edgetwin
