#pragma once
// Scenario snapshots as versioned JSON documents so twin states replay across
// runs and machines.

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "edgetwin/digital_twin.hpp"

namespace edgetwin {

inline constexpr const char* kScenarioSchema = "edgetwin.scenario/1";

inline nlohmann::json to_json(const Scenario& sc) {
  nlohmann::json j;
  j["schema"] = kScenarioSchema;
  j["seed"] = sc.seed;
  j["radio"] = {{"subcarrier_hz", sc.radio.subcarrier_hz},
                {"noise_w_per_hz", sc.radio.noise_w_per_hz},
                {"slot_s", sc.radio.slot_s},
                {"snr_loss", sc.radio.snr_loss},
                {"max_subcarriers", sc.radio.max_subcarriers},
                {"max_tx_power_w", sc.radio.max_tx_power_w}};
  j["qos"] = {{"max_delay_slots", sc.qos.max_delay_slots},
              {"max_violation_prob", sc.qos.max_violation_prob}};
  j["aps"] = nlohmann::json::array();
  for (const auto& ap : sc.aps) {
    j["aps"].push_back({{"position_m", {ap.position_m[0], ap.position_m[1]}},
                        {"server_cycles_per_slot", ap.server_cycles_per_slot},
                        {"max_subcarriers", ap.max_subcarriers}});
  }
  j["users"] = nlohmann::json::array();
  for (const auto& u : sc.users) {
    nlohmann::json ju;
    ju["service_class"] = u.service_class == ServiceClass::urllc ? "urllc" : "dt";
    ju["arrival_per_slot"] = u.arrival_per_slot;
    ju["packet_bits"] = u.packet_bits;
    ju["packet_cycles"] = u.packet_cycles;
    ju["position_m"] = {u.position_m[0], u.position_m[1]};
    ju["k0"] = u.local.k0;
    ju["max_cycles_per_slot"] = u.local.max_cycles_per_slot;
    ju["gains"] = nlohmann::json::array();
    for (const auto& g : u.gains) {
      ju["gains"].push_back(
          {{"alpha", g.alpha}, {"distance_m", g.distance_m}, {"shadowing_db", g.shadowing_db}});
    }
    j["users"].push_back(std::move(ju));
  }
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.contains("schema") || j["schema"] != kScenarioSchema) {
    throw std::runtime_error("scenario_from_json: unknown schema");
  }
  Scenario sc;
  sc.seed = j["seed"].get<std::uint64_t>();
  const auto& jr = j["radio"];
  sc.radio.subcarrier_hz = jr["subcarrier_hz"];
  sc.radio.noise_w_per_hz = jr["noise_w_per_hz"];
  sc.radio.slot_s = jr["slot_s"];
  sc.radio.snr_loss = jr["snr_loss"];
  sc.radio.max_subcarriers = jr["max_subcarriers"];
  sc.radio.max_tx_power_w = jr["max_tx_power_w"];
  sc.qos.max_delay_slots = j["qos"]["max_delay_slots"];
  sc.qos.max_violation_prob = j["qos"]["max_violation_prob"];
  for (const auto& ja : j["aps"]) {
    ApConfig ap;
    ap.position_m = {ja["position_m"][0], ja["position_m"][1]};
    ap.server_cycles_per_slot = ja["server_cycles_per_slot"];
    ap.max_subcarriers = ja["max_subcarriers"];
    sc.aps.push_back(ap);
  }
  for (const auto& ju : j["users"]) {
    UserProfile u;
    u.service_class =
        ju["service_class"] == "urllc" ? ServiceClass::urllc : ServiceClass::delay_tolerant;
    u.arrival_per_slot = ju["arrival_per_slot"];
    u.packet_bits = ju["packet_bits"];
    u.packet_cycles = ju["packet_cycles"];
    u.position_m = {ju["position_m"][0], ju["position_m"][1]};
    u.local.k0 = ju["k0"];
    u.local.max_cycles_per_slot = ju["max_cycles_per_slot"];
    for (const auto& jg : ju["gains"]) {
      u.gains.push_back(LinkGain{jg["alpha"], jg["distance_m"], jg["shadowing_db"]});
    }
    sc.users.push_back(std::move(u));
  }
  return sc;
}

inline void save_scenario(const std::string& path, const Scenario& sc) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_scenario: cannot open " + path);
  os << to_json(sc).dump(2) << '\n';
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_scenario: cannot open " + path);
  nlohmann::json j;
  is >> j;
  return scenario_from_json(j);
}

}  // namespace edgetwin
