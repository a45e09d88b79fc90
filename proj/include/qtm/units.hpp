// units.hpp - Physical constants and the conversions between lab units and
// the internal natural units used by every engine.
//
// Internally hbar = k_B = 1 and time is measured in nanoseconds, so angular
// frequencies, rates and temperatures are all expressed in rad/ns. Lab-facing
// quantities (GHz ordinary frequency, mK, pA, aW, uV) are converted only at
// the boundary.

#pragma once

#include <numbers>

namespace qtm::units {

// CODATA 2018 exact SI values.
inline constexpr double planck = 6.62607015e-34;        // J s
inline constexpr double hbar = planck / (2.0 * std::numbers::pi);
inline constexpr double boltzmann = 1.380649e-23;       // J / K
inline constexpr double elementary_charge = 1.602176634e-19; // C

inline constexpr double per_ns = 1e9;  // internal rate -> 1/s

// Ordinary frequency in GHz -> angular frequency in rad/ns.
constexpr double ghz(double f_ghz) { return 2.0 * std::numbers::pi * f_ghz; }
constexpr double to_ghz(double omega) { return omega / (2.0 * std::numbers::pi); }

// k_B T / hbar for T = 1 mK, in rad/ns.
inline constexpr double millikelvin = boltzmann * 1e-3 / hbar / per_ns;

constexpr double mk(double t_mk) { return t_mk * millikelvin; }
constexpr double to_mk(double t) { return t / millikelvin; }

// Photon (or Cooper-pair) flow in 1/ns -> charge current in pA for a carrier
// of charge q (coulomb).
constexpr double flow_to_pa(double flow, double charge) { return charge * flow * per_ns * 1e12; }

// Energy current omega * rate (rad/ns * 1/ns) -> attowatt.
constexpr double energy_flow_to_aw(double value) { return hbar * value * per_ns * per_ns * 1e18; }

constexpr double pa_to_ampere(double i_pa) { return i_pa * 1e-12; }
constexpr double watt_to_aw(double p) { return p * 1e18; }

} // namespace qtm::units
