// params.hpp - Machine parameters, bath state and the equilibrium helpers
// shared by the Fock and Gaussian engines.

#pragma once

#include <cmath>
#include <string>

#include "qtm/errors.hpp"
#include "qtm/units.hpp"

namespace qtm {

// All fields in internal units (rad/ns); lambdas are dimensionless.
struct MachineParams {
    double omega_c{units::ghz(1.0)};
    double omega_h{units::ghz(8.5)};
    double kappa_c{units::ghz(0.06)};
    double kappa_h{units::ghz(0.06)};
    double ej{units::ghz(0.2)};      // Josephson energy as an angular frequency
    double lambda_c{0.3};
    double lambda_h{0.3};

    // Positivity of every frequency and rate. The omega_h > omega_c ordering
    // is only required where a bias voltage is needed (see resonance_voltage).
    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw DomainError(std::string("MachineParams: ") + name + " must be positive");
        };
        positive(omega_c, "omega_c");
        positive(omega_h, "omega_h");
        positive(kappa_c, "kappa_c");
        positive(kappa_h, "kappa_h");
        positive(lambda_c, "lambda_c");
        positive(lambda_h, "lambda_h");
        if (!(ej >= 0.0)) throw DomainError("MachineParams: ej must be non-negative");
    }

    // I_c = 2 e E_J / hbar, in pA.
    double critical_current_pa() const {
        return units::flow_to_pa(ej, 2.0 * units::elementary_charge);
    }
};

// Noise on the two lab readings.
struct MeasurementNoise {
    double delta_i_pa{0.3};
    double delta_th_mk{10.0};
};

// Mean occupation 1/(exp(omega/T) - 1), internal units. T = 0 gives 0.
inline double thermal_occupation(double omega, double temperature) {
    if (!(omega > 0.0)) throw DomainError("thermal_occupation: omega must be positive");
    if (temperature < 0.0) throw DomainError("thermal_occupation: negative temperature");
    if (temperature == 0.0) return 0.0;
    return 1.0 / std::expm1(omega / temperature);
}

// Temperatures (internal units) and the matching bath occupations.
struct BathState {
    double t_c{0.0};
    double t_h{0.0};
    double n_c{0.0};
    double n_h{0.0};

    static BathState make(const MachineParams& p, double t_c, double t_h) {
        return {t_c, t_h, thermal_occupation(p.omega_c, t_c), thermal_occupation(p.omega_h, t_h)};
    }
    static BathState from_mk(const MachineParams& p, double tc_mk, double th_mk) {
        return make(p, units::mk(tc_mk), units::mk(th_mk));
    }
};

// Hot temperature at which Omega_c / T_c = Omega_h / T_h.
inline double carnot_hot_temperature(double t_c, const MachineParams& p) {
    if (!(t_c > 0.0)) throw DomainError("carnot_hot_temperature: T_c must be positive");
    return t_c * p.omega_h / p.omega_c;
}

inline double carnot_hot_temperature_mk(double tc_mk, const MachineParams& p) {
    return units::to_mk(carnot_hot_temperature(units::mk(tc_mk), p));
}

// Bias voltage (volts) satisfying the resonance 2 e V = hbar (Omega_h - Omega_c).
inline double resonance_voltage(const MachineParams& p) {
    if (p.omega_h < p.omega_c)
        throw DomainError("resonance_voltage: omega_h must not be below omega_c");
    return units::hbar * (p.omega_h - p.omega_c) * units::per_ns / (2.0 * units::elementary_charge);
}

} // namespace qtm
