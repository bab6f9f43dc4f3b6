#include "qnd/params.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qnd {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void SystemParams::validate() const {
    require(finite(omega0) && finite(lambda00) && finite(nu) && finite(N0),
            "SystemParams: all fields must be finite");
    require(nu > 0.0, "SystemParams: nu must be > 0");
    require(N0 >= 0.0, "SystemParams: N0 must be >= 0");
}

double AncillaParams::combined_occupation() const {
    const double k = kappa();
    if (k <= 0.0) throw std::invalid_argument("AncillaParams: kappa must be > 0");
    return (damping_thermal * occupation_thermal +
            damping_measurement * occupation_measurement) / k;
}

void AncillaParams::validate() const {
    require(finite(delta_omega) && finite(lambda11) && finite(epsilon) &&
                finite(damping_thermal) && finite(damping_measurement) &&
                finite(occupation_thermal) && finite(occupation_measurement),
            "AncillaParams: all fields must be finite");
    require(damping_thermal >= 0.0 && damping_measurement >= 0.0,
            "AncillaParams: damping rates must be >= 0");
    require(kappa() > 0.0, "AncillaParams: kappa = eta + mu must be > 0");
    require(epsilon >= 0.0, "AncillaParams: epsilon must be >= 0");
    require(occupation_thermal >= 0.0 && occupation_measurement >= 0.0,
            "AncillaParams: occupations must be >= 0");
}

void CouplingParams::validate() const {
    require(finite(lambda01), "CouplingParams: lambda01 must be finite");
}

void BeamGeometry::validate() const {
    require(bulk_modulus > 0.0 && density > 0.0 && length > 0.0 &&
                width > 0.0 && thickness > 0.0 && mode_frequency > 0.0,
            "BeamGeometry: all fields must be > 0");
    require(finite(bulk_modulus) && finite(density) && finite(length) &&
                finite(width) && finite(thickness) && finite(mode_frequency),
            "BeamGeometry: all fields must be finite");
}

double bose_occupation(double omega, double temperature) {
    if (!(omega > 0.0)) throw std::domain_error("bose_occupation: omega must be > 0");
    if (temperature < 0.0) throw std::domain_error("bose_occupation: T must be >= 0");
    if (temperature == 0.0) return 0.0;
    const double x = constants::hbar * omega / (constants::k_boltzmann * temperature);
    // expm1 keeps the high-temperature limit kB T / (hbar omega) accurate.
    return 1.0 / std::expm1(x);
}

double nu_from_quality(double omega0, double Q0) {
    if (!(Q0 > 0.0)) throw std::domain_error("nu_from_quality: Q0 must be > 0");
    return omega0 / (2.0 * Q0);
}

double beam_anharmonicity(const BeamGeometry& g) {
    g.validate();
    const double pi = 3.14159265358979323846;
    const double pi4 = pi * pi * pi * pi;
    return pi4 / 128.0 * constants::hbar * g.bulk_modulus /
           (g.density * g.density * g.mode_frequency * g.mode_frequency *
            std::pow(g.length, 5) * g.width * g.thickness);
}

}  // namespace qnd
