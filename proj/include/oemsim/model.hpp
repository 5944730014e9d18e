#pragma once

// Physical parameters of the atom-assisted opto-electro-mechanical system,
// derived couplings, and the classical working point around which the
// fluctuation dynamics are linearized.
//
// Units are SI throughout: angular frequencies and rates in rad/s, lengths in
// metres, mass in kg, powers in W, temperature in K.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "oemsim/constants.hpp"
#include "oemsim/errors.hpp"

namespace oemsim {

using complex = std::complex<double>;

inline constexpr double unset = std::numeric_limits<double>::quiet_NaN();

struct SystemParameters {
  double omega_m = unset;       // mechanical frequency
  double omega_w = unset;       // microwave cavity frequency
  double lambda_oc = unset;     // optical drive wavelength
  double cavity_length = unset; // optical cavity length
  double plate_gap = unset;     // capacitor plate spacing d
  double mu = unset;            // capacitance participation ratio
  double mass = unset;          // effective mechanical mass
  double temperature = unset;
  double gamma_m = unset;
  double kappa_c = unset;
  double kappa_w = unset;
  double kappa_a = unset; // no global default; every preset sets it
  double power_c = unset;
  double power_w = unset;
  double g = unset;   // atom-cavity coupling
  double r_a = unset; // atom injection rate
  double rho_aa0 = unset;
  double rho_cc0 = unset;
  double rho_ca0 = unset;
  double delta_a1 = unset;
  double delta_a2 = unset;
  double delta_c = unset; // effective optical detuning
  double delta_w = unset; // effective microwave detuning

  bool operator==(const SystemParameters&) const = default;
};

/// Which positivity rule a field obeys.
enum class FieldRule {
  positive,     // > 0
  non_negative, // >= 0
  unit_interval,
  any_sign,
};

struct ParameterField {
  std::string_view name;
  double SystemParameters::*member;
  FieldRule rule;
  bool rate; // accepts the `<name>_over_omega_m` form in config files
};

inline constexpr std::array<ParameterField, 23> parameter_fields{{
    {"omega_m", &SystemParameters::omega_m, FieldRule::positive, false},
    {"omega_w", &SystemParameters::omega_w, FieldRule::positive, true},
    {"lambda_oc", &SystemParameters::lambda_oc, FieldRule::positive, false},
    {"cavity_length", &SystemParameters::cavity_length, FieldRule::positive, false},
    {"plate_gap", &SystemParameters::plate_gap, FieldRule::positive, false},
    {"mu", &SystemParameters::mu, FieldRule::positive, false},
    {"mass", &SystemParameters::mass, FieldRule::positive, false},
    {"temperature", &SystemParameters::temperature, FieldRule::non_negative, false},
    {"gamma_m", &SystemParameters::gamma_m, FieldRule::positive, true},
    {"kappa_c", &SystemParameters::kappa_c, FieldRule::positive, true},
    {"kappa_w", &SystemParameters::kappa_w, FieldRule::positive, true},
    {"kappa_a", &SystemParameters::kappa_a, FieldRule::positive, true},
    {"power_c", &SystemParameters::power_c, FieldRule::non_negative, false},
    {"power_w", &SystemParameters::power_w, FieldRule::non_negative, false},
    {"g", &SystemParameters::g, FieldRule::non_negative, true},
    {"r_a", &SystemParameters::r_a, FieldRule::non_negative, false},
    {"rho_aa0", &SystemParameters::rho_aa0, FieldRule::unit_interval, false},
    {"rho_cc0", &SystemParameters::rho_cc0, FieldRule::unit_interval, false},
    {"rho_ca0", &SystemParameters::rho_ca0, FieldRule::any_sign, false},
    {"delta_a1", &SystemParameters::delta_a1, FieldRule::any_sign, true},
    {"delta_a2", &SystemParameters::delta_a2, FieldRule::any_sign, true},
    {"delta_c", &SystemParameters::delta_c, FieldRule::any_sign, true},
    {"delta_w", &SystemParameters::delta_w, FieldRule::any_sign, true},
}};

inline const ParameterField* find_field(std::string_view name) {
  for (const auto& f : parameter_fields)
    if (f.name == name)
      return &f;
  return nullptr;
}

inline double& field_ref(SystemParameters& p, std::string_view name) {
  const auto* f = find_field(name);
  if (!f)
    throw ValidationError(std::string(name), "not a SystemParameters field");
  return p.*(f->member);
}

inline double field_value(const SystemParameters& p, std::string_view name) {
  return field_ref(const_cast<SystemParameters&>(p), name);
}

/// Throws ValidationError naming the first field that breaks an invariant.
inline void validate(const SystemParameters& p) {
  for (const auto& f : parameter_fields) {
    const double v = p.*(f.member);
    const std::string name(f.name);
    if (std::isnan(v))
      throw ValidationError(name, "is not set (no default exists)");
    if (!std::isfinite(v))
      throw ValidationError(name, "must be finite");
    switch (f.rule) {
    case FieldRule::positive:
      if (!(v > 0.0))
        throw ValidationError(name, "must be strictly positive");
      break;
    case FieldRule::non_negative:
      if (v < 0.0)
        throw ValidationError(name, "must be non-negative");
      break;
    case FieldRule::unit_interval:
      if (v < 0.0 || v > 1.0)
        throw ValidationError(name, "must lie in [0, 1]");
      break;
    case FieldRule::any_sign:
      break;
    }
  }
  if (std::abs(p.rho_ca0) > std::sqrt(p.rho_aa0 * p.rho_cc0) + 1e-12)
    throw ValidationError("rho_ca0", "violates |rho_ca0| <= sqrt(rho_aa0 rho_cc0)");
}

// ---------------------------------------------------------------------------
// Derived quantities

/// Bose-Einstein occupation 1/(exp(hbar w / kB T) - 1). Exactly 0 at T = 0.
inline double thermal_occupation(double omega, double temperature) {
  if (!(omega > 0.0))
    throw DomainError("thermal_occupation: omega must be > 0");
  if (!(temperature >= 0.0))
    throw DomainError("thermal_occupation: temperature must be >= 0");
  if (temperature == 0.0)
    return 0.0;
  const double x = constants::hbar * omega / (constants::k_boltzmann * temperature);
  return 1.0 / std::expm1(x);
}

inline double optical_drive_frequency(double lambda_oc) {
  if (!(lambda_oc > 0.0))
    throw DomainError("optical_drive_frequency: wavelength must be > 0");
  return constants::two_pi * constants::speed_of_light / lambda_oc;
}

/// Drive amplitude sqrt(2 P kappa / (hbar omega_drive)) of a cavity pumped
/// with power P through a port of decay rate kappa.
inline double drive_amplitude(double power, double kappa, double omega_drive) {
  if (!(power >= 0.0) || !(kappa > 0.0) || !(omega_drive > 0.0))
    throw DomainError("drive_amplitude: need power >= 0, kappa > 0, omega_drive > 0");
  return std::sqrt(2.0 * power * kappa / (constants::hbar * omega_drive));
}

struct DriveAmplitudes {
  double e_c;
  double e_w;
};

/// The microwave drive is taken at omega_w (omega_ow differs from it only by a
/// detuning of order omega_m, which is below the precision of the inputs).
inline DriveAmplitudes drive_amplitudes(const SystemParameters& p) {
  return {drive_amplitude(p.power_c, p.kappa_c, optical_drive_frequency(p.lambda_oc)),
          drive_amplitude(p.power_w, p.kappa_w, p.omega_w)};
}

struct DerivedQuantities {
  double omega_oc;
  double g_oc_bare; // optomechanical coupling per unit dimensionless position
  double g_ow_bare; // electromechanical coupling per unit dimensionless position
  double e_c;
  double e_w;
  double n_mech; // thermal phonon number
  double n_w;    // thermal microwave photon number
};

inline DerivedQuantities derive(const SystemParameters& p) {
  const double omega_oc = optical_drive_frequency(p.lambda_oc);
  const double zpf = std::sqrt(constants::hbar / (p.mass * p.omega_m));
  const auto drives = drive_amplitudes(p);
  return {
      .omega_oc = omega_oc,
      // omega_c ~ omega_oc at the precision of the inputs
      .g_oc_bare = omega_oc / p.cavity_length * zpf,
      .g_ow_bare = p.mu * p.omega_w / (2.0 * p.plate_gap) * zpf,
      .e_c = drives.e_c,
      .e_w = drives.e_w,
      .n_mech = thermal_occupation(p.omega_m, p.temperature),
      .n_w = thermal_occupation(p.omega_w, p.temperature),
  };
}

// ---------------------------------------------------------------------------
// Classical steady state

struct SteadyState {
  double q_s = 0.0;
  double p_s = 0.0;
  complex alpha_s;
  complex beta_s;
  complex sigma_ba_s;
  complex sigma_cb_s;
  double G_c = 0.0; // sqrt(2) G_oc |alpha_s|
  double G_w = 0.0; // sqrt(2) G_ow |beta_s|
  double delta_c = 0.0;
  double delta_w = 0.0;
};

/// Linear response sigma_ba_s = coeff * alpha_s (first) and
/// sigma_cb_s = coeff * alpha_s (second) of the atomic coherences.
inline std::pair<complex, complex> atomic_coherence_coefficients(const SystemParameters& p) {
  constexpr complex i{0.0, 1.0};
  const complex ba = i * p.g * p.r_a * (p.rho_ca0 + p.rho_aa0) / complex(p.kappa_a, p.delta_a1);
  const complex cb = -i * p.g * p.r_a * (p.rho_ca0 + p.rho_cc0) / complex(p.kappa_a, -p.delta_a2);
  return {ba, cb};
}

namespace detail {

inline SteadyState steady_state_at(const SystemParameters& p, const DerivedQuantities& dq,
                                   double delta_c, double delta_w) {
  constexpr complex i{0.0, 1.0};
  const auto [ba, cb] = atomic_coherence_coefficients(p);
  const complex pole = i * delta_c + p.kappa_c + i * p.g * (ba + cb);
  if (std::abs(pole) < 1e-30)
    throw SingularityError("solve_steady_state: optical response has a pole at these parameters");

  SteadyState ss;
  ss.delta_c = delta_c;
  ss.delta_w = delta_w;
  ss.alpha_s = dq.e_c / pole;
  ss.sigma_ba_s = ba * ss.alpha_s;
  ss.sigma_cb_s = cb * ss.alpha_s;
  ss.beta_s = dq.e_w / complex(p.kappa_w, delta_w);
  ss.p_s = 0.0;
  ss.q_s = (dq.g_oc_bare * std::norm(ss.alpha_s) + dq.g_ow_bare * std::norm(ss.beta_s)) / p.omega_m;
  ss.G_c = std::sqrt(2.0) * dq.g_oc_bare * std::abs(ss.alpha_s);
  ss.G_w = std::sqrt(2.0) * dq.g_ow_bare * std::abs(ss.beta_s);
  return ss;
}

} // namespace detail

/// Working point for given effective detunings (params.delta_c, params.delta_w).
inline SteadyState solve_steady_state(const SystemParameters& p) {
  validate(p);
  return detail::steady_state_at(p, derive(p), p.delta_c, p.delta_w);
}

struct BareDetunings {
  double delta_oc;
  double delta_ow;
};

struct FixedPointOptions {
  int max_iterations = 10000;
  double damping = 0.5;
  double rel_tol = 1e-13;
  double abs_tol = 1e-14;
};

/// Self-consistent working point when the bare detunings are given; the
/// effective ones follow from the radiation-pressure displacement,
/// delta_c = delta_oc - G_oc q_s and delta_w = delta_ow - G_ow q_s.
/// The effective detunings stored in `p` are ignored.
inline SteadyState solve_steady_state_bare(const SystemParameters& p, BareDetunings bare,
                                           FixedPointOptions opt = {}) {
  SystemParameters checked = p;
  checked.delta_c = bare.delta_oc;
  checked.delta_w = bare.delta_ow;
  validate(checked);
  if (!(opt.damping > 0.0 && opt.damping <= 1.0))
    throw DomainError("solve_steady_state_bare: damping must lie in (0, 1]");
  const auto dq = derive(p);

  auto at = [&](double q) {
    return detail::steady_state_at(p, dq, bare.delta_oc - dq.g_oc_bare * q,
                                   bare.delta_ow - dq.g_ow_bare * q);
  };

  double q = 0.0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const double q_next = at(q).q_s;
    if (!std::isfinite(q_next))
      break;
    if (std::abs(q_next - q) <= opt.rel_tol * std::abs(q_next) + opt.abs_tol)
      return at(q_next);
    q = (1.0 - opt.damping) * q + opt.damping * q_next;
  }
  throw ConvergenceError("solve_steady_state_bare: no self-consistent displacement after " +
                         std::to_string(opt.max_iterations) +
                         " iterations (bistable or unstable classical branch)");
}

} // namespace oemsim
