#pragma once

// One-dimensional parameter sweeps of the full pipeline
//   steady state -> drift/diffusion -> stability gate -> Lyapunov -> E_N
// plus the named figure presets.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "oemsim/constants.hpp"
#include "oemsim/dynamics.hpp"
#include "oemsim/errors.hpp"
#include "oemsim/gaussian.hpp"
#include "oemsim/model.hpp"

namespace oemsim {

inline constexpr std::array<BipartitePair, 3> kBosonicPairs{
    BipartitePair::mr_oc, BipartitePair::mr_mc, BipartitePair::oc_mc};

struct Axis {
  std::string parameter = "delta_c";
  std::string normalize_by = "omega_m"; // empty: grid values are absolute

  std::string label() const {
    return normalize_by.empty() ? parameter : parameter + "/" + normalize_by;
  }
};

struct Grid {
  double start = -2.0;
  double stop = 2.0;
  int count = 401;

  std::vector<double> values() const {
    std::vector<double> xs(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
      xs[static_cast<std::size_t>(i)] = start + (stop - start) * i / (count - 1);
    return xs;
  }
};

struct SweepSpec {
  std::string name;
  std::string description;
  SystemParameters base;
  Axis axis;
  Grid grid;
  std::vector<BipartitePair> pairs;
  bool baseline = false;
  std::vector<std::string> notes;
};

struct PointRecord {
  double x = 0.0;     // grid coordinate (normalized)
  double value = 0.0; // varied parameter in SI units
  bool stable = false;
  double max_real_part = unset; // dimensionless, units of omega_m
  std::array<std::optional<double>, kPairCount> e_n{};
  std::optional<bool> heisenberg_ok;
  bool ill_conditioned = false;

  bool baseline_evaluated = false;
  bool baseline_stable = false;
  std::array<std::optional<double>, kBosonicPairs.size()> baseline_e_n{};

  std::vector<std::string> errors;

  std::optional<double> en(BipartitePair p) const { return e_n[static_cast<int>(p)]; }
};

struct SweepResult {
  SweepSpec spec;
  std::vector<PointRecord> records;

  int stable_count() const {
    return static_cast<int>(std::count_if(records.begin(), records.end(),
                                          [](const PointRecord& r) { return r.stable; }));
  }
};

// ---------------------------------------------------------------------------
// Point evaluation

template <int N>
struct GatedEvaluation {
  StabilityReport stability;
  std::optional<CovarianceMatrix<N>> cm;
  bool ill_conditioned = false;
  std::array<std::optional<double>, kPairCount> e_n{};
  std::vector<std::string> errors;
};

/// Stability gate followed by the Lyapunov solve and E_N of each pair. An
/// unstable drift never produces a covariance or an E_N value.
template <int N>
GatedEvaluation<N> evaluate_gated(const DriftMatrix<N>& drift, const DiffusionMatrix<N>& diffusion,
                                  const std::vector<BipartitePair>& pairs) {
  GatedEvaluation<N> out;
  out.stability = is_stable(drift);
  if (!out.stability.stable)
    return out;
  const auto sol = solve_lyapunov<N>(drift.a, diffusion.d);
  out.cm = sol.cm;
  out.ill_conditioned = sol.ill_conditioned;
  for (const auto pair : pairs) {
    try {
      out.e_n[static_cast<int>(pair)] = log_negativity(sol.cm.v, pair).e_n;
    } catch (const Error& e) {
      out.errors.push_back(std::string(info(pair).tag) + ": " + e.what());
    }
  }
  return out;
}

/// Full pipeline at one parameter point. Numerical failures become error
/// entries on the record rather than exceptions.
inline PointRecord evaluate_point(const SystemParameters& params,
                                  const std::vector<BipartitePair>& pairs, bool baseline = false) {
  PointRecord rec;
  try {
    const auto ss = solve_steady_state(params);
    const auto gated = evaluate_gated(build_drift(params, ss), build_diffusion(params), pairs);
    rec.stable = gated.stability.stable;
    rec.max_real_part = gated.stability.max_real_part;
    rec.e_n = gated.e_n;
    rec.ill_conditioned = gated.ill_conditioned;
    rec.errors = gated.errors;
    if (gated.cm)
      rec.heisenberg_ok = satisfies_heisenberg(gated.cm->v);
  } catch (const Error& e) {
    rec.stable = false;
    rec.errors.emplace_back(e.what());
  }

  if (baseline) {
    rec.baseline_evaluated = true;
    try {
      SystemParameters bare = params;
      bare.g = 0.0;
      const auto ss = solve_steady_state(bare);
      std::vector<BipartitePair> bosonic;
      for (const auto p : pairs)
        if (info(p).bosonic)
          bosonic.push_back(p);
      const auto gated = evaluate_gated(atom_free_block(build_drift(bare, ss)),
                                        atom_free_block(build_diffusion(bare)), bosonic);
      rec.baseline_stable = gated.stability.stable;
      for (std::size_t k = 0; k < kBosonicPairs.size(); ++k)
        rec.baseline_e_n[k] = gated.e_n[static_cast<int>(kBosonicPairs[k])];
      for (const auto& err : gated.errors)
        rec.errors.push_back("baseline " + err);
    } catch (const Error& e) {
      rec.errors.push_back(std::string("baseline: ") + e.what());
    }
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Sweeps

inline void validate_spec(const SweepSpec& spec) {
  if (spec.grid.count < 2)
    throw SpecError("grid needs at least 2 points");
  if (!std::isfinite(spec.grid.start) || !std::isfinite(spec.grid.stop) ||
      spec.grid.start == spec.grid.stop)
    throw SpecError("grid must be finite and strictly monotone");
  if (!find_field(spec.axis.parameter))
    throw SpecError("varied parameter '" + spec.axis.parameter + "' is not a SystemParameters field");
  if (!spec.axis.normalize_by.empty()) {
    if (!find_field(spec.axis.normalize_by))
      throw SpecError("normalization '" + spec.axis.normalize_by + "' is not a SystemParameters field");
    if (spec.axis.normalize_by == spec.axis.parameter)
      throw SpecError("axis cannot be normalized by itself");
  }
  if (spec.pairs.empty())
    throw SpecError("no bipartitions requested");
}

/// Parameters at grid coordinate x.
inline SystemParameters at_grid_point(const SweepSpec& spec, double x) {
  SystemParameters p = spec.base;
  const double unit = spec.axis.normalize_by.empty() ? 1.0 : field_value(p, spec.axis.normalize_by);
  field_ref(p, spec.axis.parameter) = x * unit;
  return p;
}

/// One record per grid point, in grid order. With jobs > 1 the points are
/// evaluated concurrently; each is a pure function of its inputs, so the
/// output does not depend on the job count.
inline SweepResult run_sweep(const SweepSpec& spec, int jobs = 1) {
  validate_spec(spec);
  const auto xs = spec.grid.values();
  SweepResult result{spec, std::vector<PointRecord>(xs.size())};

  auto work = [&](std::size_t i) {
    const auto params = at_grid_point(spec, xs[i]);
    auto rec = evaluate_point(params, spec.pairs, spec.baseline);
    rec.x = xs[i];
    rec.value = field_value(params, spec.axis.parameter);
    result.records[i] = std::move(rec);
  };

  if (jobs <= 0)
    jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min<int>(jobs, static_cast<int>(xs.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < xs.size(); ++i)
      work(i);
    return result;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  workers.reserve(static_cast<std::size_t>(jobs));
  for (int w = 0; w < jobs; ++w)
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < xs.size(); i = next++)
        work(i);
    });
  workers.clear(); // join
  return result;
}

// ---------------------------------------------------------------------------
// CSV output

inline std::string format_double(double v) {
  if (!std::isfinite(v))
    return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string{};
}

inline void write_csv_header(std::ostream& os) {
  os << "x_value,x_axis,stable,max_real_part";
  for (const auto& e : pair_table)
    os << ",en_" << e.key;
  for (const auto p : kBosonicPairs)
    os << ",en_baseline_" << info(p).key;
  os << '\n';
}

inline void write_csv_row(std::ostream& os, const PointRecord& r, const std::string& axis_label) {
  os << format_double(r.x) << ',' << axis_label << ',' << (r.stable ? "true" : "false") << ','
     << format_double(r.max_real_part);
  for (const auto& v : r.e_n)
    os << ',' << format_optional(v);
  for (const auto& v : r.baseline_e_n)
    os << ',' << format_optional(v);
  os << '\n';
}

inline void write_csv(std::ostream& os, const SweepResult& result) {
  write_csv_header(os);
  const auto label = result.spec.axis.label();
  for (const auto& r : result.records)
    write_csv_row(os, r, label);
}

// ---------------------------------------------------------------------------
// Presets

namespace presets {

inline constexpr double omega_m = constants::two_pi * 1e7;
inline constexpr double quality_factor = 5e4;
inline constexpr double finesse = 4.07e4;

/// Common laboratory parameters. Atom coupling, injection rate and atomic
/// decay are left unset; each preset supplies them.
inline SystemParameters baseline_parameters() {
  SystemParameters p;
  p.omega_m = omega_m;
  p.omega_w = constants::two_pi * 1e7;
  p.lambda_oc = 810e-9;
  p.cavity_length = 1e-3;
  p.plate_gap = 100e-9;
  p.mu = 0.008;
  p.mass = 10e-12;
  p.temperature = 15e-3;
  p.gamma_m = omega_m / quality_factor;
  p.kappa_c = 0.08 * omega_m;
  p.kappa_w = 0.02 * omega_m;
  p.power_c = 30e-3;
  p.power_w = 30e-3;
  p.rho_aa0 = 0.5;
  p.rho_cc0 = 0.5;
  p.rho_ca0 = 0.5;
  p.delta_a1 = constants::two_pi * 1e7;
  p.delta_a2 = constants::two_pi * 1e7;
  p.delta_c = omega_m;
  p.delta_w = omega_m;
  return p;
}

inline SweepSpec fig2() {
  SweepSpec s;
  s.name = "fig2";
  s.description = "E_N(MR-OC) vs delta_c/omega_m, with and without injected atoms";
  s.base = baseline_parameters();
  auto& p = s.base;
  p.gamma_m = 200.0 * constants::pi;
  p.kappa_c = 0.1 * omega_m;
  p.kappa_w = 0.08 * omega_m;
  p.delta_w = omega_m;
  p.r_a = 1.6e5;
  p.g = constants::two_pi * 8e5;
  p.delta_a1 = constants::two_pi * 1e10;
  p.delta_a2 = constants::two_pi * 1e7;
  p.kappa_a = constants::two_pi * 1e5;
  s.pairs = {BipartitePair::mr_oc};
  s.baseline = true;
  s.notes = {
      "gamma_m = 200 pi rad/s from the caption overrides gamma_m = omega_m/Q of the baseline list",
      "kappa_a is not specified for this scenario; 2 pi x 1e5 rad/s assumed",
  };
  return s;
}

inline SweepSpec fig3() {
  SweepSpec s = fig2();
  s.name = "fig3";
  s.description = "E_N(MR-MC) vs delta_c/omega_m, with and without injected atoms";
  auto& p = s.base;
  p.kappa_c = 0.08 * omega_m;
  p.r_a = 2000.0;
  p.delta_a1 = constants::two_pi * 1e7;
  p.delta_a2 = constants::two_pi * 1e7;
  p.gamma_m = omega_m / quality_factor;
  p.g = constants::two_pi * 1e5;
  p.kappa_a = constants::two_pi * 1e5;
  p.delta_w = omega_m;
  s.pairs = {BipartitePair::mr_mc};
  s.notes = {"kappa_w = 0.08 omega_m inherited from the fig2 scenario"};
  return s;
}

inline SweepSpec fig4() {
  SweepSpec s = fig2();
  s.name = "fig4";
  s.description = "E_N(OC-MC) vs delta_c/omega_m, with and without injected atoms";
  auto& p = s.base;
  p.r_a = 1.6e6;
  p.delta_a1 = constants::two_pi * 1e10;
  p.delta_a2 = constants::two_pi * 1e6;
  p.g = constants::two_pi * 1.5e6;
  p.kappa_c = 0.08 * omega_m;
  s.pairs = {BipartitePair::oc_mc};
  s.notes = {"kappa_a is not specified for this scenario; 2 pi x 1e5 rad/s inherited from fig2",
             "gamma_m = 200 pi rad/s inherited from fig2"};
  return s;
}

inline SweepSpec fig5() {
  SweepSpec s = fig2();
  s.name = "fig5";
  s.description = "E_N(OC-atom) vs delta_c/kappa_c for several atom-cavity couplings g";
  auto& p = s.base;
  p.r_a = 1.6e6;
  p.delta_a1 = constants::two_pi * 1e6;
  p.delta_a2 = constants::two_pi * 1e6;
  p.kappa_a = constants::two_pi * 1e5;
  p.kappa_c = 0.02 * omega_m;
  s.axis = {"delta_c", "kappa_c"};
  s.grid = {-100.0, 100.0, 401};
  s.pairs = {BipartitePair::oc_sba, BipartitePair::oc_scb};
  s.baseline = false;
  s.notes = {
      "kappa_c = 0.02 is given without units; interpreted as 0.02 omega_m",
      "x axis is delta_c/kappa_c",
      "g is the family parameter of this scenario; default 2 pi x 8e5 rad/s inherited from fig2",
  };
  return s;
}

inline SweepSpec fig6(std::string name, double temperature) {
  SweepSpec s = fig2();
  s.name = std::move(name);
  s.description = "E_N of MR-OC, MR-MC, OC-MC vs delta_c/omega_m at T = " +
                  format_double(temperature * 1e3) + " mK";
  auto& p = s.base;
  p.r_a = 1.6e6;
  p.delta_a1 = constants::two_pi * 1e10;
  p.delta_a2 = constants::two_pi * 1e6;
  p.gamma_m = 200.0 * constants::pi;
  p.kappa_c = constants::pi * constants::speed_of_light / (finesse * p.cavity_length);
  p.g = constants::two_pi * 1e5;
  p.kappa_a = constants::two_pi * 1e6;
  p.delta_w = -omega_m;
  p.temperature = temperature;
  s.pairs = {BipartitePair::mr_oc, BipartitePair::mr_mc, BipartitePair::oc_mc};
  s.baseline = false;
  s.notes = {"kappa_c = pi c / (F L) with finesse F = 4.07e4",
             "gamma_m = 200 pi rad/s from the caption"};
  return s;
}

inline constexpr std::array<std::string_view, 7> names{"fig2", "fig3",  "fig4", "fig5",
                                                       "fig6a", "fig6b", "fig6c"};

} // namespace presets

/// Fully populated sweep for a named scenario; throws SpecError if unknown.
inline SweepSpec preset(std::string_view name) {
  if (name == "fig2")
    return presets::fig2();
  if (name == "fig3")
    return presets::fig3();
  if (name == "fig4")
    return presets::fig4();
  if (name == "fig5")
    return presets::fig5();
  if (name == "fig6a")
    return presets::fig6("fig6a", 5e-3);
  if (name == "fig6b")
    return presets::fig6("fig6b", 250e-3);
  if (name == "fig6c")
    return presets::fig6("fig6c", 350e-3);
  throw SpecError("unknown preset '" + std::string(name) + "'");
}

} // namespace oemsim
