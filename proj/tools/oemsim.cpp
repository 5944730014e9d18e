// oemsim: steady-state entanglement of the atom-assisted opto-electro-mechanical
// system from the command line.
//
//   oemsim presets
//   oemsim point  (--preset NAME | --params FILE) [--x X] [--pairs LIST] [--baseline]
//                 [--dump-matrices DIR]
//   oemsim sweep  (--preset NAME | --params FILE) [--out FILE.csv] [--pairs LIST]
//                 [--baseline] [--jobs N] [--axis PARAM[/NORM]] [--range START:STOP:COUNT]
//   oemsim dump-matrices (--preset NAME | --params FILE) [--x X] --out DIR
//
// Exit codes: 0 success, 1 usage or input error, 2 numerical failure
// (unstable point, or a sweep with no stable grid point).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "oemsim/config.hpp"
#include "oemsim/dynamics.hpp"
#include "oemsim/sweep.hpp"

namespace fs = std::filesystem;
using namespace oemsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Source {
  std::string preset;
  std::string params_file;
};

void add_source(CLI::App* cmd, Source& src) {
  auto* p = cmd->add_option("--preset", src.preset, "named scenario (see `oemsim presets`)");
  auto* f = cmd->add_option("--params", src.params_file, "JSON parameter file");
  p->excludes(f);
  f->excludes(p);
}

/// Base sweep definition from either a preset or a parameter file. A
/// parameter file gets the default delta_c/omega_m axis and all pairs.
SweepSpec load_spec(const Source& src) {
  if (src.preset.empty() == src.params_file.empty())
    throw UsageError("exactly one of --preset or --params is required");
  if (!src.preset.empty()) {
    try {
      return preset(src.preset);
    } catch (const SpecError& e) {
      throw UsageError(e.what());
    }
  }
  SweepSpec spec;
  spec.name = fs::path(src.params_file).stem().string();
  spec.description = "parameters from " + src.params_file;
  spec.base = parse_config(src.params_file);
  for (const auto& e : pair_table)
    spec.pairs.push_back(e.pair);
  return spec;
}

std::vector<BipartitePair> parse_pairs(const std::string& list) {
  std::vector<BipartitePair> pairs;
  if (list == "all") {
    for (const auto& e : pair_table)
      pairs.push_back(e.pair);
    return pairs;
  }
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto p = parse_pair(item);
    if (!p)
      throw UsageError("unknown pair '" + item + "' (expected MR-OC, MR-MC, OC-MC, OC-SBA, OC-SCB)");
    pairs.push_back(*p);
  }
  if (pairs.empty())
    throw UsageError("--pairs is empty");
  return pairs;
}

Axis parse_axis(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos)
    return {s, ""};
  return {s.substr(0, slash), s.substr(slash + 1)};
}

Grid parse_range(const std::string& s) {
  Grid g;
  char c1 = 0, c2 = 0;
  std::stringstream ss(s);
  if (!(ss >> g.start >> c1 >> g.stop >> c2 >> g.count) || c1 != ':' || c2 != ':' || !ss.eof())
    throw UsageError("--range expects START:STOP:COUNT, got '" + s + "'");
  return g;
}

void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out)
    throw UsageError("cannot write '" + path.string() + "'");
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j)
      out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

/// Writes A.csv, D.csv and (if stable) V.csv, all dimensionless. Returns
/// whether V was written.
bool dump_matrices(const SystemParameters& params, const fs::path& dir) {
  fs::create_directories(dir);
  const auto ss = solve_steady_state(params);
  const auto drift = build_drift(params, ss);
  const auto diffusion = build_diffusion(params);
  write_matrix_csv(dir / "A.csv", drift.a);
  write_matrix_csv(dir / "D.csv", diffusion.d);
  if (!is_stable(drift).stable) {
    std::cerr << "oemsim: drift matrix is unstable; V.csv not written\n";
    return false;
  }
  const auto sol = solve_lyapunov(drift, diffusion);
  if (sol.ill_conditioned)
    std::cerr << "oemsim: warning: Lyapunov system is ill-conditioned (rcond " << sol.rcond
              << ")\n";
  write_matrix_csv(dir / "V.csv", sol.cm.v);
  return true;
}

SystemParameters point_parameters(const SweepSpec& spec, const std::optional<double>& x) {
  if (!x)
    return spec.base;
  return at_grid_point(spec, *x);
}

fs::path sidecar_path(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension(".meta.json");
  return p;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady-state bipartite entanglement of an atom-assisted "
               "opto-electro-mechanical system"};
  app.require_subcommand(1);

  // presets
  auto* cmd_presets = app.add_subcommand("presets", "list the named scenarios");

  // point
  Source point_src;
  std::optional<double> point_x;
  std::string point_pairs;
  bool point_baseline = false;
  std::string point_dump;
  auto* cmd_point = app.add_subcommand("point", "evaluate one parameter point, print JSON");
  add_source(cmd_point, point_src);
  cmd_point->add_option("--x", point_x, "grid coordinate on the scenario's axis");
  cmd_point->add_option("--pairs", point_pairs, "comma list of bipartitions (default all)");
  cmd_point->add_flag("--baseline", point_baseline, "also evaluate the atom-free system");
  cmd_point->add_option("--dump-matrices", point_dump, "directory for A.csv, D.csv, V.csv");

  // sweep
  Source sweep_src;
  std::string sweep_out;
  std::string sweep_pairs;
  bool sweep_baseline = false;
  int sweep_jobs = 1;
  std::string sweep_axis;
  std::string sweep_range;
  auto* cmd_sweep = app.add_subcommand("sweep", "evaluate a 1-D grid, write CSV + metadata");
  add_source(cmd_sweep, sweep_src);
  cmd_sweep->add_option("--out", sweep_out, "CSV path (default <name>.csv)");
  cmd_sweep->add_option("--pairs", sweep_pairs, "comma list of bipartitions, or 'all'");
  cmd_sweep->add_flag("--baseline", sweep_baseline, "also evaluate the atom-free system");
  cmd_sweep->add_option("--jobs", sweep_jobs, "worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  cmd_sweep->add_option("--axis", sweep_axis, "varied parameter, optionally /normalization");
  cmd_sweep->add_option("--range", sweep_range, "grid START:STOP:COUNT");

  // dump-matrices
  Source dump_src;
  std::optional<double> dump_x;
  std::string dump_out;
  auto* cmd_dump = app.add_subcommand("dump-matrices", "write A, D, V as CSV for one point");
  add_source(cmd_dump, dump_src);
  cmd_dump->add_option("--x", dump_x, "grid coordinate on the scenario's axis");
  cmd_dump->add_option("--out", dump_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (cmd_presets->parsed()) {
      for (const auto name : presets::names) {
        const auto spec = preset(name);
        std::cout << spec.name << "  [" << spec.axis.label() << " in " << spec.grid.start << ".."
                  << spec.grid.stop << ", " << spec.grid.count << " pts]\n    "
                  << spec.description << '\n';
        for (const auto& note : spec.notes)
          std::cout << "    note: " << note << '\n';
      }
      return kExitOk;
    }

    if (cmd_point->parsed()) {
      auto spec = load_spec(point_src);
      spec.pairs = parse_pairs(point_pairs.empty() ? "all" : point_pairs);
      const auto params = point_parameters(spec, point_x);
      auto rec = evaluate_point(params, spec.pairs, point_baseline || spec.baseline);
      rec.x = point_x.value_or(spec.axis.normalize_by.empty()
                                   ? field_value(params, spec.axis.parameter)
                                   : field_value(params, spec.axis.parameter) /
                                         field_value(params, spec.axis.normalize_by));
      rec.value = field_value(params, spec.axis.parameter);
      json out = point_record_to_json(rec);
      out["preset"] = spec.name;
      out["axis"] = spec.axis.label();
      out["parameters"] = parameters_to_json(params);
      std::cout << out.dump(2) << '\n';
      if (!point_dump.empty())
        dump_matrices(params, point_dump);
      return rec.stable && rec.errors.empty() ? kExitOk : kExitNumerical;
    }

    if (cmd_sweep->parsed()) {
      auto spec = load_spec(sweep_src);
      if (!sweep_pairs.empty())
        spec.pairs = parse_pairs(sweep_pairs);
      if (sweep_baseline)
        spec.baseline = true;
      if (!sweep_axis.empty())
        spec.axis = parse_axis(sweep_axis);
      if (!sweep_range.empty())
        spec.grid = parse_range(sweep_range);
      try {
        validate_spec(spec);
      } catch (const SpecError& e) {
        throw UsageError(e.what());
      }

      const auto result = run_sweep(spec, sweep_jobs);
      const fs::path csv = sweep_out.empty() ? fs::path(spec.name + ".csv") : fs::path(sweep_out);
      {
        std::ofstream out(csv);
        if (!out)
          throw UsageError("cannot write '" + csv.string() + "'");
        write_csv(out, result);
      }
      {
        std::ofstream out(sidecar_path(csv));
        if (!out)
          throw UsageError("cannot write '" + sidecar_path(csv).string() + "'");
        out << sweep_metadata(result).dump(2) << '\n';
      }
      std::cerr << "oemsim: " << result.records.size() << " points, " << result.stable_count()
                << " stable -> " << csv.string() << '\n';
      if (result.stable_count() == 0) {
        std::cerr << "oemsim: no stable grid point\n";
        return kExitNumerical;
      }
      return kExitOk;
    }

    if (cmd_dump->parsed()) {
      const auto spec = load_spec(dump_src);
      return dump_matrices(point_parameters(spec, dump_x), dump_out) ? kExitOk : kExitNumerical;
    }
  } catch (const UsageError& e) {
    std::cerr << "oemsim: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "oemsim: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "oemsim: invalid parameter " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "oemsim: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}
