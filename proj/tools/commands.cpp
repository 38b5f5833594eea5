#include "commands.hpp"

#include <relmodel/geometry.hpp>
#include <relmodel/inference.hpp>
#include <relmodel/io.hpp>
#include <relmodel/simulation.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace relfit {
namespace {

using namespace relmodel;

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const relmodel::Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error [internal]: " << e.what() << "\n";
    return kInternal;
  }
}

void emit(const std::optional<fs::path>& path, const std::string& text,
          std::ostream& out) {
  if (!path) {
    out << text;
    return;
  }
  std::ofstream file(*path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw Error(ErrorKind::parse, "cannot write " + path->string());
  }
  file << text;
}

void write_file(const fs::path& path, const std::string& text) {
  emit(path, text, std::cout);
}

fs::path with_suffix(const fs::path& prefix, const std::string& suffix) {
  fs::path out = prefix;
  out += suffix;
  return out;
}

void add_solver_flags(CLI::App* cmd, CurvedOptions& opts) {
  cmd->add_option("--gamma-start", opts.gamma_start,
                  "Starting adjustment factor")
      ->capture_default_str();
  cmd->add_option("--tol", opts.tolerance, "Outer tolerance on |f(gamma)|")
      ->capture_default_str();
  cmd->add_option("--max-outer", opts.max_outer, "Outer iteration cap")
      ->capture_default_str();
  cmd->add_option("--inner-tol", opts.inner.tolerance,
                  "Inner tolerance on the mean-parameter residual")
      ->capture_default_str();
  cmd->add_option("--max-inner", opts.inner.max_iterations,
                  "Inner Newton iteration cap")
      ->capture_default_str();
}

}  // namespace

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::parse: return kParse;
    case ErrorKind::validation:
    case ErrorKind::domain: return kValidation;
    case ErrorKind::feasibility:
    case ErrorKind::boundary: return kFeasibility;
    case ErrorKind::convergence: return kConvergence;
    case ErrorKind::size_guard: return kSizeGuard;
    case ErrorKind::internal: return kInternal;
  }
  return kInternal;
}

int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.algorithm != "newton" && args.algorithm != "bisection") {
      err << "error [usage]: unknown algorithm `" << args.algorithm
          << "` (expected newton or bisection)\n";
      return static_cast<int>(kUsage);
    }
    const Dataset data = load_dataset(args.data, args.design);
    const CurvedFit fit =
        args.algorithm == "newton"
            ? fit_curved_newton(data.design, data.y, args.options)
            : fit_curved_bisection(data.design, data.y, args.options);
    emit(args.output, fit_to_json(fit, data, args.algorithm), out);
    return static_cast<int>(kOk);
  });
}

int cmd_test(const TestArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.format != "json" && args.format != "text") {
      err << "error [usage]: --format must be json or text\n";
      return static_cast<int>(kUsage);
    }
    const Dataset data = load_dataset(args.data, args.design);
    const TestReport report =
        run_tests(data.design, data.y, args.level, args.options);
    if (args.format == "json") {
      for (const auto& w : report.warnings) err << "warning: " << w << "\n";
    }
    emit(args.output,
         args.format == "json" ? report_to_json(report) : report_to_text(report),
         out);
    return static_cast<int>(kOk);
  });
}

int cmd_profile(const ProfileArgs& args, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&] {
    const Dataset data = load_dataset(args.data, args.design);
    const CurvedFit fit = fit_curved_newton(data.design, data.y, args.options);
    const Vector s = data.design.margins(fit.pi);
    const FeasibleRange range = feasible_range(data.design, s);
    std::vector<double> grid;
    if (args.low || args.high) {
      const double lo = args.low.value_or(range.lower);
      const double hi = args.high.value_or(range.upper);
      if (!(lo < hi) || args.points < 2) {
        throw Error(ErrorKind::domain, "profile grid needs low < high and >= 2 points");
      }
      for (int i = 0; i < args.points; ++i) {
        grid.push_back(lo + (hi - lo) * i / (args.points - 1));
      }
    } else {
      grid = default_profile_grid(range, args.points, args.coverage);
    }
    const ProfileCurve profile =
        dm_profile(data.design, s, fit.total, grid, args.level);
    emit(args.output, profile_to_csv(profile, range), out);
    return static_cast<int>(kOk);
  });
}

int cmd_geometry(const GeometryArgs& args, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const DesignMatrix design = validate_design(read_design(args.design));
    const ConeEdges edges = cone_edges(design);
    const SurfaceSample sample =
        sample_surface(design, edges, args.count, args.seed, args.threads);

    const auto edges_path = with_suffix(args.output_prefix, "_edges.csv");
    const auto theta_path = with_suffix(args.output_prefix, "_theta.csv");
    const auto tau_path = with_suffix(args.output_prefix, "_tau.csv");
    write_file(edges_path, edges_to_csv(edges));
    write_file(theta_path, surface_theta_csv(sample));
    write_file(tau_path, surface_tau_csv(sample));

    std::size_t in_window = 0;
    for (Index i = 0; i < sample.theta.rows(); ++i) {
      in_window += within_window(sample.theta.row(i).transpose());
    }
    out << "cone edges: " << edges.count() << " -> " << edges_path.string()
        << "\n";
    out << "surface samples: " << args.count << " (" << in_window
        << " with all |theta_j| <= 10) -> " << theta_path.string() << ", "
        << tau_path.string() << "\n";

    if (args.grid_step) {
      const auto grid =
          mle_surface_grid(design, *args.grid_step, args.threads);
      std::size_t failed = 0;
      for (const auto& gp : grid) failed += !gp.ok;
      const auto grid_path = with_suffix(args.output_prefix, "_grid.csv");
      write_file(grid_path, grid_to_csv(grid));
      out << "MLE grid: " << grid.size() << " points, " << failed
          << " failed -> " << grid_path.string() << "\n";
    }
    return static_cast<int>(kOk);
  });
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    if (args.format != "text" && args.format != "csv") {
      err << "error [usage]: --format must be text or csv\n";
      return static_cast<int>(kUsage);
    }
    SimConfig cfg = parse_sim_config(read_text_file(args.config),
                                     args.config.parent_path());
    if (args.threads) cfg.threads = *args.threads;
    if (args.replications) cfg.replications = *args.replications;
    if (args.seed) cfg.seed = *args.seed;
    validate_sim_config(cfg);

    const SimResult result = run_simulation(cfg);
    std::string text = args.format == "csv" ? format_sim_csv(result)
                                            : format_sim_table(result);
    if (cfg.replications == 1 && args.format == "text") {
      std::ostringstream diag;
      diag << std::setprecision(6);
      for (const auto& row : result.rows) {
        const auto& o = row.outcomes.front();
        diag << "n = " << row.n << ": ";
        if (o.ok) {
          diag << "D_M = " << o.values[0] << ", L = " << o.values[1]
               << ", G = " << o.values[2] << "\n";
        } else {
          diag << "fit failed: " << o.error << "\n";
        }
      }
      text += diag.str();
    }
    emit(args.output, text, out);
    for (const auto& row : result.rows) {
      if (row.failures > 0) {
        err << "note: n = " << row.n << ": " << row.failures
            << " replications failed to fit and were excluded\n";
      }
    }
    if (result.failure_budget_exceeded()) {
      err << "error [simulation]: excluded replications exceed "
          << cfg.max_failure_fraction * 100.0 << "% of the run\n";
      return static_cast<int>(kSimulationFailures);
    }
    return static_cast<int>(kOk);
  });
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{
      "relfit: multiplicative (no-overall-effect) models for multinomial "
      "counts"};
  app.require_subcommand(1);
  app.footer(
      "Input formats:\n"
      "  counts CSV   label,count per line (optional header)\n"
      "  design CSV   r lines of k comma-separated 0/1 entries (optional "
      "header), or a JSON array of rows\n"
      "Output columns:\n"
      "  profile      gamma,D_M,g,g_slope,status with '# key=value' header "
      "lines\n"
      "  geometry     <prefix>_edges.csv u_1..u_k; <prefix>_theta.csv "
      "theta_1..theta_k,in_window;\n"
      "               <prefix>_tau.csv tau_1..tau_k; <prefix>_grid.csv "
      "p_*,pi_hat_*,s_*,gamma,status\n"
      "  simulate     rows per sample size; columns D_M, L, G per level (%)\n"
      "Exit codes: 0 ok, 2 usage, 3 parse, 4 validation, 5 feasibility, "
      "6 convergence, 7 size guard, 8 simulation failures, 9 internal");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the multiplicative model");
  fit_cmd->add_option("--data", fit.data, "Counts CSV")->required();
  fit_cmd->add_option("--design", fit.design, "Design matrix")->required();
  fit_cmd->add_option("--algorithm", fit.algorithm, "newton or bisection")
      ->capture_default_str();
  fit_cmd->add_option("-o,--output", fit.output, "Output JSON path");
  add_solver_flags(fit_cmd, fit.options);

  TestArgs test;
  auto* test_cmd = app.add_subcommand("test", "Run D_L, D_M, L and G tests");
  test_cmd->add_option("--data", test.data, "Counts CSV")->required();
  test_cmd->add_option("--design", test.design, "Design matrix")->required();
  test_cmd->add_option("--level", test.level, "Confidence level")
      ->capture_default_str();
  test_cmd->add_option("--format", test.format, "json or text")
      ->capture_default_str();
  test_cmd->add_option("-o,--output", test.output, "Output path");
  add_solver_flags(test_cmd, test.options);

  ProfileArgs profile;
  auto* profile_cmd =
      app.add_subcommand("profile", "Profile D_M(gamma) and g(gamma)");
  profile_cmd->add_option("--data", profile.data, "Counts CSV")->required();
  profile_cmd->add_option("--design", profile.design, "Design matrix")
      ->required();
  profile_cmd->add_option("--points", profile.points, "Grid points")
      ->capture_default_str();
  profile_cmd->add_option("--coverage", profile.coverage,
                          "Fraction of the feasible range spanned")
      ->capture_default_str();
  profile_cmd->add_option("--low", profile.low, "Grid start");
  profile_cmd->add_option("--high", profile.high, "Grid end");
  profile_cmd->add_option("--level", profile.level, "Confidence level")
      ->capture_default_str();
  profile_cmd->add_option("-o,--output", profile.output, "Output CSV path");
  add_solver_flags(profile_cmd, profile.options);

  GeometryArgs geometry;
  auto* geometry_cmd = app.add_subcommand(
      "geometry", "Cone edges, constraint-surface sample, MLE grid");
  geometry_cmd->add_option("--design", geometry.design, "Design matrix")
      ->required();
  geometry_cmd->add_option("--count", geometry.count, "Surface samples")
      ->capture_default_str();
  geometry_cmd->add_option("--seed", geometry.seed, "Random seed")
      ->capture_default_str();
  geometry_cmd->add_option("--threads", geometry.threads, "Worker threads")
      ->capture_default_str();
  geometry_cmd->add_option("--grid-step", geometry.grid_step,
                           "Also fit every interior simplex grid point");
  geometry_cmd->add_option("-o,--output", geometry.output_prefix,
                           "Output file prefix")
      ->capture_default_str();

  SimulateArgs simulate;
  auto* simulate_cmd =
      app.add_subcommand("simulate", "Rejection rates under the null");
  simulate_cmd->add_option("--config", simulate.config, "SimConfig JSON")
      ->required();
  simulate_cmd->add_option("--format", simulate.format, "text or csv")
      ->capture_default_str();
  simulate_cmd->add_option("-o,--output", simulate.output, "Output path");
  simulate_cmd->add_option("--threads", simulate.threads,
                           "Override worker threads");
  simulate_cmd->add_option("--replications", simulate.replications,
                           "Override replications per sample size");
  simulate_cmd->add_option("--seed", simulate.seed, "Override master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  if (*fit_cmd) return cmd_fit(fit, out, err);
  if (*test_cmd) return cmd_test(test, out, err);
  if (*profile_cmd) return cmd_profile(profile, out, err);
  if (*geometry_cmd) return cmd_geometry(geometry, out, err);
  if (*simulate_cmd) return cmd_simulate(simulate, out, err);
  return kUsage;
}

}  // namespace relfit
