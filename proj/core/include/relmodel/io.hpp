#pragma once

#include "relmodel/curved.hpp"
#include "relmodel/geometry.hpp"
#include "relmodel/inference.hpp"
#include "relmodel/model.hpp"
#include "relmodel/simulation.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace relmodel {

// Input formats
//   counts CSV : `label,count` per line; an optional header line is skipped
//                when its count field is not an integer.
//   design CSV : r lines of k comma-separated 0/1 entries; optional header.
//   design JSON: array of r arrays of k numbers.
// Malformed input raises ErrorKind::parse with "<source>:<line>: ..." text.

struct CountsTable {
  std::vector<std::string> labels;
  std::vector<double> counts;
};

CountsTable parse_counts_csv(std::string_view text,
                             std::string_view source = "<counts>");
Matrix parse_design_csv(std::string_view text,
                        std::string_view source = "<design>");
Matrix parse_design_json(std::string_view text,
                         std::string_view source = "<design>");

std::string read_text_file(const std::filesystem::path& path);
CountsTable read_counts(const std::filesystem::path& path);
/// JSON when the first non-blank character is '[', CSV otherwise.
Matrix read_design(const std::filesystem::path& path);

struct Dataset {
  std::vector<std::string> labels;
  std::vector<double> y;
  DesignMatrix design;
};

/// Reads and validates both files; label count must equal the design rows.
Dataset load_dataset(const std::filesystem::path& counts_path,
                     const std::filesystem::path& design_path);

// Output formats

std::string fit_to_json(const CurvedFit& fit, const Dataset& data,
                        std::string_view algorithm);

/// Re-reads a fit document and checks its invariants against the data:
/// gamma X'p = X'pi, 1'pi = 1, C log pi = 0. Returns the list of failures.
std::vector<std::string> check_fit_json(std::string_view json_text,
                                        const Dataset& data);

std::string report_to_json(const TestReport& report);
std::string report_to_text(const TestReport& report);

std::string profile_to_csv(const ProfileCurve& profile,
                           const FeasibleRange& range);

std::string edges_to_csv(const ConeEdges& edges);
std::string surface_theta_csv(const SurfaceSample& sample);
std::string surface_tau_csv(const SurfaceSample& sample);
std::string grid_to_csv(const std::vector<GridPoint>& grid);

/// SimConfig JSON:
///   { "design": [[0/1,...],...] | "design_file": "path",
///     "null_pi": [...] | "null_counts": [...],
///     "sample_sizes": [...], "replications": N, "levels": [...],
///     "seed": S, "threads": T, "max_failure_fraction": f }
/// With "null_counts" the null is the multiplicative-model MLE for those
/// counts. Relative paths resolve against `base_dir`.
SimConfig parse_sim_config(std::string_view json_text,
                           const std::filesystem::path& base_dir = {});

}  // namespace relmodel
