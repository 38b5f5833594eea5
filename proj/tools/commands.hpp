#pragma once

#include <relmodel/curved.hpp>
#include <relmodel/errors.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace relfit {

namespace fs = std::filesystem;

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kParse = 3,
  kValidation = 4,
  kFeasibility = 5,
  kConvergence = 6,
  kSizeGuard = 7,
  kSimulationFailures = 8,
  kInternal = 9,
};

int exit_code_for(relmodel::ErrorKind kind) noexcept;

struct FitArgs {
  fs::path data;
  fs::path design;
  std::string algorithm = "newton";
  std::optional<fs::path> output;
  relmodel::CurvedOptions options;
};

struct TestArgs {
  fs::path data;
  fs::path design;
  double level = 0.95;
  std::string format = "json";
  std::optional<fs::path> output;
  relmodel::CurvedOptions options;
};

struct ProfileArgs {
  fs::path data;
  fs::path design;
  int points = 101;
  double coverage = 0.9;
  std::optional<double> low;
  std::optional<double> high;
  double level = 0.95;
  std::optional<fs::path> output;
  relmodel::CurvedOptions options;
};

struct GeometryArgs {
  fs::path design;
  std::size_t count = 6000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::optional<double> grid_step;
  fs::path output_prefix = "geometry";
};

struct SimulateArgs {
  fs::path config;
  std::string format = "text";
  std::optional<fs::path> output;
  std::optional<unsigned> threads;
  std::optional<std::int64_t> replications;
  std::optional<std::uint64_t> seed;
};

// Each command writes its primary output to the output path (stdout when
// absent), diagnostics to `err`, and returns a process exit code.
int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err);
int cmd_test(const TestArgs& args, std::ostream& out, std::ostream& err);
int cmd_profile(const ProfileArgs& args, std::ostream& out, std::ostream& err);
int cmd_geometry(const GeometryArgs& args, std::ostream& out,
                 std::ostream& err);
int cmd_simulate(const SimulateArgs& args, std::ostream& out,
                 std::ostream& err);

/// Parses argv and dispatches to a command.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace relfit
