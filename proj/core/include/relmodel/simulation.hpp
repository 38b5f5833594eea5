#pragma once

#include "relmodel/curved.hpp"
#include "relmodel/model.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace relmodel {

/// (1 - level) quantile of chi-square(1), i.e. the rejection threshold.
double quantile_chisq1(double level);

struct SimConfig {
  SimConfig(DesignMatrix design_, Vector null_pi_)
      : design(std::move(design_)), null_pi(std::move(null_pi_)) {}

  DesignMatrix design;
  Vector null_pi;
  std::vector<std::int64_t> sample_sizes{200, 1000, 5000};
  std::int64_t replications = 10000;
  std::vector<double> levels{0.10, 0.05, 0.01};
  std::uint64_t seed = 20170628;
  unsigned threads = 1;
  double max_failure_fraction = 0.001;
  CurvedOptions options{};
};

/// Raises ErrorKind::validation naming the violated condition.
void validate_sim_config(const SimConfig& cfg);

enum class Statistic { curved_deviance = 0, lagrange = 1, adjustment = 2 };
inline constexpr std::array<const char*, 3> kStatisticNames{"D_M", "L", "G"};

struct ReplicationOutcome {
  bool ok = false;
  std::array<double, 3> values{};  // D_M, L, G
  std::string error;
};

struct SampleSizeResult {
  std::int64_t n = 0;
  std::int64_t failures = 0;
  std::int64_t used = 0;
  // rates[level][statistic] and matching Monte Carlo standard errors.
  std::vector<std::array<double, 3>> rates;
  std::vector<std::array<double, 3>> std_errors;
  std::vector<ReplicationOutcome> outcomes;
};

struct SimResult {
  std::vector<double> levels;
  std::int64_t replications = 0;
  double max_failure_fraction = 0.001;
  std::vector<SampleSizeResult> rows;

  bool failure_budget_exceeded() const;
};

/// One multinomial replication under the null: draw, fit, compute D_M, L, G.
ReplicationOutcome simulate_replication(const SimConfig& cfg, std::int64_t n,
                                        std::uint64_t stream_id);

/// Stream id for replication `rep` at sample-size index `size_index`.
std::uint64_t replication_stream(std::size_t size_index, std::int64_t rep);

SimResult run_simulation(const SimConfig& cfg);

/// Table laid out with one row per sample size and column groups per level.
std::string format_sim_table(const SimResult& result);
std::string format_sim_csv(const SimResult& result);

}  // namespace relmodel
