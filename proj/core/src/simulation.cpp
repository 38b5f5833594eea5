#include "relmodel/simulation.hpp"

#include "relmodel/inference.hpp"
#include "relmodel/rng.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace relmodel {

double quantile_chisq1(double level) { return chisq_isf(level, 1); }

void validate_sim_config(const SimConfig& cfg) {
  const auto& pi = cfg.null_pi;
  if (pi.size() != cfg.design.cells()) {
    throw Error(ErrorKind::validation,
                "null_pi length does not match the design rows");
  }
  if (!pi.allFinite() || pi.minCoeff() <= 0.0) {
    throw Error(ErrorKind::validation,
                "null_pi must be strictly positive");
  }
  if (std::abs(pi.sum() - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << std::setprecision(17) << "null_pi sums to " << pi.sum()
        << ", not 1";
    throw Error(ErrorKind::validation, msg.str());
  }
  const ConstraintSystem cs = constraint_canonical(cfg.design);
  const Vector logp = pi.array().log().matrix();
  const double c_res = std::abs(cs.c.dot(logp));
  if (c_res > 1e-8) {
    std::ostringstream msg;
    msg << "null_pi violates the multiplicative constraint c'log(pi) = 0 "
           "(residual "
        << c_res << "): it is not in the model";
    throw Error(ErrorKind::validation, msg.str());
  }
  for (Index i = 0; i < cs.h.rows(); ++i) {
    const double res = std::abs(cs.h.row(i).dot(logp));
    if (res > 1e-8) {
      std::ostringstream msg;
      msg << "null_pi violates log-linear contrast H[" << i + 1
          << "] log(pi) = 0 (residual " << res << ")";
      throw Error(ErrorKind::validation, msg.str());
    }
  }
  if (cfg.sample_sizes.empty()) {
    throw Error(ErrorKind::validation, "no sample sizes given");
  }
  for (auto n : cfg.sample_sizes) {
    if (n <= 0) throw Error(ErrorKind::validation, "sample sizes must be > 0");
  }
  if (cfg.replications <= 0) {
    throw Error(ErrorKind::validation, "replications must be > 0");
  }
  if (cfg.levels.empty()) throw Error(ErrorKind::validation, "no levels");
  for (double level : cfg.levels) {
    if (!(level > 0.0 && level < 1.0)) {
      throw Error(ErrorKind::validation, "levels must lie in (0,1)");
    }
  }
}

std::uint64_t replication_stream(std::size_t size_index, std::int64_t rep) {
  return (static_cast<std::uint64_t>(size_index) << 40) |
         static_cast<std::uint64_t>(rep);
}

ReplicationOutcome simulate_replication(const SimConfig& cfg, std::int64_t n,
                                        std::uint64_t stream_id) {
  ReplicationOutcome out;
  RngStream rng(cfg.seed, stream_id);
  const auto counts = multinomial_draw(n, cfg.null_pi, rng);
  std::vector<double> y(counts.begin(), counts.end());
  try {
    const CurvedFit fit = fit_curved_newton(cfg.design, y, cfg.options);
    out.values[0] = deviance_curved(y, fit.loglinear.pi, fit.pi);
    const auto var =
        asymptotic_variances(fit.pi, cfg.design, fit.total, fit.gamma);
    const auto stats = score_and_gamma_statistics(fit.gamma, fit.alpha, var);
    out.values[1] = stats.lagrange;
    out.values[2] = stats.adjustment;
    out.ok = true;
  } catch (const Error& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

bool SimResult::failure_budget_exceeded() const {
  for (const auto& row : rows) {
    if (static_cast<double>(row.failures) >
        max_failure_fraction * static_cast<double>(replications)) {
      return true;
    }
  }
  return false;
}

SimResult run_simulation(const SimConfig& cfg) {
  validate_sim_config(cfg);
  SimResult result;
  result.levels = cfg.levels;
  result.replications = cfg.replications;
  result.max_failure_fraction = cfg.max_failure_fraction;

  std::vector<double> thresholds;
  for (double level : cfg.levels) thresholds.push_back(quantile_chisq1(level));

  for (std::size_t si = 0; si < cfg.sample_sizes.size(); ++si) {
    SampleSizeResult row;
    row.n = cfg.sample_sizes[si];
    row.outcomes.resize(static_cast<std::size_t>(cfg.replications));
    parallel_for(row.outcomes.size(), cfg.threads, [&](std::size_t rep) {
      row.outcomes[rep] = simulate_replication(
          cfg, row.n, replication_stream(si, static_cast<std::int64_t>(rep)));
    });

    std::vector<std::array<std::int64_t, 3>> rejections(
        cfg.levels.size(), std::array<std::int64_t, 3>{0, 0, 0});
    for (const auto& o : row.outcomes) {
      if (!o.ok) {
        ++row.failures;
        continue;
      }
      ++row.used;
      for (std::size_t li = 0; li < thresholds.size(); ++li) {
        for (std::size_t s = 0; s < 3; ++s) {
          rejections[li][s] += o.values[s] > thresholds[li];
        }
      }
    }
    for (std::size_t li = 0; li < thresholds.size(); ++li) {
      std::array<double, 3> rate{};
      std::array<double, 3> se{};
      for (std::size_t s = 0; s < 3; ++s) {
        if (row.used > 0) {
          const double used = static_cast<double>(row.used);
          rate[s] = static_cast<double>(rejections[li][s]) / used;
          se[s] = std::sqrt(rate[s] * (1.0 - rate[s]) / used);
        }
      }
      row.rates.push_back(rate);
      row.std_errors.push_back(se);
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

namespace {

std::string percent_label(double level) {
  std::ostringstream os;
  os << std::setprecision(6) << level * 100.0 << "%";
  return os.str();
}

}  // namespace

std::string format_sim_table(const SimResult& result) {
  std::ostringstream os;
  os << "Estimated rejection rates (%) under the null, " << result.replications
     << " replications per sample size\n";
  os << std::setw(10) << "n";
  for (double level : result.levels) {
    os << " | " << std::setw(32) << std::left << percent_label(level)
       << std::right;
  }
  os << " | failures\n";
  os << std::setw(10) << "";
  for (std::size_t li = 0; li < result.levels.size(); ++li) {
    os << " | ";
    for (const char* name : kStatisticNames) os << std::setw(10) << name << " ";
  }
  os << " |\n";
  os << std::setprecision(6);
  for (const auto& row : result.rows) {
    os << std::setw(10) << row.n;
    for (std::size_t li = 0; li < result.levels.size(); ++li) {
      os << " | ";
      for (std::size_t s = 0; s < 3; ++s) {
        os << std::setw(10) << row.rates[li][s] * 100.0 << " ";
      }
    }
    os << " | " << row.failures << "\n";
  }
  return os.str();
}

std::string format_sim_csv(const SimResult& result) {
  std::ostringstream os;
  os << "n,replications,used,failures";
  for (double level : result.levels) {
    for (const char* name : kStatisticNames) {
      os << ",rate_" << name << "@" << level;
    }
  }
  for (double level : result.levels) {
    for (const char* name : kStatisticNames) {
      os << ",se_" << name << "@" << level;
    }
  }
  os << "\n" << std::setprecision(6);
  for (const auto& row : result.rows) {
    os << row.n << "," << result.replications << "," << row.used << ","
       << row.failures;
    for (const auto& r : row.rates) {
      for (double v : r) os << "," << v * 100.0;
    }
    for (const auto& r : row.std_errors) {
      for (double v : r) os << "," << v * 100.0;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace relmodel
