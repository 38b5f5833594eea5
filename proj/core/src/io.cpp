#include "relmodel/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace relmodel {
namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void parse_fail(std::string_view source, std::size_t line,
                             const std::string& what) {
  std::ostringstream msg;
  msg << source << ":" << line << ": " << what;
  throw Error(ErrorKind::parse, msg.str());
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r' || s.front() == '\n')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Line {
  std::size_t number;
  std::string_view text;
};

// Non-blank, non-comment lines with 1-based line numbers.
std::vector<Line> content_lines(std::string_view text) {
  std::vector<Line> out;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t pos = text.find('\n', start);
    const auto raw = text.substr(start, pos == std::string_view::npos
                                            ? std::string_view::npos
                                            : pos - start);
    ++number;
    const auto line = trim(raw);
    if (!line.empty() && line.front() != '#') out.push_back({number, line});
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  std::string copy(s);
  char* end = nullptr;
  out = std::strtod(copy.c_str(), &end);
  return end == copy.c_str() + copy.size() && std::isfinite(out);
}

std::string fmt17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string fmt6(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

Json vec_json(const Vector& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vector json_vec(const Json& j, std::string_view what) {
  if (!j.is_array()) {
    throw Error(ErrorKind::parse, std::string(what) + " must be an array");
  }
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw Error(ErrorKind::parse,
                  std::string(what) + " must contain only numbers");
    }
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix design_from_json(const Json& j, std::string_view source) {
  if (!j.is_array() || j.empty()) {
    throw Error(ErrorKind::parse,
                std::string(source) + ": design must be a non-empty array of rows");
  }
  const std::size_t k = j[0].is_array() ? j[0].size() : 0;
  if (k == 0) {
    throw Error(ErrorKind::parse,
                std::string(source) + ": design rows must be non-empty arrays");
  }
  Matrix x(static_cast<Index>(j.size()), static_cast<Index>(k));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != k) {
      std::ostringstream msg;
      msg << source << ": design row " << i + 1 << " has "
          << (j[i].is_array() ? j[i].size() : 0) << " entries, expected " << k;
      throw Error(ErrorKind::parse, msg.str());
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (!j[i][c].is_number()) {
        std::ostringstream msg;
        msg << source << ": design row " << i + 1 << " column " << c + 1
            << " is not a number";
        throw Error(ErrorKind::parse, msg.str());
      }
      x(static_cast<Index>(i), static_cast<Index>(c)) = j[i][c].get<double>();
    }
  }
  return x;
}

Json parse_json(std::string_view text, std::string_view source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, std::string(source) + ": " + e.what());
  }
}

}  // namespace

CountsTable parse_counts_csv(std::string_view text, std::string_view source) {
  CountsTable out;
  const auto lines = content_lines(text);
  for (std::size_t idx = 0; idx < lines.size(); ++idx) {
    const auto& line = lines[idx];
    const auto fields = split(line.text, ',');
    if (fields.size() != 2) {
      parse_fail(source, line.number,
                 "expected `label,count` but found " +
                     std::to_string(fields.size()) + " fields");
    }
    std::int64_t count = 0;
    if (!parse_int(fields[1], count)) {
      if (idx == 0) continue;  // header
      parse_fail(source, line.number,
                 "count `" + std::string(fields[1]) + "` is not an integer");
    }
    if (count < 0) {
      parse_fail(source, line.number, "count must be nonnegative");
    }
    if (fields[0].empty()) parse_fail(source, line.number, "empty label");
    out.labels.emplace_back(fields[0]);
    out.counts.push_back(static_cast<double>(count));
  }
  if (out.counts.empty()) {
    throw Error(ErrorKind::parse, std::string(source) + ": no counts found");
  }
  return out;
}

Matrix parse_design_csv(std::string_view text, std::string_view source) {
  std::vector<std::vector<double>> rows;
  const auto lines = content_lines(text);
  for (std::size_t idx = 0; idx < lines.size(); ++idx) {
    const auto& line = lines[idx];
    const auto fields = split(line.text, ',');
    std::vector<double> row;
    bool numeric = true;
    for (auto f : fields) {
      double v = 0.0;
      if (!parse_double(f, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (idx == 0) continue;  // header
      parse_fail(source, line.number,
                 "design entries must be numbers (expected 0 or 1)");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      std::ostringstream msg;
      msg << "row has " << row.size() << " columns, expected "
          << rows.front().size();
      parse_fail(source, line.number, msg.str());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw Error(ErrorKind::parse, std::string(source) + ": no design rows");
  }
  Matrix x(static_cast<Index>(rows.size()),
           static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      x(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return x;
}

Matrix parse_design_json(std::string_view text, std::string_view source) {
  return design_from_json(parse_json(text, source), source);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::parse, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CountsTable read_counts(const std::filesystem::path& path) {
  return parse_counts_csv(read_text_file(path), path.string());
}

Matrix read_design(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  const auto body = trim(text);
  if (!body.empty() && body.front() == '[') {
    return parse_design_json(text, path.string());
  }
  return parse_design_csv(text, path.string());
}

Dataset load_dataset(const std::filesystem::path& counts_path,
                     const std::filesystem::path& design_path) {
  CountsTable counts = read_counts(counts_path);
  DesignMatrix design = validate_design(read_design(design_path));
  if (static_cast<Index>(counts.counts.size()) != design.cells()) {
    std::ostringstream msg;
    msg << counts_path.string() << " has " << counts.counts.size()
        << " cells but " << design_path.string() << " has " << design.cells()
        << " rows";
    throw Error(ErrorKind::validation, msg.str());
  }
  return Dataset{std::move(counts.labels), std::move(counts.counts),
                 std::move(design)};
}

std::string fit_to_json(const CurvedFit& fit, const Dataset& data,
                        std::string_view algorithm) {
  Json j;
  j["algorithm"] = algorithm;
  j["design"] = {{"cells", data.design.cells()},
                 {"params", data.design.params()}};
  j["labels"] = data.labels;
  j["counts"] = data.y;
  j["total"] = fit.total;
  j["sufficient_statistic"] = vec_json(fit.t);
  j["loglinear"] = {
      {"theta", vec_json(fit.loglinear.theta)},
      {"pi", vec_json(fit.loglinear.pi)},
      {"tau", vec_json(fit.loglinear.tau)},
      {"log_normalizer", fit.loglinear.log_normalizer},
      {"iterations", fit.loglinear.iterations},
      {"residual", fit.loglinear.residual},
  };
  j["curved"] = {
      {"theta", vec_json(fit.theta)},
      {"pi", vec_json(fit.pi)},
      {"gamma", fit.gamma},
      {"alpha", fit.alpha},
      {"loglik", fit.loglik},
      {"inner_fits", fit.inner_fits},
      {"outer_steps", fit.outer_steps},
      {"s", vec_json(data.design.margins(fit.pi))},
  };
  return j.dump(2) + "\n";
}

std::vector<std::string> check_fit_json(std::string_view json_text,
                                        const Dataset& data) {
  std::vector<std::string> failures;
  const Json j = parse_json(json_text, "<fit>");
  const Vector pi = json_vec(j.at("curved").at("pi"), "curved.pi");
  const double gamma = j.at("curved").at("gamma").get<double>();
  if (pi.size() != data.design.cells()) {
    failures.push_back("pi has the wrong length");
    return failures;
  }
  const Vector t = sufficient_statistic(data.design, data.y);
  const double eq = (gamma * t - data.design.margins(pi)).cwiseAbs().maxCoeff();
  if (!(eq <= 1e-8)) {
    failures.push_back("likelihood equation residual " + fmt17(eq));
  }
  const double norm = std::abs(pi.sum() - 1.0);
  if (!(norm <= 1e-12)) failures.push_back("normalization off by " + fmt17(norm));
  if (pi.minCoeff() <= 0.0) {
    failures.push_back("non-positive probability");
  } else {
    const double cres =
        constraint_residual(constraint_canonical(data.design), pi);
    if (!(cres <= 1e-8)) {
      failures.push_back("constraint residual " + fmt17(cres));
    }
  }
  return failures;
}

std::string report_to_json(const TestReport& report) {
  auto stat = [](const TestStatistic& s) {
    return Json{{"value", s.value}, {"df", s.df}, {"p_value", s.p_value}};
  };
  Json j;
  j["cells"] = report.cells;
  j["params"] = report.params;
  j["total"] = report.total;
  j["D_L"] = stat(report.loglinear_deviance);
  j["D_M"] = stat(report.curved_deviance);
  j["L"] = stat(report.lagrange);
  j["G"] = stat(report.adjustment);
  j["D_M_clipped"] = report.curved_deviance_clipped;
  j["gamma_hat"] = report.gamma_hat;
  j["alpha_hat"] = report.alpha_hat;
  j["var_alpha"] = report.variances.alpha;
  j["var_gamma"] = report.variances.gamma;
  j["gamma_interval"] = {{"level", report.level},
                         {"low", report.gamma_interval.low},
                         {"high", report.gamma_interval.high}};
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

std::string report_to_text(const TestReport& report) {
  std::ostringstream os;
  auto line = [&](std::string_view name, const TestStatistic& s) {
    os << "  " << std::left << std::setw(4) << name << std::right << " = "
       << std::setw(12) << fmt6(s.value) << "  df = " << s.df
       << "  p = " << fmt6(s.p_value) << "\n";
  };
  os << "cells r = " << report.cells << ", parameters k = " << report.params
     << ", n = " << fmt6(report.total) << "\n";
  os << "log-linear model (normalized, no overall effect):\n";
  line("D_L", report.loglinear_deviance);
  os << "multiplicative model given the log-linear model:\n";
  line("D_M", report.curved_deviance);
  line("L", report.lagrange);
  line("G", report.adjustment);
  os << "  gamma_hat = " << fmt6(report.gamma_hat)
     << "  alpha_hat = " << fmt6(report.alpha_hat) << "\n";
  os << "  sd(alpha) = " << fmt6(std::sqrt(report.variances.alpha))
     << "  sd(gamma) = " << fmt6(std::sqrt(report.variances.gamma)) << "\n";
  os << "  " << fmt6(report.level * 100.0) << "% acceptance interval for gamma: ("
     << fmt6(report.gamma_interval.low) << ", "
     << fmt6(report.gamma_interval.high) << ")\n";
  for (const auto& w : report.warnings) os << "warning: " << w << "\n";
  return os.str();
}

std::string profile_to_csv(const ProfileCurve& profile,
                           const FeasibleRange& range) {
  std::ostringstream os;
  os << "# gamma_lower=" << fmt17(range.lower) << "\n";
  os << "# gamma_upper=" << fmt17(range.upper) << "\n";
  os << "# level=" << fmt17(profile.level) << "\n";
  if (profile.likelihood_interval) {
    os << "# lr_interval_low=" << fmt17(profile.likelihood_interval->low)
       << "\n";
    os << "# lr_interval_high=" << fmt17(profile.likelihood_interval->high)
       << "\n";
    os << "# lr_interval_truncated="
       << (profile.interval_truncated ? "true" : "false") << "\n";
  } else {
    os << "# lr_interval=none\n";
  }
  os << "gamma,D_M,g,g_slope,status\n";
  for (const auto& pt : profile.points) {
    os << fmt17(pt.gamma) << ",";
    if (pt.ok) {
      os << fmt17(pt.curved_deviance) << "," << fmt17(pt.scaling) << ","
         << fmt17(pt.scaling_slope) << ",ok\n";
    } else {
      os << ",,,infeasible\n";
    }
  }
  return os.str();
}

std::string edges_to_csv(const ConeEdges& edges) {
  std::ostringstream os;
  const Index k = edges.rays.rows();
  for (Index i = 0; i < k; ++i) os << (i ? "," : "") << "u_" << i + 1;
  os << "\n";
  for (Index c = 0; c < edges.count(); ++c) {
    for (Index i = 0; i < k; ++i) {
      os << (i ? "," : "") << fmt17(edges.rays(i, c));
    }
    os << "\n";
  }
  return os.str();
}

std::string surface_theta_csv(const SurfaceSample& sample) {
  std::ostringstream os;
  const Index k = sample.theta.cols();
  for (Index i = 0; i < k; ++i) os << "theta_" << i + 1 << ",";
  os << "in_window\n";
  for (Index r = 0; r < sample.theta.rows(); ++r) {
    for (Index i = 0; i < k; ++i) os << fmt17(sample.theta(r, i)) << ",";
    os << (within_window(sample.theta.row(r).transpose()) ? 1 : 0) << "\n";
  }
  return os.str();
}

std::string surface_tau_csv(const SurfaceSample& sample) {
  std::ostringstream os;
  const Index k = sample.tau.cols();
  for (Index i = 0; i < k; ++i) os << (i ? "," : "") << "tau_" << i + 1;
  os << "\n";
  for (Index r = 0; r < sample.tau.rows(); ++r) {
    for (Index i = 0; i < k; ++i) {
      os << (i ? "," : "") << fmt17(sample.tau(r, i));
    }
    os << "\n";
  }
  return os.str();
}

std::string grid_to_csv(const std::vector<GridPoint>& grid) {
  std::ostringstream os;
  if (grid.empty()) return os.str();
  const Index r = grid.front().p.size();
  Index k = 0;
  for (const auto& gp : grid) {
    if (gp.ok) {
      k = gp.s.size();
      break;
    }
  }
  for (Index i = 0; i < r; ++i) os << "p_" << i + 1 << ",";
  for (Index i = 0; i < r; ++i) os << "pi_hat_" << i + 1 << ",";
  for (Index i = 0; i < k; ++i) os << "s_" << i + 1 << ",";
  os << "gamma,status\n";
  for (const auto& gp : grid) {
    for (Index i = 0; i < r; ++i) os << fmt17(gp.p(i)) << ",";
    if (gp.ok) {
      for (Index i = 0; i < r; ++i) os << fmt17(gp.pi_hat(i)) << ",";
      for (Index i = 0; i < k; ++i) os << fmt17(gp.s(i)) << ",";
      os << fmt17(gp.gamma) << ",ok\n";
    } else {
      for (Index i = 0; i < r + k + 1; ++i) os << ",";
      os << "failed\n";
    }
  }
  return os.str();
}

SimConfig parse_sim_config(std::string_view json_text,
                           const std::filesystem::path& base_dir) {
  const Json j = parse_json(json_text, "<simulation config>");
  if (!j.is_object()) {
    throw Error(ErrorKind::parse, "simulation config must be a JSON object");
  }
  try {
    Matrix x;
    if (j.contains("design")) {
      x = design_from_json(j.at("design"), "design");
    } else if (j.contains("design_file")) {
      x = read_design(base_dir / j.at("design_file").get<std::string>());
    } else {
      throw Error(ErrorKind::parse,
                  "simulation config needs `design` or `design_file`");
    }
    DesignMatrix design = validate_design(std::move(x));

    Vector null_pi;
    if (j.contains("null_pi")) {
      null_pi = json_vec(j.at("null_pi"), "null_pi");
    } else if (j.contains("null_counts")) {
      const Vector counts = json_vec(j.at("null_counts"), "null_counts");
      std::vector<double> y(counts.data(), counts.data() + counts.size());
      null_pi = fit_curved_newton(design, y).pi;
    } else {
      throw Error(ErrorKind::parse,
                  "simulation config needs `null_pi` or `null_counts`");
    }

    SimConfig cfg(std::move(design), std::move(null_pi));
    if (j.contains("sample_sizes")) {
      cfg.sample_sizes = j.at("sample_sizes").get<std::vector<std::int64_t>>();
    }
    if (j.contains("replications")) {
      cfg.replications = j.at("replications").get<std::int64_t>();
    }
    if (j.contains("levels")) {
      cfg.levels = j.at("levels").get<std::vector<double>>();
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();
    if (j.contains("max_failure_fraction")) {
      cfg.max_failure_fraction = j.at("max_failure_fraction").get<double>();
    }
    validate_sim_config(cfg);
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse,
                std::string("simulation config: ") + e.what());
  }
}

}  // namespace relmodel
