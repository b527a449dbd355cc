#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cavity/energy_model.hpp"
#include "cavity/gradient_flow.hpp"
#include "cavity/gravity.hpp"

namespace cavity {

enum class Method { shoot, flow, hybrid };
const char* to_string(Method m);
Method method_from_string(const std::string& s);

// Weight function given either as a constant or as uniform samples on [0,1].
struct WeightSpec {
  double constant = 1.0;
  std::vector<double> samples;
};

struct MaterialConfig {
  std::string model = "power_law";  // or "inhomogeneous"
  double p = 2.0;
  double kappa = 1.0;
  double C = 1.0;
  double gamma = 2.0;
  double delta = 2.0;
  std::optional<double> D;  // default: stress free
  // inhomogeneous only
  WeightSpec alpha, beta, gamma_w{1.0, {}};
  double phi_coef = 1.0, phi_exp = 2.0;
  double psi_coef = 0.0, psi_exp = 2.0;
};

struct DensityConfig {
  double rho0 = 1.0;
  std::string profile_csv;  // overrides rho0 when set
};

struct FlowSettings {
  double dt = 1e-3;
  double max_dt = 1.0;
  std::size_t max_steps = 20000;
  double stop_tol = 1e-8;
  FlowMetric metric = FlowMetric::weighted;
};

struct SolverConfig {
  double lambda = 1.0;
  double epsilon = 1e-3;
  Method method = Method::hybrid;
  std::size_t grid_nodes = 2001;
  double grid_ratio = 1e-3;
  double rtol = 1e-10;
  double atol = 1e-12;
  std::size_t max_ode_steps = 200000;
  double residual_tol = 1e-8;
  FlowSettings flow;
};

struct SweepConfig {
  double lambda_min = 0.9, lambda_max = 1.2;
  std::size_t lambda_count = 13;
  double rho0_min = 0.5, rho0_max = 1.5;
  std::size_t rho0_count = 11;
  unsigned threads = 0;  // 0: hardware concurrency

  std::vector<double> lambdas() const;
  std::vector<double> rho0s() const;
};

struct CriticalConfig {
  std::vector<double> rho0 = {1.0};
  double lambda_lo = 1.0;
  double lambda_hi = 1.2;
  double c_tol = 1e-2;
  double tol = 1e-3;
  std::size_t samples = 5;  // monotonicity pre-sampling
};

struct OutputConfig {
  std::string dir;        // empty: no files
  bool timing = false;    // wall_time_s column; 0 when off (byte-stable output)
  bool profiles = true;
  bool trace = false;
};

struct Config {
  MaterialConfig material;
  DensityConfig density;
  SolverConfig solver;
  SweepConfig sweep;
  CriticalConfig critical;
  OutputConfig output;

  // Missing keys keep their defaults; unknown keys are errors.
  static Config from_json(const std::string& text);
  static Config from_file(const std::filesystem::path& path);
  std::string to_json() const;
  void validate() const;  // throws ConfigError

  std::shared_ptr<const StoredEnergy> make_model() const;
  DensityProfile make_density() const;
};

}  // namespace cavity
