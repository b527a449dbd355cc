#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cavity/energy_model.hpp"
#include "cavity/gravity.hpp"
#include "cavity/radial_field.hpp"

namespace cavity {

// Inner product used to turn the energy gradient into a step.
//   h1:       ∫ z'v' dR
//   weighted: ∫ R² Φ,11 z'v' dR with Φ,11 frozen at the current field.
// Both lead to a symmetric positive definite tridiagonal system.
enum class FlowMetric { h1, weighted };
const char* to_string(FlowMetric m);
FlowMetric flow_metric_from_string(const std::string& s);

struct FlowConfig {
  std::vector<double> grid;          // nodes on [ε, 1]
  double lambda = 1.0;               // used for the default affine start
  double dt = 1e-3;
  double max_dt = 1.0;
  double min_dt = 1e-14;
  std::size_t max_steps = 20000;
  double stop_tol = 1e-8;            // sup-norm of an accepted step
  int grow_after = 10;               // accepted steps before dt doubles
  // Energy stagnation: stop once I dropped by less than stall_tol·|I| over
  // the last stall_window accepted steps.
  std::size_t stall_window = 100;
  double stall_tol = 1e-13;
  FlowMetric metric = FlowMetric::weighted;
  std::optional<RadialField> init;   // default: affine_map(lambda, grid)
  bool record_trace = false;
};

struct FlowTraceRow {
  std::size_t step = 0;
  double t = 0.0;
  double energy = 0.0;
  double step_norm = 0.0;
};

enum class FlowStop { step_norm, stagnation, budget, step_collapse };
const char* to_string(FlowStop s);

struct FlowState {
  explicit FlowState(RadialField f) : field(std::move(f)) {}

  RadialField field;
  std::size_t step_index = 0;
  double last_step_norm = 0.0;
  double t = 0.0;
  double dt = 0.0;
  std::vector<double> energy_history;  // I(r_0), I(r_1), ...
  std::vector<FlowTraceRow> trace;
  std::size_t rejected = 0;
  FlowStop stop = FlowStop::budget;
  bool converged = false;
};

// Update direction z on the field's nodes (z at R = 1 is zero): the metric
// applied to z equals minus the weak-form load.
std::vector<double> flow_step(const StoredEnergy& model, const DensityProfile& profile,
                              const RadialField& field, FlowMetric metric = FlowMetric::weighted);

// The metric's tridiagonal stiffness on the free nodes 0..N-1.
struct Tridiagonal {
  std::vector<double> lower, diag, upper;
};
Tridiagonal flow_metric_matrix(const StoredEnergy& model, const RadialField& field,
                               FlowMetric metric);

FlowState flow_minimize(const StoredEnergy& model, const DensityProfile& profile,
                        const FlowConfig& config);

// "step,t,energy,step_norm"
void write_flow_trace(const std::vector<FlowTraceRow>& trace, const std::filesystem::path& path);

}  // namespace cavity
