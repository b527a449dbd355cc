#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cavity/config.hpp"
#include "cavity/gradient_flow.hpp"
#include "cavity/radial_field.hpp"
#include "cavity/shooting.hpp"

namespace cavity {

// One row of records.csv.
struct SweepRecord {
  double lambda = 0.0;
  double rho0 = 0.0;
  double cavity = 0.0;  // r(ε)
  double energy = 0.0;
  double nu = 0.0;      // r'(1)
  std::string status;   // converged, flagged, flow_only, unconverged, failed, or a shooting status
  std::string method;
  double wall_time_s = 0.0;

  bool converged() const { return status == "converged" || status == "flagged"; }
};

struct SolveRequest {
  SolveRequest(std::shared_ptr<const StoredEnergy> model, DensityProfile density,
               SolverConfig solver)
      : model(std::move(model)), density(std::move(density)), solver(std::move(solver)) {}
  static SolveRequest from_config(const Config& cfg);

  std::shared_ptr<const StoredEnergy> model;
  DensityProfile density;
  SolverConfig solver;
  bool timing = false;
  bool trace = false;
  std::optional<double> warm_nu;  // previous ν* along a λ sweep
};

struct SolveOutcome {
  SweepRecord record;
  std::optional<RadialField> field;
  std::optional<RadialField> flow_field;
  std::optional<double> flow_energy;
  std::optional<double> shoot_energy;
  std::optional<double> sup_distance;  // flow vs shooting field
  std::optional<double> residual;      // g(ν*)
  std::optional<double> el_residual;   // weak-form residual of the returned field
  std::optional<FlowStop> flow_stop;
  std::optional<ShootingStatus> shoot_status;
  std::size_t flow_steps = 0;
  int shoot_iterations = 0;
  bool flagged = false;
  double elapsed_s = 0.0;  // always measured, independent of output.timing
  double epsilon = 0.0;
  std::vector<std::string> notes;
  std::vector<FlowTraceRow> trace;

  std::string to_json() const;
};

SolveOutcome solve(const SolveRequest& request);

// Hybrid agreement thresholds; larger gaps flag the record.
inline constexpr double kHybridEnergyGap = 1e-2;
inline constexpr double kHybridFieldGap = 1e-2;
// Below this r(ε) the inner layer is a truncation effect, not a cavity.
inline constexpr double kCavityNoteThreshold = 1e-2;

// Row-major table: index = i_rho * lambdas.size() + j_lambda.
struct SweepTable {
  std::vector<double> lambdas;
  std::vector<double> rho0s;
  std::vector<SweepRecord> records;
  std::vector<std::optional<RadialField>> fields;

  std::size_t index(std::size_t i_rho, std::size_t j_lambda) const {
    return i_rho * lambdas.size() + j_lambda;
  }
  const SweepRecord& at(std::size_t i_rho, std::size_t j_lambda) const {
    return records.at(index(i_rho, j_lambda));
  }
};

SweepTable single_table(const SolveOutcome& outcome);

// Rows (fixed ρ0) run concurrently; λ runs sequentially within a row so
// that each solve can warm start from its neighbour.
SweepTable sweep(const Config& cfg,
                 const std::function<void(const SweepRecord&)>& on_record = {});

struct CriticalResult {
  double rho0 = 0.0;
  double lambda_c = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::optional<double> floor;  // d0^(1/3) for materials where it applies
  std::vector<std::pair<double, double>> samples;  // (λ, r(ε)) of every solve
  int solves = 0;

  std::string to_json() const;
};

// Bisection on r(ε) >= c_tol inside [lambda_lo, lambda_hi] at the given ρ0.
CriticalResult find_critical_lambda(const Config& cfg, double rho0);

struct FreeBoundaryOutcome {
  FreeBoundaryResult result;
  double energy = 0.0;
  double elapsed_s = 0.0;
  std::string to_json() const;
};
FreeBoundaryOutcome free_boundary(const Config& cfg);

struct OracleCase {
  std::string name;
  double potential = 0.0;  // I_pot
  double brute = 0.0;      // V / (4π)
  double abs_error = 0.0;
  double rel_error = 0.0;
};
struct OracleReport {
  std::vector<OracleCase> cases;
  std::string to_json() const;
};
// Identity, incompressible (λ >= 1) and solved fields for the configured
// λ and density.
OracleReport oracle_check(const Config& cfg, const QuadSpec& quad = {});

struct ValidationReport {
  GrowthReport growth;
  CheckResult stress_free;
  CheckResult baker_ericksen;
  CheckResult derivatives;
  bool all_passed() const;
  std::string to_json() const;
};
ValidationReport validate(const Config& cfg);

// records.csv, surface_cavity.csv, surface_energy.csv, profile CSVs and
// gnuplot scripts. Throws InvalidParameter for an empty table, IoError when
// the directory cannot be written.
void emit_plots(const SweepTable& table, const StoredEnergy& model,
                const std::filesystem::path& out_dir, bool profiles = true);

std::string records_csv(const std::vector<SweepRecord>& records);
inline constexpr const char* kRecordsHeader =
    "lambda,rho0,cavity,energy,nu,status,method,wall_time_s";

}  // namespace cavity
