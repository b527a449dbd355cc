#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "cavity/cavity.h"

namespace fs = std::filesystem;

namespace {

struct ConfigHandle {
  cav_config* p = nullptr;
  ConfigHandle() { EXPECT_EQ(cav_config_default(&p), CAV_OK); }
  ~ConfigHandle() { cav_config_free(p); }
};

std::string take(char* s) {
  std::string out = s ? s : "";
  cav_string_free(s);
  return out;
}

}  // namespace

TEST(CApi, StatusNamesAndVersion) {
  EXPECT_STREQ(cav_status_name(CAV_OK), "ok");
  EXPECT_STREQ(cav_status_name(CAV_ERR_NOT_CONVERGED), "not_converged");
  EXPECT_GT(std::strlen(cav_version()), 0u);
}

TEST(CApi, ConfigAccessors) {
  ConfigHandle cfg;
  double v = 0;
  ASSERT_EQ(cav_config_get_number(cfg.p, "solver.lambda", &v), CAV_OK);
  EXPECT_EQ(v, 1.0);
  ASSERT_EQ(cav_config_set_number(cfg.p, "solver.lambda", 1.15), CAV_OK);
  ASSERT_EQ(cav_config_get_number(cfg.p, "solver.lambda", &v), CAV_OK);
  EXPECT_EQ(v, 1.15);

  // invalid values are rejected and leave the configuration unchanged
  EXPECT_EQ(cav_config_set_number(cfg.p, "solver.epsilon", 0.5), CAV_ERR_CONFIG);
  EXPECT_GT(std::strlen(cav_last_error()), 0u);
  ASSERT_EQ(cav_config_get_number(cfg.p, "solver.epsilon", &v), CAV_OK);
  EXPECT_EQ(v, 1e-3);
  EXPECT_EQ(cav_config_set_number(cfg.p, "solver.nonsense", 1.0), CAV_ERR_CONFIG);
  EXPECT_EQ(cav_config_set_string(cfg.p, "solver.method", "newton"), CAV_ERR_CONFIG);

  ASSERT_EQ(cav_config_set_string(cfg.p, "solver.method", "shoot"), CAV_OK);
  char buf[32];
  ASSERT_EQ(cav_config_get_string(cfg.p, "solver.method", buf, sizeof buf), CAV_OK);
  EXPECT_STREQ(buf, "shoot");
  ASSERT_EQ(cav_config_set_bool(cfg.p, "output.timing", 1), CAV_OK);

  char* json = nullptr;
  ASSERT_EQ(cav_config_to_json(cfg.p, &json), CAV_OK);
  cav_config* copy = nullptr;
  ASSERT_EQ(cav_config_from_json(json, &copy), CAV_OK);
  cav_string_free(json);
  ASSERT_EQ(cav_config_get_number(copy, "solver.lambda", &v), CAV_OK);
  EXPECT_EQ(v, 1.15);
  cav_config_free(copy);
}

TEST(CApi, ConfigErrors) {
  cav_config* c = nullptr;
  EXPECT_EQ(cav_config_from_json("{not json", &c), CAV_ERR_CONFIG);
  EXPECT_EQ(c, nullptr);
  EXPECT_EQ(cav_config_from_file("/nonexistent/cfg.json", &c), CAV_ERR_IO);
  EXPECT_EQ(cav_config_default(nullptr), CAV_ERR_INVALID_ARGUMENT);
}

TEST(CApi, SolveAndOutputs) {
  ConfigHandle cfg;
  cav_config_set_number(cfg.p, "solver.lambda", 1.15);
  cav_solution* sol = nullptr;
  ASSERT_EQ(cav_solve(cfg.p, &sol), CAV_OK) << cav_last_error();
  cav_record rec{};
  ASSERT_EQ(cav_solution_record(sol, &rec), CAV_OK);
  EXPECT_TRUE(rec.converged);
  EXPECT_STREQ(rec.status, "converged");
  EXPECT_NEAR(rec.cavity, 0.48346, 5e-3);
  EXPECT_NEAR(rec.energy, 0.91034, 5e-3);

  const size_t n = cav_solution_size(sol);
  ASSERT_EQ(n, 2001u);
  std::vector<double> R(n), r(n);
  ASSERT_EQ(cav_solution_field(sol, R.data(), r.data(), n), CAV_OK);
  EXPECT_EQ(r.back(), 1.15);
  EXPECT_EQ(r.front(), rec.cavity);
  EXPECT_EQ(cav_solution_field(sol, R.data(), r.data(), n - 1), CAV_ERR_INVALID_ARGUMENT);

  char* report = nullptr;
  ASSERT_EQ(cav_solution_report(sol, &report), CAV_OK);
  EXPECT_NE(take(report).find("\"sup_distance\""), std::string::npos);

  auto dir = fs::temp_directory_path() / "cavity_capi_out";
  fs::remove_all(dir);
  ASSERT_EQ(cav_solution_write_outputs(sol, dir.c_str()), CAV_OK);
  EXPECT_TRUE(fs::exists(dir / "records.csv"));
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  EXPECT_EQ(cav_solution_write_outputs(sol, "/proc/cavity_forbidden"), CAV_ERR_IO);
  cav_solution_free(sol);
}

TEST(CApi, NonConvergedSolveStillReturnsTheHandle) {
  ConfigHandle cfg;
  cav_config_set_string(cfg.p, "solver.method", "flow");
  cav_config_set_number(cfg.p, "solver.flow.max_steps", 2);
  cav_solution* sol = nullptr;
  EXPECT_EQ(cav_solve(cfg.p, &sol), CAV_ERR_NOT_CONVERGED);
  ASSERT_NE(sol, nullptr);
  cav_record rec{};
  ASSERT_EQ(cav_solution_record(sol, &rec), CAV_OK);
  EXPECT_FALSE(rec.converged);
  cav_solution_free(sol);
}

TEST(CApi, SweepTable) {
  ConfigHandle cfg;
  cav_config_set_number(cfg.p, "solver.grid_nodes", 301);
  cav_config_set_number(cfg.p, "sweep.lambda_count", 2);
  cav_config_set_number(cfg.p, "sweep.rho0_count", 2);
  cav_table* t = nullptr;
  ASSERT_EQ(cav_sweep(cfg.p, &t), CAV_OK) << cav_last_error();
  ASSERT_EQ(cav_table_size(t), 4u);
  cav_record rec{};
  ASSERT_EQ(cav_table_record(t, 3, &rec), CAV_OK);
  EXPECT_EQ(rec.lambda, 1.2);
  EXPECT_EQ(rec.rho0, 1.5);
  EXPECT_EQ(cav_table_record(t, 4, &rec), CAV_ERR_INVALID_ARGUMENT);
  auto dir = fs::temp_directory_path() / "cavity_capi_sweep";
  fs::remove_all(dir);
  ASSERT_EQ(cav_table_emit(t, dir.c_str()), CAV_OK);
  EXPECT_TRUE(fs::exists(dir / "surface_cavity.csv"));
  cav_table_free(t);
}

TEST(CApi, Reports) {
  ConfigHandle cfg;
  char* json = nullptr;
  ASSERT_EQ(cav_validate(cfg.p, &json), CAV_OK);
  EXPECT_NE(take(json).find("\"all_passed\": true"), std::string::npos);
  ASSERT_EQ(cav_free_boundary(cfg.p, &json), CAV_OK);
  EXPECT_NE(take(json).find("\"lambda\""), std::string::npos);

  // lo < hi is validated on every set, so raise hi first
  EXPECT_EQ(cav_config_set_number(cfg.p, "critical.lambda_lo", 1.25), CAV_ERR_CONFIG);
  ASSERT_EQ(cav_config_set_number(cfg.p, "critical.lambda_hi", 1.3), CAV_OK);
  ASSERT_EQ(cav_config_set_number(cfg.p, "critical.lambda_lo", 1.2), CAV_OK);
  EXPECT_EQ(cav_critical(cfg.p, &json), CAV_ERR_AMBIGUOUS);
  EXPECT_EQ(json, nullptr);
  EXPECT_NE(std::string(cav_last_error()).find("c_tol"), std::string::npos);
}
