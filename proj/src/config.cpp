#include "cavity/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cavity/error.hpp"
#include "json.hpp"

namespace cavity {

using nlohmann::json;

const char* to_string(Method m) {
  switch (m) {
    case Method::shoot: return "shoot";
    case Method::flow: return "flow";
    case Method::hybrid: return "hybrid";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  if (s == "shoot") return Method::shoot;
  if (s == "flow") return Method::flow;
  if (s == "hybrid") return Method::hybrid;
  throw ConfigError("unknown method '" + s + "' (expected shoot, flow or hybrid)");
}

namespace {

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  if (n > 1) out.back() = b;
  return out;
}

// Reads one JSON object, remembering which keys were consumed so that
// anything left over can be reported as a typo.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(name_ + ": expected an object");
  }

  const json* find(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(path(key) + ": expected a number");
      out = v->get<double>();
    }
  }

  void count(const char* key, std::size_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(path(key) + ": expected a count");
      double x = v->get<double>();
      if (!(x >= 0.0) || x != std::floor(x) || x > 1e12)
        throw ConfigError(path(key) + ": expected a non-negative integer");
      out = static_cast<std::size_t>(x);
    }
  }

  void flag(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(path(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }

  void text(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(path(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }

  void numbers(const char* key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (v->is_number()) {
        out = {v->get<double>()};
        return;
      }
      if (!v->is_array()) throw ConfigError(path(key) + ": expected a number or an array");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_number()) throw ConfigError(path(key) + ": array entries must be numbers");
        out.push_back(x.get<double>());
      }
    }
  }

  void weight(const char* key, WeightSpec& out) {
    if (const json* v = find(key)) {
      if (v->is_number()) {
        out = {v->get<double>(), {}};
        return;
      }
      std::vector<double> s;
      numbers(key, s);
      out = {1.0, s};
    }
  }

  std::string path(const char* key) const { return name_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw ConfigError("unknown key " + name_ + "." + item.key());
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

json weight_json(const WeightSpec& w) {
  if (w.samples.empty()) return w.constant;
  return w.samples;
}

}  // namespace

std::vector<double> SweepConfig::lambdas() const {
  return linspace(lambda_min, lambda_max, lambda_count);
}

std::vector<double> SweepConfig::rho0s() const { return linspace(rho0_min, rho0_max, rho0_count); }

Config Config::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Config c;
  Section top(doc, "config");

  if (const json* j = top.find("material")) {
    Section s(*j, "material");
    auto& m = c.material;
    s.text("model", m.model);
    s.number("p", m.p);
    s.number("kappa", m.kappa);
    s.number("C", m.C);
    s.number("gamma", m.gamma);
    s.number("delta", m.delta);
    if (const json* d = s.find("D")) {
      if (d->is_null()) m.D.reset();
      else if (d->is_number()) m.D = d->get<double>();
      else throw ConfigError("material.D: expected a number or null");
    }
    s.weight("alpha", m.alpha);
    s.weight("beta", m.beta);
    s.weight("gamma_w", m.gamma_w);
    s.number("phi_coef", m.phi_coef);
    s.number("phi_exp", m.phi_exp);
    s.number("psi_coef", m.psi_coef);
    s.number("psi_exp", m.psi_exp);
    s.finish();
  }
  if (const json* j = top.find("density")) {
    Section s(*j, "density");
    s.number("rho0", c.density.rho0);
    s.text("profile_csv", c.density.profile_csv);
    s.finish();
  }
  if (const json* j = top.find("solver")) {
    Section s(*j, "solver");
    auto& v = c.solver;
    s.number("lambda", v.lambda);
    s.number("epsilon", v.epsilon);
    std::string method = to_string(v.method);
    s.text("method", method);
    v.method = method_from_string(method);
    s.count("grid_nodes", v.grid_nodes);
    s.number("grid_ratio", v.grid_ratio);
    s.number("rtol", v.rtol);
    s.number("atol", v.atol);
    s.count("max_ode_steps", v.max_ode_steps);
    s.number("residual_tol", v.residual_tol);
    if (const json* f = s.find("flow")) {
      Section fs(*f, "solver.flow");
      fs.number("dt", v.flow.dt);
      fs.number("max_dt", v.flow.max_dt);
      fs.count("max_steps", v.flow.max_steps);
      fs.number("stop_tol", v.flow.stop_tol);
      std::string metric = to_string(v.flow.metric);
      fs.text("metric", metric);
      try {
        v.flow.metric = flow_metric_from_string(metric);
      } catch (const ConfigError& e) {
        throw ConfigError(std::string("solver.flow.metric: ") + e.what());
      }
      fs.finish();
    }
    s.finish();
  }
  if (const json* j = top.find("sweep")) {
    Section s(*j, "sweep");
    auto& w = c.sweep;
    s.number("lambda_min", w.lambda_min);
    s.number("lambda_max", w.lambda_max);
    s.count("lambda_count", w.lambda_count);
    s.number("rho0_min", w.rho0_min);
    s.number("rho0_max", w.rho0_max);
    s.count("rho0_count", w.rho0_count);
    std::size_t threads = w.threads;
    s.count("threads", threads);
    w.threads = static_cast<unsigned>(threads);
    s.finish();
  }
  if (const json* j = top.find("critical")) {
    Section s(*j, "critical");
    auto& q = c.critical;
    s.numbers("rho0", q.rho0);
    s.number("lambda_lo", q.lambda_lo);
    s.number("lambda_hi", q.lambda_hi);
    s.number("c_tol", q.c_tol);
    s.number("tol", q.tol);
    s.count("samples", q.samples);
    s.finish();
  }
  if (const json* j = top.find("output")) {
    Section s(*j, "output");
    s.text("dir", c.output.dir);
    s.flag("timing", c.output.timing);
    s.flag("profiles", c.output.profiles);
    s.flag("trace", c.output.trace);
    s.finish();
  }
  top.finish();
  c.validate();
  return c;
}

Config Config::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::string Config::to_json() const {
  const auto& m = material;
  json mat = {{"model", m.model}, {"p", m.p}, {"kappa", m.kappa}, {"C", m.C},
              {"gamma", m.gamma}, {"delta", m.delta}};
  mat["D"] = m.D ? json(*m.D) : json(nullptr);
  if (m.model == "inhomogeneous") {
    mat["alpha"] = weight_json(m.alpha);
    mat["beta"] = weight_json(m.beta);
    mat["gamma_w"] = weight_json(m.gamma_w);
    mat["phi_coef"] = m.phi_coef;
    mat["phi_exp"] = m.phi_exp;
    mat["psi_coef"] = m.psi_coef;
    mat["psi_exp"] = m.psi_exp;
  }
  const auto& v = solver;
  json doc = {
      {"material", mat},
      {"density", {{"rho0", density.rho0}, {"profile_csv", density.profile_csv}}},
      {"solver",
       {{"lambda", v.lambda},
        {"epsilon", v.epsilon},
        {"method", to_string(v.method)},
        {"grid_nodes", v.grid_nodes},
        {"grid_ratio", v.grid_ratio},
        {"rtol", v.rtol},
        {"atol", v.atol},
        {"max_ode_steps", v.max_ode_steps},
        {"residual_tol", v.residual_tol},
        {"flow",
         {{"dt", v.flow.dt},
          {"max_dt", v.flow.max_dt},
          {"max_steps", v.flow.max_steps},
          {"stop_tol", v.flow.stop_tol},
          {"metric", to_string(v.flow.metric)}}}}},
      {"sweep",
       {{"lambda_min", sweep.lambda_min},
        {"lambda_max", sweep.lambda_max},
        {"lambda_count", sweep.lambda_count},
        {"rho0_min", sweep.rho0_min},
        {"rho0_max", sweep.rho0_max},
        {"rho0_count", sweep.rho0_count},
        {"threads", sweep.threads}}},
      {"critical",
       {{"rho0", critical.rho0},
        {"lambda_lo", critical.lambda_lo},
        {"lambda_hi", critical.lambda_hi},
        {"c_tol", critical.c_tol},
        {"tol", critical.tol},
        {"samples", critical.samples}}},
      {"output",
       {{"dir", output.dir},
        {"timing", output.timing},
        {"profiles", output.profiles},
        {"trace", output.trace}}}};
  return doc.dump(2) + "\n";
}

void Config::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  const auto& v = solver;
  require(v.lambda > 0.0 && std::isfinite(v.lambda), "solver.lambda must be positive");
  require(v.epsilon > 0.0 && v.epsilon <= 0.1, "solver.epsilon must lie in (0, 0.1]");
  require(v.grid_nodes >= 3, "solver.grid_nodes must be at least 3");
  require(v.grid_ratio > 0.0, "solver.grid_ratio must be positive");
  require(v.rtol > 0.0 && v.atol > 0.0, "solver.rtol and solver.atol must be positive");
  require(v.max_ode_steps > 0, "solver.max_ode_steps must be positive");
  require(v.residual_tol > 0.0, "solver.residual_tol must be positive");
  require(v.flow.dt > 0.0 && v.flow.max_dt >= v.flow.dt, "solver.flow: need 0 < dt <= max_dt");
  require(v.flow.stop_tol > 0.0, "solver.flow.stop_tol must be positive");
  require(v.flow.max_steps > 0, "solver.flow.max_steps must be positive");

  require(density.rho0 >= 0.0 && std::isfinite(density.rho0), "density.rho0 must be >= 0");

  require(sweep.lambda_count >= 2 && sweep.rho0_count >= 2,
          "sweep: need at least two values per axis");
  require(sweep.lambda_min > 0.0 && sweep.lambda_min < sweep.lambda_max,
          "sweep: need 0 < lambda_min < lambda_max");
  require(sweep.rho0_min >= 0.0 && sweep.rho0_min < sweep.rho0_max,
          "sweep: need 0 <= rho0_min < rho0_max");

  require(!critical.rho0.empty(), "critical.rho0 must not be empty");
  for (double r : critical.rho0) require(r >= 0.0, "critical.rho0 entries must be >= 0");
  require(critical.lambda_lo > 0.0 && critical.lambda_lo < critical.lambda_hi,
          "critical: need 0 < lambda_lo < lambda_hi");
  require(critical.c_tol > 0.0 && critical.tol > 0.0, "critical: c_tol and tol must be positive");
  require(critical.samples >= 2, "critical.samples must be at least 2");

  require(material.model == "power_law" || material.model == "inhomogeneous",
          "material.model must be power_law or inhomogeneous");
  try {
    make_model();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("material: ") + e.what());
  }
}

std::shared_ptr<const StoredEnergy> Config::make_model() const {
  const auto& m = material;
  if (m.model == "power_law") {
    double D = m.D ? *m.D : stress_free_D(m.kappa, m.C, m.gamma, m.delta);
    return std::make_shared<PowerLawModel>(m.p, m.kappa, VolumetricTerm(m.C, D, m.gamma, m.delta));
  }
  if (m.model == "inhomogeneous") {
    double D = m.D ? *m.D : stress_free_D(m.phi_coef, m.C, m.gamma, m.delta);
    auto weight = [](const WeightSpec& w) {
      return w.samples.empty() ? WeightFunction(w.constant) : WeightFunction(w.samples);
    };
    return std::make_shared<InhomogeneousModel>(
        weight(m.alpha), weight(m.beta), weight(m.gamma_w), PowerTerm(m.phi_coef, m.phi_exp),
        PowerTerm(m.psi_coef, m.psi_exp), VolumetricTerm(m.C, D, m.gamma, m.delta));
  }
  throw ConfigError("unknown material.model '" + m.model + "'");
}

DensityProfile Config::make_density() const {
  if (!density.profile_csv.empty()) return DensityProfile::from_csv(density.profile_csv);
  return DensityProfile::constant(density.rho0);
}

}  // namespace cavity
