#include "cavity/radial_field.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cavity/error.hpp"
#include "cavity/gravity.hpp"

namespace cavity {

RadialField::RadialField(std::vector<double> nodes, std::vector<double> values,
                         std::optional<std::vector<double>> slopes)
    : nodes_(std::move(nodes)), values_(std::move(values)), slopes_(std::move(slopes)) {
  if (nodes_.size() < 2 || nodes_.size() != values_.size())
    throw GridError("radial field needs >= 2 nodes with one value each");
  if (slopes_ && slopes_->size() != nodes_.size())
    throw GridError("nodal slopes must match the node count");
  if (!(nodes_.front() >= 0.0) || std::abs(nodes_.back() - 1.0) > 1e-12)
    throw GridError("field nodes must start at R_0 >= 0 and end at R = 1");
  nodes_.back() = 1.0;
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    if (!(nodes_[i] > nodes_[i - 1])) throw GridError("field nodes must strictly increase");
  for (double v : values_)
    if (!std::isfinite(v)) throw DomainError("field values must be finite");
  if (values_.front() < 0.0 || (values_.front() == 0.0 && nodes_.front() > 0.0))
    throw DomainError("field must be positive away from R = 0");
  for (std::size_t i = 1; i < values_.size(); ++i)
    if (!(values_[i] > values_[i - 1]))
      throw DomainError("field values must strictly increase (r' > 0)");
}

std::size_t RadialField::interval(double R) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), R);
  std::size_t i = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
  return std::min(i, nodes_.size() - 2);
}

double RadialField::value(double R) const {
  std::size_t i = interval(R);
  double t = (R - nodes_[i]) / (nodes_[i + 1] - nodes_[i]);
  return values_[i] + t * (values_[i + 1] - values_[i]);
}

double RadialField::interval_slope(std::size_t i) const {
  return (values_[i + 1] - values_[i]) / (nodes_[i + 1] - nodes_[i]);
}

double RadialField::slope(double R) const {
  std::size_t i = interval(R);
  if (!slopes_) return interval_slope(i);
  double t = (R - nodes_[i]) / (nodes_[i + 1] - nodes_[i]);
  return (*slopes_)[i] + t * ((*slopes_)[i + 1] - (*slopes_)[i]);
}

StrainSample RadialField::strain(double R) const {
  if (!(R > 0.0)) throw DomainError("strain undefined at R = 0");
  StrainSample s;
  s.R = R;
  s.v1 = slope(R);
  s.v2 = value(R) / R;
  s.det = s.v1 * s.v2 * s.v2;
  return s;
}

double RadialField::sup_distance(const RadialField& other) const {
  double out = 0.0;
  if (other.nodes_ == nodes_) {
    for (std::size_t i = 0; i < values_.size(); ++i)
      out = std::max(out, std::abs(values_[i] - other.values_[i]));
    return out;
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    out = std::max(out, std::abs(values_[i] - other.value(nodes_[i])));
  for (std::size_t i = 0; i < other.nodes_.size(); ++i)
    out = std::max(out, std::abs(other.values_[i] - value(other.nodes_[i])));
  return out;
}

RadialField RadialField::resampled(std::span<const double> grid) const {
  std::vector<double> g(grid.begin(), grid.end()), v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = value(grid[i]);
  return RadialField(std::move(g), std::move(v));
}

// ---------------------------------------------------------------------------

std::vector<double> canonical_grid(std::size_t nodes, double epsilon, double ratio) {
  if (nodes < 3) throw GridError("canonical grid needs at least 3 nodes");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw GridError("inner cutoff must lie in [0, 1)");
  if (!(ratio > 0.0)) throw GridError("grid clustering ratio must be > 0");
  const std::size_t cells = nodes - 1;
  const double q = std::pow(1.0 / ratio, 1.0 / static_cast<double>(cells - 1));
  std::vector<double> widths(cells);
  double sum = 0.0, w = 1.0;
  for (std::size_t i = 0; i < cells; ++i, w *= q) {
    widths[i] = w;
    sum += w;
  }
  std::vector<double> grid(nodes);
  grid[0] = epsilon;
  double acc = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    acc += widths[i];
    grid[i + 1] = epsilon + (1.0 - epsilon) * acc / sum;
  }
  grid.back() = 1.0;
  return grid;
}

std::vector<double> uniform_grid(std::size_t nodes, double start) {
  if (nodes < 2) throw GridError("uniform grid needs at least 2 nodes");
  std::vector<double> grid(nodes);
  for (std::size_t i = 0; i < nodes; ++i)
    grid[i] = start + (1.0 - start) * static_cast<double>(i) / static_cast<double>(nodes - 1);
  grid.back() = 1.0;
  return grid;
}

RadialField affine_map(double lambda, std::span<const double> grid) {
  if (!(lambda > 0.0)) throw DomainError("affine map needs λ > 0");
  std::vector<double> nodes(grid.begin(), grid.end()), values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = lambda * grid[i];
  std::vector<double> slopes(grid.size(), lambda);
  return RadialField(std::move(nodes), std::move(values), std::move(slopes));
}

RadialField incompressible_map(double lambda, std::span<const double> grid) {
  if (!(lambda >= 1.0))
    throw DomainError("incompressible map needs λ >= 1: for λ < 1, R³ + λ³ - 1 is "
                      "negative near the centre");
  const double shift = lambda * lambda * lambda - 1.0;
  std::vector<double> nodes(grid.begin(), grid.end()), values(grid.size()), slopes(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double R = grid[i];
    values[i] = std::cbrt(R * R * R + shift);
    slopes[i] = values[i] > 0.0 ? R * R / (values[i] * values[i]) : 1.0;
  }
  return RadialField(std::move(nodes), std::move(values), std::move(slopes));
}

double mechanical_energy(const StoredEnergy& model, const RadialField& field) {
  auto R = field.nodes();
  auto r = field.values();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < R.size(); ++i) {
    double L = R[i + 1] - R[i];
    double v1 = (r[i + 1] - r[i]) / L;
    for (double t : {kGauss2Lo, kGauss2Hi}) {
      double x = R[i] + t * L;
      double v2 = (r[i] + t * (r[i + 1] - r[i])) / x;
      total += kGauss2Weight * L * model.density(x, {v1, v2, v2}) * x * x;
    }
  }
  return total;
}

double total_energy(const StoredEnergy& model, const DensityProfile& profile,
                    const RadialField& field) {
  return mechanical_energy(model, field) - potential_energy(profile, field);
}

double cauchy_stress(const StoredEnergy& model, const RadialField& field, double R) {
  double r = field.value(R);
  if (!(r > 0.0) || !(R > 0.0)) throw DomainError("Cauchy stress undefined where r(R) = 0");
  double v2 = r / R;
  return (R * R) / (r * r) * model.partials(R, {field.slope(R), v2, v2}).phi1;
}

std::vector<double> weak_form_load(const StoredEnergy& model, const DensityProfile& profile,
                                   const RadialField& field) {
  auto R = field.nodes();
  auto r = field.values();
  const bool gravity = !profile.is_zero();
  std::vector<double> load(R.size(), 0.0);
  for (std::size_t i = 0; i + 1 < R.size(); ++i) {
    double L = R[i + 1] - R[i];
    double v1 = (r[i + 1] - r[i]) / L;
    for (double t : {kGauss2Lo, kGauss2Hi}) {
      double x = R[i] + t * L;
      double y = r[i] + t * (r[i + 1] - r[i]);
      double v2 = y / x;
      auto pt = model.partials(x, {v1, v2, v2});
      double flux = x * x * pt.phi1;
      double source = 2.0 * x * pt.phi2;
      if (gravity) source += x * x * profile(x) * profile.mass_within(x) / (y * y);
      double w = kGauss2Weight * L;
      load[i] += w * (-flux / L + source * (1.0 - t));
      load[i + 1] += w * (flux / L + source * t);
    }
  }
  load.back() = 0.0;
  return load;
}

double el_residual(const StoredEnergy& model, const DensityProfile& profile,
                   const RadialField& field) {
  double sum = 0.0;
  for (double b : weak_form_load(model, profile, field)) sum += b * b;
  return std::sqrt(sum);
}

// ---------------------------------------------------------------------------

std::string field_csv(const StoredEnergy& model, const RadialField& field) {
  std::string out = "R,r,dr,v2,T,det\n";
  auto R = field.nodes();
  auto r = field.values();
  for (std::size_t i = 0; i < R.size(); ++i) {
    double dr = field.slopes() ? (*field.slopes())[i] : field.slope(R[i]);
    double v2 = std::nan(""), T = std::nan(""), det = std::nan("");
    if (R[i] > 0.0 && r[i] > 0.0) {
      v2 = r[i] / R[i];
      T = (R[i] * R[i]) / (r[i] * r[i]) * model.partials(R[i], {dr, v2, v2}).phi1;
      det = dr * v2 * v2;
    }
    out += csv_row({R[i], r[i], dr, v2, T, det});
    out += '\n';
  }
  return out;
}

void write_field_csv(const StoredEnergy& model, const RadialField& field,
                     const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os << field_csv(model, field);
  if (!os) throw IoError("write failed for " + path.string());
}

RadialField parse_field_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("R,r,dr", 0) != 0)
    throw ConfigError("field CSV must start with header R,r,dr,v2,T,det");
  std::vector<double> R, r, dr;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    double cols[3];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (double& c : cols) {
      auto [ptr, ec] = std::from_chars(p, end, c);
      if (ec != std::errc()) throw ConfigError("malformed field CSV row: " + line);
      p = ptr < end ? ptr + 1 : ptr;
    }
    R.push_back(cols[0]);
    r.push_back(cols[1]);
    dr.push_back(cols[2]);
  }
  return RadialField(std::move(R), std::move(r), std::move(dr));
}

RadialField read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_field_csv(buf.str());
}

}  // namespace cavity
