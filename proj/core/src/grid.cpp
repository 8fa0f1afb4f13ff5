#include "bwave/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "bwave/errors.hpp"

namespace bwave {

GridSpec::GridSpec(double R, int nx, int ny, std::optional<double> H)
    : R_(R), H_(H.value_or(default_height(R))), nx_(nx), ny_(ny) {
  if (!(R_ > 0.0)) throw DomainError("grid half-width R must be positive");
  if (!(H_ > 0.0)) throw DomainError("grid height H must be positive");
  if (nx_ < 16 || nx_ % 2 != 0) throw DomainError("nx must be even and >= 16, got " + std::to_string(nx_));
  if (ny_ < 8) throw DomainError("ny must be >= 8, got " + std::to_string(ny_));
}

double GridSpec::default_height(double R) { return std::pow(R, 0.25); }

GridSpec GridSpec::with_spacing(double R, double h, std::optional<double> H) {
  if (!(h > 0.0)) throw DomainError("grid spacing must be positive");
  const double height = H.value_or(default_height(R));
  int nx = static_cast<int>(std::lround(R / h)) * 2;
  int ny = std::max(8, static_cast<int>(std::lround(height / h)));
  return GridSpec(R, std::max(nx, 16), ny, height);
}

GridSpec GridSpec::square_cells(double R, int nx, std::optional<double> H) {
  const double height = H.value_or(default_height(R));
  const double hx = 2.0 * R / nx;
  const int ny = std::max(8, static_cast<int>(std::lround(height / hx)));
  return GridSpec(R, nx, ny, height);
}

Field::Field(const GridSpec& grid, double fill) : grid_(grid), values_(grid.node_count(), fill) {}

Field Field::sample(const GridSpec& grid, const std::function<double(double, double)>& fn) {
  Field f(grid);
  for (int j = 0; j <= grid.ny(); ++j)
    for (int i = 0; i <= grid.nx(); ++i) f(i, j) = fn(grid.x(i), grid.y(j));
  return f;
}

double max_abs_difference(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw DomainError("fields live on different grids");
  double m = 0.0;
  auto va = a.values();
  auto vb = b.values();
  for (std::size_t k = 0; k < va.size(); ++k) m = std::max(m, std::abs(va[k] - vb[k]));
  return m;
}

BoundaryValues sample_boundary(const GridSpec& grid, const std::function<double(double, double)>& fn) {
  BoundaryValues b;
  b.left.resize(grid.ny() + 1);
  b.right.resize(grid.ny() + 1);
  b.top.resize(grid.nx() + 1);
  for (int j = 0; j <= grid.ny(); ++j) {
    b.left[j] = fn(grid.x(0), grid.y(j));
    b.right[j] = fn(grid.x(grid.nx()), grid.y(j));
  }
  for (int i = 0; i <= grid.nx(); ++i) b.top[i] = fn(grid.x(i), grid.H());
  return b;
}

void write_field_csv(std::ostream& out, const Field& field, std::span<const std::string> comments) {
  for (const auto& line : comments) out << "# " << line << '\n';
  out << "x,y,v\n";
  const GridSpec& g = field.grid();
  char buf[96];
  for (int j = 0; j <= g.ny(); ++j) {
    for (int i = 0; i <= g.nx(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", g.x(i), g.y(j), field(i, j));
      out << buf;
    }
  }
}

FieldFile read_field_csv(std::istream& in) {
  std::vector<std::string> comments;
  std::vector<double> xs, ys, vs;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      comments.push_back(line.size() > 2 && line[1] == ' ' ? line.substr(2) : line.substr(1));
      continue;
    }
    if (!header) {
      if (line != "x,y,v") throw std::runtime_error("field CSV: expected header 'x,y,v', got '" + line + "'");
      header = true;
      continue;
    }
    double x = 0, y = 0, v = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &y, &v) != 3)
      throw std::runtime_error("field CSV: malformed row '" + line + "'");
    xs.push_back(x);
    ys.push_back(y);
    vs.push_back(v);
  }
  if (!header || xs.empty()) throw std::runtime_error("field CSV: no data");
  // first row block has y = 0; its length is nx + 1
  std::size_t row = 0;
  while (row < ys.size() && ys[row] == ys[0]) ++row;
  const int nx = static_cast<int>(row) - 1;
  if (vs.size() % row != 0) throw std::runtime_error("field CSV: ragged rows");
  const int ny = static_cast<int>(vs.size() / row) - 1;
  const double R = xs[nx];
  const double H = ys.back();
  GridSpec grid(R, nx, ny, H);
  Field field(grid);
  std::copy(vs.begin(), vs.end(), field.values().begin());
  return {std::move(field), std::move(comments)};
}

}  // namespace bwave
