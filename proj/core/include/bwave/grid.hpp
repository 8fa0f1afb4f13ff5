#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace bwave {

/// Uniform node grid on the truncated rectangle (-R, R) x (0, H).
///
/// Nodes are (x_i, y_j) = (-R + i hx, j hy) for 0 <= i <= nx, 0 <= j <= ny.
/// nx is even so that (0, 0) is the node i = nx / 2.
class GridSpec {
 public:
  /// H defaults to R^{1/4}. Throws DomainError on nx < 16, odd nx, ny < 8,
  /// or nonpositive extents.
  GridSpec(double R, int nx, int ny, std::optional<double> H = std::nullopt);

  /// Spacing-driven constructor: nx = 2R/h rounded to an even integer,
  /// ny = H/h rounded (at least 8).
  static GridSpec with_spacing(double R, double h, std::optional<double> H = std::nullopt);
  /// nx given, ny chosen so hy is as close to hx as possible.
  static GridSpec square_cells(double R, int nx, std::optional<double> H = std::nullopt);

  static double default_height(double R);

  double R() const { return R_; }
  double H() const { return H_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return 2.0 * R_ / nx_; }
  double hy() const { return H_ / ny_; }
  double x(int i) const { return -R_ + i * hx(); }
  double y(int j) const { return j * hy(); }
  int center_index() const { return nx_ / 2; }
  std::size_t node_count() const { return static_cast<std::size_t>(nx_ + 1) * (ny_ + 1); }

  bool operator==(const GridSpec&) const = default;

 private:
  double R_;
  double H_;
  int nx_;
  int ny_;
};

/// Nodal values over a GridSpec, stored j-major: index = j (nx+1) + i.
class Field {
 public:
  explicit Field(const GridSpec& grid, double fill = 0.0);

  static Field sample(const GridSpec& grid, const std::function<double(double, double)>& fn);

  double& operator()(int i, int j) { return values_[index(i, j)]; }
  double operator()(int i, int j) const { return values_[index(i, j)]; }

  const GridSpec& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * (grid_.nx() + 1) + static_cast<std::size_t>(i);
  }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

double max_abs_difference(const Field& a, const Field& b);

/// Dirichlet values on the lateral sides and the top of the rectangle.
/// left/right are indexed by j = 0..ny, top by i = 0..nx.
struct BoundaryValues {
  std::vector<double> left;
  std::vector<double> right;
  std::vector<double> top;
};

BoundaryValues sample_boundary(const GridSpec& grid, const std::function<double(double, double)>& fn);

/// Writes "x,y,v" rows, j outer and i inner, 17 significant digits.
/// Lines in `comments` are emitted first, each prefixed with "# ".
void write_field_csv(std::ostream& out, const Field& field, std::span<const std::string> comments = {});

struct FieldFile {
  Field field;
  std::vector<std::string> comments;  // without the "# " prefix
};

/// Reads the format produced by write_field_csv and reconstructs the grid.
FieldFile read_field_csv(std::istream& in);

}  // namespace bwave
