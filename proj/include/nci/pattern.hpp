#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nci {

enum class GeometryKind { torus, open };

// Torus: columns of `periods` span the identification lattice. Open: a disk
// (ball) with `center` and `radius` bounding the patch.
struct Geometry {
  GeometryKind kind = GeometryKind::torus;
  int dim = 2;
  Eigen::MatrixXd periods;
  Eigen::VectorXd cell_lengths;
  Eigen::MatrixXd inv_periods;
  Eigen::VectorXd center;
  double radius = 0.0;

  static Geometry torus(const Eigen::MatrixXd& periods);
  static Geometry open_ball(const Eigen::VectorXd& center, double radius);

  double volume() const;
  Eigen::VectorXd wrap(const Eigen::VectorXd& delta) const;
};

// Integer lattice tags for periodic or lattice-cut patterns.
struct LatticeTags {
  Eigen::MatrixXi cells;     // site -> integer cell coordinates
  std::vector<int> sublattice;
  int sites_per_cell = 1;
  Eigen::VectorXi extent;    // torus sizes per cell direction (0 on open patches)
  Eigen::MatrixXd basis;     // columns are primitive vectors
  Eigen::MatrixXd offsets;   // columns are sublattice offsets
  bool honeycomb = false;
};

struct PointPattern {
  Geometry geometry;
  Eigen::MatrixXd positions;  // size x dim
  double r = 0.0;  // minimum separation; the open-ball discreteness radius is r/2
  double R = 0.0;
  double density = 1.0;
  std::optional<std::uint64_t> seed;
  std::optional<LatticeTags> lattice;

  int size() const { return static_cast<int>(positions.rows()); }
  int dim() const { return geometry.dim; }
  Eigen::VectorXd position(int i) const { return positions.row(i).transpose(); }
  bool is_torus() const { return geometry.kind == GeometryKind::torus; }
  int cell_count() const;
};

using PatternPtr = std::shared_ptr<const PointPattern>;

struct DisorderField {
  std::vector<double> values;
  std::uint64_t seed = 0;
  double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
  int size() const { return static_cast<int>(values.size()); }
};

// Honeycomb lattice constant giving unit density.
double honeycomb_spacing();

PointPattern build_honeycomb(int n1, int n2);
PointPattern build_honeycomb_disk(double radius_cells);
PointPattern build_chain(int n);
PointPattern build_square(int n1, int n2);
PointPattern build_square_disk(double radius, const Eigen::Vector2d& offset);
PointPattern build_amorphous(int target_count, double r_min, std::uint64_t seed,
                             GeometryKind kind);

DisorderField sample_disorder(const PointPattern& pattern, std::uint64_t seed);

Eigen::VectorXd minimal_displacement(const PointPattern& p, int i, int j);
// Integer cell difference of site i minus site j, wrapped on the torus.
Eigen::VectorXi cell_displacement(const PointPattern& p, int i, int j);

double min_pair_distance(const PointPattern& p);
double grid_covering_radius(const PointPattern& p, double spacing);

struct DeloneReport {
  double min_distance = 0.0;
  double covering = 0.0;
  double grid_spacing = 0.0;
  bool ok = false;
};
DeloneReport check_delone(const PointPattern& p);

// Sites with |x - center| <= radius - collar (open), or all sites (torus).
std::vector<int> window_sites(const PointPattern& p, double collar);
double default_collar(const PointPattern& p);

void write_pattern(std::ostream& os, const PointPattern& p);
PointPattern read_pattern(std::istream& is);

// Uniform [0,1) doubles with 53 bits from a 64-bit engine, stable across platforms.
double unit_uniform(std::uint64_t bits);
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace nci
