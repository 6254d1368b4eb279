#include "nci/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "nci/error.hpp"

namespace nci {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::precondition: return "Precondition";
    case Errc::packing_infeasible: return "PackingInfeasible";
    case Errc::not_honeycomb: return "NotHoneycomb";
    case Errc::geometry_mismatch: return "GeometryMismatch";
    case Errc::spec_violation: return "SpecViolation";
    case Errc::convergence_failure: return "ConvergenceFailure";
    case Errc::gapless: return "GaplessError";
    case Errc::not_chiral: return "NotChiral";
    case Errc::mode_unavailable: return "ModeUnavailable";
    case Errc::empty_window: return "EmptyWindow";
    case Errc::domain_error: return "DomainError";
    case Errc::singular_draw: return "SingularDraw";
    case Errc::too_few_levels: return "TooFewLevels";
    case Errc::unsupported_dimension: return "UnsupportedDimension";
    case Errc::shift_hits_site: return "ShiftHitsSite";
    case Errc::ill_conditioned: return "IllConditioned";
    case Errc::box_too_small: return "BoxTooSmall";
    case Errc::sector_too_large: return "SectorTooLarge";
    case Errc::parse_error: return "ParseError";
    case Errc::semantic_error: return "SemanticError";
  }
  return "Unknown";
}

double unit_uniform(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// ---------------------------------------------------------------- geometry

Geometry Geometry::torus(const Eigen::MatrixXd& periods) {
  Geometry g;
  g.kind = GeometryKind::torus;
  g.dim = static_cast<int>(periods.rows());
  g.periods = periods;
  g.cell_lengths = periods.colwise().norm().transpose();
  g.inv_periods = periods.inverse();
  require((g.cell_lengths.array() > 0).all(), "torus cell lengths must be positive");
  g.center = Eigen::VectorXd::Zero(g.dim);
  return g;
}

Geometry Geometry::open_ball(const Eigen::VectorXd& center, double radius) {
  Geometry g;
  g.kind = GeometryKind::open;
  g.dim = static_cast<int>(center.size());
  g.center = center;
  g.radius = radius;
  return g;
}

double Geometry::volume() const {
  if (kind == GeometryKind::torus) return std::abs(periods.determinant());
  const double r = radius;
  switch (dim) {
    case 1: return 2.0 * r;
    case 2: return std::numbers::pi * r * r;
    case 4: return 0.5 * std::numbers::pi * std::numbers::pi * r * r * r * r;
    default: return std::pow(r, dim);
  }
}

Eigen::VectorXd Geometry::wrap(const Eigen::VectorXd& delta) const {
  if (kind == GeometryKind::open) return delta;
  Eigen::VectorXd f = inv_periods * delta;
  for (int j = 0; j < f.size(); ++j) f[j] -= std::floor(f[j] + 0.5);
  return periods * f;
}

int PointPattern::cell_count() const {
  if (lattice) return size() / lattice->sites_per_cell;
  return size();
}

// ---------------------------------------------------------------- spatial hash

namespace {

// Bins points in fractional coordinates; periodic on tori. d = 1 or 2.
class SiteGrid {
 public:
  SiteGrid(const Geometry& g, double bin) : g_(g) {
    d_ = g.dim;
    if (g.kind == GeometryKind::torus) {
      frame_ = g.periods;
      origin_ = Eigen::VectorXd::Zero(d_);
    } else {
      frame_ = Eigen::MatrixXd::Identity(d_, d_) * (2.0 * g.radius + 2.0 * bin);
      origin_ = g.center - Eigen::VectorXd::Constant(d_, g.radius + bin);
    }
    inv_ = frame_.inverse();
    nb_.assign(2, 1);
    for (int j = 0; j < d_; ++j) {
      nb_[j] = std::max(1, static_cast<int>(std::floor(frame_.col(j).norm() / bin)));
    }
    bins_.assign(static_cast<std::size_t>(nb_[0] * nb_[1]), {});
  }

  void insert(int id, const Eigen::VectorXd& x) {
    pts_.push_back(x);
    bins_[bin_of(x)].push_back(id);
    ids_.push_back(id);
  }

  // Distance to nearest stored point within `reach`, or +inf.
  double nearest(const Eigen::VectorXd& q, double reach) const {
    double best = std::numeric_limits<double>::infinity();
    visit(q, reach, [&](int slot) {
      const double dd = g_.wrap(pts_[static_cast<std::size_t>(slot)] - q).norm();
      best = std::min(best, dd);
      return false;
    });
    return best;
  }

  bool any_within(const Eigen::VectorXd& q, double rad) const {
    bool hit = false;
    visit(q, rad, [&](int slot) {
      if (g_.wrap(pts_[static_cast<std::size_t>(slot)] - q).norm() < rad) hit = true;
      return hit;
    });
    return hit;
  }

  std::size_t count() const { return pts_.size(); }

 private:
  std::size_t bin_of(const Eigen::VectorXd& x) const {
    Eigen::VectorXd f = inv_ * (x - origin_);
    int b[2] = {0, 0};
    for (int j = 0; j < d_; ++j) {
      double u = f[j] - std::floor(f[j]);
      b[j] = std::min(nb_[j] - 1, static_cast<int>(u * nb_[j]));
    }
    return static_cast<std::size_t>(b[0] * nb_[1] + b[1]);
  }

  template <class F>
  void visit(const Eigen::VectorXd& q, double reach, F&& f) const {
    Eigen::VectorXd fq = inv_ * (q - origin_);
    int lo[2] = {0, 0}, hi[2] = {0, 0}, c[2] = {0, 0};
    const bool periodic = g_.kind == GeometryKind::torus;
    for (int j = 0; j < d_; ++j) {
      const double span = inv_.row(j).norm() * reach * nb_[j];
      const int k = static_cast<int>(std::ceil(span)) + 1;
      double u = periodic ? fq[j] - std::floor(fq[j]) : fq[j];
      c[j] = static_cast<int>(std::floor(u * nb_[j]));
      lo[j] = c[j] - k;
      hi[j] = c[j] + k;
      if (periodic && hi[j] - lo[j] + 1 >= nb_[j]) {
        lo[j] = 0;
        hi[j] = nb_[j] - 1;
      }
      if (!periodic) {
        lo[j] = std::max(lo[j], 0);
        hi[j] = std::min(hi[j], nb_[j] - 1);
      }
    }
    for (int a = lo[0]; a <= hi[0]; ++a) {
      for (int b = lo[1]; b <= hi[1]; ++b) {
        int ia = ((a % nb_[0]) + nb_[0]) % nb_[0];
        int ib = d_ > 1 ? ((b % nb_[1]) + nb_[1]) % nb_[1] : 0;
        for (int id : bins_[static_cast<std::size_t>(ia * nb_[1] + ib)]) {
          if (f(slot_of(id))) return;
        }
        if (d_ == 1) break;
      }
    }
  }

  int slot_of(int id) const {
    // ids are inserted in increasing order starting at 0
    return id;
  }

  const Geometry& g_;
  int d_ = 2;
  Eigen::MatrixXd frame_, inv_;
  Eigen::VectorXd origin_;
  std::vector<int> nb_;
  std::vector<std::vector<int>> bins_;
  std::vector<Eigen::VectorXd> pts_;
  std::vector<int> ids_;
};

SiteGrid make_grid(const PointPattern& p, double bin) {
  SiteGrid grid(p.geometry, bin);
  for (int i = 0; i < p.size(); ++i) grid.insert(i, p.position(i));
  return grid;
}

}  // namespace

// ---------------------------------------------------------------- metrics

double min_pair_distance(const PointPattern& p) {
  const int n = p.size();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      best = std::min(best, minimal_displacement(p, i, j).norm());
    }
  }
  return best;
}

namespace {

std::vector<Eigen::VectorXd> probe_points(const PointPattern& p, double spacing) {
  const int d = p.dim();
  std::vector<Eigen::VectorXd> probes;
  if (p.is_torus()) {
    std::vector<int> k(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      k[static_cast<std::size_t>(j)] =
          std::max(1, static_cast<int>(std::ceil(p.geometry.cell_lengths[j] / spacing)));
    }
    if (d == 1) {
      for (int a = 0; a < k[0]; ++a) probes.push_back(p.geometry.periods.col(0) * (double(a) / k[0]));
    } else {
      for (int a = 0; a < k[0]; ++a) {
        for (int b = 0; b < k[1]; ++b) {
          probes.push_back(p.geometry.periods.col(0) * (double(a) / k[0]) +
                           p.geometry.periods.col(1) * (double(b) / k[1]));
        }
      }
    }
    return probes;
  }
  const double rad = p.geometry.radius;
  const int k = static_cast<int>(std::ceil(rad / spacing));
  if (d == 1) {
    for (int a = -k; a <= k; ++a) {
      Eigen::VectorXd q = p.geometry.center;
      q[0] += a * spacing;
      if (std::abs(q[0] - p.geometry.center[0]) <= rad) probes.push_back(q);
    }
  } else {
    for (int a = -k; a <= k; ++a) {
      for (int b = -k; b <= k; ++b) {
        Eigen::VectorXd q = p.geometry.center;
        q[0] += a * spacing;
        q[1] += b * spacing;
        if ((q - p.geometry.center).norm() <= rad) probes.push_back(q);
      }
    }
  }
  return probes;
}

}  // namespace

double grid_covering_radius(const PointPattern& p, double spacing) {
  require(p.size() > 0, "empty pattern");
  require(p.dim() <= 2, "grid covering scan supports d <= 2");
  const auto probes = probe_points(p, spacing);
  double worst = 0.0;
  if (p.size() < 64) {
    for (const auto& q : probes) {
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < p.size(); ++i) best = std::min(best, p.geometry.wrap(p.position(i) - q).norm());
      worst = std::max(worst, best);
    }
    return worst;
  }
  const double bin = std::max(spacing, std::sqrt(p.geometry.volume() / p.size()));
  SiteGrid grid = make_grid(p, bin);
  for (const auto& q : probes) {
    double reach = 2.0 * bin;
    double best = grid.nearest(q, reach);
    while (!(best <= reach)) {
      reach *= 2.0;
      best = grid.nearest(q, reach);
    }
    worst = std::max(worst, best);
  }
  return worst;
}

DeloneReport check_delone(const PointPattern& p) {
  DeloneReport rep;
  rep.min_distance = p.size() > 1 ? min_pair_distance(p) : std::numeric_limits<double>::infinity();
  rep.grid_spacing = p.R / 4.0;
  rep.covering = grid_covering_radius(p, rep.grid_spacing);
  rep.ok = rep.min_distance >= p.r * (1.0 - 1e-12) && rep.covering <= p.R * (1.0 + 1e-12) &&
           0.5 * p.r <= p.R * (1.0 + 1e-12);
  return rep;
}

// ---------------------------------------------------------------- builders

double honeycomb_spacing() { return std::sqrt(4.0 / std::sqrt(3.0)); }

namespace {

LatticeTags honeycomb_tags() {
  const double s = honeycomb_spacing();
  LatticeTags t;
  t.honeycomb = true;
  t.sites_per_cell = 2;
  t.basis.resize(2, 2);
  t.basis << s, 0.5 * s, 0.0, 0.5 * s * std::sqrt(3.0);
  t.offsets.resize(2, 2);
  t.offsets.col(0).setZero();
  t.offsets.col(1) = (t.basis.col(0) + t.basis.col(1)) / 3.0;
  return t;
}

}  // namespace

PointPattern build_honeycomb(int n1, int n2) {
  require(n1 >= 2 && n2 >= 2, "honeycomb needs n1, n2 >= 2");
  LatticeTags t = honeycomb_tags();
  PointPattern p;
  Eigen::MatrixXd per(2, 2);
  per.col(0) = t.basis.col(0) * n1;
  per.col(1) = t.basis.col(1) * n2;
  p.geometry = Geometry::torus(per);
  const int n = 2 * n1 * n2;
  p.positions.resize(n, 2);
  t.cells.resize(n, 2);
  t.sublattice.assign(static_cast<std::size_t>(n), 0);
  t.extent.resize(2);
  t.extent << n1, n2;
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      for (int b = 0; b < 2; ++b) {
        const int k = 2 * (i * n2 + j) + b;
        p.positions.row(k) = (t.basis.col(0) * i + t.basis.col(1) * j + t.offsets.col(b)).transpose();
        t.cells(k, 0) = i;
        t.cells(k, 1) = j;
        t.sublattice[static_cast<std::size_t>(k)] = b;
      }
    }
  }
  const double nn = honeycomb_spacing() / std::sqrt(3.0);
  p.r = nn;
  p.R = nn;
  p.density = n / p.geometry.volume();
  p.lattice = std::move(t);
  return p;
}

PointPattern build_honeycomb_disk(double radius_cells) {
  require(radius_cells > 0.5, "disk radius too small");
  LatticeTags t = honeycomb_tags();
  const double rad = radius_cells * honeycomb_spacing();
  const int M = static_cast<int>(radius_cells * 2) + 3;
  const Eigen::Vector2d shift = t.offsets.col(1) / 2.0;
  std::vector<Eigen::Vector2d> pts;
  std::vector<std::array<int, 3>> tags;
  for (int i = -M; i <= M; ++i) {
    for (int j = -M; j <= M; ++j) {
      for (int b = 0; b < 2; ++b) {
        Eigen::Vector2d x = t.basis.col(0) * i + t.basis.col(1) * j + t.offsets.col(b) - shift;
        if (x.squaredNorm() <= rad * rad) {
          pts.push_back(x);
          tags.push_back({i, j, b});
        }
      }
    }
  }
  PointPattern p;
  p.geometry = Geometry::open_ball(Eigen::Vector2d::Zero(), rad);
  const int n = static_cast<int>(pts.size());
  p.positions.resize(n, 2);
  t.cells.resize(n, 2);
  t.sublattice.assign(static_cast<std::size_t>(n), 0);
  t.extent = Eigen::VectorXi::Zero(2);
  for (int k = 0; k < n; ++k) {
    p.positions.row(k) = pts[static_cast<std::size_t>(k)].transpose();
    t.cells(k, 0) = tags[static_cast<std::size_t>(k)][0];
    t.cells(k, 1) = tags[static_cast<std::size_t>(k)][1];
    t.sublattice[static_cast<std::size_t>(k)] = tags[static_cast<std::size_t>(k)][2];
  }
  p.lattice = std::move(t);
  p.density = 1.0;
  p.r = honeycomb_spacing() / std::sqrt(3.0);
  const double h = p.r / 8.0;
  p.R = grid_covering_radius(p, h) + h * std::sqrt(0.5);
  return p;
}

PointPattern build_chain(int n) {
  require(n >= 2, "chain needs n >= 2");
  PointPattern p;
  Eigen::MatrixXd per(1, 1);
  per(0, 0) = n;
  p.geometry = Geometry::torus(per);
  p.positions.resize(n, 1);
  LatticeTags t;
  t.cells.resize(n, 1);
  t.sublattice.assign(static_cast<std::size_t>(n), 0);
  t.extent = Eigen::VectorXi::Constant(1, n);
  t.basis = Eigen::MatrixXd::Identity(1, 1);
  t.offsets = Eigen::MatrixXd::Zero(1, 1);
  for (int i = 0; i < n; ++i) {
    p.positions(i, 0) = i;
    t.cells(i, 0) = i;
  }
  p.lattice = std::move(t);
  p.r = 1.0;
  p.R = 0.5;
  p.density = 1.0;
  return p;
}

PointPattern build_square(int n1, int n2) {
  require(n1 >= 2 && n2 >= 2, "square needs n1, n2 >= 2");
  PointPattern p;
  Eigen::MatrixXd per = Eigen::MatrixXd::Zero(2, 2);
  per(0, 0) = n1;
  per(1, 1) = n2;
  p.geometry = Geometry::torus(per);
  const int n = n1 * n2;
  p.positions.resize(n, 2);
  LatticeTags t;
  t.cells.resize(n, 2);
  t.sublattice.assign(static_cast<std::size_t>(n), 0);
  t.extent.resize(2);
  t.extent << n1, n2;
  t.basis = Eigen::MatrixXd::Identity(2, 2);
  t.offsets = Eigen::MatrixXd::Zero(2, 1);
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      const int k = i * n2 + j;
      p.positions.row(k) << i, j;
      t.cells(k, 0) = i;
      t.cells(k, 1) = j;
    }
  }
  p.lattice = std::move(t);
  p.r = 1.0;
  p.R = std::sqrt(0.5);
  p.density = 1.0;
  return p;
}

PointPattern build_square_disk(double radius, const Eigen::Vector2d& offset) {
  require(radius > 1.0, "disk radius too small");
  const int M = static_cast<int>(std::ceil(radius)) + 1;
  std::vector<Eigen::Vector2d> pts;
  for (int i = -M; i <= M; ++i) {
    for (int j = -M; j <= M; ++j) {
      Eigen::Vector2d x(i + offset[0], j + offset[1]);
      if (x.norm() <= radius) pts.push_back(x);
    }
  }
  PointPattern p;
  p.geometry = Geometry::open_ball(Eigen::Vector2d::Zero(), radius);
  p.positions.resize(static_cast<int>(pts.size()), 2);
  for (std::size_t k = 0; k < pts.size(); ++k) p.positions.row(static_cast<int>(k)) = pts[k].transpose();
  p.r = 1.0;
  p.R = std::sqrt(0.5) + 1.0;
  p.density = 1.0;
  return p;
}

PointPattern build_amorphous(int target_count, double r_min, std::uint64_t seed, GeometryKind kind) {
  require(target_count >= 1, "target_count must be positive");
  require(r_min > 0.0, "r_min must be positive");
  constexpr double jamming = 0.547;
  const double packing = std::numbers::pi * r_min * r_min / 4.0;
  if (target_count > 1 && packing >= jamming) {
    throw Error(Errc::packing_infeasible, "packing fraction " + std::to_string(packing) +
                                              " at or above RSA jamming " + std::to_string(jamming));
  }
  PointPattern p;
  const double n = target_count;
  if (kind == GeometryKind::torus) {
    p.geometry = Geometry::torus(Eigen::MatrixXd::Identity(2, 2) * std::sqrt(n));
  } else {
    p.geometry = Geometry::open_ball(Eigen::Vector2d::Zero(), std::sqrt(n / std::numbers::pi));
  }
  std::mt19937_64 eng(seed);
  SiteGrid grid(p.geometry, r_min);
  std::vector<Eigen::VectorXd> accepted;
  accepted.reserve(static_cast<std::size_t>(target_count));
  long stall = 0;
  const double side = std::sqrt(n);
  const double rad = p.geometry.radius;
  while (static_cast<int>(accepted.size()) < target_count) {
    Eigen::VectorXd x(2);
    if (kind == GeometryKind::torus) {
      x[0] = side * unit_uniform(eng());
      x[1] = side * unit_uniform(eng());
    } else {
      do {
        x[0] = rad * (2.0 * unit_uniform(eng()) - 1.0);
        x[1] = rad * (2.0 * unit_uniform(eng()) - 1.0);
      } while (x.squaredNorm() > rad * rad);
    }
    if (grid.any_within(x, r_min)) {
      if (++stall > 1000000) {
        throw Error(Errc::packing_infeasible, "acceptance stalled after " +
                                                  std::to_string(accepted.size()) + " points");
      }
      continue;
    }
    stall = 0;
    grid.insert(static_cast<int>(accepted.size()), x);
    accepted.push_back(x);
  }
  p.positions.resize(target_count, 2);
  for (int i = 0; i < target_count; ++i) p.positions.row(i) = accepted[static_cast<std::size_t>(i)].transpose();
  p.seed = seed;
  p.density = 1.0;
  // Grid maximum plus the half-diagonal of a grid cell bounds the true covering radius.
  double h = r_min / 4.0;
  double cov = grid_covering_radius(p, h);
  p.R = cov + h * std::sqrt(0.5);
  // refine while the probe count stays modest; the padding then drops to a few percent of R
  const double fine = std::max(p.R / 25.0, std::sqrt(p.geometry.volume() / 2e5));
  if (fine < h) {
    h = fine;
    p.R = grid_covering_radius(p, h) + h * std::sqrt(0.5);
  }
  p.r = target_count > 1 ? r_min : std::min(r_min, 2.0 * p.R);
  return p;
}

DisorderField sample_disorder(const PointPattern& pattern, std::uint64_t seed) {
  DisorderField f;
  f.seed = seed;
  std::mt19937_64 eng(seed);
  f.values.resize(static_cast<std::size_t>(pattern.size()));
  for (auto& v : f.values) v = unit_uniform(eng()) - 0.5;
  return f;
}

Eigen::VectorXd minimal_displacement(const PointPattern& p, int i, int j) {
  require(i >= 0 && i < p.size() && j >= 0 && j < p.size(), "site index out of range");
  return p.geometry.wrap(p.position(j) - p.position(i));
}

Eigen::VectorXi cell_displacement(const PointPattern& p, int i, int j) {
  if (!p.lattice) throw Error(Errc::mode_unavailable, "pattern has no integer cell coordinates");
  const auto& t = *p.lattice;
  Eigen::VectorXi d = t.cells.row(i).transpose() - t.cells.row(j).transpose();
  for (int k = 0; k < d.size(); ++k) {
    const int n = t.extent[k];
    if (p.is_torus() && n > 0) {
      int v = ((d[k] % n) + n) % n;
      if (2 * v >= n) v -= n;
      d[k] = v;
    }
  }
  return d;
}

std::vector<int> window_sites(const PointPattern& p, double collar) {
  std::vector<int> w;
  if (p.is_torus()) {
    w.resize(static_cast<std::size_t>(p.size()));
    for (int i = 0; i < p.size(); ++i) w[static_cast<std::size_t>(i)] = i;
    return w;
  }
  require(collar >= 0.0, "collar must be nonnegative");
  const double lim = p.geometry.radius - collar;
  for (int i = 0; i < p.size(); ++i) {
    if ((p.position(i) - p.geometry.center).norm() <= lim) w.push_back(i);
  }
  return w;
}

double default_collar(const PointPattern& p) { return p.is_torus() ? 0.0 : 0.2 * p.geometry.radius; }

// ---------------------------------------------------------------- text format

void write_pattern(std::ostream& os, const PointPattern& p) {
  os.precision(17);
  const int d = p.dim();
  os << "# geometry " << (p.is_torus() ? "torus" : "open") << " " << d << "\n";
  if (p.is_torus()) {
    os << "# periods";
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < d; ++r) os << " " << p.geometry.periods(r, c);
    os << "\n";
  } else {
    os << "# center";
    for (int k = 0; k < d; ++k) os << " " << p.geometry.center[k];
    os << "\n# radius " << p.geometry.radius << "\n";
  }
  os << "# r " << p.r << "\n# R " << p.R << "\n# density " << p.density << "\n";
  if (p.seed) os << "# seed " << *p.seed << "\n";
  if (p.lattice) {
    const auto& t = *p.lattice;
    os << "# lattice " << (t.honeycomb ? "honeycomb" : "plain") << " " << t.sites_per_cell;
    for (int k = 0; k < t.extent.size(); ++k) os << " " << t.extent[k];
    os << "\n# basis";
    for (int c = 0; c < t.basis.cols(); ++c)
      for (int r = 0; r < t.basis.rows(); ++r) os << " " << t.basis(r, c);
    os << "\n# offsets";
    for (int c = 0; c < t.offsets.cols(); ++c)
      for (int r = 0; r < t.offsets.rows(); ++r) os << " " << t.offsets(r, c);
    os << "\n";
  }
  for (int i = 0; i < p.size(); ++i) {
    os << i;
    for (int k = 0; k < d; ++k) os << " " << p.positions(i, k);
    if (p.lattice) {
      for (int k = 0; k < p.lattice->cells.cols(); ++k) os << " " << p.lattice->cells(i, k);
      os << " " << p.lattice->sublattice[static_cast<std::size_t>(i)];
    }
    os << "\n";
  }
}

PointPattern read_pattern(std::istream& is) {
  PointPattern p;
  std::string line;
  int d = 0;
  bool torus = true;
  std::vector<double> periods, center, basis, offsets;
  std::vector<int> extent;
  double radius = 0.0;
  int spc = 0;
  bool honey = false, has_lattice = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    if (line[0] == '#') {
      std::string hash, key;
      ss >> hash >> key;
      if (key == "geometry") {
        std::string kind;
        ss >> kind >> d;
        torus = kind == "torus";
      } else if (key == "periods") {
        for (double v; ss >> v;) periods.push_back(v);
      } else if (key == "center") {
        for (double v; ss >> v;) center.push_back(v);
      } else if (key == "radius") {
        ss >> radius;
      } else if (key == "r") {
        ss >> p.r;
      } else if (key == "R") {
        ss >> p.R;
      } else if (key == "density") {
        ss >> p.density;
      } else if (key == "seed") {
        std::uint64_t s = 0;
        ss >> s;
        p.seed = s;
      } else if (key == "lattice") {
        std::string kind;
        ss >> kind >> spc;
        honey = kind == "honeycomb";
        has_lattice = true;
        for (int v; ss >> v;) extent.push_back(v);
      } else if (key == "basis") {
        for (double v; ss >> v;) basis.push_back(v);
      } else if (key == "offsets") {
        for (double v; ss >> v;) offsets.push_back(v);
      }
      continue;
    }
    std::vector<double> row;
    for (double v; ss >> v;) row.push_back(v);
    rows.push_back(std::move(row));
  }
  if (d <= 0) throw Error(Errc::parse_error, "missing geometry header");
  if (torus) {
    if (periods.size() != static_cast<std::size_t>(d * d)) throw Error(Errc::parse_error, "bad periods header");
    p.geometry = Geometry::torus(Eigen::Map<Eigen::MatrixXd>(periods.data(), d, d));
  } else {
    if (center.size() != static_cast<std::size_t>(d)) throw Error(Errc::parse_error, "bad center header");
    p.geometry = Geometry::open_ball(Eigen::Map<Eigen::VectorXd>(center.data(), d), radius);
  }
  const int n = static_cast<int>(rows.size());
  p.positions.resize(n, d);
  LatticeTags t;
  const int cd = static_cast<int>(extent.size());
  if (has_lattice) {
    t.honeycomb = honey;
    t.sites_per_cell = spc;
    t.extent = Eigen::Map<Eigen::VectorXi>(extent.data(), cd);
    t.basis = Eigen::Map<Eigen::MatrixXd>(basis.data(), d, cd);
    t.offsets = Eigen::Map<Eigen::MatrixXd>(offsets.data(), d, static_cast<int>(offsets.size()) / d);
    t.cells.resize(n, cd);
    t.sublattice.assign(static_cast<std::size_t>(n), 0);
  }
  for (int i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    const std::size_t need = 1 + static_cast<std::size_t>(d) + (has_lattice ? static_cast<std::size_t>(cd + 1) : 0);
    if (row.size() != need) throw Error(Errc::parse_error, "row " + std::to_string(i) + " has wrong field count");
    for (int k = 0; k < d; ++k) p.positions(i, k) = row[static_cast<std::size_t>(1 + k)];
    if (has_lattice) {
      for (int k = 0; k < cd; ++k) t.cells(i, k) = static_cast<int>(row[static_cast<std::size_t>(1 + d + k)]);
      t.sublattice[static_cast<std::size_t>(i)] = static_cast<int>(row.back());
    }
  }
  if (has_lattice) p.lattice = std::move(t);
  return p;
}

}  // namespace nci
