#include "nci/models.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <unordered_map>

#include "nci/error.hpp"

namespace nci {

double hermiticity_residual(const cmat& H) { return (H - H.adjoint()).cwiseAbs().maxCoeff(); }

namespace {

KernelSite make_site(const SiteBasis& b, int idx, const Eigen::VectorXd& pos, const DisorderField* dis) {
  KernelSite k;
  k.site = b.site_of(idx);
  k.orbital = b.orbital_of(idx);
  k.position = pos;
  k.disorder = dis ? (*dis)[k.site] : 0.0;
  return k;
}

// Tuple of flattened indices -> kernel sites with positions unwrapped relative to the first.
std::vector<KernelSite> tuple_sites(const SiteBasis& b, std::span<const int> idx, const DisorderField* dis) {
  const auto& p = *b.pattern;
  std::vector<KernelSite> out;
  out.reserve(idx.size());
  const int s0 = b.site_of(idx[0]);
  const Eigen::VectorXd x0 = p.position(s0);
  for (int id : idx) {
    const int s = b.site_of(id);
    out.push_back(make_site(b, id, x0 + minimal_displacement(p, s0, s), dis));
  }
  return out;
}

double tuple_extent(const SiteBasis& b, std::span<const int> idx) {
  double ext = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = i + 1; j < idx.size(); ++j)
      ext = std::max(ext, minimal_displacement(*b.pattern, b.site_of(idx[i]), b.site_of(idx[j])).norm());
  return ext;
}

}  // namespace

std::vector<KernelSite> kernel_tuple(const SiteBasis& b, std::span<const int> idx, const DisorderField* disorder) {
  return tuple_sites(b, idx, disorder);
}

namespace {

bool close(cplx a, cplx b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a) + std::abs(b)); }

}  // namespace

void validate_spec(const SiteBasis& basis, const CoefficientSpec& spec, const DisorderField* disorder,
                   std::uint64_t sample_seed) {
  require(static_cast<bool>(spec.kernel), "spec has no kernel");
  require(spec.order == 1 || spec.order == 2, "spec order must be 1 or 2");
  const int n = basis.dim();
  const auto& p = *basis.pattern;
  std::mt19937_64 eng(sample_seed);
  auto pick = [&](int m) { return static_cast<int>(unit_uniform(eng()) * m); };
  const int samples = std::min(n, 48);
  const int arity = 2 * spec.order;

  for (int s = 0; s < samples; ++s) {
    const int x = pick(n);
    std::vector<int> near;
    for (int y = 0; y < n; ++y) {
      if (spec.reaches(minimal_displacement(p, basis.site_of(x), basis.site_of(y)).norm())) near.push_back(y);
    }
    std::vector<int> tuple(static_cast<std::size_t>(arity));
    for (int rep = 0; rep < 8; ++rep) {
      tuple[0] = x;
      for (int k = 1; k < arity; ++k) tuple[static_cast<std::size_t>(k)] = near[static_cast<std::size_t>(pick(static_cast<int>(near.size())))];
      if (spec.order == 2) {
        if (tuple[0] == tuple[1] || tuple[2] == tuple[3]) continue;
        if (tuple[0] > tuple[1]) std::swap(tuple[0], tuple[1]);
        if (tuple[2] > tuple[3]) std::swap(tuple[2], tuple[3]);
      }
      auto fwd = tuple_sites(basis, tuple, disorder);
      const cplx h = spec.kernel(fwd);

      std::vector<int> rev(tuple.size());
      const int half = spec.order;
      for (int k = 0; k < half; ++k) {
        rev[static_cast<std::size_t>(k)] = tuple[static_cast<std::size_t>(half + k)];
        rev[static_cast<std::size_t>(half + k)] = tuple[static_cast<std::size_t>(k)];
      }
      const cplx hr = spec.kernel(tuple_sites(basis, rev, disorder));
      if (!close(h, std::conj(hr))) throw Error(Errc::spec_violation, "hermiticity");

      Eigen::VectorXd shift(p.dim());
      for (int k = 0; k < p.dim(); ++k) shift[k] = 10.0 * (unit_uniform(eng()) - 0.5);
      auto moved = fwd;
      for (auto& ks : moved) ks.position += shift;
      if (!close(h, spec.kernel(moved))) throw Error(Errc::spec_violation, "equivariance");
    }
  }

  // Range: tuples spanning more than the declared range must vanish.
  for (int s = 0; s < 4 * samples; ++s) {
    std::vector<int> tuple(static_cast<std::size_t>(arity));
    for (auto& t : tuple) t = pick(n);
    if (spec.order == 2) {
      if (tuple[0] == tuple[1] || tuple[2] == tuple[3]) continue;
      if (tuple[0] > tuple[1]) std::swap(tuple[0], tuple[1]);
      if (tuple[2] > tuple[3]) std::swap(tuple[2], tuple[3]);
    }
    if (spec.reaches(tuple_extent(basis, tuple))) continue;
    if (std::abs(spec.kernel(tuple_sites(basis, tuple, disorder))) > 1e-12)
      throw Error(Errc::spec_violation, "range");
  }
}

HamiltonianMatrix build_from_spec(const SiteBasis& basis, const CoefficientSpec& spec, const DisorderField* disorder) {
  require(spec.order == 1, "build_from_spec takes one-body specs");
  validate_spec(basis, spec, disorder);
  const int n = basis.dim();
  HamiltonianMatrix out{basis, cmat::Zero(n, n)};
  const auto& p = *basis.pattern;
  int pair[2];
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      if (!spec.reaches(minimal_displacement(p, basis.site_of(x), basis.site_of(y)).norm())) continue;
      pair[0] = x;
      pair[1] = y;
      out.H(x, y) = spec.kernel(tuple_sites(basis, pair, disorder));
    }
  }
  return out;
}

// ---------------------------------------------------------------- Haldane

namespace {

class CellIndex {
 public:
  explicit CellIndex(const PointPattern& p) : p_(p) {
    const auto& t = *p.lattice;
    if (!p.is_torus()) {
      for (int k = 0; k < p.size(); ++k) map_[key(t.cells(k, 0), t.cells(k, 1), t.sublattice[static_cast<std::size_t>(k)])] = k;
    }
  }
  int find(int i, int j, int b) const {
    const auto& t = *p_.lattice;
    if (p_.is_torus()) {
      const int n1 = t.extent[0], n2 = t.extent[1];
      i = ((i % n1) + n1) % n1;
      j = ((j % n2) + n2) % n2;
      return 2 * (i * n2 + j) + b;
    }
    auto it = map_.find(key(i, j, b));
    return it == map_.end() ? -1 : it->second;
  }

 private:
  static std::int64_t key(int i, int j, int b) {
    return ((static_cast<std::int64_t>(i) + (1 << 20)) << 22) ^ ((static_cast<std::int64_t>(j) + (1 << 20)) << 1) ^ b;
  }
  const PointPattern& p_;
  std::unordered_map<std::int64_t, int> map_;
};

}  // namespace

HamiltonianMatrix build_haldane(PatternPtr pattern, double t2, double W, const DisorderField* disorder) {
  const auto& p = *pattern;
  if (!p.lattice || !p.lattice->honeycomb) throw Error(Errc::not_honeycomb, "pattern carries no honeycomb tags");
  if (W != 0.0) require(disorder != nullptr && disorder->size() == p.size(), "disorder field required for W != 0");
  const auto& t = *p.lattice;
  const int n = p.size();
  HamiltonianMatrix out{SiteBasis(pattern, 1), cmat::Zero(n, n)};
  cmat& H = out.H;
  CellIndex index(p);
  const Eigen::Vector2d a1 = t.basis.col(0), a2 = t.basis.col(1);
  const Eigen::Vector2d dB = t.offsets.col(1);
  const double nn = dB.norm();
  const std::array<Eigen::Vector2d, 3> nnA = {dB, dB - a1, dB - a2};
  constexpr int steps[6][2] = {{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}};
  const cplx I(0.0, 1.0);

  for (int y = 0; y < n; ++y) {
    const int i = t.cells(y, 0), j = t.cells(y, 1), b = t.sublattice[static_cast<std::size_t>(y)];
    if (b == 0) {
      for (auto [di, dj] : {std::pair{0, 0}, std::pair{-1, 0}, std::pair{0, -1}}) {
        const int x = index.find(i + di, j + dj, 1);
        if (x < 0) continue;
        H(x, y) += 1.0;
        H(y, x) += 1.0;
      }
    }
    for (const auto& st : steps) {
      const int x = index.find(i + st[0], j + st[1], b);
      if (x < 0) continue;
      const Eigen::Vector2d v = a1 * st[0] + a2 * st[1];
      double turn = 0.0;
      for (const auto& u0 : nnA) {
        const Eigen::Vector2d u = b == 0 ? u0 : Eigen::Vector2d(-u0);
        const Eigen::Vector2d w = v - u;
        if (std::abs(w.norm() - nn) < 1e-9) turn = (u[0] * w[1] - u[1] * w[0]) > 0 ? 1.0 : -1.0;
      }
      // path y -> c -> x turning counterclockwise means x -> y turns clockwise
      H(x, y) += -I * t2 * turn;
    }
    if (W != 0.0) H(y, y) += W * (*disorder)[y];
  }
  return out;
}

HamiltonianMatrix build_atomic_limit(PatternPtr pattern, double mass) {
  const auto& p = *pattern;
  if (!p.lattice || !p.lattice->honeycomb) throw Error(Errc::not_honeycomb, "pattern carries no honeycomb tags");
  const int n = p.size();
  HamiltonianMatrix out{SiteBasis(pattern, 1), cmat::Zero(n, n)};
  for (int k = 0; k < n; ++k) out.H(k, k) = p.lattice->sublattice[static_cast<std::size_t>(k)] == 0 ? mass : -mass;
  return out;
}

// ---------------------------------------------------------------- chiral wire

HamiltonianMatrix build_chiral_wire(PatternPtr chain, double m, double W1, double W2, const DisorderField& xi_t,
                                    const DisorderField& xi_m) {
  const auto& p = *chain;
  require(p.dim() == 1 && p.is_torus(), "chiral wire needs a chain");
  const int n = p.size();
  require(xi_t.size() == n && xi_m.size() == n, "disorder field size mismatch");
  SiteBasis basis(chain, 2);
  HamiltonianMatrix out{basis, cmat::Zero(2 * n, 2 * n)};
  cmat& H = out.H;
  const cplx I(0.0, 1.0);
  for (int x = 0; x < n; ++x) {
    const int xp = (x + 1) % n;
    const double tx = 1.0 + W1 * xi_t[x];
    const double mx = m + W2 * xi_m[x];
    H(basis.index(x, 0), basis.index(xp, 1)) += tx;
    H(basis.index(xp, 1), basis.index(x, 0)) += tx;
    H(basis.index(x, 0), basis.index(x, 1)) += -I * mx;
    H(basis.index(x, 1), basis.index(x, 0)) += I * mx;
  }
  return out;
}

HamiltonianMatrix build_chiral_wire(PatternPtr chain, double m, double W1, double W2, std::uint64_t seed,
                                    WireDisorder mode) {
  DisorderField xi = sample_disorder(*chain, seed);
  if (mode == WireDisorder::shared) return build_chiral_wire(chain, m, W1, W2, xi, xi);
  DisorderField xm = sample_disorder(*chain, splitmix64(seed ^ 0x6d2d6d2dULL));
  return build_chiral_wire(chain, m, W1, W2, xi, xm);
}

HamiltonianMatrix build_chiral_wire(PatternPtr chain, double m) {
  DisorderField zero;
  zero.values.assign(static_cast<std::size_t>(chain->size()), 0.0);
  return build_chiral_wire(chain, m, 0.0, 0.0, zero, zero);
}

cmat chiral_operator(const SiteBasis& basis) {
  require(basis.orbitals == 2, "chiral operator needs two orbitals per site");
  cmat S = cmat::Zero(basis.dim(), basis.dim());
  for (int k = 0; k < basis.dim(); ++k) S(k, k) = basis.orbital_of(k) == 0 ? 1.0 : -1.0;
  return S;
}

// ---------------------------------------------------------------- amorphous

HamiltonianMatrix build_amorphous_magnetic(PatternPtr pattern, double theta, double decay) {
  const auto& p = *pattern;
  if (p.is_torus()) throw Error(Errc::geometry_mismatch, "magnetic phases need an open patch");
  require(p.dim() == 2, "amorphous magnetic model is two-dimensional");
  require(decay > 0.0, "decay must be positive");
  const int n = p.size();
  HamiltonianMatrix out{SiteBasis(pattern, 1), cmat::Zero(n, n)};
  for (int a = 0; a < n; ++a) {
    out.H(a, a) = 1.0;
    const double xa = p.positions(a, 0), ya = p.positions(a, 1);
    for (int b = a + 1; b < n; ++b) {
      const double xb = p.positions(b, 0), yb = p.positions(b, 1);
      const double dist = std::hypot(xa - xb, ya - yb);
      const double mag = std::exp(-decay * dist);
      if (mag < 1e-12) continue;
      const double wedge = xa * yb - ya * xb;
      const cplx v = std::polar(mag, theta * wedge);
      out.H(a, b) = v;
      out.H(b, a) = std::conj(v);
    }
  }
  return out;
}

// ---------------------------------------------------------------- binary dump

namespace {

static_assert(std::endian::native == std::endian::little, "matrix dump assumes a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error(Errc::parse_error, "truncated matrix dump");
  return v;
}

}  // namespace

void write_matrix(std::ostream& os, const HamiltonianMatrix& h) {
  os.write("NCIM", 4);
  put<std::uint32_t>(os, 1);
  put<std::uint64_t>(os, static_cast<std::uint64_t>(h.H.rows()));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(h.H.cols()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(h.basis.orbitals));
  put<std::uint32_t>(os, 0);
  for (Eigen::Index r = 0; r < h.H.rows(); ++r) {
    for (Eigen::Index c = 0; c < h.H.cols(); ++c) {
      put(os, h.H(r, c).real());
      put(os, h.H(r, c).imag());
    }
  }
}

cmat read_matrix(std::istream& is, int* orbitals) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "NCIM", 4) != 0) throw Error(Errc::parse_error, "not a matrix dump");
  if (get<std::uint32_t>(is) != 1) throw Error(Errc::parse_error, "unsupported dump version");
  const auto rows = get<std::uint64_t>(is);
  const auto cols = get<std::uint64_t>(is);
  const auto orb = get<std::uint32_t>(is);
  get<std::uint32_t>(is);
  if (orbitals) *orbitals = static_cast<int>(orb);
  cmat M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      const double re = get<double>(is);
      const double im = get<double>(is);
      M(r, c) = cplx(re, im);
    }
  }
  return M;
}

}  // namespace nci
