#include "nci/index_theorem.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nci/error.hpp"

namespace nci {

namespace {

cmat kron(const cmat& A, const cmat& B) {
  cmat K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

cmat pauli(int k) {
  cmat s = cmat::Zero(2, 2);
  const cplx I(0.0, 1.0);
  if (k == 0) s = cmat::Identity(2, 2);
  if (k == 1) s << 0, 1, 1, 0;
  if (k == 2) s << 0, -I, I, 0;
  if (k == 3) s << 1, 0, 0, -1;
  return s;
}

double sphere_area(int d) {
  // surface of the unit sphere S^{d-1}
  if (d == 2) return 2.0 * std::numbers::pi;
  if (d == 4) return 2.0 * std::numbers::pi * std::numbers::pi;
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

}  // namespace

CliffordRep build_clifford(int d) {
  CliffordRep c;
  c.d = d;
  if (d == 2) {
    c.gamma = {pauli(1), pauli(2)};
  } else if (d == 4) {
    c.gamma = {kron(pauli(1), pauli(1)), kron(pauli(1), pauli(2)), kron(pauli(1), pauli(3)), kron(pauli(2), pauli(0))};
  } else {
    throw Error(Errc::unsupported_dimension, "Clifford representation for d = " + std::to_string(d));
  }
  c.n = static_cast<int>(c.gamma[0].rows());
  cmat prod = cmat::Identity(c.n, c.n);
  for (const auto& g : c.gamma) prod = prod * g;
  // i^{d/2} (-1)^{d(d-1)/2} gamma_1 ... gamma_d
  cplx phase = 1.0;
  for (int k = 0; k < d / 2; ++k) phase *= cplx(0.0, 1.0);
  if ((d * (d - 1) / 2) % 2) phase = -phase;
  c.gamma0 = phase * prod;
  return c;
}

DiracOperator build_dirac(PatternPtr pattern, int orbitals, const CliffordRep& clifford, const Eigen::VectorXd& w) {
  const auto& p = *pattern;
  if (p.is_torus()) throw Error(Errc::geometry_mismatch, "Dirac operator needs an open patch");
  require(p.dim() == clifford.d && w.size() == clifford.d, "dimension mismatch");
  DiracOperator out;
  out.basis = SiteBasis(pattern, orbitals);
  out.clifford = clifford;
  out.w = w;
  const int S = p.size();
  out.unit.resize(S, p.dim());
  out.dist.resize(S);
  for (int s = 0; s < S; ++s) {
    const Eigen::VectorXd u = p.position(s) - w;
    out.dist[s] = u.norm();
    if (out.dist[s] <= 1e-6) throw Error(Errc::shift_hits_site, "shift lies on site " + std::to_string(s));
    out.unit.row(s) = (u / out.dist[s]).transpose();
  }
  const int dim = out.basis.dim();
  const int n = clifford.n;
  out.D = cmat::Zero(n * dim, n * dim);
  out.Dhat = cmat::Zero(n * dim, n * dim);
  for (int j = 0; j < clifford.d; ++j) {
    const cmat& g = clifford.gamma[static_cast<std::size_t>(j)];
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (g(a, b) == cplx(0.0)) continue;
        for (int k = 0; k < dim; ++k) {
          const int s = out.basis.site_of(k);
          out.D(a * dim + k, b * dim + k) += g(a, b) * (out.unit(s, j) * out.dist[s]);
          out.Dhat(a * dim + k, b * dim + k) += g(a, b) * out.unit(s, j);
        }
      }
    }
  }
  return out;
}

IndexResult fredholm_index(const FermiProjection& P, const DiracOperator& dirac, const IndexOptions& opt) {
  const auto& cl = dirac.clifford;
  const auto& basis = dirac.basis;
  const auto& p = *basis.pattern;
  const int dim = basis.dim();
  require(P.P.rows() == dim, "projection does not match the Dirac basis");
  IndexResult res;

  std::vector<int> plus, minus;
  for (int a = 0; a < cl.n; ++a) {
    require(std::abs(std::abs(cl.gamma0(a, a)) - 1.0) < 1e-12, "grading must be diagonal in the chosen representation");
    (cl.gamma0(a, a).real() > 0 ? plus : minus).push_back(a);
  }
  const int h = static_cast<int>(plus.size());
  const int r = P.rank;

  std::vector<char> interior(static_cast<std::size_t>(dim), 0);
  {
    const double lim = p.geometry.radius * (1.0 - opt.collar_fraction);
    for (int k = 0; k < dim; ++k)
      interior[static_cast<std::size_t>(k)] = (p.position(basis.site_of(k)) - p.geometry.center).norm() <= lim;
  }

  if (r > 0) {
    const cmat& V = P.occupied;
    cmat T(h * r, h * r);
    for (int b = 0; b < h; ++b) {
      for (int a = 0; a < h; ++a) {
        Eigen::VectorXcd diag = Eigen::VectorXcd::Zero(dim);
        for (int j = 0; j < cl.d; ++j) {
          const cplx g = cl.gamma[static_cast<std::size_t>(j)](minus[static_cast<std::size_t>(b)], plus[static_cast<std::size_t>(a)]);
          if (g == cplx(0.0)) continue;
          for (int k = 0; k < dim; ++k) diag[k] += g * dirac.unit(basis.site_of(k), j);
        }
        T.block(b * r, a * r, r, r) = V.adjoint() * diag.asDiagonal() * V;
      }
    }
    Eigen::BDCSVD<cmat> svd(T, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();  // descending
    const Eigen::Index m = sv.size();

    std::vector<double> profile = {0.0};
    for (Eigen::Index k = m; k-- > 0;)
      if (sv[k] < 0.5) profile.push_back(sv[k]);
    profile.push_back(0.5);
    double best = -1.0;
    for (std::size_t k = 0; k + 1 < profile.size(); ++k) {
      const double g = profile[k + 1] - profile[k];
      if (g > best) {
        best = g;
        res.tau = 0.5 * (profile[k] + profile[k + 1]);
      }
    }
    res.margin = best;
    for (Eigen::Index k = m; k-- > 0 && res.smallest.size() < 8;) res.smallest.push_back(sv[k]);
    if (best < 1e-2) throw Error(Errc::ill_conditioned, "no singular-value gap >= 1e-2 below 0.5");

    auto weight = [&](const Eigen::VectorXcd& vec) {
      double wsum = 0.0;
      for (int a = 0; a < h; ++a) {
        const Eigen::VectorXcd psi = V * vec.segment(a * r, r);
        for (int k = 0; k < dim; ++k)
          if (interior[static_cast<std::size_t>(k)]) wsum += std::norm(psi[k]);
      }
      return wsum;
    };
    for (Eigen::Index k = 0; k < m; ++k) {
      if (sv[k] >= res.tau) continue;
      ++res.near_kernel;
      if (weight(svd.matrixV().col(k)) >= 0.5) ++res.interior_right;
      if (weight(svd.matrixU().col(k)) >= 0.5) ++res.interior_left;
    }
    res.index = res.interior_right - res.interior_left;
  }

  if (opt.cross_checks && r > 0) {
    std::vector<int> win;
    for (int k = 0; k < dim; ++k)
      if (interior[static_cast<std::size_t>(k)]) win.push_back(k);
    const Eigen::Index nw = static_cast<Eigen::Index>(win.size());

    if (cl.d == 2) {
      Eigen::VectorXcd u(dim);
      for (int k = 0; k < dim; ++k) {
        const int s = basis.site_of(k);
        u[k] = cplx(dirac.unit(s, 0), dirac.unit(s, 1));
      }
      const cmat A = P.P - u.asDiagonal() * P.P * u.conjugate().asDiagonal();
      cmat R(dim, nw);
      for (Eigen::Index c = 0; c < nw; ++c) R.col(c) = A.col(win[static_cast<std::size_t>(c)]);
      R = A * R;
      cplx tr = 0.0;
      for (Eigen::Index c = 0; c < nw; ++c) tr += A.row(win[static_cast<std::size_t>(c)]).transpose().cwiseProduct(R.col(c)).sum();
      res.commutator_cube = tr;
    }

    const int n = cl.n;
    cmat Pl = cmat::Zero(n * dim, n * dim);
    for (int a = 0; a < n; ++a) Pl.block(a * dim, a * dim, dim, dim) = P.P;
    const cmat M = dirac.Dhat * Pl - Pl * dirac.Dhat;
    std::vector<int> lw;
    for (int a = 0; a < n; ++a)
      for (int k : win) lw.push_back(a * dim + k);
    const Eigen::Index nl = static_cast<Eigen::Index>(lw.size());
    cmat R(n * dim, nl);
    for (Eigen::Index c = 0; c < nl; ++c) R.col(c) = M.col(lw[static_cast<std::size_t>(c)]);
    for (int t = 0; t < cl.d; ++t) R = M * R;
    cmat G0 = cmat::Zero(n * dim, n * dim);
    for (int a = 0; a < n; ++a) G0.block(a * dim, a * dim, dim, dim).diagonal().setConstant(cl.gamma0(a, a));
    const cmat G = G0 * dirac.Dhat;
    cplx tr = 0.0;
    for (Eigen::Index c = 0; c < nl; ++c) tr += G.row(lw[static_cast<std::size_t>(c)]).transpose().cwiseProduct(R.col(c)).sum();
    res.connes_chern = 0.5 * tr;
  }
  return res;
}

// ---------------------------------------------------------------- geometric identities

cplx gamma_trace(const CliffordRep& c, const std::vector<Eigen::VectorXd>& y) {
  cmat prod = c.gamma0;
  for (const auto& v : y) {
    cmat g = cmat::Zero(c.n, c.n);
    for (int j = 0; j < c.d; ++j) g += v[j] * c.gamma[static_cast<std::size_t>(j)];
    prod = prod * g;
  }
  return prod.trace();
}

cplx identity_integrand(const CliffordRep& c, const std::vector<Eigen::VectorXd>& y, const Eigen::VectorXd& w) {
  const int d = c.d;
  std::vector<Eigen::VectorXd> hat(static_cast<std::size_t>(d + 1));
  for (int i = 0; i <= d; ++i) {
    Eigen::VectorXd u = (i < d ? y[static_cast<std::size_t>(i)] : Eigen::VectorXd::Zero(d)) - w;
    hat[static_cast<std::size_t>(i)] = u / u.norm();
  }
  std::vector<Eigen::VectorXd> a(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) a[static_cast<std::size_t>(i)] = hat[static_cast<std::size_t>(i)] - hat[static_cast<std::size_t>(i + 1)];
  if (d == 2) {
    // tr(gamma0 (gamma.a)(gamma.b)) = 2i (a x b) for the chosen representation
    return cplx(0.0, 2.0) * (a[0][0] * a[1][1] - a[0][1] * a[1][0]);
  }
  return gamma_trace(c, a);
}

cplx identity_rhs(const std::vector<Eigen::VectorXd>& y) {
  const int d = static_cast<int>(y.size());
  Eigen::MatrixXd Y(d, d);
  for (int i = 0; i < d; ++i) Y.col(i) = y[static_cast<std::size_t>(i)];
  return lambda_d(d) * Y.determinant();
}

double identity_tail_bound(const CliffordRep& c, const std::vector<Eigen::VectorXd>& y, double B) {
  const int d = c.d;
  double r = 0.0, delta = 0.0;
  for (int i = 0; i < d; ++i) {
    r = std::max(r, y[static_cast<std::size_t>(i)].norm());
    const Eigen::VectorXd next = i + 1 < d ? y[static_cast<std::size_t>(i + 1)] : Eigen::VectorXd::Zero(d);
    delta = std::max(delta, (y[static_cast<std::size_t>(i)] - next).norm());
  }
  if (r == 0.0 || delta == 0.0) return 0.0;
  if (B < 2.0 * r) return std::numeric_limits<double>::infinity();
  // |f| <= 2^{d/2} d (r/(rho-r))^2 (2 delta/(rho-r))^{d-1}; rho^{d-1} <= 2^{d-1}(rho-r)^{d-1} for rho >= 2r.
  return sphere_area(d) * std::pow(2.0, 0.5 * d) * d * r * r * std::pow(2.0 * delta, d - 1) * std::pow(2.0, d - 1) / (B - r);
}

namespace {

struct RadialSampler {
  int d;
  double a, B, norm;

  double cdf_raw(double rho) const {
    const double s = a * a + rho * rho;
    if (d == 2) return 1.0 / a - 1.0 / std::sqrt(s);
    return 2.0 / (3.0 * a) - 1.0 / std::sqrt(s) + a * a / (3.0 * s * std::sqrt(s));
  }
  RadialSampler(int d_, double a_, double B_) : d(d_), a(a_), B(B_) { norm = cdf_raw(B); }

  double draw(double u) const {
    const double target = u * norm;
    if (d == 2) {
      const double inv = 1.0 / a - target;
      const double s = 1.0 / (inv * inv);
      return std::sqrt(std::max(0.0, s - a * a));
    }
    double lo = 0.0, hi = B;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (cdf_raw(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  // 1/q(w) for the d-dimensional density q.
  double inverse_density(double rho, double area) const {
    return area * norm * std::pow(a * a + rho * rho, 0.5 * (d + 1));
  }
};

}  // namespace

IdentityEstimate geometric_identity_continuum(const std::vector<Eigen::VectorXd>& y, long samples, double box_radius,
                                              std::uint64_t seed, double tolerance) {
  require(!y.empty(), "need y points");
  const int d = static_cast<int>(y.size());
  for (const auto& v : y) require(v.size() == d, "y points must have d components");
  require(samples >= 2, "need at least two samples");
  require(tolerance > 0.0, "tolerance must be positive");
  const CliffordRep cl = build_clifford(d);

  Eigen::VectorXd centre = Eigen::VectorXd::Zero(d);
  for (const auto& v : y) centre += v;
  centre /= (d + 1);

  IdentityEstimate est;
  est.rhs = identity_rhs(y);
  double r = 0.0;
  for (const auto& v : y) r = std::max(r, v.norm());
  double B = box_radius;
  if (B <= 0.0) {
    // tail(B) = K/(B - r): solve K/(B - r) = tolerance/2
    const double Bref = 2.0 * r + 1.0;
    const double K = identity_tail_bound(cl, y, Bref) * (Bref - r);
    B = std::max(2.0 * r, r + 2.0 * K / tolerance) * (1.0 + 1e-9) + centre.norm();
  }
  est.box_radius = B;
  est.tail_bound = identity_tail_bound(cl, y, B - centre.norm());
  if (!(est.tail_bound <= 0.5 * tolerance))
    throw Error(Errc::box_too_small, "tail bound " + std::to_string(est.tail_bound) + " exceeds half the tolerance");

  double a = 1.0;
  for (const auto& v : y) a = std::max(a, (v - centre).norm());
  a = std::max(a, centre.norm());
  const RadialSampler rs(d, a, B);
  const double area = sphere_area(d);
  std::mt19937_64 eng(seed);
  auto gauss = [&] {
    double u1 = unit_uniform(eng());
    while (u1 <= 0.0) u1 = unit_uniform(eng());
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * unit_uniform(eng()));
  };
  const long pairs = samples / 2;
  cplx sum = 0.0;
  double sq = 0.0;
  Eigen::VectorXd dir(d);
  for (long k = 0; k < pairs; ++k) {
    const double rho = rs.draw(unit_uniform(eng()));
    if (d == 2) {
      const double phi = 2.0 * std::numbers::pi * unit_uniform(eng());
      dir << std::cos(phi), std::sin(phi);
    } else {
      for (int j = 0; j < d; ++j) dir[j] = gauss();
      dir.normalize();
    }
    const double wgt = rs.inverse_density(rho, area);
    const cplx g = 0.5 * wgt * (identity_integrand(cl, y, centre + rho * dir) + identity_integrand(cl, y, centre - rho * dir));
    sum += g;
    sq += std::norm(g);
  }
  const double np = static_cast<double>(pairs);
  est.lhs = sum / np;
  const double var = std::max(0.0, sq / np - std::norm(est.lhs));
  est.sigma = std::sqrt(var / (np - 1.0));
  est.samples = 2 * pairs;
  return est;
}

IdentityEstimate geometric_identity_delone(const std::vector<Eigen::VectorXd>& y, const PatternGenerator& gen,
                                           int realizations, std::uint64_t seed) {
  require(realizations >= 2, "need at least two realizations");
  const int d = static_cast<int>(y.size());
  const CliffordRep cl = build_clifford(d);
  IdentityEstimate est;
  est.rhs = identity_rhs(y);
  cplx sum = 0.0;
  double sq = 0.0;
  for (int k = 0; k < realizations; ++k) {
    const PointPattern p = gen(splitmix64(seed + static_cast<std::uint64_t>(k)));
    require(p.dim() == d, "pattern dimension mismatch");
    cplx s = 0.0;
    for (int i = 0; i < p.size(); ++i) s += identity_integrand(cl, y, p.position(i)) / p.density;
    sum += s;
    sq += std::norm(s);
    est.box_radius = p.geometry.radius;
  }
  const double n = realizations;
  est.lhs = sum / n;
  est.sigma = std::sqrt(std::max(0.0, sq / n - std::norm(est.lhs)) / (n - 1.0));
  est.samples = realizations;
  est.tail_bound = identity_tail_bound(cl, y, est.box_radius);
  return est;
}

Eigen::VectorXd phase_difference_scaled(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double s) {
  const Eigen::VectorXd a = s * x + y;
  const Eigen::VectorXd b = s * x;
  return s * (a / a.norm() - b / b.norm());
}

}  // namespace nci
