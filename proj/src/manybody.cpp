#include "nci/manybody.hpp"

#include <algorithm>

#include "nci/error.hpp"

namespace nci {

namespace {

constexpr long long sector_limit = 200000;

// Removes site from an ascending list; returns the fermionic sign or 0 if absent.
int annihilate(std::vector<int>& s, int site) {
  auto it = std::lower_bound(s.begin(), s.end(), site);
  if (it == s.end() || *it != site) return 0;
  const auto pos = it - s.begin();
  s.erase(it);
  return pos % 2 ? -1 : 1;
}

int create(std::vector<int>& s, int site) {
  auto it = std::lower_bound(s.begin(), s.end(), site);
  if (it != s.end() && *it == site) return 0;
  const auto pos = it - s.begin();
  s.insert(it, site);
  return pos % 2 ? -1 : 1;
}

std::vector<char> window_mask(const PointPattern& p, const Window& w, int& count) {
  const auto sites = window_sites(p, w.collar.value_or(default_collar(p)));
  if (sites.empty()) throw Error(Errc::empty_window, "no sites in the trace window");
  std::vector<char> mask(static_cast<std::size_t>(p.size()), 0);
  for (int s : sites) mask[static_cast<std::size_t>(s)] = 1;
  count = static_cast<int>(sites.size());
  return mask;
}

}  // namespace

FockBasis::FockBasis(PatternPtr pattern, int N) : pattern_(std::move(pattern)), sites_(pattern_->size()), N_(N) {
  require(N >= 1 && N <= sites_, "need 1 <= N <= S");
  binom_.assign(static_cast<std::size_t>(sites_ + 1), std::vector<long long>(static_cast<std::size_t>(N + 1), 0));
  for (int n = 0; n <= sites_; ++n) {
    binom_[static_cast<std::size_t>(n)][0] = 1;
    for (int k = 1; k <= std::min(n, N); ++k) {
      const long long v = binom_[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(k - 1)] +
                          (k <= n - 1 ? binom_[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(k)] : 0);
      binom_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] = std::min(v, sector_limit + 1);
    }
  }
  const long long count = binom_[static_cast<std::size_t>(sites_)][static_cast<std::size_t>(N)];
  if (count > sector_limit)
    throw Error(Errc::sector_too_large, "C(" + std::to_string(sites_) + ", " + std::to_string(N) + ") exceeds 2e5");
  states_.reserve(static_cast<std::size_t>(count));
  std::vector<int> c(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) c[static_cast<std::size_t>(k)] = k;
  for (;;) {
    states_.push_back(c);
    int k = N - 1;
    while (k >= 0 && c[static_cast<std::size_t>(k)] == sites_ - N + k) --k;
    if (k < 0) break;
    ++c[static_cast<std::size_t>(k)];
    for (int t = k + 1; t < N; ++t) c[static_cast<std::size_t>(t)] = c[static_cast<std::size_t>(t - 1)] + 1;
  }
}

int FockBasis::index(std::span<const int> s) const {
  if (static_cast<int>(s.size()) != N_) return -1;
  long long rank = 0;
  int prev = -1;
  for (int i = 0; i < N_; ++i) {
    const int ci = s[static_cast<std::size_t>(i)];
    if (ci <= prev || ci >= sites_) return -1;
    // subsets that agree so far and take a smaller element here
    for (int v = prev + 1; v < ci; ++v) rank += binom_[static_cast<std::size_t>(sites_ - 1 - v)][static_cast<std::size_t>(N_ - 1 - i)];
    prev = ci;
  }
  return static_cast<int>(rank);
}

FockPtr build_fock_basis(PatternPtr pattern, int N) { return std::make_shared<const FockBasis>(std::move(pattern), N); }

ManyBodyOperator second_quantize(const cmat& h, FockPtr basis) {
  const int S = basis->sites();
  require(h.rows() == S && h.cols() == S, "one-body matrix does not match the pattern");
  const int D = basis->dim();
  ManyBodyOperator out{basis, cmat::Zero(D, D)};
  std::vector<std::vector<int>> nz(static_cast<std::size_t>(S));
  for (int y = 0; y < S; ++y)
    for (int x = 0; x < S; ++x)
      if (h(x, y) != cplx(0.0)) nz[static_cast<std::size_t>(y)].push_back(x);
  std::vector<int> work;
  for (int c = 0; c < D; ++c) {
    const auto& xi = basis->state(c);
    for (int y : xi) {
      for (int x : nz[static_cast<std::size_t>(y)]) {
        work = xi;
        const int s1 = annihilate(work, y);
        const int s2 = create(work, x);
        if (s2 == 0) continue;
        out.entries(basis->index(work), c) += static_cast<double>(s1 * s2) * h(x, y);
      }
    }
  }
  return out;
}

ManyBodyOperator represent(const CoefficientSpec& spec, FockPtr basis, const DisorderField* disorder) {
  const SiteBasis sb(basis->pattern(), 1);
  const int D = basis->dim();
  if (spec.order > basis->particles()) {
    validate_spec(sb, spec, disorder);
    return {basis, cmat::Zero(D, D)};
  }
  if (spec.order == 1) return second_quantize(build_from_spec(sb, spec, disorder).H, basis);
  require(spec.order == 2, "only one- and two-body specs are supported");
  validate_spec(sb, spec, disorder);

  const auto& p = *basis->pattern();
  const int S = basis->sites();
  std::vector<std::vector<int>> near(static_cast<std::size_t>(S));
  for (int a = 0; a < S; ++a)
    for (int b = 0; b < S; ++b)
      if (spec.reaches(minimal_displacement(p, a, b).norm())) near[static_cast<std::size_t>(a)].push_back(b);

  ManyBodyOperator out{basis, cmat::Zero(D, D)};
  std::vector<int> work;
  int tuple[4];
  for (int c = 0; c < D; ++c) {
    const auto& xi = basis->state(c);
    for (std::size_t i1 = 0; i1 < xi.size(); ++i1) {
      for (std::size_t i2 = i1 + 1; i2 < xi.size(); ++i2) {
        const int y1 = xi[i1], y2 = xi[i2];
        if (!spec.reaches(minimal_displacement(p, y1, y2).norm())) continue;
        const auto& cand = near[static_cast<std::size_t>(y1)];
        for (int x1 : cand) {
          for (int x2 : cand) {
            if (x2 <= x1) continue;
            tuple[0] = x1;
            tuple[1] = x2;
            tuple[2] = y1;
            tuple[3] = y2;
            const cplx v = spec.kernel(kernel_tuple(sb, tuple, disorder));
            if (v == cplx(0.0)) continue;
            work = xi;
            int sign = annihilate(work, y1);
            sign *= annihilate(work, y2);
            sign *= create(work, x2);
            if (sign == 0) continue;
            sign *= create(work, x1);
            if (sign == 0) continue;
            out.entries(basis->index(work), c) += static_cast<double>(sign) * v;
          }
        }
      }
    }
  }
  return out;
}

ManyBodyOperator number_operator(FockPtr basis) {
  const int D = basis->dim();
  ManyBodyOperator out{basis, cmat::Zero(D, D)};
  out.entries.diagonal().setConstant(static_cast<double>(basis->particles()));
  return out;
}

namespace {

Eigen::VectorXd state_coordinates(const FockBasis& b, int j, bool allow_torus) {
  const auto& p = *b.pattern();
  if (p.is_torus() && !allow_torus)
    throw Error(Errc::geometry_mismatch, "position operator is not single-valued on a torus");
  require(j >= 0 && j < p.dim(), "direction out of range");
  Eigen::VectorXd X(b.dim());
  for (int k = 0; k < b.dim(); ++k) {
    double s = 0.0;
    for (int x : b.state(k)) s += p.positions(x, j);
    X[k] = s;
  }
  return X;
}

}  // namespace

ManyBodyOperator position_operator(FockPtr basis, int j, bool allow_torus) {
  const Eigen::VectorXd X = state_coordinates(*basis, j, allow_torus);
  return {basis, X.cast<cplx>().asDiagonal()};
}

ManyBodyOperator mb_derive(const ManyBodyOperator& A, int j, bool allow_torus) {
  const Eigen::VectorXd X = state_coordinates(*A.basis, j, allow_torus);
  const Eigen::Index D = X.size();
  ManyBodyOperator out{A.basis, cmat(D, D)};
  for (Eigen::Index c = 0; c < D; ++c)
    for (Eigen::Index r = 0; r < D; ++r) out.entries(r, c) = cplx(0.0, X[r] - X[c]) * A.entries(r, c);
  return out;
}

ManyBodyOperator mb_derive_commutator(const ManyBodyOperator& A, int j, bool allow_torus) {
  const cmat X = position_operator(A.basis, j, allow_torus).entries;
  return {A.basis, cplx(0.0, 1.0) * (X * A.entries - A.entries * X)};
}

cplx mb_trace_per_volume(const ManyBodyOperator& A, const Window& w) {
  const auto& b = *A.basis;
  int count = 0;
  const auto mask = window_mask(*b.pattern(), w, count);
  cplx s = 0.0;
  for (int k = 0; k < b.dim(); ++k)
    if (mask[static_cast<std::size_t>(b.state(k).front())]) s += A.entries(k, k);
  return s / static_cast<double>(count);
}

PairingResult mb_chern_pairing(const ManyBodyOperator& P, std::span<const int> J, const Window& w) {
  require(J.size() % 2 == 0 && !J.empty(), "J must have even, nonzero size");
  const auto& b = *P.basis;
  int count = 0;
  const auto mask = window_mask(*b.pattern(), w, count);
  std::vector<int> anchored;
  for (int k = 0; k < b.dim(); ++k)
    if (mask[static_cast<std::size_t>(b.state(k).front())]) anchored.push_back(k);
  const Eigen::Index na = static_cast<Eigen::Index>(anchored.size());

  std::vector<cmat> Dp;
  for (int j : J) Dp.push_back(mb_derive(P, j).entries);
  cmat Pa(na, P.entries.cols());
  for (Eigen::Index r = 0; r < na; ++r) Pa.row(r) = P.entries.row(anchored[static_cast<std::size_t>(r)]);

  std::vector<int> perm(J.size());
  for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = static_cast<int>(k);
  cplx total = 0.0;
  do {
    int inversions = 0;
    for (std::size_t a = 0; a < perm.size(); ++a)
      for (std::size_t c = a + 1; c < perm.size(); ++c) inversions += perm[a] > perm[c];
    const cmat& last = Dp[static_cast<std::size_t>(perm.back())];
    cmat R(last.rows(), na);
    for (Eigen::Index c = 0; c < na; ++c) R.col(c) = last.col(anchored[static_cast<std::size_t>(c)]);
    for (std::size_t t = perm.size() - 1; t-- > 0;) R = Dp[static_cast<std::size_t>(perm[t])] * R;
    cplx tr = 0.0;
    for (Eigen::Index c = 0; c < na; ++c) tr += Pa.row(c).transpose().cwiseProduct(R.col(c)).sum();
    total += (inversions % 2 ? -1.0 : 1.0) * tr;
  } while (std::next_permutation(perm.begin(), perm.end()));

  PairingResult res = make_pairing_result(lambda_d(static_cast<int>(J.size())) * total / static_cast<double>(count));
  res.window_sites = count;
  res.volume = count;
  return res;
}

}  // namespace nci
