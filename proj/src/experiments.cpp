#include "nci/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nci/error.hpp"
#include "nci/index_theorem.hpp"
#include "nci/invariants.hpp"
#include "nci/localization.hpp"
#include "nci/manybody.hpp"

namespace nci {

using nlohmann::json;

const std::vector<ExperimentInfo>& experiments() {
  static const std::vector<ExperimentInfo> list = {
      {"haldane_chern",
       {{"n1", 12}, {"n2", 12}, {"t2", 0.6}, {"W", 0.0}, {"E_F", 0.0}, {"geometry", "torus"}, {"radius", 10.0}},
       {"geometry"}},
      {"winding_map",
       {{"n", 100}, {"m", 0.5}, {"W", 0.0}, {"W1", nullptr}, {"W2", nullptr}, {"disorder", "shared"}},
       {"disorder"}},
      {"lyapunov",
       {{"m", 0.5}, {"W", 1.0}, {"W1", nullptr}, {"W2", nullptr}, {"method", "analytic"}, {"steps", 1000000}},
       {"method"}},
      {"amorphous_chern", {{"count", 1000}, {"r_min", 0.8}, {"theta", 1.5}, {"decay", 3.0}, {"E_F", 0.0}}, {}},
      {"index_check",
       {{"radius", 12.0}, {"t2", 0.6}, {"W", 0.0}, {"E_F", 0.0}, {"model", "haldane"}, {"mass", 1.0}, {"shift_radius", 1.0}},
       {"model"}},
      {"geomid",
       {{"mode", "continuum"},
        {"samples", 200000},
        {"realizations", 200},
        {"radius", 35.0},
        {"r_min", 0.8},
        {"y1x", 1.0},
        {"y1y", 0.0},
        {"y2x", 0.0},
        {"y2y", 1.0},
        {"tolerance", 0.05}},
       {"mode"}},
      {"manybody_pairing", {{"radius", 2.5}, {"t2", 0.6}, {"E_F", 0.0}, {"N", 2}}, {}},
      {"level_stats",
       {{"model", "haldane"}, {"n1", 12}, {"n2", 12}, {"t2", 0.6}, {"W", 4.0}, {"lo", 1.0}, {"hi", 3.0}, {"dim", 400}},
       {"model"}},
  };
  return list;
}

const ExperimentInfo* find_experiment(const std::string& name) {
  for (const auto& e : experiments())
    if (e.name == name) return &e;
  return nullptr;
}

std::string experiment_names() {
  std::string s;
  for (const auto& e : experiments()) s += (s.empty() ? "" : ", ") + e.name;
  return s;
}

namespace {

struct Params {
  const json& j;
  double num(const char* k) const { return j.at(k).get<double>(); }
  int integer(const char* k) const { return static_cast<int>(std::lround(j.at(k).get<double>())); }
  std::string str(const char* k) const { return j.at(k).get<std::string>(); }
  bool has(const char* k) const { return j.contains(k) && !j.at(k).is_null(); }
};

DerivationKernel make_kernel(const TaskSettings& s) {
  return s.kernel == "roots_of_unity" ? DerivationKernel::roots_of_unity() : DerivationKernel::minimal_image();
}

Window make_window(const TaskSettings& s) { return Window{s.collar}; }

TaskOutput from_pairing(const PairingResult& r) {
  TaskOutput o;
  o.value = r.value;
  o.quantized_value = r.quantized_value;
  o.deviation = r.deviation;
  o.diagnostics["window_sites"] = r.window_sites;
  o.diagnostics["volume"] = r.volume;
  o.diagnostics["degenerate"] = r.degenerate;
  return o;
}

void disorder_pair(const Params& p, double& W1, double& W2) {
  const double W = p.num("W");
  W1 = p.has("W1") ? p.num("W1") : 0.5 * W;
  W2 = p.has("W2") ? p.num("W2") : W;
}

TaskOutput haldane_chern(const Params& p, std::uint64_t seed, const TaskSettings& s) {
  const bool torus = p.str("geometry") == "torus";
  if (!torus && p.str("geometry") != "disk") throw Error(Errc::precondition, "geometry must be torus or disk");
  auto pat = std::make_shared<const PointPattern>(torus ? build_honeycomb(p.integer("n1"), p.integer("n2"))
                                                        : build_honeycomb_disk(p.num("radius")));
  const double W = p.num("W");
  const DisorderField dis = sample_disorder(*pat, seed);
  const auto h = build_haldane(pat, p.num("t2"), W, &dis);
  const auto eig = diagonalize(h);
  const auto P = fermi_projection(eig, p.num("E_F"));
  const int J[2] = {0, 1};
  TaskOutput o = from_pairing(chern_pairing(P, h.basis, J, make_kernel(s), make_window(s)));
  o.diagnostics["gap"] = min_abs_eigenvalue(eig.values);
  o.diagnostics["rank"] = P.rank;
  o.diagnostics["sites"] = pat->size();
  return o;
}

TaskOutput winding_map(const Params& p, std::uint64_t seed, const TaskSettings& s) {
  auto chain = std::make_shared<const PointPattern>(build_chain(p.integer("n")));
  double W1, W2;
  disorder_pair(p, W1, W2);
  const std::string mode = p.str("disorder");
  if (mode != "shared" && mode != "independent") throw Error(Errc::precondition, "disorder must be shared or independent");
  const auto h = build_chiral_wire(chain, p.num("m"), W1, W2, seed,
                                   mode == "shared" ? WireDisorder::shared : WireDisorder::independent);
  const auto U = chiral_flatten(h, chiral_operator(h.basis));
  TaskOutput o = from_pairing(winding_pairing(U, make_kernel(s)));
  o.diagnostics["gap"] = min_abs_eigenvalue(eigenvalues(h.H));
  o.diagnostics["W1"] = W1;
  o.diagnostics["W2"] = W2;
  return o;
}

TaskOutput lyapunov(const Params& p, std::uint64_t seed, const TaskSettings&) {
  double W1, W2;
  disorder_pair(p, W1, W2);
  const std::string method = p.str("method");
  LyapunovResult r;
  if (method == "analytic") r = lyapunov_analytic(p.num("m"), W1, W2);
  else if (method == "birkhoff") r = lyapunov_birkhoff(p.num("m"), W1, W2, static_cast<long>(p.num("steps")), seed);
  else throw Error(Errc::precondition, "method must be analytic or birkhoff");
  if (r.domain_error) throw Error(Errc::domain_error, "logarithmic singularity in the closed form");
  TaskOutput o;
  o.value = r.value;
  o.quantized_value = 0;
  o.deviation = r.value;
  o.diagnostics["signed"] = r.signed_value;
  o.diagnostics["sigma"] = r.estimator_sigma;
  o.diagnostics["W1"] = W1;
  o.diagnostics["W2"] = W2;
  return o;
}

TaskOutput amorphous_chern(const Params& p, std::uint64_t seed, const TaskSettings& s) {
  auto pat = std::make_shared<const PointPattern>(build_amorphous(p.integer("count"), p.num("r_min"), seed, GeometryKind::open));
  const auto h = build_amorphous_magnetic(pat, p.num("theta"), p.num("decay"));
  const auto P = fermi_projection(diagonalize(h), p.num("E_F"));
  const int J[2] = {0, 1};
  TaskOutput o = from_pairing(chern_pairing(P, h.basis, J, make_kernel(s), make_window(s)));
  o.diagnostics["rank"] = P.rank;
  return o;
}

TaskOutput index_check(const Params& p, std::uint64_t seed, const TaskSettings& s) {
  auto pat = std::make_shared<const PointPattern>(build_honeycomb_disk(p.num("radius")));
  HamiltonianMatrix h;
  if (p.str("model") == "haldane") {
    const DisorderField dis = sample_disorder(*pat, seed);
    h = build_haldane(pat, p.num("t2"), p.num("W"), &dis);
  } else if (p.str("model") == "atomic") {
    h = build_atomic_limit(pat, p.num("mass"));
  } else {
    throw Error(Errc::precondition, "model must be haldane or atomic");
  }
  const auto P = fermi_projection(diagonalize(h), p.num("E_F"));
  const auto cl = build_clifford(2);
  std::mt19937_64 eng(splitmix64(seed ^ 0x5a5a5a5aULL));
  const double sr = p.num("shift_radius");
  for (int attempt = 0;; ++attempt) {
    const double rho = sr * std::sqrt(unit_uniform(eng()));
    const double phi = 2.0 * std::numbers::pi * unit_uniform(eng());
    Eigen::VectorXd w = pat->geometry.center;
    w[0] += rho * std::cos(phi);
    w[1] += rho * std::sin(phi);
    try {
      const auto D = build_dirac(pat, 1, cl, w);
      const auto r = fredholm_index(P, D);
      const int J[2] = {0, 1};
      const auto ch = chern_pairing(P, h.basis, J, make_kernel(s), make_window(s));
      TaskOutput o;
      o.value = r.index;
      o.quantized_value = r.index;
      o.deviation = std::abs(static_cast<double>(r.index) - static_cast<double>(ch.quantized_value));
      o.diagnostics["chern"] = {ch.value.real(), ch.value.imag()};
      o.diagnostics["chern_rounded"] = ch.quantized_value;
      o.diagnostics["tau"] = r.tau;
      o.diagnostics["margin"] = r.margin;
      o.diagnostics["near_kernel"] = r.near_kernel;
      o.diagnostics["connes_chern"] = {r.connes_chern.real(), r.connes_chern.imag()};
      o.diagnostics["commutator_cube"] = {r.commutator_cube.real(), r.commutator_cube.imag()};
      o.diagnostics["shift"] = {w[0], w[1]};
      return o;
    } catch (const Error& e) {
      if (e.code() != Errc::shift_hits_site || attempt > 100) throw;
    }
  }
}

TaskOutput geomid(const Params& p, std::uint64_t seed, const TaskSettings&) {
  std::vector<Eigen::VectorXd> y(2, Eigen::VectorXd(2));
  y[0] << p.num("y1x"), p.num("y1y");
  y[1] << p.num("y2x"), p.num("y2y");
  const std::string mode = p.str("mode");
  IdentityEstimate est;
  if (mode == "continuum") {
    const double tol = p.num("tolerance") * std::abs(identity_rhs(y));
    est = geometric_identity_continuum(y, static_cast<long>(p.num("samples")), 0.0, seed, tol);
  } else if (mode == "square" || mode == "rsa") {
    const double radius = p.num("radius");
    const double rmin = p.num("r_min");
    PatternGenerator gen;
    if (mode == "square") {
      gen = [radius](std::uint64_t s) {
        std::mt19937_64 e(s);
        const Eigen::Vector2d off(unit_uniform(e()), unit_uniform(e()));
        return build_square_disk(radius, off);
      };
    } else {
      const int count = static_cast<int>(std::lround(std::numbers::pi * radius * radius));
      gen = [count, rmin](std::uint64_t s) { return build_amorphous(count, rmin, s, GeometryKind::open); };
    }
    est = geometric_identity_delone(y, gen, p.integer("realizations"), seed);
  } else {
    throw Error(Errc::precondition, "mode must be continuum, square or rsa");
  }
  TaskOutput o;
  o.value = est.lhs / est.rhs;
  o.quantized_value = std::lround(o.value.real());
  o.deviation = std::abs(o.value - 1.0);
  o.diagnostics["sigma"] = est.sigma / std::abs(est.rhs);
  o.diagnostics["lhs"] = {est.lhs.real(), est.lhs.imag()};
  o.diagnostics["rhs"] = {est.rhs.real(), est.rhs.imag()};
  o.diagnostics["box_radius"] = est.box_radius;
  o.diagnostics["tail_bound"] = est.tail_bound;
  return o;
}

TaskOutput manybody_pairing(const Params& p, std::uint64_t, const TaskSettings& s) {
  auto pat = std::make_shared<const PointPattern>(build_honeycomb_disk(p.num("radius")));
  const auto h = build_haldane(pat, p.num("t2"));
  const auto P1 = fermi_projection(diagonalize(h), p.num("E_F"));
  const int N = p.integer("N");
  const auto fock = build_fock_basis(pat, N);
  // product states of occupied orbitals: second-quantized P1 has eigenvalue N there
  const auto occ = second_quantize(P1.P, fock);
  const auto eig = diagonalize(occ.entries);
  int rank = 0;
  while (rank < eig.values.size() && eig.values[eig.values.size() - 1 - rank] >= N - 0.5) ++rank;
  const cmat occ_states = eig.vectors.rightCols(rank);
  ManyBodyOperator P{fock, occ_states * occ_states.adjoint()};
  const int J[2] = {0, 1};
  TaskOutput o = from_pairing(mb_chern_pairing(P, J, make_window(s)));
  o.diagnostics["sector_dim"] = fock->dim();
  o.diagnostics["rank"] = rank;
  o.diagnostics["one_body_rank"] = P1.rank;
  return o;
}

Eigen::VectorXd poisson_levels(int n, std::uint64_t seed) {
  std::mt19937_64 e(seed);
  Eigen::VectorXd v(n);
  double x = 0.0;
  for (int k = 0; k < n; ++k) {
    double u = unit_uniform(e());
    while (u <= 0.0) u = unit_uniform(e());
    x += -std::log(u);
    v[k] = x;
  }
  return v;
}

TaskOutput level_stats(const Params& p, std::uint64_t seed, const TaskSettings&) {
  const std::string model = p.str("model");
  Eigen::VectorXd ev;
  double lo = p.num("lo"), hi = p.num("hi");
  if (model == "haldane") {
    auto pat = std::make_shared<const PointPattern>(build_honeycomb(p.integer("n1"), p.integer("n2")));
    const DisorderField dis = sample_disorder(*pat, seed);
    ev = eigenvalues(build_haldane(pat, p.num("t2"), p.num("W"), &dis).H);
  } else if (model == "gue" || model == "poisson") {
    ev = model == "gue" ? eigenvalues(sample_gue(p.integer("dim"), seed)) : poisson_levels(p.integer("dim"), seed);
    // central half of the spectrum
    const Eigen::Index n = ev.size();
    lo = ev[n / 4];
    hi = ev[(3 * n) / 4];
  } else {
    throw Error(Errc::precondition, "model must be haldane, gue or poisson");
  }
  const auto st = level_statistics(ev, lo, hi);
  TaskOutput o;
  o.value = st.spacing_variance;
  o.deviation = 0.0;
  o.diagnostics["mean_gap_ratio"] = st.mean_gap_ratio;
  o.diagnostics["levels"] = st.levels;
  o.diagnostics["window"] = {lo, hi};
  return o;
}

}  // namespace

TaskOutput run_task(const std::string& experiment, const json& params, std::uint64_t seed, const TaskSettings& settings) {
  const ExperimentInfo* info = find_experiment(experiment);
  if (!info) throw Error(Errc::semantic_error, "unknown experiment '" + experiment + "'");
  json full = info->defaults;
  for (const auto& [k, v] : params.items()) full[k] = v;
  const Params p{full};
  if (experiment == "haldane_chern") return haldane_chern(p, seed, settings);
  if (experiment == "winding_map") return winding_map(p, seed, settings);
  if (experiment == "lyapunov") return lyapunov(p, seed, settings);
  if (experiment == "amorphous_chern") return amorphous_chern(p, seed, settings);
  if (experiment == "index_check") return index_check(p, seed, settings);
  if (experiment == "geomid") return geomid(p, seed, settings);
  if (experiment == "manybody_pairing") return manybody_pairing(p, seed, settings);
  return level_stats(p, seed, settings);
}

}  // namespace nci
