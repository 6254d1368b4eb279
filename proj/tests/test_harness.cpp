#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "nci/config.hpp"
#include "nci/experiments.hpp"
#include "nci/localization.hpp"
#include "nci/sweep.hpp"

using namespace nci;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "nci_harness_tests";
  fs::create_directories(d);
  const fs::path p = d / name;
  fs::remove(p);
  fs::remove(summary_path_for(p.string()));
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);)
    if (!l.empty()) out.push_back(l);
  return out;
}

SweepConfig small_haldane(const fs::path& out, const std::string& seeds = "0, 1, 2") {
  return parse_config("experiment = haldane_chern\n"
                      "[model]\n n1 = 4\n n2 = 4\n W = 2\n"
                      "[run]\n seeds = " + seeds + "\n master_seed = 11\n output = " + out.string() + "\n");
}

}  // namespace

TEST_CASE("minimal valid config") {
  const auto cfg = parse_config("experiment = haldane_chern\n");
  CHECK_NOTHROW(check_config(cfg));
  CHECK(cfg.grid_points() == 1);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{0});
}

TEST_CASE("config grammar") {
  const auto cfg = parse_config(
      "# comment\n"
      "experiment = lyapunov   # trailing\n"
      "[model]\n"
      "method = birkhoff\n"
      "steps = 2000\n"
      "[grid]\n"
      "W = 0.1, 5, 3\n"
      "m = 0.5, 1.5, 2\n"
      "[run]\n"
      "seed_count = 4\n"
      "collar = 0.1\n");
  CHECK_NOTHROW(check_config(cfg));
  CHECK(cfg.model["method"] == "birkhoff");
  CHECK(cfg.grid_points() == 6);
  CHECK(cfg.seeds.size() == 4);
  REQUIRE(cfg.collar.has_value());
  // last axis varies fastest
  CHECK(cfg.params_at(1)["W"].get<double>() == 0.1);
  CHECK(cfg.params_at(1)["m"].get<double>() == 1.5);
  CHECK(cfg.params_at(2)["W"].get<double>() == doctest::Approx(2.55));
}

TEST_CASE("grid count 0 is a semantic error") {
  const auto cfg = parse_config("experiment = haldane_chern\n[grid]\nW = 0, 1, 0\n");
  try {
    check_config(cfg);
    FAIL("expected a semantic error");
  } catch (const ConfigError& e) {
    CHECK(e.code() == Errc::semantic_error);
    REQUIRE(e.problems().size() == 1);
    CHECK(e.problems()[0].find("count 0") != std::string::npos);
  }
}

TEST_CASE("unknown experiment lists valid names") {
  try {
    check_config(parse_config("experiment = haldane\n"));
    FAIL("expected a semantic error");
  } catch (const ConfigError& e) {
    CHECK(e.code() == Errc::semantic_error);
    const std::string msg = e.problems().at(0);
    for (const char* n : {"haldane_chern", "winding_map", "lyapunov", "amorphous_chern", "index_check", "geomid",
                          "manybody_pairing", "level_stats"})
      CHECK(msg.find(n) != std::string::npos);
  }
}

TEST_CASE("semantic errors are reported together") {
  const auto cfg = parse_config("experiment = haldane_chern\n[model]\nbogus = 1\ngeometry = 3\n[grid]\nn1 = 4, 8, 0\n"
                                "[run]\nkernel = fourier\n");
  try {
    check_config(cfg);
    FAIL("expected a semantic error");
  } catch (const ConfigError& e) {
    CHECK(e.problems().size() == 4);
  }
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse_config("experiment = haldane_chern\n[grid]\nW = 0, 1\n[run]\nseeds = 1, x\n");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(e.code() == Errc::parse_error);
    REQUIRE(e.problems().size() == 2);
    CHECK(e.problems()[0].rfind("line 3, column 5: ", 0) == 0);
    CHECK(e.problems()[1].rfind("line 5, column 9: ", 0) == 0);
  }
  CHECK_THROWS_AS(parse_config("[model\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("t2 = 0.6\n"), ConfigError);
}

TEST_CASE("task seeds follow the documented mix") {
  CHECK(task_seed(11, 3, 2) == splitmix64(splitmix64(splitmix64(11) + 3) + 2));
  CHECK(task_seed(11, 3, 2) != task_seed(11, 2, 3));
}

TEST_CASE("three seeds give three records and one summary row") {
  const auto out = scratch("count.jsonl");
  const auto rep = run_sweep(small_haldane(out), {1, false, true});
  CHECK(rep.tasks == 3);
  CHECK(rep.failed == 0);
  REQUIRE(rep.records.size() == 3);
  REQUIRE(rep.summary.size() == 1);
  CHECK(rep.summary[0].count == 3);
  CHECK(lines_of(slurp(out)).size() == 3);
  CHECK(lines_of(slurp(rep.summary_path)).size() == 2);
  for (const auto& r : rep.records) {
    for (const char* k : {"task", "experiment", "params", "seed", "value", "quantized_value", "deviation", "diagnostics",
                          "wall_time_ms", "code_version"})
      CHECK(r.contains(k));
    CHECK(r["params"]["n1"].get<double>() == 4.0);
    CHECK(r["params"]["t2"].get<double>() == 0.6);
  }
  // self-describing: the record alone reproduces its value
  const auto& r0 = rep.records[1];
  const auto again = run_task("haldane_chern", r0["params"], r0["seed"].get<std::uint64_t>(), {});
  CHECK(again.value.real() == r0["value"][0].get<double>());
}

TEST_CASE("identical configs give bit-identical values") {
  const auto a = run_sweep(small_haldane(scratch("det_a.jsonl")), {1, false, true});
  const auto b = run_sweep(small_haldane(scratch("det_b.jsonl")), {1, false, true});
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i]["value"] == b.records[i]["value"]);
}

TEST_CASE("summary is independent of the worker count") {
  auto cfg = parse_config("experiment = haldane_chern\n[model]\nn1 = 4\nn2 = 4\n[grid]\nW = 0.5, 3, 3\n"
                          "[run]\nseed_count = 4\n");
  cfg.output = scratch("workers_1.jsonl").string();
  const auto one = run_sweep(cfg, {1, false, true});
  cfg.output = scratch("workers_3.jsonl").string();
  const auto three = run_sweep(cfg, {3, false, true});
  REQUIRE(one.summary.size() == three.summary.size());
  for (std::size_t g = 0; g < one.summary.size(); ++g) {
    CHECK(std::abs(one.summary[g].mean - three.summary[g].mean) <= 1e-12);
    CHECK(std::abs(one.summary[g].stderr_re - three.summary[g].stderr_re) <= 1e-12);
  }
  for (std::size_t i = 0; i < one.records.size(); ++i) {
    CHECK(one.records[i]["task"] == three.records[i]["task"]);
    CHECK(one.records[i]["value"] == three.records[i]["value"]);
  }
}

TEST_CASE("resume skips completed tasks after a truncated write") {
  const auto out = scratch("resume.jsonl");
  const auto full = run_sweep(small_haldane(out, "0, 1, 2, 3, 4"), {1, false, true});
  const auto text = slurp(out);
  const auto ls = lines_of(text);
  REQUIRE(ls.size() == 5);
  // keep two whole lines and half of the third
  {
    std::ofstream cut(out, std::ios::trunc);
    cut << ls[0] << '\n' << ls[1] << '\n' << ls[2].substr(0, ls[2].size() / 2);
  }
  const auto resumed = run_sweep(small_haldane(out, "0, 1, 2, 3, 4"), {1, true, true});
  CHECK(resumed.skipped == 2);
  CHECK(resumed.tasks == 5);
  const auto after = lines_of(slurp(out));
  CHECK(after.size() == 5);
  REQUIRE(resumed.records.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(resumed.records[i]["task"] == full.records[i]["task"]);
    CHECK(resumed.records[i]["value"] == full.records[i]["value"]);
  }
  CHECK(std::abs(resumed.summary[0].mean - full.summary[0].mean) <= 1e-12);
}

TEST_CASE("task failures are recorded, not fatal") {
  auto cfg = parse_config("experiment = lyapunov\n[model]\nmethod = simpson\n[run]\nseed_count = 2\n");
  cfg.output = scratch("failing.jsonl").string();
  const auto rep = run_sweep(cfg, {1, false, true});
  CHECK(rep.failed == 2);
  for (const auto& r : rep.records) {
    CHECK(r["status"] == "error");
    CHECK(r.contains("error"));
  }
  CHECK(lines_of(slurp(cfg.output)).size() == 2);
}

TEST_CASE("Lyapunov sign change on the W2 = 2 W1 section tracks the closed-form zero set") {
  auto cfg = parse_config("experiment = lyapunov\n[model]\nmethod = birkhoff\nsteps = 20000\n"
                          "[grid]\nW = 0.1, 5, 50\nm = 0.02, 2, 50\n");
  cfg.output = scratch("section.jsonl").string();
  const auto rep = run_sweep(cfg, {1, false, true});
  const int n = 50;
  std::vector<double> sampled(n * n, 0.0), exact(n * n, 0.0);
  std::vector<char> ok(n * n, 0);
  for (const auto& r : rep.records) {
    const long g = r["grid_index"].get<long>();
    const auto p = cfg.params_at(g);
    const auto a = lyapunov_analytic(p["m"].get<double>(), 0.5 * p["W"].get<double>(), p["W"].get<double>());
    if (r["status"] != "ok" || a.domain_error) continue;
    ok[static_cast<std::size_t>(g)] = 1;
    sampled[static_cast<std::size_t>(g)] = r["diagnostics"]["signed"].get<double>();
    exact[static_cast<std::size_t>(g)] = a.signed_value;
  }
  auto edge = [&](const std::vector<double>& f, int i, int j) {
    const int g = i * n + j;
    if (!ok[static_cast<std::size_t>(g)]) return false;
    const int nb[2][2] = {{i + 1, j}, {i, j + 1}};
    for (const auto& q : nb) {
      if (q[0] >= n || q[1] >= n) continue;
      const int h = q[0] * n + q[1];
      if (ok[static_cast<std::size_t>(h)] && (f[static_cast<std::size_t>(g)] > 0) != (f[static_cast<std::size_t>(h)] > 0)) return true;
    }
    return false;
  };
  int contour = 0, matched = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (!edge(exact, i, j)) continue;
      ++contour;
      bool hit = false;
      for (int di = -1; di <= 1 && !hit; ++di)
        for (int dj = -1; dj <= 1 && !hit; ++dj) {
          const int a = i + di, b = j + dj;
          if (a >= 0 && b >= 0 && a < n && b < n && edge(sampled, a, b)) hit = true;
        }
      matched += hit;
    }
  MESSAGE("contour cells " << contour << ", matched " << matched);
  REQUIRE(contour > 0);
  CHECK(matched == contour);
}

TEST_CASE("command line exit codes") {
  const char* bin = std::getenv("NCI_BIN");
  if (!bin) {
    MESSAGE("NCI_BIN not set; skipping CLI checks");
    return;
  }
  auto run = [&](const std::string& args) {
    const int st = std::system((std::string(bin) + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(st);
  };
  const auto good = scratch("cli_good.cfg");
  const auto out = scratch("cli_good.jsonl");
  std::ofstream(good) << "experiment = haldane_chern\n[model]\nn1 = 3\nn2 = 3\n[run]\noutput = " << out.string() << "\n";
  const auto bad = scratch("cli_bad.cfg");
  std::ofstream(bad) << "experiment = haldane_chern\n[grid]\nW = 0, 1, 0\n";
  const auto failing = scratch("cli_fail.cfg");
  std::ofstream(failing) << "experiment = lyapunov\n[model]\nmethod = simpson\n[run]\noutput = "
                         << scratch("cli_fail.jsonl").string() << "\n";

  CHECK(run("validate --config " + good.string()) == 0);
  CHECK(run("validate --config " + bad.string()) == 1);
  CHECK(run("validate --config /nonexistent/nci.cfg") == 1);
  CHECK(run("haldane_chern --config " + good.string() + " --threads 2") == 0);
  CHECK(lines_of(slurp(out)).size() == 1);
  CHECK(run("haldane_chern --config " + good.string() + " --resume") == 0);
  CHECK(lines_of(slurp(out)).size() == 1);
  CHECK(run("winding_map --config " + good.string()) == 1);
  CHECK(run("lyapunov --config " + failing.string()) == 2);
}
