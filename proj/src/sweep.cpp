#include "nci/sweep.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "nci/experiments.hpp"

namespace nci {

using nlohmann::json;

std::uint64_t task_seed(std::uint64_t master, std::uint64_t grid_index, std::uint64_t seed_label) {
  return splitmix64(splitmix64(splitmix64(master) + grid_index) + seed_label);
}

int resolve_threads(int requested, const SweepConfig& cfg) {
  if (requested > 0) return requested;
  if (cfg.threads > 0) return cfg.threads;
  if (const char* env = std::getenv("NCI_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

std::string summary_path_for(const std::string& records_path) {
  const auto dot = records_path.rfind('.');
  const auto slash = records_path.rfind('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return records_path + ".summary.csv";
  return records_path.substr(0, dot) + ".summary.csv";
}

namespace {

std::string task_key(long g, std::size_t k) { return "g" + std::to_string(g) + "/s" + std::to_string(k); }

class Writer {
 public:
  Writer(const std::string& path, bool append, bool enabled) : enabled_(enabled) {
    if (enabled_) {
      out_.open(path, append ? std::ios::app : std::ios::trunc);
      if (!out_) throw Error(Errc::precondition, "cannot write '" + path + "'");
      thread_ = std::thread([this] { loop(); });
    }
  }
  ~Writer() { close(); }
  void push(std::string line) {
    if (!enabled_) return;
    {
      std::lock_guard lk(m_);
      q_.push_back(std::move(line));
    }
    cv_.notify_one();
  }
  void close() {
    if (!enabled_ || !thread_.joinable()) return;
    {
      std::lock_guard lk(m_);
      done_ = true;
    }
    cv_.notify_one();
    thread_.join();
  }

 private:
  void loop() {
    std::unique_lock lk(m_);
    for (;;) {
      cv_.wait(lk, [&] { return done_ || !q_.empty(); });
      while (!q_.empty()) {
        std::string line = std::move(q_.front());
        q_.pop_front();
        lk.unlock();
        out_ << line << '\n';
        out_.flush();
        lk.lock();
      }
      if (done_) return;
    }
  }
  bool enabled_;
  std::ofstream out_;
  std::thread thread_;
  std::mutex m_;
  std::condition_variable cv_;
  std::deque<std::string> q_;
  bool done_ = false;
};

// Limits concurrent tasks whose dense matrices may not fit side by side.
class Gate {
 public:
  explicit Gate(int slots) : free_(slots) {}
  void acquire() {
    std::unique_lock lk(m_);
    cv_.wait(lk, [&] { return free_ > 0; });
    --free_;
  }
  void release() {
    {
      std::lock_guard lk(m_);
      ++free_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex m_;
  std::condition_variable cv_;
  int free_;
};

// defaults overlaid with the config values: the full tuple a record needs to be re-run
json full_params(const SweepConfig& cfg, long g) {
  json p = find_experiment(cfg.experiment)->defaults;
  const json at = cfg.params_at(g);
  for (const auto& [k, v] : at.items()) p[k] = v;
  return p;
}

int memory_slots(const SweepConfig& cfg, int threads) {
  if (cfg.experiment != "manybody_pairing") return threads;
  const long pages = sysconf(_SC_AVPHYS_PAGES), page = sysconf(_SC_PAGESIZE);
  if (pages <= 0 || page <= 0) return 1;
  const double avail = static_cast<double>(pages) * static_cast<double>(page);
  double worst = 1.0;
  for (long g = 0; g < cfg.grid_points(); ++g) {
    const json p = full_params(cfg, g);
    const int S = build_honeycomb_disk(p["radius"].get<double>()).size();
    const int N = static_cast<int>(std::lround(p["N"].get<double>()));
    double c = 1.0;
    for (int k = 0; k < N; ++k) c = c * (S - k) / (k + 1);
    worst = std::max(worst, c * c * 16.0 * 8.0);  // a handful of dense sector matrices
  }
  return std::clamp(static_cast<int>(avail / worst), 1, threads);
}

json make_record(const SweepConfig& cfg, long g, std::size_t k, std::uint64_t seed, const json& params) {
  json r;
  r["task"] = task_key(g, k);
  r["experiment"] = cfg.experiment;
  r["grid_index"] = g;
  r["seed_index"] = k;
  r["seed_label"] = cfg.seeds[k];
  r["master_seed"] = cfg.master_seed;
  r["seed"] = seed;
  r["params"] = params;
  r["kernel"] = cfg.kernel;
  r["collar"] = cfg.collar ? json(*cfg.collar) : json(nullptr);
  r["code_version"] = code_version;
  return r;
}

std::vector<SummaryRow> summarize(const SweepConfig& cfg, const std::vector<json>& records) {
  std::vector<SummaryRow> rows(static_cast<std::size_t>(cfg.grid_points()));
  std::vector<std::vector<const json*>> per(rows.size());
  for (const auto& r : records) per[r["grid_index"].get<std::size_t>()].push_back(&r);
  for (std::size_t g = 0; g < rows.size(); ++g) {
    auto& row = rows[g];
    row.grid_index = static_cast<long>(g);
    row.params = cfg.params_at(static_cast<long>(g));
    std::sort(per[g].begin(), per[g].end(),
              [](const json* a, const json* b) { return (*a)["seed_index"].get<long>() < (*b)["seed_index"].get<long>(); });
    std::vector<double> re, im, dev;
    for (const json* r : per[g]) {
      if ((*r)["status"] != "ok") {
        ++row.failed;
        continue;
      }
      re.push_back((*r)["value"][0].get<double>());
      im.push_back((*r)["value"][1].get<double>());
      dev.push_back((*r)["deviation"].get<double>());
    }
    row.count = static_cast<int>(re.size());
    if (re.empty()) continue;
    const double n = static_cast<double>(re.size());
    double mr = 0, mi = 0, md = 0;
    for (std::size_t i = 0; i < re.size(); ++i) {
      mr += re[i];
      mi += im[i];
      md += dev[i];
    }
    mr /= n;
    mi /= n;
    row.mean = cplx(mr, mi);
    row.mean_deviation = md / n;
    if (re.size() > 1) {
      double vr = 0, vi = 0;
      for (std::size_t i = 0; i < re.size(); ++i) {
        vr += (re[i] - mr) * (re[i] - mr);
        vi += (im[i] - mi) * (im[i] - mi);
      }
      row.stderr_re = std::sqrt(vr / (n - 1.0) / n);
      row.stderr_im = std::sqrt(vi / (n - 1.0) / n);
    }
  }
  return rows;
}

void write_summary(const std::string& path, const SweepConfig& cfg, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::precondition, "cannot write '" + path + "'");
  out << "grid_index";
  for (const auto& a : cfg.grid) out << ',' << a.name;
  out << ",count,failed,mean_re,mean_im,stderr_re,stderr_im,mean_deviation\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    out << r.grid_index;
    for (const auto& a : cfg.grid) out << ',' << num(r.params[a.name].get<double>());
    out << ',' << r.count << ',' << r.failed << ',' << num(r.mean.real()) << ',' << num(r.mean.imag()) << ','
        << num(r.stderr_re) << ',' << num(r.stderr_im) << ',' << num(r.mean_deviation) << '\n';
  }
}

}  // namespace

SweepReport run_sweep(const SweepConfig& cfg, const SweepOptions& opt) {
  check_config(cfg);
  SweepReport rep;
  rep.records_path = cfg.output.empty() ? cfg.experiment + ".jsonl" : cfg.output;
  rep.summary_path = summary_path_for(rep.records_path);
  const long G = cfg.grid_points();
  const std::size_t K = cfg.seeds.size();
  rep.tasks = G * static_cast<long>(K);

  std::map<std::string, json> done;
  if (opt.resume && opt.write_files) {
    std::ifstream in(rep.records_path);
    std::string line;
    while (std::getline(in, line)) {
      json r = json::parse(line, nullptr, false);
      if (r.is_discarded() || !r.is_object() || !r.contains("task") || !r.contains("status")) continue;
      if (r["status"] != "ok" || r.value("experiment", "") != cfg.experiment) continue;
      std::string key = r["task"].get<std::string>();
      done[key] = std::move(r);
    }
    // drop partial lines and failed tasks before appending
    std::ofstream out(rep.records_path, std::ios::trunc);
    for (const auto& [k, r] : done) out << r.dump() << '\n';
  }
  rep.skipped = static_cast<long>(done.size());

  std::vector<std::pair<long, std::size_t>> todo;
  for (long g = 0; g < G; ++g)
    for (std::size_t k = 0; k < K; ++k)
      if (!done.count(task_key(g, k))) todo.emplace_back(g, k);

  const int threads = std::max(1, std::min<int>(resolve_threads(opt.threads, cfg), static_cast<int>(std::max<std::size_t>(todo.size(), 1))));
  Gate gate(memory_slots(cfg, threads));
  Writer writer(rep.records_path, opt.resume, opt.write_files);
  std::vector<json> fresh(todo.size());
  std::atomic<std::size_t> next{0};
  const TaskSettings settings{cfg.kernel, cfg.collar};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      const auto [g, k] = todo[i];
      const json params = full_params(cfg, g);
      const std::uint64_t seed = task_seed(cfg.master_seed, static_cast<std::uint64_t>(g), cfg.seeds[k]);
      json rec = make_record(cfg, g, k, seed, params);
      const auto t0 = std::chrono::steady_clock::now();
      gate.acquire();
      try {
        const TaskOutput o = run_task(cfg.experiment, params, seed, settings);
        rec["status"] = "ok";
        rec["value"] = {o.value.real(), o.value.imag()};
        rec["quantized_value"] = o.quantized_value;
        rec["deviation"] = o.deviation;
        rec["diagnostics"] = o.diagnostics;
      } catch (const Error& e) {
        rec["status"] = "error";
        rec["error"] = e.what();
        rec["error_code"] = errc_name(e.code());
      } catch (const std::exception& e) {
        rec["status"] = "error";
        rec["error"] = e.what();
      }
      gate.release();
      rec["wall_time_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      writer.push(rec.dump());
      fresh[i] = std::move(rec);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  writer.close();

  for (auto& [k, r] : done) rep.records.push_back(std::move(r));
  for (auto& r : fresh) rep.records.push_back(std::move(r));
  std::sort(rep.records.begin(), rep.records.end(), [](const json& a, const json& b) {
    const long ga = a["grid_index"].get<long>(), gb = b["grid_index"].get<long>();
    return ga != gb ? ga < gb : a["seed_index"].get<long>() < b["seed_index"].get<long>();
  });
  for (const auto& r : rep.records)
    if (r["status"] != "ok") ++rep.failed;
  rep.summary = summarize(cfg, rep.records);
  if (opt.write_files) write_summary(rep.summary_path, cfg, rep.summary);
  return rep;
}

}  // namespace nci
