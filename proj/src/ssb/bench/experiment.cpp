#include "ssb/bench/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "ssb/errors.hpp"

namespace ssb::bench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

sigsim::DatasetSpec spec_from_json(const json& j) {
  sigsim::DatasetSpec spec;
  if (j.contains("params")) {
    const auto& p = j.at("params");
    spec.params.rolloff = p.value("rolloff", spec.params.rolloff);
    spec.params.samples_per_symbol =
        p.value("samples_per_symbol", spec.params.samples_per_symbol);
    spec.params.filter_span_symbols =
        p.value("filter_span_symbols", spec.params.filter_span_symbols);
    spec.params.snr_db = p.value("snr_db", spec.params.snr_db);
    spec.params.window_len = p.value("window_len", spec.params.window_len);
  }
  spec.n_train = j.value("n_train", std::uint64_t{0});
  spec.n_val = j.value("n_val", std::uint64_t{0});
  spec.n_test = j.value("n_test", std::uint64_t{0});
  spec.seed = j.value("seed", std::uint64_t{0});
  return spec;
}

json spec_to_json(const sigsim::DatasetSpec& spec) {
  return json{{"params",
               {{"rolloff", spec.params.rolloff},
                {"samples_per_symbol", spec.params.samples_per_symbol},
                {"filter_span_symbols", spec.params.filter_span_symbols},
                {"snr_db", spec.params.snr_db},
                {"window_len", spec.params.window_len}}},
              {"n_train", spec.n_train},
              {"n_val", spec.n_val},
              {"n_test", spec.n_test},
              {"seed", spec.seed}};
}

nn::TrainConfig train_config_from_json(const json& j) {
  nn::TrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  c.lr_patience = j.value("lr_patience", c.lr_patience);
  c.stop_patience = j.value("stop_patience", c.stop_patience);
  c.notable_decrease = j.value("notable_decrease", c.notable_decrease);
  c.target_pfa = j.value("target_pfa", c.target_pfa);
  c.validate();
  return c;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void atomic_write(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + tmp.string());
    f << content;
  }
  fs::rename(tmp, path);
}

}  // namespace

std::uint64_t run_seed(std::uint64_t master_seed, const std::string& entry,
                       int seed_index) {
  return Rng::mix(Rng::mix(master_seed, fnv1a(entry)),
                  static_cast<std::uint64_t>(seed_index));
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("dataset_path"))
    cfg.dataset_path = j.at("dataset_path").get<std::string>();
  if (j.contains("dataset")) cfg.dataset_spec = spec_from_json(j.at("dataset"));
  cfg.repeats = j.value("repeats", 1);
  cfg.master_seed = j.value("master_seed", std::uint64_t{0});
  for (const auto& ej : j.at("entries")) {
    ExperimentEntry e;
    e.name = ej.at("name").get<std::string>();
    e.arch = costmodel::arch_from_json(ej.at("arch"));
    e.train = train_config_from_json(ej.value("train", json::object()));
    e.train_subset = ej.value("train_subset", std::uint64_t{0});
    cfg.entries.push_back(std::move(e));
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    throw FormatError("config " + path + ": " + e.what());
  }
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    throw FormatError("config " + path + ": " + e.what());
  }
}

void ExperimentConfig::validate() const {
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (!dataset_path && !dataset_spec)
    throw std::invalid_argument("either dataset_path or dataset is required");
  std::vector<std::string> names;
  for (const auto& e : entries) names.push_back(e.name);
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end())
    throw std::invalid_argument("entry names must be unique");
}

json metrics_to_json(const detect::Metrics& m) {
  return json{{"p_d", m.p_d},           {"p_fa", m.p_fa},
              {"p_fd", m.p_fd},         {"threshold", m.threshold},
              {"n_busy", m.n_busy},     {"n_idle", m.n_idle}};
}

detect::Metrics metrics_from_json(const json& j) {
  detect::Metrics m;
  m.p_d = j.at("p_d").get<double>();
  m.p_fa = j.at("p_fa").get<double>();
  m.p_fd = j.at("p_fd").get<double>();
  m.threshold = j.at("threshold").get<double>();
  m.n_busy = j.value("n_busy", std::uint64_t{0});
  m.n_idle = j.value("n_idle", std::uint64_t{0});
  return m;
}

json ExperimentReport::to_json() const {
  json j;
  j["dataset"] = spec_to_json(dataset);
  j["target_pfa"] = target_pfa;
  j["baseline"] = metrics_to_json(baseline);
  j["entries"] = json::array();
  for (const auto& e : entries) {
    json runs = json::array();
    for (const auto& r : e.runs) {
      json rj{{"entry", r.entry},   {"seed_index", r.seed_index},
              {"seed", r.seed},     {"ok", r.ok},
              {"best_epoch", r.best_epoch}, {"epochs_run", r.epochs_run}};
      if (r.ok)
        rj["metrics"] = metrics_to_json(r.metrics);
      else
        rj["error"] = r.error;
      runs.push_back(std::move(rj));
    }
    j["entries"].push_back(
        json{{"name", e.name},
             {"family", e.family},
             {"train_subset", e.train_subset},
             {"cost",
              {{"n_op", e.cost.n_op},
               {"m_peak", e.cost.m_peak},
               {"m_total", e.cost.m_total}}},
             {"runs", std::move(runs)},
             {"aggregate",
              {{"completed", e.completed},
               {"failed", e.failed},
               {"median_p_d", e.median_p_d},
               {"max_p_d", e.max_p_d},
               {"median_p_fd", e.median_p_fd},
               {"min_p_fd", e.min_p_fd}}}});
  }
  return j;
}

ExperimentReport ExperimentReport::from_json(const json& j) {
  ExperimentReport rep;
  rep.dataset = spec_from_json(j.at("dataset"));
  rep.target_pfa = j.value("target_pfa", 0.01);
  rep.baseline = metrics_from_json(j.at("baseline"));
  for (const auto& ej : j.at("entries")) {
    EntrySummary e;
    e.name = ej.at("name").get<std::string>();
    e.family = ej.at("family").get<std::string>();
    e.train_subset = ej.value("train_subset", std::uint64_t{0});
    e.cost.n_op = ej.at("cost").at("n_op").get<std::uint64_t>();
    e.cost.m_peak = ej.at("cost").at("m_peak").get<std::uint64_t>();
    e.cost.m_total = ej.at("cost").at("m_total").get<std::uint64_t>();
    for (const auto& rj : ej.at("runs")) {
      RunResult r;
      r.entry = rj.value("entry", e.name);
      r.seed_index = rj.at("seed_index").get<int>();
      r.seed = rj.at("seed").get<std::uint64_t>();
      r.ok = rj.at("ok").get<bool>();
      r.best_epoch = rj.value("best_epoch", -1);
      r.epochs_run = rj.value("epochs_run", 0);
      if (r.ok)
        r.metrics = metrics_from_json(rj.at("metrics"));
      else
        r.error = rj.value("error", "");
      e.runs.push_back(std::move(r));
    }
    const auto& ag = ej.at("aggregate");
    e.completed = ag.at("completed").get<int>();
    e.failed = ag.at("failed").get<bool>();
    e.median_p_d = ag.at("median_p_d").get<double>();
    e.max_p_d = ag.at("max_p_d").get<double>();
    e.median_p_fd = ag.at("median_p_fd").get<double>();
    e.min_p_fd = ag.at("min_p_fd").get<double>();
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

namespace {

json run_to_json(const RunResult& r) {
  json j{{"entry", r.entry},   {"seed_index", r.seed_index},
         {"seed", r.seed},     {"ok", r.ok},
         {"best_epoch", r.best_epoch}, {"epochs_run", r.epochs_run}};
  if (r.ok)
    j["metrics"] = metrics_to_json(r.metrics);
  else
    j["error"] = r.error;
  return j;
}

RunResult run_from_json(const json& j) {
  RunResult r;
  r.entry = j.at("entry").get<std::string>();
  r.seed_index = j.at("seed_index").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.ok = j.at("ok").get<bool>();
  r.best_epoch = j.value("best_epoch", -1);
  r.epochs_run = j.value("epochs_run", 0);
  if (r.ok)
    r.metrics = metrics_from_json(j.at("metrics"));
  else
    r.error = j.value("error", "");
  return r;
}

std::string run_key(const std::string& entry, int seed_index) {
  return entry + "#" + std::to_string(seed_index);
}

detect::Metrics evaluate_energy_detector(const sigsim::LabeledDataset& ds,
                                         double target_pfa) {
  std::vector<double> idle_val;
  for (const auto& w : ds.val)
    if (w.label == 0) idle_val.push_back(detect::energy_statistic(w));
  const double thr = detect::calibrate_threshold(idle_val, target_pfa);

  detect::ScoreSet test;
  for (const auto& w : ds.test) {
    test.scores.push_back(detect::energy_statistic(w));
    test.labels.push_back(w.label);
  }
  return detect::evaluate(test, thr);
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const std::string& out_dir, int workers) {
  cfg.validate();
  fs::create_directories(out_dir);
  fs::create_directories(fs::path(out_dir) / "models");
  fs::create_directories(fs::path(out_dir) / "history");

  sigsim::LabeledDataset ds = cfg.dataset_path
                                  ? sigsim::load_dataset(*cfg.dataset_path)
                                  : sigsim::gen_dataset(*cfg.dataset_spec);
  if (ds.val.empty() || ds.test.empty())
    throw std::invalid_argument(
        "experiment dataset needs validation and test splits");

  // target P_fa must agree across entries; it also drives the baseline
  double target_pfa = cfg.entries.empty() ? 0.01 : cfg.entries[0].train.target_pfa;
  for (const auto& e : cfg.entries)
    if (e.train.target_pfa != target_pfa)
      throw std::invalid_argument("entries disagree on target_pfa");

  // resumable manifest of completed runs
  const fs::path manifest_path = fs::path(out_dir) / "manifest.json";
  std::map<std::string, RunResult> done;
  if (fs::exists(manifest_path)) {
    std::ifstream f(manifest_path);
    json j;
    f >> j;
    for (const auto& rj : j.at("runs"))
      done.emplace(run_key(rj.at("entry").get<std::string>(),
                           rj.at("seed_index").get<int>()),
                   run_from_json(rj));
  }

  struct Job {
    const ExperimentEntry* entry;
    int seed_index;
  };
  std::vector<Job> jobs;
  for (const auto& e : cfg.entries)
    for (int i = 0; i < cfg.repeats; ++i)
      if (!done.count(run_key(e.name, i))) jobs.push_back({&e, i});

  std::mutex mu;  // protects done + manifest writes
  auto flush_manifest = [&] {
    json j;
    j["runs"] = json::array();
    for (const auto& [k, r] : done) j["runs"].push_back(run_to_json(r));
    atomic_write(manifest_path, j.dump(2));
  };

  auto execute = [&](const Job& job) {
    const auto& e = *job.entry;
    RunResult r;
    r.entry = e.name;
    r.seed_index = job.seed_index;
    r.seed = run_seed(cfg.master_seed, e.name, job.seed_index);
    try {
      sigsim::LabeledDataset view;
      view.spec = ds.spec;
      const std::uint64_t n_sub =
          e.train_subset == 0
              ? ds.train.size()
              : std::min<std::uint64_t>(e.train_subset, ds.train.size());
      view.train.assign(ds.train.begin(), ds.train.begin() + n_sub);
      view.val = ds.val;

      nn::TrainConfig tc = e.train;
      tc.seed = r.seed;
      auto model = nn::train(e.arch, view, tc);
      const auto scores = nn::predict_scores(model, ds.test);
      r.metrics = detect::evaluate(scores, model.threshold);
      r.best_epoch = model.best_epoch;
      r.epochs_run = static_cast<int>(model.history.size());
      r.ok = true;

      const std::string stem = e.name + "_s" + std::to_string(job.seed_index);
      nn::save_model(model, (fs::path(out_dir) / "models" / (stem + ".ssbm"))
                                .string());
      atomic_write(fs::path(out_dir) / "history" / (stem + ".csv"),
                   nn::history_csv(model));
    } catch (const std::exception& ex) {
      r.ok = false;
      r.error = ex.what();
    }
    std::lock_guard<std::mutex> lock(mu);
    done[run_key(e.name, job.seed_index)] = r;
    flush_manifest();
    std::fprintf(stderr, "[run] %s seed %d: %s\n", e.name.c_str(),
                 job.seed_index,
                 r.ok ? ("p_fd=" + std::to_string(r.metrics.p_fd)).c_str()
                      : r.error.c_str());
  };

  workers = std::max(1, workers);
  if (workers == 1 || jobs.size() <= 1) {
    for (const auto& job : jobs) execute(job);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int n_threads = std::min<std::size_t>(workers, jobs.size());
    for (int t = 0; t < n_threads; ++t)
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= jobs.size()) return;
          execute(jobs[i]);
        }
      });
    for (auto& t : pool) t.join();
  }

  // aggregate
  ExperimentReport rep;
  rep.dataset = ds.spec;
  rep.target_pfa = target_pfa;
  rep.baseline = evaluate_energy_detector(ds, target_pfa);
  for (const auto& e : cfg.entries) {
    EntrySummary s;
    s.name = e.name;
    s.family = costmodel::family_name(e.arch);
    s.train_subset = e.train_subset == 0 ? ds.train.size() : e.train_subset;
    s.cost = costmodel::cost_report(e.arch);
    std::vector<double> pds;
    for (int i = 0; i < cfg.repeats; ++i) {
      const auto it = done.find(run_key(e.name, i));
      if (it == done.end()) continue;
      s.runs.push_back(it->second);
      if (it->second.ok) pds.push_back(it->second.metrics.p_d);
    }
    s.completed = static_cast<int>(pds.size());
    s.failed = s.completed == 0;
    if (!s.failed) {
      s.median_p_d = median(pds);
      s.max_p_d = *std::max_element(pds.begin(), pds.end());
      s.median_p_fd = 1.0 - s.median_p_d;
      s.min_p_fd = 1.0 - s.max_p_d;
    }
    rep.entries.push_back(std::move(s));
  }

  atomic_write(fs::path(out_dir) / "report.json", rep.to_json().dump(2));

  // per-run CSV
  std::string runs_csv = "entry,seed_index,seed,ok,p_d,p_fa,p_fd,threshold\n";
  for (const auto& e : rep.entries)
    for (const auto& r : e.runs) {
      char line[256];
      if (r.ok)
        std::snprintf(line, sizeof line, "%s,%d,%llu,1,%.17g,%.17g,%.17g,%.17g\n",
                      r.entry.c_str(), r.seed_index,
                      static_cast<unsigned long long>(r.seed), r.metrics.p_d,
                      r.metrics.p_fa, r.metrics.p_fd, r.metrics.threshold);
      else
        std::snprintf(line, sizeof line, "%s,%d,%llu,0,,,,\n", r.entry.c_str(),
                      r.seed_index, static_cast<unsigned long long>(r.seed));
      runs_csv += line;
    }
  atomic_write(fs::path(out_dir) / "runs.csv", runs_csv);

  std::string summary_csv =
      "entry,family,train_subset,n_op,m_peak,m_total,median_p_fd,min_p_fd,"
      "median_p_d,max_p_d,completed\n";
  for (const auto& e : rep.entries) {
    char line[320];
    std::snprintf(line, sizeof line,
                  "%s,%s,%llu,%llu,%llu,%llu,%.17g,%.17g,%.17g,%.17g,%d\n",
                  e.name.c_str(), e.family.c_str(),
                  static_cast<unsigned long long>(e.train_subset),
                  static_cast<unsigned long long>(e.cost.n_op),
                  static_cast<unsigned long long>(e.cost.m_peak),
                  static_cast<unsigned long long>(e.cost.m_total),
                  e.median_p_fd, e.min_p_fd, e.median_p_d, e.max_p_d,
                  e.completed);
    summary_csv += line;
  }
  {
    char line[256];
    std::snprintf(line, sizeof line,
                  "energy_detector,baseline,0,0,0,0,%.17g,%.17g,%.17g,%.17g,1\n",
                  rep.baseline.p_fd, rep.baseline.p_fd, rep.baseline.p_d,
                  rep.baseline.p_d);
    summary_csv += line;
  }
  atomic_write(fs::path(out_dir) / "summary.csv", summary_csv);

  return rep;
}

}  // namespace ssb::bench
