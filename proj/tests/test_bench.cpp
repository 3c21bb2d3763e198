#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "ssb/bench/experiment.hpp"
#include "ssb/bench/report.hpp"
#include "ssb/errors.hpp"

using namespace ssb;
using namespace ssb::bench;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json tiny_config_json() {
  return json{
      {"dataset",
       {{"params",
         {{"window_len", 16}, {"samples_per_symbol", 4},
          {"filter_span_symbols", 5}}},
        {"n_train", 200},
        {"n_val", 100},
        {"n_test", 100},
        {"seed", 77}}},
      {"repeats", 2},
      {"master_seed", 11},
      {"entries",
       json::array(
           {{{"name", "fc_small"},
             {"arch",
              {{"family", "fc"}, {"input_size", 32}, {"hidden", {8}}}},
             {"train", {{"max_epochs", 2}, {"batch_size", 50}}}},
            {{"name", "fc_tiny"},
             {"arch", {{"family", "fc"}, {"input_size", 32}, {"hidden", {4}}}},
             {"train", {{"max_epochs", 2}, {"batch_size", 50}}},
             {"train_subset", 100}}})}};
}

fs::path fresh_dir(const char* name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("experiment config parsing") {
  const auto cfg = ExperimentConfig::from_json(tiny_config_json());
  CHECK(cfg.repeats == 2);
  CHECK(cfg.master_seed == 11);
  REQUIRE(cfg.entries.size() == 2);
  CHECK(cfg.entries[0].name == "fc_small");
  CHECK(cfg.entries[0].train.max_epochs == 2);
  CHECK(cfg.entries[0].train.batch_size == 50);
  CHECK(cfg.entries[0].train_subset == 0);
  CHECK(cfg.entries[1].train_subset == 100);
  REQUIRE(cfg.dataset_spec.has_value());
  CHECK(cfg.dataset_spec->n_train == 200);
  CHECK(cfg.dataset_spec->params.window_len == 16);
  CHECK_FALSE(cfg.dataset_path.has_value());

  // duplicate names rejected
  auto dup = tiny_config_json();
  dup["entries"][1]["name"] = "fc_small";
  CHECK_THROWS_AS(ExperimentConfig::from_json(dup), std::invalid_argument);

  // a dataset source is mandatory
  auto nods = tiny_config_json();
  nods.erase("dataset");
  CHECK_THROWS_AS(ExperimentConfig::from_json(nods), std::invalid_argument);

  // bad repeats
  auto badrep = tiny_config_json();
  badrep["repeats"] = 0;
  CHECK_THROWS_AS(ExperimentConfig::from_json(badrep), std::invalid_argument);

  // loading from disk: missing file and malformed JSON
  CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/cfg.json"), IoError);
  const auto bad = fs::temp_directory_path() / "ssb_bad_cfg.json";
  std::ofstream(bad) << "{not json";
  CHECK_THROWS_AS(ExperimentConfig::load(bad.string()), FormatError);
  std::ofstream(bad, std::ios::trunc) << "{\"repeats\": 1}";
  // structurally valid JSON but missing required keys
  CHECK_THROWS(ExperimentConfig::load(bad.string()));
  fs::remove(bad);
}

TEST_CASE("run seeds are deterministic and distinct") {
  CHECK(run_seed(1, "a", 0) == run_seed(1, "a", 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t master : {0ull, 1ull, 99ull})
    for (const char* entry : {"a", "b", "fc_small"})
      for (int i = 0; i < 4; ++i) seen.insert(run_seed(master, entry, i));
  CHECK(seen.size() == 3 * 3 * 4);
}

TEST_CASE("experiment smoke run produces a consistent report and artifacts") {
  const auto cfg = ExperimentConfig::from_json(tiny_config_json());
  const auto out = fresh_dir("ssb_bench_run");
  const auto rep = run_experiment(cfg, out.string(), 2);

  for (const char* f : {"report.json", "manifest.json", "runs.csv",
                        "summary.csv"})
    CHECK(fs::exists(out / f));
  for (const char* stem : {"fc_small_s0", "fc_small_s1", "fc_tiny_s0",
                           "fc_tiny_s1"}) {
    CHECK(fs::exists(out / "models" / (std::string(stem) + ".ssbm")));
    CHECK(fs::exists(out / "history" / (std::string(stem) + ".csv")));
  }

  REQUIRE(rep.entries.size() == 2);
  CHECK(rep.target_pfa == 0.01);
  CHECK(rep.baseline.n_busy + rep.baseline.n_idle == 100);
  for (const auto& e : rep.entries) {
    CHECK(e.completed == 2);
    CHECK_FALSE(e.failed);
    REQUIRE(e.runs.size() == 2);
    // aggregates recompute from the individual runs
    std::vector<double> pds;
    for (const auto& r : e.runs) {
      CHECK(r.ok);
      CHECK(r.seed == run_seed(cfg.master_seed, e.name, r.seed_index));
      pds.push_back(r.metrics.p_d);
    }
    std::sort(pds.begin(), pds.end());
    CHECK(e.median_p_d == 0.5 * (pds[0] + pds[1]));
    CHECK(e.max_p_d == pds[1]);
    CHECK(e.median_p_fd == 1.0 - e.median_p_d);
    CHECK(e.min_p_fd == 1.0 - e.max_p_d);
  }
  CHECK(rep.entries[0].family == "fc");
  CHECK(rep.entries[1].train_subset == 100);
  CHECK(rep.entries[0].train_subset == 200);  // whole split
  CHECK(rep.entries[0].cost.n_op > 0);

  // report round-trips through JSON
  const auto j = rep.to_json();
  CHECK(ExperimentReport::from_json(j).to_json() == j);

  SUBCASE("a second run from scratch is byte-identical") {
    const auto out2 = fresh_dir("ssb_bench_run2");
    run_experiment(cfg, out2.string(), 1);  // worker count must not matter
    CHECK(slurp(out / "report.json") == slurp(out2 / "report.json"));
    CHECK(slurp(out / "runs.csv") == slurp(out2 / "runs.csv"));
    CHECK(slurp(out / "summary.csv") == slurp(out2 / "summary.csv"));
    fs::remove_all(out2);
  }

  SUBCASE("completed runs are trusted, not retrained") {
    // tamper with one finished run in the manifest; a resumed experiment
    // must carry the tampered value into the report untouched
    const auto mpath = out / "manifest.json";
    auto manifest = json::parse(slurp(mpath));
    bool patched = false;
    for (auto& rj : manifest["runs"])
      if (rj["entry"] == "fc_small" && rj["seed_index"] == 0) {
        rj["metrics"]["p_d"] = 0.123456;
        patched = true;
      }
    REQUIRE(patched);
    std::ofstream(mpath, std::ios::trunc) << manifest.dump(2);

    const auto rep2 = run_experiment(cfg, out.string(), 1);
    const auto& e = rep2.entries[0];
    REQUIRE(e.name == "fc_small");
    bool found = false;
    for (const auto& r : e.runs)
      if (r.seed_index == 0) {
        CHECK(r.metrics.p_d == 0.123456);
        found = true;
      }
    CHECK(found);
  }

  SUBCASE("figures render deterministically") {
    const auto svg1 = render_detection_svg(rep);
    const auto svg2 = render_detection_svg(rep);
    CHECK(svg1 == svg2);
    CHECK(svg1.rfind("<svg", 0) == 0);
    CHECK(render_ops_svg(rep).rfind("<svg", 0) == 0);
    CHECK(render_memory_svg(rep).rfind("<svg", 0) == 0);

    const auto figs = fresh_dir("ssb_bench_figs");
    render_figures(rep, figs.string());
    for (const char* f : {"detection.svg", "ops.svg", "memory.svg"}) {
      CHECK(fs::exists(figs / f));
      CHECK(slurp(figs / f).rfind("<svg", 0) == 0);
    }
    fs::remove_all(figs);
  }

  fs::remove_all(out);
}

TEST_CASE("entries must agree on the calibration target") {
  auto j = tiny_config_json();
  j["entries"][1]["train"]["target_pfa"] = 0.05;
  const auto cfg = ExperimentConfig::from_json(j);
  const auto out = fresh_dir("ssb_bench_pfa");
  CHECK_THROWS_AS(run_experiment(cfg, out.string(), 1),
                  std::invalid_argument);
  fs::remove_all(out);
}
