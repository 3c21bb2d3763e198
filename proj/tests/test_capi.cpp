#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "ssb.h"

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p;
}

ssb_dataset_spec tiny_spec() {
  ssb_dataset_spec spec;
  ssb_dataset_spec_defaults(&spec);
  spec.params.window_len = 16;
  spec.params.samples_per_symbol = 4;
  spec.params.filter_span_symbols = 5;
  spec.n_train = 40;
  spec.n_val = 100;
  spec.n_test = 100;
  spec.seed = 3;
  return spec;
}

}  // namespace

TEST_CASE("defaults match the benchmark setup") {
  ssb_dataset_spec spec;
  ssb_dataset_spec_defaults(&spec);
  CHECK(spec.params.rolloff == 0.35);
  CHECK(spec.params.samples_per_symbol == 10);
  CHECK(spec.params.snr_db == 3.0);
  CHECK(spec.params.window_len == 111);
  CHECK(spec.n_train == 0);
  CHECK(spec.seed == 0);
}

TEST_CASE("dataset generate / save / load round trip") {
  const auto spec = tiny_spec();
  ssb_dataset* ds = nullptr;
  REQUIRE(ssb_dataset_generate(&spec, &ds) == SSB_OK);
  REQUIRE(ds != nullptr);

  uint64_t n = 0;
  CHECK(ssb_dataset_split_size(ds, 0, &n) == SSB_OK);
  CHECK(n == 40);
  CHECK(ssb_dataset_split_size(ds, 1, &n) == SSB_OK);
  CHECK(n == 100);
  CHECK(ssb_dataset_split_size(ds, 2, &n) == SSB_OK);
  CHECK(n == 100);
  CHECK(ssb_dataset_split_size(ds, 3, &n) == SSB_ERR_INVALID_ARG);

  ssb_dataset_spec back;
  CHECK(ssb_dataset_spec_of(ds, &back) == SSB_OK);
  CHECK(back.seed == 3);
  CHECK(back.params.window_len == 16);

  const auto path = fs::temp_directory_path() / "ssb_capi_ds.ssbd";
  REQUIRE(ssb_dataset_save(ds, path.string().c_str()) == SSB_OK);
  ssb_dataset* ds2 = nullptr;
  REQUIRE(ssb_dataset_load(path.string().c_str(), &ds2) == SSB_OK);
  CHECK(ssb_dataset_split_size(ds2, 2, &n) == SSB_OK);
  CHECK(n == 100);

  ssb_metrics m;
  CHECK(ssb_energy_detector_eval(ds2, 0.01, &m) == SSB_OK);
  CHECK(m.p_fd == 1.0 - m.p_d);
  CHECK(m.n_busy == 50);
  CHECK(m.n_idle == 50);
  CHECK(m.p_fa <= 0.2);

  ssb_dataset_free(ds);
  ssb_dataset_free(ds2);
  fs::remove(path);
}

TEST_CASE("error taxonomy and last-error messages") {
  ssb_dataset* ds = nullptr;
  CHECK(ssb_dataset_generate(nullptr, &ds) == SSB_ERR_INVALID_ARG);
  CHECK(std::strlen(ssb_last_error()) > 0);

  auto bad = tiny_spec();
  bad.n_train = 7;  // odd split size
  CHECK(ssb_dataset_generate(&bad, &ds) == SSB_ERR_INVALID_ARG);

  CHECK(ssb_dataset_load("/nonexistent/ds.ssbd", &ds) == SSB_ERR_IO);

  const auto junk = fs::temp_directory_path() / "ssb_capi_junk.ssbd";
  std::ofstream(junk, std::ios::binary) << "garbage bytes here";
  CHECK(ssb_dataset_load(junk.string().c_str(), &ds) == SSB_ERR_FORMAT);
  CHECK(std::strlen(ssb_last_error()) > 0);
  fs::remove(junk);

  char* csv = nullptr;
  CHECK(ssb_costs_csv("{not json", &csv) == SSB_ERR_FORMAT);
  CHECK(ssb_costs_csv(nullptr, &csv) == SSB_ERR_INVALID_ARG);
  CHECK(ssb_costs_csv_from_file("/nonexistent/a.json", &csv) == SSB_ERR_IO);
}

TEST_CASE("cost CSV output") {
  char* csv = nullptr;
  REQUIRE(ssb_costs_csv(
              R"({"family":"fc","input_size":222,"hidden":[64,64,64,64],)"
              R"("output_size":1})",
              &csv) == SSB_OK);
  REQUIRE(csv != nullptr);
  const std::string s(csv);
  ssb_free_string(csv);
  CHECK(s.find("name,family,n_op,m_peak,m_total\n") == 0);
  CHECK(s.find("fc,53120,14558,27296") != std::string::npos);

  // an experiment config yields one row per entry
  csv = nullptr;
  REQUIRE(ssb_costs_csv(
              R"({"dataset":{"n_train":2,"n_val":2,"n_test":2},"entries":[)"
              R"({"name":"a","arch":{"family":"fc","input_size":2,)"
              R"("hidden":[3]}}]})",
              &csv) == SSB_OK);
  const std::string s2(csv);
  ssb_free_string(csv);
  CHECK(s2.find("a,fc,18,14,") != std::string::npos);

  // empty list: header only
  csv = nullptr;
  REQUIRE(ssb_costs_csv("[]", &csv) == SSB_OK);
  CHECK(std::string(csv) == "name,family,n_op,m_peak,m_total\n");
  ssb_free_string(csv);
}

TEST_CASE("experiment run and report rendering through the C API") {
  const auto dir = fresh_dir("ssb_capi_run");
  fs::create_directories(dir);
  const auto cfg_path = dir / "config.json";
  std::ofstream(cfg_path) << R"({
    "dataset": {"params": {"window_len": 16, "samples_per_symbol": 4,
                           "filter_span_symbols": 5},
                "n_train": 200, "n_val": 100, "n_test": 100, "seed": 5},
    "repeats": 1,
    "master_seed": 2,
    "entries": [{"name": "fc", "arch": {"family": "fc", "input_size": 32,
                                        "hidden": [8]},
                 "train": {"max_epochs": 2, "batch_size": 50}}]
  })";

  const auto out = dir / "out";
  REQUIRE(ssb_run_experiment(cfg_path.string().c_str(),
                             out.string().c_str(), 1) == SSB_OK);
  for (const char* f :
       {"report.json", "runs.csv", "summary.csv", "detection.svg"})
    CHECK(fs::exists(out / f));

  const auto figs = dir / "figs";
  REQUIRE(ssb_render_report((out / "report.json").string().c_str(),
                            figs.string().c_str()) == SSB_OK);
  CHECK(fs::exists(figs / "detection.svg"));
  CHECK(fs::exists(figs / "ops.svg"));
  CHECK(fs::exists(figs / "memory.svg"));

  CHECK(ssb_run_experiment("/nonexistent/cfg.json", out.string().c_str(), 1) ==
        SSB_ERR_IO);
  CHECK(ssb_render_report("/nonexistent/report.json",
                          figs.string().c_str()) == SSB_ERR_IO);

  fs::remove_all(dir);
}
