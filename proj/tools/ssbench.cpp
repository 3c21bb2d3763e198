// ssbench command-line front end. Talks to the library exclusively through
// the public C API.

#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "ssb.h"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

int api_fail(const char* what) {
  std::fprintf(stderr, "ssbench: %s: %s\n", what, ssb_last_error());
  return kExitRuntime;
}

int workers_from_env() {
  const char* v = std::getenv("SSB_WORKERS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (end == v || *end != '\0' || n < 1) {
    std::fprintf(stderr, "ssbench: ignoring invalid SSB_WORKERS=\"%s\"\n", v);
    return 1;
  }
  return static_cast<int>(n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectrum-sensing neural network benchmark"};
  app.require_subcommand(1);

  // gen-data
  ssb_dataset_spec spec;
  ssb_dataset_spec_defaults(&spec);
  std::string data_out;
  auto* gen = app.add_subcommand("gen-data", "Synthesize a labeled dataset");
  gen->add_option("-o,--out", data_out, "Output dataset file")->required();
  gen->add_option("--rolloff", spec.params.rolloff, "RRC roll-off factor")->capture_default_str();
  gen->add_option("--sps", spec.params.samples_per_symbol,
                  "Samples per symbol")->capture_default_str();
  gen->add_option("--span", spec.params.filter_span_symbols,
                  "Pulse filter span in symbols")->capture_default_str();
  gen->add_option("--snr", spec.params.snr_db, "SNR in dB")->capture_default_str();
  gen->add_option("--window-len", spec.params.window_len,
                  "Samples per sensing window")->capture_default_str();
  gen->add_option("--train", spec.n_train, "Training examples")->capture_default_str();
  gen->add_option("--val", spec.n_val, "Validation examples")->capture_default_str();
  gen->add_option("--test", spec.n_test, "Test examples")->capture_default_str();
  gen->add_option("--seed", spec.seed, "Master seed")->capture_default_str();

  // run
  std::string run_config, run_out;
  int run_workers = 0;
  auto* run = app.add_subcommand("run", "Run (or resume) an experiment");
  run->add_option("-c,--config", run_config, "Experiment configuration (JSON)")
      ->required();
  run->add_option("-o,--out", run_out, "Output directory")->required();
  run->add_option("-j,--workers", run_workers,
                  "Parallel training workers (default: $SSB_WORKERS or 1)");

  // costs
  std::string costs_in, costs_out;
  auto* costs =
      app.add_subcommand("costs", "Analytic inference cost of architectures");
  costs->add_option("input", costs_in,
                    "Architecture or experiment configuration (JSON)")
      ->required();
  costs->add_option("-o,--out", costs_out, "Write CSV here (default: stdout)");

  // report
  std::string report_in, report_out;
  auto* report =
      app.add_subcommand("report", "Render figures from a report.json");
  report->add_option("input", report_in, "report.json produced by `run`")
      ->required();
  report->add_option("-o,--out", report_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  if (gen->parsed()) {
    ssb_dataset* ds = nullptr;
    if (ssb_dataset_generate(&spec, &ds) != SSB_OK)
      return api_fail("gen-data");
    const ssb_status rc = ssb_dataset_save(ds, data_out.c_str());
    ssb_dataset_free(ds);
    if (rc != SSB_OK) return api_fail("gen-data");
    std::printf("wrote %s (%llu train / %llu val / %llu test)\n",
                data_out.c_str(),
                static_cast<unsigned long long>(spec.n_train),
                static_cast<unsigned long long>(spec.n_val),
                static_cast<unsigned long long>(spec.n_test));
    return 0;
  }

  if (run->parsed()) {
    const int workers = run_workers > 0 ? run_workers : workers_from_env();
    if (ssb_run_experiment(run_config.c_str(), run_out.c_str(), workers) !=
        SSB_OK)
      return api_fail("run");
    std::printf("report written to %s\n", run_out.c_str());
    return 0;
  }

  if (costs->parsed()) {
    char* csv = nullptr;
    if (ssb_costs_csv_from_file(costs_in.c_str(), &csv) != SSB_OK)
      return api_fail("costs");
    if (costs_out.empty()) {
      std::fputs(csv, stdout);
    } else {
      std::FILE* f = std::fopen(costs_out.c_str(), "w");
      if (!f) {
        std::perror("ssbench: costs");
        ssb_free_string(csv);
        return kExitRuntime;
      }
      std::fputs(csv, f);
      std::fclose(f);
    }
    ssb_free_string(csv);
    return 0;
  }

  if (report->parsed()) {
    if (ssb_render_report(report_in.c_str(), report_out.c_str()) != SSB_OK)
      return api_fail("report");
    std::printf("figures written to %s\n", report_out.c_str());
    return 0;
  }

  return kExitUsage;  // unreachable with require_subcommand(1)
}
