#include "ssb.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include <nlohmann/json.hpp>

#include "ssb/bench/experiment.hpp"
#include "ssb/bench/report.hpp"
#include "ssb/costmodel.hpp"
#include "ssb/detect.hpp"
#include "ssb/errors.hpp"
#include "ssb/sigsim.hpp"

using nlohmann::json;

struct ssb_dataset {
  ssb::sigsim::LabeledDataset ds;
};

namespace {

thread_local std::string g_last_error = "no error";

template <class F>
ssb_status guarded(F&& f) {
  try {
    f();
    return SSB_OK;
  } catch (const ssb::TruncationError& e) {
    g_last_error = e.what();
    return SSB_ERR_FORMAT;
  } catch (const ssb::FormatError& e) {
    g_last_error = e.what();
    return SSB_ERR_FORMAT;
  } catch (const ssb::IoError& e) {
    g_last_error = e.what();
    return SSB_ERR_IO;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return SSB_ERR_INVALID_ARG;
  } catch (const json::exception& e) {
    g_last_error = e.what();
    return SSB_ERR_FORMAT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SSB_ERR_RUNTIME;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SSB_ERR_RUNTIME;
  }
}

ssb_status fail_arg(const char* msg) {
  g_last_error = msg;
  return SSB_ERR_INVALID_ARG;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ssb::sigsim::DatasetSpec to_cpp(const ssb_dataset_spec& s) {
  ssb::sigsim::DatasetSpec spec;
  spec.params.rolloff = s.params.rolloff;
  spec.params.samples_per_symbol = s.params.samples_per_symbol;
  spec.params.filter_span_symbols = s.params.filter_span_symbols;
  spec.params.snr_db = s.params.snr_db;
  spec.params.window_len = s.params.window_len;
  spec.n_train = s.n_train;
  spec.n_val = s.n_val;
  spec.n_test = s.n_test;
  spec.seed = s.seed;
  return spec;
}

void to_c(const ssb::sigsim::DatasetSpec& spec, ssb_dataset_spec* out) {
  out->params.rolloff = spec.params.rolloff;
  out->params.samples_per_symbol = spec.params.samples_per_symbol;
  out->params.filter_span_symbols = spec.params.filter_span_symbols;
  out->params.snr_db = spec.params.snr_db;
  out->params.window_len = spec.params.window_len;
  out->n_train = spec.n_train;
  out->n_val = spec.n_val;
  out->n_test = spec.n_test;
  out->seed = spec.seed;
}

std::string costs_csv_of(const json& j) {
  struct Row {
    std::string name;
    ssb::costmodel::Arch arch;
  };
  std::vector<Row> rows;

  if (j.is_array()) {
    for (const auto& e : j)
      rows.push_back({e.at("name").get<std::string>(),
                      ssb::costmodel::arch_from_json(e.at("arch"))});
  } else if (j.is_object() && j.contains("entries")) {
    for (const auto& e : j.at("entries"))
      rows.push_back({e.at("name").get<std::string>(),
                      ssb::costmodel::arch_from_json(e.at("arch"))});
  } else {
    rows.push_back({"arch", ssb::costmodel::arch_from_json(j)});
  }

  std::string csv = "name,family,n_op,m_peak,m_total\n";
  for (const auto& row : rows) {
    const auto rep = ssb::costmodel::cost_report(row.arch);
    csv += row.name + ',' + ssb::costmodel::family_name(row.arch) + ',' +
           std::to_string(rep.n_op) + ',' + std::to_string(rep.m_peak) + ',' +
           std::to_string(rep.m_total) + '\n';
  }
  return csv;
}

}  // namespace

extern "C" {

const char* ssb_last_error(void) { return g_last_error.c_str(); }

void ssb_free_string(char* s) { std::free(s); }

void ssb_dataset_spec_defaults(ssb_dataset_spec* out) {
  if (!out) return;
  to_c(ssb::sigsim::DatasetSpec{}, out);
}

ssb_status ssb_dataset_generate(const ssb_dataset_spec* spec,
                                ssb_dataset** out) {
  if (!spec || !out) return fail_arg("null argument");
  *out = nullptr;
  return guarded([&] {
    auto* h = new ssb_dataset{ssb::sigsim::gen_dataset(to_cpp(*spec))};
    *out = h;
  });
}

ssb_status ssb_dataset_load(const char* path, ssb_dataset** out) {
  if (!path || !out) return fail_arg("null argument");
  *out = nullptr;
  return guarded([&] {
    auto* h = new ssb_dataset{ssb::sigsim::load_dataset(path)};
    *out = h;
  });
}

ssb_status ssb_dataset_save(const ssb_dataset* ds, const char* path) {
  if (!ds || !path) return fail_arg("null argument");
  return guarded([&] { ssb::sigsim::save_dataset(ds->ds, path); });
}

void ssb_dataset_free(ssb_dataset* ds) { delete ds; }

ssb_status ssb_dataset_split_size(const ssb_dataset* ds, int32_t split,
                                  uint64_t* out) {
  if (!ds || !out) return fail_arg("null argument");
  switch (split) {
    case 0: *out = ds->ds.train.size(); return SSB_OK;
    case 1: *out = ds->ds.val.size(); return SSB_OK;
    case 2: *out = ds->ds.test.size(); return SSB_OK;
    default: return fail_arg("split must be 0 (train), 1 (val) or 2 (test)");
  }
}

ssb_status ssb_dataset_spec_of(const ssb_dataset* ds, ssb_dataset_spec* out) {
  if (!ds || !out) return fail_arg("null argument");
  to_c(ds->ds.spec, out);
  return SSB_OK;
}

ssb_status ssb_energy_detector_eval(const ssb_dataset* ds, double target_pfa,
                                    ssb_metrics* out) {
  if (!ds || !out) return fail_arg("null argument");
  return guarded([&] {
    std::vector<double> idle;
    for (const auto& w : ds->ds.val)
      if (w.label == 0)
        idle.push_back(ssb::detect::energy_statistic(w));
    const double thr = ssb::detect::calibrate_threshold(idle, target_pfa);
    ssb::detect::ScoreSet s;
    for (const auto& w : ds->ds.test) {
      s.scores.push_back(ssb::detect::energy_statistic(w));
      s.labels.push_back(w.label);
    }
    const auto m = ssb::detect::evaluate(s, thr);
    out->p_d = m.p_d;
    out->p_fa = m.p_fa;
    out->p_fd = m.p_fd;
    out->threshold = m.threshold;
    out->n_busy = m.n_busy;
    out->n_idle = m.n_idle;
  });
}

ssb_status ssb_costs_csv(const char* json_text, char** out_csv) {
  if (!json_text || !out_csv) return fail_arg("null argument");
  *out_csv = nullptr;
  return guarded([&] {
    const json j = json::parse(json_text);
    *out_csv = dup_string(costs_csv_of(j));
  });
}

ssb_status ssb_costs_csv_from_file(const char* path, char** out_csv) {
  if (!path || !out_csv) return fail_arg("null argument");
  *out_csv = nullptr;
  return guarded([&] {
    std::ifstream f(path);
    if (!f) throw ssb::IoError(std::string("cannot open: ") + path);
    json j;
    try {
      f >> j;
    } catch (const json::parse_error& e) {
      throw ssb::FormatError(std::string(path) + ": " + e.what());
    }
    *out_csv = dup_string(costs_csv_of(j));
  });
}

ssb_status ssb_run_experiment(const char* config_path, const char* out_dir,
                              int32_t workers) {
  if (!config_path || !out_dir) return fail_arg("null argument");
  return guarded([&] {
    const auto cfg = ssb::bench::ExperimentConfig::load(config_path);
    const auto rep =
        ssb::bench::run_experiment(cfg, out_dir, workers <= 0 ? 1 : workers);
    ssb::bench::render_figures(rep, out_dir);
  });
}

ssb_status ssb_render_report(const char* report_path, const char* out_dir) {
  if (!report_path || !out_dir) return fail_arg("null argument");
  return guarded([&] {
    std::ifstream f(report_path);
    if (!f) throw ssb::IoError(std::string("cannot open: ") + report_path);
    json j;
    try {
      f >> j;
    } catch (const json::parse_error& e) {
      throw ssb::FormatError(std::string(report_path) + ": " + e.what());
    }
    const auto rep = ssb::bench::ExperimentReport::from_json(j);
    ssb::bench::render_figures(rep, out_dir);
  });
}

}  // extern "C"
