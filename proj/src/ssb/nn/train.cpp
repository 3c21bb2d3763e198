#include "ssb/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ssb/detail/serial.hpp"
#include "ssb/nn/adam.hpp"
#include "ssb/nn/model.hpp"
#include "ssb/nn/schedule.hpp"

namespace ssb::nn {

namespace {

// Chunk cap for families without batch normalization; keeps BPTT activation
// storage bounded. CNN mini-batches must stay whole so batch statistics see
// the full batch.
constexpr std::size_t kChunk = 128;

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                  : std::exp(z) / (1.0 + std::exp(z));
}

struct EvalResult {
  double loss = 0.0;
  std::vector<double> scores;
};

EvalResult eval_model(Model<float>& model, Family fam,
                      std::span<const sigsim::SensingWindow> windows) {
  EvalResult r;
  r.scores.reserve(windows.size());
  double loss_sum = 0.0;
  for (std::size_t pos = 0; pos < windows.size(); pos += 1024) {
    const std::size_t n = std::min<std::size_t>(1024, windows.size() - pos);
    const auto x = encode_batch<float>(windows.subspan(pos, n), fam);
    const auto logits = model.forward(x, Mode::Infer);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = logits(static_cast<Index>(i));
      loss_sum += bce_with_logits(z, windows[pos + i].label);
      r.scores.push_back(sigmoid(z));
    }
  }
  r.loss = loss_sum / static_cast<double>(windows.size());
  return r;
}

double calibrate_on_validation(const std::vector<double>& scores,
                               std::span<const sigsim::SensingWindow> val,
                               double target_pfa) {
  std::vector<double> idle;
  for (std::size_t i = 0; i < val.size(); ++i)
    if (val[i].label == 0) idle.push_back(scores[i]);
  return detect::calibrate_threshold(idle, target_pfa);
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate");
  if (batch_size < 1) throw std::invalid_argument("batch_size");
  if (max_epochs < 0) throw std::invalid_argument("max_epochs");
  if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0))
    throw std::invalid_argument("adam betas must be in (0, 1)");
  if (lr_patience <= 0 || stop_patience <= 0 || lr_patience >= stop_patience)
    throw std::invalid_argument(
        "patience values must be positive with lr_patience < stop_patience");
  if (!(target_pfa > 0.0 && target_pfa < 1.0))
    throw std::invalid_argument("target_pfa must be in (0, 1)");
}

double bce_with_logits(double logit, int label) {
  // max(z,0) - z*y + log(1 + exp(-|z|))
  return std::max(logit, 0.0) - logit * static_cast<double>(label) +
         std::log1p(std::exp(-std::abs(logit)));
}

TrainedModel train(const costmodel::Arch& arch,
                   const sigsim::LabeledDataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.val.empty())
    throw std::invalid_argument("train: validation split is empty");
  if (cfg.max_epochs > 0 && data.train.empty())
    throw std::invalid_argument("train: training split is empty");

  const Family fam = family_of(arch);
  auto model = build_model<float>(arch, Rng::mix(cfg.seed, 0x696e6974ULL));
  auto& ps = model->params();

  const std::size_t chunk_cap =
      fam == Family::Cnn ? static_cast<std::size_t>(cfg.batch_size) : kChunk;

  Adam<float> opt(ps.size(), cfg.beta1, cfg.beta2, cfg.adam_eps);
  TrainScheduler sched(cfg.lr_patience, cfg.stop_patience,
                       cfg.notable_decrease);
  double lr = cfg.learning_rate;

  TrainedModel out;
  out.arch = arch;
  out.params.assign(ps.values().begin(), ps.values().end());
  out.aux = model->aux_state();

  double best_val = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order(data.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<sigsim::SensingWindow> batch_buf;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng shuffle_rng(Rng::mix(cfg.seed, 0xe10000ULL + epoch));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size) {
      const std::size_t bn =
          std::min<std::size_t>(cfg.batch_size, order.size() - start);
      ps.zero_grads();

      double batch_loss = 0.0;
      for (std::size_t cpos = 0; cpos < bn; cpos += chunk_cap) {
        const std::size_t cn = std::min(chunk_cap, bn - cpos);
        batch_buf.clear();
        for (std::size_t i = 0; i < cn; ++i)
          batch_buf.push_back(data.train[order[start + cpos + i]]);
        const auto x = encode_batch<float>(batch_buf, fam);
        const auto logits = model->forward(x, Mode::Train);
        Vec<float> dlogit(static_cast<Index>(cn));
        for (std::size_t i = 0; i < cn; ++i) {
          const double z = logits(static_cast<Index>(i));
          const int y = batch_buf[i].label;
          batch_loss += bce_with_logits(z, y);
          dlogit(static_cast<Index>(i)) = static_cast<float>(
              (sigmoid(z) - y) / static_cast<double>(bn));
        }
        model->backward(dlogit);
      }
      batch_loss /= static_cast<double>(bn);
      if (!std::isfinite(batch_loss))
        throw std::runtime_error(
            "training diverged: non-finite loss at epoch " +
            std::to_string(epoch));
      epoch_loss += batch_loss * static_cast<double>(bn);
      opt.step(std::span<float>(ps.values()),
               std::span<const float>(ps.grads()), lr);
    }
    epoch_loss /= static_cast<double>(order.size());

    const auto val = eval_model(*model, fam, data.val);
    if (!std::isfinite(val.loss))
      throw std::runtime_error(
          "training diverged: non-finite validation loss at epoch " +
          std::to_string(epoch));
    out.history.push_back({epoch, epoch_loss, val.loss, lr});

    if (val.loss < best_val) {
      best_val = val.loss;
      out.params.assign(ps.values().begin(), ps.values().end());
      out.aux = model->aux_state();
      out.best_epoch = epoch;
    }

    const auto act = sched.observe(val.loss);
    if (act.drop_lr) lr /= 10.0;
    if (act.stop) break;
  }

  // restore the best-validation parameters before calibration
  ps.values().assign(out.params.begin(), out.params.end());
  model->set_aux_state(out.aux);
  const auto val = eval_model(*model, fam, data.val);
  out.threshold = calibrate_on_validation(val.scores, data.val, cfg.target_pfa);
  return out;
}

detect::ScoreSet predict_scores(
    const TrainedModel& model,
    std::span<const sigsim::SensingWindow> windows) {
  const Family fam = family_of(model.arch);
  auto m = build_model<float>(model.arch, 0);
  if (m->params().size() != model.params.size())
    throw std::invalid_argument("predict_scores: parameter size mismatch");
  m->params().values().assign(model.params.begin(), model.params.end());
  m->set_aux_state(model.aux);

  detect::ScoreSet s;
  const auto r = eval_model(*m, fam, windows);
  s.scores = r.scores;
  s.labels.reserve(windows.size());
  for (const auto& w : windows) s.labels.push_back(w.label);
  return s;
}

namespace {
constexpr char kModelMagic[4] = {'S', 'S', 'B', 'M'};
constexpr std::uint16_t kModelVersion = 1;
}  // namespace

void save_model(const TrainedModel& model, const std::string& path) {
  using detail::put;
  std::string buf;
  buf.append(kModelMagic, 4);
  put(buf, kModelVersion);

  const std::string arch = costmodel::arch_to_json(model.arch).dump();
  put(buf, static_cast<std::uint32_t>(arch.size()));
  buf.append(arch);

  put(buf, model.threshold);
  put(buf, static_cast<std::int32_t>(model.best_epoch));
  put(buf, static_cast<std::uint64_t>(model.params.size()));
  for (float v : model.params) put(buf, v);
  put(buf, static_cast<std::uint64_t>(model.aux.size()));
  for (float v : model.aux) put(buf, v);
  put(buf, static_cast<std::uint32_t>(model.history.size()));
  for (const auto& h : model.history) {
    put(buf, static_cast<std::int32_t>(h.epoch));
    put(buf, h.train_loss);
    put(buf, h.val_loss);
    put(buf, h.lr);
  }
  detail::write_file(path, buf);
}

TrainedModel load_model(const std::string& path) {
  const std::string buf = detail::read_file(path);
  detail::Reader r(buf.data(), buf.size());

  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kModelMagic, 4) != 0)
    throw FormatError("not a model checkpoint (bad magic)");
  const auto version = r.get<std::uint16_t>();
  if (version != kModelVersion)
    throw VersionError("unsupported checkpoint version " +
                       std::to_string(version));

  TrainedModel m;
  const auto arch_len = r.get<std::uint32_t>();
  std::string arch_json(arch_len, '\0');
  r.raw(arch_json.data(), arch_len);
  m.arch = costmodel::arch_from_json(nlohmann::json::parse(arch_json));

  m.threshold = r.get<double>();
  m.best_epoch = r.get<std::int32_t>();
  const auto np = r.get<std::uint64_t>();
  if (np * sizeof(float) > r.remaining())
    throw TruncationError("checkpoint truncated");
  m.params.resize(np);
  for (auto& v : m.params) v = r.get<float>();
  const auto na = r.get<std::uint64_t>();
  if (na * sizeof(float) > r.remaining())
    throw TruncationError("checkpoint truncated");
  m.aux.resize(na);
  for (auto& v : m.aux) v = r.get<float>();
  const auto nh = r.get<std::uint32_t>();
  m.history.resize(nh);
  for (auto& h : m.history) {
    h.epoch = r.get<std::int32_t>();
    h.train_loss = r.get<double>();
    h.val_loss = r.get<double>();
    h.lr = r.get<double>();
  }
  if (!r.at_end()) throw FormatError("trailing bytes after checkpoint");
  return m;
}

std::string history_csv(const TrainedModel& model) {
  std::ostringstream os;
  os << "epoch,train_loss,val_loss,lr\n";
  os.precision(17);
  for (const auto& h : model.history)
    os << h.epoch << ',' << h.train_loss << ',' << h.val_loss << ',' << h.lr
       << '\n';
  return os.str();
}

}  // namespace ssb::nn
