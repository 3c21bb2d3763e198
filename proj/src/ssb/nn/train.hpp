#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ssb/costmodel.hpp"
#include "ssb/detect.hpp"
#include "ssb/sigsim.hpp"

namespace ssb::nn {

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 100;
  int max_epochs = 100;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int lr_patience = 10;
  int stop_patience = 15;
  double notable_decrease = 1e-4;
  std::uint64_t seed = 0;
  double target_pfa = 0.01;  // threshold calibration target

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

struct TrainedModel {
  costmodel::Arch arch;
  std::vector<float> params;
  std::vector<float> aux;  // batch-norm running statistics
  double threshold = 0.0;  // calibrated on validation scores only
  int best_epoch = -1;     // -1: never trained (initial parameters)
  std::vector<EpochRecord> history;
};

// Numerically stable binary cross entropy on a sigmoid logit.
double bce_with_logits(double logit, int label);

// Full training protocol: shuffled mini-batches, Adam, validation-loss LR
// schedule with early termination, best-validation parameter selection, and
// threshold calibration at target_pfa on the validation scores.
TrainedModel train(const costmodel::Arch& arch,
                   const sigsim::LabeledDataset& data, const TrainConfig& cfg);

// Inference-mode sigmoid scores, invariant to batch partitioning.
detect::ScoreSet predict_scores(const TrainedModel& model,
                                std::span<const sigsim::SensingWindow> windows);

// Checkpoint file ("SSBM" magic; see docs/formats.md).
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

// Training history as CSV: epoch,train_loss,val_loss,lr
std::string history_csv(const TrainedModel& model);

}  // namespace ssb::nn
