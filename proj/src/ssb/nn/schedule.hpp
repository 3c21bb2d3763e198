#pragma once

#include <stdexcept>

namespace ssb::nn {

// Validation-loss driven learning-rate schedule and early termination.
// A "notable" decrease means the new loss beats the best seen so far by at
// least the given relative margin. The learning rate is divided by 10 every
// lr_patience consecutive stagnant epochs; training stops after
// stop_patience of them.
class TrainScheduler {
 public:
  TrainScheduler(int lr_patience, int stop_patience, double notable_decrease)
      : lr_patience_(lr_patience),
        stop_patience_(stop_patience),
        notable_decrease_(notable_decrease) {
    if (lr_patience <= 0 || stop_patience <= 0)
      throw std::invalid_argument("patience values must be positive");
    if (lr_patience >= stop_patience)
      throw std::invalid_argument("lr_patience must be < stop_patience");
  }

  struct Action {
    bool notable = false;
    bool drop_lr = false;
    bool stop = false;
  };

  Action observe(double val_loss) {
    Action a;
    if (!seen_ || val_loss < (1.0 - notable_decrease_) * best_) {
      if (!seen_ || val_loss < best_) best_ = val_loss;
      seen_ = true;
      stagnant_ = 0;
      a.notable = true;
      return a;
    }
    if (val_loss < best_) best_ = val_loss;  // improvement, just not notable
    ++stagnant_;
    a.drop_lr = stagnant_ % lr_patience_ == 0;
    a.stop = stagnant_ >= stop_patience_;
    return a;
  }

  int stagnant_epochs() const { return stagnant_; }

 private:
  int lr_patience_;
  int stop_patience_;
  double notable_decrease_;
  double best_ = 0.0;
  bool seen_ = false;
  int stagnant_ = 0;
};

}  // namespace ssb::nn
