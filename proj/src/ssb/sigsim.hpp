#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ssb/rng.hpp"

namespace ssb::sigsim {

// QPSK baseband source parameters. Defaults reproduce the benchmark setup:
// RRC roll-off 0.35, 10 samples per symbol, 3 dB SNR, 111-sample windows.
struct SignalParams {
  double rolloff = 0.35;
  int samples_per_symbol = 10;
  int filter_span_symbols = 11;
  double snr_db = 3.0;
  int window_len = 111;

  void validate() const;  // throws std::invalid_argument
};

struct SensingWindow {
  std::vector<std::complex<float>> samples;
  std::uint8_t label = 0;  // 1 = busy (signal + noise), 0 = idle (noise only)
};

struct DatasetSpec {
  SignalParams params;
  std::uint64_t n_train = 0;
  std::uint64_t n_val = 0;
  std::uint64_t n_test = 0;
  std::uint64_t seed = 0;

  void validate() const;  // split counts must be even (exact class balance)
};

struct LabeledDataset {
  DatasetSpec spec;
  std::vector<SensingWindow> train, val, test;
};

// n i.i.d. unit-energy QPSK symbols; Gray map, bits (0,0) -> (1+j)/sqrt(2).
std::vector<std::complex<double>> gen_qpsk_symbols(std::size_t n, Rng& rng);

// Root-raised-cosine impulse response sampled at t = k / samples_per_symbol,
// k = -span*sps/2 .. span*sps/2 (odd, symmetric tap count). The removable
// singularities at t = 0 and |t| = 1/(4*rolloff) are evaluated via their
// analytic limits. Taps are normalized to unit energy.
std::vector<double> rrc_taps(double rolloff, int samples_per_symbol,
                             int span_symbols);

// Upsample by zero insertion, convolve with taps (full length), and scale by
// sqrt(samples_per_symbol) so the steady-state average power per sample is 1.
std::vector<std::complex<double>> shape_pulse(
    std::span<const std::complex<double>> symbols, std::span<const double> taps,
    int samples_per_symbol);

// Per-complex-sample noise variance for a given per-sample SNR in dB.
inline double noise_variance(double snr_db) {
  return std::pow(10.0, -snr_db / 10.0);
}

// Adds circularly symmetric complex Gaussian noise with per-sample variance
// 10^(-snr_db/10); real and imaginary parts are each N(0, sigma^2/2).
void add_awgn(std::vector<std::complex<double>>& signal, double snr_db,
              Rng& rng);

// Noise variance used when a dataset window is synthesized at params.snr_db.
// The SNR is referenced to the signal's occupied bandwidth (1+rolloff times
// the symbol rate): the received waveform is modeled as bandpass-filtered to
// that bandwidth, so the in-band noise power is sigma^2 * (1+rolloff)/sps.
// Injecting white noise of variance
//   sigma^2 = 10^(-snr_db/10) * sps / (1 + rolloff)
// makes the in-band SNR equal snr_db.
double window_noise_variance(const SignalParams& p);

// One labeled sensing window. Busy windows contain steady-state shaped
// signal plus noise with a uniformly random symbol-clock offset; filter
// warm-up/cool-down transients never enter a window. Idle windows are noise
// only.
SensingWindow make_window(const SignalParams& p, int label, Rng& rng);

// Deterministic class-balanced dataset. The RNG stream of each example is
// derived from (seed, split id, example index), so generation is
// order-independent and parallelizable.
LabeledDataset gen_dataset(const DatasetSpec& spec);

// Binary dataset file ("SSBD" magic; see docs/formats.md). Round-trip is
// lossless.
void save_dataset(const LabeledDataset& ds, const std::string& path);
LabeledDataset load_dataset(const std::string& path);

}  // namespace ssb::sigsim
