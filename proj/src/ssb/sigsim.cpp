#include "ssb/sigsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "ssb/detail/serial.hpp"
#include "ssb/errors.hpp"

namespace ssb::sigsim {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void add_noise(std::span<std::complex<double>> x, double sigma2, Rng& rng) {
  const double s = std::sqrt(sigma2 / 2.0);
  for (auto& v : x) {
    v += std::complex<double>(s * rng.normal(), s * rng.normal());
  }
}

}  // namespace

void SignalParams::validate() const {
  if (!(rolloff > 0.0 && rolloff <= 1.0))
    throw std::invalid_argument("rolloff must be in (0, 1]");
  if (samples_per_symbol < 2)
    throw std::invalid_argument("samples_per_symbol must be >= 2");
  if (filter_span_symbols < 1)
    throw std::invalid_argument("filter_span_symbols must be >= 1");
  if (window_len < 1) throw std::invalid_argument("window_len must be >= 1");
}

void DatasetSpec::validate() const {
  params.validate();
  for (auto n : {n_train, n_val, n_test}) {
    if (n % 2 != 0)
      throw std::invalid_argument(
          "split sizes must be even: each split holds exactly equal busy and "
          "idle counts");
  }
}

std::vector<std::complex<double>> gen_qpsk_symbols(std::size_t n, Rng& rng) {
  std::vector<std::complex<double>> out(n);
  for (auto& s : out) {
    const std::uint64_t bits = rng.next_u64() & 3u;
    const double re = (bits & 1u) ? -kInvSqrt2 : kInvSqrt2;
    const double im = (bits & 2u) ? -kInvSqrt2 : kInvSqrt2;
    s = {re, im};
  }
  return out;
}

std::vector<double> rrc_taps(double rolloff, int samples_per_symbol,
                             int span_symbols) {
  if (rolloff < 0.0 || rolloff > 1.0)
    throw std::invalid_argument("rolloff must be in [0, 1]");
  if (samples_per_symbol < 1 || span_symbols < 1)
    throw std::invalid_argument("rrc_taps: bad span/oversampling");

  const int half = span_symbols * samples_per_symbol / 2;
  const int ntaps = span_symbols * samples_per_symbol + 1;
  std::vector<double> h(ntaps);

  const double beta = rolloff;
  for (int k = -half; k <= half; ++k) {
    const double t = static_cast<double>(k) / samples_per_symbol;
    double v;
    if (k == 0) {
      v = 1.0 - beta + 4.0 * beta / M_PI;
    } else if (beta > 0.0 &&
               std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-9) {
      // removable singularity at |t| = 1/(4*beta)
      const double a = M_PI / (4.0 * beta);
      v = (beta / std::sqrt(2.0)) *
          ((1.0 + 2.0 / M_PI) * std::sin(a) + (1.0 - 2.0 / M_PI) * std::cos(a));
    } else {
      const double four_bt = 4.0 * beta * t;
      v = (std::sin(M_PI * t * (1.0 - beta)) +
           four_bt * std::cos(M_PI * t * (1.0 + beta))) /
          (M_PI * t * (1.0 - four_bt * four_bt));
    }
    h[k + half] = v;
  }

  double energy = 0.0;
  for (double v : h) energy += v * v;
  const double scale = 1.0 / std::sqrt(energy);
  for (double& v : h) v *= scale;
  return h;
}

std::vector<std::complex<double>> shape_pulse(
    std::span<const std::complex<double>> symbols, std::span<const double> taps,
    int samples_per_symbol) {
  if (symbols.empty() || taps.empty())
    throw std::invalid_argument("shape_pulse: empty input");
  const std::size_t n_up = symbols.size() * samples_per_symbol;
  std::vector<std::complex<double>> y(n_up + taps.size() - 1,
                                      std::complex<double>(0.0, 0.0));
  // Upsampled input is zero everywhere except at symbol instants, so the
  // full convolution reduces to one shifted tap vector per symbol.
  const double scale = std::sqrt(static_cast<double>(samples_per_symbol));
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const std::complex<double> s = symbols[i] * scale;
    const std::size_t base = i * samples_per_symbol;
    for (std::size_t j = 0; j < taps.size(); ++j) y[base + j] += s * taps[j];
  }
  return y;
}

void add_awgn(std::vector<std::complex<double>>& signal, double snr_db,
              Rng& rng) {
  add_noise(signal, noise_variance(snr_db), rng);
}

double window_noise_variance(const SignalParams& p) {
  return noise_variance(p.snr_db) * p.samples_per_symbol / (1.0 + p.rolloff);
}

SensingWindow make_window(const SignalParams& p, int label, Rng& rng) {
  p.validate();
  if (label != 0 && label != 1)
    throw std::invalid_argument("label must be 0 or 1");

  const int wl = p.window_len;
  const double sigma2 = window_noise_variance(p);
  std::vector<std::complex<double>> w;

  if (label == 0) {
    w.assign(wl, std::complex<double>(0.0, 0.0));
    add_noise(w, sigma2, rng);
  } else {
    const int sps = p.samples_per_symbol;
    const int offset = static_cast<int>(rng.below(sps));
    // Steady state of the full convolution starts once the filter fully
    // overlaps data, i.e. at index ntaps-1 = span*sps.
    const int start = p.filter_span_symbols * sps + offset;
    const int nsym = p.filter_span_symbols + (offset + wl + sps - 1) / sps;
    const auto symbols = gen_qpsk_symbols(static_cast<std::size_t>(nsym), rng);
    const auto taps = rrc_taps(p.rolloff, sps, p.filter_span_symbols);
    const auto shaped = shape_pulse(symbols, taps, sps);
    w.assign(shaped.begin() + start, shaped.begin() + start + wl);
    add_noise(w, sigma2, rng);
  }

  SensingWindow out;
  out.label = static_cast<std::uint8_t>(label);
  out.samples.resize(wl);
  for (int i = 0; i < wl; ++i)
    out.samples[i] = {static_cast<float>(w[i].real()),
                      static_cast<float>(w[i].imag())};
  return out;
}

LabeledDataset gen_dataset(const DatasetSpec& spec) {
  spec.validate();
  LabeledDataset ds;
  ds.spec = spec;

  const std::uint64_t counts[3] = {spec.n_train, spec.n_val, spec.n_test};
  std::vector<SensingWindow>* splits[3] = {&ds.train, &ds.val, &ds.test};
  for (int s = 0; s < 3; ++s) {
    auto& split = *splits[s];
    split.resize(counts[s]);
    const std::uint64_t split_key = Rng::mix(spec.seed, s + 1);
    for (std::uint64_t i = 0; i < counts[s]; ++i) {
      Rng rng(Rng::mix(split_key, i));
      const int label = (i % 2 == 0) ? 1 : 0;  // exact balance per split
      split[i] = make_window(spec.params, label, rng);
    }
  }
  return ds;
}

namespace {

constexpr char kMagic[4] = {'S', 'S', 'B', 'D'};
constexpr std::uint16_t kVersion = 1;

using detail::put;
using detail::Reader;

void put_spec(std::string& buf, const DatasetSpec& spec) {
  put(buf, spec.params.rolloff);
  put(buf, static_cast<std::uint32_t>(spec.params.samples_per_symbol));
  put(buf, static_cast<std::uint32_t>(spec.params.filter_span_symbols));
  put(buf, spec.params.snr_db);
  put(buf, static_cast<std::uint32_t>(spec.params.window_len));
  put(buf, spec.n_train);
  put(buf, spec.n_val);
  put(buf, spec.n_test);
  put(buf, spec.seed);
}

DatasetSpec get_spec(Reader& r) {
  DatasetSpec spec;
  spec.params.rolloff = r.get<double>();
  spec.params.samples_per_symbol = static_cast<int>(r.get<std::uint32_t>());
  spec.params.filter_span_symbols = static_cast<int>(r.get<std::uint32_t>());
  spec.params.snr_db = r.get<double>();
  spec.params.window_len = static_cast<int>(r.get<std::uint32_t>());
  spec.n_train = r.get<std::uint64_t>();
  spec.n_val = r.get<std::uint64_t>();
  spec.n_test = r.get<std::uint64_t>();
  spec.seed = r.get<std::uint64_t>();
  return spec;
}

}  // namespace

void save_dataset(const LabeledDataset& ds, const std::string& path) {
  std::string buf;
  buf.append(kMagic, 4);
  put(buf, kVersion);
  put_spec(buf, ds.spec);

  const std::vector<SensingWindow>* splits[3] = {&ds.train, &ds.val, &ds.test};
  for (const auto* split : splits) {
    put(buf, static_cast<std::uint64_t>(split->size()));
    for (const auto& w : *split) {
      put(buf, w.label);
      for (const auto& c : w.samples) {
        put(buf, c.real());
        put(buf, c.imag());
      }
    }
  }

  detail::write_file(path, buf);
}

LabeledDataset load_dataset(const std::string& path) {
  const std::string buf = detail::read_file(path);
  Reader r(buf.data(), buf.size());
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("not a dataset file (bad magic)");
  const auto version = r.get<std::uint16_t>();
  if (version != kVersion)
    throw VersionError("unsupported dataset format version " +
                       std::to_string(version));

  LabeledDataset ds;
  ds.spec = get_spec(r);
  const int wl = ds.spec.params.window_len;
  if (wl < 1) throw FormatError("corrupt dataset header: window_len < 1");

  std::vector<SensingWindow>* splits[3] = {&ds.train, &ds.val, &ds.test};
  for (auto* split : splits) {
    const auto count = r.get<std::uint64_t>();
    // guard against absurd counts from a corrupt header before resizing
    if (count > (1ULL << 33))
      throw FormatError("corrupt dataset header: implausible split size");
    split->resize(count);
    for (auto& w : *split) {
      w.label = r.get<std::uint8_t>();
      if (w.label > 1) throw FormatError("corrupt example label");
      w.samples.resize(wl);
      for (auto& c : w.samples) {
        const float re = r.get<float>();
        const float im = r.get<float>();
        c = {re, im};
      }
    }
  }
  if (!r.at_end()) throw FormatError("trailing bytes after dataset payload");
  return ds;
}

}  // namespace ssb::sigsim
