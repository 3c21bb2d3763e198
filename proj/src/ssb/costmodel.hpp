#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ssb::costmodel {

// Fully-connected classifier: input -> hidden widths -> output.
struct FcArch {
  std::int64_t input_size = 0;
  std::vector<std::int64_t> hidden;  // may be empty (direct input->output)
  std::int64_t output_size = 1;

  void validate() const;
};

// One hidden layer of a 1-D CNN. Conv layers use stride 1 and 'same'
// padding, so they preserve the spatial length; pool layers floor-divide it.
struct CnnLayer {
  enum class Kind { Conv, BatchNorm, Pool };
  Kind kind = Kind::Conv;
  std::int64_t channels = 0;  // Conv: output channels
  std::int64_t kernel = 0;    // Conv only
  std::int64_t pool = 0;      // Pool only
};

struct CnnArch {
  std::int64_t input_len = 0;
  std::int64_t input_channels = 0;
  std::vector<CnnLayer> layers;
  std::int64_t dense_size = 0;
  std::int64_t output_size = 1;

  void validate() const;
  // Spatial length after each hidden layer (index 0 = input length).
  std::vector<std::int64_t> length_chain() const;
  // Channel count after each hidden layer (index 0 = input channels).
  std::vector<std::int64_t> channel_chain() const;
};

// LSTM classifier over an L-step sequence; readout from the final hidden
// state (both directions concatenated when bidirectional).
struct RnnArch {
  std::int64_t seq_len = 0;
  std::int64_t input_features = 0;
  std::vector<std::int64_t> hidden;  // at least one layer
  std::int64_t output_size = 1;
  bool bidirectional = false;

  void validate() const;
};

using Arch = std::variant<FcArch, CnnArch, RnnArch>;

void validate(const Arch& a);
std::string family_name(const Arch& a);  // "fc", "cnn", "rnn", "birnn"

// Forward-pass FLOPs on a single input; every multiply and every add counts
// as one operation, nonlinear activations count as zero.
std::uint64_t op_count(const Arch& a);

// Peak instantaneous memory in floats, assuming in-place bias/activation/
// batch-norm, per-layer full parallelism, and buffers freed as soon as a
// layer completes.
std::uint64_t mem_peak(const Arch& a);

// Total memory in floats when every parameter and intermediate state is
// pre-allocated and nothing is ever reused.
std::uint64_t mem_total(const Arch& a);

struct CostReport {
  std::uint64_t n_op = 0;
  std::uint64_t m_peak = 0;
  std::uint64_t m_total = 0;
  // audit trail for the pooling floor rule; empty for non-CNN archs
  std::vector<std::int64_t> cnn_length_chain;
};

CostReport cost_report(const Arch& a);

// JSON schema for architecture descriptions (see docs/formats.md).
Arch arch_from_json(const nlohmann::json& j);
nlohmann::json arch_to_json(const Arch& a);

// Builds the VGG-style CNN used throughout: per block two k=3 conv layers
// (each followed by batch norm when with_batch_norm) and one max pool; the
// dense layer matches the flattened final block.
CnnArch vgg_cnn(std::int64_t input_len, std::int64_t input_channels,
                const std::vector<std::int64_t>& block_channels,
                std::int64_t pool_factor, bool with_batch_norm,
                std::int64_t output_size = 1);

}  // namespace ssb::costmodel
