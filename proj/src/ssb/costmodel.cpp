#include "ssb/costmodel.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ssb::costmodel {

namespace {

using i64 = std::int64_t;
using u64 = unsigned long long;
static_assert(sizeof(u64) == sizeof(std::uint64_t));

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

void FcArch::validate() const {
  require(input_size >= 1, "fc: input_size must be >= 1");
  require(output_size >= 1, "fc: output_size must be >= 1");
  for (i64 w : hidden) require(w >= 1, "fc: hidden widths must be >= 1");
}

void CnnArch::validate() const {
  require(input_len >= 1, "cnn: input_len must be >= 1");
  require(input_channels >= 1, "cnn: input_channels must be >= 1");
  require(dense_size >= 1, "cnn: dense_size must be >= 1");
  require(output_size >= 1, "cnn: output_size must be >= 1");
  for (const auto& l : layers) {
    switch (l.kind) {
      case CnnLayer::Kind::Conv:
        require(l.channels >= 1, "cnn: conv channels must be >= 1");
        require(l.kernel >= 1, "cnn: conv kernel must be >= 1");
        break;
      case CnnLayer::Kind::Pool:
        require(l.pool >= 2, "cnn: pool factor must be >= 2");
        break;
      case CnnLayer::Kind::BatchNorm:
        break;
    }
  }
  for (i64 n : length_chain())
    require(n >= 1, "cnn: derived spatial length fell below 1");
}

std::vector<i64> CnnArch::length_chain() const {
  std::vector<i64> n{input_len};
  for (const auto& l : layers) {
    i64 cur = n.back();
    if (l.kind == CnnLayer::Kind::Pool) cur = cur / l.pool;  // floor, drop tail
    n.push_back(cur);
  }
  return n;
}

std::vector<i64> CnnArch::channel_chain() const {
  std::vector<i64> c{input_channels};
  for (const auto& l : layers)
    c.push_back(l.kind == CnnLayer::Kind::Conv ? l.channels : c.back());
  return c;
}

void RnnArch::validate() const {
  require(seq_len >= 1, "rnn: seq_len must be >= 1");
  require(input_features >= 1, "rnn: input_features must be >= 1");
  require(!hidden.empty(), "rnn: at least one hidden layer required");
  require(output_size >= 1, "rnn: output_size must be >= 1");
  for (i64 w : hidden) require(w >= 1, "rnn: hidden sizes must be >= 1");
}

void validate(const Arch& a) {
  std::visit([](const auto& x) { x.validate(); }, a);
}

std::string family_name(const Arch& a) {
  if (std::holds_alternative<FcArch>(a)) return "fc";
  if (std::holds_alternative<CnnArch>(a)) return "cnn";
  return std::get<RnnArch>(a).bidirectional ? "birnn" : "rnn";
}

namespace {

u64 op_count_fc(const FcArch& a) {
  u64 ops = 0;
  i64 prev = a.input_size;
  for (i64 w : a.hidden) {
    ops += 2ull * prev * w;
    prev = w;
  }
  ops += 2ull * prev * a.output_size;
  return ops;
}

u64 op_count_cnn(const CnnArch& a) {
  const auto n = a.length_chain();
  const auto c = a.channel_chain();
  u64 ops = 0;
  for (std::size_t k = 1; k <= a.layers.size(); ++k) {
    const auto& l = a.layers[k - 1];
    switch (l.kind) {
      case CnnLayer::Kind::Conv:
        ops += 2ull * c[k - 1] * c[k] * l.kernel * n[k];
        break;
      case CnnLayer::Kind::Pool:
        ops += static_cast<u64>(c[k]) * n[k] * (l.pool - 1);
        break;
      case CnnLayer::Kind::BatchNorm:
        ops += 2ull * c[k] * n[k];
        break;
    }
  }
  ops += 2ull * c.back() * n.back() * a.dense_size;
  ops += 2ull * a.dense_size * a.output_size;
  return ops;
}

u64 lstm_step_ops(i64 n_in, i64 n_h) {
  return 8ull * (n_in + n_h) * n_h + 4ull * n_h;
}

u64 op_count_rnn(const RnnArch& a) {
  u64 per_step = 0;
  i64 prev = a.input_features;
  for (i64 h : a.hidden) {
    per_step += lstm_step_ops(prev, h);
    prev = h;
  }
  const u64 dir = a.bidirectional ? 2 : 1;
  return dir * a.seq_len * per_step +
         dir * 2ull * a.hidden.back() * a.output_size;
}

u64 mem_peak_fc(const FcArch& a) {
  u64 peak = 0;
  i64 prev = a.input_size;
  auto layer = [&](i64 n_in, i64 n_out) {
    peak = std::max(peak, static_cast<u64>(n_in) * n_out + 2ull * n_out +
                              static_cast<u64>(n_in));
  };
  for (i64 w : a.hidden) {
    layer(prev, w);
    prev = w;
  }
  layer(prev, a.output_size);
  return peak;
}

u64 mem_peak_cnn(const CnnArch& a) {
  const auto n = a.length_chain();
  const auto c = a.channel_chain();
  u64 peak = 0;
  for (std::size_t k = 1; k <= a.layers.size(); ++k) {
    const auto& l = a.layers[k - 1];
    switch (l.kind) {
      case CnnLayer::Kind::Conv:
        peak = std::max(peak, static_cast<u64>(c[k - 1]) * n[k - 1] +
                                  static_cast<u64>(c[k]) * n[k] +
                                  static_cast<u64>(c[k]) *
                                      (c[k - 1] * l.kernel + 1));
        break;
      case CnnLayer::Kind::BatchNorm:
        peak = std::max(peak, 3ull * c[k] * n[k]);
        break;
      case CnnLayer::Kind::Pool:
        // pooling runs in place over its input buffer; never the peak
        break;
    }
  }
  const u64 flat = static_cast<u64>(c.back()) * n.back();
  peak = std::max(peak, flat * a.dense_size + flat + 2ull * a.dense_size);
  return peak;
}

u64 mem_peak_rnn(const RnnArch& a) {
  u64 peak = 0;
  i64 prev = a.input_features;
  for (i64 h : a.hidden) {
    peak = std::max(peak, static_cast<u64>(4ull * (prev + h) * h + prev +
                                           6ull * h));
    prev = h;
  }
  return a.bidirectional ? 2 * peak : peak;
}

u64 mem_total_fc(const FcArch& a) {
  u64 total = a.input_size;
  i64 prev = a.input_size;
  for (i64 w : a.hidden) {
    total += static_cast<u64>(prev) * w + 2ull * w;
    prev = w;
  }
  total += static_cast<u64>(prev) * a.output_size + 2ull * a.output_size;
  return total;
}

u64 mem_total_cnn(const CnnArch& a) {
  const auto n = a.length_chain();
  const auto c = a.channel_chain();
  u64 total = static_cast<u64>(a.input_channels) * a.input_len;
  for (std::size_t k = 1; k <= a.layers.size(); ++k) {
    const auto& l = a.layers[k - 1];
    switch (l.kind) {
      case CnnLayer::Kind::Conv:
        total += static_cast<u64>(c[k]) * (c[k - 1] * l.kernel + 1) +
                 static_cast<u64>(c[k]) * n[k];
        break;
      case CnnLayer::Kind::Pool:
        total += static_cast<u64>(c[k - 1]) * n[k - 1] +
                 static_cast<u64>(c[k]) * n[k];
        break;
      case CnnLayer::Kind::BatchNorm:
        total += 2ull * c[k] * n[k];
        break;
    }
  }
  const u64 flat = static_cast<u64>(c.back()) * n.back();
  total += flat * a.dense_size + 2ull * a.dense_size;
  total += static_cast<u64>(a.dense_size) * a.output_size +
           2ull * a.output_size;
  return total;
}

u64 mem_total_rnn(const RnnArch& a) {
  u64 per_dir = 0;
  i64 prev = a.input_features;
  for (i64 h : a.hidden) {
    per_dir += 4ull * (prev + h) * h + 10ull * h;
    prev = h;
  }
  const u64 dir = a.bidirectional ? 2 : 1;
  return static_cast<u64>(a.input_features) + dir * per_dir +
         dir * a.hidden.back() * a.output_size + 2ull * a.output_size;
}

}  // namespace

std::uint64_t op_count(const Arch& a) {
  validate(a);
  if (const auto* fc = std::get_if<FcArch>(&a)) return op_count_fc(*fc);
  if (const auto* cnn = std::get_if<CnnArch>(&a)) return op_count_cnn(*cnn);
  return op_count_rnn(std::get<RnnArch>(a));
}

std::uint64_t mem_peak(const Arch& a) {
  validate(a);
  if (const auto* fc = std::get_if<FcArch>(&a)) return mem_peak_fc(*fc);
  if (const auto* cnn = std::get_if<CnnArch>(&a)) return mem_peak_cnn(*cnn);
  return mem_peak_rnn(std::get<RnnArch>(a));
}

std::uint64_t mem_total(const Arch& a) {
  validate(a);
  if (const auto* fc = std::get_if<FcArch>(&a)) return mem_total_fc(*fc);
  if (const auto* cnn = std::get_if<CnnArch>(&a)) return mem_total_cnn(*cnn);
  return mem_total_rnn(std::get<RnnArch>(a));
}

CostReport cost_report(const Arch& a) {
  CostReport r;
  r.n_op = op_count(a);
  r.m_peak = mem_peak(a);
  r.m_total = mem_total(a);
  if (const auto* cnn = std::get_if<CnnArch>(&a))
    r.cnn_length_chain = cnn->length_chain();
  return r;
}

CnnArch vgg_cnn(std::int64_t input_len, std::int64_t input_channels,
                const std::vector<std::int64_t>& block_channels,
                std::int64_t pool_factor, bool with_batch_norm,
                std::int64_t output_size) {
  CnnArch a;
  a.input_len = input_len;
  a.input_channels = input_channels;
  a.output_size = output_size;
  for (i64 ch : block_channels) {
    for (int rep = 0; rep < 2; ++rep) {
      a.layers.push_back({CnnLayer::Kind::Conv, ch, 3, 0});
      if (with_batch_norm) a.layers.push_back({CnnLayer::Kind::BatchNorm});
    }
    a.layers.push_back({CnnLayer::Kind::Pool, 0, 0, pool_factor});
  }
  // dense layer of the same size as the flattened final block
  a.dense_size = a.channel_chain().back() * a.length_chain().back();
  a.validate();
  return a;
}

Arch arch_from_json(const nlohmann::json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "fc") {
    FcArch a;
    a.input_size = j.at("input_size").get<i64>();
    a.hidden = j.value("hidden", std::vector<i64>{});
    a.output_size = j.value("output_size", i64{1});
    a.validate();
    return a;
  }
  if (family == "cnn") {
    CnnArch a;
    a.input_len = j.at("input_len").get<i64>();
    a.input_channels = j.at("input_channels").get<i64>();
    a.output_size = j.value("output_size", i64{1});
    if (j.contains("layers")) {
      for (const auto& lj : j.at("layers")) {
        const std::string type = lj.at("type").get<std::string>();
        CnnLayer l;
        if (type == "conv") {
          l.kind = CnnLayer::Kind::Conv;
          l.channels = lj.at("channels").get<i64>();
          l.kernel = lj.value("kernel", i64{3});
        } else if (type == "batch_norm") {
          l.kind = CnnLayer::Kind::BatchNorm;
        } else if (type == "pool") {
          l.kind = CnnLayer::Kind::Pool;
          l.pool = lj.at("factor").get<i64>();
        } else {
          throw std::invalid_argument("cnn: unknown layer type '" + type +
                                      "'");
        }
        a.layers.push_back(l);
      }
      a.dense_size = j.contains("dense_size")
                         ? j.at("dense_size").get<i64>()
                         : a.channel_chain().back() * a.length_chain().back();
      a.validate();
      return a;
    }
    // block shorthand: two conv layers + pool per block, channels from list
    auto b = vgg_cnn(a.input_len, a.input_channels,
                     j.at("block_channels").get<std::vector<i64>>(),
                     j.at("pool_factor").get<i64>(),
                     j.value("batch_norm", true), a.output_size);
    if (j.contains("dense_size")) {
      b.dense_size = j.at("dense_size").get<i64>();
      b.validate();
    }
    return b;
  }
  if (family == "rnn" || family == "birnn") {
    RnnArch a;
    a.seq_len = j.at("seq_len").get<i64>();
    a.input_features = j.at("input_features").get<i64>();
    a.hidden = j.at("hidden").get<std::vector<i64>>();
    a.output_size = j.value("output_size", i64{1});
    a.bidirectional = family == "birnn" || j.value("bidirectional", false);
    a.validate();
    return a;
  }
  throw std::invalid_argument("unknown architecture family '" + family + "'");
}

nlohmann::json arch_to_json(const Arch& a) {
  nlohmann::json j;
  j["family"] = family_name(a);
  if (const auto* fc = std::get_if<FcArch>(&a)) {
    j["input_size"] = fc->input_size;
    j["hidden"] = fc->hidden;
    j["output_size"] = fc->output_size;
  } else if (const auto* cnn = std::get_if<CnnArch>(&a)) {
    j["input_len"] = cnn->input_len;
    j["input_channels"] = cnn->input_channels;
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : cnn->layers) {
      switch (l.kind) {
        case CnnLayer::Kind::Conv:
          layers.push_back({{"type", "conv"},
                            {"channels", l.channels},
                            {"kernel", l.kernel}});
          break;
        case CnnLayer::Kind::BatchNorm:
          layers.push_back({{"type", "batch_norm"}});
          break;
        case CnnLayer::Kind::Pool:
          layers.push_back({{"type", "pool"}, {"factor", l.pool}});
          break;
      }
    }
    j["layers"] = std::move(layers);
    j["dense_size"] = cnn->dense_size;
    j["output_size"] = cnn->output_size;
  } else {
    const auto& rnn = std::get<RnnArch>(a);
    j["seq_len"] = rnn.seq_len;
    j["input_features"] = rnn.input_features;
    j["hidden"] = rnn.hidden;
    j["output_size"] = rnn.output_size;
    j["bidirectional"] = rnn.bidirectional;
  }
  return j;
}

}  // namespace ssb::costmodel
