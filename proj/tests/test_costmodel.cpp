#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <nlohmann/json.hpp>

#include "ssb/costmodel.hpp"
#include "ssb/rng.hpp"

using namespace ssb;
using namespace ssb::costmodel;
using u64 = std::uint64_t;

#include "cost_oracles.hpp"

using namespace cost_oracles;

// ------------------------------------------------------------------- tests

TEST_CASE("cost models equal both oracles exactly on random architectures") {
  Rng rng(2024);
  for (int i = 0; i < 120; ++i) {
    CAPTURE(i);
    const Arch fc = random_fc(rng);
    CHECK(op_count(fc) == oracle_ops(fc));
    CHECK(mem_peak(fc) == oracle_peak(fc));
    CHECK(mem_total(fc) == oracle_total(fc));

    const Arch cnn = random_cnn(rng);
    CHECK(op_count(cnn) == oracle_ops(cnn));
    CHECK(mem_peak(cnn) == oracle_peak(cnn));
    CHECK(mem_total(cnn) == oracle_total(cnn));

    const Arch rnn = random_rnn(rng, false);
    CHECK(op_count(rnn) == oracle_ops(rnn));
    CHECK(mem_peak(rnn) == oracle_peak(rnn));
    CHECK(mem_total(rnn) == oracle_total(rnn));

    const Arch birnn = random_rnn(rng, true);
    CHECK(op_count(birnn) == oracle_ops(birnn));
    CHECK(mem_peak(birnn) == oracle_peak(birnn));
    CHECK(mem_total(birnn) == oracle_total(birnn));
  }
}

TEST_CASE("reference architecture values") {
  const Arch tiny_fc = FcArch{2, {3}, 1};
  CHECK(op_count(tiny_fc) == 18);
  CHECK(mem_peak(tiny_fc) == 14);

  const Arch fc = FcArch{222, {64, 64, 64, 64}, 1};
  CHECK(op_count(fc) == 53120);
  CHECK(mem_peak(fc) == 14558);
  CHECK(mem_total(fc) == 27296);

  const Arch rnn6 = RnnArch{111, 2, {6}, 1, false};
  CHECK(op_count(rnn6) == 111 * (8 * (2 + 6) * 6 + 4 * 6) + 2 * 6 * 1);
  CHECK(op_count(rnn6) == 45300);
}

TEST_CASE("tuned-architecture comparisons hold") {
  const Arch fc = FcArch{222, {64, 64, 64, 64}, 1};
  const Arch cnn_small = vgg_cnn(111, 2, {4}, 4, true);
  const Arch rnn6 = RnnArch{111, 2, {6}, 1, false};
  const Arch birnn4 = RnnArch{111, 2, {4}, 1, true};
  const Arch rnn128 = RnnArch{111, 2, {128}, 1, false};
  const Arch birnn128 = RnnArch{111, 2, {128}, 1, true};
  const Arch cnn = vgg_cnn(111, 2, {32, 64}, 4, true);

  const double fc_ops = static_cast<double>(op_count(fc));
  for (const Arch* a : {&cnn_small, &rnn6, &birnn4}) {
    const double r = static_cast<double>(op_count(*a)) / fc_ops;
    CHECK(r > 0.2);
    CHECK(r < 5.0);
  }
  CHECK(static_cast<double>(op_count(rnn128)) / fc_ops >= 100.0);
  CHECK(static_cast<double>(op_count(birnn128)) / fc_ops >= 100.0);

  CHECK(mem_total(rnn128) < mem_total(cnn));
  CHECK(mem_total(birnn128) < mem_total(cnn));
}

TEST_CASE("bidirectional models double the unidirectional costs coherently") {
  Rng rng(77);
  for (int i = 0; i < 30; ++i) {
    RnnArch a = std::get<RnnArch>(random_rnn(rng, false));
    RnnArch b = a;
    b.bidirectional = true;
    CHECK(op_count(Arch{b}) == 2 * op_count(Arch{a}));
    CHECK(mem_peak(Arch{b}) == 2 * mem_peak(Arch{a}));
    // total doubles everything except the shared input and readout bias/out
    CHECK(mem_total(Arch{b}) ==
          2 * mem_total(Arch{a}) - static_cast<u64>(a.input_features) -
              2 * static_cast<u64>(a.output_size));
  }
}

TEST_CASE("costs grow monotonically with width and depth") {
  FcArch a{100, {32, 32}, 1};
  FcArch wider = a;
  wider.hidden[0] = 33;
  FcArch deeper = a;
  deeper.hidden.push_back(8);
  CHECK(op_count(Arch{wider}) > op_count(Arch{a}));
  CHECK(op_count(Arch{deeper}) > op_count(Arch{a}));
  CHECK(mem_total(Arch{wider}) > mem_total(Arch{a}));
  CHECK(mem_total(Arch{deeper}) > mem_total(Arch{a}));

  RnnArch r{50, 2, {16}, 1, false};
  RnnArch r2 = r;
  r2.hidden[0] = 17;
  CHECK(op_count(Arch{r2}) > op_count(Arch{r}));
  RnnArch r3 = r;
  r3.seq_len = 51;
  CHECK(op_count(Arch{r3}) > op_count(Arch{r}));
}

TEST_CASE("pooling length chain uses the floor rule") {
  auto a = vgg_cnn(111, 2, {16, 32, 64}, 2, true);
  CHECK(a.length_chain().back() == 13);  // 111 -> 55 -> 27 -> 13
  CHECK(a.dense_size == 64 * 13);

  auto b = vgg_cnn(111, 2, {32, 64}, 4, true);
  CHECK(b.length_chain().back() == 6);  // 111 -> 27 -> 6
  CHECK(b.dense_size == 64 * 6);

  auto c = vgg_cnn(111, 2, {4}, 4, true);
  CHECK(c.length_chain().back() == 27);
  CHECK(c.dense_size == 108);
}

TEST_CASE("vgg builder emits conv-bn pairs per block") {
  auto a = vgg_cnn(64, 2, {8, 16}, 2, true);
  using K = CnnLayer::Kind;
  REQUIRE(a.layers.size() == 10);
  const K expect[] = {K::Conv, K::BatchNorm, K::Conv, K::BatchNorm, K::Pool,
                      K::Conv, K::BatchNorm, K::Conv, K::BatchNorm, K::Pool};
  for (std::size_t i = 0; i < a.layers.size(); ++i)
    CHECK(a.layers[i].kind == expect[i]);
  CHECK(a.layers[0].channels == 8);
  CHECK(a.layers[5].channels == 16);

  auto b = vgg_cnn(64, 2, {8}, 2, false);
  REQUIRE(b.layers.size() == 3);
  CHECK(b.layers[0].kind == K::Conv);
  CHECK(b.layers[1].kind == K::Conv);
  CHECK(b.layers[2].kind == K::Pool);
}

TEST_CASE("architecture validation rejects malformed specs") {
  CHECK_THROWS_AS(validate(Arch{FcArch{0, {}, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(Arch{FcArch{4, {0}, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(Arch{RnnArch{10, 2, {}, 1, false}}),
                  std::invalid_argument);
  CnnArch pooled_away;
  pooled_away.input_len = 4;
  pooled_away.input_channels = 1;
  pooled_away.layers.push_back({CnnLayer::Kind::Pool, 0, 0, 8});
  pooled_away.dense_size = 1;
  CHECK_THROWS_AS(validate(Arch{pooled_away}), std::invalid_argument);
}

TEST_CASE("json round trip preserves architectures") {
  Rng rng(31);
  std::vector<Arch> archs{random_fc(rng), random_cnn(rng),
                          random_rnn(rng, false), random_rnn(rng, true)};
  for (const auto& a : archs) {
    const Arch b = arch_from_json(arch_to_json(a));
    CHECK(family_name(a) == family_name(b));
    CHECK(op_count(a) == op_count(b));
    CHECK(mem_peak(a) == mem_peak(b));
    CHECK(mem_total(a) == mem_total(b));
    CHECK(arch_to_json(a) == arch_to_json(b));
  }

  // the block shorthand matches the builder
  nlohmann::json j{{"family", "cnn"},    {"input_len", 111},
                   {"input_channels", 2}, {"block_channels", {32, 64}},
                   {"pool_factor", 4},    {"batch_norm", true}};
  CHECK(arch_to_json(arch_from_json(j)) ==
        arch_to_json(Arch{vgg_cnn(111, 2, {32, 64}, 4, true)}));

  CHECK_THROWS_AS(arch_from_json(nlohmann::json{{"family", "mlp"}}),
                  std::invalid_argument);
}

TEST_CASE("cost_report bundles the three metrics and the length chain") {
  const Arch cnn = vgg_cnn(111, 2, {4}, 4, true);
  const auto r = cost_report(cnn);
  CHECK(r.n_op == op_count(cnn));
  CHECK(r.m_peak == mem_peak(cnn));
  CHECK(r.m_total == mem_total(cnn));
  REQUIRE(r.cnn_length_chain.size() == 6);
  CHECK(r.cnn_length_chain.front() == 111);
  CHECK(r.cnn_length_chain.back() == 27);

  const auto rf = cost_report(Arch{FcArch{4, {2}, 1}});
  CHECK(rf.cnn_length_chain.empty());
}
