#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "lens/cost_models.hpp"
#include "oracles.hpp"

using namespace lens;

namespace {

WirelessProfile wl(double t, double rt = 0.0, double alpha = 0.0, double beta = 0.0) {
  return WirelessProfile{Technology::LTE, t, rt, alpha, beta};
}

DeviceProfile mac_only(double per_mac) {
  DeviceProfile d;
  d.name = "mac-only";
  for (auto k : {LayerKind::Conv, LayerKind::MaxPool, LayerKind::FullyConnected}) {
    d.latency[k] = {k == LayerKind::Conv ? 0.0 : 1e-6, {{"mac", per_mac}}};
    d.power[k] = {1.0, {}};
  }
  return d;
}

ArchitectureSpec small_spec() {
  return {{32, 32, 3}, {LayerSpec::conv(3, 24), LayerSpec::max_pool(), LayerSpec::fully_connected(10, Activation::Softmax)},
          10};
}

}  // namespace

TEST(TxLatency, Examples) {
  EXPECT_EQ(tx_latency(0, 0.5), 0.0);
  EXPECT_NEAR(tx_latency(150528, 3.0), 0.401408, 1e-15);
  EXPECT_DOUBLE_EQ(tx_latency(150528, 6.0), tx_latency(150528, 3.0) / 2);
  EXPECT_THROW(tx_latency(10, 0.0), ProfileError);
  EXPECT_THROW(tx_latency(10, -1.0), ProfileError);
}

TEST(TxEnergy, Examples) {
  // 375000 bytes is one second at 3 Mbps
  EXPECT_DOUBLE_EQ(tx_energy(375000, wl(3.0, 0, 0.0, 1.0)), 1.0);
  EXPECT_EQ(tx_energy(0, wl(3.0, 0.5, 5.0, 7.0)), 0.0);
  EXPECT_NEAR(tx_energy(150528, wl(3.0, 0, 0.1, 1.0)), 1.3 * 0.401408, 1e-12);
  EXPECT_NEAR(tx_energy(150528, wl(3.0, 0, 0.1, 1.0)), 0.52183, 1e-5);
}

TEST(TxEnergy, HasNoRoundTripTerm) {
  EXPECT_EQ(tx_energy(1000, wl(2.0, 0.0, 0.2, 1.0)), tx_energy(1000, wl(2.0, 5.0, 0.2, 1.0)));
}

TEST(CommLatency, Examples) {
  EXPECT_EQ(comm_latency(150528, wl(3.0)), tx_latency(150528, 3.0));
  EXPECT_NEAR(comm_latency(150528, wl(3.0, 0.05)), 0.451408, 1e-12);
  EXPECT_NEAR(comm_latency(150528, wl(1e12, 0.05)), 0.05, 1e-9);
}

TEST(WirelessProfile, Validation) {
  EXPECT_NO_THROW(wl(1.0).validate());
  EXPECT_THROW(wl(0.0).validate(), ProfileError);
  EXPECT_THROW(wl(1.0, -0.1).validate(), ProfileError);
  EXPECT_THROW(wl(1.0, 0, -1).validate(), ProfileError);
  EXPECT_THROW(wl(1.0, 0, 0, -1).validate(), ProfileError);
  EXPECT_THROW(wl(std::numeric_limits<double>::infinity()).validate(), ProfileError);
}

TEST(PredictLayer, MacLatencyExample) {
  const auto spec = small_spec();
  const auto io = compute_sizes(spec);
  EXPECT_EQ(mac_count(spec.layers[0], io[0]), 663552);
  EXPECT_EQ(oracle::macs(spec, 0), 663552);
  const auto cost = predict_layer(spec.layers[0], io[0], mac_only(1e-9));
  EXPECT_NEAR(cost.latency_s, 6.63552e-4, 1e-18);
}

TEST(PredictLayer, MacCountMatchesOracle) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    const auto spec = decode(sample_random(SearchSpace{}, rng), SearchSpace{});
    const auto io = compute_sizes(spec);
    for (std::size_t k = 0; k < spec.layers.size(); ++k) ASSERT_EQ(mac_count(spec.layers[k], io[k]), oracle::macs(spec, k));
  }
}

TEST(PredictLayer, BiasOnlyModel) {
  DeviceProfile d;
  d.name = "flat";
  for (auto k : {LayerKind::Conv, LayerKind::MaxPool, LayerKind::FullyConnected}) {
    d.latency[k] = {0.003, {{"mac", 0.0}, {"input", 0.0}}};
    d.power[k] = {2.0, {}};
  }
  const auto spec = decode(sample_random(SearchSpace{}, 1), SearchSpace{});
  const auto io = compute_sizes(spec);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) EXPECT_EQ(predict_layer(spec.layers[i], io[i], d).latency_s, 0.003);
}

TEST(PredictLayer, EnergyIsPowerTimesLatency) {
  DeviceProfile d = mac_only(0.0);
  d.latency[LayerKind::Conv] = {0.1, {}};
  d.power[LayerKind::Conv] = {5.0, {}};
  const auto spec = small_spec();
  const auto c = predict_layer(spec.layers[0], compute_sizes(spec)[0], d);
  EXPECT_DOUBLE_EQ(c.energy_j, 0.5);
  EXPECT_EQ(c.energy_j, c.power_w * c.latency_s);
}

TEST(PredictLayer, MissingPredictorIsProfileError) {
  DeviceProfile d = mac_only(1e-9);
  d.latency.erase(LayerKind::MaxPool);
  const auto spec = small_spec();
  EXPECT_THROW(predict_layer(spec.layers[1], compute_sizes(spec)[1], d), ProfileError);
}

TEST(PredictLayer, NonPositivePredictionIsProfileError) {
  DeviceProfile d = mac_only(1e-9);
  d.latency[LayerKind::Conv] = {-1.0, {}};
  const auto spec = small_spec();
  EXPECT_THROW(predict_layer(spec.layers[0], compute_sizes(spec)[0], d), ProfileError);
}

TEST(DeviceProfile, UnknownFeatureRejected) {
  DeviceProfile d = DeviceProfile::synthetic_gpu();
  d.latency[LayerKind::MaxPool].weights["mac"] = 1.0;
  EXPECT_THROW(d.validate(), ProfileError);
  EXPECT_NO_THROW(DeviceProfile::synthetic_cpu().validate());
}

TEST(Candidates, FatOutputsGiveOnlySentinels) {
  std::vector<LayerIO> ios(4);
  for (auto& io : ios) io.output_bytes = 200;
  EXPECT_EQ(identify_partition_candidates(ios, 100), (std::vector<std::size_t>{0, 4}));
}

TEST(Candidates, ShrinkingGivesEveryIndex) {
  std::vector<LayerIO> ios(4);
  for (std::size_t i = 0; i < 4; ++i) ios[i].output_bytes = 90 - 10 * static_cast<std::int64_t>(i);
  EXPECT_EQ(identify_partition_candidates(ios, 100), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(Candidates, AlexnetShapedProfile) {
  // conv1 pool1 conv2 pool2 conv3 conv4 conv5 pool5 fc6 fc7 fc8; maps stay
  // above the 150528 B input until pool5.
  const std::vector<std::int64_t> out{290400, 290400, 186624, 186624, 173056, 173056, 173056, 9216, 4096, 4096, 1000};
  std::vector<LayerIO> ios(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) ios[i].output_bytes = out[i];
  // Split s uploads the output of layer s-1, so the first real split sits
  // right after pool5.
  EXPECT_EQ(identify_partition_candidates(ios, 150528), (std::vector<std::size_t>{0, 8, 9, 10, 11}));
}

TEST(EvaluateDeployment, FreeCommunicationPicksAllCloud) {
  const auto spec = decode(sample_random(SearchSpace{}, 2), SearchSpace{});
  const auto e = evaluate_deployment(spec, DeviceProfile::synthetic_gpu(), wl(1e12));
  EXPECT_EQ(e.index_latency, 0u);
  EXPECT_LT(e.latency, 1e-5);
}

TEST(EvaluateDeployment, StarvedLinkPicksAllEdge) {
  const auto spec = decode(sample_random(SearchSpace{}, 2), SearchSpace{});
  const auto e = evaluate_deployment(spec, DeviceProfile::synthetic_gpu(), wl(1e-6, 0.02, 0.4, 1.3));
  EXPECT_EQ(e.index_latency, e.all_edge());
  EXPECT_EQ(e.index_energy, e.all_edge());
}

TEST(EvaluateDeployment, MatchesBruteForceExactly) {
  std::mt19937_64 rng(21);
  for (const double t : {0.7, 7.5, 16.1}) {
    for (const auto& dev : {DeviceProfile::synthetic_gpu(), DeviceProfile::synthetic_cpu()}) {
      for (int i = 0; i < 100; ++i) {
        const auto spec = decode(sample_random(SearchSpace{}, rng), SearchSpace{});
        const auto w = wl(t, 0.02, 0.43839, 1.28804);
        const auto e = evaluate_deployment(spec, dev, w);
        const auto b = oracle::brute_force_deployment(spec, dev, w);
        ASSERT_EQ(e.index_latency, b.index_latency);
        ASSERT_EQ(e.index_energy, b.index_energy);
        ASSERT_EQ(e.latency, b.latency);
        ASSERT_EQ(e.energy, b.energy);
      }
    }
  }
}

TEST(EvaluateDeployment, Invariants) {
  std::mt19937_64 rng(22);
  const auto dev = DeviceProfile::synthetic_gpu();
  for (int i = 0; i < 300; ++i) {
    const auto spec = decode(sample_random(SearchSpace{}, rng), SearchSpace{});
    const auto e = evaluate_deployment(spec, dev, wl(3.0, 0.02, 0.28317, 0.13286));
    ASSERT_TRUE(e.is_candidate(e.index_latency));
    ASSERT_TRUE(e.is_candidate(e.index_energy));
    ASSERT_EQ(e.latency, e.latency_at(e.index_latency));
    ASSERT_EQ(e.energy, e.energy_at(e.index_energy));
    ASSERT_EQ(e.candidates.front(), 0u);
    ASSERT_EQ(e.candidates.back(), e.all_edge());

    double l = 0, en = 0;
    for (const auto& c : e.layers) {
      l += c.latency_s;
      en += c.power_w * c.latency_s;
      ASSERT_EQ(c.energy_j, c.power_w * c.latency_s);
    }
    ASSERT_EQ(e.latency_at(e.all_edge()), l);
    ASSERT_EQ(e.energy_at(e.all_edge()), en);
    for (std::size_t k = 0; k < e.candidates.size(); ++k) {
      ASSERT_LE(e.latency, e.latency_acc[k]);
      ASSERT_LE(e.energy, e.energy_acc[k]);
    }
  }
}

TEST(EvaluateDeployment, FatSplitsAreDominatedByAllCloud) {
  // Recompute every split, including excluded ones, with the oracle's cost
  // walk and check All-Cloud beats each fat split.
  std::mt19937_64 rng(23);
  const auto dev = DeviceProfile::synthetic_cpu();
  for (int i = 0; i < 200; ++i) {
    const auto spec = decode(sample_random(SearchSpace{}, rng), SearchSpace{});
    const auto w = wl(5.0, 0.02, 0.43839, 1.28804);
    const auto e = evaluate_deployment(spec, dev, w);
    for (std::size_t s = 1; s < e.all_edge(); ++s) {
      if (e.sizes[s - 1].output_bytes < e.input_bytes) continue;
      ASSERT_FALSE(e.is_candidate(s));
      const double l = e.edge_latency(s) + comm_latency(e.sizes[s - 1].output_bytes, w);
      const double en = e.edge_energy(s) + tx_energy(e.sizes[s - 1].output_bytes, w);
      ASSERT_LE(e.latency_acc.front(), l);
      ASSERT_LE(e.energy_acc.front(), en);
    }
  }
}

TEST(EvaluateDeployment, LatencyNonIncreasingInThroughput) {
  const auto spec = decode(sample_random(SearchSpace{}, 31), SearchSpace{});
  const auto dev = DeviceProfile::synthetic_gpu();
  std::vector<double> prev;
  for (double t = 0.1; t < 1000; t *= 1.3) {
    const auto e = evaluate_deployment(spec, dev, wl(t, 0.02, 0.43839, 1.28804));
    if (!prev.empty()) {
      for (std::size_t k = 0; k < e.candidates.size(); ++k) ASSERT_LE(e.latency_acc[k], prev[k]);
    }
    prev = e.latency_acc;
  }
}

TEST(EvaluateDeployment, EnergyApproachesAlphaAsymptote) {
  const auto spec = decode(sample_random(SearchSpace{}, 32), SearchSpace{});
  const auto dev = DeviceProfile::synthetic_gpu();
  const double alpha = 0.43839;
  const auto e = evaluate_deployment(spec, dev, wl(1e9, 0.02, alpha, 1.28804));
  for (std::size_t k = 0; k + 1 < e.candidates.size(); ++k) {
    const std::size_t s = e.candidates[k];
    const double limit = e.edge_energy(s) + alpha * 8.0 * static_cast<double>(e.uploaded_bytes(s)) / 1e6;
    EXPECT_NEAR(e.energy_acc[k], limit, 1e-6 * limit + 1e-12);
  }
  // And beta-only energy decreases monotonically.
  double prev = std::numeric_limits<double>::infinity();
  for (double t = 0.1; t < 1000; t *= 2) {
    const double v = evaluate_deployment(spec, dev, wl(t, 0.0, 0.0, 1.0)).energy_at(0);
    ASSERT_LE(v, prev);
    prev = v;
  }
}

TEST(EvaluateDeployment, Deterministic) {
  const auto spec = decode(sample_random(SearchSpace{}, 33), SearchSpace{});
  const auto a = evaluate_deployment(spec, DeviceProfile::synthetic_cpu(), wl(3.0, 0.02, 0.4, 1.2));
  const auto b = evaluate_deployment(spec, DeviceProfile::synthetic_cpu(), wl(3.0, 0.02, 0.4, 1.2));
  EXPECT_EQ(a.latency_acc, b.latency_acc);
  EXPECT_EQ(a.energy_acc, b.energy_acc);
}

TEST(SplitLabel, Names) {
  EXPECT_EQ(split_label(0, 12), "All-Cloud");
  EXPECT_EQ(split_label(12, 12), "All-Edge");
  EXPECT_EQ(split_label(5, 12), "Split@5");
}
