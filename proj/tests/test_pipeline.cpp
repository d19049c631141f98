#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace lis;
using lis::test::EMat;

namespace {

FilteredBlock tagged(std::vector<cplx> v, std::vector<std::size_t> tags) { return {std::move(v), std::move(tags)}; }

}  // namespace

TEST(PanelFilter, IdentityRowsPassThrough) {
  PanelEqualizer eq;
  eq.W = ComplexMatrix::identity(3);
  eq.algorithm = Algorithm::iic;
  eq.selected_users = {0, 1, 2};
  const std::vector<cplx> y{{1, 2}, {3, 4}, {5, 6}};
  const auto out = panel_filter(eq, y);
  EXPECT_EQ(out.values, y);
  EXPECT_FALSE(out.tagged());
}

TEST(PanelFilter, MatchedFilterPeak) {
  // Noiseless single user, y = h x with x = 1.
  const auto h = ComplexMatrix::from_rows({{cplx(1, 1)}, {2}, {cplx(0, -1)}});
  const auto eq = rmf_formulate(h, 1);
  const auto out = panel_filter(eq, h.col(0));
  ASSERT_EQ(out.values.size(), 1u);
  EXPECT_NEAR(std::abs(out.values[0] - cplx(h.frobenius_norm2())), 0.0, 1e-14);
  EXPECT_EQ(out.user_tags, (std::vector<std::size_t>{0}));
}

TEST(PanelFilter, RandomMatchesOracleAndChecksShape) {
  Rng rng(51);
  const auto h = test::random_matrix(rng, 6, 4);
  const auto eq = rmf_formulate(h, 3);
  const auto y = test::random_matrix(rng, 6, 1);
  const auto out = panel_filter(eq, y.col(0));
  const Eigen::VectorXcd want = test::to_eigen(eq.W) * test::to_eigen(y);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(std::abs(out.values[i] - want(static_cast<Eigen::Index>(i))), 0, 1e-12);
  const std::vector<cplx> short_y(5);
  EXPECT_THROW(panel_filter(eq, short_y), DimensionError);
}

TEST(Psu, CombineDisjointTags) {
  const auto out = psu_process({tagged({{1, 0}}, {0}), tagged({{2, 0}}, {1})}, AggregationMode::combine, 2);
  EXPECT_EQ(out.values, (std::vector<cplx>{{1, 0}, {2, 0}}));
}

TEST(Psu, CombineAbsentTagsAreZeroAndOverlapsSum) {
  const auto out =
      psu_process({tagged({1, 2}, {3, 0}), tagged({10}, {3}), tagged({}, {})}, AggregationMode::combine, 5);
  EXPECT_EQ(out.values, (std::vector<cplx>{2, 0, 0, 11, 0}));
}

TEST(Psu, CombineEqualsEmbeddingOracle) {
  Rng rng(52);
  const std::size_t K = 7;
  for (int t = 0; t < 20; ++t) {
    std::vector<FilteredBlock> children;
    Eigen::VectorXcd want = Eigen::VectorXcd::Zero(K);
    for (int c = 0; c < 4; ++c) {
      std::vector<std::size_t> perm = test::iota_order(K);
      for (std::size_t i = K; i > 1; --i) std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.uniform() * i)]);
      const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * K);
      FilteredBlock b;
      EMat s = EMat::Zero(K, n);
      for (std::size_t r = 0; r < n; ++r) {
        b.values.push_back(rng.complex_normal());
        b.user_tags.push_back(perm[r]);
        s(perm[r], r) = 1.0;
      }
      Eigen::VectorXcd v(n);
      for (std::size_t r = 0; r < n; ++r) v(r) = b.values[r];
      want += s * v;
      children.push_back(std::move(b));
    }
    const auto out = psu_process(children, AggregationMode::combine, K);
    for (std::size_t k = 0; k < K; ++k) EXPECT_NEAR(std::abs(out.values[k] - want(k)), 0.0, 1e-14);
  }
}

TEST(Psu, BypassConcatenates) {
  std::vector<FilteredBlock> blocks;
  for (int p = 0; p < 5; ++p) blocks.push_back({std::vector<cplx>(3, cplx(p)), {}});
  const auto out = psu_process(blocks, AggregationMode::bypass, 4);
  ASSERT_EQ(out.values.size(), 15u);
  EXPECT_EQ(out.values[4], cplx(1));
  EXPECT_EQ(out.values[14], cplx(4));
}

TEST(Psu, CombineErrors) {
  EXPECT_THROW(psu_process({tagged({1, 2}, {1, 1})}, AggregationMode::combine, 3), ConfigError);
  EXPECT_THROW(psu_process({FilteredBlock{{1}, {}}}, AggregationMode::combine, 3), ConfigError);
  EXPECT_THROW(psu_process({tagged({1}, {3})}, AggregationMode::combine, 3), DimensionError);
}

TEST(Tree, Levels) {
  EXPECT_EQ(tree_levels(1), 0u);
  EXPECT_EQ(tree_levels(4), 1u);
  EXPECT_EQ(tree_levels(5), 2u);
  EXPECT_EQ(tree_levels(16), 2u);
  EXPECT_EQ(tree_levels(256), 4u);
  EXPECT_EQ(tree_levels(257), 5u);
  EXPECT_EQ(tree_levels(8, 2), 3u);
  EXPECT_THROW(tree_levels(8, 1), ConfigError);
  const auto t = build_psu_tree(256, AggregationMode::bypass);
  EXPECT_EQ(t.levels, 4u);
  ASSERT_EQ(t.nodes.size(), 4u);
  EXPECT_EQ(t.nodes[0].size(), 64u);
  EXPECT_EQ(t.nodes[3].size(), 1u);
}

TEST(Tree, SinglePanelIsIdentity) {
  const auto t = build_psu_tree(1, AggregationMode::combine);
  const FilteredBlock b{{1, 2}, {1, 0}};
  const auto out = aggregate_tree(t, {b}, 3);
  EXPECT_EQ(out.values, b.values);
  EXPECT_EQ(out.user_tags, b.user_tags);
}

TEST(Tree, EveryPanelReachesRootOnce) {
  for (std::size_t P : {1u, 2u, 5u, 17u, 64u, 100u}) {
    const auto t = build_psu_tree(P, AggregationMode::bypass, 4);
    std::vector<FilteredBlock> blocks;
    for (std::size_t p = 0; p < P; ++p) blocks.push_back({{cplx(static_cast<double>(p))}, {}});
    const auto out = aggregate_tree(t, blocks, 1);
    ASSERT_EQ(out.values.size(), P);
    for (std::size_t p = 0; p < P; ++p) EXPECT_EQ(out.values[p], cplx(static_cast<double>(p)));
  }
  EXPECT_THROW(aggregate_tree(build_psu_tree(3, AggregationMode::bypass), {}, 1), DimensionError);
}

TEST(EffectiveChannelTest, SinglePanelMatchedFilter) {
  Rng rng(53);
  const auto h = test::random_matrix(rng, 6, 3);
  PanelEqualizer eq;
  eq.W = h.adjoint();
  eq.selected_users = {0, 1, 2};
  const auto eff = effective_channel({eq}, {h}, AggregationMode::combine);
  const auto hh = gram(h);
  EXPECT_LT(test::max_abs_diff(eff.G, hh), 1e-12);
  EXPECT_LT(test::max_abs_diff(eff.dense_C(), hh), 1e-12);
}

TEST(EffectiveChannelTest, IicBypassHasIdentityNoise) {
  const auto d = test::make_drop(test::small_config(0.3, 5, 3, 2));
  const auto chain = iic_chain(d.slices, 3, IICState::identity(5), d.surface.panel_order);
  const auto eff = effective_channel(chain.equalizers, d.slices, AggregationMode::bypass);
  EXPECT_EQ(eff.dim(), 3u * d.surface.P);
  EXPECT_LT(test::max_abs_diff(eff.dense_C(), ComplexMatrix::identity(eff.dim())), 1e-9);
  EXPECT_THROW(effective_channel(chain.equalizers, d.slices, AggregationMode::combine), ConfigError);
}

TEST(EffectiveChannelTest, TwoPanelDenseAssembly) {
  Rng rng(54);
  const std::vector<ComplexMatrix> slices{test::random_matrix(rng, 5, 4), test::random_matrix(rng, 5, 4)};
  const auto eqs = test::rmf_all(slices, 2);
  // Bypass: stacked G, block-diagonal C.
  const auto by = effective_channel(eqs, slices, AggregationMode::bypass);
  EMat g(4, 4), w = EMat::Zero(4, 10);
  g << test::to_eigen(multiply(eqs[0].W, slices[0])), test::to_eigen(multiply(eqs[1].W, slices[1]));
  w.block(0, 0, 2, 5) = test::to_eigen(eqs[0].W);
  w.block(2, 5, 2, 5) = test::to_eigen(eqs[1].W);
  EXPECT_LT((test::to_eigen(by.G) - g).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((test::to_eigen(by.dense_C()) - w * w.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
  // Combine: embed with selection matrices.
  const auto co = effective_channel(eqs, slices, AggregationMode::combine);
  EMat gc = EMat::Zero(4, 4), cc = EMat::Zero(4, 4);
  for (int i = 0; i < 2; ++i) {
    EMat s = EMat::Zero(4, 2);
    for (std::size_t r = 0; r < 2; ++r) s(eqs[i].selected_users[r], r) = 1.0;
    const EMat wi = test::to_eigen(eqs[i].W);
    gc += s * wi * test::to_eigen(slices[i]);
    cc += s * wi * wi.adjoint() * s.transpose();
  }
  EXPECT_LT((test::to_eigen(co.G) - gc).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((test::to_eigen(co.dense_C()) - cc).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EffectiveChannelTest, ShapeErrors) {
  Rng rng(55);
  const std::vector<ComplexMatrix> slices{test::random_matrix(rng, 5, 4)};
  auto eqs = test::rmf_all(slices, 2);
  EXPECT_THROW(effective_channel(eqs, {}, AggregationMode::bypass), DimensionError);
  const std::vector<ComplexMatrix> wrong{test::random_matrix(rng, 6, 4)};
  EXPECT_THROW(effective_channel(eqs, wrong, AggregationMode::bypass), DimensionError);
}

TEST(SumRate, ScalarSingleUser) {
  // M = 4, K = 1, ||h||^2 = 4 after normalization; full MF.
  const auto h = ComplexMatrix::from_rows({{1}, {cplx(0, 1)}, {-1}, {cplx(0, -1)}});
  const auto eff = effective_channel({rmf_formulate(h, 1)}, {h}, AggregationMode::combine);
  EXPECT_NEAR(sum_rate(eff, 1.0), std::log2(5.0), 1e-12);
  EXPECT_NEAR(sum_rate(eff, 1.0), 2.3219, 1e-4);
}

TEST(SumRate, VanishesAtLowSnr) {
  Rng rng(56);
  const auto h = test::random_matrix(rng, 8, 3);
  const auto eff = effective_channel({rmf_formulate(h, 3)}, {h}, AggregationMode::combine);
  EXPECT_LT(sum_rate(eff, 1e-12), 1e-9);
  EXPECT_THROW(sum_rate(eff, 0.0), ConfigError);
}

TEST(SumRate, MatchesDenseOracle) {
  Rng rng(57);
  for (int t = 0; t < 10; ++t) {
    const std::vector<ComplexMatrix> slices{test::random_matrix(rng, 6, 4), test::random_matrix(rng, 6, 4),
                                            test::random_matrix(rng, 6, 4)};
    for (auto mode : {AggregationMode::combine, AggregationMode::bypass}) {
      const auto eff = effective_channel(test::rmf_all(slices, 2), slices, mode);
      const double want = test::oracle_rate(test::to_eigen(eff.G), test::to_eigen(eff.dense_C()), 2.0);
      EXPECT_NEAR(sum_rate(eff, 2.0), want, 1e-9 * want);
    }
  }
}

TEST(SumRate, RegularizesDuplicateSelections) {
  // Both panels see the same single strong user; bypass C is rank one per block.
  Rng rng(58);
  auto h = test::random_matrix(rng, 4, 2);
  const auto eqs = test::rmf_all({h, h}, 1);
  const auto eff = effective_channel(eqs, {h, h}, AggregationMode::bypass);
  const double r = sum_rate(eff, 1.0);
  EXPECT_TRUE(std::isfinite(r));
  EXPECT_LE(r, centralized_rate(h, 2.0) + 1e-6);
}

TEST(SumRate, NeverExceedsCentralized) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto d = test::make_drop(test::small_config(0.2, 6, 2, seed));
    const double bound = centralized_rate(d.channel.H, 1.0);
    const auto rmf = effective_channel(test::rmf_all(d.slices, 2), d.slices, AggregationMode::combine);
    const auto iic = iic_chain(d.slices, 2, IICState::identity(6), d.surface.panel_order);
    EXPECT_LE(sum_rate(rmf, 1.0), bound + 1e-6);
    EXPECT_LE(sum_rate(effective_channel(iic.equalizers, d.slices, AggregationMode::bypass), 1.0), bound + 1e-6);
    EXPECT_NEAR(bound, test::oracle_centralized(d.channel.H, 1.0), 1e-9 * bound);
  }
}

TEST(Ser, NoiselessIsErrorFree) {
  Rng rng(59);
  const auto h = test::random_matrix(rng, 16, 3);
  const auto eff = effective_channel({rmf_formulate(h, 3)}, {h}, AggregationMode::combine);
  EXPECT_EQ(detect_and_ser(eff, 1e12, 2000, 1), 0.0);
}

TEST(Ser, VanishingSnrIsRandomGuess) {
  Rng rng(60);
  const auto h = test::random_matrix(rng, 16, 3);
  const auto eff = effective_channel({rmf_formulate(h, 3)}, {h}, AggregationMode::combine);
  const double ser = detect_and_ser(eff, 1e-10, 20000, 2);
  EXPECT_NEAR(ser, 0.75, 4.0 * std::sqrt(0.75 * 0.25 / 60000.0));
}

TEST(Ser, SingleUserMatchesQFunction) {
  const auto h = ComplexMatrix::from_rows({{1}, {cplx(0.5, 0.5)}});  // ||h||^2 = 1.5
  const auto eff = effective_channel({rmf_formulate(h, 1)}, {h}, AggregationMode::combine);
  for (double rho : {0.5, 1.0, 2.0}) {
    const double q = 0.5 * std::erfc(std::sqrt(rho * 1.5) / std::sqrt(2.0));
    const double want = 1.0 - (1.0 - q) * (1.0 - q);
    const std::size_t n = 40000;
    const double ser = detect_and_ser(eff, rho, n, 3);
    EXPECT_NEAR(ser, want, 4.0 * std::sqrt(want * (1 - want) / n)) << "rho " << rho;
  }
}

TEST(Ser, RejectsBadArguments) {
  const auto h = ComplexMatrix::from_rows({{1}});
  const auto eff = effective_channel({rmf_formulate(h, 1)}, {h}, AggregationMode::combine);
  EXPECT_THROW(detect_and_ser(eff, 1.0, 0, 1), ConfigError);
  EXPECT_THROW(detect_and_ser(eff, -1.0, 10, 1), ConfigError);
}
