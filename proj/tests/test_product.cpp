#include <gtest/gtest.h>

#include <random>

#include "gcmc/product.hpp"
#include "oracles.hpp"

using namespace gcmc;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no gcmc::Error thrown";
  return ErrorCode::InvalidArgument;
}

Graph k2() { return build_graph({"x0", "x1"}, {{"x0", "x1"}}); }

}  // namespace

TEST(ProductDistribution, LexicographicTuples) {
  auto d = product_distribution({Distribution({"x0", "x1"}, {0.3, 0.7}), Distribution({"x0", "x1"}, {0.7, 0.3})});
  EXPECT_EQ(d.labels(), (std::vector<std::string>{"(x0,x0)", "(x0,x1)", "(x1,x0)", "(x1,x1)"}));
  std::vector<double> expect{0.21, 0.09, 0.49, 0.21};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(d[i], expect[i], 1e-15);
}

TEST(ProductSpec, JointObjectsMatchStrongProduct) {
  auto spec = build_product_spec({{Distribution({"x0", "x1"}, {0.3, 0.7}), k2(), std::nullopt},
                                  {Distribution({"x0", "x1"}, {0.7, 0.3}), k2(), std::nullopt}});
  EXPECT_EQ(spec.joint_size, 4u);
  ASSERT_TRUE(spec.joint_graph);
  EXPECT_EQ(*spec.joint_graph, strong_product(k2(), k2()));
  EXPECT_TRUE(spec.faithful);
}

TEST(ProductSpec, SplitFactorIsRejected) {
  auto split = build_graph({"a", "b"}, {});
  EXPECT_EQ(code_of([&] {
              build_product_spec({{Distribution({"x0", "x1"}, {0.3, 0.7}), k2(), std::nullopt},
                                  {Distribution({"a", "b"}, {0.5, 0.5}), split, std::nullopt}});
            }),
            ErrorCode::InfeasibleFactor);
  EXPECT_EQ(code_of([] { build_product_spec({}); }), ErrorCode::InvalidArgument);
}

TEST(RunProduct, TwoBernoulliFactors) {
  auto spec = build_product_spec({{Distribution({"x0", "x1"}, {0.3, 0.7}), k2(), std::nullopt},
                                  {Distribution({"x0", "x1"}, {0.7, 0.3}), k2(), std::nullopt}});
  auto r = run_product(spec, 1'000'000, 1, {1000, 1'000'000});
  ASSERT_TRUE(r.joint);
  EXPECT_LE(r.joint->final_tv(), 0.02);
  for (const auto& m : r.marginals) {
    EXPECT_LE(m.final_tv(), 0.01);
    EXPECT_EQ(m.consistency_violations, 0u);
  }
  EXPECT_EQ(r.joint_violations, 0u);
  EXPECT_LE(*r.factorization_defect, 0.02);
  ASSERT_EQ(r.joint->tv_trace.size(), 2u);
  EXPECT_DOUBLE_EQ(r.joint->tv_trace[1].second, r.joint->final_tv());
  EXPECT_EQ(r.joint->mode, PlanMode::Homogeneous);
}

TEST(RunProduct, MarginalsMatchStandaloneRuns) {
  auto path = build_graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
  Distribution d1({"x0", "x1"}, {0.4, 0.6}), d2({"a", "b", "c"}, {0.2, 0.3, 0.5});
  auto spec = build_product_spec({{d1, k2(), std::nullopt}, {d2, path, std::nullopt}});
  auto r = run_product(spec, 5000, 13);
  auto p2 = plan(d2, path);
  RunOptions o;
  o.substream = 2;
  EXPECT_EQ(run(p2, 5000, 13, o).visit_counts, r.marginals[1].visit_counts);
  // the joint counts project onto the marginal counts
  std::vector<std::uint64_t> proj(3, 0);
  for (std::size_t i = 0; i < r.joint->visit_counts.size(); ++i) proj[i % 3] += r.joint->visit_counts[i];
  EXPECT_EQ(proj, r.marginals[1].visit_counts);
}

TEST(RunProduct, RandomConnectedFactorsStayConsistent) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 10; ++t) {
    std::vector<ProductFactor> fs;
    const int r = 2 + int(rng() % 2);
    for (int h = 0; h < r; ++h) {
      int n = 2 + int(rng() % 3);
      auto g = oracle::to_graph(n, oracle::random_connected(n, 0.3, rng), "f" + std::to_string(h) + "_");
      fs.push_back({Distribution(g.labels(), oracle::random_positive(n, rng, 0.1)), g, std::nullopt});
    }
    auto spec = build_product_spec(fs);
    auto rep = run_product(spec, 200000, std::uint64_t(t));
    EXPECT_EQ(rep.joint_violations, 0u);
    EXPECT_LE(rep.joint->final_tv(), 0.05);
  }
}

TEST(RunProduct, SingleFactorIsThePlainChain) {
  auto spec = build_product_spec({{Distribution({"x0", "x1"}, {0.3, 0.7}), k2(), std::nullopt}});
  auto r = run_product(spec, 10000, 3);
  EXPECT_EQ(r.joint->visit_counts, r.marginals[0].visit_counts);
  EXPECT_DOUBLE_EQ(*r.factorization_defect, 0.0);
}

TEST(RunProduct, ScheduledFactorMarksJointNonHomogeneous) {
  auto path = build_graph({"s1", "s2", "s3", "s4"}, {{"s1", "s3"}, {"s3", "s4"}, {"s2", "s4"}});
  Distribution ends({"s1", "s2", "s3", "s4"}, {0.5, 0.5, 0.0, 0.0});
  ScheduleSpec sched{ScheduleKind::Practical, {std::nullopt, {100, 200, 400}}};
  auto spec = build_product_spec({{ends, path, sched}, {Distribution({"x0", "x1"}, {0.3, 0.7}), k2(), std::nullopt}});
  EXPECT_FALSE(spec.faithful);
  auto r = run_product(spec, 700, 1);
  EXPECT_EQ(r.joint->mode, PlanMode::NonHomogeneous);
  EXPECT_EQ(r.joint_violations, 0u);
  EXPECT_EQ(code_of([&] { run_product(spec, 701, 1); }), ErrorCode::ScheduleExhausted);
}
