#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fixtures.hpp"
#include "stableperm/analytics.hpp"
#include "stableperm/oracle.hpp"

using namespace stableperm;
using namespace stableperm::fixtures;

namespace {

std::vector<Permutation> derangements(int n) {
  std::vector<Permutation> out;
  std::vector<int> succ(n);
  std::iota(succ.begin(), succ.end(), 0);
  do {
    Permutation p(succ);
    if (!p.has_fixed_point()) out.push_back(std::move(p));
  } while (std::next_permutation(succ.begin(), succ.end()));
  return out;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double d : v) out(k++) = d;
  return out;
}

const IntegrandOptions kPublished{IntegrandForm::AsPublished, OrientationFilter::Both};

}  // namespace

TEST(PairSets, TwoTranspositions) {
  const auto s = pair_sets(cycle({2, 1, 4, 3}));
  EXPECT_EQ(s.e1_size(), 8u);
  EXPECT_EQ(s.e1_star, (std::vector<OrderedPair>{{0, 2}, {0, 3}, {1, 2}, {1, 3}}));
  EXPECT_TRUE(s.e2.empty());
}

TEST(PairSets, ThreeCycle) {
  const auto s = pair_sets(cycle({2, 3, 1}));
  EXPECT_TRUE(s.e1_star.empty());
  EXPECT_EQ(s.e2.size(), 3u);
  for (const auto& [i, j] : s.e2) EXPECT_EQ(j, cycle({2, 3, 1})(i));
}

TEST(PairSets, SinglePairAndFixedPoint) {
  const auto s = pair_sets(cycle({2, 1}));
  EXPECT_TRUE(s.e1_star.empty());
  EXPECT_TRUE(s.e2.empty());
  EXPECT_THROW(pair_sets(cycle({2, 1, 3})), ValidationError);
}

TEST(PairSets, MembershipAndPartnerInvolution) {
  for (int n = 2; n <= 8; ++n) {
    for (const auto& p : derangements(n)) {
      const auto s = pair_sets(p);
      const auto cycles = cycle_decomposition(p);
      std::vector<char> in_c2(n);
      for (int a : cycles.two_cycle_agents) in_c2[a] = 1;

      std::set<std::pair<int, int>> e1;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i != j && i != p(j) && in_c2[i] && in_c2[j]) e1.insert({i, j});
        }
      }
      std::set<std::pair<int, int>> star, e2;
      for (const auto& [i, j] : s.e1_star) {
        ASSERT_TRUE(e1.count({i, j}));
        EXPECT_LT(i, p(j));
        star.insert({i, j});
      }
      for (const auto& [i, j] : s.e2) {
        EXPECT_TRUE(i != j && i != p(j));
        EXPECT_TRUE(!in_c2[i] || !in_c2[j]);
        e2.insert({i, j});
      }
      EXPECT_EQ(star.size(), s.e1_star.size());
      EXPECT_EQ(s.e1_size(), e1.size());

      // (i, j) -> (p(j), p(i)) maps e1_star onto E1 \ e1_star and is an involution on E1.
      std::set<std::pair<int, int>> image;
      for (const auto& [i, j] : star) {
        const std::pair<int, int> partner{p(j), p(i)};
        ASSERT_TRUE(e1.count(partner));
        EXPECT_FALSE(star.count(partner));
        EXPECT_EQ((std::pair<int, int>{p(partner.second), p(partner.first)}),
                  (std::pair<int, int>{i, j}));
        image.insert(partner);
      }
      EXPECT_EQ(image.size() + star.size(), e1.size());
    }
  }
}

TEST(ConditionalProbability, PublishedExamples) {
  EXPECT_EQ(conditional_stable_probability<double>(cycle({2, 1}), vec({0.3, 0.9}), vec({}),
                                                   kPublished),
            1.0);
  const auto three = cycle({2, 3, 1});
  EXPECT_EQ(conditional_stable_probability<double>(three, vec({0.5, 0.5, 0.5}),
                                                   vec({0.2, 0.8, 0.2}), kPublished),
            0.0);
  EXPECT_NEAR(conditional_stable_probability<double>(three, vec({0.5, 0.5, 0.5}),
                                                     vec({0.8, 0.8, 0.8}), kPublished),
              0.216, 1e-15);
}

TEST(ConditionalProbability, ExactForm) {
  const auto three = cycle({2, 3, 1});
  // Every pair of a 3-cycle is determined by (x, y): admissible points are stable surely.
  EXPECT_EQ(conditional_stable_probability<double>(three, vec({0.5, 0.5, 0.5}),
                                                   vec({0.8, 0.8, 0.8})),
            1.0);
  EXPECT_EQ(conditional_stable_probability<double>(three, vec({0.5, 0.5, 0.5}),
                                                   vec({0.2, 0.8, 0.2})),
            0.0);
  EXPECT_EQ(conditional_stable_probability<double>(cycle({2, 1}), vec({0.1, 0.7}), vec({})), 1.0);
}

TEST(ConditionalProbability, FormsAgreeWithoutLongCycles) {
  Rng rng(4);
  const auto p = cycle({2, 1, 4, 3, 6, 5});
  Eigen::VectorXd x(6), y(0);
  for (int t = 0; t < 1000; ++t) {
    for (int k = 0; k < 6; ++k) x(k) = rng.uniform01();
    // Pairs of 2-cycles share uniforms with their partners, but the partner
    // thresholds coincide, so the couple factor equals the published product.
    EXPECT_NEAR(conditional_stable_probability<double>(p, x, y),
                conditional_stable_probability<double>(p, x, y, kPublished), 1e-13);
  }
}

TEST(ConditionalProbability, TiesAreInadmissible) {
  EXPECT_EQ(conditional_stable_probability<double>(cycle({2, 3, 1}), vec({0.5, 0.5, 0.5}),
                                                   vec({0.8, 0.5, 0.8})),
            0.0);
}

TEST(ConditionalProbability, ForwardOnlyFilter) {
  const IntegrandOptions forward{IntegrandForm::Exact, OrientationFilter::ForwardOnly};
  const auto three = cycle({2, 3, 1});
  EXPECT_EQ(conditional_stable_probability<double>(three, vec({0.5, 0.5, 0.5}),
                                                   vec({0.8, 0.8, 0.8}), forward),
            1.0);
  EXPECT_EQ(conditional_stable_probability<double>(three, vec({0.5, 0.5, 0.5}),
                                                   vec({0.2, 0.2, 0.2}), forward),
            0.0);
}

TEST(ConditionalProbability, Validation) {
  const auto three = cycle({2, 3, 1});
  EXPECT_THROW(conditional_stable_probability<double>(three, vec({0.5, 0.5}), vec({0.1, 0.1, 0.1})),
               ValidationError);
  EXPECT_THROW(conditional_stable_probability<double>(three, vec({0.5, 0.5, 0.5}), vec({0.1})),
               ValidationError);
  EXPECT_THROW(conditional_stable_probability<double>(three, vec({0.5, 1.5, 0.5}),
                                                      vec({0.1, 0.1, 0.1})),
               ValidationError);
  EXPECT_THROW(conditional_stable_probability<double>(cycle({2, 1, 3}), vec({0.5, 0.5, 0.5}), vec({})),
               ValidationError);
}

TEST(JointRankPolynomial, Examples) {
  const auto pair = joint_rank_polynomial<double>(cycle({2, 1}), vec({0.4, 0.6}), vec({}));
  ASSERT_EQ(pair.coeffs.rows(), 1);
  EXPECT_EQ(pair.coeffs(0, 0), 1.0);

  const auto published = joint_rank_polynomial<double>(
      cycle({2, 3, 1}), vec({0.5, 0.5, 0.5}), vec({0.8, 0.8, 0.8}), kPublished);
  EXPECT_NEAR(published.coeffs(0, 0), 0.001, 1e-15);
  EXPECT_NEAR(published.sum(), 0.216, 1e-15);
  EXPECT_TRUE((published.coeffs.array() >= 0).all());

  // Exact form: forward orientation puts all mass on R_s = 3, R_p = 6.
  const auto exact = joint_rank_polynomial<double>(cycle({2, 3, 1}), vec({0.5, 0.5, 0.5}),
                                                   vec({0.8, 0.8, 0.8}));
  EXPECT_EQ(exact.coeffs(0, 3), 1.0);
  EXPECT_EQ(exact.sum(), 1.0);
}

TEST(JointRankPolynomial, CollapsesToConditionalProbability) {
  Rng rng(6);
  for (int t = 0; t < 10000; ++t) {
    const int n = 2 + static_cast<int>(rng.below(5));
    std::vector<int> succ(n);
    std::iota(succ.begin(), succ.end(), 0);
    for (int k = n - 1; k > 0; --k) std::swap(succ[k], succ[rng.below(k + 1)]);
    Permutation p(succ);
    if (p.has_fixed_point()) continue;
    const StabilityIntegrand<double> exact(p);
    const StabilityIntegrand<double> published(p, kPublished);
    Eigen::VectorXd x(n), y(exact.y_size());
    for (int k = 0; k < n; ++k) x(k) = rng.uniform01();
    for (int k = 0; k < y.size(); ++k) y(k) = rng.uniform01();
    for (const auto* integrand : {&exact, &published}) {
      const auto poly = integrand->rank_polynomial(x, y);
      EXPECT_NEAR(poly.evaluate(1.0, 1.0), integrand->probability(x, y), 1e-12);
      EXPECT_NEAR(poly.sum(), integrand->probability(x, y), 1e-12);
      EXPECT_TRUE((poly.coeffs.array() >= -1e-15).all());
    }
  }
}

TEST(JointRankPolynomial, PairCap) {
  // Three 3-cycles and a 2-cycle on 11 agents: far more than 64 pairs.
  const auto p = parse_cycle_spec("(1 2 3)(4 5 6)(7 8 9)(10 11)", 11);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(11, 0.5);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(9, 0.7);
  EXPECT_THROW(joint_rank_polynomial<double>(p, x, y), CapExceeded);
  EXPECT_NO_THROW(conditional_stable_probability<double>(p, x, y));
}

TEST(MonteCarlo, SinglePairIsCertain) {
  const auto est = mc_stable_probability(cycle({2, 1}), 1000, Rng(1));
  EXPECT_EQ(est.mean, 1.0);
  EXPECT_EQ(est.std_error, 0.0);
  EXPECT_EQ(est.samples, 1000u);

  const auto dist = mc_rank_distribution(cycle({2, 1}), 1000, Rng(1));
  EXPECT_EQ(dist.at(2, 2).mean, 1.0);
  EXPECT_EQ(dist.mean.sum(), 1.0);
}

TEST(MonteCarlo, RejectsTooFewSamples) {
  EXPECT_THROW(mc_stable_probability(cycle({2, 1}), 999, Rng(1)), ValidationError);
  EXPECT_THROW(mc_rank_distribution(cycle({2, 1}), 10, Rng(1)), ValidationError);
  EXPECT_THROW(mc_stable_probability(cycle({2, 1, 3}), 1000, Rng(1)), ValidationError);
}

TEST(MonteCarlo, ThreeCycle) {
  const auto p = cycle({2, 3, 1});
  const auto est = mc_stable_probability(p, 1'000'000, Rng(2));
  EXPECT_LT(std::abs(est.mean - 0.25), 3 * est.std_error);

  const auto dist = mc_rank_distribution(p, 1'000'000, Rng(3));
  for (auto [k, l] : {std::pair{3, 6}, std::pair{6, 3}}) {
    const auto cell = dist.at(k, l);
    EXPECT_LT(std::abs(cell.mean - 0.125), 3 * cell.std_error);
  }
  // All other cells carry no mass.
  EXPECT_NEAR(dist.at(3, 6).mean + dist.at(6, 3).mean, dist.mean.sum(), 1e-12);
}

TEST(MonteCarlo, PublishedFormUnderestimatesThreeCycle) {
  McOptions options;
  options.integrand = kPublished;
  const auto est = mc_stable_probability(cycle({2, 3, 1}), 200'000, Rng(4), options);
  EXPECT_LT(est.mean + 10 * est.std_error, 0.25);
}

TEST(MonteCarlo, TwoTranspositions) {
  const auto p = cycle({2, 1, 4, 3});
  const double exact = enumerate_profiles(4, p).to_double();
  const auto est = mc_stable_probability(p, 1'000'000, Rng(5));
  EXPECT_LT(std::abs(est.mean - exact), 3 * est.std_error);
}

TEST(MonteCarlo, AgreesWithOracleAtThreeAndFour) {
  for (int n = 3; n <= 4; ++n) {
    for (const auto& p : derangements(n)) {
      const auto est = mc_stable_probability(p, 200'000, Rng(derive_seed(6, n)));
      const double exact = enumerate_profiles(n, p).to_double();
      EXPECT_LT(std::abs(est.mean - exact), 4 * est.std_error) << format_cycles(p);

      const auto dist = mc_rank_distribution(p, 200'000, Rng(derive_seed(7, n)));
      const auto table = exact_rank_distribution(n, p);
      for (Eigen::Index a = 0; a < dist.mean.rows(); ++a) {
        for (Eigen::Index b = 0; b < dist.mean.cols(); ++b) {
          const auto it = table.find({n + a, n + b});
          const double want = it == table.end() ? 0.0 : it->second.to_double();
          const auto cell = dist.at(n + a, n + b);
          EXPECT_LE(std::abs(cell.mean - want), 4 * cell.std_error + 1e-15)
              << format_cycles(p) << " cell " << n + a << "," << n + b;
        }
      }
      EXPECT_LT(std::abs(dist.mean.sum() - est.mean),
                4 * std::hypot(est.std_error, dist.std_error.maxCoeff() * dist.mean.size()));
    }
  }
}

TEST(MonteCarlo, InversionSymmetry) {
  for (const auto& p : derangements(4)) {
    const auto a = mc_stable_probability(p, 200'000, Rng(8));
    const auto b = mc_stable_probability(invert(p), 200'000, Rng(9));
    EXPECT_LT(std::abs(a.mean - b.mean), 4 * std::hypot(a.std_error, b.std_error));
  }
}

TEST(MonteCarlo, IndependentOfThreadCount) {
  const auto p = cycle({2, 3, 4, 1});
  McOptions one, three;
  three.threads = 3;
  const auto a = mc_stable_probability(p, 300'000, Rng(10), one);
  const auto b = mc_stable_probability(p, 300'000, Rng(10), three);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
  const auto c = mc_rank_distribution(p, 150'000, Rng(11), one);
  const auto d = mc_rank_distribution(p, 150'000, Rng(11), three);
  EXPECT_EQ(c.mean, d.mean);
  EXPECT_EQ(c.std_error, d.std_error);
}
