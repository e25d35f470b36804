#pragma once

// Integral representation of P(p is stable) and of the joint law of the
// successor/predecessor ranks under uniform random preferences.
//
// Conditioning on x_i = X_{i,p(i)} (every agent's score of its successor) and
// y_j = X_{p(j),j} for j on cycles of length >= 3 leaves, for each ordered pair
// (i, j) with i not in {j, p(j)}, the failure event
//     X_{i,p(j)} < x_i  and  X_{p(j),i} < z_j,
// z_j = y_j on long cycles and x_{p(j)} on 2-cycles.
//
// Two integrands are offered:
//
//  * IntegrandForm::AsPublished multiplies (1 - x_i z_j) over E1* u E2 and,
//    for the rank polynomial, (xb_i zb_j + xi x_i zb_j + eta xb_i z_j).
//  * IntegrandForm::Exact accounts for the fact that the events of (i, j) and
//    of its partner (p(j), p^-1(i)) read the same two uniforms, and that the
//    pairs (i, p^-2(i)) on long cycles are fully determined by (x, y). The two
//    forms agree on stability probabilities of permutations made of 2-cycles;
//    with a long cycle only the exact form integrates to P(p is stable).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>

#include "stableperm/core.hpp"

namespace stableperm {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

struct OrderedPair {
  int i = 0;
  int j = 0;

  friend bool operator==(const OrderedPair&, const OrderedPair&) = default;
};

struct PairSets {
  std::vector<OrderedPair> e1_star;  // both ends on 2-cycles, i < p(j)
  std::vector<OrderedPair> e2;       // at least one end on a cycle of length >= 3

  std::size_t e1_size() const noexcept { return 2 * e1_star.size(); }
};

/// Lexicographically ordered pair sets of a fixed-point-free permutation.
PairSets pair_sets(const Permutation& p);

enum class IntegrandForm { Exact, AsPublished };

/// Admissible (x, y) have a uniform orientation on every long cycle.
/// ForwardOnly keeps only y_j > x_{p(j)} (every agent prefers its successor).
enum class OrientationFilter { Both, ForwardOnly };

struct IntegrandOptions {
  IntegrandForm form = IntegrandForm::Exact;
  OrientationFilter orientation = OrientationFilter::Both;
};

/// Polynomial capacity guard for joint_rank_polynomial: |E1* u E2| <= 64.
inline constexpr std::size_t kMaxPolynomialPairs = 64;

/// Pair bookkeeping shared by every evaluation of one permutation.
struct IntegrandPlan {
  struct Couple {
    OrderedPair first;
    OrderedPair second;  // (p(j), p^-1(i)): reads the same two uniforms
  };

  int n = 0;
  std::vector<int> successor;
  std::vector<int> predecessor;
  std::vector<int> y_index;  // agent -> slot in y, or -1 off long cycles
  int y_count = 0;
  std::vector<std::vector<int>> long_cycles;
  std::vector<OrderedPair> published;  // E1* then E2
  std::vector<Couple> couples;
  std::vector<int> determined;  // agents i on long cycles; pair (i, p^-2(i))

  int y_size() const noexcept { return y_count; }
  std::size_t ordered_pairs() const noexcept { return 2 * couples.size() + determined.size(); }
};

IntegrandPlan make_integrand_plan(const Permutation& p);

/// Coefficients of a polynomial in (xi, eta): coeffs(a, b) = [xi^a eta^b].
template <typename Scalar>
struct RankPolynomial {
  MatrixX<Scalar> coeffs;

  Scalar sum() const { return coeffs.sum(); }

  Scalar evaluate(Scalar xi, Scalar eta) const {
    Scalar total(0);
    Scalar xi_pow(1);
    for (Eigen::Index a = 0; a < coeffs.rows(); ++a, xi_pow *= xi) {
      Scalar eta_pow(1);
      for (Eigen::Index b = 0; b < coeffs.cols(); ++b, eta_pow *= eta) {
        total += coeffs(a, b) * xi_pow * eta_pow;
      }
    }
    return total;
  }
};

namespace detail {

// Multiplies `acc` (valid up to degrees deg_xi, deg_eta) by a polynomial of
// degree <= 2 in each variable, in place.
template <typename Scalar>
void multiply_small(MatrixX<Scalar>& acc, Eigen::Index& deg_xi, Eigen::Index& deg_eta,
                    const std::array<std::array<Scalar, 3>, 3>& factor, Eigen::Index fdeg_xi,
                    Eigen::Index fdeg_eta) {
  MatrixX<Scalar> next = MatrixX<Scalar>::Zero(acc.rows(), acc.cols());
  for (Eigen::Index a = 0; a <= deg_xi; ++a) {
    for (Eigen::Index b = 0; b <= deg_eta; ++b) {
      const Scalar c = acc(a, b);
      if (c == Scalar(0)) continue;
      for (Eigen::Index fa = 0; fa <= fdeg_xi; ++fa) {
        for (Eigen::Index fb = 0; fb <= fdeg_eta; ++fb) {
          const Scalar f = factor[fa][fb];
          if (f != Scalar(0)) next(a + fa, b + fb) += c * f;
        }
      }
    }
  }
  acc.swap(next);
  deg_xi += fdeg_xi;
  deg_eta += fdeg_eta;
}

}  // namespace detail

/// Integrand of the stability probability and of the joint rank generating
/// function for one fixed-point-free permutation.
template <typename Scalar>
class StabilityIntegrand {
 public:
  explicit StabilityIntegrand(const Permutation& p, IntegrandOptions options = {})
      : plan_(make_integrand_plan(p)), options_(options) {}

  int n() const noexcept { return plan_.n; }
  int y_size() const noexcept { return plan_.y_size(); }
  const IntegrandPlan& plan() const noexcept { return plan_; }
  IntegrandOptions options() const noexcept { return options_; }

  /// Largest exponent of xi (and of eta) the rank polynomial can carry.
  Eigen::Index max_degree() const noexcept {
    return static_cast<Eigen::Index>(options_.form == IntegrandForm::Exact
                                         ? plan_.ordered_pairs()
                                         : plan_.published.size());
  }

  /// Throws ValidationError on wrong sizes or values outside [0, 1].
  void validate(const Eigen::Ref<const VectorX<Scalar>>& x,
                const Eigen::Ref<const VectorX<Scalar>>& y) const {
    if (x.size() != plan_.n) {
      throw ValidationError("x must have " + std::to_string(plan_.n) + " entries, got " +
                            std::to_string(x.size()));
    }
    if (y.size() != plan_.y_size()) {
      throw ValidationError("y must have one entry per agent on a cycle of length >= 3 (" +
                            std::to_string(plan_.y_size()) + "), got " + std::to_string(y.size()));
    }
    auto in_unit = [](const auto& v) {
      return v.size() == 0 || ((v.array() >= Scalar(0)).all() && (v.array() <= Scalar(1)).all());
    };
    if (!in_unit(x) || !in_unit(y)) throw ValidationError("x and y must lie in [0, 1]");
  }

  /// Uniform orientation on every long cycle; ties are inadmissible.
  bool admissible(const Eigen::Ref<const VectorX<Scalar>>& x,
                  const Eigen::Ref<const VectorX<Scalar>>& y) const {
    for (const auto& cycle : plan_.long_cycles) {
      bool below = false;
      bool above = false;
      for (int j : cycle) {
        const Scalar yj = y(plan_.y_index[j]);
        const Scalar target = x(plan_.successor[j]);
        if (yj < target) {
          below = true;
        } else if (yj > target) {
          above = true;
        } else {
          return false;
        }
      }
      if (below && above) return false;
      if (below && options_.orientation == OrientationFilter::ForwardOnly) return false;
    }
    return true;
  }

  Scalar probability(const Eigen::Ref<const VectorX<Scalar>>& x,
                     const Eigen::Ref<const VectorX<Scalar>>& y) const {
    validate(x, y);
    return probability_unchecked(x, y);
  }

  Scalar probability_unchecked(const Eigen::Ref<const VectorX<Scalar>>& x,
                               const Eigen::Ref<const VectorX<Scalar>>& y) const {
    if (!admissible(x, y)) return Scalar(0);
    Scalar value(1);
    if (options_.form == IntegrandForm::AsPublished) {
      for (const auto& [i, j] : plan_.published) value *= Scalar(1) - x(i) * z(j, x, y);
      return value;
    }
    for (const auto& couple : plan_.couples) {
      const auto [a, b, c, d] = thresholds(couple, x, y);
      value *= Scalar(1) - a * b - c * d + std::min(a, c) * std::min(b, d);
    }
    return value;  // determined pairs never fail on admissible (x, y)
  }

  RankPolynomial<Scalar> rank_polynomial(const Eigen::Ref<const VectorX<Scalar>>& x,
                                         const Eigen::Ref<const VectorX<Scalar>>& y) const {
    validate(x, y);
    if (plan_.published.size() > kMaxPolynomialPairs) {
      throw CapExceeded("joint rank polynomial is capped at " +
                        std::to_string(kMaxPolynomialPairs) + " pairs, permutation has " +
                        std::to_string(plan_.published.size()));
    }
    return rank_polynomial_unchecked(x, y);
  }

  RankPolynomial<Scalar> rank_polynomial_unchecked(const Eigen::Ref<const VectorX<Scalar>>& x,
                                                   const Eigen::Ref<const VectorX<Scalar>>& y) const {
    const Eigen::Index dim = max_degree() + 1;
    RankPolynomial<Scalar> poly{MatrixX<Scalar>::Zero(dim, dim)};
    if (!admissible(x, y)) return poly;
    poly.coeffs(0, 0) = Scalar(1);
    Eigen::Index deg_xi = 0;
    Eigen::Index deg_eta = 0;

    if (options_.form == IntegrandForm::AsPublished) {
      for (const auto& [i, j] : plan_.published) {
        const Scalar xi_ = x(i);
        const Scalar zj = z(j, x, y);
        std::array<std::array<Scalar, 3>, 3> f{};
        f[0][0] = (Scalar(1) - xi_) * (Scalar(1) - zj);
        f[1][0] = xi_ * (Scalar(1) - zj);
        f[0][1] = (Scalar(1) - xi_) * zj;
        detail::multiply_small(poly.coeffs, deg_xi, deg_eta, f, 1, 1);
      }
      return poly;
    }

    for (const auto& couple : plan_.couples) {
      detail::multiply_small(poly.coeffs, deg_xi, deg_eta, couple_factor(couple, x, y), 2, 2);
    }
    // Each determined pair contributes a single monomial; shift instead of multiplying.
    Eigen::Index shift_xi = 0;
    Eigen::Index shift_eta = 0;
    for (int i : plan_.determined) {
      const int pred = plan_.predecessor[i];
      const int pred2 = plan_.predecessor[pred];
      if (y(plan_.y_index[pred]) < x(i)) ++shift_xi;
      if (x(pred) < y(plan_.y_index[pred2])) ++shift_eta;
    }
    if (shift_xi || shift_eta) {
      MatrixX<Scalar> shifted = MatrixX<Scalar>::Zero(dim, dim);
      shifted.block(shift_xi, shift_eta, deg_xi + 1, deg_eta + 1) =
          poly.coeffs.block(0, 0, deg_xi + 1, deg_eta + 1);
      poly.coeffs.swap(shifted);
    }
    return poly;
  }

 private:
  Scalar z(int j, const Eigen::Ref<const VectorX<Scalar>>& x,
           const Eigen::Ref<const VectorX<Scalar>>& y) const {
    const int slot = plan_.y_index[j];
    return slot >= 0 ? y(slot) : x(plan_.successor[j]);
  }

  // (a, b) are the failure thresholds of the first pair on (U, V) and (c, d)
  // those of the partner, where U = X_{i,p(j)}, V = X_{p(j),i}:
  //   first fails  iff U < a and V < b,
  //   second fails iff U < c and V < d.
  std::array<Scalar, 4> thresholds(const IntegrandPlan::Couple& couple,
                                   const Eigen::Ref<const VectorX<Scalar>>& x,
                                   const Eigen::Ref<const VectorX<Scalar>>& y) const {
    const auto [i, j] = couple.first;
    const auto [i2, j2] = couple.second;
    return {x(i), z(j, x, y), z(j2, x, y), x(i2)};
  }

  // Integrates xi^{[U<a] + [V<d]} eta^{[V<b] + [U<c]} over the stable part of
  // the unit square, cell by cell between the thresholds.
  std::array<std::array<Scalar, 3>, 3> couple_factor(const IntegrandPlan::Couple& couple,
                                                     const Eigen::Ref<const VectorX<Scalar>>& x,
                                                     const Eigen::Ref<const VectorX<Scalar>>& y) const {
    const auto [a, b, c, d] = thresholds(couple, x, y);
    const std::array<Scalar, 4> u_cuts{Scalar(0), std::min(a, c), std::max(a, c), Scalar(1)};
    const std::array<Scalar, 4> v_cuts{Scalar(0), std::min(b, d), std::max(b, d), Scalar(1)};
    std::array<std::array<Scalar, 3>, 3> f{};
    for (int cu = 0; cu < 3; ++cu) {
      const Scalar du = u_cuts[cu + 1] - u_cuts[cu];
      if (du <= Scalar(0)) continue;
      const bool u_below_a = u_cuts[cu + 1] <= a;
      const bool u_below_c = u_cuts[cu + 1] <= c;
      for (int cv = 0; cv < 3; ++cv) {
        const Scalar dv = v_cuts[cv + 1] - v_cuts[cv];
        if (dv <= Scalar(0)) continue;
        const bool v_below_b = v_cuts[cv + 1] <= b;
        const bool v_below_d = v_cuts[cv + 1] <= d;
        if ((u_below_a && v_below_b) || (u_below_c && v_below_d)) continue;
        f[u_below_a + v_below_d][v_below_b + u_below_c] += du * dv;
      }
    }
    return f;
  }

  IntegrandPlan plan_;
  IntegrandOptions options_;
};

/// P(p stable | x, y). y holds one value per agent on a long cycle, in
/// increasing agent order.
template <typename Scalar>
Scalar conditional_stable_probability(const Permutation& p,
                                      const Eigen::Ref<const VectorX<Scalar>>& x,
                                      const Eigen::Ref<const VectorX<Scalar>>& y,
                                      IntegrandOptions options = {}) {
  return StabilityIntegrand<Scalar>(p, options).probability(x, y);
}

template <typename Scalar>
RankPolynomial<Scalar> joint_rank_polynomial(const Permutation& p,
                                             const Eigen::Ref<const VectorX<Scalar>>& x,
                                             const Eigen::Ref<const VectorX<Scalar>>& y,
                                             IntegrandOptions options = {}) {
  return StabilityIntegrand<Scalar>(p, options).rank_polynomial(x, y);
}

// ---------------------------------------------------------------------------
// Monte Carlo integration over the unit cube.

struct McEstimate {
  double mean = 0;
  double std_error = 0;
  std::uint64_t samples = 0;
};

/// Estimates of P(p stable, R_s = n + a, R_p = n + b) in cell (a, b).
struct RankDistributionEstimate {
  int n = 0;
  Eigen::MatrixXd mean;
  Eigen::MatrixXd std_error;
  std::uint64_t samples = 0;

  /// Cell for R_s = k, R_p = l, or zeros outside the table.
  McEstimate at(long long k, long long l) const {
    const long long a = k - n;
    const long long b = l - n;
    if (a < 0 || b < 0 || a >= mean.rows() || b >= mean.cols()) return {0, 0, samples};
    return {mean(a, b), std_error(a, b), samples};
  }
};

struct McOptions {
  IntegrandOptions integrand;
  unsigned threads = 1;  // results do not depend on this
};

inline constexpr std::uint64_t kMinMcSamples = 1000;
inline constexpr std::uint64_t kMcBlockSize = 1 << 16;

namespace detail {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(long double v) {
    const long double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  long double value() const { return sum_ + carry_; }

 private:
  long double sum_ = 0;
  long double carry_ = 0;
};

inline void check_samples(std::uint64_t samples) {
  if (samples < kMinMcSamples) {
    throw ValidationError("Monte Carlo needs at least " + std::to_string(kMinMcSamples) +
                          " samples, got " + std::to_string(samples));
  }
}

// Runs `body(block_index, count)` over fixed-size blocks,
// optionally on several threads. Block boundaries depend only on `samples`.
template <typename Body>
void for_each_block(std::uint64_t samples, unsigned threads, Body&& body) {
  const std::uint64_t blocks = (samples + kMcBlockSize - 1) / kMcBlockSize;
  auto run = [&](unsigned worker, unsigned workers) {
    for (std::uint64_t k = worker; k < blocks; k += workers) {
      const std::uint64_t first = k * kMcBlockSize;
      body(k, std::min(kMcBlockSize, samples - first));
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(blocks)));
  if (threads == 1) {
    run(0, 1);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < threads; ++w) pool.emplace_back(run, w, threads);
}

template <typename Scalar>
void draw(Rng& rng, VectorX<Scalar>& x, VectorX<Scalar>& y) {
  for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = static_cast<Scalar>(rng.uniform01());
  for (Eigen::Index k = 0; k < y.size(); ++k) y(k) = static_cast<Scalar>(rng.uniform01());
}

inline double std_error_of(long double sum, long double sum_sq, std::uint64_t samples) {
  const long double n = static_cast<long double>(samples);
  const long double var = (sum_sq - sum * sum / n) / (n - 1);
  return var > 0 ? static_cast<double>(std::sqrt(var / n)) : 0.0;
}

}  // namespace detail

/// Averages P(p stable | x, y) over i.i.d. uniform (x, y). Block k of
/// kMcBlockSize samples draws from rng.stream(k).
template <typename Scalar = double>
McEstimate mc_stable_probability(const Permutation& p, std::uint64_t samples, const Rng& rng,
                                 McOptions options = {}) {
  detail::check_samples(samples);
  const StabilityIntegrand<Scalar> integrand(p, options.integrand);
  const std::uint64_t blocks = (samples + kMcBlockSize - 1) / kMcBlockSize;
  std::vector<std::array<long double, 2>> partial(blocks);

  detail::for_each_block(samples, options.threads, [&](std::uint64_t k, std::uint64_t count) {
    Rng stream = rng.stream(k);
    VectorX<Scalar> x(integrand.n());
    VectorX<Scalar> y(integrand.y_size());
    detail::CompensatedSum sum;
    detail::CompensatedSum sum_sq;
    for (std::uint64_t s = 0; s < count; ++s) {
      detail::draw(stream, x, y);
      const long double v = static_cast<long double>(integrand.probability_unchecked(x, y));
      sum.add(v);
      sum_sq.add(v * v);
    }
    partial[k] = {sum.value(), sum_sq.value()};
  });

  detail::CompensatedSum sum;
  detail::CompensatedSum sum_sq;
  for (const auto& [s, s2] : partial) {
    sum.add(s);
    sum_sq.add(s2);
  }
  return {static_cast<double>(sum.value() / samples),
          detail::std_error_of(sum.value(), sum_sq.value(), samples), samples};
}

/// Monte Carlo average of the joint rank polynomial coefficients.
template <typename Scalar = double>
RankDistributionEstimate mc_rank_distribution(const Permutation& p, std::uint64_t samples,
                                              const Rng& rng, McOptions options = {}) {
  detail::check_samples(samples);
  const StabilityIntegrand<Scalar> integrand(p, options.integrand);
  if (integrand.plan().published.size() > kMaxPolynomialPairs) {
    throw CapExceeded("joint rank polynomial is capped at " + std::to_string(kMaxPolynomialPairs) +
                      " pairs");
  }
  const Eigen::Index dim = integrand.max_degree() + 1;
  const std::uint64_t blocks = (samples + kMcBlockSize - 1) / kMcBlockSize;
  using Acc = MatrixX<long double>;
  std::vector<std::array<Acc, 2>> partial(blocks);

  detail::for_each_block(samples, options.threads, [&](std::uint64_t k, std::uint64_t count) {
    Rng stream = rng.stream(k);
    VectorX<Scalar> x(integrand.n());
    VectorX<Scalar> y(integrand.y_size());
    Acc sum = Acc::Zero(dim, dim);
    Acc sum_sq = Acc::Zero(dim, dim);
    for (std::uint64_t s = 0; s < count; ++s) {
      detail::draw(stream, x, y);
      const Acc c = integrand.rank_polynomial_unchecked(x, y).coeffs.template cast<long double>();
      sum += c;
      sum_sq += c.cwiseProduct(c);
    }
    partial[k] = {std::move(sum), std::move(sum_sq)};
  });

  Acc sum = Acc::Zero(dim, dim);
  Acc sum_sq = Acc::Zero(dim, dim);
  for (const auto& [s, s2] : partial) {
    sum += s;
    sum_sq += s2;
  }
  RankDistributionEstimate out{p.size(), Eigen::MatrixXd(dim, dim), Eigen::MatrixXd(dim, dim),
                               samples};
  for (Eigen::Index a = 0; a < dim; ++a) {
    for (Eigen::Index b = 0; b < dim; ++b) {
      out.mean(a, b) = static_cast<double>(sum(a, b) / samples);
      out.std_error(a, b) = detail::std_error_of(sum(a, b), sum_sq(a, b), samples);
    }
  }
  return out;
}

}  // namespace stableperm
