#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "req/policy/gaussian.hpp"

using namespace req;

namespace {

GaussianParams random_params(std::mt19937_64& rng, std::size_t k) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> s(0.2, 2.0);
  GaussianParams p;
  for (std::size_t i = 0; i < k; ++i) {
    p.mean.push_back(n(rng));
    p.stddev.push_back(s(rng));
  }
  return p;
}

double normal_log_pdf(double x, double m, double s) {
  const double z = (x - m) / s;
  return -0.5 * z * z - std::log(s) - 0.5 * std::log(2.0 * std::numbers::pi);
}

// Trapezoid rule on [lo, hi] with n intervals.
template <class F>
double integrate(F f, double lo, double hi, std::size_t n) {
  const double h = (hi - lo) / static_cast<double>(n);
  double acc = 0.5 * (f(lo) + f(hi));
  for (std::size_t i = 1; i < n; ++i) acc += f(lo + h * static_cast<double>(i));
  return acc * h;
}

}  // namespace

TEST_CASE("policy_distribution: zero parameters give mean 0 and the softplus(0) stddev") {
  GaussianPolicy pol = make_gaussian_policy(4, 3, {8, 8}, true, 1);
  pol.params = pol.params.zeros_like();
  pol.params.at(kNormScale).values.assign(8, 1.0);
  const GaussianParams d = policy_distribution(pol, std::vector<double>{0.1, -0.2, 0.3, 0.4});
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(d.mean[i] == 0.0);
    CHECK(d.stddev[i] == doctest::Approx(std::log(2.0) + std::sqrt(kMinVariance)).epsilon(1e-15));
  }
}

TEST_CASE("policy_distribution: deterministic and affine in the mean bias") {
  GaussianPolicy pol = make_gaussian_policy(3, 2, {6, 6}, true, 7);
  const std::vector<double> s{0.5, -1.0, 2.0};
  const GaussianParams a = policy_distribution(pol, s);
  CHECK(a == policy_distribution(pol, s));
  const std::string last = bias_name(pol.trunk.num_layers() - 1);
  pol.params.at(last)[1] += 0.25;
  const GaussianParams b = policy_distribution(pol, s);
  CHECK(b.mean[0] == a.mean[0]);
  CHECK(b.mean[1] == doctest::Approx(a.mean[1] + 0.25).epsilon(1e-14));
  CHECK(b.stddev == a.stddev);
}

TEST_CASE("policy_distribution: non-finite state is rejected") {
  GaussianPolicy pol = make_gaussian_policy(2, 1, {4}, false, 1);
  CHECK_THROWS(policy_distribution(pol, std::vector<double>{NAN, 0.0}));
}

TEST_CASE("policy_distribution: stddev never drops below the floor") {
  GaussianPolicy pol = make_gaussian_policy(2, 2, {4}, false, 3);
  const std::string last = bias_name(pol.trunk.num_layers() - 1);
  pol.params.at(last)[2] = -800.0;
  pol.params.at(last)[3] = -50.0;
  const GaussianParams d = policy_distribution(pol, std::vector<double>{0.0, 0.0});
  for (double s : d.stddev) CHECK(s >= std::sqrt(kMinVariance));
}

TEST_CASE("log_prob closed forms") {
  GaussianParams std3{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};
  const double zero[3] = {0.0, 0.0, 0.0};
  CHECK(log_prob(std3, zero) == doctest::Approx(-1.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-15));
  GaussianParams std1{{0.0}, {1.0}};
  const double one[1] = {1.0};
  CHECK(log_prob(std1, one) == doctest::Approx(-0.5 - 0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-15));
}

TEST_CASE("log_prob: 1-D density integrates to one") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const GaussianParams d = random_params(rng, 1);
    const double lo = d.mean[0] - 12.0 * d.stddev[0], hi = d.mean[0] + 12.0 * d.stddev[0];
    const double mass = integrate([&](double x) { return std::exp(log_prob(d, std::span<const double>(&x, 1))); },
                                  lo, hi, 20000);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("log_prob: parameter gradient matches finite differences") {
  std::mt19937_64 rng(19);
  for (int t = 0; t < 6; ++t) {
    GaussianPolicy pol = make_gaussian_policy(3, 2, {5, 5}, t % 2 == 0, 40 + t);
    const NumArray states = test::random_matrix(4, 3, rng);
    const NumArray actions = test::random_matrix(4, 2, rng);
    auto loss = [&] {
      double s = 0.0;
      const auto dists = policy_distribution(pol, states);
      for (std::size_t i = 0; i < 4; ++i) s += log_prob(dists[i], actions.row(i));
      return s;
    };
    NumArray raw;
    const auto dists = policy_distribution(pol, states, &raw);
    NumArray up = NumArray::matrix(4, 4);
    for (std::size_t i = 0; i < 4; ++i) {
      const LogProbGrad g = log_prob_grad(dists[i], actions.row(i));
      head_backward(raw.row(i), g.d_mean, g.d_stddev, up.row(i));
    }
    const ParamSet grads = backward(pol.trunk, pol.params, states, up);
    CHECK(test::max_fd_error(pol.params, grads, loss) <= 1e-4);
  }
}

TEST_CASE("sample: reproducible, unbiased and honoring the stddev") {
  GaussianParams d{{1.5, -0.5}, {std::sqrt(kMinVariance), 0.8}};
  Rng r1(11), r2(11);
  const NumArray a = sample(d, r1, 10000);
  CHECK(a == sample(d, r2, 10000));
  for (std::size_t k = 0; k < 2; ++k) {
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) mean += (a.row(i)[k] - d.mean[k]) / 10000.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const double c = a.row(i)[k] - d.mean[k] - mean;
      var += c * c / 9999.0;
    }
    CHECK(std::abs(mean) <= 3.0 * d.stddev[k] / 100.0);
    CHECK(std::sqrt(var) == doctest::Approx(d.stddev[k]).epsilon(0.05));
  }
}

TEST_CASE("kl_decoupled closed forms") {
  GaussianParams a{{0.3, -1.0}, {0.5, 2.0}};
  const DecoupledKl same = kl_decoupled(a, a);
  CHECK(same.kl_mean == 0.0);
  CHECK(same.kl_cov == 0.0);

  GaussianParams p{{0.0}, {0.7}}, q{{0.4}, {0.7}};
  const DecoupledKl kl = kl_decoupled(q, p);
  CHECK(kl.kl_mean == doctest::Approx(0.16 / (2.0 * 0.49)).epsilon(1e-14));
  CHECK(kl.kl_cov == doctest::Approx(0.0));
}

TEST_CASE("kl_decoupled: components are non-negative and sum to the total KL") {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const GaussianParams next = random_params(rng, 3), prev = random_params(rng, 3);
    const DecoupledKl kl = kl_decoupled(next, prev);
    CHECK(kl.kl_mean >= 0.0);
    CHECK(kl.kl_cov >= 0.0);
    worst = std::max(worst, std::abs(kl.kl_mean + kl.kl_cov - kl_total(next, prev)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("kl_decoupled: 1-D sum matches quadrature of the KL integral") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const GaussianParams next = random_params(rng, 1), prev = random_params(rng, 1);
    const double m = next.mean[0], s = next.stddev[0];
    const double integral = integrate(
        [&](double x) {
          const double lp = normal_log_pdf(x, m, s);
          return std::exp(lp) * (lp - normal_log_pdf(x, prev.mean[0], prev.stddev[0]));
        },
        m - 14.0 * s, m + 14.0 * s, 40000);
    const DecoupledKl kl = kl_decoupled(next, prev);
    CHECK(std::abs(kl.kl_mean + kl.kl_cov - integral) <= 1e-6);
  }
}
