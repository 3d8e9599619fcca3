#include <doctest.h>

#include <cmath>

#include "srpanova/diagnostics.hpp"
#include "srpanova/error.hpp"
#include "srpanova/random.hpp"

using namespace srp;

namespace {

std::vector<double> iid(Rng& rng, std::size_t n, double shift = 0.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = shift + rng.normal();
  return v;
}

std::vector<double> ar1(Rng& rng, std::size_t n, double rho) {
  std::vector<double> v(n);
  double x = rng.normal() / std::sqrt(1 - rho * rho);
  for (auto& out : v) {
    x = rho * x + rng.normal();
    out = x;
  }
  return v;
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("iid chains") {
  Rng rng(1);
  std::vector<std::vector<double>> chains{iid(rng, 10000), iid(rng, 10000)};
  auto d = diagnose("x", chains);
  CHECK(d.rhat < 1.01);
  CHECK_FALSE(d.zero_variance);
  CHECK(d.ess > 0.85 * 20000);
  CHECK(d.ess < 1.15 * 20000);
}

TEST_CASE("a shifted chain is caught") {
  Rng rng(2);
  std::vector<std::vector<double>> chains{iid(rng, 10000), iid(rng, 10000, 10.0)};
  CHECK(split_rhat(chains) > 1.5);
}

TEST_CASE("a chain with a different spread is caught by the folded statistic") {
  Rng rng(3);
  auto wide = iid(rng, 2000);
  for (auto& x : wide) x *= 4.0;
  std::vector<std::vector<double>> chains{iid(rng, 2000), iid(rng, 2000), iid(rng, 2000), wide};
  CHECK(split_rhat(chains) < 1.05);
  CHECK(diagnose("x", chains).rhat > 1.05);
}

TEST_CASE("a trending chain fails the split test") {
  Rng rng(4);
  auto a = iid(rng, 1000), b = iid(rng, 1000);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += 3.0 * static_cast<double>(i) / a.size();
  CHECK(split_rhat({a, b}) > 1.05);
}

TEST_CASE("constant chains") {
  std::vector<std::vector<double>> chains{std::vector<double>(100, 2.5), std::vector<double>(100, 2.5)};
  auto d = diagnose("c", chains);
  CHECK(d.rhat == 1.0);
  CHECK(d.zero_variance);
}

TEST_CASE("autocorrelated chains have a smaller ESS") {
  Rng rng(5);
  const double rho = 0.8;
  std::vector<std::vector<double>> chains;
  for (int c = 0; c < 4; ++c) chains.push_back(ar1(rng, 20000, rho));
  const double expected = 80000 * (1 - rho) / (1 + rho);
  const double ess = effective_sample_size(chains);
  CHECK(ess > 0.8 * expected);
  CHECK(ess < 1.2 * expected);
}

TEST_CASE("input checks") {
  Rng rng(6);
  CHECK_THROWS_AS(split_rhat({iid(rng, 100)}), InputError);
  CHECK_THROWS_AS(split_rhat({iid(rng, 100), iid(rng, 99)}), InputError);
  CHECK_THROWS_AS(split_rhat({iid(rng, 20), iid(rng, 20)}), InputError);
}

}  // TEST_SUITE
