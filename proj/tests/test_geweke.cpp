#include <doctest.h>

#include "srpanova/error.hpp"
#include "srpanova/geweke.hpp"
#include "support.hpp"

using namespace srp;

namespace {

McmcConfig proper_priors() {
  McmcConfig c;
  c.sd_upper = 1.0;
  c.intercept_sd = 0.5;
  c.workers = 1;
  return c;
}

}  // namespace

TEST_SUITE("geweke") {

TEST_CASE("zero outer steps give an empty report") {
  auto g = testing::rook_lattice(3, 3);
  GewekeOptions o;
  o.n_outer = 0;
  auto r = geweke_joint_test(make_spec(Family::M2, {}, FactorDesign{}), g,
                             std::vector<double>(g.size() * 4, 2.0), proper_priors(), o);
  CHECK(r.statistics.empty());
}

TEST_CASE("flat priors are refused") {
  auto g = testing::rook_lattice(3, 3);
  GewekeOptions o;
  o.n_outer = 1000;
  auto spec = make_spec(Family::M2, {}, FactorDesign{});
  std::vector<double> e(g.size() * 4, 2.0);
  CHECK_THROWS_AS(geweke_joint_test(spec, g, e, McmcConfig{}, o), InputError);
  auto c = proper_priors();
  c.intercept_sd = 1000.0;
  CHECK_THROWS_AS(geweke_joint_test(spec, g, e, c, o), InputError);
  CHECK_THROWS_AS(geweke_joint_test(spec, g, std::vector<double>(3, 2.0), proper_priors(), o), InputError);
}

TEST_CASE("short run on a small lattice") {
  auto g = testing::rook_lattice(3, 3);
  GewekeOptions o;
  o.n_outer = 10000;
  o.seed = 3;
  auto r = geweke_joint_test(make_spec(Family::M3, {}, FactorDesign{}), g,
                             std::vector<double>(g.size() * 4, 2.0), proper_priors(), o);
  REQUIRE(!r.statistics.empty());
  CHECK(r.pass_fraction() >= 0.9);
  for (const auto& s : r.statistics) CHECK(std::isfinite(s.z));
}

}  // TEST_SUITE
