#include <doctest.h>

#include <numeric>

#include "srpanova/dataset.hpp"
#include "srpanova/error.hpp"
#include "support.hpp"

using namespace srp;

TEST_SUITE("dataset") {

TEST_CASE("single area from group totals") {
  std::vector<std::int64_t> y{8788, 10908, 17189, 22686};
  auto e = expected_counts(y, std::vector<double>{1.0}, ExpectedMode::shared_population);
  for (double v : e) CHECK(v == 14892.75);
}

TEST_CASE("uniform split") {
  std::vector<std::int64_t> y{2, 0, 1, 1, 0, 3, 1, 0};
  auto e = expected_counts(y, std::vector<double>{5.0, 5.0}, ExpectedMode::shared_population);
  for (double v : e) CHECK(v == 1.0);
}

TEST_CASE("unequal populations") {
  std::vector<std::int64_t> y{1, 2, 3, 4, 0, 2, 2, 2};
  auto e = expected_counts(y, std::vector<double>{100.0, 300.0}, ExpectedMode::shared_population);
  for (int g = 0; g < 4; ++g) {
    CHECK(e[g] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(e[4 + g] == doctest::Approx(3.0).epsilon(1e-14));
  }
}

TEST_CASE("group population mode and grand totals") {
  std::vector<std::int64_t> y{3, 9, 4, 0, 7, 1, 2, 5, 11, 6, 3, 2};
  std::vector<double> p{10, 20, 30, 40, 15, 25, 35, 45, 5, 5, 50, 60};
  auto e = expected_counts(y, p, ExpectedMode::group_population);
  const double ty = std::accumulate(y.begin(), y.end(), 0.0);
  const double tp = std::accumulate(p.begin(), p.end(), 0.0);
  for (std::size_t c = 0; c < e.size(); ++c) CHECK(e[c] == doctest::Approx(ty * p[c] / tp).epsilon(1e-14));
  CHECK(std::abs(std::accumulate(e.begin(), e.end(), 0.0) - ty) < 1e-9 * ty);

  auto shared = expected_counts(y, p, ExpectedMode::shared_population);
  CHECK(std::abs(std::accumulate(shared.begin(), shared.end(), 0.0) - ty) < 1e-9 * ty);
  // the area's group rows are summed into one population
  CHECK(shared[0] == doctest::Approx(ty * 100.0 / tp / 4.0).epsilon(1e-14));
}

TEST_CASE("expected count errors") {
  std::vector<std::int64_t> zeros(8, 0);
  CHECK_THROWS_AS(expected_counts(zeros, std::vector<double>{1, 1}, ExpectedMode::shared_population), InputError);
  std::vector<std::int64_t> y{1, 1, 1, 1, 1, 1, 1, 1};
  CHECK_THROWS_AS(expected_counts(y, std::vector<double>{1, 0}, ExpectedMode::shared_population), InputError);
  CHECK_THROWS_AS(expected_counts(y, std::vector<double>{1, 2, 3}, ExpectedMode::shared_population), InputError);
  CHECK_THROWS_AS(expected_counts(y, std::vector<double>{1, 2}, ExpectedMode::group_population), InputError);
  CHECK(parse_expected_mode(to_string(ExpectedMode::group_population)) == ExpectedMode::group_population);
}

TEST_CASE("dataset check") {
  auto d = make_standardized_dataset({"A", "B"}, {1, 2, 3, 4, 5, 6, 7, 8}, {1.0, 2.0},
                                     ExpectedMode::shared_population);
  d.check();
  CHECK(d.count(1, 2) == 7);
  d.e[3] = 0.0;
  CHECK_THROWS_AS(d.check(), InputError);
}

TEST_CASE("counts csv round trip") {
  testing::TempDir dir;
  auto g = testing::path_graph();
  FactorDesign design;
  testing::write_file(dir / "c.csv",
                      "region_id,factor1,factor2,count,population\n"
                      "C,a1,b1,4,50\nC,a1,b2,5,50\nC,a2,b1,6,50\nC,a2,b2,7,50\n"
                      "A,a1,b1,1,100\nA,a1,b2,2,100\nA,a2,b1,3,100\nA,a2,b2,0,100\n"
                      "B,a2,b2,9,50\n");
  auto f = read_counts_csv(dir / "c.csv", design, g, ExpectedMode::shared_population);
  // B is missing three of its four cells
  CHECK_FALSE(f.warnings.empty());
  const auto& d = f.dataset;
  CHECK(d.region_ids == g.region_ids());
  CHECK(d.count(g.index_of("C"), 3) == 7);
  CHECK(d.count(g.index_of("B"), 0) == 0);
  CHECK(d.count(g.index_of("B"), 3) == 9);
  double te = 0.0;
  for (double v : d.e) te += v;
  CHECK(te == doctest::Approx(37.0).epsilon(1e-12));
  CHECK(d.expected(g.index_of("A"), 0) == doctest::Approx(37.0 * 0.5 / 4.0).epsilon(1e-12));

  write_counts_csv(dir / "out.csv", d, design);
  auto back = read_counts_csv(dir / "out.csv", design, g, ExpectedMode::shared_population).dataset;
  CHECK(back.y == d.y);
}

TEST_CASE("counts csv errors carry line numbers") {
  testing::TempDir dir;
  auto g = testing::path_graph();
  FactorDesign design;
  auto expect_error = [&](const std::string& body, const std::string& fragment) {
    testing::write_file(dir / "bad.csv", body);
    try {
      read_counts_csv(dir / "bad.csv", design, g, ExpectedMode::shared_population);
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos, e.what());
    }
  };
  expect_error("region_id,factor1,factor2,count\nA,a1,b1,1\nQ,a1,b1,2\n", ":3:");
  expect_error("region_id,factor1,factor2,count\nA,a1,b9,1\n", "b9");
  expect_error("region_id,factor1,factor2,count\nA,a1,b1,-1\n", "negative");
  expect_error("region_id,factor1,factor2,count\nA,a1,b1,1\nA,a1,b1,1\n", "duplicate");
  expect_error("region_id,factor1,factor2,count\nA,a1,b1,x\n", ":2:");
  expect_error("region,f1,f2,n\nA,a1,b1,1\n", "region_id");
}

}  // TEST_SUITE
