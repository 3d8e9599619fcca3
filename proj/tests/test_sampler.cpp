#include <doctest.h>

#include <cmath>
#include <numbers>

#include "srpanova/error.hpp"
#include "srpanova/fit.hpp"
#include "srpanova/sampler.hpp"
#include "srpanova/simulate.hpp"
#include "support.hpp"

using namespace srp;

namespace {

LatentState random_state(Rng& rng, std::size_t areas, std::size_t effects) {
  auto s = LatentState::zeros(areas, effects);
  for (auto& a : s.alpha) a = rng.normal(0.0, 0.7);
  for (auto& w : s.omega) w = rng.normal(0.0, 0.3);
  for (auto& f : s.phi) {
    const double shift = rng.normal(0.0, 2.0);
    for (auto& v : f) v = shift + rng.normal(0.0, 0.5);
  }
  for (auto& sd : s.sigma_omega) sd = rng.uniform(0.05, 2.0);
  for (auto& sd : s.sigma_phi) sd = rng.uniform(0.05, 2.0);
  return s;
}

Dataset small_dataset(const RegionGraph& g, std::uint64_t seed, double e = 25.0) {
  SimTruth t;
  t.sigma_structured = {{"phi11", 0.4}};
  t.sigma_unstructured = {0.1, 0.1, 0.1, 0.1};
  t.seed = seed;
  return simulate_dataset(t, make_spec(Family::M2, {}, FactorDesign{}), g,
                          std::vector<double>(g.size() * 4, e))
      .dataset;
}

McmcConfig short_config() {
  McmcConfig c;
  c.n_chains = 2;
  c.warmup = 200;
  c.keep = 200;
  c.workers = 1;
  return c;
}

}  // namespace

TEST_SUITE("posterior") {

TEST_CASE("log posterior against a written-out formula") {
  auto g = testing::path_graph();
  auto icar = scale_icar(icar_precision(g));
  FactorDesign d;
  auto spec = make_spec(Family::M3, {}, d);
  Dataset data;
  data.region_ids = g.region_ids();
  data.y = {3, 0, 7, 1, 4, 2, 9, 5, 0, 1, 6, 2};
  data.e = {2.5, 1.0, 6.0, 1.5, 3.0, 2.0, 8.0, 4.0, 0.5, 1.0, 5.0, 2.5};
  McmcConfig cfg;
  cfg.sd_upper = 10.0;
  cfg.intercept_sd = 3.0;
  Rng rng(5);

  for (int rep = 0; rep < 20; ++rep) {
    auto s = random_state(rng, 3, 2);
    const double kappa = std::cbrt(50.0 / 729.0);
    const double two_pi = 2.0 * std::numbers::pi;
    double expect = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int gr = 0; gr < 4; ++gr) {
        // phi11 on every group, phi21 on groups 3 and 4
        const double eta = s.alpha[gr] + s.omega[i * 4 + gr] + s.phi[0][i] + (gr >= 2 ? s.phi[1][i] : 0.0);
        const double y = static_cast<double>(data.y[i * 4 + gr]), e = data.e[i * 4 + gr];
        double fact = 0.0;
        for (int k = 2; k <= static_cast<int>(y); ++k) fact += std::log(static_cast<double>(k));
        expect += y * std::log(e * std::exp(eta)) - e * std::exp(eta) - fact;
        const double so = s.sigma_omega[gr];
        expect += -0.5 * std::log(two_pi * so * so) - s.omega[i * 4 + gr] * s.omega[i * 4 + gr] / (2 * so * so);
      }
    }
    for (int gr = 0; gr < 4; ++gr) {
      expect += -0.5 * std::log(two_pi * 9.0) - s.alpha[gr] * s.alpha[gr] / 18.0 - std::log(10.0);
    }
    for (int k = 0; k < 2; ++k) {
      const auto& p = s.phi[k];
      const double quad = kappa * ((p[0] - p[1]) * (p[0] - p[1]) + (p[1] - p[2]) * (p[1] - p[2]));
      const double sd = s.sigma_phi[k];
      expect += -std::log(sd * sd) - quad / (2 * sd * sd) - std::log(10.0);
    }
    CHECK(std::abs(log_unnormalized_posterior(s, spec, data, icar, cfg) - expect) < 1e-10);
  }

  auto s = random_state(rng, 3, 2);
  s.sigma_phi[1] = 11.0;
  CHECK(std::isinf(log_unnormalized_posterior(s, spec, data, icar, cfg)));
  s.sigma_phi[1] = 0.0;
  CHECK(std::isinf(log_unnormalized_posterior(s, spec, data, icar, cfg)));
}

TEST_CASE("loglik clamps extreme predictors") {
  Dataset data{{"A"}, {1, 0, 2, 0}, {1, 1, 1, 1}, {}};
  std::size_t clamps = 0;
  const double ll = poisson_loglik({40.0, -45.0, 0.0, 0.0}, data, &clamps);
  CHECK(clamps == 2);
  CHECK(std::isfinite(ll));
  CHECK(ll == doctest::Approx(30.0 - std::exp(30.0) - std::exp(-30.0) + 0.0 - 1.0 - std::log(2.0) - 1.0));
}

TEST_CASE("recentring keeps every predictor") {
  auto g = testing::rook_lattice(4, 5);
  auto icar = scale_icar(icar_precision(g));
  auto spec = make_spec(Family::M6, {}, FactorDesign{});
  Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    auto s = random_state(rng, g.size(), spec.incidence.n_effects());
    const auto before = linear_predictor(s, spec.incidence);
    recenter_and_absorb(s, spec.incidence, icar);
    const auto after = linear_predictor(s, spec.incidence);
    for (std::size_t c = 0; c < before.size(); ++c) CHECK(std::abs(before[c] - after[c]) < 1e-12);
    for (const auto& f : s.phi) {
      double m = 0.0;
      for (double v : f) m += v;
      CHECK(std::abs(m) < 1e-10);
    }
  }
}

TEST_CASE("recentring on two components zeroes each block") {
  auto g = load_adjacency({{"A", "B"}, {"B", "C"}, {"D", "E"}});
  auto icar = scale_icar(icar_precision(g));
  auto spec = make_spec(Family::M2, {}, FactorDesign{});
  Rng rng(2);
  auto s = random_state(rng, g.size(), 1);
  recenter_and_absorb(s, spec.incidence, icar);
  CHECK(std::abs(s.phi[0][0] + s.phi[0][1] + s.phi[0][2]) < 1e-12);
  CHECK(std::abs(s.phi[0][3] + s.phi[0][4]) < 1e-12);
}

}  // TEST_SUITE

TEST_SUITE("sampler") {

TEST_CASE("state round trip and constraint after sweeps") {
  for (auto g : {testing::rook_lattice(4, 4), load_adjacency({{"A", "B"}, {"B", "C"}, {"D", "E"}, {"E", "F"}})}) {
    auto icar = scale_icar(icar_precision(g));
    auto data = small_dataset(g, 4);
    for (auto fam : {Family::M0, Family::M1, Family::M5, Family::M6}) {
      auto spec = make_spec(fam, {}, FactorDesign{});
      GibbsSampler s(spec, data, icar, short_config(), 77);
      s.initialize();
      s.set_adapting(true);
      for (int i = 0; i < 60; ++i) {
        s.sweep();
        const auto st = s.state();
        for (const auto& f : st.phi) {
          for (const auto& comp : icar.members) {
            double m = 0.0;
            for (int j : comp) m += f[j];
            REQUIRE(std::abs(m) < 1e-10);
          }
        }
        const auto eta = linear_predictor(st, spec.incidence);
        for (std::size_t c = 0; c < eta.size(); ++c) REQUIRE(std::abs(eta[c] - s.eta()[c]) < 1e-9);
      }
      CHECK(s.max_recentre_drift() < 1e-12);

      auto st = s.state();
      GibbsSampler t(spec, data, icar, short_config(), 78);
      t.set_state(st);
      CHECK(t.log_posterior() == doctest::Approx(s.log_posterior()).epsilon(1e-12));
    }
  }
}

TEST_CASE("log posterior differences match the full formula") {
  // the sampler drops constants; differences between states must agree
  auto g = testing::rook_lattice(3, 4);
  auto icar = scale_icar(icar_precision(g));
  auto data = small_dataset(g, 6);
  auto spec = make_spec(Family::M4, {}, FactorDesign{});
  auto cfg = short_config();
  GibbsSampler s(spec, data, icar, cfg, 1);
  s.initialize();
  auto a = s.state();
  for (int i = 0; i < 30; ++i) s.sweep();
  auto b = s.state();
  GibbsSampler t(spec, data, icar, cfg, 1);
  t.set_state(a);
  const double lp_a = t.log_posterior();
  const double full = log_unnormalized_posterior(b, spec, data, icar, cfg) -
                      log_unnormalized_posterior(a, spec, data, icar, cfg);
  CHECK(s.log_posterior() - lp_a == doctest::Approx(full).epsilon(1e-9));
}

TEST_CASE("fixed sds stay fixed") {
  auto g = testing::rook_lattice(3, 3);
  auto icar = scale_icar(icar_precision(g));
  auto data = small_dataset(g, 1);
  auto cfg = short_config();
  cfg.update_sd = false;
  auto spec = make_spec(Family::M3, {}, FactorDesign{});
  GibbsSampler s(spec, data, icar, cfg, 3);
  s.initialize();
  const auto before = s.state();
  for (int i = 0; i < 20; ++i) s.sweep();
  CHECK(s.state().sigma_omega == before.sigma_omega);
  CHECK(s.state().sigma_phi == before.sigma_phi);
  CHECK(s.state().alpha != before.alpha);
}

TEST_CASE("run_chain is bit-reproducible") {
  auto g = testing::rook_lattice(3, 4);
  auto icar = scale_icar(icar_precision(g));
  auto data = small_dataset(g, 2);
  auto spec = make_spec(Family::M5, {}, FactorDesign{});
  auto cfg = short_config();
  auto a = run_chain(spec, data, icar, cfg, 1);
  auto b = run_chain(spec, data, icar, cfg, 1);
  CHECK(a.seed == b.seed);
  CHECK(a.scalars.values == b.scalars.values);
  CHECK(a.eta.values == b.eta.values);
  CHECK(a.fields.values == b.fields.values);
  auto c = run_chain(spec, data, icar, cfg, 0);
  CHECK(c.seed != a.seed);
  CHECK(c.scalars.values != a.scalars.values);
  CHECK(a.scalars.rows == 200);
  CHECK(a.eta.cols == g.size() * 4);
}

TEST_CASE("bad configurations are refused") {
  auto g = testing::rook_lattice(3, 3);
  auto icar = scale_icar(icar_precision(g));
  auto data = small_dataset(g, 1);
  auto spec = make_spec(Family::M2, {}, FactorDesign{});
  auto cfg = short_config();
  cfg.keep = 100;
  CHECK_THROWS_AS(fit(spec, data, icar, cfg, FactorDesign{}), InputError);
  cfg = short_config();
  cfg.n_chains = 1;
  cfg.keep = 500;
  CHECK_THROWS_AS(fit(spec, data, icar, cfg, FactorDesign{}), InputError);
  cfg = short_config();
  cfg.thin = 0;
  CHECK_THROWS_AS(cfg.validate(false), InputError);
  auto other = small_dataset(testing::rook_lattice(2, 2), 1);
  CHECK_THROWS_AS(GibbsSampler(spec, other, icar, short_config(), 1), InputError);
}

}  // TEST_SUITE

TEST_SUITE("fit") {

TEST_CASE("intercepts of a null simulation") {
  // 20 regions in a line, no effects, E = 500
  std::vector<EdgeRecord> edges;
  for (int i = 0; i + 1 < 20; ++i) edges.emplace_back("p" + std::to_string(i), "p" + std::to_string(i + 1));
  auto g = load_adjacency(edges);
  auto icar = scale_icar(icar_precision(g));
  FactorDesign d;
  SimTruth t;
  t.seed = 21;
  auto sim = simulate_dataset(t, make_spec(Family::M0, {}, d), g, std::vector<double>(80, 500.0));
  McmcConfig cfg;
  cfg.workers = 1;
  cfg.warmup = 1000;
  cfg.keep = 1000;
  auto f = fit(make_spec(Family::M0, {}, d), sim.dataset, icar, cfg, d);
  REQUIRE(f.chains.size() == 4);
  for (int gr = 0; gr < 4; ++gr) {
    double m = 0.0;
    std::size_t n = 0;
    for (const auto& ch : f.chains) {
      for (std::size_t r = 0; r < ch.scalars.rows; ++r, ++n) m += ch.scalars.at(r, gr);
    }
    CHECK(std::abs(m / n) < 0.05);
  }
  CHECK(std::isfinite(f.dic.dic));
  CHECK(f.scalar_names.front() == "alpha_g1");
  CHECK(f.diagnostics.size() == f.scalar_names.size());
}

TEST_CASE("pooled draws do not depend on the worker count") {
  auto g = testing::rook_lattice(4, 4);
  auto icar = scale_icar(icar_precision(g));
  auto data = small_dataset(g, 9);
  auto spec = make_spec(Family::M3, {}, FactorDesign{});
  auto cfg = short_config();
  cfg.n_chains = 4;
  cfg.keep = 100;
  auto one = fit(spec, data, icar, cfg, FactorDesign{});
  cfg.workers = 4;
  auto four = fit(spec, data, icar, cfg, FactorDesign{});
  CHECK(one.eta.values == four.eta.values);
  CHECK(one.fields.values == four.fields.values);
  CHECK(one.dic.dic == four.dic.dic);
  CHECK(one.waic.waic == four.waic.waic);

  auto score = one.score();
  CHECK(score.label == spec.label);
  CHECK(score.converged == one.converged);
  one.release_draws();
  CHECK(one.eta.values.empty());

  auto summary = summarize(four, data, FactorDesign{});
  CHECK(summary.risk.size() == g.size() * 4);
  CHECK(summary.effects.size() == 2 * g.size());
  CHECK(summary.effect_labels == spec.incidence.labels);
}

TEST_CASE("fit outputs") {
  testing::TempDir dir;
  auto g = testing::rook_lattice(3, 3);
  auto icar = scale_icar(icar_precision(g));
  auto data = small_dataset(g, 10);
  auto spec = make_spec(Family::M2, {}, FactorDesign{});
  auto f = fit(spec, data, icar, short_config(), FactorDesign{});
  write_draws_csv(dir / "draws.csv", f);
  const auto text = testing::read_file(dir / "draws.csv");
  CHECK(text.rfind("chain,iter,scalar,value\n", 0) == 0);
  auto j = fit_summary_json(f);
  CHECK(j.at("label") == spec.label);
  CHECK(j.contains("converged"));
  CHECK(j.contains("dic"));
}

}  // TEST_SUITE
