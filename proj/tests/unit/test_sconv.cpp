#include <doctest.h>

#include "jumpconv/errors.hpp"
#include "jumpconv/sconv.hpp"
#include "scenarios.hpp"

using namespace jumpconv;
using namespace jumpconv::testing;

TEST_CASE("scalar decay matches the closed form at every grid point") {
  const double a = 1.3, c = 0.7, nu = 4.0;
  const ConvolutionScenario scn = scalar_decay(a, c, nu, 1.0, 512);
  const ConvolutionEngine engine(scn);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const PoissonPath path = sample_path(scn.marks(), 1.0, s);
    const CadlagPath u = convolution_path(engine, path);
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (i > 0 && u.times()[i] == u.times()[i - 1]) continue;
      const double t = u.times()[i];
      // Rows at jump times hold the post-jump value.
      CHECK(std::abs(u.values()[i][0] - scalar_decay_exact(a, c, nu, path, t)) < 1e-12);
    }
    for (double t : {0.0, 0.123, 0.5, 1.0})
      CHECK(std::abs(convolve_at(engine, path, t)[0] - scalar_decay_exact(a, c, nu, path, t)) < 1e-12);
  }
}

TEST_CASE("identity semigroup reduces to the stochastic integral") {
  const auto scns = catalog(256);
  const ConvolutionScenario& scn = scns[0];
  const ConvolutionEngine engine(scn);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const PoissonPath path = sample_path(scn.marks(), 1.0, s);
    const CadlagPath u = convolution_path(engine, path);
    CHECK((u.values().back() - integrate_field(path, scn.marks(), scn.integrand(), 1.0)).norm() < 1e-12);
  }
}

TEST_CASE("engine agrees with the direct sum on every catalog scenario") {
  for (const auto& scn : catalog(512)) {
    const ConvolutionEngine engine(scn);
    for (std::uint64_t s = 0; s < 5; ++s) {
      const PoissonPath path = sample_path(scn.marks(), scn.horizon(), Rng::substream(3, s));
      const CadlagPath u = convolution_path(engine, path);
      const double scale = 1.0 + u.sup_norm(scn.space());
      for (std::size_t i = 0; i < u.size(); i += 37) {
        const double t = u.times()[i];
        if (i + 1 < u.size() && u.times()[i + 1] == t) continue;
        CHECK_MESSAGE((u.values()[i] - convolve_at(scn, path, t)).norm() < 1e-9 * scale, scn.id());
      }
      for (const auto& j : u.jumps())
        CHECK((j.right - j.left - scn.integrand()(j.time, j.mark)).norm() < 1e-12 * scale);
    }
  }
}

TEST_CASE("strong solution residual converges at second order") {
  const ConvolutionScenario base = catalog()[1];
  std::vector<double> res;
  for (std::size_t count : {256, 512, 1024, 2048}) {
    const ConvolutionScenario scn = base.with_grid(GridSpec{count, {}});
    double acc = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s)
      acc += strong_solution_residual(scn, sample_path(scn.marks(), 1.0, Rng::substream(1, s)));
    res.push_back(acc / 5.0);
  }
  for (std::size_t i = 1; i < res.size(); ++i) CHECK(std::log2(res[i - 1] / res[i]) == doctest::Approx(2.0).epsilon(0.15));
  const ConvolutionScenario id = catalog()[0];
  CHECK(strong_solution_residual(id, sample_path(id.marks(), 1.0, 9)) <= 1e-12);
}

TEST_CASE("Yosida approximation") {
  const double a = 2.0;
  const ConvolutionScenario scn = scalar_decay(a, 1.5, 3.0, 1.0, 256);
  const PoissonPath path = sample_path(scn.marks(), 1.0, 4);
  const CadlagPath u = convolution_path(scn, path);
  for (double n : {2.0, 16.0, 1024.0}) {
    const CadlagPath un = yosida_convolution(scn, path, n);
    for (std::size_t i = 0; i < u.size(); ++i)
      CHECK(std::abs(un.values()[i][0] - n / (n + a) * u.values()[i][0]) < 1e-12);
  }
  const ConvolutionScenario lap = catalog(256)[2];
  const PoissonPath p2 = sample_path(lap.marks(), 1.0, 8);
  const CadlagPath v = convolution_path(lap, p2);
  double prev = 1e300;
  for (double n = 2.0; n <= 1024.0; n *= 2.0) {
    const double d = sup_distance(lap.space(), yosida_convolution(lap, p2, n), v);
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 1e-2 * v.sup_norm(lap.space()));
}

TEST_CASE("Ito decomposition closes and the drift is dissipative") {
  for (const auto& scn : catalog(1024)) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const PoissonPath path = sample_path(scn.marks(), 1.0, Rng::substream(12, s));
      const ItoTerms it = ito_terms(scn, path, 1.0);
      CHECK_MESSAGE(std::abs(it.identity_gap()) <= 10.0 * it.tolerance, scn.id());
      CHECK(it.drift_term <= 1e-9 * (1.0 + it.sup_phi));
      CHECK(it.phi_u_t <= it.mart_term + it.jump_term + it.tolerance);
    }
  }
}

TEST_CASE("scenario validation and certification") {
  Matrix grow(1, 1);
  grow << 0.2;
  CHECK_THROWS_AS(ConvolutionScenario("grow", MarkSpace({1.0}), SmoothSpace(1, 2, 2, 2), Generator::dense(grow),
                                      FieldIntegrand::constant({vec({1.0})}), 1.0),
                  HypothesisError);
  CHECK_THROWS_AS(ConvolutionScenario("dim", MarkSpace({1.0}), SmoothSpace(2, 2, 2, 2), Generator::identity(2),
                                      FieldIntegrand::constant({vec({1.0})}), 1.0),
                  DomainError);
  CHECK_THROWS_AS(ConvolutionScenario("marks", MarkSpace({1.0, 1.0}), SmoothSpace(1, 2, 2, 2), Generator::identity(1),
                                      FieldIntegrand::constant({vec({1.0})}), 1.0),
                  DomainError);
  const ConvolutionScenario scn = scalar_decay(1.0, 1.0, 1.0, 2.0, 8);
  const auto times = scn.sample_times();
  CHECK(times.front() == 0.0);
  CHECK(times.back() == 2.0);
  CHECK(times.size() == 9);
  const auto custom = scn.with_grid(GridSpec{0, {0.5, 1.5}}).sample_times();
  CHECK(custom == std::vector<double>{0.0, 0.5, 1.5, 2.0});
  CHECK(scn.contraction_ratio() <= 1.0 + contraction_tolerance);
  CHECK(scn.integrability() == doctest::Approx(2.0));
}

TEST_CASE("convolution path is deterministic per seed") {
  const ConvolutionScenario scn = catalog(128)[3];
  const PoissonPath path = sample_path(scn.marks(), 1.0, 99);
  const CadlagPath a = convolution_path(scn, path), b = convolution_path(scn, path);
  CHECK(a.times() == b.times());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK((a.values()[i] - b.values()[i]).norm() == 0.0);
}
