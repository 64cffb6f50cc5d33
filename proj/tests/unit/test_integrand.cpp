#include <doctest.h>

#include "jumpconv/errors.hpp"
#include "jumpconv/integrand.hpp"
#include "scenarios.hpp"

using namespace jumpconv;
using jumpconv::testing::poly_coeffs;
using jumpconv::testing::vec;

TEST_CASE("polynomial evaluation and antiderivative") {
  // mark 0: (1 + 2t, -t^2), mark 1: (3, 0)
  const auto f = FieldIntegrand::polynomial({poly_coeffs({{1.0, 0.0}, {2.0, 0.0}, {0.0, -1.0}}),
                                             poly_coeffs({{3.0, 0.0}})});
  CHECK(f.dim() == 2);
  CHECK(f.n_marks() == 2);
  CHECK((f(0.5, 0) - vec({2.0, -0.25})).norm() < 1e-15);
  CHECK((f(0.5, 1) - vec({3.0, 0.0})).norm() < 1e-15);
  REQUIRE(f.has_antiderivative());
  CHECK((f.antiderivative(1.5, 0) - vec({1.5 + 2.25, -1.125})).norm() < 1e-14);
  const MarkSpace ms({2.0, 0.5});
  CHECK((f.drift(ms, 0.5) - vec({4.0 + 1.5, -0.5})).norm() < 1e-14);
  const Matrix dc = f.drift_coefficients(ms);
  CHECK(dc.cols() == 3);
  CHECK(dc(0, 0) == doctest::Approx(3.5));
}

TEST_CASE("mapping and scaling") {
  const auto f = FieldIntegrand::constant({vec({1.0, 2.0}), vec({0.0, -1.0})});
  Matrix l(3, 2);
  l << 1, 0, 0, 1, 1, 1;
  const auto g = f.mapped(l);
  CHECK(g.dim() == 3);
  CHECK((g(0.2, 0) - vec({1.0, 2.0, 3.0})).norm() == 0.0);
  CHECK((f.scaled(-2.0)(0.9, 1) - vec({0.0, 2.0})).norm() == 0.0);
  const auto r = testing::sinusoid({vec({1.0, 0.0})}, 2.0, 0.0);
  CHECK_FALSE(r.has_antiderivative());
  CHECK((r.scaled(3.0)(0.4, 0) - vec({3.0 * std::sin(0.8), 0.0})).norm() < 1e-15);
  CHECK(FieldIntegrand::zero(2, 3).is_zero());
  CHECK(FieldIntegrand::zero(2, 3)(0.5, 2).norm() == 0.0);
}

TEST_CASE("step integrand as a left-continuous field") {
  const StepIntegrand s({0.0, 0.5, 1.0}, {{{MarkSet::all(2), vec({1.0})}},
                                          {{MarkSet::only(2, 1), vec({4.0})}}});
  const auto f = s.as_field(2);
  CHECK(f(0.5, 0)[0] == 1.0);
  CHECK(f(0.5, 1)[0] == 1.0);
  CHECK(f(std::nextafter(0.5, 1.0), 1)[0] == 4.0);
  CHECK(f(0.75, 0)[0] == 0.0);
  // The origin takes the right limit; no event can occur there.
  CHECK(f(0.0, 1)[0] == 1.0);
  CHECK(f(1.5, 1)[0] == 0.0);
  CHECK(f.breaks() == std::vector<double>{0.5, 1.0});
  REQUIRE(f.has_antiderivative());
  CHECK(f.antiderivative(0.8, 1)[0] == doctest::Approx(0.5 + 4.0 * 0.3));
  CHECK(f.antiderivative(0.8, 0)[0] == doctest::Approx(0.5));
}

TEST_CASE("step integrand validation") {
  CHECK_THROWS_AS(StepIntegrand({0.1, 1.0}, {{{MarkSet::all(1), vec({1.0})}}}), DomainError);
  CHECK_THROWS_AS(StepIntegrand({0.0, 1.0, 0.5}, {{{MarkSet::all(1), vec({1.0})}}, {{MarkSet::all(1), vec({1.0})}}}),
                  DomainError);
  CHECK_THROWS_AS(StepIntegrand({0.0, 1.0}, {{{MarkSet::all(2), vec({1.0})}, {MarkSet::only(2, 0), vec({1.0})}}}),
                  DomainError);
  CHECK_THROWS_AS(StepIntegrand({0.0, 1.0}, {}), DomainError);
}

TEST_CASE("adapted step integrands resolve on the path prefix") {
  // Coefficient on interval j = number of events before its left end.
  const StepIntegrand s({0.0, 0.5, 1.0}, {{{MarkSet::all(1), vec({0.0})}}, {{MarkSet::all(1), vec({0.0})}}},
                        [](std::span<const Event> prefix, std::size_t, std::size_t) {
                          return vec({static_cast<double>(prefix.size())});
                        });
  CHECK(s.adapted());
  CHECK_THROWS_AS(s.as_field(1), DomainError);
  const PoissonPath path(1.0, 1, {{0.2, 0}, {0.4, 0}, {0.5, 0}, {0.9, 0}});
  const StepIntegrand r = s.resolve(path);
  CHECK(r.cells()[0][0].coefficient[0] == 0.0);
  CHECK(r.cells()[1][0].coefficient[0] == 3.0);
}

TEST_CASE("integrability integral") {
  const MarkSpace ms({2.0, 3.0});
  const SmoothSpace sp(2, 2, 2, 2);
  const auto f = FieldIntegrand::constant({vec({3.0, 4.0}), vec({1.0, 0.0})});
  CHECK(check_integrability(f, ms, sp, 1.5, 0.01) == doctest::Approx(1.5 * (2.0 * 25.0 + 3.0)).epsilon(1e-13));
  const auto g = testing::sinusoid({vec({1.0, 0.0}), vec({0.0, 0.0})}, 1.0, 0.0);
  // 2 * int_0^pi sin^2 = pi
  CHECK(check_integrability(g, ms, sp, M_PI, 1e-3) == doctest::Approx(M_PI).epsilon(1e-10));
  CHECK_THROWS_AS(check_integrability(g, MarkSpace({1.0}), sp, 1.0, 0.01), DomainError);
}

TEST_CASE("norm power rule") {
  const SmoothSpace sp(2, 4, 4, 2);
  const auto f = FieldIntegrand::constant({vec({1.0, 1.0})});
  const ScalarRule g = norm_power_rule(sp, f, 2.0);
  CHECK(g.eval(0.3, 0) == doctest::Approx(std::sqrt(2.0)));
  REQUIRE(g.antiderivative);
  CHECK(g.antiderivative(2.0, 0) == doctest::Approx(2.0 * std::sqrt(2.0)));
}
