#pragma once

// YAML experiment configuration (schema "jumpconv/1"). Unknown keys are
// errors; every diagnostic carries the file position of the offending node.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "jumpconv/integrand.hpp"
#include "jumpconv/sconv.hpp"
#include "jumpconv/sgp.hpp"

namespace jumpconv {

inline constexpr const char* config_schema = "jumpconv/1";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SampleSection {
  std::size_t n_paths = 1;
  /// Also write the convolution path of each sample.
  bool convolution = false;
};

struct VerifySection {
  /// thm4_6, thm4_9, cor4_10, stopped, higher_moment, ito_isometry,
  /// layer_cake, step_approx.
  std::vector<std::string> modes;
  std::vector<double> q_prime;
  std::size_t n_paths = 1000;
  std::optional<double> t_eval;
  std::optional<double> lambda;
  std::optional<int> moment_level;
  std::size_t layer_cake_levels = 200;
  int step_refinements = 6;
};

struct SweepSection {
  std::vector<std::pair<std::string, Generator>> generators;
  std::vector<std::pair<std::string, FieldIntegrand>> integrands;
  std::vector<double> q_prime;
  std::vector<double> p;
  std::string mode = "thm4_9";
  std::size_t n_paths = 1000;
  std::optional<double> t_eval;
};

struct RunConfig {
  std::string source;
  std::string id = "scenario";
  std::optional<std::uint64_t> seed;
  double horizon = 1.0;
  std::optional<MarkSpace> marks;
  std::optional<SmoothSpace> space;
  std::optional<Generator> generator;
  std::optional<FieldIntegrand> integrand;
  GridSpec grid;
  QuadratureConfig quadrature;
  std::optional<SampleSection> sample;
  std::optional<VerifySection> verify;
  std::optional<SweepSection> sweep;

  /// Builds and certifies the scenario; ConfigError if a part is missing.
  ConvolutionScenario scenario() const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& source = "<string>");

}  // namespace jumpconv
