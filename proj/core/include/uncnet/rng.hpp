#pragma once

#include <cstdint>
#include <random>

namespace uncnet {

/// Deterministic random source. All variate transforms are implemented here
/// rather than with std distributions, whose output is not pinned down by
/// the standard; the same seed must produce the same stream on every
/// platform and compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1], safe as a log argument.
  double uniform_pos() { return 1.0 - uniform(); }

  /// Standard normal via Box-Muller (cosine branch only).
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang; any shape > 0.
  double gamma(double shape);

  /// Chi-squared with real-valued dof > 0.
  double chi2(double dof) { return 2.0 * gamma(0.5 * dof); }

 private:
  std::mt19937_64 gen_;
};

/// Mixes a master seed with a stream id (e.g. a time index) into an
/// independent-looking seed, so work items can be processed in any order
/// or on any worker without changing results.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace uncnet
