#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "gnisim/errors.hpp"
#include "gnisim/rng.hpp"

namespace gnisim {

/// Draws of rho-correlated standard Gaussian pairs (X, Y) in R^dim, each
/// coordinate pair independently correlated. Pair i is a pure function of
/// (seed, i), so any thread partition reproduces the same stream.
class GaussianPairSampler {
 public:
  GaussianPairSampler(double rho, int dim, std::uint64_t seed)
      : rho_(rho), dim_(dim), seed_(seed) {
    require(rho >= -1.0 && rho <= 1.0, errc::invalid_rho, "correlation outside [-1,1]");
    require(dim >= 1, errc::invalid_input, "dim < 1");
  }

  double rho() const { return rho_; }
  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }

  void pair(std::uint64_t index, std::span<double> x, std::span<double> y) const {
    CounterRng rng(seed_, substream(0, kPairTag, index));
    double c = std::sqrt(std::max(0.0, 1.0 - rho_ * rho_));
    for (int j = 0; j < dim_; ++j) {
      double u = rng.next_normal();
      double v = rng.next_normal();
      x[j] = u;
      y[j] = rho_ == 1.0 ? u : (rho_ == -1.0 ? -u : rho_ * u + c * v);
    }
  }

  /// N pairs appended row-major into xs, ys (each N x dim).
  void sample_pairs(std::uint64_t count, std::vector<double>& xs, std::vector<double>& ys) const {
    require(count >= 1, errc::invalid_samples, "sample_pairs: count < 1");
    xs.resize(count * dim_);
    ys.resize(count * dim_);
    for (std::uint64_t i = 0; i < count; ++i)
      pair(i, std::span<double>(xs.data() + i * dim_, dim_),
           std::span<double>(ys.data() + i * dim_, dim_));
  }

 private:
  static constexpr std::uint64_t kPairTag = 0x70616972;  // "pair"

  double rho_;
  int dim_;
  std::uint64_t seed_;
};

/// Single-stream standard Gaussian vectors, index-addressable like the pair
/// sampler.
inline void gaussian_vector(std::uint64_t seed, std::uint64_t stream, std::uint64_t index, std::span<double> x) {
  CounterRng rng(seed, substream(stream, 0x676e, index));
  for (double& v : x) v = rng.next_normal();
}

}  // namespace gnisim
