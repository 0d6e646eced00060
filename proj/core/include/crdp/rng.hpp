#pragma once

#include <cstdint>
#include <span>

namespace crdp {

// splitmix64, as published: a 64-bit state advanced by the golden-ratio
// increment, scrambled by two xor-multiply rounds. Chosen because the whole
// generator fits in a dozen lines, so the stream is reproducible from this
// file alone, on any platform, forever.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), using the top 53 bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Inverse-CDF draw; one next_unit() per call regardless of outcome.
  int sample(std::span<const double> probs) {
    const double u = next_unit();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  static constexpr const char* name() { return "splitmix64"; }

 private:
  std::uint64_t state_;
};

}  // namespace crdp
