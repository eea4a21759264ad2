#pragma once

#include <cstddef>
#include <cstdint>

namespace csma {

/// Counter-based random stream. Output i of a stream is a pure function of
/// (key, i), so streams can be created anywhere without coordination and a
/// run is reproducible from its master seed alone.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  /// Exponential variate with the given rate (rate > 0).
  double exponential(double rate) noexcept;
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n) noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent seed from a parent seed and two labels.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// Event types that own a dedicated random stream.
enum class StreamKind : std::uint64_t {
  clock = 1,
  select = 2,
  arrival = 3,
  departure = 4,
  bootstrap = 5,
};

/// Stream id for a (kind, class) pair. Class-independent kinds use cls = 0.
std::uint64_t stream_id(StreamKind kind, std::size_t cls = 0) noexcept;

}  // namespace csma
