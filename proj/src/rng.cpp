#include "csma/rng.hpp"

#include <cmath>

namespace csma {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(mix64(mix64(seed) ^ a) + b * kGolden);
}

std::uint64_t stream_id(StreamKind kind, std::size_t cls) noexcept {
  return (static_cast<std::uint64_t>(kind) << 32) | static_cast<std::uint64_t>(cls);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(derive_seed(seed, stream, 0x5eed)) {}

CounterRng::result_type CounterRng::operator()() noexcept {
  return mix64(key_ ^ mix64(counter_++));
}

double CounterRng::uniform() noexcept {
  // 53 random bits, shifted half a step off zero.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::exponential(double rate) noexcept {
  return -std::log(uniform()) / rate;
}

std::size_t CounterRng::below(std::size_t n) noexcept {
  return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
}

}  // namespace csma
