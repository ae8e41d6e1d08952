#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <random>
#include <string_view>

#include "irssec/types.hpp"

namespace irssec {

// All randomness flows through mt19937_64 instances whose seeds are derived
// with splitmix64, so every named stream (a channel link, an initial point,
// a Monte-Carlo trial) is independent of draw order elsewhere.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t value) {
  value += 0x9E3779B97F4A7C15ULL;
  value = (value ^ (value >> 30)) * 0xBF58476D1CE4E5B9ULL;
  value = (value ^ (value >> 27)) * 0x94D049BB133111EBULL;
  return value ^ (value >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ULL));
  return h;
}

// Stable 64-bit key for a double (sweep values feed into seed derivation).
inline std::uint64_t double_key(double value) {
  if (value == 0.0) value = 0.0;  // fold -0 onto +0
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(value));
  std::memcpy(&bits, &value, sizeof(bits));
  return bits;
}

// FNV-1a; used to fold short identifiers (solver names, link names) into keys.
constexpr std::uint64_t string_key(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Circular CN(0,1): (g_r + j g_i)/sqrt(2), g_r, g_i ~ N(0,1).
template <typename Real = double>
CMatrix<Real> complex_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<Real> normal(Real(0), Real(1));
  const Real scale = Real(1) / std::sqrt(Real(2));
  CMatrix<Real> out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Real re = normal(rng);
      const Real im = normal(rng);
      out(i, j) = Complex<Real>(re * scale, im * scale);
    }
  return out;
}

}  // namespace irssec
