#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hetedge {

using NodeId = std::uint32_t;
using TypeIndex = std::uint32_t;
using Rng = std::mt19937_64;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input text that could not be parsed. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Artifact header/version mismatch between pipeline stages.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Numerical blow-up during training (NaN or Inf).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream seed for (master, a, b); used to key per-walk and per-stage RNGs.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b = 0) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

inline constexpr double kLogitClamp = 30.0;

/// Logistic function on a clamped input; never returns exactly 0 or 1.
inline double sigmoid(double x) noexcept {
  if (x > kLogitClamp) x = kLogitClamp;
  if (x < -kLogitClamp) x = -kLogitClamp;
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(sigmoid(x)) without cancellation, same clamp as sigmoid().
inline double log_sigmoid(double x) noexcept {
  if (x > kLogitClamp) x = kLogitClamp;
  if (x < -kLogitClamp) x = -kLogitClamp;
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

/// Shortest decimal that round-trips the double exactly.
std::string format_double(double v);

/// 64-bit FNV-1a, used for provenance hashes.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept;

std::string hex64(std::uint64_t v);

}  // namespace hetedge
