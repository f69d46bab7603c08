#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace transred {

// Path-style address into an order or word term. Component meaning depends on
// the constructor being addressed (part of a sum, slot of a stream, offset in
// a finite piece).
using Pos = std::vector<uint64_t>;

struct TrError : std::runtime_error {
  explicit TrError(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidPosition : TrError {
  explicit InvalidPosition(const std::string& w) : TrError(w) {}
};

struct NotReduced : TrError {
  explicit NotReduced(const std::string& w) : TrError(w) {}
};

struct FuelExhausted : TrError {
  explicit FuelExhausted(const std::string& w) : TrError(w) {}
};

struct UnsupportedShape : TrError {
  explicit UnsupportedShape(const std::string& w) : TrError(w) {}
};

struct ParseError : TrError {
  size_t at;
  ParseError(const std::string& w, size_t pos) : TrError(w), at(pos) {}
};

// ---------------------------------------------------------------------------
// Rationals and the fixed nat <-> Q bijection.
//
// Positive rationals are enumerated breadth-first along the Calkin-Wilf tree
// (node k has children 2k and 2k+1).  The full line interleaves signs:
//   code 0      -> 0
//   code 2k-1   -> cw(k)      (k >= 1)
//   code 2k     -> -cw(k)
// Negation is then the cheap code permutation 2k-1 <-> 2k.

struct Rat {
  int64_t num = 0;
  int64_t den = 1;  // > 0, gcd(|num|, den) = 1

  friend bool operator==(const Rat& a, const Rat& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator<(const Rat& a, const Rat& b) {
    return static_cast<__int128>(a.num) * b.den <
           static_cast<__int128>(b.num) * a.den;
  }
};

Rat ratOfCode(uint64_t code);
uint64_t codeOfRat(const Rat& q);

inline uint64_t negCode(uint64_t code) {
  if (code == 0) return 0;
  return (code % 2 == 1) ? code + 1 : code - 1;
}

int cmpRatCodes(uint64_t a, uint64_t b);

// Restriction of a Q-indexed sum to a rational interval of slot values.
struct RatWindow {
  bool hasLo = false, loOpen = true;
  Rat lo;
  bool hasHi = false, hiOpen = true;
  Rat hi;

  bool trivial() const { return !hasLo && !hasHi; }
  bool contains(uint64_t code) const {
    Rat v = ratOfCode(code);
    if (hasLo && (v < lo || (loOpen && v == lo))) return false;
    if (hasHi && (hi < v || (hiOpen && v == hi))) return false;
    return true;
  }
  RatWindow negated() const {
    RatWindow w;
    w.hasLo = hasHi;
    w.loOpen = hiOpen;
    w.lo = Rat{-hi.num, hi.den};
    w.hasHi = hasLo;
    w.hiOpen = loOpen;
    w.hi = Rat{-lo.num, lo.den};
    return w;
  }
  friend bool operator==(const RatWindow& a, const RatWindow& b) {
    if (a.hasLo != b.hasLo || a.hasHi != b.hasHi) return false;
    if (a.hasLo && (a.loOpen != b.loOpen || !(a.lo == b.lo))) return false;
    if (a.hasHi && (a.hiOpen != b.hiOpen || !(a.hi == b.hi))) return false;
    return true;
  }
  uint64_t hashInto() const {
    uint64_t h = 991;
    if (hasLo) {
      h ^= uint64_t(lo.num) * 31 + lo.den + (loOpen ? 7 : 0);
    }
    if (hasHi) {
      h ^= (uint64_t(hi.num) * 131 + hi.den + (hiOpen ? 13 : 0)) << 1;
    }
    return h;
  }
};

// ---------------------------------------------------------------------------

inline void hashMix(uint64_t& h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
}

// Saturating helpers; index arithmetic stays far below the cap at desk scale
// but rule evaluation must not overflow on adversarial CLI input.
constexpr uint64_t kIndexCap = (1ULL << 48);

inline uint64_t satAdd(uint64_t a, uint64_t b) {
  uint64_t r = a + b;
  if (r < a || r > kIndexCap) return kIndexCap;
  return r;
}

inline uint64_t satMul(uint64_t a, uint64_t b) {
  if (a != 0 && b > kIndexCap / a) return kIndexCap;
  return a * b;
}

}  // namespace transred
