#pragma once

#include <variant>

#include "transred/base.hpp"

namespace transred {

// Schematic index rules n -> nat used for letter subscripts, block levels and
// per-block counts.  Affine/Geom/Branch are strictly increasing (when s,a >= 1)
// and serve as depth witnesses; Periodic is only valid where monotonicity is
// not required (shape counts).
struct IndexRule {
  enum class Kind : uint8_t { Affine, Geom, Branch, Periodic };
  Kind kind = Kind::Affine;

  // Affine: c + s*n
  // Geom:   a * 2^(gs*n + e) + c     (a >= 1, gs >= 1)
  // Branch: 2^(n+start+1) - 1 + (bits mod 2^(n+start+1))
  // Periodic: tab[n mod tab.size()] + c
  uint64_t c = 0, s = 0, a = 1, e = 0, gs = 1;
  uint64_t bits = 0, start = 0;
  std::vector<uint64_t> tab;

  static IndexRule constant(uint64_t v) { return IndexRule{Kind::Affine, v, 0}; }
  static IndexRule affine(uint64_t c_, uint64_t s_) {
    return IndexRule{Kind::Affine, c_, s_};
  }
  static IndexRule geom(uint64_t a_, uint64_t e_, uint64_t c_,
                        uint64_t gs_ = 1) {
    IndexRule r;
    r.kind = Kind::Geom;
    r.a = a_;
    r.e = e_;
    r.c = c_;
    r.gs = gs_ ? gs_ : 1;
    return r;
  }
  static IndexRule branch(uint64_t bits_, uint64_t start_ = 0) {
    IndexRule r;
    r.kind = Kind::Branch;
    r.bits = bits_;
    r.start = start_;
    return r;
  }
  static IndexRule periodic(std::vector<uint64_t> tab_, uint64_t c_ = 0) {
    IndexRule r;
    r.kind = Kind::Periodic;
    r.tab = std::move(tab_);
    r.c = c_;
    return r;
  }

  IndexRule() = default;
  IndexRule(Kind k, uint64_t c_, uint64_t s_) : kind(k), c(c_), s(s_) {}

  uint64_t eval(uint64_t n) const;
  IndexRule shifted(uint64_t k) const;  // n -> eval(n + k)
  bool strictlyIncreasing() const;
  bool isConstant() const;

  friend bool operator==(const IndexRule& x, const IndexRule& y) {
    return x.kind == y.kind && x.c == y.c && x.s == y.s && x.a == y.a &&
           x.e == y.e && x.gs == y.gs && x.bits == y.bits &&
           x.start == y.start && x.tab == y.tab;
  }
  uint64_t hash() const;
};

// Solutions of eval1(n) == eval2(n) over n in omega.
struct AllN {};
using RuleSolutions = std::variant<AllN, std::vector<uint64_t>>;
RuleSolutions equalSolutions(const IndexRule& r1, const IndexRule& r2);

// alpha subscript as a function of the block slot: cycles a finite vector.
struct AlphaRule {
  std::vector<uint32_t> cyc{0};

  static AlphaRule constant(uint32_t a) { return AlphaRule{{a}}; }
  uint32_t eval(uint64_t n) const { return cyc[n % cyc.size()]; }
  bool isConstant() const;
  AlphaRule shifted(uint64_t k) const;

  friend bool operator==(const AlphaRule& x, const AlphaRule& y) {
    return x.cyc == y.cyc;
  }
  uint64_t hash() const;
};

}  // namespace transred
