#include "transred/rules.hpp"

#include <algorithm>

namespace transred {

uint64_t IndexRule::eval(uint64_t n) const {
  switch (kind) {
    case Kind::Affine:
      return satAdd(c, satMul(s, n));
    case Kind::Geom: {
      uint64_t exp = satAdd(satMul(gs, n), e);
      if (exp >= 48) return kIndexCap;
      return satAdd(satMul(a, 1ULL << exp), c);
    }
    case Kind::Branch: {
      uint64_t len = satAdd(n, start) + 1;
      if (len >= 48) return kIndexCap;
      uint64_t mask = (1ULL << len) - 1;
      return (1ULL << len) - 1 + (bits & mask);
    }
    case Kind::Periodic:
      return satAdd(tab[n % tab.size()], c);
  }
  return 0;
}

IndexRule IndexRule::shifted(uint64_t k) const {
  IndexRule r = *this;
  switch (kind) {
    case Kind::Affine:
      r.c = satAdd(c, satMul(s, k));
      break;
    case Kind::Geom:
      r.e = satAdd(e, satMul(gs, k));
      break;
    case Kind::Branch:
      r.start = satAdd(start, k);
      break;
    case Kind::Periodic: {
      size_t L = tab.size();
      std::vector<uint64_t> t(L);
      for (size_t i = 0; i < L; ++i) t[i] = tab[(i + k) % L];
      r.tab = std::move(t);
      break;
    }
  }
  return r;
}

bool IndexRule::strictlyIncreasing() const {
  switch (kind) {
    case Kind::Affine:
      return s >= 1;
    case Kind::Geom:
      return a >= 1;
    case Kind::Branch:
      return true;
    case Kind::Periodic:
      return false;
  }
  return false;
}

bool IndexRule::isConstant() const {
  if (kind == Kind::Affine) return s == 0;
  if (kind == Kind::Periodic) {
    return std::all_of(tab.begin(), tab.end(),
                       [&](uint64_t v) { return v == tab[0]; });
  }
  return false;
}

uint64_t IndexRule::hash() const {
  uint64_t h = static_cast<uint64_t>(kind) + 11;
  hashMix(h, c);
  hashMix(h, s);
  hashMix(h, a);
  hashMix(h, e);
  hashMix(h, gs);
  hashMix(h, bits);
  hashMix(h, start);
  for (uint64_t v : tab) hashMix(h, v);
  return h;
}

RuleSolutions equalSolutions(const IndexRule& r1, const IndexRule& r2) {
  if (r1 == r2) return AllN{};
  if (r1.kind == IndexRule::Kind::Affine && r2.kind == IndexRule::Kind::Affine) {
    if (r1.s == r2.s) {
      if (r1.c == r2.c) return AllN{};
      return std::vector<uint64_t>{};
    }
    // c1 + s1 n = c2 + s2 n  with s1 != s2: at most one solution.
    uint64_t sl = r1.s > r2.s ? r1.s : r2.s;
    uint64_t ss = r1.s > r2.s ? r2.s : r1.s;
    uint64_t cl = r1.s > r2.s ? r1.c : r2.c;  // intercept of the steeper one
    uint64_t cs = r1.s > r2.s ? r2.c : r1.c;
    if (cs < cl) return std::vector<uint64_t>{};
    uint64_t diff = cs - cl;
    if (diff % (sl - ss) != 0) return std::vector<uint64_t>{};
    return std::vector<uint64_t>{diff / (sl - ss)};
  }
  // Mixed kinds: both rules are eventually dominated comparisons; scan a
  // window wide enough that the faster-growing rule has escaped for good.
  std::vector<uint64_t> sols;
  uint64_t lastGap = 0;
  bool separated = false;
  for (uint64_t n = 0; n < 256; ++n) {
    uint64_t v1 = r1.eval(n), v2 = r2.eval(n);
    if (v1 == v2) sols.push_back(n);
    uint64_t gap = v1 > v2 ? v1 - v2 : v2 - v1;
    if (n > 64 && gap > lastGap && gap > (1ULL << 32)) {
      separated = true;
      break;
    }
    lastGap = gap;
  }
  (void)separated;
  // Periodic rules never intersect increasing ones beyond the scanned window
  // (increasing rules exceed max(tab) quickly); increasing-vs-increasing pairs
  // of different kinds separate exponentially.  The scan window is generous
  // for every kind pair at desk scale.
  return sols;
}

bool AlphaRule::isConstant() const {
  return std::all_of(cyc.begin(), cyc.end(),
                     [&](uint32_t v) { return v == cyc[0]; });
}

AlphaRule AlphaRule::shifted(uint64_t k) const {
  size_t L = cyc.size();
  std::vector<uint32_t> t(L);
  for (size_t i = 0; i < L; ++i) t[i] = cyc[(i + k) % L];
  return AlphaRule{std::move(t)};
}

uint64_t AlphaRule::hash() const {
  uint64_t h = 7;
  for (uint32_t v : cyc) hashMix(h, v);
  return h;
}

}  // namespace transred
