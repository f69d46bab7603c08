#include "transred/coi.hpp"

#include <algorithm>

namespace transred {

// --- CoiMap ----------------------------------------------------------------

CoiMap CoiMap::inverse() const {
  CoiMap r;
  for (const auto& [a, b] : pairs) r.pairs.emplace_back(b, a);
  for (const auto& t : tails) {
    TailPair s;
    s.domSeg = t.codSeg;
    s.codSeg = t.domSeg;
    s.rat = t.rat;
    s.domN0 = t.codN0;
    s.codN0 = t.domN0;
    size_t L = t.innerPerResidue.size();
    s.innerPerResidue.assign(L, {});
    for (size_t r = 0; r < L; ++r) {
      // dom slots n = domN0 + k with n % L = r map to cod slot codN0 + k;
      // re-key the inner lists by the cod residue
      size_t codResidue =
          t.rat ? r : (t.codN0 + ((r + L - (t.domN0 % L)) % L)) % L;
      for (const auto& [dr, cr] : t.innerPerResidue[r])
        s.innerPerResidue[codResidue].emplace_back(cr, dr);
    }
    r.tails.push_back(std::move(s));
  }
  return r;
}

namespace {

// split a p-index position into (segIdx, rest) against a decomposition
std::pair<size_t, Pos> splitSeg(const PDecomp& d, const Pos& p) {
  if (d.segs.size() <= 1) return {0, p};
  return {size_t(p.at(0)), Pos(p.begin() + 1, p.end())};
}

Pos joinSeg(const PDecomp& d, size_t seg, Pos rest) {
  if (d.segs.size() <= 1) return rest;
  Pos p{uint64_t(seg)};
  p.insert(p.end(), rest.begin(), rest.end());
  return p;
}

}  // namespace

namespace {

// image of a dom tail-position under a tail pair, expressed in du
std::optional<Pos> tailImage(const CoiMap::TailPair& t, const PDecomp& du,
                             uint64_t slot, uint64_t run) {
  if (!t.rat && slot < t.domN0) return std::nullopt;
  for (const auto& [dr, cr] : t.innerAt(slot)) {
    if (dr != run) continue;
    uint64_t codSlot = t.rat ? slot : t.codN0 + (slot - t.domN0);
    return joinSeg(du, t.codSeg, {codSlot, cr});
  }
  return std::nullopt;
}

}  // namespace

std::optional<Pos> CoiMap::image(const PDecomp& dw, const PDecomp& du,
                                 const Pos& p) const {
  for (const auto& [a, b] : pairs)
    if (a == p) return b;
  auto [seg, rest] = splitSeg(dw, p);
  if (rest.size() == 2) {
    for (const auto& t : tails) {
      if (t.domSeg != seg) continue;
      auto r = tailImage(t, du, rest[0], rest[1]);
      if (r) return r;
    }
  }
  return std::nullopt;
}

namespace {

IBound segLowBound(const PDecomp& d, size_t segIdx) {
  if (segIdx == 0) return IBound::negInf();
  const PSeg& prev = d.segs[segIdx - 1];
  if (prev.streamTail) return IBound::negInf();  // conservative hull widening
  return IBound::at(joinSeg(d, segIdx - 1, {prev.runs.size() - 1}), false);
}

// smallest live code of the residue class, for sampling Q-tail run counts
uint64_t findLiveCode(const PSeg& seg, uint64_t residue, uint64_t L) {
  for (uint64_t k = 0; k < 512; ++k) {
    uint64_t code = residue + k * L;
    if (seg.runCount(code) > 0) return code;
  }
  return residue;
}

IBound segHighBound(const PDecomp& d, size_t segIdx) {
  if (segIdx + 1 >= d.segs.size()) return IBound::posInf();
  const PSeg& next = d.segs[segIdx + 1];
  if (next.streamTail) return IBound::posInf();
  return IBound::at(joinSeg(d, segIdx + 1, {0}), false);
}

}  // namespace

Interval proptoViaCoi(const CoiMap& m, const PDecomp& dw, const PDecomp& du,
                      const Interval& iv) {
  Interval i = normalizeInterval(dw.pindex, iv);
  if (i.empty) return Interval::none();

  bool any = false;
  std::optional<Pos> minCod, maxCod;
  std::optional<IBound> loBound, hiBound;  // non-point bounds

  auto feed = [&](const Pos& cod) {
    any = true;
    if (!minCod || cmpPos(du.pindex, cod, *minCod) < 0) minCod = cod;
    if (!maxCod || cmpPos(du.pindex, *maxCod, cod) < 0) maxCod = cod;
  };

  for (const auto& [a, b] : m.pairs)
    if (intervalContains(dw.pindex, i, a)) feed(b);

  for (const auto& t : m.tails) {
    const PSeg& segW = dw.segs[t.domSeg];
    if (!segW.streamTail) continue;
    // clip i to the seg's slot range
    auto slotOfBound = [&](const IBound& b,
                           bool low) -> std::optional<std::pair<uint64_t, uint64_t>> {
      if (b.kind != IBound::Kind::At) return std::nullopt;
      auto [seg, rest] = splitSeg(dw, b.pos);
      if (seg != t.domSeg) return std::nullopt;
      return std::make_pair(rest[0], rest.size() > 1 ? rest[1] : 0);
    };
    // does the interval intersect this segment at all?
    {
      bool before = false, after = false;
      if (i.hi.kind == IBound::Kind::At) {
        auto [seg, rest] = splitSeg(dw, i.hi.pos);
        if (seg < t.domSeg) before = true;
      }
      if (i.lo.kind == IBound::Kind::At) {
        auto [seg, rest] = splitSeg(dw, i.lo.pos);
        if (seg > t.domSeg) after = true;
      }
      if (before || after) continue;
    }
    auto loSR = slotOfBound(i.lo, true);
    auto hiSR = slotOfBound(i.hi, false);

    if (!t.rat) {
      // omega-shaped: slots ascend with the display order
      uint64_t sLo = t.domN0;
      if (loSR) sLo = std::max(sLo, loSR->first);
      std::optional<uint64_t> sHi;
      if (hiSR) sHi = hiSR->first;
      if (sHi && *sHi < sLo) continue;
      // lowest mapped point at or after the bound
      bool found = false;
      for (uint64_t s = sLo; s < sLo + 2 * t.innerPerResidue.size() + 4; ++s) {
        if (sHi && s > *sHi) break;
        for (const auto& [dr, cr] : t.innerAt(s)) {
          if (loSR && s == loSR->first && dr < loSR->second) continue;
          if (hiSR && s == hiSR->first && dr > hiSR->second) continue;
          auto img = tailImage(t, du, s, dr);
          if (img) {
            feed(*img);
            found = true;
            break;
          }
        }
        if (found) break;
      }
      if (!found) continue;
      if (!sHi) {
        // unbounded above within the tail: the image hull reaches the cod
        // segment's upper edge
        hiBound = segHighBound(du, t.codSeg);
        continue;
      }
      // highest mapped point at or below the bound
      for (uint64_t s = *sHi + 1; s-- > sLo;) {
        bool got = false;
        for (auto it = t.innerAt(s).rbegin(); it != t.innerAt(s).rend(); ++it) {
          auto [dr, cr] = *it;
          if (loSR && s == loSR->first && dr < loSR->second) continue;
          if (hiSR && s == hiSR->first && dr > hiSR->second) continue;
          auto img = tailImage(t, du, s, dr);
          if (img) {
            feed(*img);
            got = true;
            break;
          }
        }
        if (got || s == sLo) break;
      }
      continue;
    }

    // Q-indexed: cod slots carry the same codes, so value bounds transfer
    auto transfer = [&](const IBound& b, bool low) -> IBound {
      if (b.kind != IBound::Kind::At) return b;
      auto sr = slotOfBound(b, low);
      if (!sr) {
        // the bound lies in another segment: the tail contributes up to its
        // own edge
        return low ? segLowBound(du, t.codSeg) : segHighBound(du, t.codSeg);
      }
      uint64_t q = sr->first;
      // mapped point inside the boundary block when present
      for (const auto& [dr, cr] : t.innerAt(q)) {
        bool inside = low ? dr >= sr->second : dr <= sr->second;
        if (inside) {
          auto img = tailImage(t, du, q, dr);
          if (img) {
            feed(*img);
            return IBound::at(*img, true);
          }
        }
      }
      // otherwise the hull approaches the same rational from inside
      Pos edge = joinSeg(du, t.codSeg, {q, sr->second});
      return IBound::at(edge, false);
    };
    IBound lo = transfer(i.lo, true);
    IBound hi = transfer(i.hi, false);
    // nonemptiness: there are mapped points in any nonempty open q-range
    any = true;
    if (!loBound) loBound = lo;
    if (!hiBound) hiBound = hi;
  }

  if (!any) return Interval::none();
  Interval out;
  out.lo = loBound ? *loBound
                   : (minCod ? IBound::at(*minCod, true) : IBound::negInf());
  out.hi = hiBound ? *hiBound
                   : (maxCod ? IBound::at(*maxCod, true) : IBound::posInf());
  if (minCod && loBound && loBound->kind == IBound::Kind::At &&
      cmpPos(du.pindex, *minCod, loBound->pos) < 0)
    out.lo = IBound::at(*minCod, true);
  if (maxCod && hiBound && hiBound->kind == IBound::Kind::At &&
      cmpPos(du.pindex, hiBound->pos, *maxCod) < 0)
    out.hi = IBound::at(*maxCod, true);
  return normalizeInterval(du.pindex, out);
}

std::vector<Interval> coiDecompose(const CoiMap& m, const PDecomp& dw,
                                   const PDecomp& du,
                                   const std::vector<Interval>& parts) {
  std::vector<Interval> gaps;
  std::vector<Interval> hulls;
  for (const auto& p : parts) hulls.push_back(proptoViaCoi(m, dw, du, p));
  // gap before the first hull and after the last are taken inside the hull of
  // the whole union; interior gaps sit between consecutive hulls
  for (size_t j = 0; j + 1 < hulls.size(); ++j) {
    Interval g = Interval::all();
    if (hulls[j].empty || hulls[j + 1].empty) {
      gaps.push_back(Interval::none());
      continue;
    }
    if (hulls[j].hi.kind == IBound::Kind::At)
      g.lo = IBound::at(hulls[j].hi.pos, !hulls[j].hi.closed);
    if (hulls[j + 1].lo.kind == IBound::Kind::At)
      g.hi = IBound::at(hulls[j + 1].lo.pos, !hulls[j + 1].lo.closed);
    gaps.push_back(normalizeInterval(du.pindex, g));
  }
  return gaps;
}

bool coiWellFormed(const CoiTriple& t) {
  PDecomp dw = pdecompose(t.w);
  PDecomp du = pdecompose(t.u);
  for (const auto& [a, b] : t.iota.pairs) {
    if (!validPos(dw.pindex, a) || !validPos(du.pindex, b)) return false;
  }
  // every infinite segment must carry a tail pairing for the trace to stay
  // close
  auto sideOk = [&](const PDecomp& d, bool domSide) {
    for (size_t si = 0; si < d.segs.size(); ++si) {
      if (!d.segs[si].streamTail) continue;
      bool covered = false;
      for (const auto& tp : t.iota.tails) {
        size_t seg = domSide ? tp.domSeg : tp.codSeg;
        if (seg != si) continue;
        bool nonempty = false;
        for (const auto& inner : tp.innerPerResidue)
          if (!inner.empty()) nonempty = true;
        if (nonempty) covered = true;
      }
      if (!covered) return false;
    }
    return true;
  };
  return sideOk(dw, true) && sideOk(du, false);
}

CoiMap identityCoi(const PDecomp& d) {
  CoiMap m;
  for (size_t si = 0; si < d.segs.size(); ++si) {
    const PSeg& seg = d.segs[si];
    if (!seg.streamTail) {
      for (uint64_t j = 0; j < seg.runs.size(); ++j) {
        Pos p = joinSeg(d, si, {j});
        m.pairs.emplace_back(p, p);
      }
      continue;
    }
    CoiMap::TailPair tp;
    tp.domSeg = tp.codSeg = si;
    tp.rat = seg.s.shape == SeqShape::Rat;
    tp.domN0 = tp.codN0 = 0;
    uint64_t L = seg.s.tail.period();
    tp.innerPerResidue.assign(L, {});
    for (uint64_t r = 0; r < L; ++r) {
      uint64_t rep = tp.rat ? r : seg.from + r;
      // the residue dispatch of relative slots n = r mod L lands on absolute
      // residue (from + r) mod L for omega tails and on the code for rat
      uint64_t cnt = seg.runCount(tp.rat ? findLiveCode(seg, r, L) : rep);
      for (uint64_t j = 0; j < cnt; ++j)
        tp.innerPerResidue[r].emplace_back(j, j);
    }
    m.tails.push_back(std::move(tp));
  }
  return m;
}

// --- coherent collections -----------------------------------------------

PfineBasis CoherentCollection::wBasis() const {
  std::vector<WordPtr> gens;
  for (const auto& t : triples) gens.push_back(t.w);
  return PfineBasis::of(std::move(gens));
}

PfineBasis CoherentCollection::uBasis() const {
  std::vector<WordPtr> gens;
  for (const auto& t : triples) gens.push_back(t.u);
  return PfineBasis::of(std::move(gens));
}

ClassEq classesEqual(const WordPtr& a, const WordPtr& b, const Bounds& bounds) {
  WordPtr diff;
  try {
    diff = red(wConcat({a, wordInverse(b)}));
  } catch (const FuelExhausted&) {
    return ClassEq::Unknown;
  }
  KernelCertificate cert = kernelTest(diff, bounds);
  switch (cert.status) {
    case KernelCertificate::Status::Trivial:
      return ClassEq::Equal;
    case KernelCertificate::Status::Nontrivial:
      return ClassEq::Distinct;
    default:
      return ClassEq::Unknown;
  }
}

CoherenceReport checkCoherence(const CoherentCollection& c, const Bounds& bounds) {
  CoherenceReport rep;
  std::vector<PDecomp> dws, dus;
  for (const auto& t : c.triples) {
    dws.push_back(pdecompose(t.w));
    dus.push_back(pdecompose(t.u));
  }
  auto checkSide = [&](bool wSide) {
    for (size_t x0 = 0; x0 < c.triples.size() && rep.coherent; ++x0) {
      for (size_t x1 = 0; x1 < c.triples.size() && rep.coherent; ++x1) {
        const PDecomp& a = wSide ? dws[x0] : dus[x0];
        const PDecomp& b = wSide ? dws[x1] : dus[x1];
        auto matches = enumerateChunkMatches(a, b, bounds, bounds.maxMatches);
        for (const auto& mt : matches) {
          if (rep.checked.size() + rep.inconclusive.size() >= bounds.maxMatches)
            break;
          // skip the trivial identity alignment
          if (x0 == x1 && mt.sign > 0) {
            auto sameB = [&](const IBound& x, const IBound& y) {
              if (x.kind != y.kind) return false;
              if (x.kind != IBound::Kind::At) return true;
              return x.pos == y.pos && x.closed == y.closed;
            };
            if (sameB(mt.i0.lo, mt.i1.lo) && sameB(mt.i0.hi, mt.i1.hi)) continue;
          }
          const CoiTriple& t0 = c.triples[x0];
          const CoiTriple& t1 = c.triples[x1];
          CoiMap m0 = wSide ? t0.iota : t0.iota.inverse();
          CoiMap m1 = wSide ? t1.iota : t1.iota.inverse();
          const PDecomp& img0 = wSide ? dus[x0] : dws[x0];
          const PDecomp& img1 = wSide ? dus[x1] : dws[x1];
          Interval h0 = proptoViaCoi(m0, a, img0, mt.i0);
          Interval h1 = proptoViaCoi(m1, b, img1, mt.i1);
          WordPtr A = img0.chunk(h0);
          WordPtr B = img1.chunk(h1);
          if (mt.sign < 0) B = wordInverse(B);
          ChunkMatch cm{x0, x1, mt.sign, mt.i0, mt.i1};
          switch (classesEqual(A, B, bounds)) {
            case ClassEq::Equal:
              rep.checked.push_back(cm);
              break;
            case ClassEq::Distinct:
              rep.coherent = false;
              rep.violation = cm;
              rep.violationDiff = red(wConcat({A, wordInverse(B)}));
              break;
            case ClassEq::Unknown:
              rep.inconclusive.push_back(cm);
              break;
          }
          if (!rep.coherent) break;
        }
      }
    }
  };
  checkSide(true);
  if (rep.coherent) checkSide(false);
  return rep;
}

// --- induced homomorphisms ------------------------------------------------

HomValue evalHomWith(const InducedHom& h, const WordPtr& w,
                     const PfineDecomposition& dec, const Bounds& bounds) {
  HomValue out;
  out.inPfine = true;
  const CoherentCollection& c = *h.coll;
  std::vector<PDecomp> dsrc, dimg;
  for (const auto& t : c.triples) {
    dsrc.push_back(pdecompose(h.forward ? t.w : t.u));
    dimg.push_back(pdecompose(h.forward ? t.u : t.w));
  }
  PDecomp dw = pdecompose(w);
  std::vector<WordPtr> factors;
  for (const auto& piece : dec.pieces) {
    if (piece.tagA) continue;
    // drop singleton intervals
    auto elems = enumerateInterval(dw.pindex, piece.interval, 2);
    if (elems && elems->size() <= 1) continue;
    const CoiTriple& t = c.triples[piece.gen];
    CoiMap m = h.forward ? t.iota : t.iota.inverse();
    Interval hull =
        proptoViaCoi(m, dsrc[piece.gen], dimg[piece.gen], piece.genInterval);
    WordPtr val = dimg[piece.gen].chunk(hull);
    if (piece.sign < 0) val = wordInverse(val);
    factors.push_back(val);
  }
  out.rep = red(wConcat(std::move(factors)));
  return out;
}

HomValue evalHom(const InducedHom& h, const WordPtr& w, const Bounds& bounds) {
  const CoherentCollection& c = *h.coll;
  PfineBasis basis = h.forward ? c.wBasis() : c.uBasis();
  auto dec = pfineDecomposeOne(w, basis, bounds);
  if (!dec) return HomValue{};
  return evalHomWith(h, w, *dec, bounds);
}

RoundTripReport verifyMutualInverse(const CoherentCollection& c,
                                    const std::vector<WordPtr>& samples,
                                    const Bounds& bounds) {
  RoundTripReport rep;
  InducedHom fwd{&c, true}, bwd{&c, false};
  for (const auto& s : samples) {
    HomValue a = evalHom(fwd, s, bounds);
    if (!a.inPfine) {
      ++rep.unknown;
      continue;
    }
    HomValue b = evalHom(bwd, a.rep, bounds);
    if (!b.inPfine) {
      ++rep.unknown;
      continue;
    }
    switch (classesEqual(b.rep, s, bounds)) {
      case ClassEq::Equal:
        ++rep.passed;
        break;
      case ClassEq::Distinct:
        ++rep.failed;
        rep.failures.push_back(s);
        break;
      case ClassEq::Unknown:
        ++rep.unknown;
        break;
    }
  }
  return rep;
}

}  // namespace transred
