#include "transred/pdecomp.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

namespace transred {

namespace {

std::optional<uint64_t> letterKeysAgree(const WordPtr& w) {
  // single key over all letters, computed structurally; nullopt if mixed
  std::optional<uint64_t> key;
  auto meet = [&](uint64_t k) {
    if (!key) {
      key = k;
      return true;
    }
    return *key == k;
  };
  std::function<bool(const WordPtr&)> go = [&](const WordPtr& v) -> bool {
    switch (v->kind) {
      case Word::Kind::Lit:
        for (const auto& l : v->letters)
          if (!meet(l.pureKey())) return false;
        return true;
      case Word::Kind::Concat:
        for (const auto& p : v->parts)
          if (!go(p)) return false;
        return true;
      case Word::Kind::Stream: {
        for (const auto& atoms : v->stream.tail.atomsPerResidue) {
          for (const auto& a : atoms) {
            switch (a.kind) {
              case AtomTpl::Kind::Letters:
                for (const auto& t : a.letters) {
                  if (t.fam == Family::HA) return false;  // idx diverges
                  if (!t.alpha.isConstant()) return false;
                  if (!meet(gsKey(t.alpha.eval(0)))) return false;
                }
                break;
              case AtomTpl::Kind::QPure:
                if (a.fam == Family::HA) return false;
                if (!a.alpha.isConstant()) return false;
                if (!meet(gsKey(a.alpha.eval(0)))) return false;
                break;
              case AtomTpl::Kind::Ramp:
                return false;
            }
          }
        }
        for (const auto& [k, b] : v->stream.except)
          if (!b->isE() && !go(b)) return false;
        return true;
      }
    }
    return true;
  };
  if (!go(w)) return std::nullopt;
  return key;
}

}  // namespace

std::optional<uint64_t> pureKeyOf(const WordPtr& w) {
  if (w->isE()) return std::nullopt;
  return letterKeysAgree(w);
}

// --- run templates of a refined tail -----------------------------------

namespace {

struct RunTpl {
  // a run inside one block: either a group of letter templates with one key,
  // a QPure atom, or one ramp letter (handled separately)
  enum class Kind : uint8_t { Letters, QPure } kind = Kind::Letters;
  std::vector<LetterTpl> letters;
  AtomTpl qpure;
  bool keyIsRule = false;   // HA letters: key = idx rule value
  uint64_t constKey = 0;    // GS: fixed key after refinement
  IndexRule keyRule;        // HA

  uint64_t keyAt(uint64_t n) const {
    return keyIsRule ? haKey(keyRule.eval(n)) : constKey;
  }
  WordPtr wordAt(uint64_t n) const {
    if (kind == Kind::QPure) return qpure.eval(n);
    std::vector<Letter> ls;
    for (const auto& t : letters) {
      Letter l = t.eval(n);
      for (uint64_t r = 0; r < t.repeat; ++r) ls.push_back(l);
    }
    return wLit(std::move(ls));
  }
};

struct ResidueRuns {
  bool ramp = false;
  uint64_t rampOff = 0;
  std::vector<RunTpl> runs;

  uint64_t count(uint64_t n) const {
    return ramp ? n + rampOff + 1 : runs.size();
  }
};

// Key of a letter template at a representative slot of its residue class.
uint64_t tplKey(const LetterTpl& t, uint64_t rep) {
  if (t.fam == Family::GS) return gsKey(t.alpha.eval(rep));
  return 0;  // HA keys are rule-determined; callers use rule equality
}

bool sameRunKey(const LetterTpl& a, const LetterTpl& b, uint64_t rep) {
  if (a.fam != b.fam) return false;
  if (a.fam == Family::GS)
    return a.alpha.eval(rep) == b.alpha.eval(rep);
  return a.idx == b.idx;
}

// Split the atoms of one residue into run templates; `rep` is any slot of the
// residue class (alpha values are constant along it after refinement).
ResidueRuns residueRuns(const std::vector<AtomTpl>& atoms, uint64_t rep) {
  ResidueRuns out;
  if (atoms.size() == 1 && atoms[0].kind == AtomTpl::Kind::Ramp) {
    out.ramp = true;
    out.rampOff = atoms[0].rampOff;
    return out;
  }
  for (const auto& a : atoms) {
    switch (a.kind) {
      case AtomTpl::Kind::Letters: {
        for (const auto& t : a.letters) {
          bool merged = false;
          if (!out.runs.empty() &&
              out.runs.back().kind == RunTpl::Kind::Letters &&
              !out.runs.back().letters.empty() &&
              sameRunKey(out.runs.back().letters.back(), t, rep)) {
            out.runs.back().letters.push_back(t);
            merged = true;
          }
          if (!merged) {
            RunTpl r;
            r.kind = RunTpl::Kind::Letters;
            r.letters = {t};
            if (t.fam == Family::GS) {
              r.constKey = tplKey(t, rep);
            } else {
              r.keyIsRule = true;
              r.keyRule = t.idx;
            }
            out.runs.push_back(std::move(r));
          }
        }
        break;
      }
      case AtomTpl::Kind::QPure: {
        if (a.fam == Family::HA)
          throw UnsupportedShape("q-pure atoms are a-alphabet only");
        bool merged = false;
        if (!out.runs.empty() && out.runs.back().kind == RunTpl::Kind::Letters &&
            !out.runs.back().keyIsRule &&
            out.runs.back().constKey == gsKey(a.alpha.eval(rep)))
          merged = true;  // adjacent same-alpha material would merge
        if (merged)
          throw UnsupportedShape("q-pure atom adjacent to same-alpha letters");
        RunTpl r;
        r.kind = RunTpl::Kind::QPure;
        r.qpure = a;
        r.constKey = gsKey(a.alpha.eval(rep));
        out.runs.push_back(std::move(r));
        break;
      }
      case AtomTpl::Kind::Ramp:
        throw UnsupportedShape("ramp atom mixed with other atoms in a block");
    }
  }
  return out;
}

uint64_t refinedPeriod(const TailRule& tail) {
  uint64_t L = tail.period();
  for (const auto& atoms : tail.atomsPerResidue) {
    for (const auto& a : atoms) {
      if (a.kind == AtomTpl::Kind::Letters) {
        for (const auto& t : a.letters)
          if (t.fam == Family::GS) L = std::lcm(L, (uint64_t)t.alpha.cyc.size());
      } else if (a.kind == AtomTpl::Kind::QPure) {
        L = std::lcm(L, (uint64_t)a.alpha.cyc.size());
      }
    }
  }
  if (L > 64) throw UnsupportedShape("refined tail period too large");
  return L;
}

TailRule refineTail(const TailRule& tail, uint64_t L) {
  TailRule out;
  out.atomsPerResidue.assign(L, {});
  for (uint64_t r = 0; r < L; ++r)
    out.atomsPerResidue[r] = tail.atomsAt(r);
  return out;
}

// The key of the first/last run of block n (nullopt when the block is empty).
std::optional<uint64_t> edgeKey(const StreamData& s,
                                const std::vector<ResidueRuns>& rr, uint64_t n,
                                bool first) {
  auto it = s.except.find(n);
  WordPtr b;
  if (it != s.except.end()) {
    b = it->second;
  } else {
    const auto& res = rr[n % rr.size()];
    if (res.ramp) {
      uint64_t m = n + res.rampOff;
      return haKey(first ? m * (m + 1) / 2 : m * (m + 1) / 2 + m);
    }
    if (res.runs.empty()) return std::nullopt;
    const RunTpl& run = first ? res.runs.front() : res.runs.back();
    return run.keyAt(n);
  }
  if (b->isE()) return std::nullopt;
  // explicit block: inspect its first/last letter key structurally via a
  // generous projection
  FiniteWord ls = project(b, kIndexCap - 1);
  if (ls.empty()) return std::nullopt;
  return first ? ls.front().pureKey() : ls.back().pureKey();
}

void collectRunsOf(const WordPtr& w, std::vector<PSeg>& segs);

void pushRun(std::vector<PSeg>& segs, uint64_t key, const WordPtr& w) {
  if (w->isE()) return;
  if (!segs.empty() && !segs.back().streamTail && !segs.back().runs.empty() &&
      segs.back().runs.back().key == key) {
    segs.back().runs.back().word =
        wConcat({segs.back().runs.back().word, w});
    return;
  }
  if (segs.empty() || segs.back().streamTail) segs.push_back(PSeg{});
  segs.back().runs.push_back(PureRun{key, w});
}

void collectLit(const WordPtr& w, std::vector<PSeg>& segs) {
  size_t i = 0;
  while (i < w->letters.size()) {
    uint64_t key = w->letters[i].pureKey();
    size_t j = i;
    while (j < w->letters.size() && w->letters[j].pureKey() == key) ++j;
    pushRun(segs, key,
            wLit(std::vector<Letter>(w->letters.begin() + i,
                                     w->letters.begin() + j)));
    i = j;
  }
}

void collectStream(const WordPtr& w, std::vector<PSeg>& segs) {
  StreamData s = w->stream;
  // single-key streams form one run together with same-key neighbours
  if (auto key = letterKeysAgree(w)) {
    if (key) {
      pushRun(segs, *key, w);
      return;
    }
  }
  uint64_t L = refinedPeriod(s.tail);
  s.tail = refineTail(s.tail, L);
  std::vector<ResidueRuns> rr;
  for (uint64_t r = 0; r < L; ++r)
    rr.push_back(residueRuns(s.tail.atomsPerResidue[r], r));

  if (s.shape == SeqShape::Rat) {
    // no adjacency between blocks; require live residues to be dense
    std::set<uint64_t> live;
    for (uint64_t r = 0; r < L; ++r)
      if (rr[r].count(r) > 0 || rr[r].ramp) live.insert(r);
    if (L > 1 && !ratClassSetDense(live, L))
      throw UnsupportedShape("sparse live residues in a Q-indexed tail");
    PSeg seg;
    seg.streamTail = true;
    seg.s = s;
    seg.from = 0;
    segs.push_back(std::move(seg));
    return;
  }

  // omega / omega*: materialize the exception region; check boundary merges
  uint64_t cut = s.except.empty() ? 0 : s.maxExceptSlot() + 1;
  for (uint64_t guard = 0; guard < 128; ++guard) {
    bool merge = false;
    // boundary between consecutive rule blocks beyond the cut
    for (uint64_t r = 0; r < L && !merge; ++r) {
      uint64_t n = cut + r;
      auto lk = edgeKey(s, rr, n, false);
      auto fk = edgeKey(s, rr, n + 1, true);
      if (lk && fk && *lk == *fk) merge = true;
      // HA rule keys: also test rule-level equality across the boundary
    }
    if (!merge) break;
    // grow the explicit region by one block and retry; the alternating tails
    // our constructions produce never loop here
    ++cut;
    if (guard == 127)
      throw UnsupportedShape("persistent pure-run merges across tail blocks");
  }

  std::vector<std::pair<uint64_t, WordPtr>> explicitBlocks;
  for (uint64_t n = 0; n < cut; ++n) explicitBlocks.emplace_back(n, s.block(n));

  auto emitTail = [&](uint64_t from) {
    PSeg seg;
    seg.streamTail = true;
    StreamData core;
    core.shape = s.shape;
    core.tail = s.tail;
    seg.s = std::move(core);
    seg.from = from;
    segs.push_back(std::move(seg));
  };

  if (s.shape == SeqShape::Omega) {
    for (auto& [n, b] : explicitBlocks) collectRunsOf(b, segs);
    // boundary between the explicit region and the first core block
    uint64_t from = cut;
    for (uint64_t guard = 0; guard < 128; ++guard) {
      auto fk = edgeKey(s, rr, from, true);
      if (!segs.empty() && !segs.back().streamTail && fk &&
          !segs.back().runs.empty() && segs.back().runs.back().key == *fk) {
        collectRunsOf(s.block(from), segs);
        ++from;
        continue;
      }
      break;
    }
    emitTail(from);
  } else {
    // omega*: the tail sits to the left, explicit blocks descend to slot 0
    uint64_t from = cut;
    emitTail(from);
    std::sort(explicitBlocks.begin(), explicitBlocks.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    for (auto& [n, b] : explicitBlocks) collectRunsOf(b, segs);
    // a merge between the tail's right edge and the first explicit block is a
    // shape we reject rather than mis-decompose
    if (!explicitBlocks.empty()) {
      auto lk = edgeKey(s, rr, cut, false);
      FiniteWord first = project(explicitBlocks.front().second, kIndexCap - 1);
      if (lk && !first.empty() && *lk == first.front().pureKey())
        throw UnsupportedShape("pure-run merge at an omega* tail edge");
    }
  }
}

void collectRunsOf(const WordPtr& w, std::vector<PSeg>& segs) {
  switch (w->kind) {
    case Word::Kind::Lit:
      collectLit(w, segs);
      return;
    case Word::Kind::Concat:
      for (const auto& p : w->parts) collectRunsOf(p, segs);
      return;
    case Word::Kind::Stream:
      collectStream(w, segs);
      return;
  }
}

}  // namespace

// --- PSeg helpers ------------------------------------------------------

std::vector<PureRun> PSeg::blockRuns(uint64_t slot) const {
  std::vector<PureRun> out;
  auto it = s.except.find(slot);
  if (it != s.except.end()) {
    std::vector<PSeg> sub;
    collectRunsOf(it->second, sub);
    for (auto& sg : sub) {
      if (sg.streamTail)
        throw UnsupportedShape("stream tail inside an exception block run");
      for (auto& r : sg.runs) out.push_back(r);
    }
    return out;
  }
  if (s.shape == SeqShape::Rat && !s.window.trivial() && !s.window.contains(slot))
    return out;
  uint64_t arg = (s.shape == SeqShape::Rat && s.argPerm) ? negCode(slot) : slot;
  ResidueRuns rr = residueRuns(s.tail.atomsAt(arg), arg);
  if (rr.ramp) {
    uint64_t m = arg + rr.rampOff;
    uint64_t base = m * (m + 1) / 2;
    for (uint64_t j = 0; j <= m; ++j)
      out.push_back(PureRun{haKey(base + j), wLit({ha(base + j)})});
    return out;
  }
  for (const auto& run : rr.runs)
    out.push_back(PureRun{run.keyAt(arg), run.wordAt(arg)});
  return out;
}

uint64_t PSeg::runCount(uint64_t slot) const {
  auto it = s.except.find(slot);
  if (it != s.except.end()) return blockRuns(slot).size();
  if (s.shape == SeqShape::Rat && !s.window.trivial() && !s.window.contains(slot))
    return 0;
  uint64_t arg = (s.shape == SeqShape::Rat && s.argPerm) ? negCode(slot) : slot;
  ResidueRuns rr = residueRuns(s.tail.atomsAt(arg), arg);
  return rr.count(arg);
}

// --- PDecomp -----------------------------------------------------------

PDecomp pdecompose(const WordPtr& w) {
  if (!isReduced(w)) throw NotReduced("pdecompose: word is not reduced");
  PDecomp d;
  d.word = w;
  collectRunsOf(w, d.segs);

  std::vector<OrderPtr> parts;
  for (const auto& seg : d.segs) {
    if (!seg.streamTail) {
      parts.push_back(oFin(seg.runs.size()));
      continue;
    }
    uint64_t L = seg.s.tail.period();
    std::vector<OrderRule> counts;
    for (uint64_t i = 0; i < L; ++i) {
      uint64_t absResidue = (seg.from + i) % L;
      ResidueRuns rr =
          residueRuns(seg.s.tail.atomsPerResidue[absResidue], absResidue);
      if (rr.ramp) {
        counts.push_back(
            OrderRule::finOf(IndexRule::affine(seg.from + rr.rampOff + 1, 1)));
      } else {
        counts.push_back(OrderRule::constShape(oFin(rr.runs.size())));
      }
    }
    std::map<uint64_t, OrderPtr> ex;
    for (const auto& [k, v] : seg.s.except)
      ex[k] = oFin(seg.blockRuns(k).size());
    if (seg.s.shape == SeqShape::Rat) {
      parts.push_back(oSumSeq(SeqShape::Rat, OrderRule::periodic(counts),
                              std::move(ex), seg.s.argPerm, seg.s.window));
    } else {
      // relative slots: position [k, j] denotes run j of block from+k
      parts.push_back(
          oSumSeq(seg.s.shape, OrderRule::periodic(counts), std::move(ex)));
    }
  }
  // keep one Fin part per explicit segment (no cross-seg merging) so that
  // positions stay aligned with segs
  if (parts.empty()) {
    d.pindex = oEmpty();
    return d;
  }
  if (parts.size() == 1 && d.segs.size() == 1) {
    d.pindex = parts[0];
    return d;
  }
  auto o = std::make_shared<Order>();
  o->kind = Order::Kind::SumFin;
  o->parts = std::move(parts);
  d.pindex = o;
  return d;
}

PureRun PDecomp::runAt(const Pos& p) const {
  size_t segIdx;
  Pos rest;
  if (segs.size() == 1) {
    segIdx = 0;
    rest = p;
  } else {
    segIdx = p.at(0);
    rest.assign(p.begin() + 1, p.end());
  }
  const PSeg& seg = segs.at(segIdx);
  if (!seg.streamTail) return seg.runs.at(rest.at(0));
  uint64_t slot = rest.at(0);
  uint64_t absSlot = seg.s.shape == SeqShape::Rat ? slot : seg.from + slot;
  auto runs = seg.blockRuns(absSlot);
  return runs.at(rest.at(1));
}

namespace {

// assemble the sub-word of a tail segment restricted to a slot range with
// optional partial runs at the edges
WordPtr tailSlice(const PSeg& seg, std::optional<uint64_t> loSlot,
                  uint64_t loRun, bool loPartial, std::optional<uint64_t> hiSlot,
                  uint64_t hiRun, bool hiPartial) {
  // slots here are relative for omega shapes, absolute codes for Rat
  const StreamData& s = seg.s;
  auto blockSlice = [&](uint64_t absSlot, std::optional<uint64_t> fromRun,
                        std::optional<uint64_t> toRun) -> WordPtr {
    auto runs = seg.blockRuns(absSlot);
    std::vector<WordPtr> ps;
    uint64_t a = fromRun.value_or(0);
    uint64_t b = toRun.value_or(runs.empty() ? 0 : runs.size() - 1);
    for (uint64_t j = a; j < runs.size() && j <= b; ++j)
      ps.push_back(runs[j].word);
    return wConcat(std::move(ps));
  };

  if (s.shape == SeqShape::Rat) {
    uint64_t lo = loSlot.value_or(0), hi = hiSlot.value_or(0);
    if (loSlot && hiSlot && *loSlot == *hiSlot)
      return blockSlice(lo, loPartial ? std::optional(loRun) : std::nullopt,
                        hiPartial ? std::optional(hiRun) : std::nullopt);
    std::vector<WordPtr> ps;
    RatWindow win = s.window;
    if (loSlot) {
      ps.push_back(blockSlice(lo, loPartial ? std::optional(loRun) : std::nullopt,
                              std::nullopt));
      win.hasLo = true;
      win.loOpen = true;
      win.lo = ratOfCode(lo);
    }
    RatWindow winMid = win;
    if (hiSlot) {
      winMid.hasHi = true;
      winMid.hiOpen = true;
      winMid.hi = ratOfCode(hi);
    }
    std::map<uint64_t, WordPtr> ex;
    for (const auto& [k, v] : s.except)
      if (winMid.contains(k)) ex[k] = v;
    ps.push_back(wStream(SeqShape::Rat, s.tail, std::move(ex), s.argPerm, winMid));
    if (hiSlot)
      ps.push_back(blockSlice(hi, std::nullopt,
                              hiPartial ? std::optional(hiRun) : std::nullopt));
    return wConcat(std::move(ps));
  }

  bool omega = s.shape == SeqShape::Omega;
  // relative -> absolute
  auto abs = [&](uint64_t rel) { return seg.from + rel; };
  if (omega) {
    if (!hiSlot) {
      // unbounded above: partial low block + stream from the next slot
      std::vector<WordPtr> ps;
      uint64_t start = seg.from;
      if (loSlot) {
        if (loPartial) {
          ps.push_back(blockSlice(abs(*loSlot), loRun, std::nullopt));
          start = abs(*loSlot) + 1;
        } else {
          start = abs(*loSlot);
        }
      }
      ps.push_back(streamFromSlot(s, start));
      return wConcat(std::move(ps));
    }
    std::vector<WordPtr> ps;
    uint64_t a = loSlot ? abs(*loSlot) : seg.from;
    uint64_t b = abs(*hiSlot);
    for (uint64_t n = a; n <= b; ++n) {
      std::optional<uint64_t> fr, to;
      if (loSlot && n == abs(*loSlot) && loPartial) fr = loRun;
      if (n == b && hiPartial) to = hiRun;
      ps.push_back(blockSlice(n, fr, to));
    }
    return wConcat(std::move(ps));
  }
  // omega*: display order runs from high relative slots down to low; the lo
  // end of the interval has the larger relative slot
  if (!loSlot) {
    std::vector<WordPtr> ps;
    uint64_t stop = seg.from;
    if (hiSlot) stop = abs(*hiSlot);
    ps.push_back(streamFromSlot(s, hiSlot && !hiPartial ? stop : stop + 1));
    if (hiSlot && hiPartial)
      ps.push_back(blockSlice(stop, std::nullopt, hiRun));
    if (hiSlot && !hiPartial) {
      // streamFromSlot already includes the stop block
    }
    return wConcat(std::move(ps));
  }
  std::vector<WordPtr> ps;
  uint64_t a = abs(*loSlot);
  uint64_t b = hiSlot ? abs(*hiSlot) : seg.from;
  for (uint64_t n = a + 1; n-- > b;) {
    std::optional<uint64_t> fr, to;
    if (n == a && loPartial) fr = loRun;
    if (hiSlot && n == b && hiPartial) to = hiRun;
    ps.push_back(blockSlice(n, fr, to));
    if (n == b) break;
  }
  return wConcat(std::move(ps));
}

}  // namespace

WordPtr PDecomp::chunk(const Interval& iv) const {
  Interval i = normalizeInterval(pindex, iv);
  if (i.empty) return wE();
  std::vector<WordPtr> out;
  bool single = segs.size() == 1;
  for (size_t si = 0; si < segs.size(); ++si) {
    // clip the interval to this segment
    Interval inner = Interval::all();
    if (!single) {
      bool skip = false;
      if (i.lo.kind == IBound::Kind::At) {
        if (i.lo.pos[0] > si) skip = true;
        if (i.lo.pos[0] == si)
          inner.lo = IBound::at(Pos(i.lo.pos.begin() + 1, i.lo.pos.end()),
                                i.lo.closed);
      }
      if (i.hi.kind == IBound::Kind::At) {
        if (i.hi.pos[0] < si) skip = true;
        if (i.hi.pos[0] == si)
          inner.hi = IBound::at(Pos(i.hi.pos.begin() + 1, i.hi.pos.end()),
                                i.hi.closed);
      }
      if (skip) continue;
    } else {
      inner = i;
    }
    const PSeg& seg = segs[si];
    if (!seg.streamTail) {
      uint64_t a = 0, b = seg.runs.size() - 1;
      if (inner.lo.kind == IBound::Kind::At)
        a = inner.lo.pos[0] + (inner.lo.closed ? 0 : 1);
      if (inner.hi.kind == IBound::Kind::At) {
        if (inner.hi.pos[0] == 0 && !inner.hi.closed) continue;
        b = std::min<uint64_t>(b, inner.hi.pos[0] - (inner.hi.closed ? 0 : 1));
      }
      std::vector<WordPtr> ps;
      for (uint64_t j = a; j < seg.runs.size() && j <= b; ++j)
        ps.push_back(seg.runs[j].word);
      out.push_back(wConcat(std::move(ps)));
      continue;
    }
    // stream tail: bounds are [slot, run] pairs; run-level openness folds into
    // the run index
    std::optional<uint64_t> loSlot, hiSlot;
    uint64_t loRun = 0, hiRun = 0;
    bool loPartial = false, hiPartial = false;
    if (inner.lo.kind == IBound::Kind::At) {
      loSlot = inner.lo.pos[0];
      loRun = inner.lo.pos[1] + (inner.lo.closed ? 0 : 1);
      uint64_t absSlot =
          seg.s.shape == SeqShape::Rat ? *loSlot : seg.from + *loSlot;
      uint64_t cnt = seg.runCount(absSlot);
      if (loRun >= cnt) {
        // bound passes the end of the block: advance to the next slot
        if (seg.s.shape == SeqShape::Rat)
          throw UnsupportedShape("open p-chunk bound at a Q block edge");
        loSlot = *loSlot + 1;
        loRun = 0;
        loPartial = false;
      } else {
        loPartial = loRun > 0;
      }
    }
    if (inner.hi.kind == IBound::Kind::At) {
      hiSlot = inner.hi.pos[0];
      int64_t r = int64_t(inner.hi.pos[1]) - (inner.hi.closed ? 0 : 1);
      if (r < 0) {
        if (seg.s.shape == SeqShape::Rat)
          throw UnsupportedShape("open p-chunk bound at a Q block edge");
        if (*hiSlot == 0) continue;  // nothing in this segment
        hiSlot = *hiSlot - 1;
        uint64_t absSlot =
            seg.s.shape == SeqShape::Rat ? *hiSlot : seg.from + *hiSlot;
        hiRun = seg.runCount(absSlot) ? seg.runCount(absSlot) - 1 : 0;
        hiPartial = false;
      } else {
        hiRun = uint64_t(r);
        uint64_t absSlot =
            seg.s.shape == SeqShape::Rat ? *hiSlot : seg.from + *hiSlot;
        hiPartial = hiRun + 1 < seg.runCount(absSlot);
      }
    }
    out.push_back(
        tailSlice(seg, loSlot, loRun, loPartial, hiSlot, hiRun, hiPartial));
  }
  return wConcat(std::move(out));
}

std::optional<std::vector<Pos>> PDecomp::allPositions(size_t limit) const {
  return enumerateInterval(pindex, Interval::all(), limit);
}

std::optional<uint64_t> PDecomp::runLetterBound() const {
  uint64_t best = 0;
  for (const auto& seg : segs) {
    if (!seg.streamTail) {
      for (const auto& r : seg.runs) {
        auto sz = finiteSize(domainOrder(r.word));
        if (!sz) return std::nullopt;
        best = std::max(best, *sz);
      }
      continue;
    }
    for (const auto& atoms : seg.s.tail.atomsPerResidue) {
      for (const auto& a : atoms) {
        if (a.kind == AtomTpl::Kind::QPure) return std::nullopt;
        if (a.kind == AtomTpl::Kind::Ramp) {
          best = std::max<uint64_t>(best, 1);
          continue;
        }
        uint64_t letters = 0;
        for (const auto& t : a.letters) letters += t.repeat;
        best = std::max(best, letters);
      }
    }
    for (const auto& [k, v] : seg.s.except) {
      auto sz = finiteSize(domainOrder(v));
      if (!sz) return std::nullopt;
      best = std::max(best, *sz);
    }
  }
  return best;
}

// --- multiplication ----------------------------------------------------

namespace {

// first/last `cap` runs of a decomposition, walking the segment structure
std::vector<PureRun> leadingRuns(const PDecomp& d, size_t cap) {
  std::vector<PureRun> out;
  for (const auto& seg : d.segs) {
    if (out.size() >= cap) break;
    if (!seg.streamTail) {
      for (const auto& r : seg.runs) {
        out.push_back(r);
        if (out.size() >= cap) break;
      }
      continue;
    }
    if (seg.s.shape == SeqShape::Omega) {
      for (uint64_t n = seg.from; out.size() < cap && n < seg.from + cap + 4;
           ++n) {
        for (const auto& r : seg.blockRuns(n)) {
          out.push_back(r);
          if (out.size() >= cap) break;
        }
      }
      break;  // the tail absorbs everything beyond
    }
    break;  // omega*/Rat tails have no first runs to enumerate
  }
  return out;
}

std::vector<PureRun> trailingRuns(const PDecomp& d, size_t cap) {
  std::vector<PureRun> out;  // rightmost first
  for (auto it = d.segs.rbegin(); it != d.segs.rend(); ++it) {
    const PSeg& seg = *it;
    if (out.size() >= cap) break;
    if (!seg.streamTail) {
      for (auto r = seg.runs.rbegin(); r != seg.runs.rend(); ++r) {
        out.push_back(*r);
        if (out.size() >= cap) break;
      }
      continue;
    }
    if (seg.s.shape == SeqShape::OmegaStar) {
      for (uint64_t n = seg.from; out.size() < cap && n < seg.from + cap + 4;
           ++n) {
        auto runs = seg.blockRuns(n);
        for (auto r = runs.rbegin(); r != runs.rend(); ++r) {
          out.push_back(*r);
          if (out.size() >= cap) break;
        }
      }
      break;
    }
    break;  // omega/Rat tails have no trailing runs
  }
  return out;
}

std::optional<Pos> posOfRunFromStart(const PDecomp& d, uint64_t k) {
  bool single = d.segs.size() == 1;
  for (size_t si = 0; si < d.segs.size(); ++si) {
    const PSeg& seg = d.segs[si];
    auto emit = [&](Pos tail) {
      Pos p;
      if (!single) p.push_back(si);
      p.insert(p.end(), tail.begin(), tail.end());
      return p;
    };
    if (!seg.streamTail) {
      if (k < seg.runs.size()) return emit({k});
      k -= seg.runs.size();
      continue;
    }
    if (seg.s.shape != SeqShape::Omega) return std::nullopt;
    for (uint64_t rel = 0; rel < k + 4; ++rel) {
      uint64_t cnt = seg.runCount(seg.from + rel);
      if (k < cnt) return emit({rel, k});
      k -= cnt;
    }
    return std::nullopt;
  }
  return std::nullopt;
}

std::optional<Pos> posOfRunFromEnd(const PDecomp& d, uint64_t k) {
  bool single = d.segs.size() == 1;
  for (size_t si = d.segs.size(); si-- > 0;) {
    const PSeg& seg = d.segs[si];
    auto emit = [&](Pos tail) {
      Pos p;
      if (!single) p.push_back(si);
      p.insert(p.end(), tail.begin(), tail.end());
      return p;
    };
    if (!seg.streamTail) {
      if (k < seg.runs.size()) return emit({seg.runs.size() - 1 - k});
      k -= seg.runs.size();
      continue;
    }
    if (seg.s.shape != SeqShape::OmegaStar) return std::nullopt;
    for (uint64_t rel = 0; rel < k + 4; ++rel) {
      uint64_t cnt = seg.runCount(seg.from + rel);
      if (k < cnt) return emit({rel, cnt - 1 - k});
      k -= cnt;
    }
    return std::nullopt;
  }
  return std::nullopt;
}

// total run count when finite
std::optional<uint64_t> runCountIfFinite(const PDecomp& d) {
  auto ps = d.allPositions(100000);
  if (!ps) return std::nullopt;
  return ps->size();
}

}  // namespace

std::optional<Pos> posOfNthRun(const PDecomp& d, uint64_t k) {
  return posOfRunFromStart(d, k);
}

std::optional<Pos> posOfNthRunFromEnd(const PDecomp& d, uint64_t k) {
  return posOfRunFromEnd(d, k);
}

MultiplyResult multiplyPDecomp(const WordPtr& w, const WordPtr& u) {
  BoundarySplit bs = boundarySplit(w, u);
  PDecomp dw = pdecompose(w);
  PDecomp du = pdecompose(u);
  PDecomp dw0 = pdecompose(bs.w0);
  PDecomp dw1 = pdecompose(bs.w1);
  PDecomp du0 = pdecompose(bs.u0);
  PDecomp du1 = pdecompose(bs.u1);

  auto lastOf = [&](const PDecomp& d) -> std::optional<PureRun> {
    auto t = trailingRuns(d, 1);
    if (t.empty()) return std::nullopt;
    return t[0];
  };
  auto firstOf = [&](const PDecomp& d) -> std::optional<PureRun> {
    auto t = leadingRuns(d, 1);
    if (t.empty()) return std::nullopt;
    return t[0];
  };

  auto w0Last = lastOf(dw0);
  auto w1First = firstOf(dw1);
  auto u1First = firstOf(du1);
  auto u0Last = lastOf(du0);

  // a run of w was split by the seam iff w0's last run continues into w1
  bool wPartial = w0Last && w1First && w0Last->key == w1First->key;
  bool uPartial = u1First && u0Last && u0Last->key == u1First->key;

  // full runs of w cancelled outright
  auto w1Count = runCountIfFinite(dw1);
  auto u0Count = runCountIfFinite(du0);

  bool keysMeet = w0Last && u1First && w0Last->key == u1First->key;
  bool dropLeft = w0Last && (wPartial || keysMeet);
  bool dropRight = u1First && (uPartial || keysMeet);

  MultiplyResult out;
  out.caseTag = (dropLeft || dropRight) ? 2 : 1;
  if (out.caseTag == 2) {
    std::vector<WordPtr> parts;
    if (dropLeft) parts.push_back(w0Last->word);
    if (dropRight) parts.push_back(u1First->word);
    out.merged = wConcat(std::move(parts));
  }

  // initial interval of p-index(w): everything except the last
  // (cancelled-full + split + dropped) runs
  uint64_t dW;
  if (w1Count) {
    dW = *w1Count - (wPartial ? 1 : 0) + (dropLeft ? 1 : 0);
  } else {
    // an entire tail was cancelled; count what is left instead
    auto w0Count = runCountIfFinite(dw0);
    if (!w0Count) throw UnsupportedShape("seam analysis with two infinite sides");
    uint64_t keep = *w0Count - (dropLeft ? 1 : 0);
    if (keep == 0) {
      out.initial = Interval::none();
    } else {
      auto p = posOfRunFromStart(dw, keep - 1);
      if (!p) throw UnsupportedShape("cannot address the seam run");
      out.initial = Interval{false, IBound::negInf(), IBound::at(*p, true)};
    }
    dW = UINT64_MAX;
  }
  if (dW != UINT64_MAX) {
    if (dW == 0) {
      out.initial = Interval::all();
    } else {
      auto p = posOfRunFromEnd(dw, dW - 1);
      if (!p) throw UnsupportedShape("cannot address the seam run");
      out.initial = Interval{false, IBound::negInf(), IBound::at(*p, false)};
    }
    out.initial = normalizeInterval(dw.pindex, out.initial);
  }

  uint64_t dU;
  if (u0Count) {
    dU = *u0Count - (uPartial ? 1 : 0) + (dropRight ? 1 : 0);
  } else {
    auto u1Count = runCountIfFinite(du1);
    if (!u1Count) throw UnsupportedShape("seam analysis with two infinite sides");
    uint64_t keep = *u1Count - (dropRight ? 1 : 0);
    if (keep == 0) {
      out.terminal = Interval::none();
    } else {
      auto p = posOfRunFromEnd(du, keep - 1);
      if (!p) throw UnsupportedShape("cannot address the seam run");
      out.terminal = Interval{false, IBound::at(*p, true), IBound::posInf()};
    }
    dU = UINT64_MAX;
  }
  if (dU != UINT64_MAX) {
    if (dU == 0) {
      out.terminal = Interval::all();
    } else {
      auto p = posOfRunFromStart(du, dU - 1);
      if (!p) throw UnsupportedShape("cannot address the seam run");
      out.terminal = Interval{false, IBound::at(*p, false), IBound::posInf()};
    }
    out.terminal = normalizeInterval(du.pindex, out.terminal);
  }
  return out;
}

}  // namespace transred
