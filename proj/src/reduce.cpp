#include "transred/reduce.hpp"

#include <algorithm>
#include <set>

namespace transred {

// --- stream slicing helpers ----------------------------------------------

WordPtr streamFromSlot(const StreamData& s, uint64_t slot) {
  if (s.shape == SeqShape::Rat)
    throw UnsupportedShape("streamFromSlot on a Q-indexed stream");
  if (slot == 0) return wStream(s.shape, s.tail, s.except, s.argPerm);
  std::map<uint64_t, WordPtr> ex;
  for (const auto& [k, v] : s.except)
    if (k >= slot) ex[k - slot] = v;
  return wStream(s.shape, s.tail.shifted(slot), std::move(ex), false);
}

std::vector<WordPtr> streamBlocksBelow(const StreamData& s, uint64_t slot) {
  std::vector<WordPtr> out;
  for (uint64_t n = 0; n < slot; ++n) out.push_back(s.block(n));
  return out;
}

// --- finite stack reduction with pairing -----------------------------------

Cancellation maxCancellationFinite(const FiniteWord& w) {
  Cancellation c;
  std::vector<std::pair<Letter, uint64_t>> stack;
  for (uint64_t i = 0; i < w.size(); ++i) {
    if (!stack.empty() && stack.back().first.cancels(w[i])) {
      c.pairs.emplace_back(Pos{stack.back().second}, Pos{i});
      stack.pop_back();
    } else {
      stack.emplace_back(w[i], i);
    }
  }
  std::sort(c.pairs.begin(), c.pairs.end());
  return c;
}

// --- verification ------------------------------------------------------

std::optional<CancelViolation> verifyCancellation(const WordPtr& w,
                                                  const Cancellation& s,
                                                  uint64_t nmax) {
  // collect all explicit pairs, including schematic ones expanded over a
  // truncation window
  std::vector<std::pair<Pos, Pos>> pairs = s.pairs;
  for (const auto& bp : s.blockPairings) {
    for (uint64_t slot = bp.fromSlot; slot < bp.fromSlot + 4; ++slot) {
      for (const auto& [a, b] : bp.letterOrdinals) {
        Pos pa = bp.streamPrefix;
        pa.push_back(slot);
        pa.push_back(a);
        Pos pb = bp.streamPrefix;
        pb.push_back(slot);
        pb.push_back(b);
        pairs.emplace_back(pa, pb);
      }
    }
  }
  for (const auto& [a, b] : pairs) {
    if (!validWordPos(w, a) || !validWordPos(w, b))
      return CancelViolation{0, "invalid position in pairing"};
    if (cmpWordPos(w, a, b) >= 0)
      return CancelViolation{1, "pair not ascending"};
    if (!letterAt(w, a).cancels(letterAt(w, b)))
      return CancelViolation{5, "paired letters are not inverse"};
  }
  // conditions (2),(3): each position used at most once overall
  {
    std::vector<Pos> used;
    for (const auto& [a, b] : pairs) {
      used.push_back(a);
      used.push_back(b);
    }
    std::sort(used.begin(), used.end());
    if (std::adjacent_find(used.begin(), used.end()) != used.end())
      return CancelViolation{2, "position appears in two pairs"};
  }
  // condition (4) on the level-nmax truncation: every projected position
  // strictly inside a span must pair with a partner inside the same span
  auto proj = projectWithPos(w, nmax);
  auto partnerOf = [&](const Pos& p) -> const Pos* {
    for (const auto& [a, b] : pairs) {
      if (a == p) return &b;
      if (b == p) return &a;
    }
    return nullptr;
  };
  for (const auto& [a, b] : pairs) {
    for (const auto& [p, l] : proj) {
      if (cmpWordPos(w, a, p) < 0 && cmpWordPos(w, p, b) < 0) {
        const Pos* q = partnerOf(p);
        if (!q) {
          bool inMirror = false;
          for (const auto& m : s.mirrors) {
            auto isPrefix = [&](const Pos& pre) {
              return pre.size() <= p.size() &&
                     std::equal(pre.begin(), pre.end(), p.begin());
            };
            if (isPrefix(m.leftPrefix) || isPrefix(m.rightPrefix)) {
              inMirror = true;
              break;
            }
          }
          if (!inMirror)
            return CancelViolation{4, "unpaired position inside a span"};
        } else if (!(cmpWordPos(w, a, *q) < 0 && cmpWordPos(w, *q, b) < 0)) {
          return CancelViolation{4, "partner escapes the enclosing span"};
        }
      }
    }
  }
  // mirrors: level-wise the two subwords must be mirror inverses
  for (const auto& m : s.mirrors) {
    auto isUnder = [&](const Pos& pre, const Pos& p) {
      return pre.size() <= p.size() &&
             std::equal(pre.begin(), pre.end(), p.begin());
    };
    FiniteWord left, right;
    for (const auto& [p, l] : proj) {
      if (isUnder(m.leftPrefix, p)) left.push_back(l);
      if (isUnder(m.rightPrefix, p)) right.push_back(l);
    }
    std::reverse(right.begin(), right.end());
    if (left.size() != right.size())
      return CancelViolation{4, "mirror halves differ in size at truncation"};
    for (size_t i = 0; i < left.size(); ++i)
      if (!left[i].cancels(right[i]))
        return CancelViolation{5, "mirror letters are not inverse"};
  }
  return std::nullopt;
}

// --- internal merge machinery ------------------------------------------

namespace {

struct PLetter {
  Letter l;
  Pos orig;
};

struct RUnit {
  enum class Kind : uint8_t { Lit, Stream } kind = Kind::Lit;
  std::vector<PLetter> lits;
  Pos prefix;
  StreamData s;
  uint64_t from = 0;  // blocks < from spliced out (omega/omega* only)
  bool side = false;  // used by boundarySplit to tag origin
};

struct Budget {
  uint64_t fuel;
  uint64_t spent = 0;
  bool out = false;
  bool burn(uint64_t n = 1) {
    spent += n;
    if (spent > fuel) {
      out = true;
      return false;
    }
    return true;
  }
};

// --- within-block template reduction ---

struct TplEntry {
  LetterTpl t;          // repeat field unused; count tracks multiplicity
  uint64_t count;
  uint64_t ordStart;    // expansion ordinal of the first letter
};

bool tplCancels(const LetterTpl& a, const LetterTpl& b) {
  if (a.fam != b.fam || a.sign != -b.sign) return false;
  if (!(a.alpha == b.alpha)) return false;
  return std::holds_alternative<AllN>(equalSolutions(a.idx, b.idx));
}

// Reduce one residue's atom list; emits within-block ordinal pairs shared by
// every block of the residue.
std::vector<AtomTpl> reduceResidueAtoms(
    const std::vector<AtomTpl>& atoms,
    std::vector<std::pair<uint64_t, uint64_t>>& ordPairs, bool& exact) {
  // expansion ordinals: Letters letters count by repeat; QPure/Ramp occupy
  // symbolic ordinal space we never pair into
  std::vector<AtomTpl> out;
  std::vector<TplEntry> stack;
  uint64_t ord = 0;
  auto flushStack = [&]() {
    if (stack.empty()) return;
    std::vector<LetterTpl> ls;
    for (const auto& e : stack) {
      LetterTpl t = e.t;
      t.repeat = e.count;
      ls.push_back(t);
    }
    out.push_back(AtomTpl::ofLetters(std::move(ls)));
    stack.clear();
  };
  for (const auto& a : atoms) {
    switch (a.kind) {
      case AtomTpl::Kind::Letters: {
        for (const auto& t : a.letters) {
          uint64_t count = t.repeat;
          uint64_t start = ord;
          ord += count;
          while (count > 0 && !stack.empty() && tplCancels(stack.back().t, t)) {
            uint64_t c = std::min(count, stack.back().count);
            // rightmost survivors of the stack entry pair with the leftmost
            // incoming letters
            for (uint64_t i = 0; i < c; ++i) {
              ordPairs.emplace_back(
                  stack.back().ordStart + stack.back().count - 1 - i, start + i);
            }
            stack.back().count -= c;
            count -= c;
            start += c;
            if (stack.back().count == 0) stack.pop_back();
          }
          if (count > 0) stack.push_back(TplEntry{t, count, start});
        }
        break;
      }
      case AtomTpl::Kind::QPure: {
        // cancel a mirror-adjacent q-pure pair wholesale
        if (!out.empty() && stack.empty() &&
            out.back().kind == AtomTpl::Kind::QPure &&
            out.back().inverted() == a) {
          out.pop_back();
          exact = false;  // whole-atom pairing is not ordinal-addressable
        } else {
          flushStack();
          out.push_back(a);
        }
        ord = satAdd(ord, 4);  // symbolic gap
        break;
      }
      case AtomTpl::Kind::Ramp:
        flushStack();
        out.push_back(a);
        ord = satAdd(ord, 4);
        break;
    }
  }
  flushStack();
  std::sort(ordPairs.begin(), ordPairs.end());
  return out;
}

std::optional<LetterTpl> lastLetterTpl(const std::vector<AtomTpl>& atoms) {
  if (atoms.empty()) return std::nullopt;
  const AtomTpl& a = atoms.back();
  if (a.kind != AtomTpl::Kind::Letters || a.letters.empty()) return std::nullopt;
  return a.letters.back();
}

std::optional<LetterTpl> firstLetterTpl(const std::vector<AtomTpl>& atoms) {
  if (atoms.empty()) return std::nullopt;
  const AtomTpl& a = atoms.front();
  if (a.kind != AtomTpl::Kind::Letters || a.letters.empty()) return std::nullopt;
  return a.letters.front();
}

void dropLastLetters(std::vector<AtomTpl>& atoms, uint64_t count) {
  auto& ls = atoms.back().letters;
  if (ls.back().repeat > count) {
    ls.back().repeat -= count;
  } else {
    ls.pop_back();
    if (ls.empty()) atoms.pop_back();
  }
}

void dropFirstLetters(std::vector<AtomTpl>& atoms, uint64_t count) {
  auto& ls = atoms.front().letters;
  if (ls.front().repeat > count) {
    ls.front().repeat -= count;
  } else {
    ls.erase(ls.begin());
    if (ls.empty()) atoms.erase(atoms.begin());
  }
}

// boundary test between the template at slot n and at slot n+1
enum class BoundaryKind { Never, Always, Sometimes };

struct BoundaryInfo {
  BoundaryKind kind = BoundaryKind::Never;
  std::vector<uint64_t> slots;  // Sometimes: slots n where the edge cancels
};

BoundaryInfo boundaryBetween(const std::vector<AtomTpl>& atAtN,
                             const std::vector<AtomTpl>& atAtN1) {
  BoundaryInfo info;
  auto last = lastLetterTpl(atAtN);
  auto first = firstLetterTpl(atAtN1);
  if (!last || !first) return info;
  LetterTpl f = first->shifted(1);  // evaluate the successor block at n+1
  if (last->fam != f.fam || last->sign != -f.sign) return info;
  if (!(last->alpha == f.alpha)) {
    // alpha rules may still collide at specific slots if both constant-free;
    // cycles either agree everywhere or differ periodically: treat pointwise
    bool any = false, all = true;
    for (uint64_t n = 0; n < 64; ++n) {
      bool hit = last->alpha.eval(n) == f.alpha.eval(n);
      any |= hit;
      all &= hit;
    }
    if (!any) return info;
    if (!all) {
      // mixed alpha agreement: restrict index solutions to agreeing slots
      auto sols = equalSolutions(last->idx, f.idx);
      std::vector<uint64_t> out;
      if (std::holds_alternative<AllN>(sols)) {
        for (uint64_t n = 0; n < 64; ++n)
          if (last->alpha.eval(n) == f.alpha.eval(n)) out.push_back(n);
        // periodic agreement would make this an infinite family
        throw UnsupportedShape("periodic alpha collision at stream boundary");
      }
      for (uint64_t n : std::get<std::vector<uint64_t>>(sols))
        if (last->alpha.eval(n) == f.alpha.eval(n)) out.push_back(n);
      if (out.empty()) return info;
      info.kind = BoundaryKind::Sometimes;
      info.slots = std::move(out);
      return info;
    }
  }
  auto sols = equalSolutions(last->idx, f.idx);
  if (std::holds_alternative<AllN>(sols)) {
    info.kind = BoundaryKind::Always;
    return info;
  }
  auto v = std::get<std::vector<uint64_t>>(sols);
  if (v.empty()) return info;
  info.kind = BoundaryKind::Sometimes;
  info.slots = std::move(v);
  return info;
}

// --- Q-indexed stream safety -------------------------------------------

// Sound bounded exclusion of cancellations in a Q-indexed stream whose blocks
// are reduced: any pair of letters in distinct blocks spans infinitely many
// full blocks, each of which would have to vanish inside the span.  We verify
// that no block can vanish: either all letters share one sign, or every block
// owns an anchor letter whose inverse site never occurs in the word.
bool ratStreamSafe(const StreamData& s, Budget& fuel) {
  // sign census over templates and exceptions
  bool hasPos = false, hasNeg = false;
  for (const auto& atoms : s.tail.atomsPerResidue) {
    for (const auto& a : atoms) {
      switch (a.kind) {
        case AtomTpl::Kind::Letters:
          for (const auto& t : a.letters) (t.sign > 0 ? hasPos : hasNeg) = true;
          break;
        case AtomTpl::Kind::QPure:
          (a.sign > 0 ? hasPos : hasNeg) = true;
          break;
        case AtomTpl::Kind::Ramp:
          hasPos = true;
          break;
      }
    }
  }
  for (const auto& [k, v] : s.except) {
    for (const auto& l : project(v, 64)) (l.sign > 0 ? hasPos : hasNeg) = true;
  }
  if (!(hasPos && hasNeg)) return true;

  // mixed signs: demand per-block anchors.  Sites of negative letters across
  // the whole stream; a positive letter whose site never occurs negatively
  // anchors its block (and symmetrically).
  auto siteHit = [&](const LetterTpl& cand, int8_t wantSign) {
    for (const auto& atoms : s.tail.atomsPerResidue) {
      for (const auto& a : atoms) {
        if (a.kind != AtomTpl::Kind::Letters) continue;
        for (const auto& t : a.letters) {
          if (t.sign != wantSign || t.fam != cand.fam) continue;
          if (!(t.alpha == cand.alpha)) {
            bool overlap = false;
            for (uint64_t n = 0; n < 16 && !overlap; ++n)
              for (uint64_t m = 0; m < 16 && !overlap; ++m)
                overlap = t.alpha.eval(n) == cand.alpha.eval(m) &&
                          t.idx.eval(n) == cand.idx.eval(m);
            if (overlap) return true;
            continue;
          }
          auto sols = equalSolutions(t.idx, cand.idx);
          if (std::holds_alternative<AllN>(sols)) return true;
          if (!std::get<std::vector<uint64_t>>(sols).empty()) return true;
        }
      }
    }
    return false;
  };
  for (const auto& atoms : s.tail.atomsPerResidue) {
    bool anchored = false;
    for (const auto& a : atoms) {
      if (a.kind == AtomTpl::Kind::QPure) {
        // a q-pure flank anchors the block when its mirror flank is absent
        LetterTpl probe{a.fam, a.alpha,
                        a.level,  // endpoint letters sit at level-1
                        int8_t(-a.sign), 1};
        if (!siteHit(probe, probe.sign)) anchored = true;
      }
      if (a.kind == AtomTpl::Kind::Letters) {
        for (const auto& t : a.letters) {
          LetterTpl probe = t;
          probe.sign = -t.sign;
          if (!siteHit(probe, probe.sign)) anchored = true;
        }
      }
      if (a.kind == AtomTpl::Kind::Ramp) anchored = true;
    }
    if (!anchored && !atoms.empty()) return false;
  }
  for (const auto& [k, v] : s.except) {
    (void)k;
    if (v->isE()) continue;
    // exceptions anchored by any letter whose inverse never occurs in the
    // template; bounded scan
    bool anchored = false;
    for (const auto& l : project(v, 64)) {
      LetterTpl probe{l.fam, AlphaRule::constant(l.alpha),
                      IndexRule::constant(l.idx), int8_t(-l.sign), 1};
      if (!siteHit(probe, probe.sign)) {
        anchored = true;
        break;
      }
    }
    if (!anchored) return false;
  }
  return fuel.burn();
}

// --- stream-internal reduction -------------------------------------------

void stackMergePLit(std::vector<PLetter>& acc, std::vector<PLetter> more,
                    Cancellation& canc) {
  for (auto& pl : more) {
    if (!acc.empty() && acc.back().l.cancels(pl.l)) {
      canc.pairs.emplace_back(acc.back().orig, pl.orig);
      acc.pop_back();
    } else {
      acc.push_back(std::move(pl));
    }
  }
}

std::vector<PLetter> plettersOfLit(const WordPtr& w, const Pos& prefix) {
  std::vector<PLetter> out;
  for (size_t i = 0; i < w->letters.size(); ++i) {
    Pos p = prefix;
    p.push_back(i);
    out.push_back(PLetter{w->letters[i], std::move(p)});
  }
  return out;
}

void unitsOf(const WordPtr& w, const Pos& prefix, std::vector<RUnit>& out,
             Cancellation& canc, Budget& fuel, bool& exact);

// Reduce a stream in place, appending the resulting units.
void streamReduceUnits(const StreamData& sIn, const Pos& prefix,
                       std::vector<RUnit>& out, Cancellation& canc,
                       Budget& fuel, bool& exact) {
  StreamData s = sIn;
  // (1) reduce exception blocks
  for (auto& [k, v] : s.except) {
    std::vector<RUnit> units;
    Pos p = prefix;
    p.push_back(k);
    // reduce the block via the full pipeline, then reassemble
    bool subExact = true;
    std::vector<RUnit> blockUnits;
    Cancellation sub;
    unitsOf(v, p, blockUnits, sub, fuel, subExact);
    // merge block units locally
    // (reassembly happens below through the generic path)
    // collect into a word again
    std::vector<WordPtr> ps;
    for (auto& u : blockUnits) {
      if (u.kind == RUnit::Kind::Lit) {
        std::vector<Letter> ls;
        for (auto& pl : u.lits) ls.push_back(pl.l);
        ps.push_back(wLit(std::move(ls)));
      } else {
        ps.push_back(streamFromSlot(u.s, u.from));
      }
    }
    for (auto& pr : sub.pairs) canc.pairs.push_back(pr);
    canc.blockPairings.insert(canc.blockPairings.end(),
                              sub.blockPairings.begin(),
                              sub.blockPairings.end());
    canc.mirrors.insert(canc.mirrors.end(), sub.mirrors.begin(),
                        sub.mirrors.end());
    exact = exact && subExact;
    v = wConcat(std::move(ps));
  }

  // (2) within-block template reduction per residue
  uint64_t period = s.tail.period();
  for (uint64_t r = 0; r < period; ++r) {
    std::vector<std::pair<uint64_t, uint64_t>> ordPairs;
    auto reduced = reduceResidueAtoms(s.tail.atomsPerResidue[r], ordPairs, exact);
    if (!ordPairs.empty()) {
      Cancellation::BlockPairing bp;
      bp.streamPrefix = prefix;
      bp.fromSlot = r;  // interpreted with stride = period by verifiers
      bp.letterOrdinals = std::move(ordPairs);
      canc.blockPairings.push_back(std::move(bp));
      if (period > 1) exact = false;  // residue stride not expressible yet
    }
    s.tail.atomsPerResidue[r] = std::move(reduced);
  }

  if (s.tail.allEmpty()) {
    // only exceptions remain; the factory collapses to a finite concatenation
    WordPtr rest = wStream(s.shape, s.tail, s.except, s.argPerm);
    // positions inside exceptions keep their slot prefix
    if (rest->isE()) return;
    // rebuild explicit units with provenance by walking exception blocks in
    // display order
    std::vector<std::pair<uint64_t, WordPtr>> blocks(s.except.begin(),
                                                     s.except.end());
    std::sort(blocks.begin(), blocks.end(), [&](const auto& x, const auto& y) {
      switch (s.shape) {
        case SeqShape::Omega:
          return x.first < y.first;
        case SeqShape::OmegaStar:
          return x.first > y.first;
        case SeqShape::Rat:
          return cmpRatCodes(x.first, y.first) < 0;
      }
      return x.first < y.first;
    });
    for (auto& [k, v] : blocks) {
      if (v->isE()) continue;
      Pos p = prefix;
      p.push_back(k);
      unitsOf(v, p, out, canc, fuel, exact);
    }
    return;
  }

  if (s.shape == SeqShape::Rat) {
    if (!ratStreamSafe(s, fuel))
      throw FuelExhausted("cannot certify Q-indexed stream reduced");
    RUnit u;
    u.kind = RUnit::Kind::Stream;
    u.prefix = prefix;
    u.s = std::move(s);
    out.push_back(std::move(u));
    return;
  }

  // (3) split off the exception region so the residual core is pure-rule
  uint64_t cut = s.except.empty() ? 0 : s.maxExceptSlot() + 1;

  // (4) telescoping across rule-block boundaries (single-residue tails)
  uint64_t coreFrom = cut;
  std::vector<RUnit> orphans;  // explicit letters stripped from the core edge
  if (period == 1) {
    while (fuel.burn()) {
      auto& atoms = s.tail.atomsPerResidue[0];
      auto last = lastLetterTpl(atoms);
      auto first = firstLetterTpl(atoms);
      if (!last || !first) break;
      BoundaryInfo bi = boundaryBetween(atoms, atoms);
      if (bi.kind != BoundaryKind::Always) break;
      // strip c letters from each edge for every boundary
      uint64_t c = std::min(last->repeat, first->repeat);
      // the first core block keeps its leading letters as an orphan
      WordPtr headBlock = s.tail.shifted(coreFrom).eval(0);
      (void)headBlock;
      LetterTpl orphanTpl = *first;
      Letter orphanLetter = orphanTpl.eval(coreFrom);
      RUnit orphan;
      orphan.kind = RUnit::Kind::Lit;
      for (uint64_t i = 0; i < c; ++i) {
        Pos p = prefix;
        p.push_back(coreFrom);
        p.push_back(i);  // ordinal within the block
        orphan.lits.push_back(PLetter{orphanLetter, p});
      }
      if (s.shape == SeqShape::Omega) {
        orphans.push_back(std::move(orphan));
      } else {
        // omega*: the dangling edge is the last letter run of the lowest block
        RUnit o2;
        o2.kind = RUnit::Kind::Lit;
        Letter tailLetter = last->eval(coreFrom);
        for (uint64_t i = 0; i < c; ++i) {
          Pos p = prefix;
          p.push_back(coreFrom);
          p.push_back(i);
          o2.lits.push_back(PLetter{tailLetter, p});
        }
        orphans.push_back(std::move(o2));
      }
      Cancellation::BlockPairing bp;
      bp.streamPrefix = prefix;
      bp.fromSlot = coreFrom;
      // cross-block pairing; ordinals refer to (end of n, start of n+1)
      for (uint64_t i = 0; i < c; ++i) bp.letterOrdinals.emplace_back(i, i);
      exact = false;  // cross-block shape recorded coarsely
      canc.blockPairings.push_back(std::move(bp));
      dropLastLetters(atoms, c);
      if (!atoms.empty()) dropFirstLetters(atoms, c);
      if (s.tail.allEmpty()) break;
    }
    // boundary cancellations at finitely many slots: materialize those blocks
    if (!s.tail.allEmpty()) {
      BoundaryInfo bi =
          boundaryBetween(s.tail.atomsPerResidue[0], s.tail.atomsPerResidue[0]);
      if (bi.kind == BoundaryKind::Sometimes) {
        for (uint64_t n : bi.slots) {
          s.except.emplace(n, s.tail.eval(n));
          s.except.emplace(n + 1, s.tail.eval(n + 1));
        }
        cut = s.maxExceptSlot() + 1;
        coreFrom = std::max(coreFrom, cut);
      }
    }
  } else {
    // multi-residue tails: scan a window for boundary hits and materialize
    bool hit = false;
    for (uint64_t n = cut; n < cut + 8 * period + 8; ++n) {
      WordPtr bn = s.tail.eval(n);
      WordPtr bn1 = s.tail.eval(n + 1);
      FiniteWord lsA = project(bn, kIndexCap - 1);
      FiniteWord lsB = project(bn1, kIndexCap - 1);
      if (!lsA.empty() && !lsB.empty() && lsA.back().cancels(lsB.front())) {
        s.except.emplace(n, bn);
        s.except.emplace(n + 1, bn1);
        hit = true;
      }
    }
    if (hit) {
      cut = s.maxExceptSlot() + 1;
      coreFrom = std::max(coreFrom, cut);
    }
  }

  if (s.tail.allEmpty()) {
    // telescoped away entirely: exceptions + orphans remain
    std::map<uint64_t, WordPtr> exOnly = s.except;
    StreamData collapsed = s;
    collapsed.except = exOnly;
    WordPtr w = wStream(collapsed.shape, collapsed.tail, collapsed.except,
                        collapsed.argPerm);
    if (s.shape == SeqShape::Omega) {
      if (!w->isE()) unitsOf(w, prefix, out, canc, fuel, exact);
      for (auto& o : orphans) out.push_back(std::move(o));
    } else {
      for (auto it = orphans.rbegin(); it != orphans.rend(); ++it)
        out.push_back(std::move(*it));
      if (!w->isE()) unitsOf(w, prefix, out, canc, fuel, exact);
    }
    return;
  }

  // emit: explicit blocks below coreFrom, then the rule core (display order
  // depends on the shape)
  std::vector<std::pair<uint64_t, WordPtr>> explicitBlocks;
  for (uint64_t n = 0; n < coreFrom; ++n) {
    WordPtr b = s.block(n);
    if (!b->isE()) explicitBlocks.emplace_back(n, b);
  }
  StreamData core;
  core.shape = s.shape;
  core.tail = s.tail;
  core.argPerm = false;
  for (const auto& [k, v] : s.except)
    if (k >= coreFrom) core.except[k] = v;

  RUnit coreUnit;
  coreUnit.kind = RUnit::Kind::Stream;
  coreUnit.prefix = prefix;
  coreUnit.s = std::move(core);
  coreUnit.from = coreFrom;

  if (s.shape == SeqShape::Omega) {
    for (auto& [n, b] : explicitBlocks) {
      Pos p = prefix;
      p.push_back(n);
      unitsOf(b, p, out, canc, fuel, exact);
    }
    // orphans produced by telescoping sit at the head of the core
    out.push_back(std::move(coreUnit));
    // note: orphan letters were stripped from the core's first block, so they
    // precede it
    if (!orphans.empty()) {
      // insert orphans before the core unit
      RUnit coreBack = std::move(out.back());
      out.pop_back();
      for (auto& o : orphans) out.push_back(std::move(o));
      out.push_back(std::move(coreBack));
    }
  } else {
    out.push_back(std::move(coreUnit));
    for (auto it = orphans.rbegin(); it != orphans.rend(); ++it)
      out.push_back(std::move(*it));
    std::sort(explicitBlocks.begin(), explicitBlocks.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    for (auto& [n, b] : explicitBlocks) {
      Pos p = prefix;
      p.push_back(n);
      unitsOf(b, p, out, canc, fuel, exact);
    }
  }
}

void unitsOf(const WordPtr& w, const Pos& prefix, std::vector<RUnit>& out,
             Cancellation& canc, Budget& fuel, bool& exact) {
  switch (w->kind) {
    case Word::Kind::Lit: {
      if (w->letters.empty()) return;
      RUnit u;
      u.kind = RUnit::Kind::Lit;
      stackMergePLit(u.lits, plettersOfLit(w, prefix), canc);
      if (!u.lits.empty()) out.push_back(std::move(u));
      return;
    }
    case Word::Kind::Concat: {
      for (size_t i = 0; i < w->parts.size(); ++i) {
        Pos p = prefix;
        p.push_back(i);
        unitsOf(w->parts[i], p, out, canc, fuel, exact);
      }
      return;
    }
    case Word::Kind::Stream:
      streamReduceUnits(w->stream, prefix, out, canc, fuel, exact);
      return;
  }
}

// the part of a stream unit still pending, as a term
WordPtr streamUnitTerm(const RUnit& u) { return streamFromSlot(u.s, u.from); }

// First nonempty block slot >= from, within a scan cap.
std::optional<uint64_t> firstLiveSlot(const StreamData& s, uint64_t from) {
  for (uint64_t n = from; n < from + 4096; ++n) {
    if (!s.block(n)->isE()) return n;
  }
  return std::nullopt;
}

// edge letter of a unit: last letter for the left side, first for the right
struct EdgeProbe {
  bool hasLetter = false;
  bool infiniteEdge = false;  // stream boundary with no edge letter
  Letter letter;
};

EdgeProbe probeRightEdge(const RUnit& u) {
  EdgeProbe e;
  if (u.kind == RUnit::Kind::Lit) {
    if (!u.lits.empty()) {
      e.hasLetter = true;
      e.letter = u.lits.back().l;
    }
    return e;
  }
  if (u.s.shape == SeqShape::Omega || u.s.shape == SeqShape::Rat) {
    e.infiniteEdge = true;
    return e;
  }
  // omega*: rightmost block is the lowest live slot
  e.infiniteEdge = false;
  return e;  // caller splices blocks to reach letters
}

// --- the merging engine ----------------------------------------------------

struct Engine {
  std::vector<RUnit> stack;
  Cancellation canc;
  Budget fuel;
  bool exact = true;

  // seam bookkeeping for boundarySplit
  std::vector<std::pair<PLetter, PLetter>> crossPairs;
  std::vector<std::pair<WordPtr, WordPtr>> crossMirrors;  // left tail, right tail

  static WordPtr streamUnitTermRat(const RUnit& u) {
    return wStream(u.s.shape, u.s.tail, u.s.except, u.s.argPerm, u.s.window);
  }

  static WordPtr unitTerm(const RUnit& u) {
    if (u.kind == RUnit::Kind::Lit) {
      std::vector<Letter> ls;
      for (const auto& pl : u.lits) ls.push_back(pl.l);
      return wLit(std::move(ls));
    }
    if (u.s.shape == SeqShape::Rat) return streamUnitTermRat(u);
    return streamFromSlot(u.s, u.from);
  }

  void pushBlockUnits(const RUnit& streamUnit, uint64_t slot) {
    WordPtr b = streamUnit.s.block(slot);
    if (b->isE()) return;
    Pos p = streamUnit.prefix;
    p.push_back(slot);
    std::vector<RUnit> bu;
    unitsOf(b, p, bu, canc, fuel, exact);
    for (auto& x : bu) {
      x.side = streamUnit.side;
      push(std::move(x));
    }
  }

  // Merge the incoming unit against the stack top, maintaining the invariant
  // that the stack is a fully merged (reduced-boundary) sequence.
  void push(RUnit u) {
    while (!fuel.out) {
      if (!fuel.burn()) return;
      if (u.kind == RUnit::Kind::Lit && u.lits.empty()) return;
      if (u.kind == RUnit::Kind::Stream && u.s.shape != SeqShape::Rat &&
          !firstLiveSlot(u.s, u.from))
        return;
      if (stack.empty()) {
        stack.push_back(std::move(u));
        return;
      }
      RUnit& top = stack.back();

      if (top.kind == RUnit::Kind::Lit && u.kind == RUnit::Kind::Lit) {
        // cancel the staircase at the seam
        size_t i = 0;
        while (i < u.lits.size() && !top.lits.empty() &&
               top.lits.back().l.cancels(u.lits[i].l)) {
          if (top.side != u.side)
            crossPairs.emplace_back(top.lits.back(), u.lits[i]);
          canc.pairs.emplace_back(top.lits.back().orig, u.lits[i].orig);
          top.lits.pop_back();
          ++i;
        }
        if (top.lits.empty()) {
          stack.pop_back();
          u.lits.erase(u.lits.begin(), u.lits.begin() + i);
          continue;  // keep cancelling against the next unit down
        }
        if (i == u.lits.size()) return;  // fully consumed
        u.lits.erase(u.lits.begin(), u.lits.begin() + i);
        if (top.side == u.side) {
          top.lits.insert(top.lits.end(), u.lits.begin(), u.lits.end());
          return;
        }
        stack.push_back(std::move(u));
        return;
      }

      if (top.kind == RUnit::Kind::Lit && u.kind == RUnit::Kind::Stream) {
        if (u.s.shape == SeqShape::Omega) {
          auto live = firstLiveSlot(u.s, u.from);
          WordPtr b = u.s.block(*live);
          FiniteWord bl = project(b, kIndexCap - 1);
          if (!bl.empty() && top.lits.back().l.cancels(bl.front())) {
            RUnit rest = u;
            rest.from = *live + 1;
            pushBlockUnits(u, *live);
            u = std::move(rest);
            continue;
          }
        }
        stack.push_back(std::move(u));
        return;
      }

      if (top.kind == RUnit::Kind::Stream) {
        if (top.s.shape == SeqShape::OmegaStar) {
          // the top's right edge is its lowest live block: pull it if the
          // seam could cancel
          auto live = firstLiveSlot(top.s, top.from);
          if (!live) {
            stack.pop_back();
            continue;
          }
          // full-mirror shortcut against a whole omega right unit
          if (u.kind == RUnit::Kind::Stream && u.s.shape == SeqShape::Omega) {
            WordPtr lt = streamFromSlot(top.s, top.from);
            WordPtr rt = streamFromSlot(u.s, u.from);
            if (wordEq(wordInverse(lt), rt)) {
              Cancellation::Mirror mir{top.prefix, u.prefix};
              canc.mirrors.push_back(mir);
              if (top.side != u.side) crossMirrors.emplace_back(lt, rt);
              stack.pop_back();
              return;
            }
          }
          WordPtr b = top.s.block(*live);
          FiniteWord bl = project(b, kIndexCap - 1);
          Letter uFirst;
          bool haveFirst = false;
          if (u.kind == RUnit::Kind::Lit) {
            uFirst = u.lits.front().l;
            haveFirst = true;
          } else if (u.s.shape == SeqShape::Omega) {
            auto ul = firstLiveSlot(u.s, u.from);
            if (ul) {
              FiniteWord ub = project(u.s.block(*ul), kIndexCap - 1);
              if (!ub.empty()) {
                uFirst = ub.front();
                haveFirst = true;
              }
            }
          }
          if (haveFirst && !bl.empty() && bl.back().cancels(uFirst)) {
            RUnit pulled = std::move(stack.back());
            stack.pop_back();
            RUnit rest = pulled;
            rest.from = *live + 1;
            if (firstLiveSlot(rest.s, rest.from)) stack.push_back(rest);
            pushBlockUnits(pulled, *live);
            continue;  // retry u against the new top
          }
          stack.push_back(std::move(u));
          return;
        }
        if (top.s.shape == SeqShape::Omega) {
          // infinite right edge: only a full-tail mirror cancels
          if (u.kind == RUnit::Kind::Stream &&
              u.s.shape == SeqShape::OmegaStar) {
            for (uint64_t k = 0; k < 6; ++k) {
              for (uint64_t m = 0; m < 6; ++m) {
                WordPtr lt = streamFromSlot(top.s, top.from + k);
                WordPtr rt = streamFromSlot(u.s, u.from + m);
                if (lt->isE() || rt->isE()) continue;
                if (!wordEq(wordInverse(lt), rt)) continue;
                Cancellation::Mirror mir{top.prefix, u.prefix};
                canc.mirrors.push_back(mir);
                if (top.side != u.side) crossMirrors.emplace_back(lt, rt);
                RUnit lu = std::move(stack.back());
                stack.pop_back();
                // survivors of the left unit (blocks below the cancelled tail)
                for (uint64_t n = lu.from; n < lu.from + k; ++n)
                  pushBlockUnits(lu, n);
                // survivors of the right unit, rightmost blocks in display
                // order (descending slots)
                RUnit ru = u;
                std::vector<uint64_t> after;
                for (uint64_t n = ru.from + m; n-- > ru.from;)
                  after.push_back(n);
                for (uint64_t n : after) pushBlockUnits(ru, n);
                return;
              }
            }
          }
          stack.push_back(std::move(u));
          return;
        }
        // top is a Q-indexed stream: only a whole-unit mirror cancels
        if (u.kind == RUnit::Kind::Stream && u.s.shape == SeqShape::Rat) {
          WordPtr lt = streamUnitTermRat(top);
          WordPtr rt = streamUnitTermRat(u);
          if (wordEq(wordInverse(lt), rt)) {
            Cancellation::Mirror mir{top.prefix, u.prefix};
            canc.mirrors.push_back(mir);
            if (top.side != u.side) crossMirrors.emplace_back(lt, rt);
            stack.pop_back();
            return;
          }
        }
        stack.push_back(std::move(u));
        return;
      }
      stack.push_back(std::move(u));
      return;
    }
  }

  WordPtr assemble() const {
    std::vector<WordPtr> ps;
    for (const auto& u : stack) ps.push_back(unitTerm(u));
    return wConcat(std::move(ps));
  }
};

}  // namespace

// --- public entry points -----------------------------------------------

ReductionResult reduceWord(const WordPtr& w, uint64_t fuel) {
  ReductionResult res;
  Engine eng;
  eng.fuel.fuel = fuel;
  std::vector<RUnit> units;
  try {
    unitsOf(w, {}, units, eng.canc, eng.fuel, eng.exact);
    for (auto& u : units) eng.push(std::move(u));
  } catch (const FuelExhausted&) {
    eng.fuel.out = true;
  }
  res.reduced = eng.assemble();
  res.used = std::move(eng.canc);
  res.used.exact = eng.exact;
  res.fuelSpent = eng.fuel.spent;
  res.status = eng.fuel.out ? ReductionResult::Status::FuelExhausted
                            : ReductionResult::Status::Complete;
  return res;
}

WordPtr red(const WordPtr& w, uint64_t fuel) {
  ReductionResult r = reduceWord(w, fuel);
  if (r.status != ReductionResult::Status::Complete)
    throw FuelExhausted("reduction ran out of fuel");
  return r.reduced;
}

bool isReduced(const WordPtr& w, uint64_t fuel) {
  ReductionResult r = reduceWord(w, fuel);
  return r.status == ReductionResult::Status::Complete &&
         wordEq(r.reduced, w);
}

BoundarySplit boundarySplit(const WordPtr& w, const WordPtr& u, uint64_t fuel) {
  Engine eng;
  eng.fuel.fuel = fuel;
  std::vector<RUnit> lu, ru;
  unitsOf(w, {0}, lu, eng.canc, eng.fuel, eng.exact);
  unitsOf(u, {1}, ru, eng.canc, eng.fuel, eng.exact);
  for (auto& x : lu) {
    x.side = false;
    eng.push(std::move(x));
  }
  for (auto& x : ru) {
    x.side = true;
    eng.push(std::move(x));
  }
  if (eng.fuel.out) throw FuelExhausted("boundarySplit ran out of fuel");

  BoundarySplit out;
  // cancelled left letters, leftmost first
  std::vector<Letter> w1Letters;
  for (auto it = eng.crossPairs.rbegin(); it != eng.crossPairs.rend(); ++it)
    w1Letters.push_back(it->first.l);
  std::vector<WordPtr> w1Parts{wLit(w1Letters)};
  std::vector<WordPtr> u0Parts;
  {
    std::vector<Letter> u0Letters;
    for (const auto& [l, r] : eng.crossPairs) u0Letters.push_back(r.l);
    u0Parts.push_back(wLit(std::move(u0Letters)));
  }
  for (const auto& [lt, rt] : eng.crossMirrors) {
    // mirrors cancel whole stream tails; they sit at the inner ends
    w1Parts.push_back(lt);
    u0Parts.insert(u0Parts.begin(), rt);
  }
  out.w1 = wConcat(std::move(w1Parts));
  out.u0 = wConcat(std::move(u0Parts));

  // survivors: everything before/after the seam
  std::vector<WordPtr> w0Parts, u1Parts;
  for (const auto& unit : eng.stack) {
    WordPtr t;
    if (unit.kind == RUnit::Kind::Lit) {
      std::vector<Letter> ls;
      for (const auto& pl : unit.lits) ls.push_back(pl.l);
      t = wLit(std::move(ls));
    } else if (unit.s.shape == SeqShape::Rat) {
      t = Engine::streamUnitTermRat(unit);
    } else {
      t = streamFromSlot(unit.s, unit.from);
    }
    (unit.side ? u1Parts : w0Parts).push_back(t);
  }
  out.w0 = wConcat(std::move(w0Parts));
  out.u1 = wConcat(std::move(u1Parts));
  return out;
}

std::pair<WordPtr, WordPtr> cyclicReduce(const WordPtr& w, uint64_t fuel) {
  if (w->isE()) throw TrError("cyclicReduce: empty word");
  // strip matching first/last letters
  WordPtr cur = w;
  std::vector<Letter> conj;
  Budget budget{fuel};
  while (budget.burn()) {
    // probe the first and last letter if both exist
    FiniteWord front = project(cur, kIndexCap - 1);
    // cheap path for explicit words
    if (cur->kind == Word::Kind::Lit) {
      const auto& ls = cur->letters;
      if (ls.size() >= 2 && ls.front().cancels(ls.back())) {
        conj.push_back(ls.front());
        cur = wLit(std::vector<Letter>(ls.begin() + 1, ls.end() - 1));
        continue;
      }
      break;
    }
    // general: first unit / last unit letters
    if (cur->kind == Word::Kind::Concat) {
      const auto& ps = cur->parts;
      if (ps.front()->kind == Word::Kind::Lit &&
          ps.back()->kind == Word::Kind::Lit && ps.size() >= 2) {
        Letter a = ps.front()->letters.front();
        Letter b = ps.back()->letters.back();
        if (a.cancels(b)) {
          conj.push_back(a);
          std::vector<WordPtr> mid;
          auto firstRest = std::vector<Letter>(ps.front()->letters.begin() + 1,
                                               ps.front()->letters.end());
          auto lastRest = std::vector<Letter>(ps.back()->letters.begin(),
                                              ps.back()->letters.end() - 1);
          mid.push_back(wLit(std::move(firstRest)));
          for (size_t i = 1; i + 1 < ps.size(); ++i) mid.push_back(ps[i]);
          mid.push_back(wLit(std::move(lastRest)));
          cur = wConcat(std::move(mid));
          continue;
        }
      }
      // mirror edges: first unit is the inverse of the last unit
      if (ps.size() >= 3 && wordEq(wordInverse(ps.front()), ps.back())) {
        std::vector<WordPtr> mid(ps.begin() + 1, ps.end() - 1);
        // the conjugator gains a whole block
        WordPtr newCur = wConcat(std::move(mid));
        std::vector<WordPtr> conjParts{wLit(conj), ps.front()};
        WordPtr conjTerm = wConcat(std::move(conjParts));
        auto [deepConj, core] = cyclicReduce(newCur, fuel - budget.spent);
        return {wConcat({conjTerm, deepConj}), core};
      }
      break;
    }
    break;
  }
  return {wLit(std::move(conj)), cur};
}

SimResult eqSim(const WordPtr& u, const WordPtr& v, uint64_t nmax) {
  for (uint64_t N = 0; N <= nmax; ++N) {
    if (!finiteWordsFreelyEqual(project(u, N), project(v, N)))
      return SimResult{SimResult::Kind::Distinct, N, false};
  }
  ReductionResult r = reduceWord(wConcat({u, wordInverse(v)}));
  if (r.status == ReductionResult::Status::Complete) {
    if (r.reduced->isE()) return SimResult{SimResult::Kind::Equal, nmax, true};
    // structurally distinct beyond the window: hunt for the witness level
    for (uint64_t N = nmax + 1; N <= 4 * (nmax + 2); ++N) {
      if (!finiteWordsFreelyEqual(project(u, N), project(v, N)))
        return SimResult{SimResult::Kind::Distinct, N, false};
    }
  }
  return SimResult{SimResult::Kind::UnknownBeyond, nmax, false};
}

}  // namespace transred
