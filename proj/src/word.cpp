#include "transred/word.hpp"

#include <algorithm>
#include <sstream>

namespace transred {

// --- LetterTpl / AtomTpl -----------------------------------------------

uint64_t LetterTpl::hash() const {
  uint64_t h = fam == Family::GS ? 2 : 3;
  hashMix(h, alpha.hash());
  hashMix(h, idx.hash());
  hashMix(h, uint64_t(int64_t(sign) + 8));
  hashMix(h, repeat);
  return h;
}

AtomTpl AtomTpl::ofLetters(std::vector<LetterTpl> ls) {
  AtomTpl a;
  a.kind = Kind::Letters;
  a.letters = std::move(ls);
  return a;
}

AtomTpl AtomTpl::qpure(Family fam, AlphaRule al, IndexRule level, IndexRule salt,
                       int8_t sign) {
  AtomTpl a;
  a.kind = Kind::QPure;
  a.fam = fam;
  a.alpha = std::move(al);
  a.level = std::move(level);
  a.salt = std::move(salt);
  a.sign = sign;
  return a;
}

AtomTpl AtomTpl::ramp(uint64_t off) {
  AtomTpl a;
  a.kind = Kind::Ramp;
  a.rampOff = off;
  return a;
}

namespace {
uint64_t tri(uint64_t m) { return m * (m + 1) / 2; }
}  // namespace

WordPtr AtomTpl::eval(uint64_t n) const {
  switch (kind) {
    case Kind::Letters: {
      std::vector<Letter> ls;
      for (const auto& t : letters) {
        Letter l = t.eval(n);
        for (uint64_t r = 0; r < t.repeat; ++r) ls.push_back(l);
      }
      return wLit(std::move(ls));
    }
    case Kind::QPure: {
      uint64_t N = std::max<uint64_t>(1, level.eval(n));
      uint32_t al = alpha.eval(n);
      Letter end{fam, al, N - 1, 1};
      uint64_t base = satAdd(N, salt.eval(n));
      TailRule interior;
      interior.atomsPerResidue = {{AtomTpl::ofLetters(
          {LetterTpl{fam, AlphaRule::constant(al), IndexRule::affine(base, 1), 1, 1}})}};
      WordPtr mid = wStream(SeqShape::Rat, interior);
      WordPtr w = wConcat({wLit({end}), mid, wLit({end})});
      return sign == 1 ? w : wordInverse(w);
    }
    case Kind::Ramp: {
      uint64_t m = satAdd(n, rampOff);
      std::vector<Letter> ls;
      for (uint64_t j = 0; j <= m; ++j) ls.push_back(ha(tri(m) + j, 1));
      return wLit(std::move(ls));
    }
  }
  return wE();
}

AtomTpl AtomTpl::inverted() const {
  AtomTpl a = *this;
  switch (kind) {
    case Kind::Letters: {
      std::vector<LetterTpl> ls;
      for (auto it = letters.rbegin(); it != letters.rend(); ++it)
        ls.push_back(it->inverted());
      a.letters = std::move(ls);
      break;
    }
    case Kind::QPure:
      a.sign = -sign;
      break;
    case Kind::Ramp:
      throw UnsupportedShape("ramp atoms are positive by construction");
  }
  return a;
}

AtomTpl AtomTpl::shifted(uint64_t k) const {
  AtomTpl a = *this;
  switch (kind) {
    case Kind::Letters:
      for (auto& t : a.letters) t = t.shifted(k);
      break;
    case Kind::QPure:
      a.alpha = alpha.shifted(k);
      a.level = level.shifted(k);
      a.salt = salt.shifted(k);
      break;
    case Kind::Ramp:
      a.rampOff = satAdd(rampOff, k);
      break;
  }
  return a;
}

bool operator==(const AtomTpl& a, const AtomTpl& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case AtomTpl::Kind::Letters:
      return a.letters == b.letters;
    case AtomTpl::Kind::QPure:
      return a.fam == b.fam && a.alpha == b.alpha && a.level == b.level &&
             a.salt == b.salt && a.sign == b.sign;
    case AtomTpl::Kind::Ramp:
      return a.rampOff == b.rampOff;
  }
  return false;
}

uint64_t AtomTpl::hash() const {
  uint64_t h = static_cast<uint64_t>(kind) + 31;
  for (const auto& l : letters) hashMix(h, l.hash());
  if (kind == Kind::QPure) {
    hashMix(h, fam == Family::GS ? 2 : 3);
    hashMix(h, alpha.hash());
    hashMix(h, level.hash());
    hashMix(h, salt.hash());
    hashMix(h, uint64_t(int64_t(sign) + 8));
  }
  hashMix(h, rampOff);
  return h;
}

WordPtr TailRule::eval(uint64_t n) const {
  std::vector<WordPtr> ps;
  for (const auto& a : atomsAt(n)) ps.push_back(a.eval(n));
  return wConcat(std::move(ps));
}

TailRule TailRule::shifted(uint64_t k) const {
  size_t L = period();
  TailRule r;
  r.atomsPerResidue.assign(L, {});
  for (size_t i = 0; i < L; ++i) {
    for (const auto& a : atomsPerResidue[(i + k) % L])
      r.atomsPerResidue[i].push_back(a.shifted(k));
  }
  return r;
}

TailRule TailRule::inverted() const {
  TailRule r;
  r.atomsPerResidue.clear();
  for (const auto& atoms : atomsPerResidue) {
    std::vector<AtomTpl> inv;
    for (auto it = atoms.rbegin(); it != atoms.rend(); ++it)
      inv.push_back(it->inverted());
    r.atomsPerResidue.push_back(std::move(inv));
  }
  return r;
}

bool TailRule::allEmpty() const {
  for (const auto& atoms : atomsPerResidue) {
    for (const auto& a : atoms)
      if (!a.empty()) return false;
  }
  return true;
}

uint64_t TailRule::hash() const {
  uint64_t h = 77;
  for (const auto& atoms : atomsPerResidue) {
    hashMix(h, atoms.size() + 1000);
    for (const auto& a : atoms) hashMix(h, a.hash());
  }
  return h;
}

WordPtr StreamData::block(uint64_t slot) const {
  if (shape == SeqShape::Rat && !window.trivial() && !window.contains(slot))
    return wE();
  auto it = except.find(slot);
  if (it != except.end()) return it->second;
  uint64_t arg = (shape == SeqShape::Rat && argPerm) ? negCode(slot) : slot;
  return tail.eval(arg);
}

uint64_t StreamData::maxExceptSlot() const {
  uint64_t m = 0;
  for (const auto& [k, v] : except) m = std::max(m, k);
  return m;
}

// --- Word construction -------------------------------------------------

uint64_t Word::hash() const {
  if (hashCache) return hashCache;
  uint64_t h = static_cast<uint64_t>(kind) + 5;
  for (const auto& l : letters) {
    hashMix(h, l.fam == Family::GS ? 2 : 3);
    hashMix(h, l.alpha);
    hashMix(h, l.idx);
    hashMix(h, uint64_t(int64_t(l.sign) + 8));
  }
  for (const auto& p : parts) hashMix(h, p->hash());
  if (kind == Kind::Stream) {
    hashMix(h, static_cast<uint64_t>(stream.shape));
    hashMix(h, stream.tail.hash());
    hashMix(h, stream.argPerm ? 2 : 3);
    hashMix(h, stream.window.hashInto());
    for (const auto& [k, v] : stream.except) {
      hashMix(h, k);
      hashMix(h, v->hash());
    }
  }
  hashCache = h ? h : 1;
  return hashCache;
}

WordPtr wE() {
  static const WordPtr e = std::make_shared<Word>();
  return e;
}

WordPtr wLit(std::vector<Letter> ls) {
  if (ls.empty()) return wE();
  auto w = std::make_shared<Word>();
  w->kind = Word::Kind::Lit;
  w->letters = std::move(ls);
  return w;
}

WordPtr wLetter(Letter l) { return wLit({l}); }

WordPtr wConcat(std::vector<WordPtr> parts) {
  std::vector<WordPtr> flat;
  for (auto& p : parts) {
    if (!p || p->isE()) continue;
    if (p->kind == Word::Kind::Concat) {
      for (const auto& q : p->parts) flat.push_back(q);
    } else {
      flat.push_back(p);
    }
  }
  std::vector<WordPtr> merged;
  for (auto& p : flat) {
    if (!merged.empty() && merged.back()->kind == Word::Kind::Lit &&
        p->kind == Word::Kind::Lit) {
      std::vector<Letter> ls = merged.back()->letters;
      ls.insert(ls.end(), p->letters.begin(), p->letters.end());
      merged.back() = wLit(std::move(ls));
    } else {
      merged.push_back(p);
    }
  }
  if (merged.empty()) return wE();
  if (merged.size() == 1) return merged[0];
  auto w = std::make_shared<Word>();
  w->kind = Word::Kind::Concat;
  w->parts = std::move(merged);
  return w;
}

namespace {

// collapse a tail whose residue lists repeat with a smaller period
TailRule minimalPeriod(TailRule t) {
  uint64_t L = t.period();
  for (uint64_t d = 1; d < L; ++d) {
    if (L % d != 0) continue;
    bool ok = true;
    for (uint64_t i = d; i < L && ok; ++i)
      ok = t.atomsPerResidue[i] == t.atomsPerResidue[i % d];
    if (ok) {
      t.atomsPerResidue.resize(d);
      return t;
    }
  }
  return t;
}

}  // namespace

WordPtr wStream(SeqShape shape, TailRule tail,
                std::map<uint64_t, WordPtr> except, bool argPerm,
                RatWindow window) {
  tail = minimalPeriod(std::move(tail));
  if (shape == SeqShape::Rat && !window.trivial()) {
    for (auto it = except.begin(); it != except.end();) {
      if (!window.contains(it->first)) {
        it = except.erase(it);
      } else {
        ++it;
      }
    }
  }
  // prune exceptions that agree with the rule
  for (auto it = except.begin(); it != except.end();) {
    uint64_t arg = (shape == SeqShape::Rat && argPerm) ? negCode(it->first) : it->first;
    if (wordEq(it->second, tail.eval(arg))) {
      it = except.erase(it);
    } else {
      ++it;
    }
  }
  if (tail.allEmpty()) {
    // only the exceptional blocks remain
    std::vector<std::pair<uint64_t, WordPtr>> blocks(except.begin(), except.end());
    std::sort(blocks.begin(), blocks.end(), [&](const auto& x, const auto& y) {
      switch (shape) {
        case SeqShape::Omega:
          return x.first < y.first;
        case SeqShape::OmegaStar:
          return x.first > y.first;
        case SeqShape::Rat:
          return cmpRatCodes(x.first, y.first) < 0;
      }
      return x.first < y.first;
    });
    std::vector<WordPtr> ps;
    for (auto& [k, v] : blocks) ps.push_back(v);
    return wConcat(std::move(ps));
  }
  auto w = std::make_shared<Word>();
  w->kind = Word::Kind::Stream;
  w->stream.shape = shape;
  w->stream.tail = std::move(tail);
  w->stream.except = std::move(except);
  w->stream.argPerm = argPerm;
  w->stream.window = window;
  return w;
}

bool wordEq(const WordPtr& a, const WordPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  if (a->hash() != b->hash()) return false;
  switch (a->kind) {
    case Word::Kind::Lit:
      return a->letters == b->letters;
    case Word::Kind::Concat: {
      if (a->parts.size() != b->parts.size()) return false;
      for (size_t i = 0; i < a->parts.size(); ++i)
        if (!wordEq(a->parts[i], b->parts[i])) return false;
      return true;
    }
    case Word::Kind::Stream: {
      if (a->stream.shape != b->stream.shape) return false;
      if (a->stream.argPerm != b->stream.argPerm) return false;
      if (!(a->stream.window == b->stream.window)) return false;
      if (!(a->stream.tail == b->stream.tail)) return false;
      if (a->stream.except.size() != b->stream.except.size()) return false;
      auto it = b->stream.except.begin();
      for (const auto& [k, v] : a->stream.except) {
        if (it->first != k || !wordEq(v, it->second)) return false;
        ++it;
      }
      return true;
    }
  }
  return false;
}

WordPtr wordInverse(const WordPtr& w) {
  switch (w->kind) {
    case Word::Kind::Lit: {
      std::vector<Letter> ls;
      for (auto it = w->letters.rbegin(); it != w->letters.rend(); ++it)
        ls.push_back(it->inverse());
      return wLit(std::move(ls));
    }
    case Word::Kind::Concat: {
      std::vector<WordPtr> ps;
      for (auto it = w->parts.rbegin(); it != w->parts.rend(); ++it)
        ps.push_back(wordInverse(*it));
      return wConcat(std::move(ps));
    }
    case Word::Kind::Stream: {
      const StreamData& s = w->stream;
      std::map<uint64_t, WordPtr> ex;
      for (const auto& [k, v] : s.except) {
        uint64_t k2 = s.shape == SeqShape::Rat ? negCode(k) : k;
        ex[k2] = wordInverse(v);
      }
      SeqShape sh = s.shape == SeqShape::Omega     ? SeqShape::OmegaStar
                    : s.shape == SeqShape::OmegaStar ? SeqShape::Omega
                                                     : SeqShape::Rat;
      bool perm = s.shape == SeqShape::Rat ? !s.argPerm : s.argPerm;
      RatWindow win = s.shape == SeqShape::Rat ? s.window.negated() : RatWindow{};
      return wStream(sh, s.tail.inverted(), std::move(ex), perm, win);
    }
  }
  return wE();
}

WordPtr wordPow(const WordPtr& w, int64_t k) {
  if (k == 0) return wE();
  WordPtr base = k > 0 ? w : wordInverse(w);
  int64_t n = k > 0 ? k : -k;
  std::vector<WordPtr> ps(n, base);
  return wConcat(std::move(ps));
}

// --- Domain order / positions -------------------------------------------

namespace {

OrderRule atomDomainRule(const AtomTpl& a) {
  switch (a.kind) {
    case AtomTpl::Kind::Letters: {
      uint64_t total = 0;
      for (const auto& t : a.letters) total += t.repeat;
      return OrderRule::constShape(oFin(total));
    }
    case AtomTpl::Kind::QPure:
      return OrderRule::constShape(oSumFin(
          {oFin(1),
           oSumSeq(SeqShape::Rat, OrderRule::constShape(oFin(1))),
           oFin(1)}));
    case AtomTpl::Kind::Ramp:
      return OrderRule::finOf(IndexRule::affine(a.rampOff + 1, 1));
  }
  return OrderRule::constShape(oEmpty());
}

}  // namespace

OrderPtr domainOrder(const WordPtr& w) {
  switch (w->kind) {
    case Word::Kind::Lit:
      return oFin(w->letters.size());
    case Word::Kind::Concat: {
      std::vector<OrderPtr> ps;
      for (const auto& p : w->parts) ps.push_back(domainOrder(p));
      return oSumFin(std::move(ps));
    }
    case Word::Kind::Stream: {
      const StreamData& s = w->stream;
      std::vector<OrderRule> perResidue;
      for (const auto& atoms : s.tail.atomsPerResidue) {
        std::vector<OrderRule> rs;
        for (const auto& a : atoms) rs.push_back(atomDomainRule(a));
        perResidue.push_back(rs.empty() ? OrderRule::constShape(oEmpty())
                                        : OrderRule::seqOf(std::move(rs)));
      }
      std::map<uint64_t, OrderPtr> ex;
      for (const auto& [k, v] : s.except) ex[k] = domainOrder(v);
      return oSumSeq(s.shape, OrderRule::periodic(std::move(perResidue)),
                     std::move(ex), s.argPerm, s.window);
    }
  }
  return oEmpty();
}

bool validWordPos(const WordPtr& w, const Pos& p) {
  if (p.empty()) return false;
  switch (w->kind) {
    case Word::Kind::Lit:
      return p.size() == 1 && p[0] < w->letters.size();
    case Word::Kind::Concat: {
      if (p[0] >= w->parts.size()) return false;
      Pos rest(p.begin() + 1, p.end());
      return validWordPos(w->parts[p[0]], rest);
    }
    case Word::Kind::Stream: {
      Pos rest(p.begin() + 1, p.end());
      return validWordPos(w->stream.block(p[0]), rest);
    }
  }
  return false;
}

Letter letterAt(const WordPtr& w, const Pos& p) {
  switch (w->kind) {
    case Word::Kind::Lit:
      if (p.size() != 1 || p[0] >= w->letters.size())
        throw InvalidPosition("letterAt: bad literal position");
      return w->letters[p[0]];
    case Word::Kind::Concat: {
      if (p.empty() || p[0] >= w->parts.size())
        throw InvalidPosition("letterAt: bad part index");
      Pos rest(p.begin() + 1, p.end());
      return letterAt(w->parts[p[0]], rest);
    }
    case Word::Kind::Stream: {
      if (p.empty()) throw InvalidPosition("letterAt: missing slot");
      Pos rest(p.begin() + 1, p.end());
      return letterAt(w->stream.block(p[0]), rest);
    }
  }
  throw InvalidPosition("letterAt: empty word");
}

int cmpWordPos(const WordPtr& w, const Pos& a, const Pos& b) {
  switch (w->kind) {
    case Word::Kind::Lit:
      return a[0] < b[0] ? -1 : a[0] > b[0] ? 1 : 0;
    case Word::Kind::Concat: {
      if (a[0] != b[0]) return a[0] < b[0] ? -1 : 1;
      Pos ra(a.begin() + 1, a.end()), rb(b.begin() + 1, b.end());
      return cmpWordPos(w->parts[a[0]], ra, rb);
    }
    case Word::Kind::Stream: {
      int c = 0;
      switch (w->stream.shape) {
        case SeqShape::Omega:
          c = a[0] < b[0] ? -1 : a[0] > b[0] ? 1 : 0;
          break;
        case SeqShape::OmegaStar:
          c = a[0] > b[0] ? -1 : a[0] < b[0] ? 1 : 0;
          break;
        case SeqShape::Rat:
          c = cmpRatCodes(a[0], b[0]);
          break;
      }
      if (c != 0) return c;
      Pos ra(a.begin() + 1, a.end()), rb(b.begin() + 1, b.end());
      return cmpWordPos(w->stream.block(a[0]), ra, rb);
    }
  }
  return 0;
}

// --- legality / depth / norm ---------------------------------------------

namespace {

bool ruleUnbounded(const IndexRule& r) { return r.strictlyIncreasing(); }

void checkTail(const TailRule& tail, Legality& out) {
  for (const auto& atoms : tail.atomsPerResidue) {
    for (const auto& a : atoms) {
      switch (a.kind) {
        case AtomTpl::Kind::Letters:
          for (const auto& t : a.letters) {
            if (!ruleUnbounded(t.idx)) {
              out.ok = false;
              out.level = t.idx.eval(0);
              out.witness = "bounded letter index rule in stream tail";
              return;
            }
          }
          break;
        case AtomTpl::Kind::QPure:
          if (!ruleUnbounded(a.level)) {
            out.ok = false;
            out.level = a.level.eval(0);
            out.witness = "bounded level rule in q-pure stream atom";
            return;
          }
          break;
        case AtomTpl::Kind::Ramp:
          break;
      }
    }
  }
}

}  // namespace

Legality legalityCheck(const WordPtr& w) {
  Legality out;
  switch (w->kind) {
    case Word::Kind::Lit:
      return out;
    case Word::Kind::Concat:
      for (const auto& p : w->parts) {
        out = legalityCheck(p);
        if (!out.ok) return out;
      }
      return out;
    case Word::Kind::Stream: {
      checkTail(w->stream.tail, out);
      if (!out.ok) return out;
      for (const auto& [k, v] : w->stream.except) {
        out = legalityCheck(v);
        if (!out.ok) return out;
      }
      return out;
    }
  }
  return out;
}

std::optional<uint64_t> wordDepth(const WordPtr& w) {
  switch (w->kind) {
    case Word::Kind::Lit: {
      std::optional<uint64_t> d;
      for (const auto& l : w->letters)
        if (!d || l.idx < *d) d = l.idx;
      return d;
    }
    case Word::Kind::Concat: {
      std::optional<uint64_t> d;
      for (const auto& p : w->parts) {
        auto pd = wordDepth(p);
        if (pd && (!d || *pd < *d)) d = pd;
      }
      return d;
    }
    case Word::Kind::Stream: {
      const StreamData& s = w->stream;
      uint64_t scan = s.maxExceptSlot() + s.tail.period() + 1;
      std::optional<uint64_t> d;
      for (uint64_t n = 0; n <= scan; ++n) {
        auto bd = wordDepth(s.block(n));
        if (bd && (!d || *bd < *d)) d = bd;
      }
      if (!d && s.shape == SeqShape::Rat && !s.window.trivial()) {
        // window excludes the small codes; the minimum sits at the first
        // live slot since per-code depths increase
        for (uint64_t n = scan + 1; n < (1ULL << 16); ++n) {
          auto bd = wordDepth(s.block(n));
          if (bd) return bd;
        }
        throw UnsupportedShape("wordDepth: no live slot in window scan");
      }
      return d;
    }
  }
  return std::nullopt;
}

Rat wordNorm(const WordPtr& w) {
  auto d = wordDepth(w);
  if (!d) return Rat{0, 1};
  return Rat{1, int64_t(*d) + 1};
}

// --- projection ------------------------------------------------------------

namespace {

void projectInto(const WordPtr& w, uint64_t N,
                 std::vector<std::pair<Pos, Letter>>& out, const Pos& prefix) {
  switch (w->kind) {
    case Word::Kind::Lit: {
      for (size_t i = 0; i < w->letters.size(); ++i) {
        if (w->letters[i].idx <= N) {
          Pos p = prefix;
          p.push_back(i);
          out.emplace_back(std::move(p), w->letters[i]);
        }
      }
      return;
    }
    case Word::Kind::Concat: {
      for (size_t i = 0; i < w->parts.size(); ++i) {
        Pos p = prefix;
        p.push_back(i);
        projectInto(w->parts[i], N, out, p);
      }
      return;
    }
    case Word::Kind::Stream: {
      const StreamData& s = w->stream;
      std::vector<uint64_t> slots;
      for (const auto& [k, v] : s.except) {
        auto d = wordDepth(v);
        if (d && *d <= N) slots.push_back(k);
      }
      // tail blocks of depth <= N: depths per residue are nondecreasing,
      // scan until a full period of blocks exceeds N
      uint64_t period = s.tail.period();
      uint64_t misses = 0;
      bool windowed = s.shape == SeqShape::Rat && !s.window.trivial();
      for (uint64_t n = 0; misses < period && n < kIndexCap; ++n) {
        if (s.except.count(n)) continue;
        uint64_t arg = (s.shape == SeqShape::Rat && s.argPerm) ? negCode(n) : n;
        auto d = wordDepth(s.tail.eval(arg));
        bool within = d && *d <= N;
        bool live = !windowed || s.window.contains(n);
        if (s.shape == SeqShape::Rat && s.argPerm) {
          // permuted arguments are not monotone in the slot; scan further
          if (within && live) slots.push_back(n);
          if (n > 4 * (N + 2) + 64) break;
          continue;
        }
        if (within) {
          if (live) slots.push_back(n);
          misses = 0;
        } else if (n > s.maxExceptSlot()) {
          ++misses;
        }
      }
      std::sort(slots.begin(), slots.end(), [&](uint64_t a, uint64_t b) {
        switch (s.shape) {
          case SeqShape::Omega:
            return a < b;
          case SeqShape::OmegaStar:
            return a > b;
          case SeqShape::Rat:
            return cmpRatCodes(a, b) < 0;
        }
        return a < b;
      });
      for (uint64_t n : slots) {
        Pos p = prefix;
        p.push_back(n);
        projectInto(s.block(n), N, out, p);
      }
      return;
    }
  }
}

}  // namespace

std::vector<std::pair<Pos, Letter>> projectWithPos(const WordPtr& w, uint64_t N) {
  std::vector<std::pair<Pos, Letter>> out;
  projectInto(w, N, out, {});
  return out;
}

FiniteWord project(const WordPtr& w, uint64_t N) {
  FiniteWord out;
  for (auto& [p, l] : projectWithPos(w, N)) out.push_back(l);
  return out;
}

// --- finite free reduction ---------------------------------------------

FiniteWord freeReduceFinite(const FiniteWord& w) {
  FiniteWord stack;
  for (const auto& l : w) {
    if (!stack.empty() && stack.back().cancels(l)) {
      stack.pop_back();
    } else {
      stack.push_back(l);
    }
  }
  return stack;
}

bool finiteWordsFreelyEqual(const FiniteWord& a, const FiniteWord& b) {
  FiniteWord m = a;
  for (auto it = b.rbegin(); it != b.rend(); ++it) m.push_back(it->inverse());
  return freeReduceFinite(m).empty();
}

std::map<std::tuple<uint8_t, uint32_t, uint64_t>, SiteCount> siteCounts(
    const FiniteWord& w) {
  std::map<std::tuple<uint8_t, uint32_t, uint64_t>, SiteCount> m;
  for (const auto& l : w) {
    auto& e = m[{uint8_t(l.fam), l.alpha, l.idx}];
    if (l.sign > 0) {
      ++e.pos;
    } else {
      ++e.neg;
    }
  }
  return m;
}

std::string letterText(const Letter& l) {
  std::ostringstream os;
  if (l.fam == Family::GS) {
    os << "a[" << l.alpha << "," << l.idx << "]";
  } else {
    os << "c[" << l.idx << "]";
  }
  if (l.sign < 0) os << "^-1";
  return os.str();
}

std::string finiteWordText(const FiniteWord& w) {
  if (w.empty()) return "E";
  std::ostringstream os;
  for (size_t i = 0; i < w.size(); ++i) {
    if (i) os << "*";
    os << letterText(w[i]);
  }
  return os.str();
}

}  // namespace transred
