#include "transred/close.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>
#include <set>

namespace transred {

// --- IndexSet ----------------------------------------------------------

IndexSet IndexSet::aprog(uint64_t c_, uint64_t s_) {
  IndexSet r;
  r.kind = Kind::AProg;
  r.c = c_ % (s_ ? s_ : 1);
  r.s = s_ ? s_ : 1;
  return r;
}

IndexSet IndexSet::cofinEx(std::vector<uint64_t> ex) {
  IndexSet r;
  r.kind = Kind::CofinEx;
  std::sort(ex.begin(), ex.end());
  r.list = std::move(ex);
  return r;
}

IndexSet IndexSet::finite(std::vector<uint64_t> in) {
  IndexSet r;
  r.kind = Kind::Finite;
  std::sort(in.begin(), in.end());
  r.list = std::move(in);
  return r;
}

bool IndexSet::member(uint64_t n) const {
  switch (kind) {
    case Kind::All:
      return true;
    case Kind::AProg:
      return n % s == c;
    case Kind::CofinEx:
      return !std::binary_search(list.begin(), list.end(), n);
    case Kind::Finite:
      return std::binary_search(list.begin(), list.end(), n);
  }
  return false;
}

bool IndexSet::infinite() const { return kind != Kind::Finite; }

// --- Selector ----------------------------------------------------------

Selector Selector::cofiniteEx(std::vector<Pos> excluded) {
  Selector r;
  r.kind = Kind::CofiniteEx;
  r.list = std::move(excluded);
  return r;
}

Selector Selector::finiteSet(std::vector<Pos> included) {
  Selector r;
  r.kind = Kind::FiniteSet;
  r.list = std::move(included);
  return r;
}

Selector Selector::aprog(uint64_t c_, uint64_t s_) {
  Selector r;
  r.kind = Kind::AProg;
  r.s = s_ ? s_ : 1;
  r.c = c_ % r.s;
  return r;
}

Selector Selector::forParts(std::vector<Selector> parts) {
  Selector r;
  r.kind = Kind::PerFin;
  r.perFin = std::move(parts);
  return r;
}

Selector Selector::forSlots(IndexSet slots, std::vector<Selector> inner,
                          std::map<uint64_t, Selector> innerEx) {
  Selector r;
  r.kind = Kind::PerSeq;
  r.slots = std::move(slots);
  r.inner = inner.empty() ? std::vector<Selector>{Selector::all()} : std::move(inner);
  r.innerEx = std::move(innerEx);
  return r;
}

const Selector& Selector::innerAt(uint64_t n) const {
  auto it = innerEx.find(n);
  if (it != innerEx.end()) return it->second;
  return inner[n % inner.size()];
}

bool Selector::operator==(const Selector& o) const {
  if (kind != o.kind) return false;
  return list == o.list && c == o.c && s == o.s && perFin == o.perFin &&
         slots == o.slots && inner == o.inner && innerEx == o.innerEx;
}

// --- validity / membership -------------------------------------------------

bool selValid(const OrderPtr& o, const Selector& s) {
  switch (s.kind) {
    case Selector::Kind::All:
      return true;
    case Selector::Kind::CofiniteEx:
    case Selector::Kind::FiniteSet:
      for (const auto& p : s.list)
        if (!validPos(o, p)) return false;
      return true;
    case Selector::Kind::AProg:
      return o->kind == Order::Kind::Omega || o->kind == Order::Kind::OmegaStar ||
             o->kind == Order::Kind::Rat;
    case Selector::Kind::PerFin:
      if (o->kind != Order::Kind::SumFin) return false;
      if (s.perFin.size() != o->parts.size()) return false;
      for (size_t i = 0; i < s.perFin.size(); ++i)
        if (!selValid(o->parts[i], s.perFin[i])) return false;
      return true;
    case Selector::Kind::PerSeq:
      if (o->kind != Order::Kind::SumSeq) return false;
      return !s.inner.empty();
  }
  return false;
}

namespace {

const Selector kEmptySel = Selector::finiteSet({});

// Selector induced on part/slot `head` of a sum order.
Selector innerOfSel(const Selector& sel, uint64_t head) {
  switch (sel.kind) {
    case Selector::Kind::All:
      return Selector::all();
    case Selector::Kind::CofiniteEx: {
      std::vector<Pos> ex;
      for (const auto& p : sel.list)
        if (!p.empty() && p[0] == head) ex.emplace_back(p.begin() + 1, p.end());
      return Selector::cofiniteEx(std::move(ex));
    }
    case Selector::Kind::FiniteSet: {
      std::vector<Pos> in;
      for (const auto& p : sel.list)
        if (!p.empty() && p[0] == head) in.emplace_back(p.begin() + 1, p.end());
      return Selector::finiteSet(std::move(in));
    }
    case Selector::Kind::PerFin:
      return sel.perFin[head];
    case Selector::Kind::PerSeq:
      if (!sel.slots.member(head)) return kEmptySel;
      return sel.innerAt(head);
    case Selector::Kind::AProg:
      throw UnsupportedShape("AProg selector on a sum order");
  }
  return kEmptySel;
}

}  // namespace

bool selMember(const OrderPtr& o, const Selector& s, const Pos& p) {
  switch (s.kind) {
    case Selector::Kind::All:
      return true;
    case Selector::Kind::CofiniteEx:
      return std::find(s.list.begin(), s.list.end(), p) == s.list.end();
    case Selector::Kind::FiniteSet:
      return std::find(s.list.begin(), s.list.end(), p) != s.list.end();
    case Selector::Kind::AProg:
      return p[0] % s.s == s.c;
    case Selector::Kind::PerFin:
    case Selector::Kind::PerSeq: {
      uint64_t head = p[0];
      Pos rest(p.begin() + 1, p.end());
      OrderPtr sub = s.kind == Selector::Kind::PerFin ? o->parts[head]
                                                      : o->content(head);
      return selMember(sub, innerOfSel(s, head), rest);
    }
  }
  return false;
}

// --- Stern-Brocot code-class density -----------------------------------

namespace {

// reach of residue r under the child maps of one sign side, mod s
std::set<uint64_t> reachSet(uint64_t r, uint64_t s, bool positive) {
  std::set<uint64_t> seen{r % s};
  std::deque<uint64_t> q{r % s};
  while (!q.empty()) {
    uint64_t x = q.front();
    q.pop_front();
    uint64_t c1 = positive ? (2 * x + 1) % s : (2 * x) % s;
    uint64_t c2 = positive ? (2 * x + 3) % s : (2 * x + 2) % s;
    for (uint64_t c : {c1, c2})
      if (seen.insert(c).second) q.push_back(c);
  }
  return seen;
}

bool sideDense(const std::set<uint64_t>& targets, uint64_t s, bool positive) {
  // roots on the positive side carry odd codes, negative side even codes;
  // for even s the code parity pins the residue parity
  for (uint64_t r = 0; r < s; ++r) {
    bool feasible =
        s % 2 == 1 || (positive ? r % 2 == 1 : r % 2 == 0);
    if (!feasible) continue;
    auto reach = reachSet(r, s, positive);
    bool hit = false;
    for (uint64_t t : targets)
      if (reach.count(t)) {
        hit = true;
        break;
      }
    if (!hit) return false;
  }
  return true;
}

}  // namespace

bool ratClassDense(uint64_t c, uint64_t s) {
  if (s <= 1) return true;
  std::set<uint64_t> t{c % s};
  return sideDense(t, s, true) && sideDense(t, s, false);
}

bool ratClassSetDense(const std::set<uint64_t>& targets, uint64_t s) {
  if (s <= 1) return !targets.empty();
  if (targets.empty()) return false;
  return sideDense(targets, s, true) && sideDense(targets, s, false);
}

// --- Trace edges -------------------------------------------------------

namespace {

struct TraceEdge {
  enum class Kind : uint8_t { Empty, Closed, Open, FromBound } kind;
  Pos pos;
  static TraceEdge empty() { return {Kind::Empty, {}}; }
  static TraceEdge closed(Pos p) { return {Kind::Closed, std::move(p)}; }
  static TraceEdge open(Pos p) { return {Kind::Open, std::move(p)}; }
  static TraceEdge fromBound() { return {Kind::FromBound, {}}; }
};

TraceEdge prependEdge(uint64_t head, TraceEdge e) {
  if (e.kind == TraceEdge::Kind::Closed || e.kind == TraceEdge::Kind::Open)
    e.pos.insert(e.pos.begin(), head);
  return e;
}

struct Clip2 {
  bool empty;
  Interval inner;
};

Clip2 clipHead(const OrderPtr& o, const Interval& i, uint64_t head, bool slot) {
  // mirrors the clip logic in order.cpp; re-derived here via interval tests
  Interval in = Interval::all();
  auto cmpHead = [&](uint64_t a, uint64_t b) -> int {
    if (!slot) return a < b ? -1 : a > b ? 1 : 0;
    switch (o->shape) {
      case SeqShape::Omega:
        return a < b ? -1 : a > b ? 1 : 0;
      case SeqShape::OmegaStar:
        return a > b ? -1 : a < b ? 1 : 0;
      case SeqShape::Rat:
        return cmpRatCodes(a, b);
    }
    return 0;
  };
  if (i.empty) return {true, in};
  if (i.lo.kind == IBound::Kind::At) {
    int c = cmpHead(head, i.lo.pos[0]);
    if (c < 0) return {true, in};
    if (c == 0) {
      Pos rest(i.lo.pos.begin() + 1, i.lo.pos.end());
      if (rest.empty()) {
        if (!i.lo.closed) return {true, in};
      } else {
        in.lo = IBound::at(std::move(rest), i.lo.closed);
      }
    }
  }
  if (i.hi.kind == IBound::Kind::At) {
    int c = cmpHead(head, i.hi.pos[0]);
    if (c > 0) return {true, in};
    if (c == 0) {
      Pos rest(i.hi.pos.begin() + 1, i.hi.pos.end());
      if (rest.empty()) {
        if (!i.hi.closed) return {true, in};
      } else {
        in.hi = IBound::at(std::move(rest), i.hi.closed);
      }
    }
  }
  return {false, in};
}

constexpr uint64_t kSlotScan = 4096;

TraceEdge lowerEdge(const OrderPtr& o, const Selector& sel, const Interval& iv);
TraceEdge upperEdge(const OrderPtr& o, const Selector& sel, const Interval& iv);

bool traceNonempty(const OrderPtr& o, const Selector& sel, const Interval& i) {
  return lowerEdge(o, sel, i).kind != TraceEdge::Kind::Empty;
}

// Find a Stern-Brocot code with value strictly inside (lo, hi) (nullopt bounds
// = unbounded) satisfying pred; bounded search.
std::optional<uint64_t> findRatCodeIn(std::optional<Rat> lo, std::optional<Rat> hi,
                                      const std::function<bool(uint64_t)>& pred) {
  auto tryCode = [&](uint64_t code) -> bool {
    Rat v = ratOfCode(code);
    if (lo && !(*lo < v)) return false;
    if (hi && !(v < *hi)) return false;
    return pred(code);
  };
  if (tryCode(0)) return 0;
  for (bool positive : {true, false}) {
    // work with magnitudes on this side
    std::optional<Rat> a, b;  // 0 <= a < b bounds for |value|
    if (positive) {
      a = Rat{0, 1};
      if (lo && Rat{0, 1} < *lo) a = *lo;
      if (hi) {
        if (!(Rat{0, 1} < *hi)) continue;  // side empty
        b = *hi;
      }
    } else {
      a = Rat{0, 1};
      if (hi && *hi < Rat{0, 1}) a = Rat{-hi->num, hi->den};
      if (lo) {
        if (!(*lo < Rat{0, 1})) continue;
        b = Rat{-lo->num, lo->den};
      }
    }
    // descend to a subtree with L >= a and R <= b (subtree values lie
    // strictly between its bounding pair L, R)
    int64_t lnum = 0, lden = 1, rnum = 1, rden = 0;
    uint64_t k = 1;
    bool found = false;
    for (int depth = 0; depth < 128; ++depth) {
      bool leftOk = !(Rat{lnum, lden} < *a);
      bool rightOk = !b || (rden != 0 && !(*b < Rat{rnum, rden}));
      if (leftOk && rightOk) {
        found = true;
        break;
      }
      int64_t mn = lnum + rnum, md = lden + rden;
      Rat m{mn, md};
      if (!(*a < m)) {
        k = 2 * k + 1;  // subtree too small: go right
        lnum = mn;
        lden = md;
      } else if (b && !(m < *b)) {
        k = 2 * k;  // too large: go left
        rnum = mn;
        rden = md;
      } else if (!leftOk) {
        k = 2 * k + 1;  // tighten the left bound
        lnum = mn;
        lden = md;
      } else {
        k = 2 * k;  // tighten the right bound
        rnum = mn;
        rden = md;
      }
      if (k > (1ULL << 40)) break;
    }
    if (!found) continue;
    // BFS the subtree's codes
    std::deque<uint64_t> q{positive ? 2 * k - 1 : 2 * k};
    size_t steps = 0;
    while (!q.empty() && steps < (1u << 14)) {
      uint64_t code = q.front();
      q.pop_front();
      ++steps;
      if (tryCode(code)) return code;
      if (code > (1ULL << 50)) continue;
      if (positive) {
        q.push_back(2 * code + 1);
        q.push_back(2 * code + 3);
      } else {
        q.push_back(2 * code);
        q.push_back(2 * code + 2);
      }
    }
  }
  return std::nullopt;
}

std::optional<Rat> boundValue(const IBound& b) {
  if (b.kind != IBound::Kind::At) return std::nullopt;
  return ratOfCode(b.pos[0]);
}

// lower edge of trace(sel) within interval, on order o
TraceEdge lowerEdge(const OrderPtr& o, const Selector& sel, const Interval& iv) {
  Interval i = normalizeInterval(o, iv);
  if (i.empty) return TraceEdge::empty();
  switch (sel.kind) {
    case Selector::Kind::All: {
      auto m = minPosIn(o, i);
      if (m.kind == ExtremeResult::Kind::Found) return TraceEdge::closed(m.pos);
      if (m.kind == ExtremeResult::Kind::Empty) return TraceEdge::empty();
      return TraceEdge::fromBound();
    }
    case Selector::Kind::FiniteSet: {
      const Pos* best = nullptr;
      for (const auto& p : sel.list) {
        if (!validPos(o, p) || !intervalContains(o, i, p)) continue;
        if (!best || cmpPos(o, p, *best) < 0) best = &p;
      }
      if (!best) return TraceEdge::empty();
      return TraceEdge::closed(*best);
    }
    case Selector::Kind::CofiniteEx: {
      Interval cur = i;
      std::optional<Pos> lastSkipped;
      for (size_t round = 0; round <= sel.list.size(); ++round) {
        auto m = minPosIn(o, cur);
        if (m.kind == ExtremeResult::Kind::Empty) return TraceEdge::empty();
        if (m.kind == ExtremeResult::Kind::NoExtreme) {
          // dense remainder: skipped excluded minima sit below all trace
          if (lastSkipped) return TraceEdge::open(*lastSkipped);
          return TraceEdge::fromBound();
        }
        bool excl = std::find(sel.list.begin(), sel.list.end(), m.pos) !=
                    sel.list.end();
        if (!excl) return TraceEdge::closed(m.pos);
        lastSkipped = m.pos;
        cur.lo = IBound::at(m.pos, false);
        cur = normalizeInterval(o, cur);
        if (cur.empty) return TraceEdge::empty();
      }
      return TraceEdge::empty();
    }
    case Selector::Kind::AProg: {
      if (o->kind == Order::Kind::Omega) {
        uint64_t lo = 0;
        if (i.lo.kind == IBound::Kind::At)
          lo = i.lo.pos[0] + (i.lo.closed ? 0 : 1);
        uint64_t first = lo + ((sel.c + sel.s - lo % sel.s) % sel.s);
        if (i.hi.kind == IBound::Kind::At) {
          uint64_t hi = i.hi.pos[0];
          if ((i.hi.closed && first > hi) || (!i.hi.closed && first >= hi))
            return TraceEdge::empty();
        }
        return TraceEdge::closed({first});
      }
      if (o->kind == Order::Kind::OmegaStar) {
        if (i.lo.kind != IBound::Kind::At) return TraceEdge::fromBound();
        uint64_t loSlot = i.lo.pos[0];
        if (!i.lo.closed) {
          if (loSlot == 0) return TraceEdge::empty();
          loSlot -= 1;
        }
        // largest class member <= loSlot
        if (loSlot < sel.c) return TraceEdge::empty();
        uint64_t first = loSlot - ((loSlot - sel.c) % sel.s);
        if (i.hi.kind == IBound::Kind::At) {
          uint64_t hiSlot = i.hi.pos[0];
          if ((i.hi.closed && first < hiSlot) || (!i.hi.closed && first <= hiSlot))
            return TraceEdge::empty();
        }
        return TraceEdge::closed({first});
      }
      // Rat
      if (i.lo.kind == IBound::Kind::At && i.lo.closed &&
          i.lo.pos[0] % sel.s == sel.c)
        return TraceEdge::closed({i.lo.pos[0]});
      auto loV = boundValue(i.lo);
      auto hiV = boundValue(i.hi);
      auto witness = findRatCodeIn(loV, hiV, [&](uint64_t code) {
        return code % sel.s == sel.c;
      });
      if (witness) {
        if (i.lo.kind == IBound::Kind::At && i.lo.closed)
          return TraceEdge::open({i.lo.pos[0]});
        return TraceEdge::fromBound();
      }
      if (i.hi.kind == IBound::Kind::At && i.hi.closed &&
          i.hi.pos[0] % sel.s == sel.c &&
          intervalContains(o, i, {i.hi.pos[0]}))
        return TraceEdge::closed({i.hi.pos[0]});
      return TraceEdge::empty();
    }
    case Selector::Kind::PerFin: {
      for (size_t p = 0; p < o->parts.size(); ++p) {
        Clip2 c = clipHead(o, i, p, false);
        if (c.empty) continue;
        TraceEdge e = lowerEdge(o->parts[p], sel.perFin[p], c.inner);
        if (e.kind == TraceEdge::Kind::Empty) continue;
        if (e.kind != TraceEdge::Kind::FromBound) return prependEdge(p, e);
        // hull reaches the part's clipped lower bound; the greatest interval
        // element in earlier parts bounds it from below
        for (size_t q = p; q-- > 0;) {
          Clip2 cq = clipHead(o, i, q, false);
          if (cq.empty) continue;
          auto m = maxPosIn(o->parts[q], cq.inner);
          if (m.kind == ExtremeResult::Kind::Found) {
            Pos pos = m.pos;
            pos.insert(pos.begin(), q);
            return TraceEdge::open(pos);
          }
          if (m.kind == ExtremeResult::Kind::NoExtreme)
            throw UnsupportedShape("infinite residual below trace");
        }
        return TraceEdge::fromBound();
      }
      return TraceEdge::empty();
    }
    case Selector::Kind::PerSeq: {
      if (o->shape == SeqShape::Omega || o->shape == SeqShape::OmegaStar) {
        bool omega = o->shape == SeqShape::Omega;
        // enumerate slots in position order from the left end of the interval
        std::vector<uint64_t> scanned;
        uint64_t start;
        if (i.lo.kind == IBound::Kind::At) {
          start = i.lo.pos[0];
        } else if (omega) {
          start = 0;
        } else {
          // omega* unbounded to the left: trace unbounded below if any
          // selected slot has a nonempty trace arbitrarily far out
          for (uint64_t n = 0; n < kSlotScan; ++n) {
            if (!sel.slots.member(n)) continue;
            auto c = o->content(n);
            if (isEmptyOrder(c)) continue;
            Clip2 cl = clipHead(o, i, n, true);
            if (cl.empty) continue;
            if (traceNonempty(c, innerOfSel(sel, n), cl.inner))
              return TraceEdge::fromBound();
          }
          return TraceEdge::empty();
        }
        uint64_t n = start;
        for (uint64_t step = 0; step < kSlotScan; ++step) {
          Clip2 cl = clipHead(o, i, n, true);
          if (!cl.empty) {
            scanned.push_back(n);
            TraceEdge e = lowerEdge(o->content(n), innerOfSel(sel, n), cl.inner);
            if (e.kind == TraceEdge::Kind::Closed || e.kind == TraceEdge::Kind::Open)
              return prependEdge(n, e);
            if (e.kind == TraceEdge::Kind::FromBound) {
              for (size_t j = scanned.size() - 1; j-- > 0;) {
                uint64_t q = scanned[j];
                Clip2 cq = clipHead(o, i, q, true);
                if (cq.empty) continue;
                auto m = maxPosIn(o->content(q), cq.inner);
                if (m.kind == ExtremeResult::Kind::Found) {
                  Pos pos = m.pos;
                  pos.insert(pos.begin(), q);
                  return TraceEdge::open(pos);
                }
                if (m.kind == ExtremeResult::Kind::NoExtreme)
                  throw UnsupportedShape("infinite residual below trace");
              }
              return TraceEdge::fromBound();
            }
          } else if (i.hi.kind == IBound::Kind::At) {
            bool past = omega ? n > i.hi.pos[0] : n < i.hi.pos[0];
            if (past) return TraceEdge::empty();
          }
          if (omega) {
            ++n;
          } else {
            if (n == 0) return TraceEdge::empty();
            --n;
          }
        }
        throw UnsupportedShape("lowerEdge: slot scan cap exceeded");
      }
      // Rat-shaped sum
      std::optional<uint64_t> loSlot;
      if (i.lo.kind == IBound::Kind::At) {
        loSlot = i.lo.pos[0];
        Clip2 cl = clipHead(o, i, *loSlot, true);
        if (!cl.empty) {
          TraceEdge e =
              lowerEdge(o->content(*loSlot), innerOfSel(sel, *loSlot), cl.inner);
          if (e.kind == TraceEdge::Kind::Closed || e.kind == TraceEdge::Kind::Open)
            return prependEdge(*loSlot, e);
          if (e.kind == TraceEdge::Kind::FromBound) return TraceEdge::fromBound();
        }
      }
      // hunt a selected slot strictly between the bound slots with trace
      auto loV = boundValue(i.lo);
      auto hiV = boundValue(i.hi);
      auto witness = findRatCodeIn(loV, hiV, [&](uint64_t code) {
        if (!sel.slots.member(code)) return false;
        auto c = o->content(code);
        if (isEmptyOrder(c)) return false;
        return traceNonempty(c, innerOfSel(sel, code), Interval::all());
      });
      if (witness) {
        // the slice of the interval inside the lower-bound slot (with empty
        // trace there) sits below all trace
        if (loSlot) {
          Clip2 cl = clipHead(o, i, *loSlot, true);
          if (!cl.empty) {
            auto m = maxPosIn(o->content(*loSlot), cl.inner);
            if (m.kind == ExtremeResult::Kind::Found) {
              Pos pos = m.pos;
              pos.insert(pos.begin(), *loSlot);
              return TraceEdge::open(pos);
            }
            if (m.kind == ExtremeResult::Kind::NoExtreme)
              throw UnsupportedShape("infinite residual below trace");
          }
        }
        return TraceEdge::fromBound();
      }
      if (i.hi.kind == IBound::Kind::At) {
        uint64_t hiSlot = i.hi.pos[0];
        if (!loSlot || *loSlot != hiSlot) {
          Clip2 cl = clipHead(o, i, hiSlot, true);
          if (!cl.empty) {
            TraceEdge e =
                lowerEdge(o->content(hiSlot), innerOfSel(sel, hiSlot), cl.inner);
            if (e.kind == TraceEdge::Kind::Closed ||
                e.kind == TraceEdge::Kind::Open)
              return prependEdge(hiSlot, e);
            if (e.kind == TraceEdge::Kind::FromBound)
              throw UnsupportedShape("trace confined to top slot, dense below");
          }
        }
      }
      return TraceEdge::empty();
    }
  }
  return TraceEdge::empty();
}

TraceEdge upperEdge(const OrderPtr& o, const Selector& sel, const Interval& iv) {
  Interval i = normalizeInterval(o, iv);
  if (i.empty) return TraceEdge::empty();
  switch (sel.kind) {
    case Selector::Kind::All: {
      auto m = maxPosIn(o, i);
      if (m.kind == ExtremeResult::Kind::Found) return TraceEdge::closed(m.pos);
      if (m.kind == ExtremeResult::Kind::Empty) return TraceEdge::empty();
      return TraceEdge::fromBound();
    }
    case Selector::Kind::FiniteSet: {
      const Pos* best = nullptr;
      for (const auto& p : sel.list) {
        if (!validPos(o, p) || !intervalContains(o, i, p)) continue;
        if (!best || cmpPos(o, p, *best) > 0) best = &p;
      }
      if (!best) return TraceEdge::empty();
      return TraceEdge::closed(*best);
    }
    case Selector::Kind::CofiniteEx: {
      Interval cur = i;
      std::optional<Pos> lastSkipped;
      for (size_t round = 0; round <= sel.list.size(); ++round) {
        auto m = maxPosIn(o, cur);
        if (m.kind == ExtremeResult::Kind::Empty) return TraceEdge::empty();
        if (m.kind == ExtremeResult::Kind::NoExtreme) {
          if (lastSkipped) return TraceEdge::open(*lastSkipped);
          return TraceEdge::fromBound();
        }
        bool excl = std::find(sel.list.begin(), sel.list.end(), m.pos) !=
                    sel.list.end();
        if (!excl) return TraceEdge::closed(m.pos);
        lastSkipped = m.pos;
        cur.hi = IBound::at(m.pos, false);
        cur = normalizeInterval(o, cur);
        if (cur.empty) return TraceEdge::empty();
      }
      return TraceEdge::empty();
    }
    case Selector::Kind::AProg: {
      if (o->kind == Order::Kind::OmegaStar) {
        uint64_t hiSlot = 0;
        if (i.hi.kind == IBound::Kind::At)
          hiSlot = i.hi.pos[0] + (i.hi.closed ? 0 : 1);
        uint64_t first = hiSlot + ((sel.c + sel.s - hiSlot % sel.s) % sel.s);
        if (i.lo.kind == IBound::Kind::At) {
          uint64_t loSlot = i.lo.pos[0];
          if ((i.lo.closed && first > loSlot) || (!i.lo.closed && first >= loSlot))
            return TraceEdge::empty();
        }
        return TraceEdge::closed({first});
      }
      if (o->kind == Order::Kind::Omega) {
        if (i.hi.kind != IBound::Kind::At) return TraceEdge::fromBound();
        uint64_t hi = i.hi.pos[0];
        if (!i.hi.closed) {
          if (hi == 0) return TraceEdge::empty();
          hi -= 1;
        }
        if (hi < sel.c) return TraceEdge::empty();
        uint64_t last = hi - ((hi - sel.c) % sel.s);
        if (i.lo.kind == IBound::Kind::At) {
          uint64_t lo = i.lo.pos[0];
          if ((i.lo.closed && last < lo) || (!i.lo.closed && last <= lo))
            return TraceEdge::empty();
        }
        return TraceEdge::closed({last});
      }
      // Rat
      if (i.hi.kind == IBound::Kind::At && i.hi.closed &&
          i.hi.pos[0] % sel.s == sel.c)
        return TraceEdge::closed({i.hi.pos[0]});
      auto loV = boundValue(i.lo);
      auto hiV = boundValue(i.hi);
      auto witness = findRatCodeIn(loV, hiV, [&](uint64_t code) {
        return code % sel.s == sel.c;
      });
      if (witness) {
        if (i.hi.kind == IBound::Kind::At && i.hi.closed)
          return TraceEdge::open({i.hi.pos[0]});
        return TraceEdge::fromBound();
      }
      if (i.lo.kind == IBound::Kind::At && i.lo.closed &&
          i.lo.pos[0] % sel.s == sel.c &&
          intervalContains(o, i, {i.lo.pos[0]}))
        return TraceEdge::closed({i.lo.pos[0]});
      return TraceEdge::empty();
    }
    case Selector::Kind::PerFin: {
      for (size_t p = o->parts.size(); p-- > 0;) {
        Clip2 c = clipHead(o, i, p, false);
        if (c.empty) continue;
        TraceEdge e = upperEdge(o->parts[p], sel.perFin[p], c.inner);
        if (e.kind == TraceEdge::Kind::Empty) continue;
        if (e.kind != TraceEdge::Kind::FromBound) return prependEdge(p, e);
        for (size_t q = p + 1; q < o->parts.size(); ++q) {
          Clip2 cq = clipHead(o, i, q, false);
          if (cq.empty) continue;
          auto m = minPosIn(o->parts[q], cq.inner);
          if (m.kind == ExtremeResult::Kind::Found) {
            Pos pos = m.pos;
            pos.insert(pos.begin(), q);
            return TraceEdge::open(pos);
          }
          if (m.kind == ExtremeResult::Kind::NoExtreme)
            throw UnsupportedShape("infinite residual above trace");
        }
        return TraceEdge::fromBound();
      }
      return TraceEdge::empty();
    }
    case Selector::Kind::PerSeq: {
      if (o->shape == SeqShape::Omega || o->shape == SeqShape::OmegaStar) {
        bool omega = o->shape == SeqShape::Omega;
        std::vector<uint64_t> scanned;
        uint64_t start;
        if (i.hi.kind == IBound::Kind::At) {
          start = i.hi.pos[0];
        } else if (!omega) {
          start = 0;
        } else {
          for (uint64_t n = 0; n < kSlotScan; ++n) {
            if (!sel.slots.member(n)) continue;
            auto c = o->content(n);
            if (isEmptyOrder(c)) continue;
            Clip2 cl = clipHead(o, i, n, true);
            if (cl.empty) continue;
            if (traceNonempty(c, innerOfSel(sel, n), cl.inner))
              return TraceEdge::fromBound();
          }
          return TraceEdge::empty();
        }
        uint64_t n = start;
        for (uint64_t step = 0; step < kSlotScan; ++step) {
          Clip2 cl = clipHead(o, i, n, true);
          if (!cl.empty) {
            scanned.push_back(n);
            TraceEdge e = upperEdge(o->content(n), innerOfSel(sel, n), cl.inner);
            if (e.kind == TraceEdge::Kind::Closed || e.kind == TraceEdge::Kind::Open)
              return prependEdge(n, e);
            if (e.kind == TraceEdge::Kind::FromBound) {
              for (size_t j = scanned.size() - 1; j-- > 0;) {
                uint64_t q = scanned[j];
                Clip2 cq = clipHead(o, i, q, true);
                if (cq.empty) continue;
                auto m = minPosIn(o->content(q), cq.inner);
                if (m.kind == ExtremeResult::Kind::Found) {
                  Pos pos = m.pos;
                  pos.insert(pos.begin(), q);
                  return TraceEdge::open(pos);
                }
                if (m.kind == ExtremeResult::Kind::NoExtreme)
                  throw UnsupportedShape("infinite residual above trace");
              }
              return TraceEdge::fromBound();
            }
          } else if (i.lo.kind == IBound::Kind::At) {
            bool past = omega ? n < i.lo.pos[0] : n > i.lo.pos[0];
            if (past) return TraceEdge::empty();
          }
          if (omega) {
            if (n == 0) return TraceEdge::empty();
            --n;
          } else {
            ++n;
          }
        }
        throw UnsupportedShape("upperEdge: slot scan cap exceeded");
      }
      std::optional<uint64_t> hiSlot;
      if (i.hi.kind == IBound::Kind::At) {
        hiSlot = i.hi.pos[0];
        Clip2 cl = clipHead(o, i, *hiSlot, true);
        if (!cl.empty) {
          TraceEdge e =
              upperEdge(o->content(*hiSlot), innerOfSel(sel, *hiSlot), cl.inner);
          if (e.kind == TraceEdge::Kind::Closed || e.kind == TraceEdge::Kind::Open)
            return prependEdge(*hiSlot, e);
          if (e.kind == TraceEdge::Kind::FromBound) return TraceEdge::fromBound();
        }
      }
      auto loV = boundValue(i.lo);
      auto hiV = boundValue(i.hi);
      auto witness = findRatCodeIn(loV, hiV, [&](uint64_t code) {
        if (!sel.slots.member(code)) return false;
        auto c = o->content(code);
        if (isEmptyOrder(c)) return false;
        return traceNonempty(c, innerOfSel(sel, code), Interval::all());
      });
      if (witness) {
        if (hiSlot) {
          Clip2 cl = clipHead(o, i, *hiSlot, true);
          if (!cl.empty) {
            auto m = minPosIn(o->content(*hiSlot), cl.inner);
            if (m.kind == ExtremeResult::Kind::Found) {
              Pos pos = m.pos;
              pos.insert(pos.begin(), *hiSlot);
              return TraceEdge::open(pos);
            }
            if (m.kind == ExtremeResult::Kind::NoExtreme)
              throw UnsupportedShape("infinite residual above trace");
          }
        }
        return TraceEdge::fromBound();
      }
      if (i.lo.kind == IBound::Kind::At) {
        uint64_t loSlot = i.lo.pos[0];
        if (!hiSlot || *hiSlot != loSlot) {
          Clip2 cl = clipHead(o, i, loSlot, true);
          if (!cl.empty) {
            TraceEdge e =
                upperEdge(o->content(loSlot), innerOfSel(sel, loSlot), cl.inner);
            if (e.kind == TraceEdge::Kind::Closed ||
                e.kind == TraceEdge::Kind::Open)
              return prependEdge(loSlot, e);
            if (e.kind == TraceEdge::Kind::FromBound)
              throw UnsupportedShape("trace confined to bottom slot, dense above");
          }
        }
      }
      return TraceEdge::empty();
    }
  }
  return TraceEdge::empty();
}

}  // namespace

ExtremeResult selMinIn(const OrderPtr& o, const Selector& s, const Interval& i) {
  TraceEdge e = lowerEdge(o, s, i);
  switch (e.kind) {
    case TraceEdge::Kind::Empty:
      return {ExtremeResult::Kind::Empty, {}};
    case TraceEdge::Kind::Closed:
      return {ExtremeResult::Kind::Found, e.pos};
    default:
      return {ExtremeResult::Kind::NoExtreme, {}};
  }
}

ExtremeResult selMaxIn(const OrderPtr& o, const Selector& s, const Interval& i) {
  TraceEdge e = upperEdge(o, s, i);
  switch (e.kind) {
    case TraceEdge::Kind::Empty:
      return {ExtremeResult::Kind::Empty, {}};
    case TraceEdge::Kind::Closed:
      return {ExtremeResult::Kind::Found, e.pos};
    default:
      return {ExtremeResult::Kind::NoExtreme, {}};
  }
}

// --- isClose -----------------------------------------------------------

namespace {

bool innerCloseEverywhere(const OrderPtr& o, const Selector& sel);

bool isCloseImpl(const OrderPtr& o, const Selector& sel) {
  switch (o->kind) {
    case Order::Kind::Fin:
      return true;
    case Order::Kind::Omega:
    case Order::Kind::OmegaStar:
      switch (sel.kind) {
        case Selector::Kind::All:
        case Selector::Kind::CofiniteEx:
        case Selector::Kind::AProg:
          return true;
        case Selector::Kind::FiniteSet:
          return false;
        default:
          return false;
      }
    case Order::Kind::Rat:
      switch (sel.kind) {
        case Selector::Kind::All:
        case Selector::Kind::CofiniteEx:
          return true;
        case Selector::Kind::AProg:
          return ratClassDense(sel.c, sel.s);
        case Selector::Kind::FiniteSet:
          return false;
        default:
          return false;
      }
    case Order::Kind::SumFin: {
      for (size_t p = 0; p < o->parts.size(); ++p) {
        if (finiteSize(o->parts[p])) continue;
        if (!isCloseImpl(o->parts[p], innerOfSel(sel, p))) return false;
      }
      return true;
    }
    case Order::Kind::SumSeq:
      return innerCloseEverywhere(o, sel);
  }
  return false;
}

bool innerCloseEverywhere(const OrderPtr& o, const Selector& sel) {
  // window covering the exceptions plus several periods of every rule involved
  uint64_t maxEx = 0;
  for (const auto& [k, v] : o->except) maxEx = std::max(maxEx, k + 1);
  if (sel.kind == Selector::Kind::PerSeq) {
    for (const auto& [k, v] : sel.innerEx) maxEx = std::max(maxEx, k + 1);
    for (uint64_t k : sel.slots.list) maxEx = std::max(maxEx, k + 1);
  }
  if (sel.kind == Selector::Kind::CofiniteEx || sel.kind == Selector::Kind::FiniteSet)
    for (const auto& p : sel.list)
      if (!p.empty()) maxEx = std::max(maxEx, p[0] + 1);
  uint64_t period = 1;
  if (sel.kind == Selector::Kind::PerSeq) {
    period = std::max<uint64_t>(period, sel.inner.size());
    if (sel.slots.kind == IndexSet::Kind::AProg)
      period = std::lcm(period, sel.slots.s);
  }
  if (period > 64) throw UnsupportedShape("selector period too large");
  uint64_t window = maxEx + 4 * period + 16;

  // (b) inner closeness on every slot with infinite content
  for (uint64_t n = 0; n < window; ++n) {
    auto c = o->content(n);
    if (finiteSize(c)) continue;
    if (!isCloseImpl(c, innerOfSel(sel, n))) return false;
  }
  // (a) the set of slots carrying a nonempty trace must be close in the slot
  // order; compute the hit pattern past the exceptions
  std::set<uint64_t> hitResidues;
  uint64_t hits = 0;
  for (uint64_t n = maxEx; n < window; ++n) {
    auto c = o->content(n);
    if (isEmptyOrder(c)) continue;
    Selector in = innerOfSel(sel, n);
    if (!traceNonempty(c, in, Interval::all())) continue;
    ++hits;
    hitResidues.insert(n % period);
  }
  // exceptional slots may also carry trace; they never hurt closeness
  if (o->shape == SeqShape::Omega || o->shape == SeqShape::OmegaStar)
    return hits > 0;
  // Rat: the union of hit residue classes (mod period) must be dense in the
  // code order
  std::set<uint64_t> classes;
  for (uint64_t r : hitResidues) classes.insert(r % period);
  return ratClassSetDense(classes, period);
}

}  // namespace

bool isClose(const OrderPtr& o, const Selector& s) {
  if (!selValid(o, s)) return false;
  return isCloseImpl(o, s);
}

// --- propto / residual -------------------------------------------------

Interval propto(const OrderPtr& base, const Interval& i, const Selector& s) {
  TraceEdge lo = lowerEdge(base, s, i);
  if (lo.kind == TraceEdge::Kind::Empty) return Interval::none();
  TraceEdge hi = upperEdge(base, s, i);
  Interval out = i;
  switch (lo.kind) {
    case TraceEdge::Kind::Closed:
      out.lo = IBound::at(lo.pos, true);
      break;
    case TraceEdge::Kind::Open:
      out.lo = IBound::at(lo.pos, false);
      break;
    default:
      break;  // keep i.lo
  }
  switch (hi.kind) {
    case TraceEdge::Kind::Closed:
      out.hi = IBound::at(hi.pos, true);
      break;
    case TraceEdge::Kind::Open:
      out.hi = IBound::at(hi.pos, false);
      break;
    default:
      break;
  }
  return normalizeInterval(base, out);
}

Residual residual(const OrderPtr& base, const Interval& iv, const Selector& s) {
  Residual r;
  Interval i = normalizeInterval(base, iv);
  if (i.empty) {
    r.initial = Interval::none();
    r.terminal = Interval::none();
    return r;
  }
  Interval hull = propto(base, i, s);
  if (hull.empty) {
    // no trace at all: the whole interval is the terminal residual
    r.initial = Interval::none();
    r.terminal = i;
  } else {
    r.initial = i;
    if (hull.lo.kind == IBound::Kind::At) {
      r.initial.hi = IBound::at(hull.lo.pos, !hull.lo.closed);
    } else {
      r.initial = Interval::none();
    }
    r.initial = normalizeInterval(base, r.initial);
    r.terminal = i;
    if (hull.hi.kind == IBound::Kind::At) {
      r.terminal.lo = IBound::at(hull.hi.pos, !hull.hi.closed);
    } else {
      r.terminal = Interval::none();
    }
    r.terminal = normalizeInterval(base, r.terminal);
  }
  auto enumOr = [&](const Interval& part) {
    auto e = enumerateInterval(base, part, 100000);
    if (!e) throw UnsupportedShape("infinite residual; selector not close");
    return *e;
  };
  r.initialElems = enumOr(r.initial);
  r.terminalElems = enumOr(r.terminal);
  return r;
}

}  // namespace transred
