#include "transred/order.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace transred {

// --- OrderRule -------------------------------------------------------------

OrderRule OrderRule::constShape(OrderPtr o) {
  OrderRule r;
  r.kind = Kind::Const;
  r.shape = std::move(o);
  return r;
}

OrderRule OrderRule::finOf(IndexRule ir) {
  OrderRule r;
  r.kind = Kind::FinOf;
  r.idx = std::move(ir);
  return r;
}

OrderRule OrderRule::seqOf(std::vector<OrderRule> ps) {
  if (ps.size() == 1) return ps[0];
  OrderRule r;
  r.kind = Kind::SeqOf;
  r.parts = std::move(ps);
  return r;
}

OrderRule OrderRule::periodic(std::vector<OrderRule> ps) {
  if (ps.size() == 1) return ps[0];
  OrderRule r;
  r.kind = Kind::Periodic;
  r.parts = std::move(ps);
  return r;
}

OrderPtr OrderRule::eval(uint64_t n) const {
  switch (kind) {
    case Kind::Const:
      return shape;
    case Kind::FinOf:
      return oFin(idx.eval(n));
    case Kind::SeqOf: {
      std::vector<OrderPtr> ps;
      ps.reserve(parts.size());
      for (const auto& p : parts) ps.push_back(p.eval(n));
      return oSumFin(std::move(ps));
    }
    case Kind::Periodic:
      return parts[n % parts.size()].eval(n);
  }
  return oEmpty();
}

OrderRule OrderRule::shifted(uint64_t k) const {
  OrderRule r = *this;
  switch (kind) {
    case Kind::Const:
      break;
    case Kind::FinOf:
      r.idx = idx.shifted(k);
      break;
    case Kind::SeqOf:
      for (auto& p : r.parts) p = p.shifted(k);
      break;
    case Kind::Periodic: {
      size_t L = parts.size();
      std::vector<OrderRule> ps(L);
      for (size_t i = 0; i < L; ++i) ps[i] = parts[(i + k) % L].shifted(k);
      r.parts = std::move(ps);
      break;
    }
  }
  return r;
}

OrderRule OrderRule::reversed() const {
  OrderRule r = *this;
  switch (kind) {
    case Kind::Const:
      r.shape = oRev(shape);
      break;
    case Kind::FinOf:
      break;
    case Kind::SeqOf: {
      std::vector<OrderRule> ps;
      for (auto it = parts.rbegin(); it != parts.rend(); ++it)
        ps.push_back(it->reversed());
      r.parts = std::move(ps);
      break;
    }
    case Kind::Periodic:
      for (auto& p : r.parts) p = p.reversed();
      break;
  }
  return r;
}

bool OrderRule::operator==(const OrderRule& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Const:
      return orderEq(shape, o.shape);
    case Kind::FinOf:
      return idx == o.idx;
    case Kind::SeqOf:
    case Kind::Periodic:
      return parts == o.parts;
  }
  return false;
}

uint64_t OrderRule::hash() const {
  uint64_t h = static_cast<uint64_t>(kind) + 101;
  if (kind == Kind::Const) hashMix(h, shape ? shape->hash() : 0);
  if (kind == Kind::FinOf) hashMix(h, idx.hash());
  if (kind == Kind::SeqOf || kind == Kind::Periodic)
    for (const auto& p : parts) hashMix(h, p.hash());
  return h;
}

// --- Order construction ----------------------------------------------------

OrderPtr Order::content(uint64_t slot) const {
  if (shape == SeqShape::Rat && !window.trivial() && !window.contains(slot))
    return oEmpty();
  auto it = except.find(slot);
  if (it != except.end()) return it->second;
  uint64_t arg = (shape == SeqShape::Rat && argPerm) ? negCode(slot) : slot;
  return rule.eval(arg);
}

uint64_t Order::hash() const {
  if (hashCache) return hashCache;
  uint64_t h = static_cast<uint64_t>(kind) + 1;
  hashMix(h, size);
  for (const auto& p : parts) hashMix(h, p->hash());
  if (kind == Kind::SumSeq) {
    hashMix(h, static_cast<uint64_t>(shape));
    hashMix(h, rule.hash());
    hashMix(h, argPerm ? 2 : 3);
    hashMix(h, window.hashInto());
    for (const auto& [k, v] : except) {
      hashMix(h, k);
      hashMix(h, v->hash());
    }
  }
  hashCache = h ? h : 1;
  return hashCache;
}

OrderPtr oEmpty() { return oFin(0); }

OrderPtr oFin(uint64_t n) {
  auto o = std::make_shared<Order>();
  o->kind = Order::Kind::Fin;
  o->size = n;
  return o;
}

OrderPtr oOmega() {
  auto o = std::make_shared<Order>();
  o->kind = Order::Kind::Omega;
  return o;
}

OrderPtr oOmegaStar() {
  auto o = std::make_shared<Order>();
  o->kind = Order::Kind::OmegaStar;
  return o;
}

OrderPtr oRat() {
  auto o = std::make_shared<Order>();
  o->kind = Order::Kind::Rat;
  return o;
}

OrderPtr oSumFin(std::vector<OrderPtr> parts) {
  std::vector<OrderPtr> flat;
  for (auto& p : parts) {
    if (!p || isEmptyOrder(p)) continue;
    if (p->kind == Order::Kind::SumFin) {
      for (const auto& q : p->parts) flat.push_back(q);
    } else {
      flat.push_back(p);
    }
  }
  // merge adjacent finite pieces
  std::vector<OrderPtr> merged;
  for (auto& p : flat) {
    if (!merged.empty() && merged.back()->kind == Order::Kind::Fin &&
        p->kind == Order::Kind::Fin) {
      merged.back() = oFin(merged.back()->size + p->size);
    } else {
      merged.push_back(p);
    }
  }
  if (merged.empty()) return oEmpty();
  if (merged.size() == 1) return merged[0];
  auto o = std::make_shared<Order>();
  o->kind = Order::Kind::SumFin;
  o->parts = std::move(merged);
  return o;
}

namespace {

bool ruleEventuallyNonempty(const OrderRule& r) {
  switch (r.kind) {
    case OrderRule::Kind::Const:
      return !isEmptyOrder(r.shape);
    case OrderRule::Kind::FinOf:
      if (r.idx.strictlyIncreasing()) return true;
      if (r.idx.kind == IndexRule::Kind::Periodic) {
        for (uint64_t v : r.idx.tab)
          if (v + r.idx.c > 0) return true;
        return r.idx.c > 0;
      }
      return r.idx.eval(0) > 0 || !r.idx.isConstant();
    case OrderRule::Kind::SeqOf:
    case OrderRule::Kind::Periodic:
      for (const auto& p : r.parts)
        if (ruleEventuallyNonempty(p)) return true;
      return false;
  }
  return false;
}

int cmpSlot(SeqShape shape, uint64_t a, uint64_t b) {
  if (a == b) return 0;
  switch (shape) {
    case SeqShape::Omega:
      return a < b ? -1 : 1;
    case SeqShape::OmegaStar:
      return a > b ? -1 : 1;
    case SeqShape::Rat:
      return cmpRatCodes(a, b);
  }
  return 0;
}

}  // namespace

OrderPtr oSumSeq(SeqShape shape, OrderRule rule,
                 std::map<uint64_t, OrderPtr> except, bool argPerm,
                 RatWindow window) {
  if (shape == SeqShape::Rat && !window.trivial()) {
    for (auto it = except.begin(); it != except.end();) {
      if (!window.contains(it->first)) {
        it = except.erase(it);
      } else {
        ++it;
      }
    }
  }
  // drop exceptions that are empty only when the rule side is also degenerate
  if (!ruleEventuallyNonempty(rule)) {
    // finitely many nonempty blocks: collapse to a finite sum in slot order
    std::vector<std::pair<uint64_t, OrderPtr>> blocks;
    for (const auto& [k, v] : except)
      if (!isEmptyOrder(v)) blocks.emplace_back(k, v);
    std::sort(blocks.begin(), blocks.end(),
              [&](const auto& x, const auto& y) {
                return cmpSlot(shape, x.first, y.first) < 0;
              });
    std::vector<OrderPtr> parts;
    for (auto& [k, v] : blocks) parts.push_back(v);
    return oSumFin(std::move(parts));
  }
  auto o = std::make_shared<Order>();
  o->kind = Order::Kind::SumSeq;
  o->shape = shape;
  o->rule = std::move(rule);
  o->except = std::move(except);
  o->argPerm = argPerm;
  o->window = window;
  return o;
}

OrderPtr oRev(const OrderPtr& o) {
  switch (o->kind) {
    case Order::Kind::Fin:
      return o;
    case Order::Kind::Omega:
      return oOmegaStar();
    case Order::Kind::OmegaStar:
      return oOmega();
    case Order::Kind::Rat:
      return o;
    case Order::Kind::SumFin: {
      std::vector<OrderPtr> ps;
      for (auto it = o->parts.rbegin(); it != o->parts.rend(); ++it)
        ps.push_back(oRev(*it));
      return oSumFin(std::move(ps));
    }
    case Order::Kind::SumSeq: {
      std::map<uint64_t, OrderPtr> ex;
      for (const auto& [k, v] : o->except) {
        uint64_t k2 = o->shape == SeqShape::Rat ? negCode(k) : k;
        ex[k2] = oRev(v);
      }
      SeqShape sh = o->shape == SeqShape::Omega     ? SeqShape::OmegaStar
                    : o->shape == SeqShape::OmegaStar ? SeqShape::Omega
                                                      : SeqShape::Rat;
      bool perm = o->shape == SeqShape::Rat ? !o->argPerm : o->argPerm;
      RatWindow win = o->shape == SeqShape::Rat ? o->window.negated() : RatWindow{};
      return oSumSeq(sh, o->rule.reversed(), std::move(ex), perm, win);
    }
  }
  return o;
}

bool orderEq(const OrderPtr& a, const OrderPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  if (a->hash() != b->hash()) return false;
  switch (a->kind) {
    case Order::Kind::Fin:
      return a->size == b->size;
    case Order::Kind::Omega:
    case Order::Kind::OmegaStar:
    case Order::Kind::Rat:
      return true;
    case Order::Kind::SumFin: {
      if (a->parts.size() != b->parts.size()) return false;
      for (size_t i = 0; i < a->parts.size(); ++i)
        if (!orderEq(a->parts[i], b->parts[i])) return false;
      return true;
    }
    case Order::Kind::SumSeq: {
      if (a->shape != b->shape || a->argPerm != b->argPerm) return false;
      if (!(a->window == b->window)) return false;
      if (!(a->rule == b->rule)) return false;
      if (a->except.size() != b->except.size()) return false;
      auto it = b->except.begin();
      for (const auto& [k, v] : a->except) {
        if (it->first != k || !orderEq(v, it->second)) return false;
        ++it;
      }
      return true;
    }
  }
  return false;
}

bool isEmptyOrder(const OrderPtr& o) {
  return o->kind == Order::Kind::Fin && o->size == 0;
}

std::optional<uint64_t> finiteSize(const OrderPtr& o) {
  switch (o->kind) {
    case Order::Kind::Fin:
      return o->size;
    case Order::Kind::Omega:
    case Order::Kind::OmegaStar:
    case Order::Kind::Rat:
      return std::nullopt;
    case Order::Kind::SumFin: {
      uint64_t total = 0;
      for (const auto& p : o->parts) {
        auto s = finiteSize(p);
        if (!s) return std::nullopt;
        total += *s;
      }
      return total;
    }
    case Order::Kind::SumSeq:
      // normalization guarantees infinitely many nonempty blocks
      return std::nullopt;
  }
  return std::nullopt;
}

bool validPos(const OrderPtr& o, const Pos& p) {
  const Order* cur = o.get();
  size_t i = 0;
  OrderPtr hold;
  while (true) {
    if (i >= p.size()) return false;
    uint64_t c = p[i];
    switch (cur->kind) {
      case Order::Kind::Fin:
        return i + 1 == p.size() && c < cur->size;
      case Order::Kind::Omega:
      case Order::Kind::OmegaStar:
      case Order::Kind::Rat:
        return i + 1 == p.size();
      case Order::Kind::SumFin:
        if (c >= cur->parts.size()) return false;
        hold = cur->parts[c];
        cur = hold.get();
        ++i;
        break;
      case Order::Kind::SumSeq:
        hold = cur->content(c);
        cur = hold.get();
        ++i;
        break;
    }
  }
}

int cmpPos(const OrderPtr& o, const Pos& a, const Pos& b) {
  const Order* cur = o.get();
  size_t i = 0;
  OrderPtr hold;
  while (true) {
    uint64_t ca = a[i], cb = b[i];
    switch (cur->kind) {
      case Order::Kind::Fin:
      case Order::Kind::Omega:
        if (ca != cb) return ca < cb ? -1 : 1;
        return 0;
      case Order::Kind::OmegaStar:
        if (ca != cb) return ca > cb ? -1 : 1;
        return 0;
      case Order::Kind::Rat:
        return cmpRatCodes(ca, cb);
      case Order::Kind::SumFin:
        if (ca != cb) return ca < cb ? -1 : 1;
        hold = cur->parts[ca];
        cur = hold.get();
        ++i;
        break;
      case Order::Kind::SumSeq: {
        int c = cmpSlot(cur->shape, ca, cb);
        if (c != 0) return c;
        hold = cur->content(ca);
        cur = hold.get();
        ++i;
        break;
      }
    }
  }
}

// --- Extremes --------------------------------------------------------------

namespace {

ExtremeResult prepend(uint64_t head, ExtremeResult r) {
  if (r.kind == ExtremeResult::Kind::Found) r.pos.insert(r.pos.begin(), head);
  return r;
}

constexpr uint64_t kSlotScanCap = 4096;

}  // namespace

ExtremeResult minPos(const OrderPtr& o) {
  switch (o->kind) {
    case Order::Kind::Fin:
      if (o->size == 0) return {ExtremeResult::Kind::Empty, {}};
      return {ExtremeResult::Kind::Found, {0}};
    case Order::Kind::Omega:
      return {ExtremeResult::Kind::Found, {0}};
    case Order::Kind::OmegaStar:
    case Order::Kind::Rat:
      return {ExtremeResult::Kind::NoExtreme, {}};
    case Order::Kind::SumFin:
      for (size_t i = 0; i < o->parts.size(); ++i) {
        auto r = minPos(o->parts[i]);
        if (r.kind != ExtremeResult::Kind::Empty) return prepend(i, r);
      }
      return {ExtremeResult::Kind::Empty, {}};
    case Order::Kind::SumSeq: {
      if (o->shape != SeqShape::Omega) return {ExtremeResult::Kind::NoExtreme, {}};
      for (uint64_t n = 0; n < kSlotScanCap; ++n) {
        auto c = o->content(n);
        if (isEmptyOrder(c)) continue;
        return prepend(n, minPos(c));
      }
      throw UnsupportedShape("minPos: no nonempty block within scan cap");
    }
  }
  return {ExtremeResult::Kind::Empty, {}};
}

ExtremeResult maxPos(const OrderPtr& o) {
  switch (o->kind) {
    case Order::Kind::Fin:
      if (o->size == 0) return {ExtremeResult::Kind::Empty, {}};
      return {ExtremeResult::Kind::Found, {o->size - 1}};
    case Order::Kind::OmegaStar:
      return {ExtremeResult::Kind::Found, {0}};
    case Order::Kind::Omega:
    case Order::Kind::Rat:
      return {ExtremeResult::Kind::NoExtreme, {}};
    case Order::Kind::SumFin:
      for (size_t i = o->parts.size(); i-- > 0;) {
        auto r = maxPos(o->parts[i]);
        if (r.kind != ExtremeResult::Kind::Empty) return prepend(i, r);
      }
      return {ExtremeResult::Kind::Empty, {}};
    case Order::Kind::SumSeq: {
      if (o->shape != SeqShape::OmegaStar)
        return {ExtremeResult::Kind::NoExtreme, {}};
      for (uint64_t n = 0; n < kSlotScanCap; ++n) {
        auto c = o->content(n);
        if (isEmptyOrder(c)) continue;
        return prepend(n, maxPos(c));
      }
      throw UnsupportedShape("maxPos: no nonempty block within scan cap");
    }
  }
  return {ExtremeResult::Kind::Empty, {}};
}

// --- Intervals ---------------------------------------------------------

bool intervalContains(const OrderPtr& o, const Interval& i, const Pos& p) {
  if (i.empty) return false;
  if (i.lo.kind == IBound::Kind::At) {
    int c = cmpPos(o, i.lo.pos, p);
    if (c > 0 || (c == 0 && !i.lo.closed)) return false;
  }
  if (i.hi.kind == IBound::Kind::At) {
    int c = cmpPos(o, p, i.hi.pos);
    if (c > 0 || (c == 0 && !i.hi.closed)) return false;
  }
  return true;
}

Interval normalizeInterval(const OrderPtr& o, Interval i) {
  if (i.empty) return Interval::none();
  if (i.lo.kind == IBound::Kind::At && i.hi.kind == IBound::Kind::At) {
    int c = cmpPos(o, i.lo.pos, i.hi.pos);
    if (c > 0) return Interval::none();
    if (c == 0 && !(i.lo.closed && i.hi.closed)) return Interval::none();
  }
  return i;
}

bool intervalEmpty(const OrderPtr& o, const Interval& i) {
  Interval n = normalizeInterval(o, i);
  if (n.empty) return true;
  return minPosIn(o, n).kind == ExtremeResult::Kind::Empty;
}

// Clip an interval of a sum order to one part/slot.
namespace {

struct Clip {
  bool empty = false;
  Interval inner;
};

// cmpHead: compares a component value against the bound's head component in
// the slot/part order.
Clip clipAt(const OrderPtr& o, const Interval& i, uint64_t head,
            const std::function<int(uint64_t, uint64_t)>& cmpHead) {
  Clip out;
  if (i.empty) {
    out.empty = true;
    return out;
  }
  Interval in = Interval::all();
  if (i.lo.kind == IBound::Kind::At) {
    int c = cmpHead(head, i.lo.pos[0]);
    if (c < 0) {
      out.empty = true;
      return out;
    }
    if (c == 0) {
      Pos rest(i.lo.pos.begin() + 1, i.lo.pos.end());
      if (rest.empty()) {
        // bound lands exactly on this leaf component
        if (!i.lo.closed) {
          out.empty = true;
          return out;
        }
      } else {
        in.lo = IBound::at(std::move(rest), i.lo.closed);
      }
    }
  }
  if (i.hi.kind == IBound::Kind::At) {
    int c = cmpHead(head, i.hi.pos[0]);
    if (c > 0) {
      out.empty = true;
      return out;
    }
    if (c == 0) {
      Pos rest(i.hi.pos.begin() + 1, i.hi.pos.end());
      if (rest.empty()) {
        if (!i.hi.closed) {
          out.empty = true;
          return out;
        }
      } else {
        in.hi = IBound::at(std::move(rest), i.hi.closed);
      }
    }
  }
  out.inner = in;
  return out;
}

Clip clipPart(const OrderPtr& o, const Interval& i, uint64_t part) {
  return clipAt(o, i, part, [](uint64_t a, uint64_t b) {
    return a < b ? -1 : a > b ? 1 : 0;
  });
}

Clip clipSlot(const OrderPtr& o, const Interval& i, uint64_t slot) {
  SeqShape sh = o->shape;
  return clipAt(o, i, slot,
                [sh](uint64_t a, uint64_t b) { return cmpSlot(sh, a, b); });
}

}  // namespace

ExtremeResult minPosIn(const OrderPtr& o, const Interval& iv) {
  Interval i = normalizeInterval(o, iv);
  if (i.empty) return {ExtremeResult::Kind::Empty, {}};
  switch (o->kind) {
    case Order::Kind::Fin: {
      if (o->size == 0) return {ExtremeResult::Kind::Empty, {}};
      uint64_t lo = 0;
      if (i.lo.kind == IBound::Kind::At) lo = i.lo.pos[0] + (i.lo.closed ? 0 : 1);
      uint64_t hi = o->size - 1;
      if (i.hi.kind == IBound::Kind::At) {
        if (i.hi.pos[0] == 0 && !i.hi.closed) return {ExtremeResult::Kind::Empty, {}};
        hi = std::min<uint64_t>(hi, i.hi.pos[0] - (i.hi.closed ? 0 : 1));
      }
      if (lo > hi) return {ExtremeResult::Kind::Empty, {}};
      return {ExtremeResult::Kind::Found, {lo}};
    }
    case Order::Kind::Omega: {
      uint64_t lo = 0;
      if (i.lo.kind == IBound::Kind::At) lo = i.lo.pos[0] + (i.lo.closed ? 0 : 1);
      if (i.hi.kind == IBound::Kind::At) {
        uint64_t hiv = i.hi.pos[0];
        if ((i.hi.closed && lo > hiv) || (!i.hi.closed && lo >= hiv))
          return {ExtremeResult::Kind::Empty, {}};
      }
      return {ExtremeResult::Kind::Found, {lo}};
    }
    case Order::Kind::OmegaStar: {
      // ascending order = descending slot value; least element has the
      // largest slot.  Unbounded below unless lo is a position.
      if (i.lo.kind != IBound::Kind::At) {
        // still need nonemptiness: some slot above hi's slot exists (always).
        return {ExtremeResult::Kind::NoExtreme, {}};
      }
      uint64_t loSlot = i.lo.pos[0];
      if (!i.lo.closed) {
        if (loSlot == 0) return {ExtremeResult::Kind::Empty, {}};
        loSlot -= 1;
      }
      if (i.hi.kind == IBound::Kind::At) {
        uint64_t hiSlot = i.hi.pos[0];
        if ((i.hi.closed && hiSlot > loSlot) || (!i.hi.closed && hiSlot >= loSlot))
          return {ExtremeResult::Kind::Empty, {}};
      }
      return {ExtremeResult::Kind::Found, {loSlot}};
    }
    case Order::Kind::Rat: {
      if (i.lo.kind == IBound::Kind::At && i.lo.closed)
        return {ExtremeResult::Kind::Found, {i.lo.pos[0]}};
      // no least element unless the interval is a (half)open singleton gap
      // check nonemptiness: an open-below interval of Q is nonempty unless
      // bounds collapse, which normalizeInterval already detected for At/At.
      return {ExtremeResult::Kind::NoExtreme, {}};
    }
    case Order::Kind::SumFin: {
      for (size_t p = 0; p < o->parts.size(); ++p) {
        Clip c = clipPart(o, i, p);
        if (c.empty) continue;
        auto r = minPosIn(o->parts[p], c.inner);
        if (r.kind != ExtremeResult::Kind::Empty) return prepend(p, r);
      }
      return {ExtremeResult::Kind::Empty, {}};
    }
    case Order::Kind::SumSeq: {
      if (o->shape == SeqShape::Omega) {
        uint64_t startSlot = 0;
        if (i.lo.kind == IBound::Kind::At) startSlot = i.lo.pos[0];
        for (uint64_t n = startSlot; n < startSlot + kSlotScanCap; ++n) {
          Clip c = clipSlot(o, i, n);
          if (c.empty) {
            // passed the upper end?
            if (i.hi.kind == IBound::Kind::At && n > i.hi.pos[0]) break;
            continue;
          }
          auto r = minPosIn(o->content(n), c.inner);
          if (r.kind != ExtremeResult::Kind::Empty) return prepend(n, r);
        }
        if (i.hi.kind == IBound::Kind::At &&
            i.hi.pos[0] < startSlot + kSlotScanCap)
          return {ExtremeResult::Kind::Empty, {}};
        throw UnsupportedShape("minPosIn: omega-sum scan cap exceeded");
      }
      if (o->shape == SeqShape::OmegaStar) {
        if (i.lo.kind != IBound::Kind::At) {
          // unbounded below: no least element provided the interval is
          // nonempty; treat nonemptiness lazily
          return {ExtremeResult::Kind::NoExtreme, {}};
        }
        uint64_t loSlot = i.lo.pos[0];
        for (uint64_t n = loSlot;; --n) {
          Clip c = clipSlot(o, i, n);
          if (!c.empty) {
            auto r = minPosIn(o->content(n), c.inner);
            if (r.kind != ExtremeResult::Kind::Empty) return prepend(n, r);
          }
          if (n == 0) break;
          if (loSlot - n > kSlotScanCap)
            throw UnsupportedShape("minPosIn: omega*-sum scan cap exceeded");
        }
        return {ExtremeResult::Kind::Empty, {}};
      }
      // Rat shape: a least element can only come from the slot holding the
      // closed lower bound; otherwise the trace below is dense or empty.
      if (i.lo.kind == IBound::Kind::At) {
        uint64_t slot = i.lo.pos[0];
        Clip c = clipSlot(o, i, slot);
        if (!c.empty) {
          auto r = minPosIn(o->content(slot), c.inner);
          if (r.kind == ExtremeResult::Kind::Found) return prepend(slot, r);
          if (r.kind == ExtremeResult::Kind::NoExtreme)
            return {ExtremeResult::Kind::NoExtreme, {}};
        }
      }
      // empty or dense below: decide emptiness by hunting for any element
      {
        // any rule slot strictly between the bounds works; sample slots
        for (uint64_t probe = 0; probe < 512; ++probe) {
          Clip c = clipSlot(o, i, probe);
          if (c.empty) continue;
          if (i.lo.kind == IBound::Kind::At && probe == i.lo.pos[0]) continue;
          auto r = minPosIn(o->content(probe), c.inner);
          if (r.kind != ExtremeResult::Kind::Empty)
            return {ExtremeResult::Kind::NoExtreme, {}};
        }
        return {ExtremeResult::Kind::Empty, {}};
      }
    }
  }
  return {ExtremeResult::Kind::Empty, {}};
}

ExtremeResult maxPosIn(const OrderPtr& o, const Interval& iv) {
  Interval i = normalizeInterval(o, iv);
  if (i.empty) return {ExtremeResult::Kind::Empty, {}};
  switch (o->kind) {
    case Order::Kind::Fin: {
      if (o->size == 0) return {ExtremeResult::Kind::Empty, {}};
      uint64_t hi = o->size - 1;
      if (i.hi.kind == IBound::Kind::At) {
        if (i.hi.pos[0] == 0 && !i.hi.closed) return {ExtremeResult::Kind::Empty, {}};
        hi = std::min<uint64_t>(hi, i.hi.pos[0] - (i.hi.closed ? 0 : 1));
      }
      uint64_t lo = 0;
      if (i.lo.kind == IBound::Kind::At) lo = i.lo.pos[0] + (i.lo.closed ? 0 : 1);
      if (lo > hi) return {ExtremeResult::Kind::Empty, {}};
      return {ExtremeResult::Kind::Found, {hi}};
    }
    case Order::Kind::Omega: {
      if (i.hi.kind != IBound::Kind::At) return {ExtremeResult::Kind::NoExtreme, {}};
      uint64_t hiSlot = i.hi.pos[0];
      if (!i.hi.closed) {
        if (hiSlot == 0) return {ExtremeResult::Kind::Empty, {}};
        hiSlot -= 1;
      }
      if (i.lo.kind == IBound::Kind::At) {
        uint64_t lo = i.lo.pos[0] + (i.lo.closed ? 0 : 1);
        if (lo > hiSlot) return {ExtremeResult::Kind::Empty, {}};
      }
      return {ExtremeResult::Kind::Found, {hiSlot}};
    }
    case Order::Kind::OmegaStar: {
      uint64_t hiSlot = 0;  // rightmost element
      if (i.hi.kind == IBound::Kind::At)
        hiSlot = i.hi.pos[0] + (i.hi.closed ? 0 : 1);
      if (i.lo.kind == IBound::Kind::At) {
        uint64_t loSlot = i.lo.pos[0];
        if ((i.lo.closed && hiSlot > loSlot) || (!i.lo.closed && hiSlot >= loSlot))
          return {ExtremeResult::Kind::Empty, {}};
      }
      return {ExtremeResult::Kind::Found, {hiSlot}};
    }
    case Order::Kind::Rat: {
      if (i.hi.kind == IBound::Kind::At && i.hi.closed)
        return {ExtremeResult::Kind::Found, {i.hi.pos[0]}};
      return {ExtremeResult::Kind::NoExtreme, {}};
    }
    case Order::Kind::SumFin: {
      for (size_t p = o->parts.size(); p-- > 0;) {
        Clip c = clipPart(o, i, p);
        if (c.empty) continue;
        auto r = maxPosIn(o->parts[p], c.inner);
        if (r.kind != ExtremeResult::Kind::Empty) return prepend(p, r);
      }
      return {ExtremeResult::Kind::Empty, {}};
    }
    case Order::Kind::SumSeq: {
      if (o->shape == SeqShape::OmegaStar) {
        uint64_t startSlot = 0;
        if (i.hi.kind == IBound::Kind::At) startSlot = i.hi.pos[0];
        for (uint64_t n = startSlot; n < startSlot + kSlotScanCap; ++n) {
          Clip c = clipSlot(o, i, n);
          if (c.empty) {
            if (i.lo.kind == IBound::Kind::At && n > i.lo.pos[0]) break;
            continue;
          }
          auto r = maxPosIn(o->content(n), c.inner);
          if (r.kind != ExtremeResult::Kind::Empty) return prepend(n, r);
        }
        if (i.lo.kind == IBound::Kind::At &&
            i.lo.pos[0] < startSlot + kSlotScanCap)
          return {ExtremeResult::Kind::Empty, {}};
        throw UnsupportedShape("maxPosIn: omega*-sum scan cap exceeded");
      }
      if (o->shape == SeqShape::Omega) {
        if (i.hi.kind != IBound::Kind::At)
          return {ExtremeResult::Kind::NoExtreme, {}};
        uint64_t hiSlot = i.hi.pos[0];
        for (uint64_t n = hiSlot;; --n) {
          Clip c = clipSlot(o, i, n);
          if (!c.empty) {
            auto r = maxPosIn(o->content(n), c.inner);
            if (r.kind != ExtremeResult::Kind::Empty) return prepend(n, r);
          }
          if (n == 0) break;
          if (hiSlot - n > kSlotScanCap)
            throw UnsupportedShape("maxPosIn: omega-sum scan cap exceeded");
        }
        return {ExtremeResult::Kind::Empty, {}};
      }
      if (i.hi.kind == IBound::Kind::At) {
        uint64_t slot = i.hi.pos[0];
        Clip c = clipSlot(o, i, slot);
        if (!c.empty) {
          auto r = maxPosIn(o->content(slot), c.inner);
          if (r.kind == ExtremeResult::Kind::Found) return prepend(slot, r);
          if (r.kind == ExtremeResult::Kind::NoExtreme)
            return {ExtremeResult::Kind::NoExtreme, {}};
        }
      }
      for (uint64_t probe = 0; probe < 512; ++probe) {
        Clip c = clipSlot(o, i, probe);
        if (c.empty) continue;
        if (i.hi.kind == IBound::Kind::At && probe == i.hi.pos[0]) continue;
        auto r = maxPosIn(o->content(probe), c.inner);
        if (r.kind != ExtremeResult::Kind::Empty)
          return {ExtremeResult::Kind::NoExtreme, {}};
      }
      return {ExtremeResult::Kind::Empty, {}};
    }
  }
  return {ExtremeResult::Kind::Empty, {}};
}

// --- Enumeration -----------------------------------------------------------

namespace {

bool enumInto(const OrderPtr& o, const Interval& iv, size_t limit,
              std::vector<Pos>& out, const Pos& prefix) {
  Interval i = normalizeInterval(o, iv);
  if (i.empty) return true;
  auto push = [&](Pos tail) -> bool {
    if (out.size() >= limit) return false;
    Pos p = prefix;
    p.insert(p.end(), tail.begin(), tail.end());
    out.push_back(std::move(p));
    return true;
  };
  switch (o->kind) {
    case Order::Kind::Fin: {
      if (o->size == 0) return true;
      uint64_t lo = 0, hi = o->size - 1;
      if (i.lo.kind == IBound::Kind::At) lo = i.lo.pos[0] + (i.lo.closed ? 0 : 1);
      if (i.hi.kind == IBound::Kind::At) {
        if (i.hi.pos[0] == 0 && !i.hi.closed) return true;
        hi = std::min<uint64_t>(hi, i.hi.pos[0] - (i.hi.closed ? 0 : 1));
      }
      for (uint64_t k = lo; k <= hi && k < o->size; ++k)
        if (!push({k})) return false;
      return true;
    }
    case Order::Kind::Omega: {
      if (i.hi.kind != IBound::Kind::At) return false;  // infinite
      uint64_t lo = 0;
      if (i.lo.kind == IBound::Kind::At) lo = i.lo.pos[0] + (i.lo.closed ? 0 : 1);
      uint64_t hi = i.hi.pos[0];
      if (!i.hi.closed) {
        if (hi == 0) return true;
        hi -= 1;
      }
      for (uint64_t k = lo; k <= hi; ++k)
        if (!push({k})) return false;
      return true;
    }
    case Order::Kind::OmegaStar: {
      if (i.lo.kind != IBound::Kind::At) return false;
      uint64_t loSlot = i.lo.pos[0];
      if (!i.lo.closed) {
        if (loSlot == 0) return true;
        loSlot -= 1;
      }
      uint64_t hiSlot = 0;
      if (i.hi.kind == IBound::Kind::At)
        hiSlot = i.hi.pos[0] + (i.hi.closed ? 0 : 1);
      if (hiSlot > loSlot) return true;
      for (uint64_t k = loSlot;; --k) {
        if (!push({k})) return false;
        if (k == hiSlot) break;
      }
      return true;
    }
    case Order::Kind::Rat: {
      // finite only when a singleton
      if (i.lo.kind == IBound::Kind::At && i.hi.kind == IBound::Kind::At &&
          i.lo.closed && i.hi.closed &&
          cmpRatCodes(i.lo.pos[0], i.hi.pos[0]) == 0)
        return push({i.lo.pos[0]});
      return false;
    }
    case Order::Kind::SumFin: {
      for (size_t p = 0; p < o->parts.size(); ++p) {
        Clip c = clipPart(o, i, p);
        if (c.empty) continue;
        Pos pre = prefix;
        pre.push_back(p);
        if (!enumInto(o->parts[p], c.inner, limit, out, pre)) return false;
      }
      return true;
    }
    case Order::Kind::SumSeq: {
      if (o->shape == SeqShape::Omega) {
        uint64_t lo = 0;
        if (i.lo.kind == IBound::Kind::At) lo = i.lo.pos[0];
        if (i.hi.kind != IBound::Kind::At) {
          // interval reaches the infinite tail; finite only if tail empty,
          // which normalization rules out
          return false;
        }
        uint64_t hi = i.hi.pos[0];
        for (uint64_t n = lo; n <= hi; ++n) {
          Clip c = clipSlot(o, i, n);
          if (c.empty) continue;
          Pos pre = prefix;
          pre.push_back(n);
          if (!enumInto(o->content(n), c.inner, limit, out, pre)) return false;
        }
        return true;
      }
      if (o->shape == SeqShape::OmegaStar) {
        if (i.lo.kind != IBound::Kind::At) return false;
        uint64_t lo = i.lo.pos[0];
        uint64_t hi = 0;
        if (i.hi.kind == IBound::Kind::At) hi = i.hi.pos[0];
        for (uint64_t n = lo;; --n) {
          Clip c = clipSlot(o, i, n);
          if (!c.empty) {
            Pos pre = prefix;
            pre.push_back(n);
            if (!enumInto(o->content(n), c.inner, limit, out, pre)) return false;
          }
          if (n == hi || n == 0) break;
        }
        return true;
      }
      // Rat: finite only when the interval sits inside a single slot
      if (i.lo.kind == IBound::Kind::At && i.hi.kind == IBound::Kind::At &&
          cmpRatCodes(i.lo.pos[0], i.hi.pos[0]) == 0) {
        uint64_t slot = i.lo.pos[0];
        Clip c = clipSlot(o, i, slot);
        if (c.empty) return true;
        Pos pre = prefix;
        pre.push_back(slot);
        return enumInto(o->content(slot), c.inner, limit, out, pre);
      }
      return false;
    }
  }
  return true;
}

}  // namespace

std::optional<std::vector<Pos>> enumerateInterval(const OrderPtr& o,
                                                  const Interval& i,
                                                  size_t limit) {
  std::vector<Pos> out;
  if (!enumInto(o, i, limit, out, {})) return std::nullopt;
  return out;
}

void sampleInto(const OrderPtr& o, size_t limit, uint64_t slotCap,
                std::vector<Pos>& out, const Pos& prefix) {
  if (out.size() >= limit) return;
  auto push = [&](uint64_t k) {
    if (out.size() >= limit) return;
    Pos p = prefix;
    p.push_back(k);
    out.push_back(std::move(p));
  };
  switch (o->kind) {
    case Order::Kind::Fin:
      for (uint64_t k = 0; k < o->size && out.size() < limit; ++k) push(k);
      break;
    case Order::Kind::Omega:
    case Order::Kind::OmegaStar:
    case Order::Kind::Rat:
      for (uint64_t k = 0; k < slotCap && out.size() < limit; ++k) push(k);
      break;
    case Order::Kind::SumFin:
      for (size_t p = 0; p < o->parts.size(); ++p) {
        Pos pre = prefix;
        pre.push_back(p);
        sampleInto(o->parts[p], limit, slotCap, out, pre);
      }
      break;
    case Order::Kind::SumSeq:
      for (uint64_t n = 0; n < slotCap; ++n) {
        auto c = o->content(n);
        if (isEmptyOrder(c)) continue;
        Pos pre = prefix;
        pre.push_back(n);
        sampleInto(c, limit, slotCap, out, pre);
      }
      break;
  }
}

std::vector<Pos> samplePositions(const OrderPtr& o, size_t limit,
                                 uint64_t slotCap) {
  std::vector<Pos> out;
  sampleInto(o, limit, slotCap, out, {});
  return out;
}

}  // namespace transred
