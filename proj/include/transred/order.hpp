#pragma once

#include <map>
#include <memory>

#include "transred/rules.hpp"

namespace transred {

struct Order;
using OrderPtr = std::shared_ptr<const Order>;

// Slot -> order term, for sums indexed by omega/omega*/Q.
struct OrderRule {
  enum class Kind : uint8_t { Const, FinOf, SeqOf, Periodic };
  Kind kind = Kind::Const;
  OrderPtr shape;                // Const
  IndexRule idx;                 // FinOf: slot n denotes Fin(idx(n))
  std::vector<OrderRule> parts;  // SeqOf: concatenation of part evals at n
                                 // Periodic: parts[n % size] evaluated at n

  static OrderRule constShape(OrderPtr o);
  static OrderRule finOf(IndexRule r);
  static OrderRule seqOf(std::vector<OrderRule> ps);
  static OrderRule periodic(std::vector<OrderRule> ps);

  OrderPtr eval(uint64_t n) const;
  OrderRule shifted(uint64_t k) const;
  OrderRule reversed() const;

  bool operator==(const OrderRule& o) const;
  uint64_t hash() const;
};

enum class SeqShape : uint8_t { Omega, OmegaStar, Rat };

struct Order {
  enum class Kind : uint8_t { Fin, Omega, OmegaStar, Rat, SumFin, SumSeq };
  Kind kind = Kind::Fin;

  uint64_t size = 0;             // Fin
  std::vector<OrderPtr> parts;   // SumFin, each nonempty, length >= 2

  // SumSeq: blocks indexed by slots.  Slot order: Omega ascending, OmegaStar
  // descending (slot 0 rightmost), Rat by rational value of the slot code.
  // argPerm (Rat only): content(n) = rule.eval(negCode(n)), used to normalize
  // reversal of Q-indexed sums.  window (Rat only) restricts the live slots
  // to a rational interval; outside slots are empty.
  SeqShape shape = SeqShape::Omega;
  OrderRule rule;
  std::map<uint64_t, OrderPtr> except;
  bool argPerm = false;
  RatWindow window;

  mutable uint64_t hashCache = 0;

  OrderPtr content(uint64_t slot) const;  // SumSeq block at slot
  uint64_t hash() const;
};

// Factories (normalizing).
OrderPtr oEmpty();
OrderPtr oFin(uint64_t n);
OrderPtr oOmega();
OrderPtr oOmegaStar();
OrderPtr oRat();
OrderPtr oSumFin(std::vector<OrderPtr> parts);
OrderPtr oSumSeq(SeqShape shape, OrderRule rule,
                 std::map<uint64_t, OrderPtr> except = {}, bool argPerm = false,
                 RatWindow window = {});
OrderPtr oRev(const OrderPtr& o);

bool orderEq(const OrderPtr& a, const OrderPtr& b);
bool isEmptyOrder(const OrderPtr& o);

// nullopt = infinite
std::optional<uint64_t> finiteSize(const OrderPtr& o);

bool validPos(const OrderPtr& o, const Pos& p);
// Strict total order on valid positions.
int cmpPos(const OrderPtr& o, const Pos& a, const Pos& b);

// Least / greatest element of the whole order.
struct ExtremeResult {
  enum class Kind : uint8_t { Empty, Found, NoExtreme } kind;
  Pos pos;
};
ExtremeResult minPos(const OrderPtr& o);
ExtremeResult maxPos(const OrderPtr& o);

// ---------------------------------------------------------------------------
// Intervals (order-convex subsets given by bounds).

struct IBound {
  enum class Kind : uint8_t { NegInf, PosInf, At } kind = Kind::NegInf;
  Pos pos;
  bool closed = true;

  static IBound negInf() { return IBound{Kind::NegInf, {}, true}; }
  static IBound posInf() { return IBound{Kind::PosInf, {}, true}; }
  static IBound at(Pos p, bool closed_) { return IBound{Kind::At, std::move(p), closed_}; }
};

struct Interval {
  bool empty = false;
  IBound lo = IBound::negInf();
  IBound hi = IBound::posInf();

  static Interval all() { return Interval{}; }
  static Interval none() {
    Interval i;
    i.empty = true;
    return i;
  }
  static Interval closedRange(Pos a, Pos b) {
    return Interval{false, IBound::at(std::move(a), true), IBound::at(std::move(b), true)};
  }
  static Interval single(Pos a) {
    Pos b = a;
    return closedRange(std::move(a), std::move(b));
  }
};

bool intervalContains(const OrderPtr& o, const Interval& i, const Pos& p);
// Not fully canonical, but detects the bound-collapse cases arising here.
Interval normalizeInterval(const OrderPtr& o, Interval i);
bool intervalEmpty(const OrderPtr& o, const Interval& i);

// All positions of i in order, if at most `limit` of them; nullopt otherwise.
std::optional<std::vector<Pos>> enumerateInterval(const OrderPtr& o,
                                                  const Interval& i,
                                                  size_t limit);

ExtremeResult minPosIn(const OrderPtr& o, const Interval& i);
ExtremeResult maxPosIn(const OrderPtr& o, const Interval& i);

// A canonical traversal (not in order) of up to `limit` positions, with slot
// indices capped; used by property tests to sample elements of any order.
std::vector<Pos> samplePositions(const OrderPtr& o, size_t limit,
                                 uint64_t slotCap = 8);

}  // namespace transred
