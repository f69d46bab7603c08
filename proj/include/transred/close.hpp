#pragma once

#include <set>

#include "transred/order.hpp"

namespace transred {

// Subset of omega used for slot sets of per-block selectors.
struct IndexSet {
  enum class Kind : uint8_t { All, AProg, CofinEx, Finite };
  Kind kind = Kind::All;
  uint64_t c = 0, s = 1;        // AProg: { n : n = c mod s }
  std::vector<uint64_t> list;   // CofinEx: excluded; Finite: included (sorted)

  static IndexSet all() { return {}; }
  static IndexSet aprog(uint64_t c_, uint64_t s_);
  static IndexSet cofinEx(std::vector<uint64_t> ex);
  static IndexSet finite(std::vector<uint64_t> in);

  bool member(uint64_t n) const;
  bool infinite() const;

  bool operator==(const IndexSet&) const = default;
};

// Structural selector carving a subset out of an order term.  The meaningful
// combinations: All anywhere; FiniteSet / CofiniteEx anywhere (positions are
// full paths); AProg on Omega/OmegaStar/Rat (slot codes); PerFin on SumFin;
// PerSeq on SumSeq (slot set plus per-slot selectors, periodic in the slot
// with finitely many exceptions).
struct Selector {
  enum class Kind : uint8_t { All, CofiniteEx, FiniteSet, AProg, PerFin, PerSeq };
  Kind kind = Kind::All;

  std::vector<Pos> list;
  uint64_t c = 0, s = 1;
  std::vector<Selector> perFin;
  IndexSet slots;
  std::vector<Selector> inner;  // inner[n % inner.size()] for slot n
  std::map<uint64_t, Selector> innerEx;

  static Selector all() { return {}; }
  static Selector cofiniteEx(std::vector<Pos> excluded);
  static Selector finiteSet(std::vector<Pos> included);
  static Selector aprog(uint64_t c_, uint64_t s_);
  static Selector forParts(std::vector<Selector> parts);
  static Selector forSlots(IndexSet slots, std::vector<Selector> inner,
                         std::map<uint64_t, Selector> innerEx = {});

  const Selector& innerAt(uint64_t n) const;

  bool operator==(const Selector& o) const;
};

struct CloseSubset {
  OrderPtr base;
  Selector sel;
};

bool selValid(const OrderPtr& o, const Selector& s);
bool selMember(const OrderPtr& o, const Selector& s, const Pos& p);

// Decides Close(sel, o) structurally.
bool isClose(const OrderPtr& o, const Selector& s);
inline bool isClose(const CloseSubset& cs) { return isClose(cs.base, cs.sel); }

// Density of the Stern-Brocot code class { code = c mod s } on a sign side,
// and of a union of classes.
bool ratClassDense(uint64_t c, uint64_t s);
bool ratClassSetDense(const std::set<uint64_t>& targets, uint64_t s);

// Least / greatest element of (interval trace of the selector).
ExtremeResult selMinIn(const OrderPtr& o, const Selector& s, const Interval& i);
ExtremeResult selMaxIn(const OrderPtr& o, const Selector& s, const Interval& i);

// Smallest interval containing I's trace on the subset; requires closeness
// for the finiteness guarantees but computes the hull for any selector.
Interval propto(const OrderPtr& base, const Interval& i, const Selector& s);

struct Residual {
  Interval initial, terminal;
  std::vector<Pos> initialElems, terminalElems;
};
Residual residual(const OrderPtr& base, const Interval& i, const Selector& s);

}  // namespace transred
