#pragma once

#include "transred/close.hpp"
#include "transred/reduce.hpp"

namespace transred {

// Pure-block key: a-letters group by alpha, c-letters by index.
inline uint64_t gsKey(uint32_t alpha) { return uint64_t(alpha) << 1; }
inline uint64_t haKey(uint64_t idx) { return idx << 1 | 1; }

// The key shared by all letters of w, if w is nonempty and pure.
std::optional<uint64_t> pureKeyOf(const WordPtr& w);

struct PureRun {
  uint64_t key = 0;
  WordPtr word;
};

// One segment of the pure decomposition: either finitely many explicit runs,
// or the run structure of a stream tail (blocks from `from` on, with per-slot
// run templates derived from the refined tail rule).
struct PSeg {
  bool streamTail = false;
  std::vector<PureRun> runs;

  StreamData s;  // refined: GS alpha rules constant per residue
  uint64_t from = 0;

  // runs of one block of a tail segment
  std::vector<PureRun> blockRuns(uint64_t slot) const;
  uint64_t runCount(uint64_t slot) const;
};

struct PDecomp {
  WordPtr word;
  OrderPtr pindex;
  std::vector<PSeg> segs;

  bool isEmpty() const { return segs.empty(); }
  PureRun runAt(const Pos& p) const;
  // the word restricted to the runs in an interval of the p-index
  WordPtr chunk(const Interval& i) const;
  // all p-positions if at most limit of them
  std::optional<std::vector<Pos>> allPositions(size_t limit) const;
  // largest number of letters in any single run, when uniformly bounded
  std::optional<uint64_t> runLetterBound() const;
};

// pre: w reduced (verified; throws NotReduced)
PDecomp pdecompose(const WordPtr& w);

// position of the k-th run from the start/end (k = 0 first), when reachable
std::optional<Pos> posOfNthRun(const PDecomp& d, uint64_t k);
std::optional<Pos> posOfNthRunFromEnd(const PDecomp& d, uint64_t k);

struct MultiplyResult {
  int caseTag = 1;     // 1 = clean seam, 2 = merged middle block
  Interval initial;    // over pindex(w)
  Interval terminal;   // over pindex(u)
  WordPtr merged;      // case 2 only (V); may be null in case 1
};

// pre: w, u reduced
MultiplyResult multiplyPDecomp(const WordPtr& w, const WordPtr& u);

}  // namespace transred
