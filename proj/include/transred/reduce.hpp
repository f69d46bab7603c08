#pragma once

#include "transred/word.hpp"

namespace transred {

// A reduction strategy: noncrossing complete pairing of inverse letters.
// Explicit pairs carry word positions; schematic parts describe rule-level
// pairings that repeat over every tail block (BlockPairing) or pair an entire
// subword with the mirror of another (Mirror).
struct Cancellation {
  std::vector<std::pair<Pos, Pos>> pairs;

  struct BlockPairing {
    Pos streamPrefix;   // position prefix of the stream inside the word
    uint64_t fromSlot;  // applies to every slot >= fromSlot
    std::vector<std::pair<uint64_t, uint64_t>> letterOrdinals;  // within block
  };
  std::vector<BlockPairing> blockPairings;

  struct Mirror {
    Pos leftPrefix;  // subword here cancels against the subword at rightPrefix
    Pos rightPrefix;
  };
  std::vector<Mirror> mirrors;

  bool exact = true;  // false when a schematic cascade rewrote intermediate stages

  bool isEmpty() const {
    return pairs.empty() && blockPairings.empty() && mirrors.empty();
  }
};

struct CancelViolation {
  int condition = 0;  // 1..5 per the definition
  std::string witness;
};

// Checks the pairing conditions; schematic parts verified on every level-N
// truncation up to `nmax`.
std::optional<CancelViolation> verifyCancellation(const WordPtr& w,
                                                  const Cancellation& s,
                                                  uint64_t nmax = 8);

// Maximal cancellation of an explicit finite word via the stack pairing.
// Positions are single-index paths into the corresponding Lit term.
Cancellation maxCancellationFinite(const FiniteWord& w);

struct ReductionResult {
  WordPtr reduced;
  Cancellation used;
  uint64_t fuelSpent = 0;
  enum class Status : uint8_t { Complete, FuelExhausted } status = Status::Complete;
};

constexpr uint64_t kDefaultFuel = 4096;

ReductionResult reduceWord(const WordPtr& w, uint64_t fuel = kDefaultFuel);

// Reduce or throw FuelExhausted; convenience for callers needing the term.
WordPtr red(const WordPtr& w, uint64_t fuel = kDefaultFuel);
bool isReduced(const WordPtr& w, uint64_t fuel = kDefaultFuel);

struct BoundarySplit {
  WordPtr w0, w1, u0, u1;  // w = w0 w1, u = u0 u1, w1 = u0^-1, w0 u1 reduced
};
// pre: w, u reduced
BoundarySplit boundarySplit(const WordPtr& w, const WordPtr& u,
                            uint64_t fuel = kDefaultFuel);

// pre: w reduced, nonempty; returns (conjugator, core), core cyclically reduced
std::pair<WordPtr, WordPtr> cyclicReduce(const WordPtr& w,
                                         uint64_t fuel = kDefaultFuel);

// --- level-wise equality -----------------------------------------------

struct SimResult {
  enum class Kind : uint8_t { Equal, Distinct, UnknownBeyond } kind;
  uint64_t level = 0;   // first separating level for Distinct
  bool certified = false;  // Equal backed by a structural reduction to E
};

SimResult eqSim(const WordPtr& u, const WordPtr& v, uint64_t nmax);

// Splits a stream term at a block boundary: the blocks below `slot` and the
// stream of the blocks from `slot` on (omega/omega* shapes only).
WordPtr streamFromSlot(const StreamData& s, uint64_t slot);
std::vector<WordPtr> streamBlocksBelow(const StreamData& s, uint64_t slot);

}  // namespace transred
