#pragma once

#include "transred/coi.hpp"

namespace transred {

// Deterministic source of fresh interior offsets for avoid-constructions.
struct FreshState {
  uint64_t counter = 0;
  uint64_t salt() { return 1000 + 64 * counter++; }
};

struct ExtensionError : TrError {
  explicit ExtensionError(const std::string& w) : TrError(w) {}
};
struct NotInPfine : ExtensionError {
  explicit NotInPfine(const std::string& w) : ExtensionError(w) {}
};
struct PreconditionFailed : ExtensionError {
  explicit PreconditionFailed(const std::string& w) : ExtensionError(w) {}
};

// --- single extension moves ------------------------------------------------
// All moves are stated for side 0 -> side 1 of the collection; the driver
// swaps the collection to act on the other side.

// w in Pfine({W_x}): build a partner U and coi; the collection plus the new
// triple must re-verify coherent (callers check).
CoiTriple extendMember(const CoherentCollection& c, const WordPtr& w,
                       const Bounds& bounds, FreshState& fresh);

// replace the z-th triple's image by a norm-shrunk copy; returns the new
// triple (W_z, iota_z, U') with |U'| < eps
CoiTriple shrinkNorm(const CoherentCollection& c, size_t z, const Rat& eps,
                     const Bounds& bounds);

// alpha-pure positive word with endpoints a[alpha,N-1] and an injective
// Q-interior, certified outside Pfine of the image basis at the bounds
WordPtr freshPure(const CoherentCollection& c, uint32_t alpha, uint64_t N,
                  const Bounds& bounds, FreshState& fresh);

// w an omega-stream whose blocks lie in Pfine while w itself does not
CoiTriple extendOmega(const CoherentCollection& c, const WordPtr& w,
                      const Bounds& bounds, FreshState& fresh);

// w a Q-indexed stream of Pfine blocks with no multi-block Pfine interval
CoiTriple extendQ(const CoherentCollection& c, const WordPtr& w,
                  const Bounds& bounds, FreshState& fresh);

// the finite-scale recursion over the shapes above; appends the intermediate
// triples it needs to `c` and returns the triple for w itself
struct ArbitraryResult {
  CoiTriple triple;
  std::vector<std::string> moveTrace;  // "member", "omega", "q" steps taken
};
ArbitraryResult extendArbitrary(CoherentCollection& c, const WordPtr& w,
                                const Bounds& bounds, FreshState& fresh,
                                uint64_t moveBudget = 8);

// --- the back-and-forth driver ----------------------------------------------

struct LogEntry {
  uint64_t round = 0;
  int side = 0;
  std::string kind;       // move kind or "seed"
  std::string inputText;  // canonical term text (filled by the cli layer)
  WordPtr w, u;           // the produced triple
  bool verified = false;
};

struct BackAndForthResult {
  CoherentCollection collection;
  std::vector<LogEntry> log;
  bool completed = false;
  uint64_t failedRound = 0;
  std::string failure;
};

CoherentCollection swappedSides(const CoherentCollection& c);
CoiTriple swappedTriple(const CoiTriple& t);

// seeds are pure words per side; `rounds` alternating extensions, re-verified
// after every move
BackAndForthResult backAndForth(const std::vector<WordPtr>& seed0,
                                const std::vector<WordPtr>& seed1,
                                uint32_t kappa0, uint32_t kappa1,
                                uint64_t rounds, uint64_t seed,
                                const Bounds& bounds);

// the seeded word generator the driver draws fresh targets from
WordPtr driverFreshWord(const CoherentCollection& c, uint64_t round,
                        uint64_t seed, uint32_t kappa, const Bounds& bounds,
                        FreshState& fresh);

}  // namespace transred
