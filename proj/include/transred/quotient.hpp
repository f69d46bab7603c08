#pragma once

#include <set>

#include "transred/pdecomp.hpp"

namespace transred {

struct Bounds {
  uint64_t nmax = 8;          // projection levels for level-wise checks
  uint64_t maxIntervals = 6;  // deletion budget in kernel searches
  uint64_t maxMatches = 64;   // match-ledger budget in coherence checks
  uint64_t searchNodes = 20000;
  uint64_t closureDepth = 3;  // factors per pure-closure product
};

// --- the p-fine basis and decomposition over it -----------------------------

struct PfineBasis {
  std::vector<WordPtr> generators;  // reduced
  std::vector<PDecomp> decomps;     // cached

  static PfineBasis of(std::vector<WordPtr> gens);
};

// Bounded membership of a pure word in the group generated by the basis pure
// chunks of one key.
bool inPureClosure(const PfineBasis& basis, const WordPtr& pureWord,
                   const Bounds& bounds);

struct PfinePiece {
  Interval interval;    // over p-index(w)
  bool tagA = false;    // singleton whose run is a pure-closure product
  // tag b: chunk of generators[gen]^sign at genInterval
  size_t gen = 0;
  int sign = 1;
  Interval genInterval;
};

struct PfineDecomposition {
  std::vector<PfinePiece> pieces;
};

// Cover p-index(w) by tag-a singletons and tag-b generator chunks.  NotFound
// (empty optional) is a bounded-search verdict.  enumerateLimit > 1 collects
// several distinct covers.
std::vector<PfineDecomposition> pfineDecompose(const WordPtr& w,
                                               const PfineBasis& basis,
                                               const Bounds& bounds,
                                               size_t enumerateLimit = 1);

std::optional<PfineDecomposition> pfineDecomposeOne(const WordPtr& w,
                                                    const PfineBasis& basis,
                                                    const Bounds& bounds);

// --- structural chunk alignment ---------------------------------------------

// maximal run-level matches  a|_p i0 = (b|_p i1)^sign  found by anchor
// extension; used by the coherence checker
struct AlignedMatch {
  Interval i0, i1;
  int sign = 1;
  uint64_t runs = 0;  // matched run count; 0 marks a symbolic (infinite) match
};

std::vector<AlignedMatch> enumerateChunkMatches(const PDecomp& da,
                                                const PDecomp& db,
                                                const Bounds& bounds,
                                                size_t cap);

// --- kernel tests ------------------------------------------------------

struct DeletionStep {
  WordPtr before;     // reduced word the deletion applies to
  Pos runPos;         // p-position of the deleted run
  WordPtr after;      // reduced result
};

struct KernelCertificate {
  enum class Status : uint8_t { Trivial, Nontrivial, Unknown } status =
      Status::Unknown;
  std::vector<DeletionStep> trace;  // Trivial: stepwise deletions to E
  std::string evidence;             // Nontrivial: which argument fired
  Bounds bounds;
};

KernelCertificate kernelTest(const WordPtr& w, const Bounds& bounds);

// replay a Trivial certificate; true when every step re-verifies and the
// final word is E
bool replayKernelCertificate(const WordPtr& w, const KernelCertificate& cert);

// --- nontriviality witness ----------------------------------------------

struct NontrivialityWitness {
  bool literalMode = false;  // the summand convention used for condition (2)
  std::vector<std::pair<uint64_t, uint64_t>> dominantLevels;  // (block, j_n)
  uint64_t checkedBlocks = 0;
  bool genericTail = false;  // rule-level disjointness certified beyond
};

struct WitnessResult {
  bool applicable = false;
  int failedCondition = 0;  // 1 or 2 when inapplicable
  NontrivialityWitness witness;
};

// v must be an omega-stream presentation (optionally with an explicit prefix
// absorbed into block 0).  literalSummand selects the text-level reading of
// condition (2); the default is the cross-block count.
WitnessResult nontrivialWitness(const WordPtr& v, const Bounds& bounds,
                                bool literalSummand = false);

// --- the cardinality family and permutation automorphisms -------------------

// `size` words from an almost-disjoint family of branch sets, positive
// letters, alternating alpha < 2.
std::vector<WordPtr> howmanyFamily(size_t size, uint64_t seed);
WordPtr branchFamilyWord(uint64_t bits);

// finite-support permutation of the alpha subscripts
struct AlphaPerm {
  std::vector<std::pair<uint32_t, uint32_t>> moves;  // pairs (from, to)

  uint32_t apply(uint32_t a) const;
  AlphaPerm inverse() const;
  AlphaPerm compose(const AlphaPerm& then) const;  // apply *this, then `then`
};

WordPtr thetaAutomorphism(const AlphaPerm& f, const WordPtr& w);

}  // namespace transred
