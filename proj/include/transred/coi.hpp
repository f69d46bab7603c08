#pragma once

#include "transred/quotient.hpp"

namespace transred {

// Close order isomorphism between the p-indices of two words: explicit point
// pairs plus slot-wise pairings over tail segments (one finite pair set per
// block, repeating with the residue).
struct CoiMap {
  std::vector<std::pair<Pos, Pos>> pairs;  // explicit (dom, cod)

  struct TailPair {
    size_t domSeg = 0, codSeg = 0;
    bool rat = false;       // Q-indexed: cod slot = dom slot (same code)
    uint64_t domN0 = 0;     // omega: dom relative slot n >= domN0
    uint64_t codN0 = 0;     //        maps to cod slot codN0 + (n - domN0)
    // run-index pairs inside each block, by dom slot residue
    std::vector<std::vector<std::pair<uint64_t, uint64_t>>> innerPerResidue{
        {{0, 0}}};

    const std::vector<std::pair<uint64_t, uint64_t>>& innerAt(uint64_t n) const {
      return innerPerResidue[n % innerPerResidue.size()];
    }
  };
  std::vector<TailPair> tails;

  bool isEmpty() const { return pairs.empty() && tails.empty(); }
  CoiMap inverse() const;
  std::optional<Pos> image(const PDecomp& dw, const PDecomp& du,
                           const Pos& p) const;
};

struct CoiTriple {
  WordPtr w;  // over side 0
  WordPtr u;  // over side 1
  CoiMap iota;
};

// hull in p-index(u) of the image of I's trace on the coi domain
Interval proptoViaCoi(const CoiMap& m, const PDecomp& dw, const PDecomp& du,
                      const Interval& i);

// gap intervals of Lemma-style decompositions: I = I0 ... In consecutive
std::vector<Interval> coiDecompose(const CoiMap& m, const PDecomp& dw,
                                   const PDecomp& du,
                                   const std::vector<Interval>& parts);

// verify Close(dom) and Close(cod) for the triple
bool coiWellFormed(const CoiTriple& t);

// the identity coi of a word with itself (explicit runs paired pointwise,
// tail segments paired slot-for-slot)
CoiMap identityCoi(const PDecomp& d);

// --- coherent collections -----------------------------------------------

struct ChunkMatch {
  size_t x0, x1;
  int sign;
  Interval i0, i1;  // over p-index(w_{x0}) / p-index(w_{x1})
};

struct CoherenceReport {
  bool coherent = true;
  std::vector<ChunkMatch> checked;        // the ledger
  std::vector<ChunkMatch> inconclusive;   // kernel test returned Unknown
  std::optional<ChunkMatch> violation;
  WordPtr violationDiff;  // the quotient difference that failed
};

struct CoherentCollection {
  uint32_t kappa0 = 2, kappa1 = 2;
  std::vector<CoiTriple> triples;

  PfineBasis wBasis() const;
  PfineBasis uBasis() const;
};

CoherenceReport checkCoherence(const CoherentCollection& c, const Bounds& bounds);

// --- induced homomorphisms ------------------------------------------------

struct InducedHom {
  const CoherentCollection* coll;
  bool forward = true;  // forward: phi0 (w-side to u-side classes)
};

struct HomValue {
  bool inPfine = false;
  WordPtr rep;  // representative of the image class
};

// evaluate via a specific decomposition over the basis
HomValue evalHomWith(const InducedHom& h, const WordPtr& w,
                     const PfineDecomposition& dec, const Bounds& bounds);
HomValue evalHom(const InducedHom& h, const WordPtr& w, const Bounds& bounds);

// [[a]] = [[b]] in the quotient, by a bounded kernel test on the difference
enum class ClassEq : uint8_t { Equal, Distinct, Unknown };
ClassEq classesEqual(const WordPtr& a, const WordPtr& b, const Bounds& bounds);

struct RoundTripReport {
  size_t passed = 0, failed = 0, unknown = 0;
  std::vector<WordPtr> failures;
};
RoundTripReport verifyMutualInverse(const CoherentCollection& c,
                                    const std::vector<WordPtr>& samples,
                                    const Bounds& bounds);

}  // namespace transred
