#pragma once

#include "transred/order.hpp"

namespace transred {

// Two alphabets: a[alpha,n] letters over the wedge-of-cones index, and c[n]
// letters with a single subscript.  Purity keys differ: a-letters are grouped
// by alpha, c-letters by index.
enum class Family : uint8_t { GS, HA };

struct Letter {
  Family fam = Family::GS;
  uint32_t alpha = 0;  // GS only
  uint64_t idx = 0;
  int8_t sign = 1;

  Letter inverse() const { return Letter{fam, alpha, idx, int8_t(-sign)}; }
  // letters belong to the same pure block iff their keys agree
  uint64_t pureKey() const {
    return fam == Family::GS ? (uint64_t(alpha) << 1) : (idx << 1 | 1);
  }
  bool cancels(const Letter& o) const {
    return fam == o.fam && alpha == o.alpha && idx == o.idx && sign == -o.sign;
  }
  friend bool operator==(const Letter& a, const Letter& b) {
    return a.fam == b.fam && a.alpha == b.alpha && a.idx == b.idx &&
           a.sign == b.sign;
  }
};

inline Letter gs(uint32_t alpha, uint64_t idx, int8_t sign = 1) {
  return Letter{Family::GS, alpha, idx, sign};
}
inline Letter ha(uint64_t idx, int8_t sign = 1) {
  return Letter{Family::HA, 0, idx, sign};
}

using FiniteWord = std::vector<Letter>;

struct Word;
using WordPtr = std::shared_ptr<const Word>;

// ---------------------------------------------------------------------------
// Schematic stream blocks.

struct LetterTpl {
  Family fam = Family::GS;
  AlphaRule alpha;    // GS only
  IndexRule idx;
  int8_t sign = 1;
  uint64_t repeat = 1;

  Letter eval(uint64_t n) const {
    return Letter{fam, alpha.eval(n), idx.eval(n), sign};
  }
  LetterTpl inverted() const {
    LetterTpl t = *this;
    t.sign = -sign;
    return t;
  }
  LetterTpl shifted(uint64_t k) const {
    LetterTpl t = *this;
    t.alpha = alpha.shifted(k);
    t.idx = idx.shifted(k);
    return t;
  }
  bool sameSite(const LetterTpl& o) const {
    return fam == o.fam && alpha == o.alpha && idx == o.idx;
  }
  friend bool operator==(const LetterTpl& a, const LetterTpl& b) {
    return a.fam == b.fam && a.alpha == b.alpha && a.idx == b.idx &&
           a.sign == b.sign && a.repeat == b.repeat;
  }
  uint64_t hash() const;
};

// One piece of a stream block.  Letters is a run of template letters; QPure
// denotes the pure word  a[alpha,N-1] . (injective Q-stream at level >= N+salt)
// . a[alpha,N-1]  (level rule gives N); Ramp denotes the c-letter block
// c[T] c[T+1] ... c[T+n+off] with T the matching triangular offset.
struct AtomTpl {
  enum class Kind : uint8_t { Letters, QPure, Ramp };
  Kind kind = Kind::Letters;

  std::vector<LetterTpl> letters;

  Family fam = Family::GS;
  AlphaRule alpha;
  IndexRule level;  // N(n) >= 1
  IndexRule salt;
  int8_t sign = 1;

  uint64_t rampOff = 0;

  static AtomTpl ofLetters(std::vector<LetterTpl> ls);
  static AtomTpl qpure(Family fam, AlphaRule a, IndexRule level, IndexRule salt,
                       int8_t sign = 1);
  static AtomTpl ramp(uint64_t off = 0);

  WordPtr eval(uint64_t n) const;
  AtomTpl inverted() const;
  AtomTpl shifted(uint64_t k) const;
  bool empty() const { return kind == Kind::Letters && letters.empty(); }

  friend bool operator==(const AtomTpl& a, const AtomTpl& b);
  uint64_t hash() const;
};

// block(n) = concatenation of the atoms in atomsPerResidue[n % period]
struct TailRule {
  std::vector<std::vector<AtomTpl>> atomsPerResidue{{}};

  uint64_t period() const { return atomsPerResidue.size(); }
  const std::vector<AtomTpl>& atomsAt(uint64_t n) const {
    return atomsPerResidue[n % period()];
  }
  WordPtr eval(uint64_t n) const;
  TailRule shifted(uint64_t k) const;
  TailRule inverted() const;
  bool allEmpty() const;

  friend bool operator==(const TailRule& a, const TailRule& b) {
    return a.atomsPerResidue == b.atomsPerResidue;
  }
  uint64_t hash() const;
};

struct StreamData {
  SeqShape shape = SeqShape::Omega;
  TailRule tail;
  std::map<uint64_t, WordPtr> except;
  bool argPerm = false;   // Rat only
  RatWindow window;       // Rat only: live slots restricted by value

  WordPtr block(uint64_t slot) const;
  uint64_t maxExceptSlot() const;
};

// ---------------------------------------------------------------------------

struct Word {
  enum class Kind : uint8_t { Lit, Concat, Stream };
  Kind kind = Kind::Lit;

  std::vector<Letter> letters;  // Lit
  std::vector<WordPtr> parts;   // Concat: flattened, no E, adjacent Lits merged
  StreamData stream;

  mutable uint64_t hashCache = 0;
  uint64_t hash() const;
  bool isE() const { return kind == Kind::Lit && letters.empty(); }
};

// Factories (normalizing).
WordPtr wE();
WordPtr wLit(std::vector<Letter> ls);
WordPtr wLetter(Letter l);
WordPtr wConcat(std::vector<WordPtr> parts);
WordPtr wStream(SeqShape shape, TailRule tail,
                std::map<uint64_t, WordPtr> except = {}, bool argPerm = false,
                RatWindow window = {});

bool wordEq(const WordPtr& a, const WordPtr& b);
WordPtr wordInverse(const WordPtr& w);
WordPtr wordPow(const WordPtr& w, int64_t k);  // finite k, concat of copies

// Domain of the word as an order term; positions address letters.
OrderPtr domainOrder(const WordPtr& w);
Letter letterAt(const WordPtr& w, const Pos& p);
bool validWordPos(const WordPtr& w, const Pos& p);
int cmpWordPos(const WordPtr& w, const Pos& a, const Pos& b);

// --- legality / depth / norm / projection ----------------------------------

struct Legality {
  bool ok = true;
  uint64_t level = 0;       // violated level when !ok
  std::string witness;
};
Legality legalityCheck(const WordPtr& w);

// nullopt = infinity (empty word)
std::optional<uint64_t> wordDepth(const WordPtr& w);
Rat wordNorm(const WordPtr& w);

// p_N: letters of index <= N in order.  Requires legality.
FiniteWord project(const WordPtr& w, uint64_t N);
// p_N with source positions, for cancellation checks.
std::vector<std::pair<Pos, Letter>> projectWithPos(const WordPtr& w, uint64_t N);

// Free reduction of finite words (stack algorithm on explicit letters).
FiniteWord freeReduceFinite(const FiniteWord& w);
bool finiteWordsFreelyEqual(const FiniteWord& a, const FiniteWord& b);

// Letters with idx <= N counted by signed site; used by the surplusbound.
struct SiteCount {
  uint64_t pos = 0, neg = 0;
};
std::map<std::tuple<uint8_t, uint32_t, uint64_t>, SiteCount> siteCounts(
    const FiniteWord& w);

std::string letterText(const Letter& l);
std::string finiteWordText(const FiniteWord& w);

}  // namespace transred
