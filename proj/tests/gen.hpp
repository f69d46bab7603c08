#pragma once

// Seeded random word generators shared by the property tests and the
// acceptance suite.

#include <random>

#include "transred/word.hpp"

namespace gen {

using namespace transred;

using Rng = std::mt19937_64;

inline Letter randomLetter(Rng& rng, uint32_t alphas = 2, uint64_t maxIdx = 3) {
  std::uniform_int_distribution<uint32_t> da(0, alphas - 1);
  std::uniform_int_distribution<uint64_t> di(0, maxIdx);
  std::uniform_int_distribution<int> ds(0, 1);
  return Letter{Family::GS, da(rng), di(rng), int8_t(ds(rng) ? 1 : -1)};
}

inline WordPtr randomLit(Rng& rng, size_t maxLen = 8, uint32_t alphas = 2,
                         uint64_t maxIdx = 3) {
  std::uniform_int_distribution<size_t> dl(0, maxLen);
  size_t len = dl(rng);
  std::vector<Letter> ls;
  for (size_t i = 0; i < len; ++i) ls.push_back(randomLetter(rng, alphas, maxIdx));
  return wLit(std::move(ls));
}

inline LetterTpl randomLetterTpl(Rng& rng, uint32_t alphas = 2) {
  std::uniform_int_distribution<uint32_t> da(0, alphas - 1);
  std::uniform_int_distribution<uint64_t> dc(0, 3);
  std::uniform_int_distribution<uint64_t> dsl(1, 2);
  std::uniform_int_distribution<int> ds(0, 1);
  std::uniform_int_distribution<int> cyc(0, 3);
  AlphaRule ar = cyc(rng) == 0 ? AlphaRule{{da(rng), da(rng)}}
                               : AlphaRule::constant(da(rng));
  return LetterTpl{Family::GS, ar, IndexRule::affine(dc(rng), dsl(rng)),
                   int8_t(ds(rng) ? 1 : -1), 1};
}

inline WordPtr randomStream(Rng& rng, uint32_t alphas = 2) {
  std::uniform_int_distribution<size_t> dn(1, 3);
  std::uniform_int_distribution<int> dflip(0, 3);
  size_t n = dn(rng);
  std::vector<LetterTpl> tpls;
  for (size_t i = 0; i < n; ++i) tpls.push_back(randomLetterTpl(rng, alphas));
  TailRule t;
  t.atomsPerResidue = {{AtomTpl::ofLetters(std::move(tpls))}};
  std::map<uint64_t, WordPtr> ex;
  if (dflip(rng) == 0) {
    std::uniform_int_distribution<uint64_t> dslot(0, 2);
    ex[dslot(rng)] = randomLit(rng, 4, alphas, 5);
  }
  SeqShape shape = dflip(rng) == 1 ? SeqShape::OmegaStar : SeqShape::Omega;
  return wStream(shape, std::move(t), std::move(ex));
}

// Mixed literal/stream terms, always legal.
inline WordPtr randomTerm(Rng& rng, uint32_t alphas = 2) {
  std::uniform_int_distribution<int> dk(0, 5);
  int k = dk(rng);
  if (k <= 2) return randomLit(rng);
  if (k <= 4) return randomStream(rng, alphas);
  std::uniform_int_distribution<size_t> dparts(2, 3);
  size_t parts = dparts(rng);
  std::vector<WordPtr> ps;
  for (size_t i = 0; i < parts; ++i) {
    std::uniform_int_distribution<int> dsub(0, 2);
    ps.push_back(dsub(rng) == 0 ? randomStream(rng, alphas)
                                : randomLit(rng));
  }
  return wConcat(std::move(ps));
}

// Random reduced explicit words (freely reduced literals).
inline WordPtr randomReducedLit(Rng& rng, size_t maxLen = 8, uint32_t alphas = 2,
                                uint64_t maxIdx = 3) {
  std::uniform_int_distribution<size_t> dl(0, maxLen);
  size_t len = dl(rng);
  std::vector<Letter> ls;
  while (ls.size() < len) {
    Letter l = randomLetter(rng, alphas, maxIdx);
    if (!ls.empty() && ls.back().cancels(l)) continue;
    ls.push_back(l);
  }
  return wLit(std::move(ls));
}

}  // namespace gen
