#include "doctest.h"
#include "gen.hpp"
#include "transred/pdecomp.hpp"

using namespace transred;

namespace {

WordPtr branchWord(uint64_t bits) {
  TailRule t;
  t.atomsPerResidue = {{AtomTpl::ofLetters(
      {LetterTpl{Family::GS, AlphaRule{{0, 1}}, IndexRule::branch(bits), 1, 1}})}};
  return wStream(SeqShape::Omega, t);
}

// run sequences for finite-run words
std::vector<PureRun> runsOf(const PDecomp& d) {
  std::vector<PureRun> out;
  auto ps = d.allPositions(10000);
  REQUIRE(ps);
  for (const auto& p : *ps) out.push_back(d.runAt(p));
  return out;
}

// oracle for the multiplication trichotomy: match the product decomposition
// against the factors' run sequences from both ends
struct SeamOracle {
  int caseTag;
  size_t keepW, keepU;
  WordPtr merged;
};

SeamOracle seamOracle(const WordPtr& w, const WordPtr& u) {
  PDecomp dw = pdecompose(w), du = pdecompose(u);
  PDecomp dc = pdecompose(red(wConcat({w, u})));
  auto rw = runsOf(dw), ru = runsOf(du), rc = runsOf(dc);
  size_t m = 0;
  while (m < rc.size() && m < rw.size() && rc[m].key == rw[m].key &&
         wordEq(rc[m].word, rw[m].word))
    ++m;
  size_t n = 0;
  while (n + m < rc.size() && n < ru.size() &&
         rc[rc.size() - 1 - n].key == ru[ru.size() - 1 - n].key &&
         wordEq(rc[rc.size() - 1 - n].word, ru[ru.size() - 1 - n].word))
    ++n;
  SeamOracle out;
  size_t middle = rc.size() - m - n;
  REQUIRE(middle <= 1);
  out.caseTag = middle == 0 ? 1 : 2;
  out.keepW = m;
  out.keepU = n;
  out.merged = middle ? rc[m].word : wE();
  return out;
}

size_t intervalRunCount(const PDecomp& d, const Interval& i) {
  auto e = enumerateInterval(d.pindex, i, 100000);
  REQUIRE(e);
  return e->size();
}

}  // namespace

TEST_CASE("pdecompose basic shapes") {
  // a00 a01 a10: two runs
  auto w = wLit({gs(0, 0), gs(0, 1), gs(1, 0)});
  PDecomp d = pdecompose(w);
  auto rs = runsOf(d);
  REQUIRE(rs.size() == 2);
  CHECK(rs[0].key == gsKey(0));
  CHECK(wordEq(rs[0].word, wLit({gs(0, 0), gs(0, 1)})));
  CHECK(rs[1].key == gsKey(1));

  // pure word: single run
  auto p = wLit({gs(3, 0), gs(3, 5), gs(3, 2, -1)});
  CHECK(runsOf(pdecompose(p)).size() == 1);

  // empty word: empty p-index
  CHECK(pdecompose(wE()).isEmpty());

  // unreduced input rejected
  CHECK_THROWS_AS(pdecompose(wLit({gs(0, 0), gs(0, 0, -1)})), NotReduced);
}

TEST_CASE("pdecompose of a branch word") {
  auto w = branchWord(6);
  PDecomp d = pdecompose(w);
  REQUIRE(d.segs.size() == 1);
  CHECK(d.segs[0].streamTail);
  // p-index is omega-like and every run is one letter
  CHECK(d.pindex->kind == Order::Kind::SumSeq);
  for (uint64_t n = 0; n < 6; ++n) {
    auto runs = d.segs[0].blockRuns(n);
    REQUIRE(runs.size() == 1);
    auto sz = finiteSize(domainOrder(runs[0].word));
    CHECK(*sz == 1);
  }
  CHECK(*d.runLetterBound() == 1);

  // alternating alphas
  CHECK(d.segs[0].blockRuns(0)[0].key == gsKey(0));
  CHECK(d.segs[0].blockRuns(1)[0].key == gsKey(1));
}

TEST_CASE("chunks reassemble the word") {
  auto w = wConcat({wLit({gs(0, 0), gs(0, 1), gs(1, 0), gs(2, 3)}),
                    branchWord(9)});
  PDecomp d = pdecompose(w);
  CHECK(wordEq(d.chunk(Interval::all()), w));

  // single-run chunks match runAt
  auto ps = enumerateInterval(d.pindex, Interval::all(), 6);
  if (!ps) {
    // infinite p-index: sample the leading positions
    auto some = samplePositions(d.pindex, 6);
    for (const auto& p : some) {
      auto c = d.chunk(Interval::single(p));
      CHECK(wordEq(c, d.runAt(p).word));
    }
  }

  // prefix chunk of the literal part
  Pos first = minPosIn(d.pindex, Interval::all()).pos;
  auto c = d.chunk(Interval::single(first));
  CHECK(wordEq(c, wLit({gs(0, 0), gs(0, 1)})));
}

TEST_CASE("chunk extraction on an omega tail") {
  auto w = branchWord(5);
  PDecomp d = pdecompose(w);
  // interval from the third block on
  Interval tail{false, IBound::at({2, 0}, true), IBound::posInf()};
  WordPtr c = d.chunk(tail);
  CHECK(legalityCheck(c).ok);
  // it equals the stream shifted by two blocks
  CHECK(wordEq(c, streamFromSlot(w->stream, 2)));

  Interval midI{false, IBound::at({1, 0}, true), IBound::at({3, 0}, true)};
  WordPtr mid = d.chunk(midI);
  FiniteWord ml = project(mid, kIndexCap - 1);
  REQUIRE(ml.size() == 3);
  CHECK(ml[0] == gs(1, 4));  // branch 5: codes 2,4,12,20,...
  CHECK(ml[1] == gs(0, 12));
  CHECK(ml[2] == gs(1, 20));
}

TEST_CASE("multiply trichotomy frozen examples") {
  // disjoint alphas: clean seam
  auto r1 = multiplyPDecomp(wLetter(gs(0, 0)), wLetter(gs(1, 0)));
  CHECK(r1.caseTag == 1);

  // merged alpha-1 block
  auto w = wLit({gs(0, 0), gs(1, 0)});
  auto u = wLit({gs(1, 0), gs(0, 0)});
  auto r2 = multiplyPDecomp(w, u);
  CHECK(r2.caseTag == 2);
  CHECK(wordEq(r2.merged, wLit({gs(1, 0), gs(1, 0)})));
  CHECK(intervalRunCount(pdecompose(w), r2.initial) == 1);
  CHECK(intervalRunCount(pdecompose(u), r2.terminal) == 1);

  // middle cancellation
  auto u2 = wLit({gs(1, 0, -1), gs(0, 0)});
  auto r3 = multiplyPDecomp(w, u2);
  CHECK(r3.caseTag == 2);
  CHECK(wordEq(r3.merged, wLit({gs(0, 0), gs(0, 0)})));
  CHECK(intervalRunCount(pdecompose(w), r3.initial) == 0);
  CHECK(intervalRunCount(pdecompose(u2), r3.terminal) == 0);
}

TEST_CASE("multiply agrees with the seam oracle on random reduced words") {
  gen::Rng rng(411);
  int checked = 0;
  for (int iter = 0; iter < 250; ++iter) {
    WordPtr w = gen::randomReducedLit(rng, 6);
    WordPtr u = gen::randomReducedLit(rng, 6);
    if (w->isE() || u->isE()) continue;
    SeamOracle so = seamOracle(w, u);
    MultiplyResult mr = multiplyPDecomp(w, u);
    CHECK(mr.caseTag == so.caseTag);
    if (so.caseTag == 2) {
      REQUIRE(mr.merged);
      CHECK(wordEq(mr.merged, so.merged));
    }
    CHECK(intervalRunCount(pdecompose(w), mr.initial) == so.keepW);
    CHECK(intervalRunCount(pdecompose(u), mr.terminal) == so.keepU);
    ++checked;
  }
  CHECK(checked > 150);
}

TEST_CASE("pure key detection") {
  CHECK(*pureKeyOf(wLit({gs(2, 0), gs(2, 9, -1)})) == gsKey(2));
  CHECK_FALSE(pureKeyOf(wLit({gs(2, 0), gs(3, 0)})).has_value());
  CHECK(*pureKeyOf(wLit({ha(4), ha(4), ha(4)})) == haKey(4));
  CHECK_FALSE(pureKeyOf(wLit({ha(4), ha(5)})).has_value());
  // q-pure words are pure
  AtomTpl q = AtomTpl::qpure(Family::GS, AlphaRule::constant(1),
                             IndexRule::constant(2), IndexRule::constant(0));
  CHECK(*pureKeyOf(q.eval(0)) == gsKey(1));
}
