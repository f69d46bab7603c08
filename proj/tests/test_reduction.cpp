#include "doctest.h"
#include "gen.hpp"
#include "oracle.hpp"
#include "transred/reduce.hpp"

using namespace transred;

namespace {

WordPtr inversePairStream() {
  TailRule t;
  t.atomsPerResidue = {{AtomTpl::ofLetters(
      {LetterTpl{Family::GS, AlphaRule::constant(0), IndexRule::affine(0, 1), 1, 1},
       LetterTpl{Family::GS, AlphaRule::constant(0), IndexRule::affine(0, 1), -1,
                 1}})}};
  return wStream(SeqShape::Omega, t);
}

WordPtr branchWord(uint64_t bits) {
  TailRule t;
  t.atomsPerResidue = {{AtomTpl::ofLetters(
      {LetterTpl{Family::GS, AlphaRule{{0, 1}}, IndexRule::branch(bits), 1, 1}})}};
  return wStream(SeqShape::Omega, t);
}

}  // namespace

TEST_CASE("stack pairing matches the frozen exhaustive-search values") {
  // a00 a10 a10^-1 a01: the unique maximal cancellation pairs <1,2>
  FiniteWord w{gs(0, 0), gs(1, 0), gs(1, 0, -1), gs(0, 1)};
  auto maxs = oracle::maximalCancellations(w);
  REQUIRE(maxs.size() == 1);
  CHECK(maxs[0] == oracle::Pairing{{1, 2}});
  auto c = maxCancellationFinite(w);
  REQUIRE(c.pairs.size() == 1);
  CHECK(c.pairs[0].first == Pos{1});
  CHECK(c.pairs[0].second == Pos{2});
  CHECK(*oracle::reducedByExhaustiveSearch(w) ==
        FiniteWord{gs(0, 0), gs(0, 1)});

  // inverse pair chain: everything pairs, residue E
  FiniteWord v{gs(0, 0), gs(0, 0, -1), gs(0, 1), gs(0, 1, -1)};
  CHECK(oracle::reducedByExhaustiveSearch(v)->empty());
  CHECK(maxCancellationFinite(v).pairs.size() == 2);

  // no inverse adjacency at all
  FiniteWord u{gs(0, 0), gs(1, 0)};
  CHECK(maxCancellationFinite(u).pairs.empty());
  CHECK(oracle::maximalCancellations(u).size() == 1);
  CHECK(oracle::maximalCancellations(u)[0].empty());
}

TEST_CASE("stack residue equals exhaustive residue on random small words") {
  gen::Rng rng(20240811);
  for (int iter = 0; iter < 300; ++iter) {
    WordPtr w = gen::randomLit(rng, 7);
    FiniteWord fw = w->isE() ? FiniteWord{} : w->letters;
    auto expect = oracle::reducedByExhaustiveSearch(fw);
    REQUIRE(expect);  // uniqueness across maximal cancellations
    auto c = maxCancellationFinite(fw);
    std::vector<bool> drop(fw.size(), false);
    for (auto& [a, b] : c.pairs) drop[a[0]] = drop[b[0]] = true;
    FiniteWord got;
    for (size_t i = 0; i < fw.size(); ++i)
      if (!drop[i]) got.push_back(fw[i]);
    CHECK(got == *expect);
  }
}

TEST_CASE("verify_cancellation rejects the defining violations") {
  auto w1 = wLit({gs(0, 0), gs(0, 0, -1)});
  Cancellation ok;
  ok.pairs = {{Pos{0}, Pos{1}}};
  CHECK_FALSE(verifyCancellation(w1, ok).has_value());

  auto w2 = wLit({gs(0, 0), gs(1, 0), gs(0, 0, -1)});
  Cancellation gap;
  gap.pairs = {{Pos{0}, Pos{2}}};
  auto v = verifyCancellation(w2, gap);
  REQUIRE(v);
  CHECK(v->condition == 4);

  auto w3 = wLit({gs(0, 0), gs(0, 0)});
  Cancellation notInv;
  notInv.pairs = {{Pos{0}, Pos{1}}};
  auto v2 = verifyCancellation(w3, notInv);
  REQUIRE(v2);
  CHECK(v2->condition == 5);
}

TEST_CASE("reduce basics") {
  CHECK(red(wLit({gs(0, 0), gs(0, 0, -1)}))->isE());
  CHECK(red(wE())->isE());

  // Concat(a00 a10, a10^-1 a01) -> a00 a01
  auto l = wLit({gs(0, 0), gs(1, 0)});
  auto r = wLit({gs(1, 0, -1), gs(0, 1)});
  auto rr = red(wConcat({l, r}));
  CHECK(wordEq(rr, wLit({gs(0, 0), gs(0, 1)})));
}

TEST_CASE("the inverse-pair stream reduces to E") {
  auto w = inversePairStream();
  auto res = reduceWord(w);
  CHECK(res.status == ReductionResult::Status::Complete);
  CHECK(res.reduced->isE());
  CHECK_FALSE(res.used.isEmpty());
  // the recorded block pairing replays on the original word
  CHECK_FALSE(verifyCancellation(w, res.used, 6).has_value());
}

TEST_CASE("telescoping streams") {
  // block n = a[0,n] a[0,n+1]^-1: boundaries cancel for every n, residue a00
  TailRule t;
  t.atomsPerResidue = {{AtomTpl::ofLetters(
      {LetterTpl{Family::GS, AlphaRule::constant(0), IndexRule::affine(0, 1), 1, 1},
       LetterTpl{Family::GS, AlphaRule::constant(0), IndexRule::affine(1, 1), -1,
                 1}})}};
  auto w = wStream(SeqShape::Omega, t);
  auto r = reduceWord(w);
  CHECK(r.status == ReductionResult::Status::Complete);
  CHECK(wordEq(r.reduced, wLit({gs(0, 0)})));

  // level-wise sanity: p_N(Red(w)) free-equal to p_N(w)
  for (uint64_t N = 0; N <= 6; ++N)
    CHECK(finiteWordsFreelyEqual(project(r.reduced, N), project(w, N)));
}

TEST_CASE("full mirror cancellation across stream tails") {
  auto w = branchWord(11);
  auto prod = wConcat({w, wordInverse(w)});
  auto r = reduceWord(prod);
  CHECK(r.status == ReductionResult::Status::Complete);
  CHECK(r.reduced->isE());

  // a finite conjugate: u W W^-1 u^-1
  auto u = wLit({gs(0, 5), gs(1, 2)});
  auto prod2 = wConcat({u, w, wordInverse(w), wordInverse(u)});
  CHECK(red(prod2)->isE());

  // mismatched branches do not cancel
  auto w2 = branchWord(12);
  auto noCancel = wConcat({w, wordInverse(w2)});
  auto r2 = reduceWord(noCancel);
  CHECK(r2.status == ReductionResult::Status::Complete);
  CHECK(wordEq(r2.reduced, noCancel));
}

TEST_CASE("boundary_split four-word decomposition") {
  // w = a00, u = a00^-1
  auto bs = boundarySplit(wLetter(gs(0, 0)), wLetter(gs(0, 0, -1)));
  CHECK(bs.w0->isE());
  CHECK(bs.u1->isE());
  CHECK(wordEq(bs.w1, wLetter(gs(0, 0))));
  CHECK(wordEq(bs.u0, wLetter(gs(0, 0, -1))));

  // no cancellation
  auto bs2 = boundarySplit(wLetter(gs(0, 0)), wLetter(gs(1, 0)));
  CHECK(bs2.w1->isE());
  CHECK(bs2.u0->isE());

  // w = a00 a10 a01, u = a01^-1 a10^-1 a20
  auto w = wLit({gs(0, 0), gs(1, 0), gs(0, 1)});
  auto u = wLit({gs(0, 1, -1), gs(1, 0, -1), gs(2, 0)});
  auto bs3 = boundarySplit(w, u);
  CHECK(wordEq(bs3.w0, wLetter(gs(0, 0))));
  CHECK(wordEq(bs3.u1, wLetter(gs(2, 0))));
  CHECK(wordEq(bs3.w1, wLit({gs(1, 0), gs(0, 1)})));
  CHECK(wordEq(bs3.u0, wLit({gs(0, 1, -1), gs(1, 0, -1)})));
  // decomposition laws
  CHECK(wordEq(wordInverse(bs3.w1), bs3.u0));
  CHECK(wordEq(red(wConcat({w, u})), wConcat({bs3.w0, bs3.u1})));
}

TEST_CASE("reduction laws on random term pairs") {
  gen::Rng rng(7);
  int done = 0;
  for (int iter = 0; iter < 200; ++iter) {
    WordPtr a = gen::randomTerm(rng);
    WordPtr b = gen::randomTerm(rng);
    ReductionResult ra = reduceWord(a);
    ReductionResult rb = reduceWord(b);
    ReductionResult rab = reduceWord(wConcat({a, b}));
    if (ra.status != ReductionResult::Status::Complete ||
        rb.status != ReductionResult::Status::Complete ||
        rab.status != ReductionResult::Status::Complete)
      continue;
    ++done;
    // Red(WU) = Red(Red(W)Red(U))
    auto rr = reduceWord(wConcat({ra.reduced, rb.reduced}));
    REQUIRE(rr.status == ReductionResult::Status::Complete);
    CHECK(wordEq(rab.reduced, rr.reduced));
    // idempotence
    auto again = reduceWord(ra.reduced);
    CHECK(wordEq(again.reduced, ra.reduced));
    // level-wise agreement
    for (uint64_t N = 0; N <= 6; ++N) {
      CHECK(finiteWordsFreelyEqual(project(ra.reduced, N), project(a, N)));
      CHECK(finiteWordsFreelyEqual(project(rab.reduced, N),
                                   project(wConcat({a, b}), N)));
    }
  }
  CHECK(done > 150);
}

TEST_CASE("cyclic reduction") {
  auto w = wLit({gs(0, 0), gs(1, 0), gs(0, 0, -1)});
  auto [conj, core] = cyclicReduce(w);
  CHECK(wordEq(conj, wLetter(gs(0, 0))));
  CHECK(wordEq(core, wLetter(gs(1, 0))));

  // already cyclically reduced
  auto v = wLit({gs(0, 0), gs(1, 0)});
  auto [c2, core2] = cyclicReduce(v);
  CHECK(c2->isE());
  CHECK(wordEq(core2, v));

  // idempotence of the core
  auto [c3, core3] = cyclicReduce(core);
  CHECK(c3->isE());
  CHECK(wordEq(core3, core));

  // core^2 is reduced
  CHECK(isReduced(wConcat({core, core})));
  CHECK_THROWS(cyclicReduce(wE()));
}

TEST_CASE("eq_sim") {
  auto w = inversePairStream();
  auto r = eqSim(w, wE(), 8);
  CHECK(r.kind == SimResult::Kind::Equal);
  CHECK(r.certified);

  // p_0 already separates these: p_0(a[0,0]) = a[0,0] while p_0(a[0,1]) = E
  auto d = eqSim(wLetter(gs(0, 0)), wLetter(gs(0, 1)), 8);
  CHECK(d.kind == SimResult::Kind::Distinct);
  CHECK(d.level == 0);

  // distinct branch words separate at the first symmetric-difference level
  auto a = branchWord(3), b = branchWord(7);
  auto s = eqSim(a, b, 64);
  CHECK(s.kind == SimResult::Kind::Distinct);
}
