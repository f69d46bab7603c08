#include "doctest.h"
#include "transred/word.hpp"

using namespace transred;

namespace {

// the running example: a[0,0]*a[0,0]^-1*a[0,1]*a[0,1]^-1*...
WordPtr inversePairStream() {
  TailRule t;
  t.atomsPerResidue = {{AtomTpl::ofLetters(
      {LetterTpl{Family::GS, AlphaRule::constant(0), IndexRule::affine(0, 1), 1, 1},
       LetterTpl{Family::GS, AlphaRule::constant(0), IndexRule::affine(0, 1), -1,
                 1}})}};
  return wStream(SeqShape::Omega, t);
}

// W_X for the branch coded by `bits`: alternating alpha 0,1 with indices
// running along the tree-branch code sequence
WordPtr branchWord(uint64_t bits) {
  TailRule t;
  t.atomsPerResidue = {{AtomTpl::ofLetters(
      {LetterTpl{Family::GS, AlphaRule{{0, 1}}, IndexRule::branch(bits), 1, 1}})}};
  return wStream(SeqShape::Omega, t);
}

}  // namespace

TEST_CASE("projection of the inverse-pair stream") {
  auto w = inversePairStream();
  CHECK(legalityCheck(w).ok);
  FiniteWord p1 = project(w, 1);
  FiniteWord expect{gs(0, 0), gs(0, 0, -1), gs(0, 1), gs(0, 1, -1)};
  CHECK(p1 == expect);
  CHECK(project(w, 0).size() == 2);
  // monotone: p_N is a subsequence of p_{N+1}
  FiniteWord p2 = project(w, 2);
  CHECK(p2.size() == 6);
}

TEST_CASE("legality violations") {
  TailRule constant;
  constant.atomsPerResidue = {{AtomTpl::ofLetters(
      {LetterTpl{Family::GS, AlphaRule::constant(0), IndexRule::constant(0), 1, 1}})}};
  auto w = wStream(SeqShape::Omega, constant);
  auto leg = legalityCheck(w);
  CHECK_FALSE(leg.ok);
  CHECK(leg.level == 0);

  CHECK(legalityCheck(inversePairStream()).ok);
  CHECK(legalityCheck(wLit({gs(0, 0), gs(0, 0, -1)})).ok);
}

TEST_CASE("depth and norm") {
  CHECK_FALSE(wordDepth(wE()).has_value());
  CHECK(wordNorm(wE()) == Rat{0, 1});

  auto w = wLit({gs(3, 5, -1), gs(7, 10)});
  CHECK(*wordDepth(w) == 5);
  CHECK(wordNorm(w) == Rat{1, 6});

  TailRule t;
  t.atomsPerResidue = {{AtomTpl::ofLetters(
      {LetterTpl{Family::GS, AlphaRule::constant(0), IndexRule::affine(3, 1), 1, 1}})}};
  auto s = wStream(SeqShape::Omega, t);
  CHECK(*wordDepth(s) == 3);
}

TEST_CASE("concat and inverse basics") {
  auto w = wLit({gs(0, 0), gs(1, 0)});
  CHECK(wordEq(wConcat({wE(), w}), w));
  auto inv = wordInverse(w);
  CHECK(inv->letters == std::vector<Letter>{gs(1, 0, -1), gs(0, 0, -1)});
  CHECK(wordEq(wordInverse(inv), w));

  // projection is multiplicative over concatenation
  auto u = wLit({gs(0, 7), gs(2, 1)});
  FiniteWord lhs = project(wConcat({w, u}), 3);
  FiniteWord rhs = project(w, 3);
  auto ru = project(u, 3);
  rhs.insert(rhs.end(), ru.begin(), ru.end());
  CHECK(lhs == rhs);
}

TEST_CASE("inverse of streams round-trips") {
  auto w = inversePairStream();
  CHECK(wordEq(wordInverse(wordInverse(w)), w));
  auto wx = branchWord(5);
  CHECK(wordEq(wordInverse(wordInverse(wx)), wx));

  // p_N(w^-1) is the reverse-inverse of p_N(w)
  FiniteWord p = project(wx, 7);
  FiniteWord q = project(wordInverse(wx), 7);
  std::reverse(q.begin(), q.end());
  for (auto& l : q) l = l.inverse();
  CHECK(p == q);
}

TEST_CASE("branch words and almost-disjointness") {
  auto w5 = branchWord(5);
  CHECK(legalityCheck(w5).ok);
  // X = {2^{k+1}-1 + (5 mod 2^{k+1})}: first elements 2, 4, 12, 20, ...
  FiniteWord p = project(w5, 4);
  REQUIRE(p.size() == 2);
  CHECK(p[0] == gs(0, 2));
  CHECK(p[1] == gs(1, 4));

  // distinct branches share only finitely many indices
  auto w9 = branchWord(9);
  FiniteWord a = project(w5, 2000), b = project(w9, 2000);
  size_t common = 0;
  for (const auto& x : a)
    for (const auto& y : b)
      if (x.idx == y.idx) ++common;
  CHECK(common <= 2);  // branches 5=101b, 9=1001b differ from bit 1 on
}

TEST_CASE("qpure atom evaluates to a legal pure word") {
  AtomTpl q = AtomTpl::qpure(Family::GS, AlphaRule::constant(2),
                             IndexRule::constant(3), IndexRule::constant(10));
  auto w = q.eval(0);
  CHECK(legalityCheck(w).ok);
  CHECK(*wordDepth(w) == 2);  // endpoints a[2,2], norm 1/3
  CHECK(wordNorm(w) == Rat{1, 3});
  FiniteWord p = project(w, 2);
  REQUIRE(p.size() == 2);
  CHECK(p[0] == gs(2, 2));
  CHECK(p[1] == gs(2, 2));
  // all letters share alpha
  for (const auto& l : project(w, 40)) CHECK(l.alpha == 2);
  // interior letters are pairwise distinct
  auto ls = project(w, 30);
  for (size_t i = 1; i + 1 < ls.size(); ++i)
    for (size_t j = i + 1; j + 1 < ls.size(); ++j) CHECK(!(ls[i] == ls[j]));

  auto winv = wordInverse(w);
  CHECK(wordEq(wordInverse(winv), w));
  for (const auto& l : project(winv, 20)) CHECK(l.sign == -1);
}

TEST_CASE("ramp atom blocks") {
  AtomTpl r = AtomTpl::ramp();
  auto b0 = r.eval(0);
  CHECK(b0->letters == std::vector<Letter>{ha(0)});
  auto b2 = r.eval(2);
  CHECK(b2->letters == std::vector<Letter>{ha(3), ha(4), ha(5)});
}

TEST_CASE("free reduction of finite words") {
  FiniteWord w{gs(0, 0), gs(0, 0, -1), gs(0, 1), gs(0, 1, -1)};
  CHECK(freeReduceFinite(w).empty());
  CHECK(finiteWordsFreelyEqual(w, {}));
  FiniteWord u{gs(0, 0), gs(1, 0)};
  CHECK(freeReduceFinite(u) == u);
}

TEST_CASE("word positions agree with the domain order") {
  auto w = wConcat({wLit({gs(0, 0), gs(0, 1)}), branchWord(3)});
  auto dom = domainOrder(w);
  auto withPos = projectWithPos(w, 20);
  for (size_t i = 0; i < withPos.size(); ++i) {
    CHECK(validWordPos(w, withPos[i].first));
    CHECK(validPos(dom, withPos[i].first));
    CHECK(letterAt(w, withPos[i].first) == withPos[i].second);
    if (i + 1 < withPos.size()) {
      CHECK(cmpWordPos(w, withPos[i].first, withPos[i + 1].first) < 0);
      CHECK(cmpPos(dom, withPos[i].first, withPos[i + 1].first) < 0);
    }
  }
}
