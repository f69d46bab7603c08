#include "doctest.h"
#include "transred/close.hpp"

using namespace transred;

TEST_CASE("rational enumeration is a bijection with order by value") {
  for (uint64_t code = 0; code < 2000; ++code) {
    Rat q = ratOfCode(code);
    CHECK(codeOfRat(q) == code);
  }
  CHECK(ratOfCode(0) == Rat{0, 1});
  CHECK(negCode(negCode(17)) == 17);
  for (uint64_t code = 1; code < 500; ++code) {
    Rat q = ratOfCode(code);
    Rat n = ratOfCode(negCode(code));
    CHECK(n.num == -q.num);
    CHECK(n.den == q.den);
  }
}

TEST_CASE("cmp on basic orders") {
  auto fin3 = oFin(3);
  CHECK(cmpPos(fin3, {0}, {2}) < 0);

  auto ro = oOmegaStar();  // rev(omega)
  // position [i] counts from the right end; 7 is left of 5
  CHECK(cmpPos(ro, {7}, {5}) < 0);

  auto s = oSumFin({oOmega(), oFin(1)});
  CHECK(cmpPos(s, {0, 100}, {1, 0}) < 0);
}

TEST_CASE("rev normalizes structurally") {
  CHECK(orderEq(oRev(oRev(oOmega())), oOmega()));
  CHECK(orderEq(oRev(oOmega()), oOmegaStar()));
  auto s = oSumFin({oOmega(), oFin(2)});
  auto r = oRev(s);
  REQUIRE(r->kind == Order::Kind::SumFin);
  CHECK(orderEq(r->parts[0], oFin(2)));
  CHECK(orderEq(r->parts[1], oOmegaStar()));
  CHECK(orderEq(oRev(r), s));
}

TEST_CASE("total order law on sampled positions") {
  auto orders = {
      oOmega(), oRat(), oSumFin({oFin(2), oRat(), oOmegaStar()}),
      oSumSeq(SeqShape::Omega, OrderRule::finOf(IndexRule::affine(1, 1))),
      oSumSeq(SeqShape::Rat, OrderRule::constShape(oFin(2)))};
  for (const auto& o : orders) {
    auto ps = samplePositions(o, 24);
    for (const auto& a : ps) CHECK(validPos(o, a));
    for (const auto& a : ps)
      for (const auto& b : ps) {
        int ab = cmpPos(o, a, b), ba = cmpPos(o, b, a);
        CHECK(ab == -ba);
        if (&a == &b) continue;
        for (const auto& c : ps) {
          if (cmpPos(o, a, b) <= 0 && cmpPos(o, b, c) <= 0)
            CHECK(cmpPos(o, a, c) <= 0);
        }
      }
  }
}

TEST_CASE("is_close on omega") {
  auto w = oOmega();
  CHECK(isClose(w, Selector::aprog(0, 2)));            // evens
  CHECK(isClose(w, Selector::cofiniteEx({{0}, {4}})));  // cofinite
  CHECK_FALSE(isClose(w, Selector::finiteSet({{0}, {1}, {2}, {3}, {4}})));
}

TEST_CASE("is_close on rat and sums") {
  CHECK(isClose(oRat(), Selector::all()));
  CHECK(isClose(oRat(), Selector::cofiniteEx({{3}})));
  CHECK_FALSE(isClose(oRat(), Selector::finiteSet({{1}, {2}})));
  // codes = 0 mod 2 are the nonpositive rationals: not dense
  CHECK_FALSE(isClose(oRat(), Selector::aprog(0, 2)));
  CHECK_FALSE(isClose(oRat(), Selector::aprog(1, 2)));

  auto s = oSumFin({oFin(3), oOmega()});
  CHECK(isClose(s, Selector::forParts({Selector::finiteSet({}),
                                       Selector::aprog(1, 3)})));
  CHECK_FALSE(isClose(s, Selector::forParts({Selector::all(),
                                             Selector::finiteSet({{2}})})));

  // one point in every block of an omega-indexed sum
  auto seq = oSumSeq(SeqShape::Omega, OrderRule::constShape(oFin(2)));
  CHECK(isClose(seq, Selector::forSlots(IndexSet::all(),
                                        {Selector::finiteSet({{0}})})));
  // ... and over a close slot set
  CHECK(isClose(seq, Selector::forSlots(IndexSet::aprog(0, 2),
                                        {Selector::finiteSet({{1}})})));
  // finite slot set is not close
  CHECK_FALSE(isClose(seq, Selector::forSlots(IndexSet::finite({1, 2, 3}),
                                              {Selector::all()})));

  // rat-indexed sum with every slot selected
  auto rseq = oSumSeq(SeqShape::Rat, OrderRule::constShape(oFin(2)));
  CHECK(isClose(rseq, Selector::forSlots(IndexSet::all(),
                                         {Selector::finiteSet({{0}})})));
}

TEST_CASE("close transitivity on the term grammar") {
  // Close(L2,L1) and Close(L1,L0) => Close(L2,L0): spot-check with nested
  // arithmetic progressions on omega, membership-level
  auto w = oOmega();
  auto s1 = Selector::aprog(0, 2);
  auto s2 = Selector::aprog(0, 4);  // subset of evens, still close
  CHECK(isClose(w, s1));
  CHECK(isClose(w, s2));
  for (uint64_t n = 0; n < 50; ++n)
    if (selMember(w, s2, {n})) CHECK(selMember(w, s1, {n}));
}

TEST_CASE("propto on omega with evens") {
  auto w = oOmega();
  auto evens = Selector::aprog(0, 2);
  // I = [1,5]: trace {2,4}, hull [2,4]
  Interval i = Interval::closedRange({1}, {5});
  Interval h = propto(w, i, evens);
  REQUIRE_FALSE(h.empty);
  CHECK(h.lo.pos == Pos{2});
  CHECK(h.lo.closed);
  CHECK(h.hi.pos == Pos{4});
  CHECK(h.hi.closed);

  // idempotence
  Interval h2 = propto(w, h, evens);
  CHECK(h2.lo.pos == h.lo.pos);
  CHECK(h2.hi.pos == h.hi.pos);

  // empty interval
  CHECK(propto(w, Interval::none(), evens).empty);
}

TEST_CASE("residual on omega with evens") {
  auto w = oOmega();
  auto evens = Selector::aprog(0, 2);
  Interval i = Interval::closedRange({1}, {6});
  // trace {2,4,6}: hull [2,6], initial {1}, terminal empty
  Residual r = residual(w, i, evens);
  CHECK(r.initialElems == std::vector<Pos>{{1}});
  CHECK(r.terminalElems.empty());

  Interval j = Interval::closedRange({1}, {5});
  Residual r2 = residual(w, j, evens);
  CHECK(r2.initialElems == std::vector<Pos>{{1}});
  CHECK(r2.terminalElems == std::vector<Pos>{{5}});

  // interval disjoint from the subset: initial empty, terminal = I
  auto odd = Selector::aprog(1, 2);
  Interval k = Interval::closedRange({2}, {2});
  Residual r3 = residual(w, k, odd);
  CHECK(r3.initialElems.empty());
  CHECK(r3.terminalElems == std::vector<Pos>{{2}});
}

TEST_CASE("propto with dense trace keeps open bounds") {
  auto r = oRat();
  auto cof = Selector::cofiniteEx({{codeOfRat(Rat{1, 2})}});
  uint64_t c0 = codeOfRat(Rat{0, 1});
  uint64_t c1 = codeOfRat(Rat{1, 1});
  Interval i = Interval::closedRange({c0}, {c1});
  Interval h = propto(r, i, cof);
  // 0 and 1 stay in the subset, so the hull keeps the closed endpoints
  CHECK(h.lo.pos == Pos{c0});
  CHECK(h.lo.closed);
  CHECK(h.hi.pos == Pos{c1});

  // excluding the endpoint opens the hull there
  auto cof2 = Selector::cofiniteEx({{c0}});
  Interval h2 = propto(r, i, cof2);
  CHECK(h2.lo.pos == Pos{c0});
  CHECK_FALSE(h2.lo.closed);
  Residual res = residual(r, i, cof2);
  CHECK(res.initialElems == std::vector<Pos>{{c0}});
  CHECK(res.terminalElems.empty());
}

TEST_CASE("enumerate intervals") {
  auto w = oOmega();
  auto e = enumerateInterval(w, Interval::closedRange({3}, {6}), 100);
  REQUIRE(e);
  CHECK(e->size() == 4);
  CHECK_FALSE(enumerateInterval(w, Interval::all(), 100));

  auto s = oSumFin({oFin(2), oFin(3)});
  auto es = enumerateInterval(s, Interval::all(), 100);
  REQUIRE(es);
  CHECK(es->size() == 5);  // normalization merges into Fin(5)
}
