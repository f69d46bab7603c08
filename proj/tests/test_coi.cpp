#include "doctest.h"
#include "gen.hpp"
#include "transred/coi.hpp"

using namespace transred;

namespace {
const Bounds kB{};

CoiTriple pureSeed(const WordPtr& pure) { return CoiTriple{pure, wE(), {}}; }

CoiTriple identityTriple(const WordPtr& w) {
  PDecomp d = pdecompose(w);
  return CoiTriple{w, w, identityCoi(d)};
}

}  // namespace

TEST_CASE("propto via identity coi") {
  auto w = branchFamilyWord(13);
  PDecomp d = pdecompose(w);
  CoiMap id = identityCoi(d);

  // full interval maps to the full interval
  Interval all = proptoViaCoi(id, d, d, Interval::all());
  CHECK(wordEq(d.chunk(all), w));

  // a bounded interval maps onto itself
  Interval i{false, IBound::at({3, 0}, true), IBound::at({7, 0}, true)};
  Interval h = proptoViaCoi(id, d, d, i);
  CHECK(wordEq(d.chunk(h), d.chunk(i)));

  // finite intervals have finite images
  auto elems = enumerateInterval(d.pindex, h, 100);
  REQUIRE(elems);
  CHECK(elems->size() == 5);

  // round-trip law: propto(propto(I, iota), iota^-1) = propto(I, dom)
  CoiMap inv = id.inverse();
  Interval back = proptoViaCoi(inv, d, d, h);
  CHECK(wordEq(d.chunk(back), d.chunk(i)));
}

TEST_CASE("coi well-formedness") {
  auto w = branchFamilyWord(3);
  CHECK(coiWellFormed(identityTriple(w)));
  // a triple whose iota misses the infinite tail is rejected
  CoiTriple bad{w, w, {}};
  CHECK_FALSE(coiWellFormed(bad));
  // pure seeds have empty iota over an empty tail structure
  CHECK(coiWellFormed(pureSeed(wLit({gs(0, 0), gs(0, 4)}))));
}

TEST_CASE("all-pure seed collections are coherent") {
  CoherentCollection c;
  c.kappa0 = 2;
  c.kappa1 = 2;
  c.triples.push_back(pureSeed(wLit({gs(0, 0)})));
  c.triples.push_back(pureSeed(wLit({gs(1, 0), gs(1, 1)})));
  c.triples.push_back(pureSeed(wLit({gs(0, 2), gs(0, 0, -1)})));
  auto rep = checkCoherence(c, kB);
  CHECK(rep.coherent);
  CHECK(rep.inconclusive.empty());
}

TEST_CASE("identity collections are coherent") {
  CoherentCollection c;
  c.triples.push_back(identityTriple(wLit({gs(0, 0), gs(1, 0)})));
  c.triples.push_back(identityTriple(branchFamilyWord(5)));
  auto rep = checkCoherence(c, kB);
  CHECK(rep.coherent);
}

TEST_CASE("corrupted collections yield violations") {
  // two triples with the same infinite word but quotient-distinct images:
  // the identity triple sends wx to itself while the corrupted triple sends
  // it block-for-block onto a different branch word
  auto wx = branchFamilyWord(7);
  auto wy = branchFamilyWord(8);
  CoherentCollection c;
  c.triples.push_back(identityTriple(wx));
  CoiMap m;
  CoiMap::TailPair tp;
  tp.domSeg = tp.codSeg = 0;
  tp.innerPerResidue = {{{0, 0}}};
  m.tails.push_back(tp);
  c.triples.push_back(CoiTriple{wx, wy, m});
  CHECK(coiWellFormed(c.triples[1]));
  auto rep = checkCoherence(c, kB);
  CHECK_FALSE(rep.coherent);
  REQUIRE(rep.violation);
  // the replayable counterexample really is quotient-nontrivial
  REQUIRE(rep.violationDiff);
  CHECK(kernelTest(rep.violationDiff, kB).status ==
        KernelCertificate::Status::Nontrivial);

  // small finite images with matching classes stay coherent: a two-letter
  // word sent pointwise into the deep letters of another word
  auto w = wLit({gs(0, 0), gs(1, 0)});
  CoherentCollection fine;
  fine.triples.push_back(identityTriple(w));
  CoiMap pm;
  pm.pairs.emplace_back(Pos{0}, Pos{0, 0});
  pm.pairs.emplace_back(Pos{1}, Pos{1, 0});
  fine.triples.push_back(CoiTriple{w, branchFamilyWord(7), pm});
  // both chunk images are finite concatenations of pure words, hence the
  // trivial class on each side
  auto rep2 = checkCoherence(fine, kB);
  CHECK(rep2.coherent);
}

TEST_CASE("induced hom on the all-pure collection kills everything") {
  CoherentCollection c;
  c.triples.push_back(pureSeed(wLit({gs(0, 0)})));
  c.triples.push_back(pureSeed(wLit({gs(1, 3)})));
  InducedHom phi{&c, true};
  // any pfine member of the pure basis maps to the identity class
  auto w = red(wConcat({wLit({gs(0, 0)}), wLit({gs(1, 3)})}));
  auto val = evalHom(phi, w, kB);
  REQUIRE(val.inPfine);
  CHECK(val.rep->isE());
}

TEST_CASE("induced hom on an identity triple is the identity") {
  auto w = wLit({gs(0, 0), gs(1, 0), gs(0, 1)});
  CoherentCollection c;
  c.triples.push_back(identityTriple(w));
  InducedHom phi{&c, true};
  auto val = evalHom(phi, w, kB);
  REQUIRE(val.inPfine);
  CHECK(classesEqual(val.rep, w, kB) == ClassEq::Equal);

  // homomorphism laws on chunks
  PDecomp d = pdecompose(w);
  WordPtr left = d.chunk(Interval{false, IBound::negInf(), IBound::at({1}, true)});
  WordPtr right = d.chunk(Interval{false, IBound::at({2}, true), IBound::posInf()});
  auto vl = evalHom(phi, left, kB);
  auto vr = evalHom(phi, right, kB);
  REQUIRE(vl.inPfine);
  REQUIRE(vr.inPfine);
  auto prod = red(wConcat({vl.rep, vr.rep}));
  CHECK(classesEqual(prod, w, kB) == ClassEq::Equal);

  // inverse law
  auto vinv = evalHom(phi, wordInverse(w), kB);
  REQUIRE(vinv.inPfine);
  CHECK(classesEqual(vinv.rep, wordInverse(w), kB) == ClassEq::Equal);
}

TEST_CASE("round trip through identity collections") {
  CoherentCollection c;
  auto w0 = wLit({gs(0, 0), gs(1, 0)});
  auto w1 = branchFamilyWord(9);
  c.triples.push_back(identityTriple(w0));
  c.triples.push_back(identityTriple(w1));
  PDecomp d1 = pdecompose(w1);
  std::vector<WordPtr> samples{
      w0, wordInverse(w0),
      d1.chunk(Interval{false, IBound::at({2, 0}, true), IBound::posInf()}),
      red(wConcat({w0, w0}))};
  auto rep = verifyMutualInverse(c, samples, kB);
  CHECK(rep.failed == 0);
  CHECK(rep.passed >= 3);
}

TEST_CASE("hom values agree across alternative decompositions") {
  // two overlapping generators create several covers of the same word
  auto g0 = wLit({gs(0, 0), gs(1, 0)});
  auto g1 = wLit({gs(1, 0), gs(0, 1)});
  CoherentCollection c;
  c.triples.push_back(identityTriple(g0));
  c.triples.push_back(identityTriple(g1));
  auto w = red(wConcat({g0, wLit({gs(0, 1)})}));  // = a00 a10 a01
  PfineBasis basis = c.wBasis();
  auto decs = pfineDecompose(w, basis, kB, 5);
  REQUIRE(decs.size() >= 2);
  InducedHom phi{&c, true};
  std::vector<WordPtr> vals;
  for (const auto& dec : decs) {
    auto v = evalHomWith(phi, w, dec, kB);
    REQUIRE(v.inPfine);
    vals.push_back(v.rep);
  }
  for (size_t i = 1; i < vals.size(); ++i)
    CHECK(classesEqual(vals[0], vals[i], kB) == ClassEq::Equal);
}
