// scratch harness for isolating reduction-law failures; not a ctest target
#include <iostream>

#include "gen.hpp"
#include "transred/reduce.hpp"

using namespace transred;

static void dump(const WordPtr& w, int indent = 0) {
  std::string pad(indent, ' ');
  switch (w->kind) {
    case Word::Kind::Lit:
      std::cerr << pad << "Lit " << finiteWordText(w->letters) << "\n";
      break;
    case Word::Kind::Concat:
      std::cerr << pad << "Concat\n";
      for (auto& p : w->parts) dump(p, indent + 2);
      break;
    case Word::Kind::Stream: {
      std::cerr << pad << "Stream shape="
                << (w->stream.shape == SeqShape::Omega       ? "w"
                    : w->stream.shape == SeqShape::OmegaStar ? "w*"
                                                             : "Q")
                << " period=" << w->stream.tail.period() << "\n";
      for (uint64_t n = 0; n < 4; ++n) {
        std::cerr << pad << "  block" << n << " = "
                  << finiteWordText(project(w->stream.block(n), 100)) << "\n";
      }
      break;
    }
  }
}

int main() {
  gen::Rng rng(7);
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
    auto rr = reduceWord(wConcat({ra.reduced, rb.reduced}));
    bool bad = false;
    if (!wordEq(rab.reduced, rr.reduced)) bad = true;
    auto again = reduceWord(ra.reduced);
    if (!wordEq(again.reduced, ra.reduced)) bad = true;
    for (uint64_t N = 0; N <= 6 && !bad; ++N) {
      if (!finiteWordsFreelyEqual(project(ra.reduced, N), project(a, N)))
        bad = true;
    }
    if (bad) {
      std::cerr << "iter " << iter << "\n=== a ===\n";
      dump(a);
      std::cerr << "=== red(a) ===\n";
      dump(ra.reduced);
      std::cerr << "=== red(red(a)) ===\n";
      dump(again.reduced);
      std::cerr << "=== b ===\n";
      dump(b);
      std::cerr << "=== red(ab) ===\n";
      dump(rab.reduced);
      std::cerr << "=== red(red(a)red(b)) ===\n";
      dump(rr.reduced);
      return 1;
    }
  }
  std::cerr << "all ok\n";
  return 0;
}
