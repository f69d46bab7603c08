#include "transred/base.hpp"

#include <numeric>

namespace transred {

namespace {

// Stern-Brocot node k >= 1 (BFS index: children of k are 2k and 2k+1).
// The tree is value-ordered: the subtree of a node spans the open interval
// between its two bounding ancestors, which the close-subset density checks
// rely on.
Rat sb(uint64_t k) {
  int msb = 63;
  while (((k >> msb) & 1) == 0) --msb;
  int64_t ln = 0, ld = 1;  // left bound 0/1
  int64_t rn = 1, rd = 0;  // right bound 1/0
  for (int i = msb - 1; i >= 0; --i) {
    int64_t mn = ln + rn, md = ld + rd;
    if ((k >> i) & 1) {
      ln = mn;
      ld = md;
    } else {
      rn = mn;
      rd = md;
    }
  }
  return Rat{ln + rn, ld + rd};
}

uint64_t sbCode(int64_t num, int64_t den) {
  int64_t ln = 0, ld = 1, rn = 1, rd = 0;
  uint64_t k = 1;
  while (true) {
    int64_t mn = ln + rn, md = ld + rd;
    __int128 lhs = static_cast<__int128>(num) * md;
    __int128 rhs = static_cast<__int128>(mn) * den;
    if (lhs == rhs) return k;
    if (lhs < rhs) {
      k = 2 * k;
      rn = mn;
      rd = md;
    } else {
      k = 2 * k + 1;
      ln = mn;
      ld = md;
    }
  }
}

}  // namespace

Rat ratOfCode(uint64_t code) {
  if (code == 0) return Rat{0, 1};
  uint64_t k = (code + 1) / 2;
  Rat q = sb(k);
  if (code % 2 == 0) q.num = -q.num;
  return q;
}

uint64_t codeOfRat(const Rat& q) {
  if (q.num == 0) return 0;
  int64_t num = q.num < 0 ? -q.num : q.num;
  int64_t g = std::gcd(num, q.den);
  uint64_t k = sbCode(num / g, q.den / g);
  return q.num > 0 ? 2 * k - 1 : 2 * k;
}

int cmpRatCodes(uint64_t a, uint64_t b) {
  if (a == b) return 0;
  Rat qa = ratOfCode(a), qb = ratOfCode(b);
  if (qa < qb) return -1;
  if (qb < qa) return 1;
  return 0;
}

}  // namespace transred
