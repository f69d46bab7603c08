#pragma once

// Test-only oracles, independent of the library's reduction path: exhaustive
// enumeration of cancellations on explicit finite words.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "transred/word.hpp"

namespace oracle {

using transred::FiniteWord;

using Pairing = std::vector<std::pair<int, int>>;  // sorted by first

// conditions (1)-(5) checked literally on an explicit pairing
inline bool validCancellation(const FiniteWord& w, const Pairing& s) {
  std::vector<int> partner(w.size(), -1);
  for (auto [a, b] : s) {
    if (!(0 <= a && a < b && b < (int)w.size())) return false;   // (1)
    if (partner[a] != -1 || partner[b] != -1) return false;      // (2),(3)
    partner[a] = b;
    partner[b] = a;
    if (!w[a].cancels(w[b])) return false;                       // (5)
  }
  for (auto [a, b] : s) {
    for (int c = a + 1; c < b; ++c) {                            // (4)
      if (partner[c] == -1) return false;
      if (!(a < partner[c] && partner[c] < b)) return false;
    }
  }
  return true;
}

inline void enumeratePairings(const FiniteWord& w, size_t from, Pairing& cur,
                              std::vector<bool>& used,
                              std::vector<Pairing>& out) {
  while (from < w.size() && used[from]) ++from;
  if (from >= w.size()) {
    if (validCancellation(w, cur)) out.push_back(cur);
    return;
  }
  // leave `from` unpaired
  used[from] = true;
  enumeratePairings(w, from + 1, cur, used, out);
  used[from] = false;
  // pair `from` with any later unused inverse letter
  for (size_t j = from + 1; j < w.size(); ++j) {
    if (used[j] || !w[from].cancels(w[j])) continue;
    used[from] = used[j] = true;
    cur.emplace_back(from, j);
    enumeratePairings(w, from + 1, cur, used, out);
    cur.pop_back();
    used[from] = used[j] = false;
  }
}

inline std::vector<Pairing> allCancellations(const FiniteWord& w) {
  std::vector<Pairing> out;
  Pairing cur;
  std::vector<bool> used(w.size(), false);
  enumeratePairings(w, 0, cur, used, out);
  for (auto& p : out) std::sort(p.begin(), p.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::vector<Pairing> maximalCancellations(const FiniteWord& w) {
  auto all = allCancellations(w);
  std::vector<Pairing> maximal;
  for (const auto& s : all) {
    bool isMax = true;
    for (const auto& t : all) {
      if (t.size() <= s.size()) continue;
      if (std::includes(t.begin(), t.end(), s.begin(), s.end())) {
        isMax = false;
        break;
      }
    }
    if (isMax) maximal.push_back(s);
  }
  return maximal;
}

inline FiniteWord residue(const FiniteWord& w, const Pairing& s) {
  std::vector<bool> drop(w.size(), false);
  for (auto [a, b] : s) drop[a] = drop[b] = true;
  FiniteWord out;
  for (size_t i = 0; i < w.size(); ++i)
    if (!drop[i]) out.push_back(w[i]);
  return out;
}

// The unique residue of all maximal cancellations, or nullopt if they differ
// (which would falsify the uniqueness lemma).
inline std::optional<FiniteWord> reducedByExhaustiveSearch(const FiniteWord& w) {
  auto maxs = maximalCancellations(w);
  if (maxs.empty()) return w;
  FiniteWord first = residue(w, maxs[0]);
  for (size_t i = 1; i < maxs.size(); ++i)
    if (!(residue(w, maxs[i]) == first)) return std::nullopt;
  return first;
}

}  // namespace oracle
