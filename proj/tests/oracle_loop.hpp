#pragma once

// Independent reference implementation of the repetition counters, written as
// literal set comprehensions over index sets. Deliberately structured
// differently from the shipped sliding-window code so agreement between the
// two is meaningful: here we materialize the candidate index set for each
// window and count members satisfying the predicate.

#include <algorithm>
#include <string>
#include <vector>

namespace oracle {

// Bitwise Hamming distance between two 16-char hex digests, computed nibble by
// nibble with a lookup table (the engine XORs parsed 64-bit words instead).
inline int reference_distance(const std::string& a, const std::string& b) {
  static const int kBits[16] = {0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4};
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return 0;
  };
  int d = 0;
  for (size_t i = 0; i < 16; ++i) {
    int x = i < a.size() ? nibble(a[i]) : 0;
    int y = i < b.size() ? nibble(b[i]) : 0;
    d += kBits[x ^ y];
  }
  return d;
}

struct RefStep {
  std::string fingerprint;
  std::string pre;
  std::string post;
};

// |{ i : i ∈ [t-1, t] ∧ i ≥ 0 ∧ fp_i = fp_t ∧ post_i ≈ pre_i }|
inline int ref_action_repeat(const std::vector<RefStep>& s, int t, int epsilon) {
  std::vector<int> window;
  for (int i = 0; i < static_cast<int>(s.size()); ++i)
    if (i >= t - 1 && i <= t) window.push_back(i);
  return static_cast<int>(std::count_if(window.begin(), window.end(), [&](int i) {
    return s[i].fingerprint == s[t].fingerprint &&
           reference_distance(s[i].post, s[i].pre) <= epsilon;
  }));
}

// |{ i : i ∈ [t-2, t] ∧ i ≥ 0 ∧ pre_i ≈ pre_t }|
inline int ref_screen_repeat(const std::vector<RefStep>& s, int t, int epsilon) {
  std::vector<int> window;
  for (int i = 0; i < static_cast<int>(s.size()); ++i)
    if (i >= t - 2 && i <= t) window.push_back(i);
  return static_cast<int>(std::count_if(window.begin(), window.end(), [&](int i) {
    return reference_distance(s[i].pre, s[t].pre) <= epsilon;
  }));
}

}  // namespace oracle
