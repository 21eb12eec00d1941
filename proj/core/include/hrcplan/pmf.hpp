#pragma once

#include <utility>
#include <vector>

#include "hrcplan/rng.hpp"

namespace hrc {

/// Discrete distribution over integer step counts, sorted by value.
class Pmf {
 public:
  using Entry = std::pair<int, double>;

  Pmf() = default;
  /// Merges duplicate values and drops zero-mass entries; does not normalize.
  explicit Pmf(std::vector<Entry> entries);

  static Pmf point(int value) { return Pmf({{value, 1.0}}); }

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }
  double total() const noexcept;
  double prob(int value) const noexcept;
  double mean() const noexcept;
  int min() const { return entries_.front().first; }
  int max() const { return entries_.back().first; }

  Pmf normalized() const;
  /// Distribution of (X - shift) conditioned on X > shift, renormalized.
  Pmf residual(int shift) const;

  int sample(Rng& rng) const;

 private:
  std::vector<Entry> entries_;
};

/// Distribution of max(min_value, round(N(nominal, (cv*nominal)^2))).
Pmf duration_pmf(int nominal, double cv, int min_value);
int sample_duration(int nominal, double cv, int min_value, Rng& rng);

/// Weights exp(-rate*k) on k = 1..max_offset, renormalized. Empty when max_offset < 1.
Pmf truncated_exponential(double rate, int max_offset);

/// P(A < B) for independent A, B.
double prob_less(const Pmf& a, const Pmf& b);

}  // namespace hrc
