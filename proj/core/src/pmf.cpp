#include "hrcplan/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace hrc {

Pmf::Pmf(std::vector<Entry> entries) {
  std::map<int, double> merged;
  for (const auto& [v, p] : entries) {
    if (p < 0.0 || !std::isfinite(p)) throw std::invalid_argument("pmf mass must be finite and non-negative");
    if (p > 0.0) merged[v] += p;
  }
  entries_.assign(merged.begin(), merged.end());
}

double Pmf::total() const noexcept {
  double s = 0.0;
  for (const auto& e : entries_) s += e.second;
  return s;
}

double Pmf::prob(int value) const noexcept {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), value,
                             [](const Entry& e, int v) { return e.first < v; });
  return (it != entries_.end() && it->first == value) ? it->second : 0.0;
}

double Pmf::mean() const noexcept {
  double m = 0.0, t = 0.0;
  for (const auto& [v, p] : entries_) {
    m += v * p;
    t += p;
  }
  return t > 0 ? m / t : 0.0;
}

Pmf Pmf::normalized() const {
  double t = total();
  if (t <= 0.0) throw std::domain_error("cannot normalize an empty pmf");
  Pmf out;
  out.entries_ = entries_;
  for (auto& e : out.entries_) e.second /= t;
  return out;
}

Pmf Pmf::residual(int shift) const {
  std::vector<Entry> out;
  for (const auto& [v, p] : entries_) {
    if (v > shift) out.emplace_back(v - shift, p);
  }
  Pmf r(std::move(out));
  return r.empty() ? r : r.normalized();
}

int Pmf::sample(Rng& rng) const {
  double u = uniform01(rng) * total();
  for (const auto& [v, p] : entries_) {
    if (u < p) return v;
    u -= p;
  }
  return entries_.back().first;
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

Pmf duration_pmf(int nominal, double cv, int min_value) {
  const double sigma = cv * nominal;
  if (sigma <= 0.0) return Pmf::point(std::max(nominal, min_value));
  const int hi = static_cast<int>(std::ceil(nominal + 10.0 * sigma)) + 1;
  std::vector<Pmf::Entry> out;
  // Mass at or below min_value is clamped onto min_value.
  out.emplace_back(min_value, normal_cdf((min_value + 0.5 - nominal) / sigma));
  for (int k = min_value + 1; k <= hi; ++k) {
    out.emplace_back(k, normal_cdf((k + 0.5 - nominal) / sigma) - normal_cdf((k - 0.5 - nominal) / sigma));
  }
  return Pmf(std::move(out)).normalized();
}

int sample_duration(int nominal, double cv, int min_value, Rng& rng) {
  const double sigma = cv * nominal;
  if (sigma <= 0.0) return std::max(nominal, min_value);
  std::normal_distribution<double> dist(nominal, sigma);
  const double x = dist(rng);
  const long k = std::lround(x);
  return static_cast<int>(std::max<long>(k, min_value));
}

Pmf truncated_exponential(double rate, int max_offset) {
  if (rate <= 0.0) throw std::invalid_argument("change rate must be positive");
  std::vector<Pmf::Entry> w;
  for (int k = 1; k <= max_offset; ++k) w.emplace_back(k, std::exp(-rate * k));
  Pmf p(std::move(w));
  return p.empty() ? p : p.normalized();
}

double prob_less(const Pmf& a, const Pmf& b) {
  double s = 0.0;
  for (const auto& [va, pa] : a.entries()) {
    for (const auto& [vb, pb] : b.entries()) {
      if (va < vb) s += pa * pb;
    }
  }
  return s;
}

}  // namespace hrc
