#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

// Brute-force reference for Spearman's rho, written independently of the
// library: ranks come from pairwise counting and the correlation is the
// two-pass Pearson formula in long double.
namespace oracle {

inline std::vector<long double> counting_ranks(const std::vector<double>& v) {
  std::vector<long double> ranks(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t below = 0;
    std::size_t equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) ++below;
      if (v[j] == v[i]) ++equal;
    }
    // Tied block occupies positions below+1 .. below+equal.
    ranks[i] = static_cast<long double>(below) + (static_cast<long double>(equal) + 1.0L) / 2.0L;
  }
  return ranks;
}

inline double pearson(const std::vector<long double>& x, const std::vector<long double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("oracle: bad lengths");
  const auto n = static_cast<long double>(x.size());
  long double mx = 0.0L;
  long double my = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0.0L;
  long double sxx = 0.0L;
  long double syy = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0L || syy == 0.0L) throw std::invalid_argument("oracle: constant input");
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(counting_ranks(x), counting_ranks(y));
}

}  // namespace oracle
