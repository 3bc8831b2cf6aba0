/*
Copyright 2026 The auxvi Authors
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "auxvi/diagnostics.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace auxvi::diag {

// Greatest convex minorant / least concave majorant cycling of Hartigan &
// Hartigan (AS 217), 1-based indices over the sorted sample.
double dip_statistic(std::span<const double> samples) {
  const long n = static_cast<long>(samples.size());
  if (n < 2) {
    return 0.0;
  }
  std::vector<double> x(static_cast<std::size_t>(n) + 1);
  std::copy(samples.begin(), samples.end(), x.begin() + 1);
  std::sort(x.begin() + 1, x.end());
  if (x[1] == x[static_cast<std::size_t>(n)]) {
    return 0.0;
  }
  auto X = [&](long i) { return x[static_cast<std::size_t>(i)]; };

  std::vector<long> mn(static_cast<std::size_t>(n) + 1);
  std::vector<long> mj(static_cast<std::size_t>(n) + 1);
  std::vector<long> gcm(static_cast<std::size_t>(n) + 1);
  std::vector<long> lcm(static_cast<std::size_t>(n) + 1);
  auto at = [](std::vector<long>& v, long i) -> long& {
    return v[static_cast<std::size_t>(i)];
  };

  at(mn, 1) = 1;
  for (long j = 2; j <= n; ++j) {
    at(mn, j) = j - 1;
    while (true) {
      const long mnj = at(mn, j);
      const long mnmnj = at(mn, mnj);
      if (mnj == 1 ||
          (X(j) - X(mnj)) * static_cast<double>(mnj - mnmnj) <
              (X(mnj) - X(mnmnj)) * static_cast<double>(j - mnj)) {
        break;
      }
      at(mn, j) = mnmnj;
    }
  }
  at(mj, n) = n;
  for (long k = n - 1; k >= 1; --k) {
    at(mj, k) = k + 1;
    while (true) {
      const long mjk = at(mj, k);
      const long mjmjk = at(mj, mjk);
      if (mjk == n ||
          (X(k) - X(mjk)) * static_cast<double>(mjk - mjmjk) <
              (X(mjk) - X(mjmjk)) * static_cast<double>(k - mjk)) {
        break;
      }
      at(mj, k) = mjmjk;
    }
  }

  double dip = 0.0;
  long low = 1;
  long high = n;
  while (true) {
    at(gcm, 1) = high;
    long i = 1;
    for (; at(gcm, i) > low; ++i) {
      at(gcm, i + 1) = at(mn, at(gcm, i));
    }
    const long l_gcm = i;
    long ig = l_gcm;
    long ix = ig - 1;

    at(lcm, 1) = low;
    i = 1;
    for (; at(lcm, i) < high; ++i) {
      at(lcm, i + 1) = at(mj, at(lcm, i));
    }
    const long l_lcm = i;
    long ih = l_lcm;
    long iv = 2;

    double d = 0.0;
    if (l_gcm != 2 || l_lcm != 2) {
      do {
        const long gcmix = at(gcm, ix);
        const long lcmiv = at(lcm, iv);
        if (gcmix > lcmiv) {
          const long gcmi1 = at(gcm, ix + 1);
          const double dx =
              static_cast<double>(lcmiv - gcmi1 + 1) -
              (X(lcmiv) - X(gcmi1)) * static_cast<double>(gcmix - gcmi1) /
                  (X(gcmix) - X(gcmi1));
          ++iv;
          if (dx >= d) {
            d = dx;
            ig = ix + 1;
            ih = iv - 1;
          }
        } else {
          const long lcmiv1 = at(lcm, iv - 1);
          const double dx =
              (X(gcmix) - X(lcmiv1)) * static_cast<double>(lcmiv - lcmiv1) /
                  (X(lcmiv) - X(lcmiv1)) -
              static_cast<double>(gcmix - lcmiv1 - 1);
          --ix;
          if (dx >= d) {
            d = dx;
            ig = ix + 1;
            ih = iv;
          }
        }
        ix = std::max(ix, 1L);
        iv = std::min(iv, l_lcm);
      } while (at(gcm, ix) != at(lcm, iv));
    }
    if (d < dip) {
      break;
    }

    double dip_l = 0.0;
    for (long j = ig; j < l_gcm; ++j) {
      double max_t = 1.0;
      const long jb = at(gcm, j + 1);
      const long je = at(gcm, j);
      if (je - jb > 1 && X(je) != X(jb)) {
        const double c = static_cast<double>(je - jb) / (X(je) - X(jb));
        for (long jj = jb; jj <= je; ++jj) {
          max_t = std::max(max_t, static_cast<double>(jj - jb + 1) -
                                      (X(jj) - X(jb)) * c);
        }
      }
      dip_l = std::max(dip_l, max_t);
    }
    double dip_u = 0.0;
    for (long j = ih; j < l_lcm; ++j) {
      double max_t = 1.0;
      const long jb = at(lcm, j);
      const long je = at(lcm, j + 1);
      if (je - jb > 1 && X(je) != X(jb)) {
        const double c = static_cast<double>(je - jb) / (X(je) - X(jb));
        for (long jj = jb; jj <= je; ++jj) {
          max_t = std::max(max_t, (X(jj) - X(jb)) * c -
                                      static_cast<double>(jj - jb - 1));
        }
      }
      dip_u = std::max(dip_u, max_t);
    }
    dip = std::max(dip, std::max(dip_l, dip_u));

    if (low == at(gcm, ig) && high == at(lcm, ih)) {
      break;
    }
    low = at(gcm, ig);
    high = at(lcm, ih);
  }
  return dip / (2.0 * static_cast<double>(n));
}

DipTest dip_test(std::span<const double> samples, std::size_t reps,
                 std::uint64_t seed) {
  if (reps == 0) {
    throw std::invalid_argument("dip_test: reps must be positive");
  }
  DipTest t;
  t.dip = dip_statistic(samples);
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> ref(samples.size());
  std::size_t exceed = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    for (auto& v : ref) {
      v = uniform(engine);
    }
    if (dip_statistic(ref) >= t.dip) {
      ++exceed;
    }
  }
  t.p_value = static_cast<double>(exceed) / static_cast<double>(reps);
  return t;
}

} // namespace auxvi::diag
