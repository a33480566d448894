// Copyright 2026 The Impulse Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "impulse/dsp.h"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "impulse/errors.h"

namespace impulse::dsp {

LpcModel::LpcModel(std::vector<double> coeffs, double residual_variance,
                   std::vector<double> reflection)
    : coeffs_(std::move(coeffs)),
      residual_variance_(residual_variance),
      reflection_(std::move(reflection)) {
  if (coeffs_.empty()) throw InvalidArgument("LPC order must be positive");
  if (!(residual_variance_ >= 0.0)) {
    throw InvalidArgument("residual variance must be nonnegative");
  }
}

WarpParams::WarpParams(double lambda) : lambda_(lambda) {
  if (!(std::fabs(lambda) < 1.0)) {
    throw InvalidArgument("lambda out of range: |" + std::to_string(lambda) +
                          "| >= 1 gives an unstable all-pass");
  }
}

AllpassChain::AllpassChain(WarpParams warp, int depth) {
  if (depth < 1) throw InvalidArgument("all-pass chain depth must be >= 1");
  sections_.assign(static_cast<std::size_t>(depth),
                   AllpassSection(warp.lambda()));
}

void AllpassChain::Reset() {
  for (auto& s : sections_) s.Reset();
}

double FrameEnergy(std::span<const double> frame) {
  if (frame.empty()) throw InvalidArgument("frame energy of an empty frame");
  double sum = 0.0;
  for (double v : frame) sum += v * v;
  return sum;
}

namespace {

void CheckLag(std::size_t n, int max_lag) {
  if (max_lag < 0) throw InvalidArgument("max_lag must be nonnegative");
  if (static_cast<std::size_t>(max_lag) >= n) {
    throw InvalidArgument("max_lag " + std::to_string(max_lag) +
                          " must be smaller than the signal length " +
                          std::to_string(n));
  }
}

}  // namespace

// The inner loops below and in the warped variants deliberately share one
// summation order so that lambda = 0 reproduces the plain path bit for bit.
std::vector<double> Autocorrelation(std::span<const double> x, int max_lag) {
  CheckLag(x.size(), max_lag);
  std::vector<double> r(static_cast<std::size_t>(max_lag) + 1, 0.0);
  for (int k = 0; k <= max_lag; ++k) {
    double sum = 0.0;
    for (std::size_t n = static_cast<std::size_t>(k); n < x.size(); ++n) {
      sum += x[n] * x[n - k];
    }
    r[k] = sum;
  }
  return r;
}

LpcModel LevinsonDurbin(std::span<const double> r, int order) {
  if (order < 1) throw InvalidArgument("LPC order must be >= 1");
  if (r.size() < static_cast<std::size_t>(order) + 1) {
    throw InvalidArgument("autocorrelation has " + std::to_string(r.size()) +
                          " lags, order " + std::to_string(order) +
                          " needs " + std::to_string(order + 1));
  }
  if (!(r[0] > 0.0)) {
    throw DegenerateSignalError("r[0] <= 0: no signal energy to model");
  }

  std::vector<double> a(static_cast<std::size_t>(order), 0.0);
  std::vector<double> prev(a.size(), 0.0);
  std::vector<double> reflection(a.size(), 0.0);
  double error = r[0];
  for (int m = 1; m <= order; ++m) {
    double acc = r[m];
    for (int i = 1; i < m; ++i) acc -= a[i - 1] * r[m - i];
    const double k = acc / error;
    if (!(std::fabs(k) < 1.0)) {
      throw IllConditionedError(
          m, "reflection coefficient " + std::to_string(k) + " at stage " +
                 std::to_string(m) + " is not inside the unit circle");
    }
    prev.assign(a.begin(), a.end());
    a[m - 1] = k;
    for (int i = 1; i < m; ++i) a[i - 1] = prev[i - 1] - k * prev[m - i - 1];
    error *= (1.0 - k * k);
    reflection[m - 1] = k;
  }
  return LpcModel(std::move(a), error, std::move(reflection));
}

std::vector<double> PredictionResidual(std::span<const double> x,
                                       const LpcModel& model) {
  const auto a = model.coeffs();
  const std::size_t order = a.size();
  std::vector<double> residual(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = x[n];
    const std::size_t taps = n < order ? n : order;
    for (std::size_t i = 1; i <= taps; ++i) acc -= a[i - 1] * x[n - i];
    residual[n] = acc;
  }
  return residual;
}

std::vector<std::vector<double>> AllpassDelayChain(std::span<const double> x,
                                                   WarpParams warp,
                                                   int depth) {
  if (depth < 1) throw InvalidArgument("all-pass chain depth must be >= 1");
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(depth));
  std::span<const double> input = x;
  for (auto& row : rows) {
    AllpassSection section(warp.lambda());
    row.resize(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) row[n] = section.Process(input[n]);
    input = row;
  }
  return rows;
}

std::vector<double> WarpedAutocorrelation(std::span<const double> x,
                                          WarpParams warp, int max_lag) {
  CheckLag(x.size(), max_lag);
  std::vector<double> r(static_cast<std::size_t>(max_lag) + 1, 0.0);
  double r0 = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) r0 += x[n] * x[n];
  r[0] = r0;

  // Only one all-pass row is alive at a time.
  std::vector<double> row(x.begin(), x.end());
  for (int k = 1; k <= max_lag; ++k) {
    AllpassSection section(warp.lambda());
    for (double& v : row) v = section.Process(v);
    // With lambda == 0 the leading k products are exact zeros, so the sum
    // matches Autocorrelation() bit for bit.
    double sum = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) sum += x[n] * row[n];
    r[k] = sum;
  }
  return r;
}

std::vector<double> WarpedPredictionResidual(std::span<const double> x,
                                             const LpcModel& model,
                                             WarpParams warp) {
  const auto a = model.coeffs();
  AllpassChain chain(warp, model.order());
  std::vector<double> taps(a.size());
  std::vector<double> residual(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    chain.Process(x[n], taps);
    double acc = x[n];
    for (std::size_t i = 1; i <= a.size(); ++i) acc -= a[i - 1] * taps[i - 1];
    residual[n] = acc;
  }
  return residual;
}

namespace {

// Median of v; reorders v.
double MedianInPlace(std::span<double> v) {
  const std::size_t half = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + half, v.end());
  const double upper = v[half];
  if (v.size() % 2 == 1) return upper;
  return 0.5 * (*std::max_element(v.begin(), v.begin() + half) + upper);
}

// Median of a sequence of `size` values, given that `below` of them are
// smaller than every candidate in c[0..n) and the rest are larger. Empty when
// a middle order statistic is not among the candidates. Reorders c.
std::optional<double> MiddleOfCandidates(std::vector<double>& c, std::size_t n,
                                         std::size_t below, std::size_t size) {
  const std::size_t half = size / 2;
  const std::size_t first = size % 2 == 1 ? half : half - 1;
  if (first < below || half >= below + n) return std::nullopt;
  const auto begin = c.begin();
  const auto end = c.begin() + static_cast<std::ptrdiff_t>(n);
  const auto mid = begin + static_cast<std::ptrdiff_t>(half - below);
  std::nth_element(begin, mid, end);
  if (first == half) return *mid;
  return 0.5 * (*std::max_element(begin, mid) + *mid);
}

}  // namespace

double MedianAbsoluteDeviation(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("MAD of an empty sequence");
  std::vector<double> v(x.begin(), x.end());
  const double median = MedianInPlace(v);
  for (double& d : v) d = std::fabs(d - median);
  return MedianInPlace(v);
}

// The previous median and MAD bracket the new ones because successive windows
// overlap heavily; selection then runs over the few values near them, and a
// miss falls back to a full selection.
double SlidingMad::Compute(std::span<const double> window) {
  if (window.empty()) throw InvalidArgument("MAD of an empty window");
  const std::size_t size = window.size();
  if (mad_) {
    // One pass against the previous median m0. If the new median lands in
    // [m0 - w, m0 + w], every |x - m| differs from |x - m0| by at most w, so
    // values far from the MAD bracket [lo, hi] can be counted without
    // knowing the new median yet.
    const double m0 = *median_;
    const double w = 0.06 * *mad_;
    const double lo = 0.94 * *mad_;
    const double hi = 1.06 * *mad_;
    near_median_.resize(size);
    near_mad_.resize(size);
    std::size_t median_below = 0, n_median = 0;
    std::size_t mad_below = 0, n_mad = 0;
    for (double x : window) {
      const double t = x - m0;
      const double a = std::fabs(t);
      median_below += t < -w;
      near_median_[n_median] = x;
      n_median += a <= w;
      mad_below += a < lo - w;
      near_mad_[n_mad] = x;
      n_mad += (a >= lo - w) & (a <= hi + w);
    }
    const auto median = MiddleOfCandidates(near_median_, n_median, median_below, size);
    if (median) {
      std::size_t n = 0;
      for (std::size_t i = 0; i < n_mad; ++i) {
        const double d = std::fabs(near_mad_[i] - *median);
        mad_below += d < lo;
        near_mad_[n] = d;
        n += (d >= lo) & (d <= hi);
      }
      if (const auto mad = MiddleOfCandidates(near_mad_, n, mad_below, size)) {
        median_ = median;
        mad_ = mad;
        return *mad;
      }
    }
  }
  work_.assign(window.begin(), window.end());
  const double median = MedianInPlace(work_);
  for (std::size_t i = 0; i < size; ++i) work_[i] = std::fabs(window[i] - median);
  median_ = median;
  mad_ = MedianInPlace(work_);
  return *mad_;
}

}  // namespace impulse::dsp
