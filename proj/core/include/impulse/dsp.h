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

// Signal-processing primitives shared by the detectors: frame energy,
// plain and warped autocorrelation, Levinson-Durbin, and the (warped)
// inverse filters that produce the prediction residual.
//
// Every batch function here starts from zero filter state. The streaming
// detectors carry state across blocks with AllpassChain instead.

#ifndef IMPULSE_DSP_H_
#define IMPULSE_DSP_H_

#include <optional>
#include <span>
#include <vector>

namespace impulse::dsp {

// Linear predictor x^[n] = sum_{i=1..order} coeffs[i-1] * x[n-i].
//
// The inverse (whitening) filter is H(z) = 1 - sum a_i z^-i; code that needs
// the "1 + sum" tap form negates internally. Only this convention is exposed.
class LpcModel {
 public:
  LpcModel(std::vector<double> coeffs, double residual_variance,
           std::vector<double> reflection = {});

  int order() const { return static_cast<int>(coeffs_.size()); }
  std::span<const double> coeffs() const { return coeffs_; }
  double residual_variance() const { return residual_variance_; }
  // Reflection coefficients from the recursion, empty if not built by one.
  std::span<const double> reflection() const { return reflection_; }

 private:
  std::vector<double> coeffs_;
  double residual_variance_;
  std::vector<double> reflection_;
};

// Warping coefficient of the first-order all-pass D(z) = (z^-1 - l)/(1 - l z^-1).
class WarpParams {
 public:
  static constexpr double kDefaultLambda = -0.7;

  WarpParams() = default;
  explicit WarpParams(double lambda);

  double lambda() const { return lambda_; }

 private:
  double lambda_ = kDefaultLambda;
};

// One first-order all-pass section, y[n] = -l*u[n] + u[n-1] + l*y[n-1].
class AllpassSection {
 public:
  explicit AllpassSection(double lambda) : lambda_(lambda) {}

  double Process(double u) {
    const double y = -lambda_ * u + u_prev_ + lambda_ * y_prev_;
    u_prev_ = u;
    y_prev_ = y;
    return y;
  }
  void Reset() { u_prev_ = y_prev_ = 0.0; }

 private:
  double lambda_;
  double u_prev_ = 0.0;
  double y_prev_ = 0.0;
};

// Cascade of `depth` all-pass sections with persistent state. Process()
// writes y_1[n]..y_depth[n] into `taps`.
class AllpassChain {
 public:
  AllpassChain(WarpParams warp, int depth);

  void Process(double x, std::span<double> taps) {
    double u = x;
    for (std::size_t k = 0; k < sections_.size(); ++k) {
      u = sections_[k].Process(u);
      taps[k] = u;
    }
  }
  void Reset();
  int depth() const { return static_cast<int>(sections_.size()); }

 private:
  std::vector<AllpassSection> sections_;
};

// Sum of squares. Throws InvalidArgument on an empty frame.
double FrameEnergy(std::span<const double> frame);

// Biased autocorrelation r[k] = sum_n x[n] x[n-k], k = 0..max_lag.
// Throws InvalidArgument if max_lag < 0 or max_lag >= x.size().
std::vector<double> Autocorrelation(std::span<const double> x, int max_lag);

// Solves the Toeplitz normal equations for `order` coefficients.
// Throws DegenerateSignalError if r[0] <= 0, IllConditionedError (with the
// failing stage) if any reflection coefficient reaches magnitude 1, and
// InvalidArgument if r is shorter than order + 1.
LpcModel LevinsonDurbin(std::span<const double> r, int order);

// residual[n] = x[n] - sum_i a_i x[n-i], zero history before x[0].
std::vector<double> PredictionResidual(std::span<const double> x,
                                       const LpcModel& model);

// Row k-1 of the result is x passed through k cascaded all-pass sections.
std::vector<std::vector<double>> AllpassDelayChain(std::span<const double> x,
                                                   WarpParams warp, int depth);

// r_w[k] = sum_n x[n] y_k[n], y_k the k-th all-pass row (y_0 = x).
// Identical to Autocorrelation() when lambda is zero.
std::vector<double> WarpedAutocorrelation(std::span<const double> x,
                                          WarpParams warp, int max_lag);

// residual[n] = x[n] - sum_i a_i y_i[n]. Identical to PredictionResidual()
// when lambda is zero.
std::vector<double> WarpedPredictionResidual(std::span<const double> x,
                                             const LpcModel& model,
                                             WarpParams warp);

// Median of |x - median(x)|; the median of an even count is the mean of the
// two middle values. Throws InvalidArgument on empty input.
double MedianAbsoluteDeviation(std::span<const double> x);

// Exact MAD of successive, mostly overlapping windows (a sliding history).
// Each call is equivalent to MedianAbsoluteDeviation(window) but reuses the
// previous result to skip most of the selection work.
class SlidingMad {
 public:
  double Compute(std::span<const double> window);

 private:
  std::optional<double> median_;
  std::optional<double> mad_;
  std::vector<double> work_;
  std::vector<double> near_median_;
  std::vector<double> near_mad_;
};

}  // namespace impulse::dsp

#endif  // IMPULSE_DSP_H_
