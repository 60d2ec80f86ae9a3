#pragma once

#include <cstddef>

#include "cudi/autograd.hpp"

namespace cudi {

/// How the L1 gradient norms inside the smoothness term are reduced:
/// summed over the map, or averaged over the difference terms.
enum class SmoothnessNorm { sum, mean };

struct LossConfig {
  std::size_t exposure_region = 16;     // L_sec tile edge
  std::size_t consistency_region = 4;   // L_sc region edge
  double weight_exposure = 10.0;        // lambda_sec
  double weight_consistency = 1.0;      // lambda_sc
  double weight_color = 5.0;            // lambda_cc
  double weight_smoothness = 200.0;     // lambda_is
  SmoothnessNorm smoothness_norm = SmoothnessNorm::sum;
};

/// Scalar loss nodes for one teacher step, plus the weighted total.
struct TeacherLossTerms {
  Var total;
  Var exposure;
  Var consistency;
  Var color;
  Var smoothness;
};

// All losses take batched NCHW tensors and average over the batch.
namespace losses {

/// Mean over 16x16 tiles of |mean(result tile) - mean(emap tile)|, where the
/// result tile mean is taken over all three channels. Partial tiles dropped.
/// result (B,3,H,W), emap (B,1,H,W).
template <typename T>
Var spatial_exposure_control(Graph<T>& g, Var result, Var emap, std::size_t region = 16);

/// (1/K) sum_i sum_{j in 4-neighbourhood(i)} (|R_i - R_j| - |I_i - I_j|)^2 on
/// channel-averaged 4x4 region means; each neighbouring pair counts in both
/// directions and out-of-grid neighbours are skipped.
template <typename T>
Var spatial_consistency(Graph<T>& g, Var result, Var input, std::size_t region = 4);

/// Sum over channel pairs (r,g), (r,b), (g,b) of squared mean differences.
template <typename T>
Var color_constancy(Graph<T>& g, Var result);

/// (1/n) sum_j sum_c (sum|dx A| + sum|dy A|)^2 with forward differences.
/// params (B,3n,H,W); `iterations` is n. With SmoothnessNorm::mean the two
/// sums become means over H*(W-1) and (H-1)*W terms.
template <typename T>
Var illumination_smoothness(Graph<T>& g, Var params, std::size_t iterations,
                            SmoothnessNorm norm = SmoothnessNorm::sum);

template <typename T>
TeacherLossTerms teacher_total(Graph<T>& g, Var result, Var input, Var emap, Var params,
                               std::size_t iterations, const LossConfig& cfg = {});

/// Mean absolute difference; `target` is typically a constant node.
template <typename T>
Var distill_l1(Graph<T>& g, Var student_out, Var target);

}  // namespace losses

}  // namespace cudi
