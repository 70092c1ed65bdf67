#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace netsel {

struct ConfusionMatrix {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  // Fraction of actual positives caught.
  double tp_accuracy() const;
  double accuracy() const;
};

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels);

// 1 iff probability >= d_thresh (boundary inclusive).
int classify_handover(double probability, double d_thresh);

// Mean agreement of thresholded probabilities with binary labels.
double true_accuracy(std::span<const double> probs, std::span<const int> labels,
                     double d_thresh);

struct RocCurve {
  std::vector<double> fpr;  // non-decreasing, starts 0, ends 1
  std::vector<double> tpr;
  double auc = 0.0;
};

// Threshold sweep over distinct scores; AUC by the trapezoidal rule, which
// equals P(score+ > score-) + 0.5 P(=) over positive/negative pairs.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels);

struct PredictionRatio {
  double ratio = 0.0;       // mean pred/real over included pairs
  std::size_t included = 0;
  std::size_t excluded = 0;  // pairs whose real value was ~0
};

// Pairs with real <= 1e-6 of the label range (or <= 0) are excluded.
PredictionRatio prediction_ratio(std::span<const double> preds,
                                 std::span<const double> reals);

struct PercentileSummary {
  double p25 = 0.0;
  double p50 = 0.0;
  double p75 = 0.0;
};

// Linear interpolation between closest ranks on the sorted series.
double percentile(std::span<const double> series, double q);
PercentileSummary percentiles(std::span<const double> series);

}  // namespace netsel
