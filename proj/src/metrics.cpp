#include "netsel/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "netsel/errors.hpp"

namespace netsel {

double ConfusionMatrix::tp_accuracy() const {
  const std::int64_t denom = tp + fn;
  return denom == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(denom);
}

double ConfusionMatrix::accuracy() const {
  const std::int64_t denom = total();
  return denom == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(denom);
}

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels) {
  require(preds.size() == labels.size(), ErrorCode::length_mismatch,
          "prediction/label count mismatch");
  require(!preds.empty(), ErrorCode::length_mismatch, "empty inputs");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] != 0;
    const bool y = labels[i] != 0;
    if (p && y) ++m.tp;
    else if (p && !y) ++m.fp;
    else if (!p && y) ++m.fn;
    else ++m.tn;
  }
  return m;
}

int classify_handover(double probability, double d_thresh) {
  return probability >= d_thresh ? 1 : 0;
}

double true_accuracy(std::span<const double> probs, std::span<const int> labels,
                     double d_thresh) {
  require(probs.size() == labels.size(), ErrorCode::length_mismatch,
          "probability/label count mismatch");
  require(!probs.empty(), ErrorCode::length_mismatch, "empty inputs");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (classify_handover(probs[i], d_thresh) == labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(probs.size());
}

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels) {
  require(scores.size() == labels.size(), ErrorCode::length_mismatch,
          "score/label count mismatch");
  std::int64_t pos = 0, neg = 0;
  for (int y : labels) (y != 0 ? pos : neg) += 1;
  require(pos > 0 && neg > 0, ErrorCode::single_class,
          "both classes must be present");

  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RocCurve curve;
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);
  std::int64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    // Consume every sample tied at this score before emitting a point.
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      if (labels[order[i]] != 0) ++tp;
      else ++fp;
      ++i;
    }
    curve.fpr.push_back(static_cast<double>(fp) / static_cast<double>(neg));
    curve.tpr.push_back(static_cast<double>(tp) / static_cast<double>(pos));
  }
  double auc = 0.0;
  for (std::size_t k = 1; k < curve.fpr.size(); ++k)
    auc += (curve.fpr[k] - curve.fpr[k - 1]) * (curve.tpr[k] + curve.tpr[k - 1]) * 0.5;
  curve.auc = auc;
  return curve;
}

PredictionRatio prediction_ratio(std::span<const double> preds,
                                 std::span<const double> reals) {
  require(preds.size() == reals.size(), ErrorCode::length_mismatch,
          "prediction/real count mismatch");
  require(!preds.empty(), ErrorCode::no_valid_pairs, "empty inputs");
  double lo = reals[0], hi = reals[0];
  for (double r : reals) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  const double eps = 1e-6 * (hi - lo);

  PredictionRatio out;
  double acc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (reals[i] <= 0.0 || reals[i] <= eps) {
      ++out.excluded;
      continue;
    }
    acc += preds[i] / reals[i];
    ++out.included;
  }
  require(out.included > 0, ErrorCode::no_valid_pairs,
          "all real values are at or below the exclusion threshold");
  out.ratio = acc / static_cast<double>(out.included);
  return out;
}

double percentile(std::span<const double> series, double q) {
  require(!series.empty(), ErrorCode::empty_series, "empty series");
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - std::floor(rank);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

PercentileSummary percentiles(std::span<const double> series) {
  require(!series.empty(), ErrorCode::empty_series, "empty series");
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  auto at = [&](double q) {
    const double rank = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = rank - std::floor(rank);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  };
  return PercentileSummary{at(0.25), at(0.5), at(0.75)};
}

}  // namespace netsel
