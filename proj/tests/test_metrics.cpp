#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "netsel/errors.hpp"
#include "netsel/metrics.hpp"
#include "netsel/rng.hpp"

using namespace netsel;

TEST_CASE("confusion counts on perfect and degenerate predictors") {
  std::vector<int> labels, preds;
  for (int i = 0; i < 20; ++i) {
    labels.push_back(i < 10 ? 1 : 0);
    preds.push_back(i < 10 ? 1 : 0);
  }
  const auto m = confusion(preds, labels);
  CHECK(m.tp == 10);
  CHECK(m.tn == 10);
  CHECK(m.fp == 0);
  CHECK(m.fn == 0);
  CHECK(m.tp_accuracy() == 1.0);

  std::vector<int> all_one(labels.size(), 1);
  const auto m1 = confusion(all_one, labels);
  CHECK(m1.fp == 10);
  CHECK(m1.tp == 10);
}

TEST_CASE("confusion matches a hand-counting oracle on random data") {
  Rng rng(3);
  std::vector<int> preds(50), labels(50);
  for (int i = 0; i < 50; ++i) {
    preds[static_cast<std::size_t>(i)] = rng.bernoulli(0.4) ? 1 : 0;
    labels[static_cast<std::size_t>(i)] = rng.bernoulli(0.5) ? 1 : 0;
  }
  const auto m = confusion(preds, labels);
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (int i = 0; i < 50; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (preds[idx] && labels[idx]) ++tp;
    if (preds[idx] && !labels[idx]) ++fp;
    if (!preds[idx] && labels[idx]) ++fn;
    if (!preds[idx] && !labels[idx]) ++tn;
  }
  CHECK(m.tp == tp);
  CHECK(m.fp == fp);
  CHECK(m.tn == tn);
  CHECK(m.fn == fn);
  CHECK(m.total() == 50);

  // Permutation invariance.
  std::vector<std::size_t> order(50);
  for (std::size_t i = 0; i < 50; ++i) order[i] = i;
  shuffle_in_place(order, rng);
  std::vector<int> p2, l2;
  for (std::size_t i : order) {
    p2.push_back(preds[i]);
    l2.push_back(labels[i]);
  }
  const auto m2 = confusion(p2, l2);
  CHECK(m2.tp == m.tp);
  CHECK(m2.fp == m.fp);
  CHECK(m2.tn == m.tn);
  CHECK(m2.fn == m.fn);
}

TEST_CASE("classification threshold is boundary-inclusive") {
  CHECK(classify_handover(0.7, 0.7) == 1);
  CHECK(classify_handover(0.69, 0.7) == 0);
  CHECK(classify_handover(0.61, 0.6) == 1);
}

TEST_CASE("true accuracy reacts to the threshold") {
  std::vector<double> probs(10, 0.65);
  std::vector<int> labels(10, 0);
  CHECK(true_accuracy(probs, labels, 0.7) == 1.0);
  CHECK(true_accuracy(probs, labels, 0.6) == 0.0);
}

TEST_CASE("true accuracy equals (tp+tn)/total from the confusion at the same threshold") {
  Rng rng(5);
  std::vector<double> probs(200);
  std::vector<int> labels(200);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    probs[i] = rng.uniform(0.0, 1.0);
    labels[i] = rng.bernoulli(0.3) ? 1 : 0;
  }
  const double thresh = 0.7;
  std::vector<int> preds;
  for (double p : probs) preds.push_back(classify_handover(p, thresh));
  const auto m = confusion(preds, labels);
  CHECK(true_accuracy(probs, labels, thresh) == doctest::Approx(m.accuracy()).epsilon(1e-15));
}

TEST_CASE("roc on perfectly separated scores has auc one") {
  std::vector<double> scores{0.9, 0.8, 0.7, 0.2, 0.1};
  std::vector<int> labels{1, 1, 1, 0, 0};
  const auto roc = roc_auc(scores, labels);
  CHECK(roc.auc == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(roc.fpr.front() == 0.0);
  CHECK(roc.tpr.front() == 0.0);
  CHECK(roc.fpr.back() == 1.0);
  CHECK(roc.tpr.back() == 1.0);
}

TEST_CASE("identical scores for both classes give auc one half") {
  std::vector<double> scores{0.4, 0.4, 0.4, 0.4};
  std::vector<int> labels{1, 0, 1, 0};
  CHECK(roc_auc(scores, labels).auc == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("single-class labels are rejected") {
  std::vector<double> scores{0.1, 0.2};
  std::vector<int> labels{1, 1};
  try {
    roc_auc(scores, labels);
    FAIL("expected SingleClass");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::single_class);
  }
}

TEST_CASE("trapezoidal auc equals the pairwise Mann-Whitney statistic") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 30;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; ++i) {
      // Quantize so ties actually occur.
      scores[static_cast<std::size_t>(i)] = std::floor(rng.uniform(0.0, 1.0) * 8.0) / 8.0;
      labels[static_cast<std::size_t>(i)] = rng.bernoulli(0.5) ? 1 : 0;
      (labels[static_cast<std::size_t>(i)] ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) continue;
    const auto roc = roc_auc(scores, labels);

    double wins = 0.0;
    std::int64_t pairs = 0;
    for (int i = 0; i < n; ++i) {
      if (!labels[static_cast<std::size_t>(i)]) continue;
      for (int j = 0; j < n; ++j) {
        if (labels[static_cast<std::size_t>(j)]) continue;
        ++pairs;
        if (scores[static_cast<std::size_t>(i)] > scores[static_cast<std::size_t>(j)]) wins += 1.0;
        else if (scores[static_cast<std::size_t>(i)] == scores[static_cast<std::size_t>(j)]) wins += 0.5;
      }
    }
    CHECK(roc.auc == doctest::Approx(wins / static_cast<double>(pairs)).epsilon(1e-12));
  }
}

TEST_CASE("roc is exactly invariant under strictly increasing score transforms") {
  Rng rng(9);
  std::vector<double> scores(60);
  std::vector<int> labels(60);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = std::floor(rng.uniform(0.0, 1.0) * 16.0) / 16.0;
    labels[i] = rng.bernoulli(0.4) ? 1 : 0;
  }
  const auto base = roc_auc(scores, labels);
  std::vector<double> affine(scores), cubed(scores);
  for (auto& s : affine) s = 2.0 * s + 1.0;
  for (auto& s : cubed) s = s * s * s;
  for (const auto& variant : {affine, cubed}) {
    const auto roc = roc_auc(variant, labels);
    CHECK(roc.auc == base.auc);
    CHECK(roc.fpr == base.fpr);
    CHECK(roc.tpr == base.tpr);
  }
}

TEST_CASE("prediction ratio closed forms") {
  std::vector<double> reals{1.0, 2.0, 4.0};
  std::vector<double> same = reals;
  CHECK(prediction_ratio(same, reals).ratio == doctest::Approx(1.0).epsilon(1e-15));
  std::vector<double> doubled{2.0, 4.0, 8.0};
  CHECK(prediction_ratio(doubled, reals).ratio == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("prediction ratio matches a direct loop and reports exclusions") {
  Rng rng(11);
  std::vector<double> preds(50), reals(50);
  for (std::size_t i = 0; i < 50; ++i) {
    preds[i] = rng.uniform(0.0, 10.0);
    reals[i] = i % 7 == 0 ? 0.0 : rng.uniform(0.5, 10.0);
  }
  const auto pr = prediction_ratio(preds, reals);
  double acc = 0.0;
  std::size_t inc = 0, exc = 0;
  const double eps = 1e-6 * 10.0;  // range is ~[0, 10]
  for (std::size_t i = 0; i < 50; ++i) {
    if (reals[i] <= 0.0 || reals[i] <= 1e-6 * (*std::max_element(reals.begin(), reals.end()) -
                                               *std::min_element(reals.begin(), reals.end()))) {
      ++exc;
      continue;
    }
    acc += preds[i] / reals[i];
    ++inc;
  }
  (void)eps;
  CHECK(pr.included == inc);
  CHECK(pr.excluded == exc);
  CHECK(pr.ratio == doctest::Approx(acc / static_cast<double>(inc)).epsilon(1e-12));
}

TEST_CASE("all-zero reals leave no valid ratio pairs") {
  std::vector<double> preds{1.0, 2.0};
  std::vector<double> reals{0.0, 0.0};
  try {
    prediction_ratio(preds, reals);
    FAIL("expected NoValidPairs");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::no_valid_pairs);
  }
}

TEST_CASE("percentiles interpolate linearly") {
  std::vector<double> series{0.0, 10.0, 20.0, 30.0, 40.0};
  const auto p = percentiles(series);
  CHECK(p.p25 == doctest::Approx(10.0));
  CHECK(p.p50 == doctest::Approx(20.0));
  CHECK(p.p75 == doctest::Approx(30.0));

  std::vector<double> constant(7, 3.5);
  const auto pc = percentiles(constant);
  CHECK(pc.p25 == 3.5);
  CHECK(pc.p50 == 3.5);
  CHECK(pc.p75 == 3.5);

  std::vector<double> uniform(101);
  for (int i = 0; i <= 100; ++i) uniform[static_cast<std::size_t>(i)] = i;
  const auto pu = percentiles(uniform);
  CHECK(pu.p25 == doctest::Approx(25.0));
  CHECK(pu.p50 == doctest::Approx(50.0));
  CHECK(pu.p75 == doctest::Approx(75.0));
}

TEST_CASE("percentile ordering p25 <= p50 <= p75 and dominance monotonicity") {
  Rng rng(13);
  std::vector<double> a(40), b(40);
  for (std::size_t i = 0; i < 40; ++i) {
    a[i] = rng.uniform(0.0, 1.0);
    b[i] = a[i] + rng.uniform(0.0, 0.5);  // b dominates a pointwise
  }
  const auto pa = percentiles(a);
  const auto pb = percentiles(b);
  CHECK(pa.p25 <= pa.p50);
  CHECK(pa.p50 <= pa.p75);
  CHECK(pa.p25 <= pb.p25);
  CHECK(pa.p50 <= pb.p50);
  CHECK(pa.p75 <= pb.p75);
}

TEST_CASE("empty series raises EmptySeries") {
  try {
    percentiles({});
    FAIL("expected EmptySeries");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_series);
  }
}
