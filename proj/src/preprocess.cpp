#include "netsel/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "netsel/format.hpp"
#include "netsel/rng.hpp"

namespace netsel {

using nlohmann::json;

const char* task_name(Task t) {
  switch (t) {
    case Task::handover: return "handover";
    case Task::loss: return "loss";
    default: return "latency";
  }
}

Task task_from_name(const std::string& name) {
  if (name == "handover" || name == "hand") return Task::handover;
  if (name == "loss") return Task::loss;
  if (name == "latency") return Task::latency;
  fail(ErrorCode::invalid_config, "unknown task '" + name + "'");
}

const char* feature_kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::gps_only: return "gps";
    case FeatureKind::rsrp_rsrq: return "rsrpq";
    case FeatureKind::seven: return "f7";
    case FeatureKind::eight: return "f8";
    case FeatureKind::nine: return "f9";
    default: return "custom";
  }
}

FeatureKind feature_kind_from_name(const std::string& name) {
  if (name == "gps") return FeatureKind::gps_only;
  if (name == "rsrpq") return FeatureKind::rsrp_rsrq;
  if (name == "f7") return FeatureKind::seven;
  if (name == "f8") return FeatureKind::eight;
  if (name == "f9") return FeatureKind::nine;
  if (name == "custom") return FeatureKind::custom;
  fail(ErrorCode::invalid_config, "unknown feature set '" + name + "'");
}

FeatureSet FeatureSet::predefined(FeatureKind kind) {
  FeatureSet fs;
  fs.kind = kind;
  switch (kind) {
    case FeatureKind::gps_only:
      fs.names = {"gps_longitude", "gps_latitude"};
      break;
    case FeatureKind::rsrp_rsrq:
      fs.names = {"rsrp", "rsrq"};
      break;
    case FeatureKind::seven:
      fs.names = {"timestamp", "rsrp", "rsrq", "modem_bandwidth",
                  "normalized_bandwidth", "packet_loss_rate", "total_bitrate"};
      break;
    case FeatureKind::eight:
      fs.names = {"timestamp", "rsrp", "rsrq", "modem_bandwidth",
                  "normalized_bandwidth", "total_bitrate", "gps_longitude",
                  "gps_latitude"};
      break;
    case FeatureKind::nine:
      fs.names = {"timestamp", "rsrp", "rsrq", "modem_bandwidth",
                  "normalized_bandwidth", "packet_loss_rate", "total_bitrate",
                  "gps_longitude", "gps_latitude"};
      break;
    case FeatureKind::custom:
      fail(ErrorCode::invalid_config, "custom feature sets need explicit names");
  }
  return fs;
}

FeatureSet FeatureSet::custom(std::vector<std::string> names) {
  FeatureSet fs;
  fs.kind = FeatureKind::custom;
  fs.names = std::move(names);
  for (std::size_t i = 0; i < fs.names.size(); ++i)
    for (std::size_t j = i + 1; j < fs.names.size(); ++j)
      require(fs.names[i] != fs.names[j], ErrorCode::invalid_config,
              "duplicate feature '" + fs.names[i] + "'");
  return fs;
}

std::optional<double> feature_value(const TelemetryRow& row, const std::string& name) {
  if (name == "timestamp") return static_cast<double>(row.timestamp);
  if (name == "gps_longitude") return row.gps_longitude;
  if (name == "gps_latitude") return row.gps_latitude;
  if (name == "rsrp") return row.rsrp;
  if (name == "rsrq") return row.rsrq;
  if (name == "rssi") return row.rssi;
  if (name == "modem_bandwidth") return row.modem_bandwidth;
  if (name == "normalized_bandwidth") return row.normalized_bandwidth;
  if (name == "total_bitrate") return row.total_bitrate;
  if (name == "packet_loss_rate") return row.packet_loss_rate;
  if (name == "latency") return row.latency;
  fail(ErrorCode::missing_feature, "unknown feature '" + name + "'");
}

Matrix feature_matrix(const NetworkTrace& trace, const FeatureSet& features) {
  const auto F = static_cast<Eigen::Index>(features.size());
  const auto n = static_cast<Eigen::Index>(trace.rows.size());
  Matrix m(F, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto& row = trace.rows[static_cast<std::size_t>(c)];
    for (Eigen::Index f = 0; f < F; ++f) {
      const auto v = feature_value(row, features.names[static_cast<std::size_t>(f)]);
      m(f, c) = v.has_value() ? *v : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return m;
}

NormalizationParams fit_normalization(const Matrix& rows, const std::vector<double>& labels) {
  NormalizationParams p;
  const Eigen::Index F = rows.cols();
  p.x_min.resize(static_cast<std::size_t>(F));
  p.x_max.resize(static_cast<std::size_t>(F));
  p.degenerate.resize(static_cast<std::size_t>(F));
  for (Eigen::Index f = 0; f < F; ++f) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      const double v = rows(r, f);
      if (std::isnan(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    require(std::isfinite(lo), ErrorCode::all_missing_feature,
            "feature column " + std::to_string(f) + " has no present values");
    p.x_min[static_cast<std::size_t>(f)] = lo;
    p.x_max[static_cast<std::size_t>(f)] = hi;
    p.degenerate[static_cast<std::size_t>(f)] = (lo == hi);
  }
  if (!labels.empty()) {
    const auto [lo, hi] = std::minmax_element(labels.begin(), labels.end());
    p.y_min = *lo;
    p.y_max = *hi;
  }
  return p;
}

double normalize_value(double x, double lo, double hi, bool degenerate) {
  if (degenerate) return 0.0;
  const double v = (x - lo) / (hi - lo);
  return std::clamp(v, 0.0, 1.0);
}

void apply_normalization_in_place(Matrix& rows, const NormalizationParams& params) {
  require(static_cast<std::size_t>(rows.cols()) == params.size(),
          ErrorCode::shape_mismatch, "row width does not match fitted params");
  for (Eigen::Index f = 0; f < rows.cols(); ++f) {
    const auto fi = static_cast<std::size_t>(f);
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      double& v = rows(r, f);
      if (std::isnan(v)) continue;
      v = normalize_value(v, params.x_min[fi], params.x_max[fi], params.degenerate[fi]);
    }
  }
}

double normalize_label(double y, const NormalizationParams& params) {
  if (params.y_max == params.y_min) return 0.0;
  return (y - params.y_min) / (params.y_max - params.y_min);
}

double denormalize_label(double y_norm, const NormalizationParams& params) {
  return y_norm * (params.y_max - params.y_min) + params.y_min;
}

Matrix correlation_matrix(const std::vector<DriveTrace>& traces, const FeatureSet& features) {
  // Pool every row of every network of every drive.
  const auto F = static_cast<Eigen::Index>(features.size());
  std::vector<Matrix> blocks;
  Eigen::Index n = 0;
  for (const auto& drive : traces)
    for (const auto& net : drive.networks) {
      blocks.push_back(feature_matrix(net, features));  // F x len
      n += blocks.back().cols();
    }
  Matrix pooled(F, n);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    pooled.middleCols(at, b.cols()) = b;
    at += b.cols();
  }

  Matrix corr = Matrix::Identity(F, F);
  for (Eigen::Index i = 0; i < F; ++i) {
    for (Eigen::Index j = i + 1; j < F; ++j) {
      // Pairwise-complete two-pass Pearson.
      double sx = 0, sy = 0;
      std::int64_t count = 0;
      for (Eigen::Index c = 0; c < n; ++c) {
        const double a = pooled(i, c), b = pooled(j, c);
        if (std::isnan(a) || std::isnan(b)) continue;
        sx += a;
        sy += b;
        ++count;
      }
      require(count >= 2, ErrorCode::insufficient_data,
              "fewer than 2 complete rows for feature pair (" +
                  features.names[static_cast<std::size_t>(i)] + ", " +
                  features.names[static_cast<std::size_t>(j)] + ")");
      const double mx = sx / static_cast<double>(count);
      const double my = sy / static_cast<double>(count);
      double sxx = 0, syy = 0, sxy = 0;
      for (Eigen::Index c = 0; c < n; ++c) {
        const double a = pooled(i, c), b = pooled(j, c);
        if (std::isnan(a) || std::isnan(b)) continue;
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
      }
      const double denom = std::sqrt(sxx) * std::sqrt(syy);
      const double r = denom > 0.0 ? std::clamp(sxy / denom, -1.0, 1.0) : 0.0;
      corr(i, j) = r;
      corr(j, i) = r;
    }
  }
  return corr;
}

FeatureSet prune_features(const Matrix& corr, const FeatureSet& features, double threshold) {
  require(corr.rows() == corr.cols() &&
              static_cast<std::size_t>(corr.rows()) == features.size(),
          ErrorCode::shape_mismatch, "correlation matrix does not match feature set");
  std::vector<std::string> kept_names;
  std::vector<Eigen::Index> kept_idx;
  for (Eigen::Index i = 0; i < corr.rows(); ++i) {
    bool drop = false;
    for (Eigen::Index j : kept_idx) {
      if (std::abs(corr(i, j)) > threshold) {
        drop = true;
        break;
      }
    }
    if (!drop) {
      kept_idx.push_back(i);
      kept_names.push_back(features.names[static_cast<std::size_t>(i)]);
    }
  }
  if (kept_names.size() == features.size()) return features;
  return FeatureSet::custom(std::move(kept_names));
}

Matrix impute_knn(const Matrix& rows, int k) {
  require(k >= 1, ErrorCode::invalid_config, "k must be >= 1");
  const Eigen::Index n = rows.rows();
  const Eigen::Index F = rows.cols();

  // Column means double as the fallback when a row shares no features with
  // any donor (an entirely-missing row, for example).
  std::vector<double> col_mean(static_cast<std::size_t>(F));
  for (Eigen::Index f = 0; f < F; ++f) {
    double sum = 0;
    Eigen::Index count = 0;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (std::isnan(rows(r, f))) continue;
      sum += rows(r, f);
      ++count;
    }
    require(count > 0, ErrorCode::no_eligible_neighbor,
            "feature column " + std::to_string(f) + " has no donor rows");
    col_mean[static_cast<std::size_t>(f)] = sum / static_cast<double>(count);
  }

  Matrix out = rows;
  std::vector<std::pair<double, Eigen::Index>> order;
  for (Eigen::Index r = 0; r < n; ++r) {
    bool has_missing = false;
    for (Eigen::Index f = 0; f < F && !has_missing; ++f)
      has_missing = std::isnan(rows(r, f));
    if (!has_missing) continue;

    // Distances to every comparable row over mutually present features,
    // scaled by the feature count so sparse overlaps do not look
    // artificially close.
    order.clear();
    for (Eigen::Index o = 0; o < n; ++o) {
      if (o == r) continue;
      double sum = 0;
      int common = 0;
      for (Eigen::Index f = 0; f < F; ++f) {
        const double a = rows(r, f), b = rows(o, f);
        if (std::isnan(a) || std::isnan(b)) continue;
        sum += (a - b) * (a - b);
        ++common;
      }
      if (common > 0) order.emplace_back(std::sqrt(sum / common), o);
    }
    std::sort(order.begin(), order.end());

    for (Eigen::Index f = 0; f < F; ++f) {
      if (!std::isnan(rows(r, f))) continue;
      double acc = 0;
      int used = 0;
      for (const auto& [d, o] : order) {
        if (std::isnan(rows(o, f))) continue;
        acc += rows(o, f);
        if (++used == k) break;
      }
      out(r, f) = used > 0 ? acc / used : col_mean[static_cast<std::size_t>(f)];
    }
  }
  return out;
}

std::vector<std::optional<double>> label_series(const NetworkTrace& trace, Task task) {
  std::vector<std::optional<double>> labels(trace.rows.size());
  for (std::size_t t = 0; t < trace.rows.size(); ++t) {
    switch (task) {
      case Task::loss:
        labels[t] = trace.rows[t].packet_loss_rate;
        break;
      case Task::latency:
        labels[t] = trace.rows[t].latency;
        break;
      case Task::handover: {
        if (t == 0) break;  // change is undefined for the first row
        const auto& prev = trace.rows[t - 1].serving_cell_id;
        const auto& cur = trace.rows[t].serving_cell_id;
        if (prev.has_value() && cur.has_value())
          labels[t] = (*prev != *cur) ? 1.0 : 0.0;
        break;
      }
    }
  }
  return labels;
}

WindowedSample SupervisedDataset::sample(std::size_t i) const {
  const SampleRef& ref = samples.at(i);
  const PreparedTrace& src = sources.at(static_cast<std::size_t>(ref.source));
  WindowedSample s;
  const Eigen::Index T = window_length;
  // Stored as F x time; the sample view is time x features.
  s.inputs = src.features.middleCols(ref.end_col - T + 1, T).transpose();
  s.label = ref.label;
  s.drive_id = src.drive_id;
  s.network_id = src.network_id;
  s.end_timestamp = src.t0 + ref.end_col;
  return s;
}

double SupervisedDataset::raw_label(std::size_t i) const {
  if (task == Task::handover) return samples.at(i).label;
  return denormalize_label(samples.at(i).label, normalization);
}

void SupervisedDataset::append(SupervisedDataset&& other) {
  require(other.task == task && other.window_length == window_length &&
              other.horizon == horizon && other.feature_set.names == feature_set.names,
          ErrorCode::shape_mismatch, "dataset shapes differ");
  const auto base = static_cast<std::int32_t>(sources.size());
  for (auto& src : other.sources) sources.push_back(std::move(src));
  for (auto ref : other.samples) {
    ref.source += base;
    samples.push_back(ref);
  }
  other.sources.clear();
  other.samples.clear();
}

SupervisedDataset make_windows(const NetworkTrace& trace, const std::string& drive_id,
                               const WindowConfig& config,
                               const NormalizationParams& params) {
  require(config.window_length >= 1 && config.horizon >= 1 && config.step >= 1,
          ErrorCode::invalid_config, "window, horizon and step must be positive");
  const int T = config.window_length;
  const int H = config.horizon;
  const auto duration = static_cast<int>(trace.rows.size());
  require(duration >= T + H, ErrorCode::trace_too_short,
          "trace needs at least " + std::to_string(T + H) + " rows, has " +
              std::to_string(duration));

  SupervisedDataset ds;
  ds.task = config.task;
  ds.feature_set = config.feature_set;
  ds.window_length = T;
  ds.horizon = H;
  ds.normalization = params;

  PreparedTrace src;
  src.drive_id = drive_id;
  src.network_id = trace.network_id;
  src.t0 = trace.rows.front().timestamp;
  src.features = feature_matrix(trace, config.feature_set).transpose();  // n x F
  apply_normalization_in_place(src.features, params);
  src.features = impute_knn(src.features, config.impute_k).transpose();  // back to F x n
  ds.sources.push_back(std::move(src));

  const auto labels = label_series(trace, config.task);
  for (int end = T - 1; end + H <= duration - 1; end += config.step) {
    const auto& label = labels[static_cast<std::size_t>(end + H)];
    if (!label.has_value()) continue;  // cannot supervise without a label
    SupervisedDataset::SampleRef ref;
    ref.source = 0;
    ref.end_col = end;
    ref.label = config.task == Task::handover ? *label : normalize_label(*label, params);
    ds.samples.push_back(ref);
  }
  return ds;
}

SupervisedDataset balance_undersample(const SupervisedDataset& dataset, std::uint64_t seed) {
  require(dataset.task == Task::handover, ErrorCode::wrong_task,
          "balancing applies to the handover task only");
  std::vector<std::size_t> positives, negatives;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i)
    (dataset.samples[i].label == 1.0 ? positives : negatives).push_back(i);
  require(!positives.empty(), ErrorCode::no_positives, "no positive samples");

  const std::size_t keep = std::min(negatives.size(), positives.size());
  Rng rng(seed);
  shuffle_in_place(negatives, rng);
  negatives.resize(keep);

  std::vector<bool> selected(dataset.samples.size(), false);
  for (std::size_t i : positives) selected[i] = true;
  for (std::size_t i : negatives) selected[i] = true;

  SupervisedDataset out;
  out.task = dataset.task;
  out.feature_set = dataset.feature_set;
  out.window_length = dataset.window_length;
  out.horizon = dataset.horizon;
  out.normalization = dataset.normalization;
  out.sources = dataset.sources;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i)
    if (selected[i]) out.samples.push_back(dataset.samples[i]);
  return out;
}

namespace {

json normalization_to_json(const NormalizationParams& p) {
  return json{{"x_min", p.x_min},
              {"x_max", p.x_max},
              {"degenerate", p.degenerate},
              {"y_min", p.y_min},
              {"y_max", p.y_max}};
}

NormalizationParams normalization_from_json(const json& j) {
  NormalizationParams p;
  p.x_min = j.at("x_min").get<std::vector<double>>();
  p.x_max = j.at("x_max").get<std::vector<double>>();
  p.degenerate = j.at("degenerate").get<std::vector<bool>>();
  p.y_min = j.at("y_min").get<double>();
  p.y_max = j.at("y_max").get<double>();
  return p;
}

constexpr char kDatasetMagic[4] = {'N', 'S', 'D', '1'};

}  // namespace

void save_dataset(const SupervisedDataset& dataset, const std::filesystem::path& path) {
  json header;
  header["task"] = task_name(dataset.task);
  header["feature_kind"] = feature_kind_name(dataset.feature_set.kind);
  header["feature_names"] = dataset.feature_set.names;
  header["window_length"] = dataset.window_length;
  header["horizon"] = dataset.horizon;
  header["normalization"] = normalization_to_json(dataset.normalization);
  header["sample_count"] = dataset.samples.size();
  const std::string head = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::io_failure, "cannot open " + path.string());
  out.write(kDatasetMagic, 4);
  const std::uint64_t hlen = head.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof hlen);
  out.write(head.data(), static_cast<std::streamsize>(head.size()));

  const Eigen::Index T = dataset.window_length;
  const auto F = static_cast<Eigen::Index>(dataset.feature_set.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const WindowedSample s = dataset.sample(i);
    const std::uint32_t drive_len = static_cast<std::uint32_t>(s.drive_id.size());
    out.write(reinterpret_cast<const char*>(&drive_len), sizeof drive_len);
    out.write(s.drive_id.data(), drive_len);
    const std::int32_t net = s.network_id;
    out.write(reinterpret_cast<const char*>(&net), sizeof net);
    const std::int64_t end_ts = s.end_timestamp;
    out.write(reinterpret_cast<const char*>(&end_ts), sizeof end_ts);
    out.write(reinterpret_cast<const char*>(&s.label), sizeof s.label);
    for (Eigen::Index r = 0; r < T; ++r)
      for (Eigen::Index c = 0; c < F; ++c) {
        const double v = s.inputs(r, c);
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
      }
  }
  require(out.good(), ErrorCode::io_failure, "write failed: " + path.string());
}

SupervisedDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io_failure, "cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  require(in.good() && std::memcmp(magic, kDatasetMagic, 4) == 0,
          ErrorCode::io_failure, "bad dataset magic in " + path.string());
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof hlen);
  std::string head(hlen, 0);
  in.read(head.data(), static_cast<std::streamsize>(hlen));
  require(in.good(), ErrorCode::io_failure, "truncated dataset header");
  const json header = json::parse(head);

  SupervisedDataset ds;
  ds.task = task_from_name(header.at("task").get<std::string>());
  const auto kind = feature_kind_from_name(header.at("feature_kind").get<std::string>());
  auto names = header.at("feature_names").get<std::vector<std::string>>();
  ds.feature_set = kind == FeatureKind::custom ? FeatureSet::custom(std::move(names))
                                               : FeatureSet::predefined(kind);
  ds.window_length = header.at("window_length").get<int>();
  ds.horizon = header.at("horizon").get<int>();
  ds.normalization = normalization_from_json(header.at("normalization"));
  const auto count = header.at("sample_count").get<std::uint64_t>();

  const Eigen::Index T = ds.window_length;
  const auto F = static_cast<Eigen::Index>(ds.feature_set.size());
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint32_t drive_len = 0;
    in.read(reinterpret_cast<char*>(&drive_len), sizeof drive_len);
    std::string drive(drive_len, 0);
    in.read(drive.data(), drive_len);
    std::int32_t net = 0;
    in.read(reinterpret_cast<char*>(&net), sizeof net);
    std::int64_t end_ts = 0;
    in.read(reinterpret_cast<char*>(&end_ts), sizeof end_ts);
    double label = 0;
    in.read(reinterpret_cast<char*>(&label), sizeof label);

    PreparedTrace src;
    src.drive_id = std::move(drive);
    src.network_id = net;
    src.t0 = end_ts - (T - 1);
    src.features.resize(F, T);
    for (Eigen::Index r = 0; r < T; ++r)
      for (Eigen::Index c = 0; c < F; ++c) {
        double v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        src.features(c, r) = v;
      }
    require(in.good(), ErrorCode::io_failure, "truncated dataset payload");

    SupervisedDataset::SampleRef ref;
    ref.source = static_cast<std::int32_t>(ds.sources.size());
    ref.end_col = static_cast<std::int32_t>(T - 1);
    ref.label = label;
    ds.sources.push_back(std::move(src));
    ds.samples.push_back(ref);
  }
  return ds;
}

}  // namespace netsel
