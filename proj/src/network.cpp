#include "netsel/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace netsel {

namespace {

constexpr std::size_t kMaxChunk = 128;  // bounds activation-cache memory

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

constexpr double kBceEps = 1e-12;

inline double clamp_prob(double p) { return std::clamp(p, kBceEps, 1.0 - kBceEps); }

// d(mean loss·B)/d(pre-activation output) for one sample.
double output_gradient(double pred, double label, LossKind kind, FinalActivation act) {
  double dldp = 0.0;
  switch (kind) {
    case LossKind::bce: {
      if (pred <= kBceEps || pred >= 1.0 - kBceEps) return 0.0;  // clamped region
      dldp = (pred - label) / (pred * (1.0 - pred));
      break;
    }
    case LossKind::mse:
      dldp = 2.0 * (pred - label);
      break;
    case LossKind::mae:
      dldp = pred > label ? 1.0 : (pred < label ? -1.0 : 0.0);
      break;
  }
  if (act == FinalActivation::sigmoid) dldp *= pred * (1.0 - pred);
  return dldp;
}

}  // namespace

void ModelArch::validate() const {
  require(input_features >= 1, ErrorCode::invalid_config, "input_features must be >= 1");
  require(kernel >= 1, ErrorCode::invalid_config, "kernel must be >= 1");
  for (int c : conv_channels)
    require(c >= 1, ErrorCode::invalid_config, "conv channels must be >= 1");
  require(lstm_hidden >= 1, ErrorCode::invalid_config, "lstm hidden must be >= 1");
  for (int f : fc_hidden)
    require(f >= 1, ErrorCode::invalid_config, "fc widths must be >= 1");
}

ModelParams ModelParams::zeros(const ModelArch& arch) {
  arch.validate();
  ModelParams p;
  p.arch = arch;
  int c_in = arch.input_features;
  for (int i = 0; i < 4; ++i) {
    const int c_out = arch.conv_channels[static_cast<std::size_t>(i)];
    ConvLayer layer;
    layer.w = Matrix::Zero(c_out, c_in * arch.kernel);
    layer.b = Matrix::Zero(c_out, 1);
    p.conv.push_back(std::move(layer));
    c_in = c_out;
  }
  const int h = arch.lstm_hidden;
  int d = c_in;
  for (int i = 0; i < 2; ++i) {
    LstmLayer layer;
    layer.wx = Matrix::Zero(4 * h, d);
    layer.wh = Matrix::Zero(4 * h, h);
    layer.b = Matrix::Zero(4 * h, 1);
    p.lstm.push_back(std::move(layer));
    d = h;
  }
  const std::array<int, 3> widths{arch.fc_hidden[0], arch.fc_hidden[1], 1};
  int in = h;
  for (int i = 0; i < 3; ++i) {
    FcLayer layer;
    layer.w = Matrix::Zero(widths[static_cast<std::size_t>(i)], in);
    layer.b = Matrix::Zero(widths[static_cast<std::size_t>(i)], 1);
    p.fc.push_back(std::move(layer));
    in = widths[static_cast<std::size_t>(i)];
  }
  return p;
}

ModelParams ModelParams::init(const ModelArch& arch, std::uint64_t seed) {
  ModelParams p = zeros(arch);
  Rng rng(seed);
  auto fill_uniform = [&](Matrix& m, int fan_in) {
    const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    double* data = m.data();
    for (Eigen::Index i = 0; i < m.size(); ++i) data[i] = rng.uniform(-s, s);
  };
  for (auto& layer : p.conv) fill_uniform(layer.w, static_cast<int>(layer.w.cols()));
  for (auto& layer : p.lstm) {
    fill_uniform(layer.wx, static_cast<int>(layer.wx.cols()));
    fill_uniform(layer.wh, static_cast<int>(layer.wh.cols()));
    // Open forget gates at the start of training.
    layer.b.block(arch.lstm_hidden, 0, arch.lstm_hidden, 1).setOnes();
  }
  for (auto& layer : p.fc) fill_uniform(layer.w, static_cast<int>(layer.w.cols()));
  return p;
}

std::vector<Matrix*> ModelParams::buffers() {
  std::vector<Matrix*> out;
  for (auto& l : conv) {
    out.push_back(&l.w);
    out.push_back(&l.b);
  }
  for (auto& l : lstm) {
    out.push_back(&l.wx);
    out.push_back(&l.wh);
    out.push_back(&l.b);
  }
  for (auto& l : fc) {
    out.push_back(&l.w);
    out.push_back(&l.b);
  }
  return out;
}

std::vector<const Matrix*> ModelParams::buffers() const {
  std::vector<const Matrix*> out;
  for (const auto& l : conv) {
    out.push_back(&l.w);
    out.push_back(&l.b);
  }
  for (const auto& l : lstm) {
    out.push_back(&l.wx);
    out.push_back(&l.wh);
    out.push_back(&l.b);
  }
  for (const auto& l : fc) {
    out.push_back(&l.w);
    out.push_back(&l.b);
  }
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const Matrix* m : buffers()) n += static_cast<std::size_t>(m->size());
  return n;
}

bool ModelParams::all_finite() const {
  for (const Matrix* m : buffers())
    if (!m->allFinite()) return false;
  return true;
}

bool ModelParams::same_shape(const ModelParams& other) const {
  const auto a = buffers();
  const auto b = other.buffers();
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i]->rows() != b[i]->rows() || a[i]->cols() != b[i]->cols()) return false;
  return true;
}

bool ModelParams::bitwise_equal(const ModelParams& other) const {
  if (!same_shape(other)) return false;
  const auto a = buffers();
  const auto b = other.buffers();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::memcmp(a[i]->data(), b[i]->data(),
                    sizeof(double) * static_cast<std::size_t>(a[i]->size())) != 0)
      return false;
  }
  return true;
}

// --- single-sample reference ops ---

Tensor conv1d_forward(const Tensor& input, const ConvLayer& layer, int kernel) {
  require(input.rank() == 2, ErrorCode::shape_mismatch, "conv input must be rank 2");
  const auto c_in = static_cast<Eigen::Index>(input.dim(0));
  const auto len = static_cast<Eigen::Index>(input.dim(1));
  require(layer.w.cols() == c_in * kernel, ErrorCode::shape_mismatch,
          "kernel width does not match input channels");
  require(len >= kernel, ErrorCode::shape_mismatch, "input shorter than kernel");
  const Eigen::Index c_out = layer.w.rows();
  const Eigen::Index out_len = len - kernel + 1;

  Tensor out({static_cast<std::size_t>(c_out), static_cast<std::size_t>(out_len)});
  for (Eigen::Index c = 0; c < c_out; ++c) {
    for (Eigen::Index p = 0; p < out_len; ++p) {
      double acc = layer.b(c, 0);
      for (int k = 0; k < kernel; ++k)
        for (Eigen::Index ci = 0; ci < c_in; ++ci)
          acc += layer.w(c, k * c_in + ci) *
                 input.at(static_cast<std::size_t>(ci), static_cast<std::size_t>(p + k));
      out.at(static_cast<std::size_t>(c), static_cast<std::size_t>(p)) = relu(acc);
    }
  }
  return out;
}

LstmResult lstm_forward(const Tensor& sequence, const LstmLayer& layer) {
  require(sequence.rank() == 2, ErrorCode::shape_mismatch, "lstm input must be rank 2");
  const auto steps = static_cast<Eigen::Index>(sequence.dim(0));
  const auto d = static_cast<Eigen::Index>(sequence.dim(1));
  const Eigen::Index h = layer.wh.cols();
  require(layer.wx.cols() == d && layer.wx.rows() == 4 * h && layer.wh.rows() == 4 * h &&
              layer.b.rows() == 4 * h,
          ErrorCode::shape_mismatch, "lstm weight shapes do not match input");

  LstmResult result;
  result.hidden_sequence =
      Tensor({static_cast<std::size_t>(steps), static_cast<std::size_t>(h)});
  Vector hidden = Vector::Zero(h);
  Vector cell = Vector::Zero(h);
  Vector x(d), g(4 * h);
  for (Eigen::Index t = 0; t < steps; ++t) {
    for (Eigen::Index j = 0; j < d; ++j)
      x(j) = sequence.at(static_cast<std::size_t>(t), static_cast<std::size_t>(j));
    g.noalias() = layer.wx * x;
    g.noalias() += layer.wh * hidden;
    g += layer.b.col(0);
    for (Eigen::Index j = 0; j < h; ++j) {
      const double gi = sigmoid(g(j));
      const double gf = sigmoid(g(h + j));
      const double gc = std::tanh(g(2 * h + j));
      const double go = sigmoid(g(3 * h + j));
      cell(j) = gf * cell(j) + gi * gc;
      hidden(j) = go * std::tanh(cell(j));
    }
    for (Eigen::Index j = 0; j < h; ++j)
      result.hidden_sequence.at(static_cast<std::size_t>(t), static_cast<std::size_t>(j)) =
          hidden(j);
  }
  result.final_hidden = hidden;
  result.final_cell = cell;
  return result;
}

double fc_head_forward(const Vector& hidden, const std::vector<FcLayer>& layers,
                       FinalActivation activation) {
  require(layers.size() == 3, ErrorCode::shape_mismatch, "head needs exactly 3 layers");
  require(layers[0].w.cols() == hidden.size(), ErrorCode::shape_mismatch,
          "head input width mismatch");
  Vector a = (layers[0].w * hidden + layers[0].b.col(0)).unaryExpr([](double v) { return relu(v); });
  require(layers[1].w.cols() == a.size(), ErrorCode::shape_mismatch, "fc2 width mismatch");
  a = (layers[1].w * a + layers[1].b.col(0)).unaryExpr([](double v) { return relu(v); });
  require(layers[2].w.cols() == a.size() && layers[2].w.rows() == 1,
          ErrorCode::shape_mismatch, "fc3 must map to a scalar");
  const double z = (layers[2].w * a)(0, 0) + layers[2].b(0, 0);
  return activation == FinalActivation::sigmoid ? sigmoid(z) : z;
}

double loss_value(double pred, double label, LossKind kind) {
  switch (kind) {
    case LossKind::bce: {
      require(label == 0.0 || label == 1.0, ErrorCode::invalid_label,
              "bce labels must be 0 or 1");
      const double p = clamp_prob(pred);
      return -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
    }
    case LossKind::mse: {
      const double d = pred - label;
      return d * d;
    }
    case LossKind::mae:
      return std::abs(pred - label);
  }
  return 0.0;
}

double loss_mean(std::span<const double> preds, std::span<const double> labels,
                 LossKind kind) {
  require(preds.size() == labels.size() && !preds.empty(), ErrorCode::length_mismatch,
          "prediction/label count mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) acc += loss_value(preds[i], labels[i], kind);
  return acc / static_cast<double>(preds.size());
}

double model_forward_reference(const ModelParams& params, const Matrix& window_fxt) {
  require(window_fxt.rows() == params.arch.input_features, ErrorCode::shape_mismatch,
          "window feature count mismatch");
  Tensor act = tensor_from_matrix(window_fxt);
  for (const auto& layer : params.conv) act = conv1d_forward(act, layer, params.arch.kernel);
  // Conv output (C x L) becomes the step-major sequence (L x C).
  Tensor seq = tensor_from_matrix(matrix_from_tensor(act).transpose());
  LstmResult r1 = lstm_forward(seq, params.lstm[0]);
  LstmResult r2 = lstm_forward(r1.hidden_sequence, params.lstm[1]);
  return fc_head_forward(r2.final_hidden, params.fc, params.arch.final_activation);
}

// --- batched fast path ---

namespace {

struct LstmCache {
  std::vector<Matrix> gates;      // per step, 4H x B post-activation [i;f;g;o]
  std::vector<Matrix> cell;       // C_t
  std::vector<Matrix> tanh_cell;  // tanh(C_t)
  std::vector<Matrix> hidden;     // H_t
};

struct BatchWork {
  // forward caches
  std::array<Matrix, 4> xcol;  // im2col per conv layer
  std::array<Matrix, 4> act;   // post-relu conv activations, C x (L*B)
  std::array<LstmCache, 2> lstm;
  Matrix head_a1, head_a2;
  Eigen::RowVectorXd logits, outputs;

  // backward scratch
  Matrix d_act;        // gradient flowing into a conv activation
  Matrix d_xcol;
  Matrix dh_carry, dc_carry, d_cell, d4;
  std::vector<Matrix> dx_seq;  // per-step gradient into the lstm input sequence

  std::array<int, 5> len{};  // sequence length entering each stage
};

void forward_chunk(const ModelParams& params, std::span<const WindowRef> windows,
                   int window_length, BatchWork& w) {
  const ModelArch& arch = params.arch;
  const auto B = static_cast<Eigen::Index>(windows.size());
  const int K = arch.kernel;
  require(window_length >= arch.min_window(), ErrorCode::shape_mismatch,
          "window " + std::to_string(window_length) + " too short for " +
              std::to_string(4 * (K - 1) + 1) + "-step receptive field");

  w.len[0] = window_length;
  for (int i = 0; i < 4; ++i) w.len[static_cast<std::size_t>(i + 1)] = w.len[static_cast<std::size_t>(i)] - (K - 1);

  for (const WindowRef& ref : windows) {
    require(ref.features != nullptr && ref.features->rows() == arch.input_features,
            ErrorCode::shape_mismatch, "window feature rows mismatch");
    require(ref.end_col >= window_length - 1 && ref.end_col < ref.features->cols(),
            ErrorCode::shape_mismatch, "window exceeds trace bounds");
  }

  // conv stack
  for (int layer = 0; layer < 4; ++layer) {
    const Eigen::Index c_in = params.conv[static_cast<std::size_t>(layer)].w.cols() / K;
    const int l_in = w.len[static_cast<std::size_t>(layer)];
    const int l_out = w.len[static_cast<std::size_t>(layer + 1)];
    Matrix& xcol = w.xcol[static_cast<std::size_t>(layer)];
    xcol.resize(c_in * K, static_cast<Eigen::Index>(l_out) * B);
    for (Eigen::Index b = 0; b < B; ++b) {
      for (int p = 0; p < l_out; ++p) {
        const Eigen::Index col = b * l_out + p;
        for (int k = 0; k < K; ++k) {
          if (layer == 0) {
            const WindowRef& ref = windows[static_cast<std::size_t>(b)];
            const Eigen::Index src = ref.end_col - window_length + 1 + p + k;
            xcol.col(col).segment(k * c_in, c_in) = ref.features->col(src);
          } else {
            const Matrix& prev = w.act[static_cast<std::size_t>(layer - 1)];
            xcol.col(col).segment(k * c_in, c_in) = prev.col(b * l_in + p + k);
          }
        }
      }
    }
    Matrix& act = w.act[static_cast<std::size_t>(layer)];
    act.noalias() = params.conv[static_cast<std::size_t>(layer)].w * xcol;
    act.colwise() += params.conv[static_cast<std::size_t>(layer)].b.col(0);
    act = act.cwiseMax(0.0);
  }

  // lstm stack
  const Eigen::Index H = arch.lstm_hidden;
  const int S = w.len[4];
  const Eigen::Index D0 = arch.conv_channels[3];
  for (int layer = 0; layer < 2; ++layer) {
    LstmCache& cache = w.lstm[static_cast<std::size_t>(layer)];
    cache.gates.assign(static_cast<std::size_t>(S), Matrix());
    cache.cell.assign(static_cast<std::size_t>(S), Matrix());
    cache.tanh_cell.assign(static_cast<std::size_t>(S), Matrix());
    cache.hidden.assign(static_cast<std::size_t>(S), Matrix());
    const LstmLayer& lp = params.lstm[static_cast<std::size_t>(layer)];
    Matrix h_prev = Matrix::Zero(H, B);
    Matrix c_prev = Matrix::Zero(H, B);
    for (int t = 0; t < S; ++t) {
      Matrix& g = cache.gates[static_cast<std::size_t>(t)];
      if (layer == 0) {
        Eigen::Map<const Matrix, 0, Eigen::OuterStride<>> x_t(
            w.act[3].data() + static_cast<Eigen::Index>(t) * D0, D0, B,
            Eigen::OuterStride<>(static_cast<Eigen::Index>(S) * D0));
        g.noalias() = lp.wx * x_t;
      } else {
        g.noalias() = lp.wx * w.lstm[0].hidden[static_cast<std::size_t>(t)];
      }
      g.noalias() += lp.wh * h_prev;
      g.colwise() += lp.b.col(0);
      g.topRows(2 * H) = g.topRows(2 * H).unaryExpr([](double v) { return sigmoid(v); });
      g.middleRows(2 * H, H) = g.middleRows(2 * H, H).array().tanh();
      g.bottomRows(H) = g.bottomRows(H).unaryExpr([](double v) { return sigmoid(v); });

      Matrix& cell = cache.cell[static_cast<std::size_t>(t)];
      cell = g.middleRows(H, H).cwiseProduct(c_prev) +
             g.topRows(H).cwiseProduct(g.middleRows(2 * H, H));
      Matrix& tc = cache.tanh_cell[static_cast<std::size_t>(t)];
      tc = cell.array().tanh();
      Matrix& hidden = cache.hidden[static_cast<std::size_t>(t)];
      hidden = g.bottomRows(H).cwiseProduct(tc);
      h_prev = hidden;
      c_prev = cell;
    }
  }

  // head
  const Matrix& h_final = w.lstm[1].hidden[static_cast<std::size_t>(S - 1)];
  w.head_a1.noalias() = params.fc[0].w * h_final;
  w.head_a1.colwise() += params.fc[0].b.col(0);
  w.head_a1 = w.head_a1.cwiseMax(0.0);
  w.head_a2.noalias() = params.fc[1].w * w.head_a1;
  w.head_a2.colwise() += params.fc[1].b.col(0);
  w.head_a2 = w.head_a2.cwiseMax(0.0);
  w.logits.noalias() = (params.fc[2].w * w.head_a2).row(0);
  w.logits.array() += params.fc[2].b(0, 0);
  if (arch.final_activation == FinalActivation::sigmoid)
    w.outputs = w.logits.unaryExpr([](double v) { return sigmoid(v); });
  else
    w.outputs = w.logits;
}

void backward_chunk(const ModelParams& params, std::span<const WindowRef> windows,
                    std::span<const double> labels, LossKind kind, BatchWork& w,
                    GradientSet& grads, double& loss_sum) {
  const ModelArch& arch = params.arch;
  const auto B = static_cast<Eigen::Index>(windows.size());
  const Eigen::Index H = arch.lstm_hidden;
  const int S = w.len[4];
  const int K = arch.kernel;

  // output gradient (per-sample sums; caller divides by the batch size)
  Eigen::RowVectorXd dlogit(B);
  for (Eigen::Index b = 0; b < B; ++b) {
    const double pred = w.outputs(b);
    const double label = labels[static_cast<std::size_t>(b)];
    loss_sum += loss_value(pred, label, kind);
    dlogit(b) = output_gradient(pred, label, kind, arch.final_activation);
  }

  // head
  const Matrix& h_final = w.lstm[1].hidden[static_cast<std::size_t>(S - 1)];
  grads.fc[2].w.noalias() += dlogit * w.head_a2.transpose();
  grads.fc[2].b(0, 0) += dlogit.sum();
  Matrix da2 = params.fc[2].w.transpose() * dlogit;
  da2 = da2.cwiseProduct((w.head_a2.array() > 0.0).cast<double>().matrix());
  grads.fc[1].w.noalias() += da2 * w.head_a1.transpose();
  grads.fc[1].b.col(0) += da2.rowwise().sum();
  Matrix da1 = params.fc[1].w.transpose() * da2;
  da1 = da1.cwiseProduct((w.head_a1.array() > 0.0).cast<double>().matrix());
  grads.fc[0].w.noalias() += da1 * h_final.transpose();
  grads.fc[0].b.col(0) += da1.rowwise().sum();
  Matrix dh_final = params.fc[0].w.transpose() * da1;  // H x B

  // lstm layers, top down
  const Eigen::Index D0 = arch.conv_channels[3];
  w.dx_seq.assign(static_cast<std::size_t>(S), Matrix());
  for (int layer = 1; layer >= 0; --layer) {
    const LstmCache& cache = w.lstm[static_cast<std::size_t>(layer)];
    const LstmLayer& lp = params.lstm[static_cast<std::size_t>(layer)];
    LstmLayer& lg = grads.lstm[static_cast<std::size_t>(layer)];
    w.dh_carry = Matrix::Zero(H, B);
    w.dc_carry = Matrix::Zero(H, B);
    if (layer == 0) w.d_act = Matrix::Zero(D0, static_cast<Eigen::Index>(S) * B);

    for (int t = S - 1; t >= 0; --t) {
      Matrix dh = w.dh_carry;
      if (layer == 1) {
        if (t == S - 1) dh += dh_final;
      } else {
        dh += w.dx_seq[static_cast<std::size_t>(t)];
      }
      const Matrix& g = cache.gates[static_cast<std::size_t>(t)];
      const auto gi = g.topRows(H);
      const auto gf = g.middleRows(H, H);
      const auto gc = g.middleRows(2 * H, H);
      const auto go = g.bottomRows(H);
      const Matrix& tc = cache.tanh_cell[static_cast<std::size_t>(t)];

      Matrix d_o = dh.cwiseProduct(tc);
      w.d_cell = w.dc_carry +
                 dh.cwiseProduct(go).cwiseProduct(
                     (1.0 - tc.array().square()).matrix());
      Matrix d_i = w.d_cell.cwiseProduct(gc);
      Matrix d_g = w.d_cell.cwiseProduct(gi);
      w.d4.resize(4 * H, B);
      w.d4.topRows(H) = d_i.cwiseProduct(gi).cwiseProduct((1.0 - gi.array()).matrix());
      if (t > 0) {
        const Matrix& c_prev = cache.cell[static_cast<std::size_t>(t - 1)];
        Matrix d_f = w.d_cell.cwiseProduct(c_prev);
        w.d4.middleRows(H, H) =
            d_f.cwiseProduct(gf).cwiseProduct((1.0 - gf.array()).matrix());
      } else {
        w.d4.middleRows(H, H).setZero();  // C_{-1} == 0 kills the forget path
      }
      w.d4.middleRows(2 * H, H) = d_g.cwiseProduct((1.0 - gc.array().square()).matrix());
      w.d4.bottomRows(H) = d_o.cwiseProduct(go).cwiseProduct((1.0 - go.array()).matrix());

      w.dc_carry = w.d_cell.cwiseProduct(gf);

      if (layer == 0) {
        Eigen::Map<const Matrix, 0, Eigen::OuterStride<>> x_t(
            w.act[3].data() + static_cast<Eigen::Index>(t) * D0, D0, B,
            Eigen::OuterStride<>(static_cast<Eigen::Index>(S) * D0));
        lg.wx.noalias() += w.d4 * x_t.transpose();
        Eigen::Map<Matrix, 0, Eigen::OuterStride<>> dx_t(
            w.d_act.data() + static_cast<Eigen::Index>(t) * D0, D0, B,
            Eigen::OuterStride<>(static_cast<Eigen::Index>(S) * D0));
        dx_t.noalias() += lp.wx.transpose() * w.d4;
      } else {
        lg.wx.noalias() += w.d4 * w.lstm[0].hidden[static_cast<std::size_t>(t)].transpose();
        w.dx_seq[static_cast<std::size_t>(t)].noalias() = lp.wx.transpose() * w.d4;
      }
      if (t > 0)
        lg.wh.noalias() += w.d4 * cache.hidden[static_cast<std::size_t>(t - 1)].transpose();
      lg.b.col(0) += w.d4.rowwise().sum();
      w.dh_carry.noalias() = lp.wh.transpose() * w.d4;
    }
  }

  // conv stack, top down; w.d_act currently holds the gradient into act[3]
  for (int layer = 3; layer >= 0; --layer) {
    const Matrix& act = w.act[static_cast<std::size_t>(layer)];
    Matrix dz = w.d_act.cwiseProduct((act.array() > 0.0).cast<double>().matrix());
    ConvLayer& cg = grads.conv[static_cast<std::size_t>(layer)];
    cg.w.noalias() += dz * w.xcol[static_cast<std::size_t>(layer)].transpose();
    cg.b.col(0) += dz.rowwise().sum();
    if (layer == 0) break;  // inputs are data, no gradient needed

    const Eigen::Index c_in = params.conv[static_cast<std::size_t>(layer)].w.cols() / K;
    const int l_in = w.len[static_cast<std::size_t>(layer)];
    const int l_out = w.len[static_cast<std::size_t>(layer + 1)];
    w.d_xcol.noalias() = params.conv[static_cast<std::size_t>(layer)].w.transpose() * dz;
    w.d_act = Matrix::Zero(c_in, static_cast<Eigen::Index>(l_in) * B);
    for (Eigen::Index b = 0; b < B; ++b)
      for (int p = 0; p < l_out; ++p)
        for (int k = 0; k < K; ++k)
          w.d_act.col(b * l_in + p + k) +=
              w.d_xcol.col(b * l_out + p).segment(k * c_in, c_in);
  }
}

}  // namespace

std::vector<double> model_forward_batch(const ModelParams& params,
                                        std::span<const WindowRef> windows,
                                        int window_length,
                                        std::uint64_t* relu_mask_hash) {
  std::vector<double> out;
  out.reserve(windows.size());
  BatchWork work;
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::size_t at = 0; at < windows.size(); at += kMaxChunk) {
    const std::size_t n = std::min(kMaxChunk, windows.size() - at);
    forward_chunk(params, windows.subspan(at, n), window_length, work);
    for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(n); ++b)
      out.push_back(work.outputs(b));
    if (relu_mask_hash != nullptr) {
      auto fold = [&hash](const Matrix& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) {
          hash ^= m.data()[i] > 0.0 ? 0x9e37ULL : 0x79b9ULL;
          hash *= 0x100000001b3ULL;
        }
      };
      for (const auto& act : work.act) fold(act);
      fold(work.head_a1);
      fold(work.head_a2);
    }
  }
  if (relu_mask_hash != nullptr) *relu_mask_hash = hash;
  return out;
}

double model_forward_single(const ModelParams& params, const Matrix& window_fxt) {
  const WindowRef ref{&window_fxt, static_cast<int>(window_fxt.cols() - 1)};
  return model_forward_batch(params, std::span<const WindowRef>(&ref, 1),
                             static_cast<int>(window_fxt.cols()))[0];
}

void model_backward_sum(const ModelParams& params, std::span<const WindowRef> windows,
                        int window_length, std::span<const double> labels, LossKind kind,
                        GradientSet& grad_accum, double& loss_sum) {
  require(windows.size() == labels.size(), ErrorCode::length_mismatch,
          "window/label count mismatch");
  require(!windows.empty(), ErrorCode::empty_list, "empty batch");
  require(grad_accum.same_shape(params), ErrorCode::shape_mismatch,
          "gradient accumulator shape mismatch");
  BatchWork work;
  for (std::size_t at = 0; at < windows.size(); at += kMaxChunk) {
    const std::size_t n = std::min(kMaxChunk, windows.size() - at);
    forward_chunk(params, windows.subspan(at, n), window_length, work);
    backward_chunk(params, windows.subspan(at, n), labels.subspan(at, n), kind, work,
                   grad_accum, loss_sum);
  }
}

GradientSet model_backward(const ModelParams& params, std::span<const WindowRef> windows,
                           int window_length, std::span<const double> labels,
                           LossKind kind, double* mean_loss) {
  GradientSet grads = ModelParams::zeros(params.arch);
  double loss_sum = 0.0;
  model_backward_sum(params, windows, window_length, labels, kind, grads, loss_sum);
  const double scale = 1.0 / static_cast<double>(windows.size());
  for (Matrix* m : grads.buffers()) *m *= scale;
  require(grads.all_finite(), ErrorCode::non_finite_gradient,
          "gradient contains NaN or Inf");
  if (mean_loss != nullptr) *mean_loss = loss_sum * scale;
  return grads;
}

OptimizerState OptimizerState::create(const OptimizerConfig& config, const ModelArch& arch) {
  OptimizerState s;
  s.config = config;
  if (config.kind == OptimizerKind::adam) {
    s.m = ModelParams::zeros(arch);
    s.v = ModelParams::zeros(arch);
  }
  return s;
}

void optimizer_step(ModelParams& params, const GradientSet& grads, OptimizerState& state) {
  require(params.same_shape(grads), ErrorCode::shape_mismatch,
          "gradient shape does not match parameters");
  const OptimizerConfig& c = state.config;
  state.step_count += 1;
  if (c.kind == OptimizerKind::sgd) {
    auto p = params.buffers();
    auto g = grads.buffers();
    for (std::size_t i = 0; i < p.size(); ++i) *p[i] -= c.learning_rate * (*g[i]);
    return;
  }
  require(state.m.same_shape(params) && state.v.same_shape(params),
          ErrorCode::shape_mismatch, "optimizer state shape mismatch");
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step_count));
  auto p = params.buffers();
  auto g = grads.buffers();
  auto m = state.m.buffers();
  auto v = state.v.buffers();
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i]->array() = c.beta1 * m[i]->array() + (1.0 - c.beta1) * g[i]->array();
    v[i]->array() = c.beta2 * v[i]->array() + (1.0 - c.beta2) * g[i]->array().square();
    p[i]->array() -=
        c.learning_rate * (m[i]->array() / bc1) / ((v[i]->array() / bc2).sqrt() + c.epsilon);
  }
}

GradientSet average_gradients(std::span<const GradientSet> sets) {
  require(!sets.empty(), ErrorCode::empty_list, "no gradient sets to average");
  for (const GradientSet& s : sets)
    require(s.same_shape(sets.front()), ErrorCode::shape_mismatch,
            "gradient set shapes differ");

  bool all_equal = true;
  for (std::size_t i = 1; i < sets.size() && all_equal; ++i)
    all_equal = sets[i].bitwise_equal(sets.front());
  if (all_equal) return sets.front();

  GradientSet out = sets.front();
  auto acc = out.buffers();
  for (std::size_t i = 1; i < sets.size(); ++i) {
    auto add = sets[i].buffers();
    for (std::size_t b = 0; b < acc.size(); ++b) *acc[b] += *add[b];
  }
  const double inv = 1.0 / static_cast<double>(sets.size());
  for (Matrix* m : acc) *m *= inv;
  return out;
}

}  // namespace netsel
