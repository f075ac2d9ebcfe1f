#include "secgate/vet/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "secgate/core/error.hpp"
#include "secgate/core/rng.hpp"
#include "secgate/core/text.hpp"

namespace secgate::vet {

using nlohmann::json;

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kEmbedInitStd = 0.1;
constexpr double kBodyInitStd = 0.02;
constexpr double kProjectInitStd = 0.02;
constexpr double kPositionScale = 0.1;
constexpr double kResizeNoiseStd = 0.01;

// y[n x m] = x[n x k] * W[k x m]. Rows go in groups of four so each weight
// row is loaded once per group.
void matmul(const double* x, const float* w, double* y, std::size_t n, std::size_t k,
            std::size_t m) {
  thread_local std::vector<double> wd;
  wd.assign(w, w + k * m);
  std::fill(y, y + n * m, 0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    double* y0 = y + i * m;
    double* y1 = y0 + m;
    double* y2 = y1 + m;
    double* y3 = y2 + m;
    for (std::size_t p = 0; p < k; ++p) {
      const double a0 = x[i * k + p], a1 = x[(i + 1) * k + p];
      const double a2 = x[(i + 2) * k + p], a3 = x[(i + 3) * k + p];
      const double* wr = wd.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) {
        const double wv = wr[j];
        y0[j] += a0 * wv;
        y1[j] += a1 * wv;
        y2[j] += a2 * wv;
        y3[j] += a3 * wv;
      }
    }
  }
  for (; i < n; ++i) {
    double* yi = y + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double xv = x[i * k + p];
      const double* wr = wd.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) yi[j] += xv * wr[j];
    }
  }
}

// dx[n x k] += dy[n x m] * W^T, W is k x m. Same kernel shape as matmul on
// the transposed weights.
void matmul_wt_acc(const double* dy, const float* w, double* dx, std::size_t n,
                   std::size_t k, std::size_t m) {
  thread_local std::vector<double> wt;
  wt.resize(m * k);
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t j = 0; j < m; ++j) wt[j * k + p] = w[p * m + j];
  }
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    double* x0 = dx + i * k;
    double* x1 = x0 + k;
    double* x2 = x1 + k;
    double* x3 = x2 + k;
    for (std::size_t j = 0; j < m; ++j) {
      const double g0 = dy[i * m + j], g1 = dy[(i + 1) * m + j];
      const double g2 = dy[(i + 2) * m + j], g3 = dy[(i + 3) * m + j];
      const double* row = wt.data() + j * k;
      for (std::size_t p = 0; p < k; ++p) {
        const double wv = row[p];
        x0[p] += g0 * wv;
        x1[p] += g1 * wv;
        x2[p] += g2 * wv;
        x3[p] += g3 * wv;
      }
    }
  }
  for (; i < n; ++i) {
    double* dxi = dx + i * k;
    for (std::size_t j = 0; j < m; ++j) {
      const double g = dy[i * m + j];
      const double* row = wt.data() + j * k;
      for (std::size_t p = 0; p < k; ++p) dxi[p] += g * row[p];
    }
  }
}

void layer_norm(const double* x, const float* gain, const float* bias, double* y,
                double* xhat, double* rstd, std::size_t n, std::size_t d) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x + i * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += xi[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (xi[j] - mean) * (xi[j] - mean);
    var /= static_cast<double>(d);
    const double r = 1.0 / std::sqrt(var + kLnEps);
    rstd[i] = r;
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (xi[j] - mean) * r;
      xhat[i * d + j] = h;
      y[i * d + j] = gain[j] * h + bias[j];
    }
  }
}

// dx += LN'(dy); gain and bias are frozen so only the input gradient is formed.
void layer_norm_backward_acc(const double* dy, const float* gain, const double* xhat,
                             const double* rstd, double* dx, std::size_t n, std::size_t d) {
  const double inv_d = 1.0 / static_cast<double>(d);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0, sum_h = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double g = dy[i * d + j] * gain[j];
      sum += g;
      sum_h += g * xhat[i * d + j];
    }
    for (std::size_t j = 0; j < d; ++j) {
      const double g = dy[i * d + j] * gain[j];
      dx[i * d + j] += rstd[i] * (g - sum * inv_d - xhat[i * d + j] * sum_h * inv_d);
    }
  }
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)

double gelu(double x) {
  return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + 0.044715 * x * x * x)));
}

double gelu_grad(double x) {
  const double u = kGeluC * (x + 0.044715 * x * x * x);
  const double t = std::tanh(u);
  const double du = kGeluC * (1.0 + 3.0 * 0.044715 * x * x);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

double position_code(std::size_t t, std::size_t i, std::size_t d) {
  const double rate =
      std::pow(10000.0, -static_cast<double>(i - i % 2) / static_cast<double>(d));
  const double angle = static_cast<double>(t) * rate;
  return kPositionScale * (i % 2 == 0 ? std::sin(angle) : std::cos(angle));
}

void fill_normal(std::vector<float>& v, std::size_t offset, std::size_t count, Rng& rng,
                 double stddev) {
  for (std::size_t i = 0; i < count; ++i) {
    v[offset + i] = static_cast<float>(rng.normal(0.0, stddev));
  }
}

FrozenBody make_body_layout(const ModelDims& dims) {
  FrozenBody body;
  const std::size_t d = dims.width, f = 4 * dims.width;
  std::size_t off = 0;
  const auto take = [&](std::size_t n) {
    const auto o = off;
    off += n;
    return o;
  };
  for (std::size_t b = 0; b < dims.blocks; ++b) {
    BlockLayout l{};
    l.ln1_gain = take(d);
    l.ln1_bias = take(d);
    l.wq = take(d * d);
    l.wk = take(d * d);
    l.wv = take(d * d);
    l.wo = take(d * d);
    l.ln2_gain = take(d);
    l.ln2_bias = take(d);
    l.w1 = take(d * f);
    l.b1 = take(f);
    l.w2 = take(f * d);
    l.b2 = take(d);
    body.layout.push_back(l);
  }
  body.lnf_gain = take(d);
  body.lnf_bias = take(d);
  body.params.assign(off, 0.0f);
  return body;
}

void append_le(std::string& out, const std::vector<float>& v) {
  const std::size_t start = out.size();
  out.resize(start + v.size() * 4);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data() + start, v.data(), v.size() * 4);
  } else {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto u = std::bit_cast<std::uint32_t>(v[i]);
      for (int b = 0; b < 4; ++b) out[start + i * 4 + b] = static_cast<char>((u >> (8 * b)) & 0xFF);
    }
  }
}

std::string digest_of(const std::vector<float>& v) {
  std::string bytes;
  append_le(bytes, v);
  return text::sha256_hex(bytes.data(), bytes.size());
}

std::vector<float> read_le(const std::string& bytes, std::size_t offset, std::size_t count) {
  std::vector<float> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) {
      u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i * 4 + b]))
           << (8 * b);
    }
    v[i] = std::bit_cast<float>(u);
  }
  return v;
}

}  // namespace

std::string FrozenBody::digest() const { return digest_of(params); }

struct VetModel::Workspace {
  struct Block {
    std::vector<double> x_in, a, xhat1, rstd1, q, k, v, p, o, x_mid, m, xhat2, rstd2, h;
  };
  std::vector<Block> blocks;
  std::vector<double> x_out, xf, xhatf, rstdf, logits;
};

VetModel VetModel::init(const ModelDims& dims, std::uint64_t seed) {
  if (dims.vocab == 0 || dims.width == 0 || dims.context == 0) {
    throw Error(ErrorCode::InvalidArgument, "model dimensions must be positive");
  }
  VetModel m;
  m.dims_ = dims;
  Rng rng(seed);
  const std::size_t d = dims.width, f = 4 * dims.width;

  m.embed_.assign(dims.vocab * d, 0.0f);
  fill_normal(m.embed_, 0, m.embed_.size(), rng, kEmbedInitStd);

  m.body_ = make_body_layout(dims);
  auto& p = m.body_.params;
  for (const auto& l : m.body_.layout) {
    std::fill_n(p.begin() + l.ln1_gain, d, 1.0f);
    std::fill_n(p.begin() + l.ln2_gain, d, 1.0f);
    fill_normal(p, l.wq, d * d, rng, kBodyInitStd);
    fill_normal(p, l.wk, d * d, rng, kBodyInitStd);
    fill_normal(p, l.wv, d * d, rng, kBodyInitStd);
    fill_normal(p, l.wo, d * d, rng, kBodyInitStd);
    fill_normal(p, l.w1, d * f, rng, kBodyInitStd);
    fill_normal(p, l.w2, f * d, rng, kBodyInitStd);
  }
  std::fill_n(p.begin() + m.body_.lnf_gain, d, 1.0f);

  m.project_.assign(d * dims.vocab, 0.0f);
  fill_normal(m.project_, 0, m.project_.size(), rng, kProjectInitStd);
  return m;
}

std::vector<ParamInfo> VetModel::parameters() const {
  return {{"embed", embed_.size(), true},
          {"body", body_.params.size(), false},
          {"project", project_.size(), true}};
}

std::size_t VetModel::total_parameters() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.count;
  return n;
}

std::size_t VetModel::trainable_parameters() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.trainable ? p.count : 0;
  return n;
}

void VetModel::check_batch(const std::vector<std::vector<TokenId>>& batch) const {
  if (batch.empty()) throw Error(ErrorCode::InvalidArgument, "empty batch");
  for (const auto& seq : batch) {
    if (seq.size() < 2 || seq.size() > dims_.context + 1) {
      throw Error(ErrorCode::InvalidArgument, "sequence length must be in [2, C+1]");
    }
    for (auto id : seq) {
      if (id < 0 || static_cast<std::size_t>(id) >= dims_.vocab) {
        throw Error(ErrorCode::OutOfRange, "token id outside the model vocabulary");
      }
    }
  }
}

double VetModel::run(const std::vector<TokenId>& seq, Gradients* grads, double scale,
                     Workspace& ws) const {
  const std::size_t T = seq.size() - 1;
  const std::size_t d = dims_.width, f = 4 * d, V = dims_.vocab;
  const float* P = body_.params.data();
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(d));

  ws.blocks.resize(dims_.blocks);
  std::vector<double> x(T * d);
  for (std::size_t t = 0; t < T; ++t) {
    const float* e = embed_.data() + static_cast<std::size_t>(seq[t]) * d;
    for (std::size_t i = 0; i < d; ++i) x[t * d + i] = e[i] + position_code(t, i, d);
  }

  for (std::size_t b = 0; b < dims_.blocks; ++b) {
    const auto& l = body_.layout[b];
    auto& c = ws.blocks[b];
    c.x_in = x;
    c.a.resize(T * d);
    c.xhat1.resize(T * d);
    c.rstd1.resize(T);
    layer_norm(x.data(), P + l.ln1_gain, P + l.ln1_bias, c.a.data(), c.xhat1.data(),
               c.rstd1.data(), T, d);
    c.q.resize(T * d);
    c.k.resize(T * d);
    c.v.resize(T * d);
    matmul(c.a.data(), P + l.wq, c.q.data(), T, d, d);
    matmul(c.a.data(), P + l.wk, c.k.data(), T, d, d);
    matmul(c.a.data(), P + l.wv, c.v.data(), T, d, d);

    c.p.assign(T * T, 0.0);
    c.o.assign(T * d, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      double mx = -INFINITY;
      for (std::size_t s = 0; s <= t; ++s) {
        double dot = 0.0;
        for (std::size_t i = 0; i < d; ++i) dot += c.q[t * d + i] * c.k[s * d + i];
        c.p[t * T + s] = dot * att_scale;
        mx = std::max(mx, c.p[t * T + s]);
      }
      double z = 0.0;
      for (std::size_t s = 0; s <= t; ++s) {
        c.p[t * T + s] = std::exp(c.p[t * T + s] - mx);
        z += c.p[t * T + s];
      }
      for (std::size_t s = 0; s <= t; ++s) {
        c.p[t * T + s] /= z;
        const double w = c.p[t * T + s];
        for (std::size_t i = 0; i < d; ++i) c.o[t * d + i] += w * c.v[s * d + i];
      }
    }
    std::vector<double> attn(T * d);
    matmul(c.o.data(), P + l.wo, attn.data(), T, d, d);
    for (std::size_t i = 0; i < T * d; ++i) x[i] += attn[i];
    c.x_mid = x;

    c.m.resize(T * d);
    c.xhat2.resize(T * d);
    c.rstd2.resize(T);
    layer_norm(x.data(), P + l.ln2_gain, P + l.ln2_bias, c.m.data(), c.xhat2.data(),
               c.rstd2.data(), T, d);
    c.h.resize(T * f);
    matmul(c.m.data(), P + l.w1, c.h.data(), T, d, f);
    std::vector<double> g(T * f);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t j = 0; j < f; ++j) {
        c.h[t * f + j] += P[l.b1 + j];
        g[t * f + j] = gelu(c.h[t * f + j]);
      }
    }
    std::vector<double> mlp(T * d);
    matmul(g.data(), P + l.w2, mlp.data(), T, f, d);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t i = 0; i < d; ++i) x[t * d + i] += mlp[t * d + i] + P[l.b2 + i];
    }
  }

  ws.xf.resize(T * d);
  ws.xhatf.resize(T * d);
  ws.rstdf.resize(T);
  layer_norm(x.data(), P + body_.lnf_gain, P + body_.lnf_bias, ws.xf.data(), ws.xhatf.data(),
             ws.rstdf.data(), T, d);
  ws.logits.resize(T * V);
  matmul(ws.xf.data(), project_.data(), ws.logits.data(), T, d, V);

  double nll = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    double* lg = ws.logits.data() + t * V;
    double mx = lg[0];
    for (std::size_t j = 1; j < V; ++j) mx = std::max(mx, lg[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < V; ++j) z += std::exp(lg[j] - mx);
    const double log_z = mx + std::log(z);
    const auto target = static_cast<std::size_t>(seq[t + 1]);
    nll += log_z - lg[target];
    if (grads != nullptr) {
      // logits row becomes dL/dlogits in place
      for (std::size_t j = 0; j < V; ++j) lg[j] = std::exp(lg[j] - log_z) * scale;
      lg[target] -= scale;
    }
  }
  if (grads == nullptr) return nll;

  // projection gradient and back into the residual stream
  const double* dlogits = ws.logits.data();
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < d; ++i) {
      const double xv = ws.xf[t * d + i];
      double* row = grads->project.data() + i * V;
      for (std::size_t j = 0; j < V; ++j) row[j] += xv * dlogits[t * V + j];
    }
  }
  std::vector<double> dxf(T * d, 0.0);
  matmul_wt_acc(dlogits, project_.data(), dxf.data(), T, d, V);
  std::vector<double> dx(T * d, 0.0);
  layer_norm_backward_acc(dxf.data(), P + body_.lnf_gain, ws.xhatf.data(), ws.rstdf.data(),
                          dx.data(), T, d);

  for (std::size_t bi = dims_.blocks; bi-- > 0;) {
    const auto& l = body_.layout[bi];
    const auto& c = ws.blocks[bi];

    // MLP sublayer: x_out = x_mid + gelu(LN2(x_mid) W1 + b1) W2 + b2
    std::vector<double> dg(T * f, 0.0);
    matmul_wt_acc(dx.data(), P + l.w2, dg.data(), T, f, d);
    for (std::size_t i = 0; i < T * f; ++i) dg[i] *= gelu_grad(c.h[i]);
    std::vector<double> dm(T * d, 0.0);
    matmul_wt_acc(dg.data(), P + l.w1, dm.data(), T, d, f);
    layer_norm_backward_acc(dm.data(), P + l.ln2_gain, c.xhat2.data(), c.rstd2.data(),
                            dx.data(), T, d);

    // attention sublayer: x_mid = x_in + softmax(q k^T / sqrt(d)) v Wo
    std::vector<double> d_o(T * d, 0.0);
    matmul_wt_acc(dx.data(), P + l.wo, d_o.data(), T, d, d);
    std::vector<double> dq(T * d, 0.0), dk(T * d, 0.0), dv(T * d, 0.0);
    std::vector<double> dp(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      double weighted = 0.0;
      for (std::size_t s = 0; s <= t; ++s) {
        double dot = 0.0;
        for (std::size_t i = 0; i < d; ++i) dot += d_o[t * d + i] * c.v[s * d + i];
        dp[s] = dot;
        weighted += dot * c.p[t * T + s];
      }
      for (std::size_t s = 0; s <= t; ++s) {
        const double w = c.p[t * T + s];
        const double ds = w * (dp[s] - weighted) * att_scale;
        for (std::size_t i = 0; i < d; ++i) {
          dq[t * d + i] += ds * c.k[s * d + i];
          dk[s * d + i] += ds * c.q[t * d + i];
          dv[s * d + i] += w * d_o[t * d + i];
        }
      }
    }
    std::vector<double> da(T * d, 0.0);
    matmul_wt_acc(dq.data(), P + l.wq, da.data(), T, d, d);
    matmul_wt_acc(dk.data(), P + l.wk, da.data(), T, d, d);
    matmul_wt_acc(dv.data(), P + l.wv, da.data(), T, d, d);
    layer_norm_backward_acc(da.data(), P + l.ln1_gain, c.xhat1.data(), c.rstd1.data(),
                            dx.data(), T, d);
  }

  for (std::size_t t = 0; t < T; ++t) {
    double* row = grads->embed.data() + static_cast<std::size_t>(seq[t]) * d;
    for (std::size_t i = 0; i < d; ++i) row[i] += dx[t * d + i];
  }
  return nll;
}

double VetModel::loss(const std::vector<std::vector<TokenId>>& batch) const {
  check_batch(batch);
  Workspace ws;
  double total = 0.0;
  std::size_t positions = 0;
  for (const auto& seq : batch) {
    total += run(seq, nullptr, 0.0, ws);
    positions += seq.size() - 1;
  }
  return total / static_cast<double>(positions);
}

double VetModel::loss_and_grads(const std::vector<std::vector<TokenId>>& batch,
                                Gradients& grads) const {
  check_batch(batch);
  grads.embed.assign(embed_.size(), 0.0);
  grads.project.assign(project_.size(), 0.0);
  std::size_t positions = 0;
  for (const auto& seq : batch) positions += seq.size() - 1;
  const double scale = 1.0 / static_cast<double>(positions);
  Workspace ws;
  double total = 0.0;
  for (const auto& seq : batch) total += run(seq, &grads, scale, ws);
  return total * scale;
}

std::vector<double> VetModel::next_token_distribution(std::span<const TokenId> context) const {
  if (context.empty() || context.size() > dims_.context) {
    throw Error(ErrorCode::InvalidArgument, "context length must be in [1, C]");
  }
  // a dummy target makes the last position's logits available
  std::vector<TokenId> seq(context.begin(), context.end());
  seq.push_back(0);
  check_batch({seq});
  Workspace ws;
  run(seq, nullptr, 0.0, ws);
  const std::size_t V = dims_.vocab;
  const double* lg = ws.logits.data() + (context.size() - 1) * V;
  double mx = lg[0];
  for (std::size_t j = 1; j < V; ++j) mx = std::max(mx, lg[j]);
  std::vector<double> p(V);
  double z = 0.0;
  for (std::size_t j = 0; j < V; ++j) z += (p[j] = std::exp(lg[j] - mx));
  for (auto& v : p) v /= z;
  return p;
}

VetModel VetModel::resized(std::size_t new_vocab, std::uint64_t seed) const {
  if (new_vocab < dims_.vocab) {
    throw Error(ErrorCode::ShrinkNotSupported, "vocabulary can only grow");
  }
  if (new_vocab == dims_.vocab) return *this;
  const std::size_t d = dims_.width, V = dims_.vocab;
  VetModel m = *this;
  m.dims_.vocab = new_vocab;

  std::vector<double> mean(d, 0.0);
  for (std::size_t r = 0; r < V; ++r) {
    for (std::size_t i = 0; i < d; ++i) mean[i] += embed_[r * d + i];
  }
  for (auto& v : mean) v /= static_cast<double>(V);
  Rng rng(seed);
  m.embed_.resize(new_vocab * d);
  for (std::size_t r = V; r < new_vocab; ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      m.embed_[r * d + i] = static_cast<float>(mean[i] + rng.normal(0.0, kResizeNoiseStd));
    }
  }

  m.project_.assign(d * new_vocab, 0.0f);
  for (std::size_t i = 0; i < d; ++i) {
    std::copy_n(project_.begin() + i * V, V, m.project_.begin() + i * new_vocab);
  }
  return m;
}

void VetModel::save(const std::string& path) const {
  std::string bytes;
  append_le(bytes, embed_);
  append_le(bytes, body_.params);
  append_le(bytes, project_);
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "short write to " + path);
  }
  json layout = json::array();
  std::size_t offset = 0;
  for (const auto& p : parameters()) {
    layout.push_back({{"name", p.name}, {"offset", offset}, {"count", p.count},
                      {"trainable", p.trainable}});
    offset += p.count;
  }
  const json sidecar = {
      {"format", "f32le"},
      {"dims",
       {{"vocab", dims_.vocab}, {"width", dims_.width}, {"blocks", dims_.blocks},
        {"context", dims_.context}}},
      {"layout", layout},
      {"digests",
       {{"embed", digest_of(embed_)}, {"body", body_.digest()}, {"project", digest_of(project_)},
        {"file", text::sha256_hex(bytes.data(), bytes.size())}}},
  };
  std::ofstream side(path + ".json");
  if (!side) throw Error(ErrorCode::Io, "cannot write " + path + ".json");
  side << sidecar.dump(2) << '\n';
}

VetModel VetModel::load(const std::string& path) {
  json sidecar;
  {
    std::ifstream side(path + ".json");
    if (!side) throw Error(ErrorCode::Io, "cannot open " + path + ".json");
    try {
      sidecar = json::parse(side);
    } catch (const json::parse_error& e) {
      throw CorruptError(e.byte, "checkpoint sidecar is not valid JSON");
    }
  }
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  VetModel m;
  try {
    const auto& dj = sidecar.at("dims");
    m.dims_ = {dj.at("vocab").get<std::size_t>(), dj.at("width").get<std::size_t>(),
               dj.at("blocks").get<std::size_t>(), dj.at("context").get<std::size_t>()};
    m.body_ = make_body_layout(m.dims_);
    const std::size_t n_embed = m.dims_.vocab * m.dims_.width;
    const std::size_t n_body = m.body_.params.size();
    if (bytes.size() != 4 * (2 * n_embed + n_body)) {
      throw CorruptError(std::min(bytes.size(), 4 * (2 * n_embed + n_body)),
                         "checkpoint size does not match dims");
    }
    m.embed_ = read_le(bytes, 0, n_embed);
    m.body_.params = read_le(bytes, 4 * n_embed, n_body);
    m.project_ = read_le(bytes, 4 * (n_embed + n_body), n_embed);
    const auto& dg = sidecar.at("digests");
    if (dg.at("body").get<std::string>() != m.body_.digest() ||
        dg.at("embed").get<std::string>() != digest_of(m.embed_) ||
        dg.at("project").get<std::string>() != digest_of(m.project_)) {
      throw CorruptError(0, "checkpoint digest mismatch");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Malformed, std::string("checkpoint sidecar: ") + e.what());
  }
  return m;
}

double trainable_fraction(double vocab, double width, double total_params) {
  if (!(vocab > 0) || !(width > 0) || !(total_params > 0)) {
    throw Error(ErrorCode::InvalidArgument, "vocab, width and total must be positive");
  }
  return (vocab * width + width * vocab) / total_params;
}

}  // namespace secgate::vet
