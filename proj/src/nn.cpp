#include "imbench/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace imbench {

Matrix xavier_init(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    if (fan_in == 0 || fan_out == 0) {
        throw std::invalid_argument("xavier_init: fan dimensions must be >= 1");
    }
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (auto& v : w.values) v = uniform(rng, -limit, limit);
    return w;
}

// ---------------------------------------------------------------------------
// Dense

DenseLayer::DenseLayer(std::size_t fan_in, std::size_t fan_out, Rng& rng)
    : weights(xavier_init(fan_in, fan_out, rng)),
      bias(fan_out, 0.0),
      weight_grad(fan_in, fan_out),
      bias_grad(fan_out, 0.0) {}

Matrix DenseLayer::forward(const Matrix& input) const {
    const std::size_t n = input.rows, in = fan_in(), out = fan_out();
    Matrix y(n, out);
    for (std::size_t i = 0; i < n; ++i) {
        double* yr = y.values.data() + i * out;
        std::copy(bias.begin(), bias.end(), yr);
        const double* xr = input.values.data() + i * in;
        for (std::size_t k = 0; k < in; ++k) {
            const double xk = xr[k];
            if (xk == 0.0) continue;
            const double* wr = weights.values.data() + k * out;
            for (std::size_t j = 0; j < out; ++j) yr[j] += xk * wr[j];
        }
    }
    return y;
}

Matrix DenseLayer::backward(const Matrix& input, const Matrix& grad_output) {
    const std::size_t n = input.rows, in = fan_in(), out = fan_out();
    weight_grad.fill(0.0);
    std::fill(bias_grad.begin(), bias_grad.end(), 0.0);
    Matrix grad_input(n, in);
    for (std::size_t i = 0; i < n; ++i) {
        const double* g = grad_output.values.data() + i * out;
        const double* xr = input.values.data() + i * in;
        double* gi = grad_input.values.data() + i * in;
        for (std::size_t j = 0; j < out; ++j) bias_grad[j] += g[j];
        for (std::size_t k = 0; k < in; ++k) {
            const double* wr = weights.values.data() + k * out;
            double* gw = weight_grad.values.data() + k * out;
            const double xk = xr[k];
            double acc = 0.0;
            for (std::size_t j = 0; j < out; ++j) {
                gw[j] += xk * g[j];
                acc += g[j] * wr[j];
            }
            gi[k] = acc;
        }
    }
    return grad_input;
}

// ---------------------------------------------------------------------------
// Batch norm

BatchNormLayer::BatchNormLayer(std::size_t width, double eps, double mom)
    : scale(width, 1.0),
      shift(width, 0.0),
      running_mean(width, 0.0),
      running_var(width, 1.0),
      epsilon(eps),
      momentum(mom),
      scale_grad(width, 0.0),
      shift_grad(width, 0.0) {}

Matrix BatchNormLayer::forward_train(const Matrix& x) {
    const std::size_t n = x.rows, w = x.cols;
    if (n < 2) throw std::invalid_argument("batch norm: training batch needs at least 2 rows");
    std::vector<double> mean(w, 0.0), var(w, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = x.row(i);
        for (std::size_t j = 0; j < w; ++j) mean[j] += r[j];
    }
    for (auto& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = x.row(i);
        for (std::size_t j = 0; j < w; ++j) {
            const double d = r[j] - mean[j];
            var[j] += d * d;
        }
    }
    for (auto& v : var) v /= static_cast<double>(n);

    inv_std.assign(w, 0.0);
    for (std::size_t j = 0; j < w; ++j) inv_std[j] = 1.0 / std::sqrt(var[j] + epsilon);

    normalized = Matrix(n, w);
    Matrix y(n, w);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = x.row(i);
        auto h = normalized.row(i);
        auto o = y.row(i);
        for (std::size_t j = 0; j < w; ++j) {
            h[j] = (r[j] - mean[j]) * inv_std[j];
            o[j] = scale[j] * h[j] + shift[j];
        }
    }

    const double unbias = static_cast<double>(n) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < w; ++j) {
        running_mean[j] = (1.0 - momentum) * running_mean[j] + momentum * mean[j];
        running_var[j] = (1.0 - momentum) * running_var[j] + momentum * var[j] * unbias;
    }
    return y;
}

Matrix BatchNormLayer::forward_inference(const Matrix& x) const {
    const std::size_t w = x.cols;
    Matrix y(x.rows, w);
    std::vector<double> a(w), b(w);
    for (std::size_t j = 0; j < w; ++j) {
        a[j] = scale[j] / std::sqrt(running_var[j] + epsilon);
        b[j] = shift[j] - a[j] * running_mean[j];
    }
    for (std::size_t i = 0; i < x.rows; ++i) {
        auto r = x.row(i);
        auto o = y.row(i);
        for (std::size_t j = 0; j < w; ++j) o[j] = a[j] * r[j] + b[j];
    }
    return y;
}

Matrix BatchNormLayer::backward(const Matrix& grad_output) {
    const std::size_t n = grad_output.rows, w = grad_output.cols;
    std::fill(scale_grad.begin(), scale_grad.end(), 0.0);
    std::fill(shift_grad.begin(), shift_grad.end(), 0.0);
    // sum_dxhat and sum_dxhat_xhat per column
    std::vector<double> sum_d(w, 0.0), sum_dh(w, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto g = grad_output.row(i);
        auto h = normalized.row(i);
        for (std::size_t j = 0; j < w; ++j) {
            shift_grad[j] += g[j];
            scale_grad[j] += g[j] * h[j];
            const double d = g[j] * scale[j];
            sum_d[j] += d;
            sum_dh[j] += d * h[j];
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    Matrix grad_input(n, w);
    for (std::size_t i = 0; i < n; ++i) {
        auto g = grad_output.row(i);
        auto h = normalized.row(i);
        auto gi = grad_input.row(i);
        for (std::size_t j = 0; j < w; ++j) {
            const double d = g[j] * scale[j];
            gi[j] = inv_std[j] * (d - inv_n * sum_d[j] - h[j] * inv_n * sum_dh[j]);
        }
    }
    return grad_input;
}

// ---------------------------------------------------------------------------
// Dropout

Matrix DropoutLayer::forward_train(const Matrix& x, Rng& rng) {
    last_mask.assign(x.values.size(), 1);
    if (rate <= 0.0) return x;
    const double keep_scale = 1.0 / (1.0 - rate);
    Matrix y(x.rows, x.cols);
    for (std::size_t i = 0; i < x.values.size(); ++i) {
        const bool keep = uniform01(rng) >= rate;
        last_mask[i] = keep ? 1 : 0;
        y.values[i] = keep ? x.values[i] * keep_scale : 0.0;
    }
    return y;
}

Matrix DropoutLayer::backward(const Matrix& grad_output) const {
    if (rate <= 0.0) return grad_output;
    const double keep_scale = 1.0 / (1.0 - rate);
    Matrix g(grad_output.rows, grad_output.cols);
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        g.values[i] = last_mask[i] ? grad_output.values[i] * keep_scale : 0.0;
    }
    return g;
}

// ---------------------------------------------------------------------------
// Mlp

Mlp::Mlp(const MlpSpec& spec, Rng& init_rng) : spec_(spec) {
    if (spec.input_width == 0) throw std::invalid_argument("Mlp: input width must be >= 1");
    if (spec.depth > 0 && spec.width == 0) throw std::invalid_argument("Mlp: hidden width must be >= 1");
    if (spec.dropout < 0.0 || spec.dropout >= 1.0) throw std::invalid_argument("Mlp: dropout rate must be in [0, 1)");
    std::size_t fan_in = spec.input_width;
    blocks_.reserve(spec.depth);
    for (std::size_t b = 0; b < spec.depth; ++b) {
        Block block;
        block.dense = DenseLayer(fan_in, spec.width, init_rng);
        block.norm = BatchNormLayer(spec.width, spec.bn_epsilon, spec.bn_momentum);
        block.dropout.rate = spec.dropout;
        blocks_.push_back(std::move(block));
        fan_in = spec.width;
    }
    head_ = DenseLayer(fan_in, output_width, init_rng);
}

void Mlp::check_width(const Matrix& batch) const {
    if (batch.cols != spec_.input_width) {
        throw std::invalid_argument("Mlp: batch has " + std::to_string(batch.cols) + " columns, model expects " +
                                    std::to_string(spec_.input_width));
    }
}

Matrix Mlp::forward(const Matrix& batch, Mode mode, Rng* dropout_rng) {
    if (mode == Mode::inference) return logits(batch);
    check_width(batch);
    if (spec_.batch_norm && !blocks_.empty() && batch.rows < 2) {
        throw std::invalid_argument("Mlp: training-mode batch needs at least 2 rows");
    }
    if (dropout_rng == nullptr && spec_.dropout > 0.0 && !blocks_.empty()) {
        throw std::invalid_argument("Mlp: training-mode forward needs a dropout generator");
    }
    Matrix x = batch;
    for (auto& block : blocks_) {
        block.input = std::move(x);
        block.preactivation = block.dense.forward(block.input);
        Matrix h = block.preactivation;
        for (auto& v : h.values) v = v > 0.0 ? v : 0.0;
        if (spec_.batch_norm) h = block.norm.forward_train(h);
        x = dropout_rng ? block.dropout.forward_train(h, *dropout_rng) : std::move(h);
        if (!dropout_rng) block.dropout.last_mask.assign(x.values.size(), 1);
    }
    head_input_ = std::move(x);
    cached_ = true;
    return head_.forward(head_input_);
}

Matrix Mlp::logits(const Matrix& batch) const {
    check_width(batch);
    Matrix x = batch;
    for (const auto& block : blocks_) {
        Matrix h = block.dense.forward(x);
        for (auto& v : h.values) v = v > 0.0 ? v : 0.0;
        x = spec_.batch_norm ? block.norm.forward_inference(h) : std::move(h);
    }
    return head_.forward(x);
}

void Mlp::backward(const Matrix& grad_logits) {
    if (!cached_) throw std::logic_error("Mlp::backward called without a preceding training-mode forward");
    if (grad_logits.rows != head_input_.rows || grad_logits.cols != output_width) {
        throw std::invalid_argument("Mlp::backward: gradient shape does not match the cached batch");
    }
    Matrix g = head_.backward(head_input_, grad_logits);
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
        g = it->dropout.backward(g);
        if (spec_.batch_norm) g = it->norm.backward(g);
        for (std::size_t i = 0; i < g.values.size(); ++i) {
            if (it->preactivation.values[i] <= 0.0) g.values[i] = 0.0;
        }
        g = it->dense.backward(it->input, g);
    }
    cached_ = false;
}

std::vector<ParamView> Mlp::parameters() {
    std::vector<ParamView> out;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        auto& blk = blocks_[b];
        const std::string p = "block" + std::to_string(b) + ".";
        out.push_back({p + "dense.weight", blk.dense.weights.values, blk.dense.weight_grad.values});
        out.push_back({p + "dense.bias", blk.dense.bias, blk.dense.bias_grad});
        if (spec_.batch_norm) {
            out.push_back({p + "norm.scale", blk.norm.scale, blk.norm.scale_grad});
            out.push_back({p + "norm.shift", blk.norm.shift, blk.norm.shift_grad});
        }
    }
    out.push_back({"head.weight", head_.weights.values, head_.weight_grad.values});
    out.push_back({"head.bias", head_.bias, head_.bias_grad});
    return out;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = head_.weights.values.size() + head_.bias.size();
    for (const auto& blk : blocks_) {
        n += blk.dense.weights.values.size() + blk.dense.bias.size();
        if (spec_.batch_norm) n += blk.norm.scale.size() + blk.norm.shift.size();
    }
    return n;
}

void Mlp::zero_grad() {
    for (auto& p : parameters()) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

// ---------------------------------------------------------------------------
// Loss

Matrix softmax(const Matrix& logits) {
    Matrix p(logits.rows, logits.cols);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        auto z = logits.row(i);
        auto out = p.row(i);
        const double m = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (std::size_t c = 0; c < z.size(); ++c) {
            out[c] = std::exp(z[c] - m);
            sum += out[c];
        }
        for (auto& v : out) v /= sum;
    }
    return p;
}

namespace {

void check_labels(const Matrix& logits, std::span<const int> labels) {
    if (logits.rows != labels.size()) {
        throw std::invalid_argument("cross_entropy: " + std::to_string(logits.rows) + " logit rows but " +
                                    std::to_string(labels.size()) + " labels");
    }
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= logits.cols) {
            throw std::invalid_argument("cross_entropy: label " + std::to_string(y) + " outside {0,1}");
        }
    }
}

}  // namespace

std::vector<double> cross_entropy(const Matrix& logits, std::span<const int> labels,
                                  std::optional<std::span<const double>> sample_weights) {
    check_labels(logits, labels);
    if (sample_weights && sample_weights->size() != labels.size()) {
        throw std::invalid_argument("cross_entropy: weight count does not match label count");
    }
    std::vector<double> loss(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto z = logits.row(i);
        const double m = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (double v : z) sum += std::exp(v - m);
        const double log_prob = z[static_cast<std::size_t>(labels[i])] - m - std::log(sum);
        const double w = sample_weights ? (*sample_weights)[i] : 1.0;
        if (!(w > 0.0)) throw std::invalid_argument("cross_entropy: sample weights must be positive");
        loss[i] = -w * log_prob;
    }
    return loss;
}

Matrix cross_entropy_grad(const Matrix& logits, std::span<const int> labels, std::span<const double> coeffs) {
    check_labels(logits, labels);
    if (coeffs.size() != labels.size()) {
        throw std::invalid_argument("cross_entropy_grad: coefficient count does not match label count");
    }
    Matrix g = softmax(logits);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto r = g.row(i);
        r[static_cast<std::size_t>(labels[i])] -= 1.0;
        for (auto& v : r) v *= coeffs[i];
    }
    return g;
}

std::vector<double> predict_proba(const Mlp& model, const Matrix& batch) {
    const Matrix p = softmax(model.logits(batch));
    std::vector<double> out(p.rows);
    for (std::size_t i = 0; i < p.rows; ++i) out[i] = p(i, 1);
    return out;
}

// ---------------------------------------------------------------------------
// Adam

void adam_step(std::span<const ParamView> params, AdamState& state) {
    if (state.first_moment.empty() && state.timestep == 0) {
        for (const auto& p : params) {
            state.first_moment.emplace_back(p.value.size(), 0.0);
            state.second_moment.emplace_back(p.value.size(), 0.0);
        }
    }
    if (state.first_moment.size() != params.size()) {
        throw std::invalid_argument("adam_step: parameter count changed since the state was created");
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k].value.size() != state.first_moment[k].size() ||
            params[k].grad.size() != params[k].value.size()) {
            throw std::invalid_argument("adam_step: shape mismatch for parameter '" + params[k].name + "'");
        }
    }

    ++state.timestep;
    const double t = static_cast<double>(state.timestep);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto value = params[k].value;
        auto grad = params[k].grad;
        auto& m = state.first_moment[k];
        auto& v = state.second_moment[k];
        for (std::size_t i = 0; i < value.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * grad[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            value[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

}  // namespace imbench
