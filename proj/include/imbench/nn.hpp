#pragma once

// Fully-connected network engine with hand-derived backpropagation.
//
// Hidden blocks are Dense -> ReLU -> BatchNorm -> Dropout, followed by a
// dense head producing two logits (class 0 = majority, class 1 = minority).

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imbench/matrix.hpp"
#include "imbench/random.hpp"

namespace imbench {

enum class Mode { training, inference };

/// Glorot-uniform initialisation: entries i.i.d. on [-L, L] with
/// L = sqrt(6 / (fan_in + fan_out)).
Matrix xavier_init(std::size_t fan_in, std::size_t fan_out, Rng& rng);

struct DenseLayer {
    Matrix weights;  // fan_in x fan_out
    std::vector<double> bias;
    Matrix weight_grad;
    std::vector<double> bias_grad;

    DenseLayer() = default;
    DenseLayer(std::size_t fan_in, std::size_t fan_out, Rng& rng);

    std::size_t fan_in() const { return weights.rows; }
    std::size_t fan_out() const { return weights.cols; }

    Matrix forward(const Matrix& input) const;
    /// Sets weight/bias grads from the cached layer input and returns dL/dinput.
    Matrix backward(const Matrix& input, const Matrix& grad_output);
};

struct BatchNormLayer {
    std::vector<double> scale;
    std::vector<double> shift;
    std::vector<double> running_mean;
    std::vector<double> running_var;
    double epsilon = 1e-5;
    double momentum = 0.1;

    std::vector<double> scale_grad;
    std::vector<double> shift_grad;

    // batch statistics cached by forward_train
    Matrix normalized;
    std::vector<double> inv_std;

    BatchNormLayer() = default;
    BatchNormLayer(std::size_t width, double eps, double mom);

    Matrix forward_train(const Matrix& x);
    Matrix forward_inference(const Matrix& x) const;
    Matrix backward(const Matrix& grad_output);
};

/// Inverted dropout: kept units are scaled by 1/(1-rate) during training so
/// inference is the identity.
struct DropoutLayer {
    double rate = 0.0;
    std::vector<unsigned char> last_mask;

    Matrix forward_train(const Matrix& x, Rng& rng);
    Matrix backward(const Matrix& grad_output) const;
};

struct MlpSpec {
    std::size_t input_width = 0;
    std::size_t width = 50;
    std::size_t depth = 2;  // number of hidden blocks; 0 gives a single dense layer
    double dropout = 0.5;
    bool batch_norm = true;
    double bn_epsilon = 1e-5;
    double bn_momentum = 0.1;
};

/// Mutable view of one parameter tensor and its gradient.
struct ParamView {
    std::string name;
    std::span<double> value;
    std::span<double> grad;
};

class Mlp {
public:
    static constexpr std::size_t output_width = 2;

    Mlp() = default;
    Mlp(const MlpSpec& spec, Rng& init_rng);

    const MlpSpec& spec() const { return spec_; }
    std::size_t depth() const { return blocks_.size(); }

    /// Training mode caches intermediates for backward() and needs a
    /// generator for the dropout masks. Inference mode is pure.
    Matrix forward(const Matrix& batch, Mode mode, Rng* dropout_rng = nullptr);

    /// Inference-mode logits; safe for concurrent use.
    Matrix logits(const Matrix& batch) const;

    /// Backpropagates dL/dlogits through the batch cached by the last
    /// training-mode forward, overwriting every parameter gradient.
    void backward(const Matrix& grad_logits);

    std::vector<ParamView> parameters();
    std::size_t parameter_count() const;
    void zero_grad();

    DenseLayer& head() { return head_; }
    BatchNormLayer& norm(std::size_t block) { return blocks_.at(block).norm; }

private:
    struct Block {
        DenseLayer dense;
        BatchNormLayer norm;
        DropoutLayer dropout;
        Matrix input;        // dense input
        Matrix preactivation;  // dense output, before ReLU
    };

    void check_width(const Matrix& batch) const;

    MlpSpec spec_;
    std::vector<Block> blocks_;
    DenseLayer head_;
    Matrix head_input_;
    bool cached_ = false;
};

/// Row-wise softmax with max subtraction.
Matrix softmax(const Matrix& logits);

/// Per-sample loss_i = -w_i * log softmax(logits_i)[y_i].
std::vector<double> cross_entropy(const Matrix& logits, std::span<const int> labels,
                                  std::optional<std::span<const double>> sample_weights = std::nullopt);

/// Gradient of sum_i coeff_i * CE_i with respect to the logits.
Matrix cross_entropy_grad(const Matrix& logits, std::span<const int> labels, std::span<const double> coeffs);

/// Minority-class (label 1) probability per row, inference mode.
std::vector<double> predict_proba(const Mlp& model, const Matrix& batch);

struct AdamState {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t timestep = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
};

/// One bias-corrected Adam update over `params`. Moments are allocated (zeroed)
/// on the first call and must match the parameter shapes afterwards.
void adam_step(std::span<const ParamView> params, AdamState& state);

}  // namespace imbench
