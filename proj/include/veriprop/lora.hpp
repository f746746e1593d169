#pragma once
// Desk-scale low-rank adaptation math over small dense layers: adapted
// forward pass, adapter merge, token NLL loss, AdamW and a toy training
// loop that leaves the frozen base weights bit-identical.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace veriprop::lora {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct LoraError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeMismatch : LoraError {
    using LoraError::LoraError;
};

struct IndexOutOfRange : LoraError {
    using LoraError::LoraError;
};

// Frozen base weights, d x k.
class DenseLayer {
public:
    explicit DenseLayer(Matrix w) : w_(std::move(w)) {}
    const Matrix& weights() const { return w_; }
    Eigen::Index rows() const { return w_.rows(); }
    Eigen::Index cols() const { return w_.cols(); }

private:
    Matrix w_;
};

enum class AdapterInit { ZeroB, Gaussian };

struct AdapterPair {
    Matrix a;  // d x r
    Matrix b;  // k x r
    int rank = 1;
    double alpha = 1.0;

    double scale() const { return alpha / static_cast<double>(rank); }
};

// A ~ N(0, sigma^2); B zero by default so the step-0 update vanishes, or
// Gaussian when requested.
AdapterPair init_adapters(Eigen::Index d, Eigen::Index k, int rank, double alpha,
                          std::uint64_t seed, AdapterInit init = AdapterInit::ZeroB,
                          double sigma = 0.02);

// y = W x + (alpha/r) * A (B^T x)
Vector lora_forward(const DenseLayer& layer, const AdapterPair& adapter, const Vector& x);

// W' = W + (alpha/r) * A B^T; the base layer is untouched.
DenseLayer lora_merge(const DenseLayer& layer, const AdapterPair& adapter);

// Token negative log-likelihood: -sum_i log softmax(logits_i)[target_i].
double nll_loss(const std::vector<Vector>& logit_rows, const std::vector<int>& targets,
                bool mean = false);

struct TrainConfig {
    double learning_rate = 1e-4;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int steps = 1;
    int batch_size = 8;
};

struct AdamState {
    Matrix m;  // first moment
    Matrix v;  // second moment
    std::int64_t step = 0;
};

// Decoupled weight decay, applied in place to one parameter matrix.
void adamw_step(Matrix& params, const Matrix& grads, AdamState& state, const TrainConfig& cfg);

struct TrainSample {
    Vector input;  // length k
    int target;    // index into the d logits
};

struct TrainResult {
    AdapterPair adapters;
    std::vector<double> loss_trace;  // per-step mean batch loss
};

// Gradients flow through A and B only; W is untouched.
TrainResult train_adapters(const DenseLayer& layer, AdapterPair adapters,
                           const std::vector<TrainSample>& data, const TrainConfig& cfg);

// Analytic adapter gradients of the mean batch NLL; shared by the training
// loop and the finite-difference checks.
struct AdapterGrads {
    Matrix a;
    Matrix b;
};
AdapterGrads adapter_gradients(const DenseLayer& layer, const AdapterPair& adapter,
                               const std::vector<TrainSample>& batch);
double batch_loss(const DenseLayer& layer, const AdapterPair& adapter,
                  const std::vector<TrainSample>& batch);

struct ParamCounts {
    std::uint64_t full = 0;   // d * k
    std::uint64_t lora = 0;   // r * (d + k)
    double ratio = 0.0;       // lora / full
};
ParamCounts param_counts(std::uint64_t d, std::uint64_t k, std::uint64_t r);

// Checkpoint: {"d","k","r","alpha","A":[row-major],"B":[row-major]}.
nlohmann::ordered_json adapter_to_json(const AdapterPair& adapter);
AdapterPair adapter_from_json(const nlohmann::ordered_json& j);

} // namespace veriprop::lora
