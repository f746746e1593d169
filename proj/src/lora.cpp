#include "veriprop/lora.hpp"

#include <cmath>
#include <random>

namespace veriprop::lora {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ShapeMismatch(what);
}

// Box-Muller over raw engine draws: std::normal_distribution is not
// bit-stable across standard library implementations.
double gaussian(std::mt19937_64& eng) {
    double u1 = (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
    double u2 = static_cast<double>(eng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Vector log_softmax(const Vector& logits) {
    double mx = logits.maxCoeff();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < logits.size(); ++i) sum += std::exp(logits[i] - mx);
    double lse = mx + std::log(sum);
    return logits.array() - lse;
}

} // namespace

AdapterPair init_adapters(Eigen::Index d, Eigen::Index k, int rank, double alpha,
                          std::uint64_t seed, AdapterInit init, double sigma) {
    require(rank >= 1 && rank <= std::min(d, k), "rank out of range");
    std::mt19937_64 eng(seed);
    AdapterPair pair;
    pair.rank = rank;
    pair.alpha = alpha;
    pair.a = Matrix(d, rank);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < rank; ++j) pair.a(i, j) = sigma * gaussian(eng);
    pair.b = Matrix::Zero(k, rank);
    if (init == AdapterInit::Gaussian)
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j < rank; ++j) pair.b(i, j) = sigma * gaussian(eng);
    return pair;
}

Vector lora_forward(const DenseLayer& layer, const AdapterPair& adapter, const Vector& x) {
    require(x.size() == layer.cols(), "input length != layer cols");
    require(adapter.a.rows() == layer.rows() && adapter.b.rows() == layer.cols() &&
                adapter.a.cols() == adapter.rank && adapter.b.cols() == adapter.rank,
            "adapter shapes do not fit the layer");
    Vector z = adapter.b.transpose() * x;       // r
    Vector delta = adapter.scale() * (adapter.a * z);
    return layer.weights() * x + delta;
}

DenseLayer lora_merge(const DenseLayer& layer, const AdapterPair& adapter) {
    require(adapter.a.rows() == layer.rows() && adapter.b.rows() == layer.cols(),
            "adapter shapes do not fit the layer");
    Matrix merged = layer.weights() + adapter.scale() * (adapter.a * adapter.b.transpose());
    return DenseLayer(std::move(merged));
}

double nll_loss(const std::vector<Vector>& logit_rows, const std::vector<int>& targets,
                bool mean) {
    require(logit_rows.size() == targets.size(), "logits/targets length mismatch");
    double sum = 0.0;
    for (size_t i = 0; i < logit_rows.size(); ++i) {
        if (targets[i] < 0 || targets[i] >= logit_rows[i].size())
            throw IndexOutOfRange("target " + std::to_string(targets[i]) + " out of range");
        sum -= log_softmax(logit_rows[i])[targets[i]];
    }
    if (mean && !logit_rows.empty()) sum /= static_cast<double>(logit_rows.size());
    return sum;
}

void adamw_step(Matrix& params, const Matrix& grads, AdamState& state, const TrainConfig& cfg) {
    require(params.rows() == grads.rows() && params.cols() == grads.cols(),
            "param/grad shape mismatch");
    if (state.m.size() == 0) {
        state.m = Matrix::Zero(params.rows(), params.cols());
        state.v = Matrix::Zero(params.rows(), params.cols());
    }
    require(state.m.rows() == params.rows() && state.m.cols() == params.cols(),
            "optimizer state shape mismatch");
    state.step += 1;
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grads;
    state.v = cfg.beta2 * state.v.array().matrix() +
              (1.0 - cfg.beta2) * grads.array().square().matrix();
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    Matrix mhat = state.m / bc1;
    Matrix vhat = state.v / bc2;
    // decoupled decay: shrink parameters directly, not through the gradient
    params.array() -= cfg.learning_rate *
                      (mhat.array() / (vhat.array().sqrt() + cfg.eps) + cfg.weight_decay * params.array());
}

double batch_loss(const DenseLayer& layer, const AdapterPair& adapter,
                  const std::vector<TrainSample>& batch) {
    std::vector<Vector> logits;
    std::vector<int> targets;
    logits.reserve(batch.size());
    for (const TrainSample& s : batch) {
        logits.push_back(lora_forward(layer, adapter, s.input));
        targets.push_back(s.target);
    }
    return nll_loss(logits, targets, /*mean=*/true);
}

AdapterGrads adapter_gradients(const DenseLayer& layer, const AdapterPair& adapter,
                               const std::vector<TrainSample>& batch) {
    AdapterGrads g;
    g.a = Matrix::Zero(adapter.a.rows(), adapter.a.cols());
    g.b = Matrix::Zero(adapter.b.rows(), adapter.b.cols());
    if (batch.empty()) return g;
    double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const TrainSample& s : batch) {
        Vector y = lora_forward(layer, adapter, s.input);
        if (s.target < 0 || s.target >= y.size())
            throw IndexOutOfRange("target " + std::to_string(s.target) + " out of range");
        Vector p = log_softmax(y).array().exp();
        Vector dy = p;  // dL/dy = softmax(y) - onehot(target)
        dy[s.target] -= 1.0;
        dy *= inv_n;
        Vector z = adapter.b.transpose() * s.input;      // r
        Vector dz = adapter.scale() * (adapter.a.transpose() * dy);
        g.a += adapter.scale() * (dy * z.transpose());   // d x r
        g.b += s.input * dz.transpose();                 // k x r
    }
    return g;
}

TrainResult train_adapters(const DenseLayer& layer, AdapterPair adapters,
                           const std::vector<TrainSample>& data, const TrainConfig& cfg) {
    if (data.empty()) throw LoraError("empty training data");
    for (const TrainSample& s : data)
        require(s.input.size() == layer.cols(), "sample length != layer cols");

    TrainResult result;
    AdamState state_a, state_b;
    size_t cursor = 0;
    for (int step = 0; step < cfg.steps; ++step) {
        std::vector<TrainSample> batch;
        for (int i = 0; i < cfg.batch_size; ++i) {
            batch.push_back(data[cursor]);
            cursor = (cursor + 1) % data.size();
        }
        result.loss_trace.push_back(batch_loss(layer, adapters, batch));
        AdapterGrads g = adapter_gradients(layer, adapters, batch);
        adamw_step(adapters.a, g.a, state_a, cfg);
        adamw_step(adapters.b, g.b, state_b, cfg);
    }
    result.adapters = std::move(adapters);
    return result;
}

ParamCounts param_counts(std::uint64_t d, std::uint64_t k, std::uint64_t r) {
    ParamCounts c;
    c.full = d * k;
    c.lora = r * (d + k);
    c.ratio = c.full ? static_cast<double>(c.lora) / static_cast<double>(c.full) : 0.0;
    return c;
}

nlohmann::ordered_json adapter_to_json(const AdapterPair& adapter) {
    nlohmann::ordered_json j;
    j["d"] = adapter.a.rows();
    j["k"] = adapter.b.rows();
    j["r"] = adapter.rank;
    j["alpha"] = adapter.alpha;
    auto dump = [](const Matrix& m) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j2 = 0; j2 < m.cols(); ++j2) arr.push_back(m(i, j2));
        return arr;
    };
    j["A"] = dump(adapter.a);
    j["B"] = dump(adapter.b);
    return j;
}

AdapterPair adapter_from_json(const nlohmann::ordered_json& j) {
    AdapterPair p;
    Eigen::Index d = j.at("d").get<Eigen::Index>();
    Eigen::Index k = j.at("k").get<Eigen::Index>();
    p.rank = j.at("r").get<int>();
    p.alpha = j.at("alpha").get<double>();
    auto load = [](const nlohmann::ordered_json& arr, Eigen::Index rows, Eigen::Index cols) {
        if (static_cast<Eigen::Index>(arr.size()) != rows * cols)
            throw LoraError("adapter checkpoint size mismatch");
        Matrix m(rows, cols);
        Eigen::Index idx = 0;
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = arr[idx++].get<double>();
        return m;
    };
    p.a = load(j.at("A"), d, p.rank);
    p.b = load(j.at("B"), k, p.rank);
    return p;
}

} // namespace veriprop::lora
