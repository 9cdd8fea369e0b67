#include "zocr/mlp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "zocr/random.hpp"

namespace zocr {

using json = nlohmann::json;

namespace {

void check_input(const MlpModel& m, std::span<const double> x) {
    if (x.size() != m.inputs())
        throw std::invalid_argument("mlp: input has " + std::to_string(x.size()) + " features, model expects " +
                                    std::to_string(m.inputs()));
}

void check_target(std::size_t outputs, ClassId target) {
    if (target < 0 || static_cast<std::size_t>(target) >= outputs)
        throw std::invalid_argument("mlp: target class " + std::to_string(target) + " outside [0, " +
                                    std::to_string(outputs) + ")");
}

void dense_sigmoid(const DenseLayer& layer, std::span<const double> in, std::vector<double>& out) {
    out.resize(layer.fan_out);
    for (std::size_t r = 0; r < layer.fan_out; ++r) {
        const double* row = layer.weights.data() + r * layer.fan_in;
        double z = layer.biases[r];
        for (std::size_t c = 0; c < layer.fan_in; ++c) z += row[c] * in[c];
        out[r] = sigmoid(z);
    }
}

// Workspace reused across SGD steps to avoid per-sample allocation.
struct Workspace {
    Activations act;
    std::array<std::vector<double>, 4> delta;
};

void forward_into(const MlpModel& m, std::span<const double> x, Activations& act) {
    act[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < 3; ++l) dense_sigmoid(m.layers[l], act[l], act[l + 1]);
}

// Fills ws.delta[1..3] with dL/dz for each layer; act must hold a forward pass.
void backward_deltas(const MlpModel& m, ClassId target, Workspace& ws) {
    const auto& out = ws.act[3];
    const double scale = 2.0 / static_cast<double>(out.size());
    auto& d3 = ws.delta[3];
    d3.resize(out.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double t = static_cast<ClassId>(j) == target ? 1.0 : 0.0;
        d3[j] = scale * (out[j] - t) * out[j] * (1.0 - out[j]);
    }
    for (std::size_t l = 3; l-- > 1;) {
        const auto& layer = m.layers[l];  // maps act[l] -> act[l+1]
        const auto& upper = ws.delta[l + 1];
        auto& d = ws.delta[l];
        d.assign(layer.fan_in, 0.0);
        for (std::size_t r = 0; r < layer.fan_out; ++r) {
            const double* row = layer.weights.data() + r * layer.fan_in;
            for (std::size_t c = 0; c < layer.fan_in; ++c) d[c] += row[c] * upper[r];
        }
        const auto& a = ws.act[l];
        for (std::size_t c = 0; c < d.size(); ++c) d[c] *= a[c] * (1.0 - a[c]);
    }
}

void store_gradients(const Workspace& ws, MlpGradients& g) {
    for (std::size_t l = 0; l < 3; ++l) {
        auto& gl = g.layers[l];
        const auto& d = ws.delta[l + 1];
        const auto& a = ws.act[l];
        for (std::size_t r = 0; r < gl.fan_out; ++r) {
            double* row = gl.weights.data() + r * gl.fan_in;
            for (std::size_t c = 0; c < gl.fan_in; ++c) row[c] = d[r] * a[c];
            gl.biases[r] = d[r];
        }
    }
}

MlpGradients zero_gradients(const MlpModel& m) {
    MlpGradients g;
    for (std::size_t l = 0; l < 3; ++l) g.layers[l] = DenseLayer(m.layers[l].fan_in, m.layers[l].fan_out);
    return g;
}

}  // namespace

double sigmoid(double z) noexcept {
    return 1.0 / (1.0 + std::exp(-z));
}

MlpModel mlp_init(std::size_t h1, std::size_t h2, std::uint64_t seed, std::size_t inputs, std::size_t outputs) {
    if (h1 < 1 || h2 < 1 || inputs < 1 || outputs < 1) throw std::invalid_argument("mlp: layer sizes must be >= 1");
    MlpModel m;
    m.layer_sizes = {inputs, h1, h2, outputs};
    m.init_seed = seed;
    Rng rng(seed);
    for (std::size_t l = 0; l < 3; ++l) {
        DenseLayer layer(m.layer_sizes[l], m.layer_sizes[l + 1]);
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.fan_in));
        for (auto& w : layer.weights) w = uniform(rng, -bound, bound);
        m.layers[l] = std::move(layer);
    }
    for (std::size_t i = 0; i < outputs; ++i)
        m.classes.push_back({static_cast<ClassId>(i), "class_" + std::to_string(i)});
    return m;
}

Activations mlp_forward(const MlpModel& m, std::span<const double> x) {
    check_input(m, x);
    Activations act;
    forward_into(m, x, act);
    return act;
}

double mlp_loss(std::span<const double> output, ClassId target) {
    check_target(output.size(), target);
    double sum = 0.0;
    for (std::size_t j = 0; j < output.size(); ++j) {
        const double diff = output[j] - (static_cast<ClassId>(j) == target ? 1.0 : 0.0);
        sum += diff * diff;
    }
    return sum / static_cast<double>(output.size());
}

double MlpGradients::l2_norm() const noexcept {
    double s = 0.0;
    for (const auto& l : layers) {
        for (double v : l.weights) s += v * v;
        for (double v : l.biases) s += v * v;
    }
    return std::sqrt(s);
}

MlpGradients mlp_backprop(const MlpModel& m, std::span<const double> x, ClassId target) {
    check_input(m, x);
    check_target(m.outputs(), target);
    Workspace ws;
    forward_into(m, x, ws.act);
    backward_deltas(m, target, ws);
    auto g = zero_gradients(m);
    store_gradients(ws, g);
    return g;
}

ClassId mlp_predict(const MlpModel& m, std::span<const double> x) {
    const auto act = mlp_forward(m, x);
    const auto& out = act[3];
    return static_cast<ClassId>(std::max_element(out.begin(), out.end()) - out.begin());
}

double finite_difference_check(const MlpModel& m, std::span<const double> x, ClassId target, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("finite_difference_check: eps must be > 0");
    const auto analytic = mlp_backprop(m, x, target);
    MlpModel probe = m;
    const auto loss_at = [&] { return mlp_loss(mlp_forward(probe, x)[3], target); };

    double worst = 0.0;
    const auto compare = [&](double& param, double grad) {
        const double saved = param;
        param = saved + eps;
        const double up = loss_at();
        param = saved - eps;
        const double down = loss_at();
        param = saved;
        const double numeric = (up - down) / (2.0 * eps);
        const double denom = std::max({std::abs(grad), std::abs(numeric), 1e-8});
        worst = std::max(worst, std::abs(grad - numeric) / denom);
    };
    for (std::size_t l = 0; l < 3; ++l) {
        auto& layer = probe.layers[l];
        const auto& g = analytic.layers[l];
        for (std::size_t i = 0; i < layer.weights.size(); ++i) compare(layer.weights[i], g.weights[i]);
        for (std::size_t i = 0; i < layer.biases.size(); ++i) compare(layer.biases[i], g.biases[i]);
    }
    return worst;
}

void TrainHyperparams::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (h1 < 1 || h2 < 1) throw std::invalid_argument("hidden sizes must be >= 1");
}

double mlp_mean_loss(const MlpModel& m, const FeatureTable& table) {
    if (table.rows.empty()) return 0.0;
    Activations act;
    double sum = 0.0;
    for (const auto& row : table.rows) {
        check_input(m, row.features);
        forward_into(m, row.features, act);
        sum += mlp_loss(act[3], row.class_id);
    }
    return sum / static_cast<double>(table.rows.size());
}

TrainResult mlp_train(MlpModel m, const FeatureTable& train, const TrainHyperparams& hp, const EpochCallback& on_epoch) {
    hp.validate();
    if (train.rows.empty()) throw std::invalid_argument("mlp_train: training table is empty");
    for (const auto& row : train.rows) {
        check_input(m, row.features);
        check_target(m.outputs(), row.class_id);
    }
    m.feature_grid = train.grid;
    if (train.classes.size() == m.outputs()) m.classes = train.classes;

    std::vector<std::size_t> order(train.rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(hp.shuffle_seed);
    Workspace ws;
    auto grad = zero_gradients(m);

    TrainResult result;
    using clock = std::chrono::steady_clock;
    clock::duration busy{};
    for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
        const auto start = clock::now();
        shuffle(std::span<std::size_t>(order), rng);
        for (auto idx : order) {
            const auto& row = train.rows[idx];
            forward_into(m, row.features, ws.act);
            backward_deltas(m, row.class_id, ws);
            // w <- w - lr * dL/dw, applied layer by layer.
            for (std::size_t l = 0; l < 3; ++l) {
                auto& layer = m.layers[l];
                const auto& d = ws.delta[l + 1];
                const auto& a = ws.act[l];
                for (std::size_t r = 0; r < layer.fan_out; ++r) {
                    const double step = hp.learning_rate * d[r];
                    double* w = layer.weights.data() + r * layer.fan_in;
                    for (std::size_t c = 0; c < layer.fan_in; ++c) w[c] -= step * a[c];
                    layer.biases[r] -= step;
                }
            }
            if (idx == order.back()) store_gradients(ws, grad);
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.mse = mlp_mean_loss(m, train);
        rec.grad_norm = grad.l2_norm();
        busy += clock::now() - start;
        rec.seconds = std::chrono::duration<double>(busy).count();
        result.trace.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec, m);
    }
    result.model = std::move(m);
    return result;
}

std::string mlp_to_json(const MlpModel& m) {
    json j;
    j["schema_version"] = MlpModel::kSchemaVersion;
    j["layer_sizes"] = m.layer_sizes;
    j["activation"] = MlpModel::activation();
    j["init_seed"] = m.init_seed;
    json weights = json::array();
    json biases = json::array();
    for (const auto& layer : m.layers) {
        json rows = json::array();
        for (std::size_t r = 0; r < layer.fan_out; ++r) {
            rows.push_back(std::vector<double>(layer.weights.begin() + static_cast<std::ptrdiff_t>(r * layer.fan_in),
                                               layer.weights.begin() + static_cast<std::ptrdiff_t>((r + 1) * layer.fan_in)));
        }
        weights.push_back(std::move(rows));
        biases.push_back(layer.biases);
    }
    j["weights"] = std::move(weights);
    j["biases"] = std::move(biases);
    j["feature_grid"] = {{"rows", m.feature_grid.rows}, {"cols", m.feature_grid.cols}};
    json names = json::array();
    for (const auto& c : m.classes) names.push_back(c.name);
    j["class_names"] = std::move(names);
    return j.dump(1);
}

MlpModel mlp_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("mlp model: invalid JSON: ") + e.what());
    }
    try {
        if (j.at("schema_version").get<int>() != MlpModel::kSchemaVersion)
            throw std::runtime_error("mlp model: unsupported schema_version");
        if (j.at("activation").get<std::string>() != MlpModel::activation())
            throw std::runtime_error("mlp model: unsupported activation");
        MlpModel m;
        m.layer_sizes = j.at("layer_sizes").get<std::array<std::size_t, 4>>();
        m.init_seed = j.at("init_seed").get<std::uint64_t>();
        const auto& weights = j.at("weights");
        const auto& biases = j.at("biases");
        if (weights.size() != 3 || biases.size() != 3) throw std::runtime_error("mlp model: expected 3 weight layers");
        for (std::size_t l = 0; l < 3; ++l) {
            DenseLayer layer(m.layer_sizes[l], m.layer_sizes[l + 1]);
            const auto& rows = weights[l];
            if (rows.size() != layer.fan_out) throw std::runtime_error("mlp model: weight rows mismatch layer_sizes");
            for (std::size_t r = 0; r < layer.fan_out; ++r) {
                const auto row = rows[r].get<std::vector<double>>();
                if (row.size() != layer.fan_in) throw std::runtime_error("mlp model: weight cols mismatch layer_sizes");
                std::copy(row.begin(), row.end(), layer.weights.begin() + static_cast<std::ptrdiff_t>(r * layer.fan_in));
            }
            layer.biases = biases[l].get<std::vector<double>>();
            if (layer.biases.size() != layer.fan_out) throw std::runtime_error("mlp model: bias length mismatch");
            m.layers[l] = std::move(layer);
        }
        if (j.contains("feature_grid")) {
            m.feature_grid = {j["feature_grid"].at("rows").get<int>(), j["feature_grid"].at("cols").get<int>()};
        } else {
            m.feature_grid = {1, static_cast<int>(m.inputs())};
        }
        if (static_cast<std::size_t>(m.feature_grid.zones()) != m.inputs())
            throw std::runtime_error("mlp model: feature_grid does not match input size");
        if (j.contains("class_names")) {
            const auto names = j["class_names"].get<std::vector<std::string>>();
            for (std::size_t i = 0; i < names.size(); ++i) m.classes.push_back({static_cast<ClassId>(i), names[i]});
        }
        if (m.classes.size() != m.outputs()) {
            m.classes.clear();
            for (std::size_t i = 0; i < m.outputs(); ++i)
                m.classes.push_back({static_cast<ClassId>(i), "class_" + std::to_string(i)});
        }
        return m;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("mlp model: ") + e.what());
    }
}

void save_mlp_model(const std::filesystem::path& path, const MlpModel& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << mlp_to_json(m) << '\n';
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

MlpModel load_mlp_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path.string() + ": cannot open mlp model");
    std::stringstream ss;
    ss << in.rdbuf();
    return mlp_from_json(ss.str());
}

void write_trace_csv(const std::filesystem::path& path, const TrainingTrace& trace) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << "epoch,mse,grad_norm,seconds\n";
    char buf[128];
    for (const auto& r : trace.epochs) {
        std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.3f\n", r.epoch, r.mse, r.grad_norm, r.seconds);
        out << buf;
    }
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace zocr
