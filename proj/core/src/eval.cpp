#include "zocr/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "zocr/random.hpp"

namespace zocr {

using json = nlohmann::json;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

double round_ms(double seconds) {
    return std::round(seconds * 1000.0) / 1000.0;
}

template <typename T>
void require_increasing(std::span<const T> xs, const char* what) {
    if (xs.empty()) throw std::invalid_argument(std::string(what) + " list is empty");
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i - 1] < xs[i])) throw std::invalid_argument(std::string(what) + " list must be strictly increasing");
    }
}

std::vector<ClassId> mlp_predict_all(const MlpModel& m, const FeatureTable& table) {
    std::vector<ClassId> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) out.push_back(mlp_predict(m, row.features));
    return out;
}

double accuracy_of(std::span<const ClassId> truth, std::span<const ClassId> predicted) {
    if (truth.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace

std::size_t train_count(std::size_t count, double train_fraction) noexcept {
    if (count < 2) return count;
    // The epsilon keeps fractions such as 2/3 from flooring 68.0 down to 67.
    const auto n = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(count) + 1e-9));
    return std::clamp<std::size_t>(n, 1, count - 1);
}

Split stratified_split(const FeatureTable& table, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train fraction must lie strictly between 0 and 1");

    std::map<ClassId, std::vector<std::size_t>> by_class;
    for (const auto& c : table.classes) by_class[c.id];
    for (std::size_t i = 0; i < table.rows.size(); ++i) by_class[table.rows[i].class_id].push_back(i);

    Split split{{table.grid, table.classes, {}}, {table.grid, table.classes, {}}};
    Rng rng(seed);
    for (auto& [id, idx] : by_class) {
        if (idx.size() < 2)
            throw std::invalid_argument("class " + std::to_string(id) + " has " + std::to_string(idx.size()) +
                                        " samples; stratified split needs at least 2");
        shuffle(std::span<std::size_t>(idx), rng);
        const auto n_train = train_count(idx.size(), train_fraction);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            (i < n_train ? split.train : split.test).rows.push_back(table.rows[idx[i]]);
        }
    }
    return split;
}

std::vector<ClassId> labels_of(const FeatureTable& table) {
    std::vector<ClassId> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) out.push_back(row.class_id);
    return out;
}

EvalReport make_report(std::span<const ClassId> truth, std::span<const ClassId> predicted, std::size_t n_classes) {
    if (truth.size() != predicted.size()) throw std::invalid_argument("make_report: label count mismatch");
    EvalReport r;
    r.n_test = truth.size();
    r.confusion.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto t = truth[i];
        const auto p = predicted[i];
        if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= n_classes || static_cast<std::size_t>(p) >= n_classes)
            throw std::invalid_argument("make_report: class id outside [0, n_classes)");
        ++r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    }
    std::size_t diag = 0;
    r.per_class_accuracy.assign(n_classes, 0.0);
    for (std::size_t c = 0; c < n_classes; ++c) {
        std::size_t row = 0;
        for (auto v : r.confusion[c]) row += v;
        diag += r.confusion[c][c];
        if (row > 0) r.per_class_accuracy[c] = static_cast<double>(r.confusion[c][c]) / static_cast<double>(row);
    }
    r.overall_accuracy = r.n_test ? static_cast<double>(diag) / static_cast<double>(r.n_test) : 0.0;
    return r;
}

EvalReport evaluate_knn(const Split& split, std::size_t k) {
    auto start = clock_type::now();
    const auto model = knn_fit(split.train);
    const double t_train = seconds_since(start);
    start = clock_type::now();
    const auto predicted = knn_predict_batch(model, split.test, k);
    const double t_test = seconds_since(start);

    auto r = make_report(labels_of(split.test), predicted, split.test.class_count());
    r.n_train = split.train.rows.size();
    r.elapsed_train = t_train;
    r.elapsed_test = t_test;
    return r;
}

EvalReport evaluate_knn(const FeatureTable& table, std::size_t k, double train_fraction, std::uint64_t seed) {
    return evaluate_knn(stratified_split(table, train_fraction, seed), k);
}

MlpEvaluation evaluate_mlp(const Split& split, const TrainHyperparams& hp, const EpochCallback& on_epoch) {
    hp.validate();
    auto start = clock_type::now();
    auto init = mlp_init(hp.h1, hp.h2, hp.init_seed, split.train.dims(), split.train.class_count());
    auto trained = mlp_train(std::move(init), split.train, hp, on_epoch);
    const double t_train = seconds_since(start);
    start = clock_type::now();
    const auto predicted = mlp_predict_all(trained.model, split.test);
    const double t_test = seconds_since(start);

    MlpEvaluation out;
    out.report = make_report(labels_of(split.test), predicted, split.test.class_count());
    out.report.n_train = split.train.rows.size();
    out.report.elapsed_train = t_train;
    out.report.elapsed_test = t_test;
    out.trace = std::move(trained.trace);
    out.model = std::move(trained.model);
    return out;
}

MlpEvaluation evaluate_mlp(const FeatureTable& table, const TrainHyperparams& hp, double train_fraction,
                           std::uint64_t seed) {
    return evaluate_mlp(stratified_split(table, train_fraction, seed), hp);
}

SweepCurve sweep_k(const FeatureTable& table, std::span<const std::size_t> ks, double train_fraction,
                   std::uint64_t seed) {
    require_increasing(ks, "k");
    const auto split = stratified_split(table, train_fraction, seed);
    const auto model = knn_fit(split.train);
    if (ks.front() < 1 || ks.back() > model.size())
        throw std::invalid_argument("k values must lie in [1, training rows]");
    const auto truth = labels_of(split.test);

    SweepCurve curve;
    for (auto k : ks) {
        const auto start = clock_type::now();
        const auto predicted = knn_predict_batch(model, split.test, k);
        const double secs = seconds_since(start);
        curve.points.push_back({static_cast<double>(k), accuracy_of(truth, predicted), secs});
    }
    return curve;
}

const std::vector<double>& default_split_fractions() {
    static const std::vector<double> fractions{0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80};
    return fractions;
}

SplitSweep sweep_split(const FeatureTable& table, std::span<const double> fractions, const TrainHyperparams& hp,
                       std::size_t k, std::uint64_t seed) {
    require_increasing(fractions, "fraction");
    hp.validate();
    SplitSweep out;
    for (double f : fractions) {
        const auto split = stratified_split(table, f, seed);
        const auto knn = evaluate_knn(split, k);
        out.knn.points.push_back({f, knn.overall_accuracy, knn.elapsed_train + knn.elapsed_test});
        const auto mlp = evaluate_mlp(split, hp);
        out.mlp.points.push_back({f, mlp.report.overall_accuracy, mlp.report.elapsed_train});
    }
    return out;
}

SweepCurve sweep_epochs(const FeatureTable& table, std::span<const int> epoch_list, const TrainHyperparams& hp,
                        double train_fraction, std::uint64_t seed) {
    require_increasing(epoch_list, "epoch");
    if (epoch_list.front() < 1) throw std::invalid_argument("epochs must be >= 1");
    auto run = hp;
    run.epochs = epoch_list.back();
    run.validate();

    const auto split = stratified_split(table, train_fraction, seed);
    const auto truth = labels_of(split.test);
    SweepCurve curve;
    std::size_t next = 0;
    auto snapshot = [&](const EpochRecord& rec, const MlpModel& m) {
        if (next < epoch_list.size() && rec.epoch == epoch_list[next]) {
            curve.points.push_back({static_cast<double>(rec.epoch), accuracy_of(truth, mlp_predict_all(m, split.test)),
                                    rec.seconds});
            ++next;
        }
    };
    auto init = mlp_init(run.h1, run.h2, run.init_seed, split.train.dims(), split.train.class_count());
    mlp_train(std::move(init), split.train, run, snapshot);
    return curve;
}

std::string report_to_json(const EvalReport& report, bool include_timings) {
    json j;
    j["overall_accuracy"] = report.overall_accuracy;
    j["per_class_accuracy"] = report.per_class_accuracy;
    j["confusion"] = report.confusion;
    j["n_train"] = report.n_train;
    j["n_test"] = report.n_test;
    if (include_timings) {
        j["elapsed_train"] = round_ms(report.elapsed_train);
        j["elapsed_test"] = round_ms(report.elapsed_test);
    }
    return j.dump(1);
}

void save_report(const std::filesystem::path& path, const EvalReport& report) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << report_to_json(report) << '\n';
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void write_sweep_csv(const std::filesystem::path& path, const SweepCurve& curve) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << "x,accuracy,seconds\n";
    char buf[96];
    for (const auto& p : curve.points) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.3f\n", p.x, p.accuracy, p.seconds);
        out << buf;
    }
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace zocr
