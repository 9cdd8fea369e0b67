#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "zocr/knn.hpp"
#include "zocr/mlp.hpp"
#include "zocr/zoning.hpp"

namespace zocr {

struct Split {
    FeatureTable train;
    FeatureTable test;
};

/// Per class: shuffle that class's rows with mt19937_64(seed) (one generator,
/// classes visited in id order), then send the first
/// clamp(floor(fraction * count), 1, count - 1) rows to train.
/// Throws std::invalid_argument when a listed class has fewer than 2 rows or
/// the fraction is outside (0, 1).
Split stratified_split(const FeatureTable& table, double train_fraction, std::uint64_t seed);

/// Number of training rows a class of `count` rows contributes.
std::size_t train_count(std::size_t count, double train_fraction) noexcept;

struct EvalReport {
    double overall_accuracy = 0.0;
    std::vector<double> per_class_accuracy;
    std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    double elapsed_train = 0.0;
    double elapsed_test = 0.0;
};

/// Builds the confusion-matrix report from paired labels.
EvalReport make_report(std::span<const ClassId> truth, std::span<const ClassId> predicted, std::size_t n_classes);

std::vector<ClassId> labels_of(const FeatureTable& table);

EvalReport evaluate_knn(const Split& split, std::size_t k);
EvalReport evaluate_knn(const FeatureTable& table, std::size_t k, double train_fraction, std::uint64_t seed);

struct MlpEvaluation {
    EvalReport report;
    TrainingTrace trace;
    MlpModel model;
};

MlpEvaluation evaluate_mlp(const Split& split, const TrainHyperparams& hp, const EpochCallback& on_epoch = {});
MlpEvaluation evaluate_mlp(const FeatureTable& table, const TrainHyperparams& hp, double train_fraction,
                           std::uint64_t seed);

struct SweepPoint {
    double x = 0.0;
    double accuracy = 0.0;
    double seconds = 0.0;
};

struct SweepCurve {
    std::vector<SweepPoint> points;
};

/// One split and one fit; each k re-predicts the same test set. `seconds`
/// is the prediction time for that k.
SweepCurve sweep_k(const FeatureTable& table, std::span<const std::size_t> ks, double train_fraction,
                   std::uint64_t seed);

const std::vector<double>& default_split_fractions();

struct SplitSweep {
    SweepCurve knn;
    SweepCurve mlp;  // seconds = MLP training time
};

/// Fresh split per fraction, all with the same seed.
SplitSweep sweep_split(const FeatureTable& table, std::span<const double> fractions, const TrainHyperparams& hp,
                       std::size_t k, std::uint64_t seed);

/// Trains once to the last listed epoch and scores the test set at each
/// listed epoch. `seconds` is cumulative training time at that epoch.
SweepCurve sweep_epochs(const FeatureTable& table, std::span<const int> epoch_list, const TrainHyperparams& hp,
                        double train_fraction, std::uint64_t seed);

/// JSON; timing fields are `elapsed_train` / `elapsed_test`.
std::string report_to_json(const EvalReport& report, bool include_timings = true);
void save_report(const std::filesystem::path& path, const EvalReport& report);

/// `x,accuracy,seconds`
void write_sweep_csv(const std::filesystem::path& path, const SweepCurve& curve);

}  // namespace zocr
