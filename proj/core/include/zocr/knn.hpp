#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "zocr/zoning.hpp"

namespace zocr {

/// Brute-force k-nearest-neighbour classifier under Euclidean distance.
///
/// Neighbours are the k stored rows closest to the query; equal distances
/// keep stored-row order. The vote picks the class with the most neighbours;
/// a tie goes to the smallest summed distance among the tied classes, then to
/// the smallest class id.
class KnnModel {
public:
    explicit KnnModel(FeatureTable table);

    const FeatureTable& table() const noexcept { return table_; }
    std::size_t size() const noexcept { return table_.rows.size(); }
    static constexpr const char* metric() noexcept { return "euclidean"; }

private:
    FeatureTable table_;
};

struct Neighbor {
    std::size_t row = 0;  // index into the stored table
    ClassId class_id = 0;
    double distance = 0.0;  // Euclidean

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct KnnPrediction {
    ClassId class_id = 0;
    std::vector<Neighbor> neighbors;  // nearest first
};

/// Throws std::invalid_argument on an empty table.
KnnModel knn_fit(FeatureTable train);

/// Throws std::invalid_argument if k is outside [1, rows] or the query
/// length differs from the stored dimension.
KnnPrediction knn_predict(const KnnModel& model, std::span<const double> query, std::size_t k);

std::vector<ClassId> knn_predict_batch(const KnnModel& model, const FeatureTable& queries, std::size_t k);

/// `metric=euclidean` on the first line, then the feature CSV.
void save_knn_model(const std::filesystem::path& path, const KnnModel& model);
KnnModel load_knn_model(const std::filesystem::path& path, std::span<const ClassInfo> classes = {});

}  // namespace zocr
