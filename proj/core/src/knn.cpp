#include "zocr/knn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

namespace zocr {

KnnModel::KnnModel(FeatureTable table) : table_(std::move(table)) {
    if (table_.rows.empty()) throw std::invalid_argument("knn: training table is empty");
    table_.validate();
}

KnnModel knn_fit(FeatureTable train) {
    return KnnModel(std::move(train));
}

KnnPrediction knn_predict(const KnnModel& model, std::span<const double> query, std::size_t k) {
    const auto& rows = model.table().rows;
    if (k < 1 || k > rows.size())
        throw std::invalid_argument("knn: k=" + std::to_string(k) + " outside [1, " + std::to_string(rows.size()) + "]");
    if (query.size() != model.table().dims())
        throw std::invalid_argument("knn: query has " + std::to_string(query.size()) + " features, model expects " +
                                    std::to_string(model.table().dims()));

    struct Candidate {
        double d2;
        std::size_t row;
    };
    std::vector<Candidate> cand(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& f = rows[i].features;
        double d2 = 0.0;
        for (std::size_t j = 0; j < query.size(); ++j) {
            const double diff = f[j] - query[j];
            d2 += diff * diff;
        }
        cand[i] = {d2, i};
    }
    const auto closer = [](const Candidate& a, const Candidate& b) {
        return a.d2 < b.d2 || (a.d2 == b.d2 && a.row < b.row);
    };
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(), closer);

    KnnPrediction out;
    out.neighbors.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto& c = cand[i];
        out.neighbors.push_back({c.row, rows[c.row].class_id, std::sqrt(c.d2)});
    }

    // Votes keyed by class id; classes seen in the table may be sparse.
    struct Tally {
        ClassId id;
        std::size_t votes;
        double dist;
    };
    std::vector<Tally> tally;
    for (const auto& n : out.neighbors) {
        auto it = std::find_if(tally.begin(), tally.end(), [&](const Tally& t) { return t.id == n.class_id; });
        if (it == tally.end()) {
            tally.push_back({n.class_id, 1, n.distance});
        } else {
            ++it->votes;
            it->dist += n.distance;
        }
    }
    const auto better = [](const Tally& a, const Tally& b) {
        if (a.votes != b.votes) return a.votes > b.votes;
        if (a.dist != b.dist) return a.dist < b.dist;
        return a.id < b.id;
    };
    out.class_id = std::min_element(tally.begin(), tally.end(), better)->id;
    return out;
}

std::vector<ClassId> knn_predict_batch(const KnnModel& model, const FeatureTable& queries, std::size_t k) {
    std::vector<ClassId> out;
    out.reserve(queries.rows.size());
    for (const auto& row : queries.rows) out.push_back(knn_predict(model, row.features, k).class_id);
    return out;
}

void save_knn_model(const std::filesystem::path& path, const KnnModel& model) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << "metric=" << KnnModel::metric() << '\n';
    write_feature_csv(out, model.table());
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

KnnModel load_knn_model(const std::filesystem::path& path, std::span<const ClassInfo> classes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path.string() + ": cannot open knn model");
    std::string first;
    std::getline(in, first);
    if (!first.empty() && first.back() == '\r') first.pop_back();
    if (first != std::string("metric=") + KnnModel::metric())
        throw std::runtime_error(path.string() + ": not a knn model (expected 'metric=euclidean' header)");
    return KnnModel(read_feature_csv(in, classes));
}

}  // namespace zocr
