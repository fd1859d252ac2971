#include "hopqa/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace hopqa {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) return Matrix(0, 0);
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != cols) {
            throw CheckpointError("ragged matrix in checkpoint");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(i, c) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

json vector_to_json(const Vector& v) {
    return json(std::vector<double>(v.begin(), v.end()));
}

Vector vector_from_json(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json head_to_json(const HeadParams& h) {
    return {{"Wa", matrix_to_json(h.Wa)},
            {"ba", vector_to_json(h.ba)},
            {"Wb", vector_to_json(h.Wb)},
            {"bb", h.bb}};
}

HeadParams head_from_json(const json& j) {
    HeadParams h;
    h.Wa = matrix_from_json(j.at("Wa"));
    h.ba = vector_from_json(j.at("ba"));
    h.Wb = vector_from_json(j.at("Wb"));
    h.bb = j.at("bb").get<double>();
    return h;
}

}  // namespace

Checkpoint Checkpoint::init(int hidden, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Checkpoint ckpt;
    ckpt.hidden = hidden;
    ckpt.reasoner = ReasonerParams::init(hidden, rng);
    ckpt.predictor = PredictorParams::init(hidden, rng);
    return ckpt;
}

json checkpoint_to_json(const Checkpoint& ckpt, const json& config) {
    json j;
    j["version"] = 1;
    j["H"] = ckpt.hidden;
    j["W1"] = matrix_to_json(ckpt.reasoner.W1);
    j["W2"] = matrix_to_json(ckpt.reasoner.W2);
    j["predictor"] = {{"special", head_to_json(ckpt.predictor.special)},
                      {"alternative", head_to_json(ckpt.predictor.alternative)},
                      {"general", head_to_json(ckpt.predictor.general)}};
    j["config"] = config.is_null() ? json::object() : config;
    return j;
}

Checkpoint checkpoint_from_json(const json& j) {
    if (j.value("version", 0) != 1) throw CheckpointError("unsupported checkpoint version");
    Checkpoint ckpt;
    ckpt.hidden = j.at("H").get<int>();
    ckpt.reasoner.W1 = matrix_from_json(j.at("W1"));
    ckpt.reasoner.W2 = matrix_from_json(j.at("W2"));
    if (ckpt.reasoner.W1.rows() != ckpt.hidden || ckpt.reasoner.W1.cols() != ckpt.hidden ||
        ckpt.reasoner.W2.rows() != ckpt.hidden || ckpt.reasoner.W2.cols() != ckpt.hidden) {
        throw CheckpointError("weight shapes do not match H");
    }
    ckpt.predictor.special = head_from_json(j.at("predictor").at("special"));
    ckpt.predictor.alternative = head_from_json(j.at("predictor").at("alternative"));
    ckpt.predictor.general = head_from_json(j.at("predictor").at("general"));
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const json& config,
                     const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw CheckpointError("cannot write " + path.string());
    out << checkpoint_to_json(ckpt, config).dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CheckpointError("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw CheckpointError(path.string() + ": " + e.what());
    }
    return checkpoint_from_json(j);
}

}  // namespace hopqa
