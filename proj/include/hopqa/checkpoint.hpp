#pragma once
// Checkpoint serialization: reasoner weights, predictor heads and the config
// they were trained with, as row-major JSON.

#include "hopqa/predictor.hpp"
#include "hopqa/reasoner.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>

namespace hopqa {

struct Checkpoint {
    int hidden = 0;
    ReasonerParams reasoner;
    PredictorParams predictor;

    static Checkpoint init(int hidden, std::uint64_t seed);
};

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt, const nlohmann::json& config);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Checkpoint& ckpt, const nlohmann::json& config,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hopqa
