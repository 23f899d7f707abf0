#pragma once

#include <string>

#include "json.hpp"
#include "rainshift/datasets/toyworld.hpp"
#include "rainshift/i2i/train.hpp"
#include "rainshift/uda/trainer.hpp"

namespace rainshift::cli {

// Whole-experiment configuration: one file drives every subcommand, command
// line flags override individual fields. Unknown keys are rejected so typos
// fail loudly instead of silently using defaults.
struct ExperimentConfig {
    uint64_t seed = 1;

    datasets::ToyWorldConfig toy;
    int toy_n = 500;
    int toy_eval_n = 0;
    int toy_bridge_n = 150;

    i2i::I2iTrainConfig i2i;
    uda::UdaConfig uda;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

ExperimentConfig load_config(const std::string& path);
void write_resolved_config(const ExperimentConfig& cfg, const std::string& path);

}  // namespace rainshift::cli
