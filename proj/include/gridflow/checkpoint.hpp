#pragma once

#include <cstdint>
#include <string>

#include "gridflow/diffusion.hpp"

namespace gridflow {

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Versioned text checkpoint: architecture, noise-schedule hyperparameters,
// normalization statistics and all parameters (hexfloat, bit-exact). A
// checkpoint is self-sufficient for sampling.
void save_checkpoint(const DecoupledModel& model, double beta_1, double beta_T,
                     const std::string& path);

DecoupledModel load_checkpoint(const std::string& path, double* beta_1 = nullptr,
                               double* beta_T = nullptr);

// FNV-1a over the file bytes; recorded in run manifests.
std::uint64_t file_hash(const std::string& path);

}  // namespace gridflow
