#ifndef BRIDGEMC_HARNESS_DATASET_IO_HPP_
#define BRIDGEMC_HARNESS_DATASET_IO_HPP_

#include <string>

#include "bridgemc/model.hpp"

namespace bridgemc::harness {

// CSV with header t,y_0..,x_0.. (x columns present when the latent truth is
// known) plus a JSON sidecar <path>.meta.json holding the model name,
// theta_true and seed. Floats are written with 17 significant digits, so the
// same dataset always produces the same bytes.
void write_dataset(const std::string& path, const Dataset& data, const std::string& model_name);

// Reads a dataset written by write_dataset; the sidecar is optional.
Dataset read_dataset(const std::string& path);

}  // namespace bridgemc::harness

#endif  // BRIDGEMC_HARNESS_DATASET_IO_HPP_
