// Copyright 2026 The MLTQNN Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file circuit.hpp
 * Builders for the location/value encoding circuit, the quantum convolution
 * blocks (with the optional Location Weight Module) and the (I +/- X)
 * measurement family, plus quantum resource accounting.
 */
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mltqnn/statevector.hpp"
#include "mltqnn/tensor.hpp"

namespace mltqnn {

struct CircuitConfig {
    std::size_t grid_log = 3;   ///< processed image is 2^g x 2^g superpixels
    std::size_t features = 9;   ///< E, angles per superpixel (multiple of 3)
    std::size_t blocks = 2;     ///< M, convolution blocks (1 <= M <= g)
    std::size_t kernels = 2;    ///< K, kernels per block (power of two)
    bool lwm_enabled = true;

    /// Throws ErrorKind::Config when an invariant is broken.
    void validate() const;

    [[nodiscard]] std::size_t value_qubits() const noexcept { return features / 3; }
    [[nodiscard]] std::size_t kernel_qubits() const noexcept;
    [[nodiscard]] std::size_t side() const noexcept { return std::size_t{1} << grid_log; }
    [[nodiscard]] std::size_t total_qubits() const noexcept;
};

/// Derives g = log2(N/P); throws ErrorKind::Config unless P divides N and
/// N/P is a power of two.
[[nodiscard]] std::size_t grid_log_for(std::size_t image_size, std::size_t patch_size);

/**
 * @brief Qubit assignment per register.
 *
 * `location` is ordered [x_g .. x_1, y_g .. y_1]; x is the superpixel row.
 */
struct RegisterLayout {
    std::vector<unsigned> location;
    std::vector<unsigned> value;
    std::vector<unsigned> kernel;  ///< kernel[i] carries bit i of the kernel index
    std::vector<unsigned> feature; ///< one per block

    [[nodiscard]] std::size_t grid_log() const noexcept { return location.size() / 2; }
    /// Qubit holding bit j (1-based, j = 1 is least significant) of x / y.
    [[nodiscard]] unsigned x_bit(std::size_t j) const;
    [[nodiscard]] unsigned y_bit(std::size_t j) const;
    [[nodiscard]] std::size_t total_qubits() const noexcept {
        return location.size() + value.size() + kernel.size() + feature.size();
    }
};

[[nodiscard]] RegisterLayout make_layout(const CircuitConfig &config);

struct ResourceReport {
    std::size_t encoding_qubits = 0;
    std::size_t encoding_gate_units = 0;
    std::size_t encoding_hadamards = 0;
    std::size_t encoding_cz = 0;
    std::size_t extraction_qubits = 0;
    std::size_t extraction_gate_units = 0;
    std::size_t extraction_hadamards = 0;
    std::size_t trainable_quantum_params = 0;
    std::size_t total_qubits = 0;
    std::size_t measurement_operators = 0;

    bool operator==(const ResourceReport &) const = default;

    /// `key=value` lines in fixed field order.
    [[nodiscard]] std::string to_key_value() const;
};

/// Hadamards on q_l, then per superpixel location-controlled RX/RY/RZ units
/// and location-conditioned pairwise Z entanglers on q_v. Angles are data
/// slots (x * side + y) * E + feature.
[[nodiscard]] CircuitProgram build_encoding(const CircuitConfig &config,
                                            const RegisterLayout &layout);

/// Hadamards on q_k, pre-block units, M convolution blocks (LWM units, then
/// 4K kernel units per value qubit), post-block units. Parameter slots are
/// numbered in instruction order.
[[nodiscard]] CircuitProgram build_feature_extraction(const CircuitConfig &config,
                                                       const RegisterLayout &layout);

/**
 * @brief Operator family over [x-bits, y-bits, q_k, q_v] (+/- each) and
 * the last q_f qubit (fixed (I - X)).
 *
 * Operator index bits map to the sign list most-significant first; bit value 0
 * means '+'.
 */
[[nodiscard]] std::vector<MeasurementOperator>
build_measurement_operators(const CircuitConfig &config, const RegisterLayout &layout);

/// Applies CZ between every pair of a 3-qubit register to 8 amplitudes.
[[nodiscard]] std::vector<Complex> cz_sign_pattern(std::span<const Complex> amplitudes);

/// Table formulas in terms of N, P, E, M, K.
[[nodiscard]] ResourceReport table_resources(std::size_t image_size,
                                             std::size_t patch_size,
                                             const CircuitConfig &config);

/// Counts taken from the built fragments.
[[nodiscard]] ResourceReport counted_resources(const CircuitConfig &config);

/// Closed-form report; throws if it disagrees with the built circuits.
[[nodiscard]] ResourceReport resource_report(const CircuitConfig &config);

/**
 * @brief Assembled encoding + extraction program with its operator family.
 */
class QuantumFeatureMap {
  public:
    explicit QuantumFeatureMap(const CircuitConfig &config);

    [[nodiscard]] const CircuitConfig &config() const noexcept { return config_; }
    [[nodiscard]] const RegisterLayout &layout() const noexcept { return layout_; }
    [[nodiscard]] const CircuitProgram &program() const noexcept { return program_; }
    [[nodiscard]] const std::vector<MeasurementOperator> &operators() const noexcept {
        return operators_;
    }
    [[nodiscard]] std::size_t num_params() const noexcept { return program_.param_arity(); }
    [[nodiscard]] std::size_t num_features() const noexcept { return operators_.size(); }

    /// Feature vector E(M_i) in operator order.
    [[nodiscard]] std::vector<double> forward(const ProcessedImage &image,
                                              std::span<const double> params) const;

    /// Forward returning the final state as well, for a later adjoint sweep.
    [[nodiscard]] std::vector<double> forward(const ProcessedImage &image,
                                              std::span<const double> params,
                                              QuantumState &final_state) const;

    /// d(sum cotangent_i E(M_i)) w.r.t. params and processed-image angles.
    [[nodiscard]] CircuitGradients backward(const ProcessedImage &image,
                                            std::span<const double> params,
                                            const QuantumState &final_state,
                                            std::span<const double> cotangents) const;

  private:
    void check_image(const ProcessedImage &image) const;

    CircuitConfig config_;
    RegisterLayout layout_;
    CircuitProgram program_;
    std::vector<MeasurementOperator> operators_;
};

/// Free-function form of QuantumFeatureMap::forward.
[[nodiscard]] std::vector<double> quantum_forward(const CircuitConfig &config,
                                                  const ProcessedImage &image,
                                                  std::span<const double> params);

} // namespace mltqnn
