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
 * @file circuit_oracle.hpp
 * Closed-form amplitudes of the encoded image state: for every location
 * branch, the tensor product of RZ.RY.RX|0> value-qubit states with the
 * pairwise-CZ sign pattern, weighted 1/2^g. No circuit is simulated.
 */
#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "dense_oracle.hpp"
#include "mltqnn/circuit.hpp"

namespace circuit_oracle {

using Complex = std::complex<double>;

/// RZ(c) RY(b) RX(a) |0>
inline std::array<Complex, 2> value_qubit(double a, double b, double c) {
    using oracle::rotation;
    std::vector<Complex> v{1.0, 0.0};
    for (const auto &m : {rotation(oracle::pauli_x(), a), rotation(oracle::pauli_y(), b),
                          rotation(oracle::pauli_z(), c)}) {
        v = oracle::matvec(m, v);
    }
    return {v[0], v[1]};
}

inline std::vector<Complex> encoded_state(const mltqnn::CircuitConfig &c,
                                          const mltqnn::RegisterLayout &layout,
                                          std::span<const double> data) {
    const std::size_t g = c.grid_log;
    const std::size_t side = std::size_t{1} << g;
    const std::size_t nv = c.features / 3;
    std::vector<Complex> psi(std::size_t{1} << layout.total_qubits(), Complex{});
    const double weight = 1.0 / static_cast<double>(side);

    for (std::size_t x = 0; x < side; ++x) {
        for (std::size_t y = 0; y < side; ++y) {
            std::size_t loc = 0;
            for (std::size_t j = 1; j <= g; ++j) {
                loc |= ((x >> (j - 1)) & 1U) << layout.x_bit(j);
                loc |= ((y >> (j - 1)) & 1U) << layout.y_bit(j);
            }
            const std::size_t base = (x * side + y) * c.features;
            std::vector<std::array<Complex, 2>> qubits;
            for (std::size_t n = 0; n < nv; ++n) {
                qubits.push_back(value_qubit(data[base + 3 * n], data[base + 3 * n + 1],
                                             data[base + 3 * n + 2]));
            }
            for (std::size_t v = 0; v < (std::size_t{1} << nv); ++v) {
                Complex amp = weight;
                int ones_pairs = 0;
                std::size_t idx = loc;
                for (std::size_t n = 0; n < nv; ++n) {
                    const std::size_t bit = (v >> n) & 1U;
                    amp *= qubits[n][bit];
                    idx |= bit << layout.value[n];
                    for (std::size_t m = n + 1; m < nv; ++m) {
                        ones_pairs += static_cast<int>(bit & ((v >> m) & 1U));
                    }
                }
                psi[idx] = (ones_pairs % 2 == 0) ? amp : -amp;
            }
        }
    }
    return psi;
}

} // namespace circuit_oracle
