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
#include "mltqnn/circuit.hpp"

#include <bit>
#include <sstream>

#include "mltqnn/error.hpp"

namespace mltqnn {

namespace {

bool is_pow2(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::size_t log2_exact(std::size_t v) {
    return static_cast<std::size_t>(std::countr_zero(v));
}

/// Appends RX, RY, RZ on `target`, all sharing `controls`.
void append_unit(CircuitProgram &prog, unsigned target,
                 const std::vector<Control> &controls, AngleSource rx,
                 AngleSource ry, AngleSource rz) {
    prog.append({GateKind::RX, target, controls, rx});
    prog.append({GateKind::RY, target, controls, ry});
    prog.append({GateKind::RZ, target, controls, rz});
}

void append_trainable_unit(CircuitProgram &prog, unsigned target,
                           const std::vector<Control> &controls,
                           std::size_t &next_param) {
    const std::size_t p = next_param;
    next_param += 3;
    append_unit(prog, target, controls, ParamSlot{p}, ParamSlot{p + 1},
                ParamSlot{p + 2});
}

struct FragmentCounts {
    std::size_t rotations = 0;
    std::size_t hadamards = 0;
    std::size_t controlled_z = 0;
};

FragmentCounts count(const CircuitProgram &prog) {
    FragmentCounts c;
    for (const auto &instr : prog.instructions()) {
        if (is_rotation(instr.kind)) {
            ++c.rotations;
        } else if (instr.kind == GateKind::H) {
            ++c.hadamards;
        } else if (instr.kind == GateKind::Z && !instr.controls.empty()) {
            ++c.controlled_z;
        }
    }
    return c;
}

} // namespace

// ---------------------------------------------------------------------------

std::size_t CircuitConfig::kernel_qubits() const noexcept {
    return is_pow2(kernels) ? log2_exact(kernels) : 0;
}

std::size_t CircuitConfig::total_qubits() const noexcept {
    return 2 * grid_log + value_qubits() + kernel_qubits() + blocks;
}

void CircuitConfig::validate() const {
    require(grid_log >= 1, ErrorKind::Config,
            "grid must have at least 2x2 superpixels (g >= 1)");
    require(features >= 3 && features % 3 == 0, ErrorKind::Config,
            "feature count E must be a positive multiple of 3, got " +
                std::to_string(features));
    require(is_pow2(kernels), ErrorKind::Config,
            "kernel count K must be a power of two, got " +
                std::to_string(kernels));
    require(blocks >= 1 && blocks <= grid_log, ErrorKind::Config,
            "block count M must satisfy 1 <= M <= g = " +
                std::to_string(grid_log) + ", got " + std::to_string(blocks));
    require(total_qubits() <= kMaxQubits, ErrorKind::Config,
            "configuration needs " + std::to_string(total_qubits()) +
                " qubits; the simulator supports at most " +
                std::to_string(kMaxQubits));
}

std::size_t grid_log_for(std::size_t image_size, std::size_t patch_size) {
    require(patch_size >= 1 && image_size >= patch_size &&
                image_size % patch_size == 0,
            ErrorKind::Config,
            "image size " + std::to_string(image_size) +
                " is not divisible by patch size " + std::to_string(patch_size));
    const std::size_t ratio = image_size / patch_size;
    require(is_pow2(ratio), ErrorKind::Config,
            "N/P = " + std::to_string(ratio) + " is not a power of two");
    return log2_exact(ratio);
}

unsigned RegisterLayout::x_bit(std::size_t j) const {
    const std::size_t g = grid_log();
    require(j >= 1 && j <= g, ErrorKind::InvalidArgument, "x bit out of range");
    return location[g - j];
}

unsigned RegisterLayout::y_bit(std::size_t j) const {
    const std::size_t g = grid_log();
    require(j >= 1 && j <= g, ErrorKind::InvalidArgument, "y bit out of range");
    return location[2 * g - j];
}

RegisterLayout make_layout(const CircuitConfig &config) {
    config.validate();
    RegisterLayout layout;
    unsigned next = 0;
    auto take = [&next](std::vector<unsigned> &reg, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            reg.push_back(next++);
        }
    };
    take(layout.location, 2 * config.grid_log);
    take(layout.value, config.value_qubits());
    take(layout.kernel, config.kernel_qubits());
    take(layout.feature, config.blocks);
    return layout;
}

std::string ResourceReport::to_key_value() const {
    std::ostringstream os;
    os << "encoding_qubits=" << encoding_qubits << '\n'
       << "encoding_gate_units=" << encoding_gate_units << '\n'
       << "encoding_hadamards=" << encoding_hadamards << '\n'
       << "encoding_cz=" << encoding_cz << '\n'
       << "extraction_qubits=" << extraction_qubits << '\n'
       << "extraction_gate_units=" << extraction_gate_units << '\n'
       << "extraction_hadamards=" << extraction_hadamards << '\n'
       << "trainable_quantum_params=" << trainable_quantum_params << '\n'
       << "total_qubits=" << total_qubits << '\n'
       << "measurement_operators=" << measurement_operators << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// Encoding

CircuitProgram build_encoding(const CircuitConfig &config,
                              const RegisterLayout &layout) {
    config.validate();
    require(layout.grid_log() == config.grid_log &&
                layout.value.size() == config.value_qubits() &&
                layout.total_qubits() == config.total_qubits(),
            ErrorKind::Config, "register layout does not match configuration");

    const std::size_t g = config.grid_log;
    const std::size_t side = config.side();
    const std::size_t e = config.features;
    CircuitProgram prog(layout.total_qubits());

    for (unsigned q : layout.location) {
        prog.append({GateKind::H, q, {}, std::monostate{}});
    }

    std::vector<Control> where;
    where.reserve(2 * g + 1);
    for (std::size_t x = 0; x < side; ++x) {
        for (std::size_t y = 0; y < side; ++y) {
            where.clear();
            for (std::size_t j = 1; j <= g; ++j) {
                where.push_back({layout.x_bit(j), ((x >> (j - 1)) & 1U) != 0});
            }
            for (std::size_t j = 1; j <= g; ++j) {
                where.push_back({layout.y_bit(j), ((y >> (j - 1)) & 1U) != 0});
            }
            const std::size_t base = (x * side + y) * e;
            for (std::size_t n = 0; n < layout.value.size(); ++n) {
                append_unit(prog, layout.value[n], where, DataSlot{base + 3 * n},
                            DataSlot{base + 3 * n + 1}, DataSlot{base + 3 * n + 2});
            }
            // CZ on each value-qubit pair, restricted to this location branch.
            for (std::size_t a = 0; a < layout.value.size(); ++a) {
                for (std::size_t b = a + 1; b < layout.value.size(); ++b) {
                    auto controls = where;
                    controls.push_back({layout.value[a], true});
                    prog.append({GateKind::Z, layout.value[b], std::move(controls),
                                 std::monostate{}});
                }
            }
        }
    }
    prog.set_data_arity(side * side * e);
    return prog;
}

std::vector<Complex> cz_sign_pattern(std::span<const Complex> amplitudes) {
    require(amplitudes.size() == 8, ErrorKind::InvalidArgument,
            "cz_sign_pattern expects 8 amplitudes (3 qubits)");
    std::vector<Complex> out(amplitudes.begin(), amplitudes.end());
    for (unsigned idx = 0; idx < 8; ++idx) {
        const unsigned b0 = idx & 1U;
        const unsigned b1 = (idx >> 1) & 1U;
        const unsigned b2 = (idx >> 2) & 1U;
        if (((b0 & b1) ^ (b0 & b2) ^ (b1 & b2)) != 0U) {
            out[idx] = -out[idx];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Feature extraction

CircuitProgram build_feature_extraction(const CircuitConfig &config,
                                        const RegisterLayout &layout) {
    config.validate();
    require(layout.total_qubits() == config.total_qubits() &&
                layout.feature.size() == config.blocks &&
                layout.kernel.size() == config.kernel_qubits(),
            ErrorKind::Config, "register layout does not match configuration");

    CircuitProgram prog(layout.total_qubits());
    std::size_t next_param = 0;

    for (unsigned q : layout.kernel) {
        prog.append({GateKind::H, q, {}, std::monostate{}});
    }
    for (unsigned q : layout.value) {
        append_trainable_unit(prog, q, {}, next_param);
    }

    std::vector<Control> controls;
    for (std::size_t b = 1; b <= config.blocks; ++b) {
        const unsigned xq = layout.x_bit(b);
        const unsigned yq = layout.y_bit(b);
        const unsigned out = layout.feature[b - 1];
        for (unsigned vq : layout.value) {
            if (config.lwm_enabled) {
                append_trainable_unit(prog, xq, {}, next_param);
                append_trainable_unit(prog, yq, {}, next_param);
            }
            for (std::size_t kappa = 0; kappa < config.kernels; ++kappa) {
                // window position W_0..W_3 = (x_b, y_b) in 00, 01, 10, 11
                for (unsigned w = 0; w < 4; ++w) {
                    controls.clear();
                    controls.push_back({xq, (w & 2U) != 0});
                    controls.push_back({yq, (w & 1U) != 0});
                    controls.push_back({vq, true});
                    for (std::size_t i = 0; i < layout.kernel.size(); ++i) {
                        controls.push_back({layout.kernel[i], ((kappa >> i) & 1U) != 0});
                    }
                    if (b > 1) {
                        controls.push_back({layout.feature[b - 2], true});
                    }
                    append_trainable_unit(prog, out, controls, next_param);
                }
            }
        }
    }
    for (unsigned q : layout.value) {
        append_trainable_unit(prog, q, {}, next_param);
    }
    prog.set_param_arity(next_param);
    return prog;
}

// ---------------------------------------------------------------------------
// Measurement

std::vector<MeasurementOperator>
build_measurement_operators(const CircuitConfig &config,
                            const RegisterLayout &layout) {
    config.validate();
    const std::size_t g = config.grid_log;
    const std::size_t m_blocks = config.blocks;

    std::vector<unsigned> free_qubits; // most significant sign bit first
    for (std::size_t j = g; j > m_blocks; --j) {
        free_qubits.push_back(layout.x_bit(j));
    }
    for (std::size_t j = g; j > m_blocks; --j) {
        free_qubits.push_back(layout.y_bit(j));
    }
    free_qubits.insert(free_qubits.end(), layout.kernel.begin(), layout.kernel.end());
    free_qubits.insert(free_qubits.end(), layout.value.begin(), layout.value.end());

    const std::size_t nfree = free_qubits.size();
    const std::size_t count = std::size_t{1} << nfree;
    std::vector<MeasurementOperator> ops;
    ops.reserve(count);
    for (std::size_t idx = 0; idx < count; ++idx) {
        MeasurementOperator op;
        op.qubits = free_qubits;
        op.qubits.push_back(layout.feature.back());
        for (std::size_t k = 0; k < nfree; ++k) {
            const bool minus = ((idx >> (nfree - 1 - k)) & 1U) != 0;
            op.signs.push_back(minus ? -1 : 1);
        }
        op.signs.push_back(-1);
        ops.push_back(std::move(op));
    }
    return ops;
}

// ---------------------------------------------------------------------------
// Resources

ResourceReport table_resources(std::size_t image_size, std::size_t patch_size,
                               const CircuitConfig &config) {
    config.validate();
    const std::size_t n = image_size;
    const std::size_t p = patch_size;
    const std::size_t e = config.features;
    const std::size_t m = config.blocks;
    const std::size_t k = config.kernels;
    const std::size_t log_np = log2_exact(n / p);
    const std::size_t log_k = log2_exact(k);
    const std::size_t lwm = config.lwm_enabled ? 1 : 0;

    ResourceReport r;
    r.encoding_qubits = 2 * log_np + e / 3;
    r.encoding_gate_units = e * n * n / (3 * p * p);
    r.encoding_hadamards = 2 * log_np;
    r.encoding_cz = n * n * e * (e - 3) / (18 * p * p);
    r.extraction_qubits = m + log_k;
    r.extraction_gate_units = (4 * m * k * e + 2 * lwm * m * e + 2 * e) / 3;
    r.extraction_hadamards = log_k;
    r.trainable_quantum_params = 3 * r.extraction_gate_units;
    r.total_qubits = r.encoding_qubits + r.extraction_qubits;
    r.measurement_operators =
        std::size_t{1} << (2 * (log_np - m) + e / 3 + log_k);
    return r;
}

ResourceReport counted_resources(const CircuitConfig &config) {
    const RegisterLayout layout = make_layout(config);
    const CircuitProgram enc = build_encoding(config, layout);
    const CircuitProgram ext = build_feature_extraction(config, layout);
    const FragmentCounts ce = count(enc);
    const FragmentCounts cx = count(ext);

    ResourceReport r;
    r.encoding_qubits = layout.location.size() + layout.value.size();
    r.encoding_gate_units = ce.rotations / 3;
    r.encoding_hadamards = ce.hadamards;
    r.encoding_cz = ce.controlled_z;
    r.extraction_qubits = layout.kernel.size() + layout.feature.size();
    r.extraction_gate_units = cx.rotations / 3;
    r.extraction_hadamards = cx.hadamards;
    r.trainable_quantum_params = ext.param_arity();
    r.total_qubits = layout.total_qubits();
    r.measurement_operators = build_measurement_operators(config, layout).size();
    return r;
}

ResourceReport resource_report(const CircuitConfig &config) {
    // Any N, P with N/P = 2^g gives the same counts.
    const std::size_t patch = 1;
    const std::size_t image = std::size_t{1} << config.grid_log;
    const ResourceReport formulas = table_resources(image, patch, config);
    const ResourceReport counted = counted_resources(config);
    require(formulas == counted, ErrorKind::Config,
            "built circuits disagree with the closed-form resource counts");
    return formulas;
}

// ---------------------------------------------------------------------------
// QuantumFeatureMap

QuantumFeatureMap::QuantumFeatureMap(const CircuitConfig &config)
    : config_(config), layout_(make_layout(config)),
      program_(build_encoding(config, layout_)),
      operators_(build_measurement_operators(config, layout_)) {
    program_.extend(build_feature_extraction(config, layout_));
    program_.validate();
}

void QuantumFeatureMap::check_image(const ProcessedImage &image) const {
    require(image.side == config_.side() && image.features == config_.features &&
                image.angles.size() == program_.data_arity(),
            ErrorKind::InvalidArgument,
            "processed image shape does not match the circuit configuration");
}

std::vector<double> QuantumFeatureMap::forward(const ProcessedImage &image,
                                               std::span<const double> params) const {
    QuantumState state(program_.num_qubits());
    return forward(image, params, state);
}

std::vector<double> QuantumFeatureMap::forward(const ProcessedImage &image,
                                               std::span<const double> params,
                                               QuantumState &final_state) const {
    check_image(image);
    if (final_state.num_qubits() != program_.num_qubits()) {
        final_state = QuantumState(program_.num_qubits());
    }
    run_circuit_into(final_state, program_, image.angles, params);
    return expectations(final_state, operators_);
}

CircuitGradients QuantumFeatureMap::backward(const ProcessedImage &image,
                                             std::span<const double> params,
                                             const QuantumState &final_state,
                                             std::span<const double> cotangents) const {
    check_image(image);
    return adjoint_gradients(program_, image.angles, params, final_state,
                             operators_, cotangents);
}

std::vector<double> quantum_forward(const CircuitConfig &config,
                                    const ProcessedImage &image,
                                    std::span<const double> params) {
    return QuantumFeatureMap(config).forward(image, params);
}

} // namespace mltqnn
