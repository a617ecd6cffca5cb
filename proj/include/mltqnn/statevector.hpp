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
 * @file statevector.hpp
 * Dense statevector simulation with multi-controlled rotation gates,
 * (I +/- X) product observables and adjoint-mode gradients.
 *
 * Basis indexing is little-endian: qubit q contributes bit q of the basis
 * index. Rotations follow R_A(theta) = exp(-i theta A / 2).
 */
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

namespace mltqnn {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 30;

class QuantumState {
  public:
    /// |0...0> on `num_qubits` qubits; throws outside [1, kMaxQubits].
    explicit QuantumState(std::size_t num_qubits);

    [[nodiscard]] std::size_t num_qubits() const noexcept { return num_qubits_; }
    [[nodiscard]] std::size_t size() const noexcept { return amps_.size(); }

    [[nodiscard]] std::span<const Complex> amplitudes() const noexcept {
        return amps_;
    }
    [[nodiscard]] std::span<Complex> amplitudes() noexcept { return amps_; }

    [[nodiscard]] double norm_squared() const noexcept;

    /// Resets to |0...0> without reallocating.
    void reset() noexcept;

    /// Text dump: one "index real imag" line per amplitude, 17 significant
    /// digits.
    void dump(std::ostream &os) const;

  private:
    std::size_t num_qubits_;
    std::vector<Complex> amps_;
};

/// Same as QuantumState(n); kept for symmetry with the other free functions.
[[nodiscard]] QuantumState new_zero_state(std::size_t num_qubits);

enum class GateKind : std::uint8_t { H, X, Z, RX, RY, RZ };

[[nodiscard]] constexpr bool is_rotation(GateKind k) noexcept {
    return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ;
}

struct Control {
    unsigned qubit;
    bool value; ///< required basis value of the control qubit
};

struct ConstantAngle {
    double radians;
};
struct DataSlot {
    std::size_t index;
};
struct ParamSlot {
    std::size_t index;
};

using AngleSource = std::variant<std::monostate, ConstantAngle, DataSlot, ParamSlot>;

struct GateInstruction {
    GateKind kind;
    unsigned target;
    std::vector<Control> controls;
    AngleSource angle;
};

/**
 * @brief Ordered gate list with data/parameter arities.
 *
 * `append` validates each instruction against the invariants: indices in
 * range, target not a control, distinct controls, rotations carry exactly
 * one angle source, and every parameter slot is bound at most once.
 */
class CircuitProgram {
  public:
    explicit CircuitProgram(std::size_t num_qubits);

    void append(GateInstruction instr);

    /// Appends every instruction of `other` (same qubit count required).
    void extend(const CircuitProgram &other);

    /// Grows the arities; slots referenced by appended gates must stay below
    /// them.
    void set_data_arity(std::size_t n);
    void set_param_arity(std::size_t n);

    [[nodiscard]] std::size_t num_qubits() const noexcept { return num_qubits_; }
    [[nodiscard]] std::size_t data_arity() const noexcept { return data_arity_; }
    [[nodiscard]] std::size_t param_arity() const noexcept { return param_arity_; }
    [[nodiscard]] const std::vector<GateInstruction> &instructions() const noexcept {
        return instructions_;
    }

    /// Checks arities against all referenced slots; throws on violation.
    void validate() const;

  private:
    std::size_t num_qubits_;
    std::size_t data_arity_ = 0;
    std::size_t param_arity_ = 0;
    std::vector<GateInstruction> instructions_;
    std::vector<bool> param_used_;
};

/// Product of (I + sign_i X_{q_i}) over the measured qubits.
struct MeasurementOperator {
    std::vector<unsigned> qubits;
    std::vector<int> signs; ///< +1 or -1 per measured qubit
};

/// Resolves the angle of a rotation against data/params; throws on a
/// missing slot or a non-finite value.
[[nodiscard]] double resolve_angle(const GateInstruction &instr,
                                   std::span<const double> data,
                                   std::span<const double> params);

/// Applies `instr` in place. `adjoint` applies the inverse gate.
void apply_gate(QuantumState &state, const GateInstruction &instr,
                std::span<const double> data, std::span<const double> params,
                bool adjoint = false);

/// Applies a gate whose angle is already resolved.
void apply_resolved(QuantumState &state, const GateInstruction &instr,
                    double angle);

[[nodiscard]] QuantumState run_circuit(const CircuitProgram &program,
                                       std::span<const double> data,
                                       std::span<const double> params);

/// In-place variant reusing `state`'s storage.
void run_circuit_into(QuantumState &state, const CircuitProgram &program,
                      std::span<const double> data,
                      std::span<const double> params);

[[nodiscard]] double expectation(const QuantumState &state,
                                 const MeasurementOperator &op);

/// Expectations of all operators; operators sharing one qubit list are
/// evaluated from a single marginal distribution.
[[nodiscard]] std::vector<double>
expectations(const QuantumState &state, std::span<const MeasurementOperator> ops);

struct CircuitGradients {
    std::vector<double> params; ///< d/d params, length param_arity
    std::vector<double> data;   ///< d/d data,   length data_arity
};

/**
 * @brief Gradient of sum_i cotangents[i] * <psi|ops[i]|psi> with respect to
 * every parameter and data slot.
 *
 * One backward sweep from `final_state`, which must be the output of
 * run_circuit on the same program/data/params.
 */
[[nodiscard]] CircuitGradients
adjoint_gradients(const CircuitProgram &program, std::span<const double> data,
                  std::span<const double> params, const QuantumState &final_state,
                  std::span<const MeasurementOperator> ops,
                  std::span<const double> cotangents);

/// Convenience overload running the forward pass itself.
[[nodiscard]] CircuitGradients
adjoint_gradients(const CircuitProgram &program, std::span<const double> data,
                  std::span<const double> params,
                  std::span<const MeasurementOperator> ops,
                  std::span<const double> cotangents);

} // namespace mltqnn
