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
#include "mltqnn/statevector.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <string>

#include "mltqnn/error.hpp"

namespace mltqnn {

namespace {

using Index = std::uint64_t;

/**
 * Enumerates the basis-index pairs (i0, i1) a (controlled) single-qubit gate
 * touches: target bit 0/1, control bits fixed at their required values, all
 * other bits free. Only 2^(n - 1 - #controls) pairs are visited.
 */
class PairSpace {
  public:
    PairSpace(std::size_t num_qubits, unsigned target,
              const std::vector<Control> &controls)
        : target_bit_(Index{1} << target) {
        fixed_[0] = target;
        nfixed_ = 1;
        for (const auto &c : controls) {
            fixed_[nfixed_++] = c.qubit;
            if (c.value) {
                base_ |= Index{1} << c.qubit;
            }
        }
        std::sort(fixed_.begin(), fixed_.begin() + nfixed_);
        count_ = Index{1} << (num_qubits - nfixed_);
    }

    [[nodiscard]] Index count() const noexcept { return count_; }
    [[nodiscard]] Index target_bit() const noexcept { return target_bit_; }

    /// Index with target bit 0 for the i-th free-bit assignment.
    [[nodiscard]] Index low(Index i) const noexcept {
        for (unsigned k = 0; k < nfixed_; ++k) {
            const unsigned p = fixed_[k];
            i = ((i >> p) << (p + 1)) | (i & ((Index{1} << p) - 1));
        }
        return i | base_;
    }

  private:
    std::array<unsigned, kMaxQubits + 1> fixed_{};
    unsigned nfixed_ = 0;
    Index base_ = 0;
    Index target_bit_;
    Index count_ = 0;
};

using Mat2 = std::array<Complex, 4>; // row-major 2x2

Mat2 gate_matrix(GateKind kind, double angle) {
    const double c = std::cos(angle / 2);
    const double s = std::sin(angle / 2);
    const Complex i{0.0, 1.0};
    switch (kind) {
    case GateKind::H: {
        const double r = 1.0 / std::sqrt(2.0);
        return {r, r, r, -r};
    }
    case GateKind::X:
        return {0.0, 1.0, 1.0, 0.0};
    case GateKind::Z:
        return {1.0, 0.0, 0.0, -1.0};
    case GateKind::RX:
        return {c, -i * s, -i * s, c};
    case GateKind::RY:
        return {c, -s, s, c};
    case GateKind::RZ:
        return {Complex{c, -s}, 0.0, 0.0, Complex{c, s}};
    }
    return {1.0, 0.0, 0.0, 1.0};
}

void apply_matrix(std::span<Complex> amps, const PairSpace &space,
                  const Mat2 &u) {
    const Index tb = space.target_bit();
    const Index n = space.count();
    for (Index k = 0; k < n; ++k) {
        const Index i0 = space.low(k);
        const Index i1 = i0 | tb;
        const Complex a0 = amps[i0];
        const Complex a1 = amps[i1];
        amps[i0] = u[0] * a0 + u[1] * a1;
        amps[i1] = u[2] * a0 + u[3] * a1;
    }
}

void apply_hadamard_all(std::span<Complex> amps, std::size_t num_qubits,
                        std::span<const unsigned> qubits) {
    const Mat2 h = gate_matrix(GateKind::H, 0.0);
    for (unsigned q : qubits) {
        apply_matrix(amps, PairSpace(num_qubits, q, {}), h);
    }
}

void check_operator(const MeasurementOperator &op, std::size_t num_qubits) {
    require(op.qubits.size() == op.signs.size(), ErrorKind::InvalidArgument,
            "measurement operator: qubit/sign length mismatch");
    Index seen = 0;
    for (std::size_t k = 0; k < op.qubits.size(); ++k) {
        const unsigned q = op.qubits[k];
        require(q < num_qubits, ErrorKind::InvalidArgument,
                "measurement operator: qubit index out of range");
        require((seen & (Index{1} << q)) == 0, ErrorKind::InvalidArgument,
                "measurement operator: repeated qubit");
        seen |= Index{1} << q;
        require(op.signs[k] == 1 || op.signs[k] == -1,
                ErrorKind::InvalidArgument,
                "measurement operator: sign must be +1 or -1");
    }
}

/// Pattern bit k is set when op.signs[k] is -1 ((I - X) projects onto |->,
/// which H maps to |1>).
std::size_t sign_pattern(const MeasurementOperator &op) {
    std::size_t pattern = 0;
    for (std::size_t k = 0; k < op.signs.size(); ++k) {
        if (op.signs[k] < 0) {
            pattern |= std::size_t{1} << k;
        }
    }
    return pattern;
}

std::size_t marginal_pattern(Index idx, std::span<const unsigned> qubits) {
    std::size_t pattern = 0;
    for (std::size_t k = 0; k < qubits.size(); ++k) {
        pattern |= static_cast<std::size_t>((idx >> qubits[k]) & 1U) << k;
    }
    return pattern;
}

/// Groups operator indices by their measured-qubit list.
std::map<std::vector<unsigned>, std::vector<std::size_t>>
group_by_qubits(std::span<const MeasurementOperator> ops) {
    std::map<std::vector<unsigned>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        groups[ops[i].qubits].push_back(i);
    }
    return groups;
}

/// out += (sum_i weights[i] * ops[i]) |state>
void apply_observable_sum(const QuantumState &state,
                          std::span<const MeasurementOperator> ops,
                          std::span<const double> weights,
                          std::span<Complex> out) {
    const std::size_t n = state.num_qubits();
    std::vector<Complex> scratch(state.size());
    for (const auto &[qubits, members] : group_by_qubits(ops)) {
        const std::size_t m = qubits.size();
        const double scale = std::ldexp(1.0, static_cast<int>(m));
        std::vector<double> w(std::size_t{1} << m, 0.0);
        for (std::size_t i : members) {
            w[sign_pattern(ops[i])] += weights[i] * scale;
        }
        std::copy(state.amplitudes().begin(), state.amplitudes().end(),
                  scratch.begin());
        apply_hadamard_all(scratch, n, qubits);
        for (Index idx = 0; idx < scratch.size(); ++idx) {
            scratch[idx] *= w[marginal_pattern(idx, qubits)];
        }
        apply_hadamard_all(scratch, n, qubits);
        for (std::size_t idx = 0; idx < scratch.size(); ++idx) {
            out[idx] += scratch[idx];
        }
    }
}

/// Im <lambda| P_c G |phi> for the generator G of a (controlled) rotation.
double generator_overlap(const PairSpace &space, GateKind kind,
                         std::span<const Complex> lambda,
                         std::span<const Complex> phi) {
    const Index tb = space.target_bit();
    const Index n = space.count();
    Complex acc{0.0, 0.0};
    for (Index k = 0; k < n; ++k) {
        const Index i0 = space.low(k);
        const Index i1 = i0 | tb;
        const Complex p0 = phi[i0];
        const Complex p1 = phi[i1];
        Complex g0;
        Complex g1;
        switch (kind) {
        case GateKind::RX:
            g0 = p1;
            g1 = p0;
            break;
        case GateKind::RY:
            g0 = Complex{p1.imag(), -p1.real()}; // -i p1
            g1 = Complex{-p0.imag(), p0.real()}; //  i p0
            break;
        default: // RZ
            g0 = p0;
            g1 = -p1;
            break;
        }
        acc += std::conj(lambda[i0]) * g0 + std::conj(lambda[i1]) * g1;
    }
    return acc.imag();
}

void check_instruction(const GateInstruction &instr, std::size_t num_qubits) {
    require(instr.target < num_qubits, ErrorKind::InvalidArgument,
            "gate target index out of range");
    Index seen = Index{1} << instr.target;
    for (const auto &c : instr.controls) {
        require(c.qubit < num_qubits, ErrorKind::InvalidArgument,
                "gate control index out of range");
        require((seen & (Index{1} << c.qubit)) == 0, ErrorKind::InvalidArgument,
                "gate control repeats the target or another control");
        seen |= Index{1} << c.qubit;
    }
    const bool has_angle = !std::holds_alternative<std::monostate>(instr.angle);
    require(has_angle == is_rotation(instr.kind), ErrorKind::InvalidArgument,
            "rotation gates need exactly one angle source; H/X/Z take none");
}

} // namespace

// ---------------------------------------------------------------------------
// QuantumState

QuantumState::QuantumState(std::size_t num_qubits) : num_qubits_(num_qubits) {
    require(num_qubits >= 1 && num_qubits <= kMaxQubits,
            ErrorKind::InvalidArgument,
            "number of qubits must lie in [1, " + std::to_string(kMaxQubits) +
                "], got " + std::to_string(num_qubits));
    amps_.assign(std::size_t{1} << num_qubits, Complex{0.0, 0.0});
    amps_[0] = 1.0;
}

double QuantumState::norm_squared() const noexcept {
    double acc = 0.0;
    for (const auto &a : amps_) {
        acc += std::norm(a);
    }
    return acc;
}

void QuantumState::reset() noexcept {
    std::fill(amps_.begin(), amps_.end(), Complex{0.0, 0.0});
    amps_[0] = 1.0;
}

void QuantumState::dump(std::ostream &os) const {
    const auto old_flags = os.flags();
    const auto old_prec = os.precision();
    os << std::setprecision(17);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        os << i << ' ' << amps_[i].real() << ' ' << amps_[i].imag() << '\n';
    }
    os.flags(old_flags);
    os.precision(old_prec);
}

QuantumState new_zero_state(std::size_t num_qubits) {
    return QuantumState(num_qubits);
}

// ---------------------------------------------------------------------------
// CircuitProgram

CircuitProgram::CircuitProgram(std::size_t num_qubits) : num_qubits_(num_qubits) {
    require(num_qubits >= 1 && num_qubits <= kMaxQubits,
            ErrorKind::InvalidArgument, "circuit qubit count out of range");
}

void CircuitProgram::append(GateInstruction instr) {
    check_instruction(instr, num_qubits_);
    if (const auto *d = std::get_if<DataSlot>(&instr.angle)) {
        data_arity_ = std::max(data_arity_, d->index + 1);
    } else if (const auto *p = std::get_if<ParamSlot>(&instr.angle)) {
        if (p->index >= param_used_.size()) {
            param_used_.resize(p->index + 1, false);
        }
        require(!param_used_[p->index], ErrorKind::InvalidArgument,
                "parameter slot " + std::to_string(p->index) +
                    " bound to more than one gate");
        param_used_[p->index] = true;
        param_arity_ = std::max(param_arity_, p->index + 1);
    }
    instructions_.push_back(std::move(instr));
}

void CircuitProgram::extend(const CircuitProgram &other) {
    require(other.num_qubits_ == num_qubits_, ErrorKind::InvalidArgument,
            "cannot concatenate programs over different qubit counts");
    for (const auto &instr : other.instructions_) {
        append(instr);
    }
    data_arity_ = std::max(data_arity_, other.data_arity_);
    param_arity_ = std::max(param_arity_, other.param_arity_);
}

void CircuitProgram::set_data_arity(std::size_t n) {
    require(n >= data_arity_, ErrorKind::InvalidArgument,
            "data arity below a referenced slot");
    data_arity_ = n;
}

void CircuitProgram::set_param_arity(std::size_t n) {
    require(n >= param_arity_, ErrorKind::InvalidArgument,
            "param arity below a referenced slot");
    param_arity_ = n;
}

void CircuitProgram::validate() const {
    std::vector<bool> used(param_arity_, false);
    for (const auto &instr : instructions_) {
        check_instruction(instr, num_qubits_);
        if (const auto *d = std::get_if<DataSlot>(&instr.angle)) {
            require(d->index < data_arity_, ErrorKind::InvalidArgument,
                    "data slot beyond data arity");
        } else if (const auto *p = std::get_if<ParamSlot>(&instr.angle)) {
            require(p->index < param_arity_, ErrorKind::InvalidArgument,
                    "param slot beyond param arity");
            require(!used[p->index], ErrorKind::InvalidArgument,
                    "parameter slot shared between gates");
            used[p->index] = true;
        }
    }
}

// ---------------------------------------------------------------------------
// Gate application

double resolve_angle(const GateInstruction &instr, std::span<const double> data,
                     std::span<const double> params) {
    double angle = 0.0;
    if (const auto *c = std::get_if<ConstantAngle>(&instr.angle)) {
        angle = c->radians;
    } else if (const auto *d = std::get_if<DataSlot>(&instr.angle)) {
        require(d->index < data.size(), ErrorKind::InvalidArgument,
                "unresolved data slot " + std::to_string(d->index));
        angle = data[d->index];
    } else if (const auto *p = std::get_if<ParamSlot>(&instr.angle)) {
        require(p->index < params.size(), ErrorKind::InvalidArgument,
                "unresolved parameter slot " + std::to_string(p->index));
        angle = params[p->index];
    } else {
        return 0.0;
    }
    require(std::isfinite(angle), ErrorKind::Numeric, "non-finite gate angle");
    return angle;
}

void apply_resolved(QuantumState &state, const GateInstruction &instr,
                    double angle) {
    check_instruction(instr, state.num_qubits());
    const PairSpace space(state.num_qubits(), instr.target, instr.controls);
    apply_matrix(state.amplitudes(), space, gate_matrix(instr.kind, angle));
}

void apply_gate(QuantumState &state, const GateInstruction &instr,
                std::span<const double> data, std::span<const double> params,
                bool adjoint) {
    const double angle = resolve_angle(instr, data, params);
    apply_resolved(state, instr, adjoint ? -angle : angle);
}

void run_circuit_into(QuantumState &state, const CircuitProgram &program,
                      std::span<const double> data,
                      std::span<const double> params) {
    require(state.num_qubits() == program.num_qubits(),
            ErrorKind::InvalidArgument, "state/program qubit count mismatch");
    require(data.size() == program.data_arity(), ErrorKind::InvalidArgument,
            "data length " + std::to_string(data.size()) +
                " != data arity " + std::to_string(program.data_arity()));
    require(params.size() == program.param_arity(), ErrorKind::InvalidArgument,
            "params length " + std::to_string(params.size()) +
                " != param arity " + std::to_string(program.param_arity()));
    state.reset();
    const std::size_t n = state.num_qubits();
    for (const auto &instr : program.instructions()) {
        const double angle = resolve_angle(instr, data, params);
        const PairSpace space(n, instr.target, instr.controls);
        apply_matrix(state.amplitudes(), space, gate_matrix(instr.kind, angle));
    }
}

QuantumState run_circuit(const CircuitProgram &program,
                         std::span<const double> data,
                         std::span<const double> params) {
    QuantumState state(program.num_qubits());
    run_circuit_into(state, program, data, params);
    return state;
}

// ---------------------------------------------------------------------------
// Observables

double expectation(const QuantumState &state, const MeasurementOperator &op) {
    return expectations(state, std::span(&op, 1)).front();
}

std::vector<double> expectations(const QuantumState &state,
                                 std::span<const MeasurementOperator> ops) {
    for (const auto &op : ops) {
        check_operator(op, state.num_qubits());
    }
    std::vector<double> out(ops.size(), 0.0);
    std::vector<Complex> scratch(state.size());
    for (const auto &[qubits, members] : group_by_qubits(ops)) {
        std::copy(state.amplitudes().begin(), state.amplitudes().end(),
                  scratch.begin());
        apply_hadamard_all(scratch, state.num_qubits(), qubits);
        std::vector<double> marginal(std::size_t{1} << qubits.size(), 0.0);
        for (Index idx = 0; idx < scratch.size(); ++idx) {
            marginal[marginal_pattern(idx, qubits)] += std::norm(scratch[idx]);
        }
        const double scale = std::ldexp(1.0, static_cast<int>(qubits.size()));
        for (std::size_t i : members) {
            out[i] = scale * marginal[sign_pattern(ops[i])];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Adjoint differentiation

CircuitGradients adjoint_gradients(const CircuitProgram &program,
                                   std::span<const double> data,
                                   std::span<const double> params,
                                   const QuantumState &final_state,
                                   std::span<const MeasurementOperator> ops,
                                   std::span<const double> cotangents) {
    require(cotangents.size() == ops.size(), ErrorKind::InvalidArgument,
            "cotangent count must equal operator count");
    for (double c : cotangents) {
        require(std::isfinite(c), ErrorKind::Numeric, "non-finite cotangent");
    }
    require(final_state.num_qubits() == program.num_qubits(),
            ErrorKind::InvalidArgument, "state/program qubit count mismatch");
    require(data.size() == program.data_arity() &&
                params.size() == program.param_arity(),
            ErrorKind::InvalidArgument, "data/params arity mismatch");
    for (const auto &op : ops) {
        check_operator(op, program.num_qubits());
    }

    CircuitGradients grads{std::vector<double>(program.param_arity(), 0.0),
                           std::vector<double>(program.data_arity(), 0.0)};
    if (program.param_arity() == 0 && program.data_arity() == 0) {
        return grads;
    }

    const std::size_t n = program.num_qubits();
    QuantumState phi = final_state;
    QuantumState lambda(n);
    std::fill(lambda.amplitudes().begin(), lambda.amplitudes().end(),
              Complex{0.0, 0.0});
    apply_observable_sum(phi, ops, cotangents, lambda.amplitudes());

    const auto &instrs = program.instructions();
    for (auto it = instrs.rbegin(); it != instrs.rend(); ++it) {
        const GateInstruction &instr = *it;
        const double angle = resolve_angle(instr, data, params);
        const PairSpace space(n, instr.target, instr.controls);
        const bool tracked = std::holds_alternative<DataSlot>(instr.angle) ||
                             std::holds_alternative<ParamSlot>(instr.angle);
        if (tracked) {
            const double g = generator_overlap(space, instr.kind,
                                               lambda.amplitudes(),
                                               phi.amplitudes());
            if (const auto *d = std::get_if<DataSlot>(&instr.angle)) {
                grads.data[d->index] += g;
            } else {
                grads.params[std::get<ParamSlot>(instr.angle).index] += g;
            }
        }
        const Mat2 inv = gate_matrix(instr.kind, -angle); // H, X, Z self-inverse
        apply_matrix(phi.amplitudes(), space, inv);
        apply_matrix(lambda.amplitudes(), space, inv);
    }
    return grads;
}

CircuitGradients adjoint_gradients(const CircuitProgram &program,
                                   std::span<const double> data,
                                   std::span<const double> params,
                                   std::span<const MeasurementOperator> ops,
                                   std::span<const double> cotangents) {
    const QuantumState final_state = run_circuit(program, data, params);
    return adjoint_gradients(program, data, params, final_state, ops, cotangents);
}

} // namespace mltqnn
