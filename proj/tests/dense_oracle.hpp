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
 * @file dense_oracle.hpp
 * Test-only reference simulator: every gate becomes an explicit 2^n x 2^n
 * matrix assembled from Kronecker products, and observables are explicit
 * (I +/- X) tensor products. Shares nothing with the strided kernels beyond
 * the instruction data types.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "mltqnn/statevector.hpp"

namespace oracle {

using Complex = std::complex<double>;

struct Matrix {
    std::size_t dim = 0;
    std::vector<Complex> v; // row-major

    explicit Matrix(std::size_t d = 0) : dim(d), v(d * d, Complex{}) {}
    Complex &operator()(std::size_t r, std::size_t c) { return v[r * dim + c]; }
    Complex operator()(std::size_t r, std::size_t c) const { return v[r * dim + c]; }

    static Matrix identity(std::size_t d) {
        Matrix m(d);
        for (std::size_t i = 0; i < d; ++i) {
            m(i, i) = 1.0;
        }
        return m;
    }
};

inline Matrix kron(const Matrix &a, const Matrix &b) {
    Matrix out(a.dim * b.dim);
    for (std::size_t ar = 0; ar < a.dim; ++ar)
        for (std::size_t ac = 0; ac < a.dim; ++ac)
            for (std::size_t br = 0; br < b.dim; ++br)
                for (std::size_t bc = 0; bc < b.dim; ++bc)
                    out(ar * b.dim + br, ac * b.dim + bc) = a(ar, ac) * b(br, bc);
    return out;
}

inline Matrix add(const Matrix &a, const Matrix &b, double sb = 1.0) {
    Matrix out(a.dim);
    for (std::size_t i = 0; i < a.v.size(); ++i) {
        out.v[i] = a.v[i] + sb * b.v[i];
    }
    return out;
}

inline Matrix two(Complex a, Complex b, Complex c, Complex d) {
    Matrix m(2);
    m(0, 0) = a;
    m(0, 1) = b;
    m(1, 0) = c;
    m(1, 1) = d;
    return m;
}

inline Matrix pauli_x() { return two(0, 1, 1, 0); }
inline Matrix pauli_y() { return two(0, Complex{0, -1}, Complex{0, 1}, 0); }
inline Matrix pauli_z() { return two(1, 0, 0, -1); }

/// exp(-i theta A / 2) = cos(theta/2) I - i sin(theta/2) A
inline Matrix rotation(const Matrix &pauli, double theta) {
    Matrix out = Matrix::identity(2);
    for (std::size_t i = 0; i < 4; ++i) {
        out.v[i] = std::cos(theta / 2) * out.v[i] -
                   Complex{0, 1} * std::sin(theta / 2) * pauli.v[i];
    }
    return out;
}

inline Matrix single_qubit(mltqnn::GateKind kind, double theta) {
    using mltqnn::GateKind;
    switch (kind) {
    case GateKind::H: {
        const double r = 1.0 / std::sqrt(2.0);
        return two(r, r, r, -r);
    }
    case GateKind::X:
        return pauli_x();
    case GateKind::Z:
        return pauli_z();
    case GateKind::RX:
        return rotation(pauli_x(), theta);
    case GateKind::RY:
        return rotation(pauli_y(), theta);
    case GateKind::RZ:
        return rotation(pauli_z(), theta);
    }
    return Matrix::identity(2);
}

/// Kronecker product over qubits n-1 ... 0 (qubit 0 is the rightmost factor,
/// giving little-endian basis indices).
template <class FactorFn> Matrix kron_over_qubits(std::size_t n, FactorFn factor) {
    Matrix out = factor(static_cast<unsigned>(n - 1));
    for (std::size_t q = n - 1; q-- > 0;) {
        out = kron(out, factor(static_cast<unsigned>(q)));
    }
    return out;
}

/// I - P_c + P_c (x) U, where P_c projects the controls onto their values.
inline Matrix full_gate(std::size_t n, const mltqnn::GateInstruction &g, double theta) {
    const Matrix u = single_qubit(g.kind, theta);
    auto proj_or_id = [&](unsigned q, bool with_target) {
        for (const auto &c : g.controls) {
            if (c.qubit == q) {
                return c.value ? two(0, 0, 0, 1) : two(1, 0, 0, 0);
            }
        }
        if (with_target && q == g.target) {
            return u;
        }
        return Matrix::identity(2);
    };
    const Matrix projected_u = kron_over_qubits(n, [&](unsigned q) { return proj_or_id(q, true); });
    const Matrix projector = kron_over_qubits(n, [&](unsigned q) { return proj_or_id(q, false); });
    return add(add(Matrix::identity(std::size_t{1} << n), projector, -1.0), projected_u);
}

inline std::vector<Complex> matvec(const Matrix &m, const std::vector<Complex> &x) {
    std::vector<Complex> y(m.dim, Complex{});
    for (std::size_t r = 0; r < m.dim; ++r) {
        Complex acc{};
        for (std::size_t c = 0; c < m.dim; ++c) {
            acc += m(r, c) * x[c];
        }
        y[r] = acc;
    }
    return y;
}

inline double angle_of(const mltqnn::GateInstruction &g, std::span<const double> data,
                       std::span<const double> params) {
    if (const auto *c = std::get_if<mltqnn::ConstantAngle>(&g.angle)) return c->radians;
    if (const auto *d = std::get_if<mltqnn::DataSlot>(&g.angle)) return data[d->index];
    if (const auto *p = std::get_if<mltqnn::ParamSlot>(&g.angle)) return params[p->index];
    return 0.0;
}

inline std::vector<Complex> run_dense(const mltqnn::CircuitProgram &prog,
                                      std::span<const double> data,
                                      std::span<const double> params) {
    const std::size_t n = prog.num_qubits();
    std::vector<Complex> psi(std::size_t{1} << n, Complex{});
    psi[0] = 1.0;
    for (const auto &g : prog.instructions()) {
        psi = matvec(full_gate(n, g, angle_of(g, data, params)), psi);
    }
    return psi;
}

inline Matrix dense_observable(std::size_t n, const mltqnn::MeasurementOperator &op) {
    return kron_over_qubits(n, [&](unsigned q) {
        for (std::size_t k = 0; k < op.qubits.size(); ++k) {
            if (op.qubits[k] == q) {
                return add(Matrix::identity(2), pauli_x(), static_cast<double>(op.signs[k]));
            }
        }
        return Matrix::identity(2);
    });
}

inline double dense_expectation(const std::vector<Complex> &psi, const Matrix &m) {
    const auto mpsi = matvec(m, psi);
    Complex acc{};
    for (std::size_t i = 0; i < psi.size(); ++i) {
        acc += std::conj(psi[i]) * mpsi[i];
    }
    return acc.real();
}

inline double max_abs_diff(std::span<const Complex> a, std::span<const Complex> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

/// Elementwise |a - b| / max(|a|, |b|, floor).
inline double relative_error(double a, double b, double floor = 1e-3) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/**
 * Random program with H/X/Z and rotations drawing angles from constants,
 * data slots and (each used once) parameter slots.
 */
inline mltqnn::CircuitProgram random_program(std::mt19937_64 &rng, std::size_t n,
                                             std::size_t gates, std::size_t data_arity,
                                             std::size_t max_controls = 3) {
    using namespace mltqnn;
    CircuitProgram prog(n);
    std::uniform_int_distribution<int> kind_dist(0, 5);
    std::uniform_real_distribution<double> angle(-3.0, 3.0);
    std::size_t next_param = 0;
    for (std::size_t i = 0; i < gates; ++i) {
        GateInstruction g;
        g.kind = static_cast<GateKind>(kind_dist(rng));
        std::vector<unsigned> qubits(n);
        for (unsigned q = 0; q < n; ++q) qubits[q] = q;
        std::shuffle(qubits.begin(), qubits.end(), rng);
        g.target = qubits[0];
        const std::size_t nc =
            std::uniform_int_distribution<std::size_t>(0, std::min(max_controls, n - 1))(rng);
        for (std::size_t c = 0; c < nc; ++c) {
            g.controls.push_back({qubits[c + 1], (rng() & 1U) != 0});
        }
        if (is_rotation(g.kind)) {
            const auto src = rng() % 3;
            if (src == 0) {
                g.angle = ConstantAngle{angle(rng)};
            } else if (src == 1 && data_arity > 0) {
                g.angle = DataSlot{static_cast<std::size_t>(rng() % data_arity)};
            } else {
                g.angle = ParamSlot{next_param++};
            }
        }
        prog.append(std::move(g));
    }
    prog.set_data_arity(std::max(prog.data_arity(), data_arity));
    return prog;
}

inline std::vector<double> random_vector(std::mt19937_64 &rng, std::size_t n, double lo,
                                         double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto &x : v) x = d(rng);
    return v;
}

} // namespace oracle
