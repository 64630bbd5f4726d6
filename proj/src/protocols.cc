// Copyright 2026 The csmlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "csmlab/protocols.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "csmlab/error.h"

namespace csmlab {

namespace {

void check_budget(Complex alpha, const FockSpace &space, double trunc_tol) {
    double tail = coherent_tail_mass(alpha, space.n_max());
    if (tail > trunc_tol) {
        std::size_t need = required_n_max(alpha, trunc_tol);
        throw TruncationError("coherent amplitude |alpha| = " + std::to_string(std::abs(alpha)) +
                                  " leaves tail mass " + std::to_string(tail) + " beyond n_max = " +
                                  std::to_string(space.n_max()) + "; need n_max >= " +
                                  std::to_string(need),
                              need);
    }
}

// Gates act on rows of U. Eigen is column-major, so these work on the columns of U^T, where each
// row of U is contiguous.
// Row operation |r0, r1> <- g |r0, r1> for every pair of rows differing in `bit`.
void apply_one_qubit(ComplexMatrix &ut, const ComplexMatrix &g, std::size_t bit) {
    const auto stride = Eigen::Index{1} << bit;
    Eigen::VectorXcd r0(ut.rows());
    for (Eigen::Index r = 0; r < ut.cols(); ++r) {
        if (r & stride) {
            continue;
        }
        r0 = ut.col(r);
        ut.col(r) = g(0, 0) * r0 + g(0, 1) * ut.col(r | stride);
        ut.col(r | stride) = g(1, 0) * r0 + g(1, 1) * ut.col(r | stride);
    }
}

void apply_cnot(ComplexMatrix &ut, std::size_t control_bit, std::size_t target_bit) {
    const auto c = Eigen::Index{1} << control_bit;
    const auto t = Eigen::Index{1} << target_bit;
    for (Eigen::Index r = 0; r < ut.cols(); ++r) {
        if ((r & c) && !(r & t)) {
            ut.col(r).swap(ut.col(r | t));
        }
    }
}

}  // namespace

FockSpace::FockSpace(std::size_t n_max) : n_max_(n_max) {
    if (n_max_ < 1) {
        throw ValidationError("Fock truncation n_max must be at least 1");
    }
    if (n_max_ + 1 > kMaxOperatorDim) {
        throw CapacityError("Fock truncation n_max = " + std::to_string(n_max_) + " is too large");
    }
}

double coherent_tail_mass(Complex alpha, std::size_t n_max) {
    const double mean = std::norm(alpha);
    if (mean == 0) {
        return 0;
    }
    const double log_mean = std::log(mean);
    double tail = 0;
    for (std::size_t n = n_max + 1;; ++n) {
        double dn = static_cast<double>(n);
        double term = std::exp(-mean + dn * log_mean - std::lgamma(dn + 1));
        tail += term;
        // Past the Poisson mode the terms fall at least geometrically.
        if (dn > mean && (term == 0 || term < 1e-20 * tail)) {
            break;
        }
        if (n > n_max + 100000) {
            break;
        }
    }
    return tail;
}

std::size_t required_n_max(Complex alpha, double trunc_tol) {
    std::size_t n = 1;
    while (coherent_tail_mass(alpha, n) > trunc_tol) {
        ++n;
    }
    return n;
}

Operator annihilation(const FockSpace &space) {
    auto n = static_cast<Eigen::Index>(space.dim());
    ComplexMatrix a = ComplexMatrix::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k) {
        a(k - 1, k) = std::sqrt(static_cast<double>(k));
    }
    return Operator(std::move(a));
}

StateVector coherent_state(Complex alpha, const FockSpace &space, double trunc_tol) {
    check_budget(alpha, space, trunc_tol);
    ComplexVector c(static_cast<Eigen::Index>(space.dim()));
    c[0] = std::exp(-0.5 * std::norm(alpha));
    for (Eigen::Index k = 1; k < c.size(); ++k) {
        c[k] = c[k - 1] * alpha / std::sqrt(static_cast<double>(k));
    }
    return StateVector::normalized(std::move(c));
}

Displacement displacement(Complex alpha, const FockSpace &space, double trunc_tol) {
    check_budget(alpha, space, trunc_tol);
    const ComplexMatrix a = annihilation(space).matrix();
    Operator generator(alpha * a.adjoint() - std::conj(alpha) * a);
    Operator d = matrix_exponential(generator);
    double defect = unitarity_defect(d);
    return Displacement{std::move(d), defect, coherent_tail_mass(alpha, space.n_max())};
}

SandwichResult sandwich_measure_coherent(Complex alpha, const FockSpace &space, Rng &rng,
                                         double trunc_tol) {
    StateVector input = coherent_state(alpha, space, trunc_tol);
    Displacement back = displacement(-alpha, space, trunc_tol);
    Displacement forth = displacement(alpha, space, trunc_tol);

    auto fock = std::make_shared<const Context>(Context::computational(space.dim(), "photon-number"));
    StateVector shifted = back.op * input;
    // Renormalize away rounding drift from the matrix exponential.
    StateVector shifted_unit = StateVector::normalized(shifted.amplitudes());

    SandwichResult out;
    out.record = measure(shifted_unit, fock, rng, "coherent state");
    StateVector restored = forth.op * out.record.post_state;

    out.report.protocol = "sandwich-coherent";
    out.report.certainty = std::min(1.0, std::norm(shifted_unit[0]));
    out.report.fidelity = std::min(1.0, fidelity(input, restored));
    out.report.truncation_error = back.tail_mass;
    out.report.check_failed = out.record.outcome != 0;
    out.record.post_state = std::move(restored);
    return out;
}

const char *bell_name(BellState b) {
    switch (b) {
        case BellState::PhiPlus:
            return "Phi+";
        case BellState::PhiMinus:
            return "Phi-";
        case BellState::PsiPlus:
            return "Psi+";
        case BellState::PsiMinus:
            return "Psi-";
    }
    return "?";
}

StateVector bell_state(BellState b) {
    const double s = std::numbers::sqrt2 / 2;
    ComplexVector v = ComplexVector::Zero(4);
    switch (b) {
        case BellState::PhiPlus:
            v << s, 0, 0, s;
            break;
        case BellState::PhiMinus:
            v << s, 0, 0, -s;
            break;
        case BellState::PsiPlus:
            v << 0, s, s, 0;
            break;
        case BellState::PsiMinus:
            v << 0, s, -s, 0;
            break;
    }
    return StateVector(std::move(v));
}

Operator cnot() {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = m(1, 1) = 1;
    m(2, 3) = m(3, 2) = 1;
    return Operator(std::move(m));
}

Operator hadamard() {
    const double s = std::numbers::sqrt2 / 2;
    ComplexMatrix m(2, 2);
    m << s, s, s, -s;
    return Operator(std::move(m));
}

BellResult bell_measure_sandwich(const StateVector &state, Rng &rng) {
    if (state.dim() != 4) {
        throw ShapeError("Bell measurement needs a two-qubit state, got dimension " +
                         std::to_string(state.dim()));
    }
    if (!state.is_normalized()) {
        throw ValidationError("Bell measurement rejects an unnormalized state");
    }
    static const std::array<BellState, 4> kByZOutcome = {
        BellState::PhiPlus, BellState::PsiPlus, BellState::PhiMinus, BellState::PsiMinus};

    const Operator h_first = tensor(hadamard(), Operator::identity(2));
    const Operator disentangle = h_first * cnot();
    const Operator reentangle = cnot() * h_first;

    std::vector<StateVector> z_basis;
    for (std::size_t i = 0; i < 4; ++i) {
        z_basis.push_back(StateVector::basis(4, i));
    }
    auto z = std::make_shared<const Context>(
        std::move(z_basis), std::vector<ValueTuple>{{0, 0}, {0, 1}, {1, 0}, {1, 1}}, "ZZ");

    BellResult out;
    out.record = measure(disentangle * state, z, rng, "two-qubit state");
    StateVector restored = reentangle * out.record.post_state;
    out.outcome = kByZOutcome[out.record.outcome];
    out.report.protocol = "sandwich-bell";
    out.report.certainty = out.record.probability;
    out.report.fidelity = std::min(1.0, fidelity(state, restored));
    out.report.check_failed = out.record.probability < 1.0 - kTolAlg;
    out.record.post_state = std::move(restored);
    return out;
}

SandwichResult register_check_sandwich(const StateVector &psi, const Operator &u, Rng &rng) {
    if (u.dim() != psi.dim()) {
        throw ShapeError("register unitary dimension does not match the state");
    }
    return RegisterCheck(u)(psi, rng);
}

RegisterCheck::RegisterCheck(Operator u) : u_(std::move(u)), defect_(0) {
    const std::size_t dim = u_.dim();
    if (dim < 2 || (dim & (dim - 1)) != 0) {
        throw ShapeError("register dimension must be 2^k, got " + std::to_string(dim));
    }
    defect_ = csmlab::unitarity_defect(u_);
    if (defect_ > kTolAlg) {
        throw ValidationError("register transform is not unitary (defect " +
                              std::to_string(defect_) + ")");
    }
}

SandwichResult RegisterCheck::operator()(const StateVector &psi, Rng &rng) const {
    const std::size_t dim = psi.dim();
    const Operator &u = u_;
    if (u.dim() != dim) {
        throw ShapeError("register unitary dimension does not match the state");
    }
    if (!psi.is_normalized()) {
        throw ValidationError("register check rejects an unnormalized state");
    }

    ComplexVector phi = u.matrix().adjoint() * psi.amplitudes();
    const double pass = std::min(1.0, std::norm(phi[0]));

    SandwichResult out;
    out.record.input = "register state";
    out.record.context_name = "register-all-zeros";
    out.record.seed = rng.seed();
    out.record.stream = rng.stream();
    out.record.stream_position = rng.position();
    double draw = rng.uniform();
    bool passed = draw < pass;
    if (passed) {
        out.record.outcome = 0;
        out.record.value = {1};
        out.record.probability = pass;
        phi = StateVector::basis(dim, 0).amplitudes();
    } else {
        out.record.outcome = 1;
        out.record.value = {0};
        out.record.probability = 1.0 - pass;
        phi[0] = 0;
        phi = StateVector::normalized(std::move(phi)).amplitudes();
    }
    StateVector restored(u.matrix() * phi);

    out.report.protocol = "sandwich-register";
    out.report.certainty = pass;
    out.report.fidelity = std::min(1.0, fidelity(psi, restored));
    out.report.check_failed = !passed;
    out.record.post_state = std::move(restored);
    return out;
}

Operator random_layered_unitary(std::size_t qubits, std::size_t layers, Rng &rng) {
    if (qubits == 0 || (std::size_t{1} << qubits) > kMaxOperatorDim) {
        throw CapacityError("register of " + std::to_string(qubits) + " qubits is out of range");
    }
    auto n = Eigen::Index{1} << qubits;
    ComplexMatrix ut = ComplexMatrix::Identity(n, n);
    // Qubit q is site q; site 0 is the most significant bit.
    auto bit = [qubits](std::size_t q) { return qubits - 1 - q; };
    for (std::size_t layer = 0; layer < layers; ++layer) {
        for (std::size_t q = 0; q < qubits; ++q) {
            apply_one_qubit(ut, random_unitary(2, rng).matrix(), bit(q));
        }
        for (std::size_t start : {0, 1}) {
            for (std::size_t q = start; q + 1 < qubits; q += 2) {
                apply_cnot(ut, bit(q), bit(q + 1));
            }
        }
    }
    return Operator(ut.transpose());
}

}  // namespace csmlab
