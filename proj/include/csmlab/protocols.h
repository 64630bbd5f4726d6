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

#ifndef CSMLAB_PROTOCOLS_H
#define CSMLAB_PROTOCOLS_H

#include <cstddef>
#include <string>

#include "csmlab/csm.h"
#include "csmlab/linalg.h"
#include "csmlab/rng.h"

namespace csmlab {

/// Default Poisson tail-mass budget for truncated Fock spaces.
inline constexpr double kTruncTol = 1e-12;

/// Harmonic-oscillator space truncated at photon number n_max.
class FockSpace {
   public:
    explicit FockSpace(std::size_t n_max);

    std::size_t n_max() const noexcept {
        return n_max_;
    }
    std::size_t dim() const noexcept {
        return n_max_ + 1;
    }

   private:
    std::size_t n_max_;
};

/// sum_{n > n_max} e^{-|alpha|^2} |alpha|^{2n} / n!
double coherent_tail_mass(Complex alpha, std::size_t n_max);
/// Smallest n_max >= 1 whose tail mass is within `trunc_tol`.
std::size_t required_n_max(Complex alpha, double trunc_tol = kTruncTol);

/// Truncated annihilation operator, a|n> = sqrt(n)|n-1>.
Operator annihilation(const FockSpace &space);

/// Normalized truncated coherent state. Throws TruncationError when the tail mass beyond n_max
/// exceeds `trunc_tol`.
StateVector coherent_state(Complex alpha, const FockSpace &space, double trunc_tol = kTruncTol);

struct Displacement {
    Operator op;
    double unitarity_defect = 0;
    double tail_mass = 0;
};

/// exp(alpha a^dagger - conj(alpha) a) on the truncated space.
Displacement displacement(Complex alpha, const FockSpace &space, double trunc_tol = kTruncTol);

struct SandwichReport {
    std::string protocol;
    /// Probability of the check outcome the protocol is designed to certify.
    double certainty = 0;
    /// |<psi_in|psi_out>|^2.
    double fidelity = 0;
    double truncation_error = 0;
    /// Set when the realized outcome is not the certified one.
    bool check_failed = false;
};

struct SandwichResult {
    MeasurementRecord record;
    SandwichReport report;
};

/// Displace by -alpha, count photons, displace back by +alpha.
SandwichResult sandwich_measure_coherent(Complex alpha, const FockSpace &space, Rng &rng,
                                         double trunc_tol = kTruncTol);

enum class BellState { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

const char *bell_name(BellState b);
StateVector bell_state(BellState b);

/// CNOT with the first (slow) qubit as control.
Operator cnot();
Operator hadamard();

struct BellResult {
    MeasurementRecord record;
    SandwichReport report;
    BellState outcome;
};

/// CNOT, Hadamard on the first qubit, Z measurement of both qubits, then the inverse gates.
/// Z outcomes 00, 10, 01, 11 label Phi+, Phi-, Psi+, Psi-.
BellResult bell_measure_sandwich(const StateVector &state, Rng &rng);

/// Applies U^dagger, checks "register is all zeros" as a two-outcome projective measurement and
/// applies U. Record outcome 0 is the passing check.
SandwichResult register_check_sandwich(const StateVector &psi, const Operator &u, Rng &rng);

/// Register check bound to one unitary. Unitarity is verified once on construction, so repeated
/// checks with the same U cost O(dim^2) each instead of a dense product.
class RegisterCheck {
   public:
    explicit RegisterCheck(Operator u);

    SandwichResult operator()(const StateVector &psi, Rng &rng) const;

    const Operator &unitary() const noexcept {
        return u_;
    }
    double unitarity_defect() const noexcept {
        return defect_;
    }

   private:
    Operator u_;
    double defect_;
};

/// Brickwork circuit on `qubits` qubits: each layer is a Haar-random single-qubit gate on every
/// qubit followed by CNOTs on even then odd neighbouring pairs.
Operator random_layered_unitary(std::size_t qubits, std::size_t layers, Rng &rng);

}  // namespace csmlab

#endif
