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

#ifndef CSMLAB_LINALG_H
#define CSMLAB_LINALG_H

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace csmlab {

class Rng;

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Tolerance for algebraic identities (normalization, idempotence, orthogonality, unitarity).
inline constexpr double kTolAlg = 1e-10;
/// Largest dense state vector the library will allocate.
inline constexpr std::size_t kMaxVectorDim = std::size_t{1} << 20;
/// Largest dense square operator the library will allocate.
inline constexpr std::size_t kMaxOperatorDim = std::size_t{1} << 12;

/// Amplitude vector over a finite tensor-product space.
///
/// The raw constructor stores amplitudes as given; `normalized` rescales to unit norm. Code that
/// needs a physical state checks `is_normalized` and rejects the vector otherwise.
class StateVector {
   public:
    explicit StateVector(ComplexVector amplitudes);

    static StateVector normalized(ComplexVector amplitudes);
    static StateVector basis(std::size_t dim, std::size_t index);

    std::size_t dim() const noexcept {
        return static_cast<std::size_t>(amplitudes_.size());
    }
    const ComplexVector &amplitudes() const noexcept {
        return amplitudes_;
    }
    Complex operator[](std::size_t k) const {
        return amplitudes_[static_cast<Eigen::Index>(k)];
    }
    double norm() const {
        return amplitudes_.norm();
    }
    bool is_normalized(double tol = kTolAlg) const;

    bool operator==(const StateVector &other) const {
        return amplitudes_ == other.amplitudes_;
    }

   private:
    ComplexVector amplitudes_;
};

/// Dense square complex matrix with finite entries.
class Operator {
   public:
    explicit Operator(ComplexMatrix entries);

    static Operator identity(std::size_t dim);
    static Operator zero(std::size_t dim);

    std::size_t dim() const noexcept {
        return static_cast<std::size_t>(entries_.rows());
    }
    const ComplexMatrix &matrix() const noexcept {
        return entries_;
    }
    Complex operator()(std::size_t row, std::size_t col) const {
        return entries_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }

    Operator adjoint() const;
    bool is_hermitian(double tol = kTolAlg) const;

    bool operator==(const Operator &other) const {
        return entries_ == other.entries_;
    }

   private:
    ComplexMatrix entries_;
};

Operator operator*(const Operator &a, const Operator &b);
Operator operator+(const Operator &a, const Operator &b);
Operator operator*(Complex scale, const Operator &a);
StateVector operator*(const Operator &op, const StateVector &state);

/// Orthogonal projector: idempotent and self-adjoint within `kTolAlg`.
class Projector {
   public:
    explicit Projector(Operator op, double tol = kTolAlg);

    /// |v><v| for the normalized direction of `v`.
    static Projector rank1(const StateVector &v);

    const Operator &op() const noexcept {
        return op_;
    }
    std::size_t dim() const noexcept {
        return op_.dim();
    }
    std::size_t rank() const noexcept {
        return rank_;
    }

   private:
    Operator op_;
    std::size_t rank_;
};

/// Hermitian, positive semidefinite, unit-trace operator.
class DensityMatrix {
   public:
    explicit DensityMatrix(Operator op, double tol = kTolAlg);

    static DensityMatrix pure(const StateVector &state);

    const Operator &op() const noexcept {
        return op_;
    }
    std::size_t dim() const noexcept {
        return op_.dim();
    }
    Complex operator()(std::size_t row, std::size_t col) const {
        return op_(row, col);
    }
    double trace() const;

   private:
    struct Unchecked {};
    DensityMatrix(Operator op, Unchecked) : op_(std::move(op)) {
    }
    friend DensityMatrix partial_trace(const DensityMatrix &, std::span<const std::size_t>,
                                       std::span<const std::size_t>);
    friend DensityMatrix reduced_density_matrix(const StateVector &, std::span<const std::size_t>,
                                                std::span<const std::size_t>);

    Operator op_;
};

/// <a|b>, antilinear in the first argument.
Complex inner(const StateVector &a, const StateVector &b);
/// |<a|b>|^2.
double fidelity(const StateVector &a, const StateVector &b);

/// Kronecker product. Site `a` is the slower-varying index.
StateVector tensor(const StateVector &a, const StateVector &b);
Operator tensor(const Operator &a, const Operator &b);

/// Left fold of `tensor` over the factors: ((f0 (x) f1) (x) f2) ...
StateVector tensor_product(std::span<const StateVector> factors);
Operator tensor_product(std::span<const Operator> factors);

/// Trace out every site not listed in `keep`. Kept sites stay in ascending order.
DensityMatrix partial_trace(const DensityMatrix &rho, std::span<const std::size_t> site_dims,
                            std::span<const std::size_t> keep);

/// Reduced density matrix of the pure state |psi><psi| without forming the full operator.
DensityMatrix reduced_density_matrix(const StateVector &psi, std::span<const std::size_t> site_dims,
                                     std::span<const std::size_t> keep);

struct ExpmOptions {
    /// Maximum Taylor terms for the scaled matrix before giving up.
    int max_terms = 40;
    /// The input is scaled by 2^-s until its 1-norm is at most this value.
    double scaled_norm = 0.5;
};

/// exp(A) by scaling and squaring around a truncated Taylor series.
Operator matrix_exponential(const Operator &a, const ExpmOptions &options = {});

struct ProjectorFamilyReport {
    bool passed = true;
    double max_orthogonality_error = 0;
    double completeness_error = 0;
    std::vector<std::string> failures;
};

/// Checks Pi_i Pi_j = delta_ij Pi_i and sum_i Pi_i = I, itemizing every violation.
ProjectorFamilyReport validate_projector_family(std::span<const Projector> projectors,
                                                std::size_t dim, double tol = kTolAlg);

/// sum_i values[i] * projectors[i]. Throws ValidationError when the family is not a resolution
/// of the identity.
Operator spectral_observable(std::span<const double> values, std::span<const Projector> projectors);

/// Max-entry norm of U^dagger U - I.
double unitarity_defect(const Operator &u);
bool is_unitary(const Operator &u, double tol = kTolAlg);
/// Largest singular value.
double operator_norm(const Operator &a);

/// Haar-random unit vector.
StateVector random_state(std::size_t dim, Rng &rng);
/// Haar-random unitary (QR of a complex Ginibre matrix with phase fix).
Operator random_unitary(std::size_t dim, Rng &rng);
/// Operator with i.i.d. standard complex normal entries.
Operator random_operator(std::size_t dim, Rng &rng);

}  // namespace csmlab

#endif
