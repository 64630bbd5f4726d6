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

#include "csmlab/linalg.h"

#include <cmath>
#include <numbers>

#include "csmlab/error.h"
#include "csmlab/rng.h"
#include "gtest/gtest.h"

using namespace csmlab;

namespace {

StateVector ket(std::initializer_list<Complex> amps) {
    ComplexVector v(static_cast<Eigen::Index>(amps.size()));
    Eigen::Index i = 0;
    for (Complex a : amps) {
        v[i++] = a;
    }
    return StateVector(std::move(v));
}

Operator mat(Eigen::Index n, std::initializer_list<Complex> entries) {
    ComplexMatrix m(n, n);
    Eigen::Index k = 0;
    for (Complex e : entries) {
        m(k / n, k % n) = e;
        ++k;
    }
    return Operator(std::move(m));
}

double max_abs_diff(const ComplexMatrix &a, const ComplexMatrix &b) {
    return (a - b).cwiseAbs().maxCoeff();
}

const double kS = std::numbers::sqrt2 / 2;

}  // namespace

TEST(tensor, basis_vectors) {
    StateVector e00 = tensor(StateVector::basis(2, 0), StateVector::basis(2, 0));
    ASSERT_EQ(e00.dim(), 4u);
    ASSERT_EQ(e00, StateVector::basis(4, 0));
}

TEST(tensor, dimension_product) {
    StateVector a = StateVector::basis(2, 1);
    StateVector b = StateVector::basis(3, 2);
    StateVector ab = tensor(a, b);
    ASSERT_EQ(ab.dim(), 6u);
    ASSERT_EQ(ab, StateVector::basis(6, 5));
    ASSERT_EQ(tensor(Operator::identity(2), Operator::identity(3)).dim(), 6u);
}

TEST(tensor, plus_minus_amplitudes) {
    StateVector plus = ket({kS, kS});
    StateVector minus = ket({kS, -kS});
    StateVector pm = tensor(plus, minus);
    Complex expected[] = {0.5, -0.5, 0.5, -0.5};
    for (std::size_t i = 0; i < 4; ++i) {
        ASSERT_NEAR(std::abs(pm[i] - expected[i]), 0, 1e-15);
    }
}

TEST(tensor, norm_multiplicative) {
    StateVector a(ComplexVector::Constant(3, Complex(1, 1)));
    StateVector b(ComplexVector::Constant(2, Complex(0.5, 0)));
    ASSERT_NEAR(tensor(a, b).norm(), a.norm() * b.norm(), 1e-14);
}

TEST(tensor, left_fold_is_bit_exact) {
    Rng rng(7);
    StateVector a = random_state(2, rng);
    StateVector b = random_state(3, rng);
    StateVector c = random_state(2, rng);
    std::vector<StateVector> factors{a, b, c};
    ASSERT_EQ(tensor_product(factors), tensor(tensor(a, b), c));
    // The right fold agrees only up to rounding.
    ASSERT_LE((tensor(a, tensor(b, c)).amplitudes() - tensor(tensor(a, b), c).amplitudes())
                  .cwiseAbs()
                  .maxCoeff(),
              kTolAlg);

    std::vector<Operator> ops{random_operator(2, rng), random_operator(2, rng), random_operator(3, rng)};
    ASSERT_EQ(tensor_product(ops), tensor(tensor(ops[0], ops[1]), ops[2]));
}

TEST(tensor, capacity_error) {
    StateVector big = StateVector::basis(std::size_t{1} << 11, 0);
    ASSERT_THROW(tensor(big, tensor(big, StateVector::basis(2, 0))), CapacityError);
    ASSERT_THROW(tensor(Operator::identity(64), Operator::identity(128)), CapacityError);
}

TEST(partial_trace, bell_pair_reduces_to_maximally_mixed) {
    DensityMatrix rho = DensityMatrix::pure(ket({kS, 0, 0, kS}));
    const std::size_t dims[] = {2, 2};
    const std::size_t keep[] = {0};
    DensityMatrix red = partial_trace(rho, dims, keep);
    ASSERT_LE(max_abs_diff(red.op().matrix(), 0.5 * ComplexMatrix::Identity(2, 2)), kTolAlg);
}

TEST(partial_trace, product_state_factorizes) {
    Rng rng(11);
    DensityMatrix a = DensityMatrix::pure(random_state(2, rng));
    DensityMatrix b = DensityMatrix::pure(random_state(3, rng));
    DensityMatrix ab(tensor(a.op(), b.op()));
    const std::size_t dims[] = {2, 3};
    const std::size_t keep0[] = {0};
    const std::size_t keep1[] = {1};
    ASSERT_LE(max_abs_diff(partial_trace(ab, dims, keep0).op().matrix(), a.op().matrix()), kTolAlg);
    ASSERT_LE(max_abs_diff(partial_trace(ab, dims, keep1).op().matrix(), b.op().matrix()), kTolAlg);
}

TEST(partial_trace, ghz_single_site) {
    ComplexVector g = ComplexVector::Zero(8);
    g[0] = g[7] = kS;
    DensityMatrix rho = DensityMatrix::pure(StateVector(g));
    const std::size_t dims[] = {2, 2, 2};
    for (std::size_t site = 0; site < 3; ++site) {
        const std::size_t keep[] = {site};
        DensityMatrix red = partial_trace(rho, dims, keep);
        ComplexMatrix expected = ComplexMatrix::Zero(2, 2);
        expected(0, 0) = expected(1, 1) = 0.5;
        ASSERT_LE(max_abs_diff(red.op().matrix(), expected), kTolAlg) << "site " << site;
    }
}

TEST(partial_trace, keep_all_is_exact_and_trace_preserved) {
    Rng rng(3);
    StateVector psi = random_state(12, rng);
    DensityMatrix rho = DensityMatrix::pure(psi);
    const std::size_t dims[] = {2, 3, 2};
    const std::size_t all[] = {0, 1, 2};
    ASSERT_EQ(partial_trace(rho, dims, all).op(), rho.op());
    const std::size_t some[] = {0, 2};
    DensityMatrix red = partial_trace(rho, dims, some);
    ASSERT_EQ(red.dim(), 4u);
    ASSERT_NEAR(red.trace(), 1.0, kTolAlg);
}

TEST(partial_trace, pure_state_path_matches_density_path) {
    Rng rng(5);
    StateVector psi = random_state(24, rng);
    const std::size_t dims[] = {3, 2, 4};
    const std::size_t keep[] = {2, 0};
    DensityMatrix via_rho = partial_trace(DensityMatrix::pure(psi), dims, keep);
    DensityMatrix via_psi = reduced_density_matrix(psi, dims, keep);
    ASSERT_LE(max_abs_diff(via_rho.op().matrix(), via_psi.op().matrix()), 1e-14);
}

TEST(partial_trace, shape_errors) {
    DensityMatrix rho = DensityMatrix::pure(StateVector::basis(4, 0));
    const std::size_t bad_dims[] = {2, 3};
    const std::size_t keep[] = {0};
    ASSERT_THROW(partial_trace(rho, bad_dims, keep), ShapeError);
    const std::size_t dims[] = {2, 2};
    const std::size_t bad_keep[] = {2};
    ASSERT_THROW(partial_trace(rho, dims, bad_keep), ShapeError);
}

TEST(matrix_exponential, zero_is_identity) {
    ASSERT_EQ(matrix_exponential(Operator::zero(3)), Operator::identity(3));
}

TEST(matrix_exponential, diagonal_phase) {
    const Complex i(0, 1);
    Operator sz = mat(2, {1, 0, 0, -1});
    Operator u = matrix_exponential((i * std::numbers::pi / 2.0) * sz);
    ASSERT_LE(max_abs_diff(u.matrix(), mat(2, {i, 0, 0, -i}).matrix()), kTolAlg);
}

TEST(matrix_exponential, anti_hermitian_gives_unitary) {
    Rng rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        ComplexMatrix g = random_operator(6, rng).matrix();
        Operator anti(3.0 * (g - g.adjoint()));
        ASSERT_LE(unitarity_defect(matrix_exponential(anti)), kTolAlg);
    }
}

TEST(matrix_exponential, matches_eigendecomposition_for_hermitian_generator) {
    Rng rng(23);
    ComplexMatrix g = random_operator(5, rng).matrix();
    ComplexMatrix h = 0.5 * (g + g.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    ComplexMatrix expected = es.eigenvectors() *
                             es.eigenvalues().array().exp().matrix().cast<Complex>().asDiagonal() *
                             es.eigenvectors().adjoint();
    Operator got = matrix_exponential(Operator(h));
    ASSERT_LE(max_abs_diff(got.matrix(), expected) / expected.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(matrix_exponential, non_convergence_is_reported) {
    ExpmOptions tight;
    tight.max_terms = 2;
    ASSERT_THROW(matrix_exponential(Operator::identity(2), tight), NumericError);
}

TEST(projector_family, computational_basis_passes) {
    std::vector<Projector> family;
    for (std::size_t i = 0; i < 3; ++i) {
        family.push_back(Projector::rank1(StateVector::basis(3, i)));
    }
    ProjectorFamilyReport r = validate_projector_family(family, 3);
    ASSERT_TRUE(r.passed);
    ASSERT_TRUE(r.failures.empty());
    ASSERT_EQ(family[0].rank(), 1u);
}

TEST(projector_family, missing_projector_fails_completeness) {
    std::vector<Projector> family;
    for (std::size_t i = 0; i < 2; ++i) {
        family.push_back(Projector::rank1(StateVector::basis(3, i)));
    }
    ProjectorFamilyReport r = validate_projector_family(family, 3);
    ASSERT_FALSE(r.passed);
    ASSERT_EQ(r.failures.size(), 1u);
    ASSERT_NE(r.failures[0].find("completeness"), std::string::npos);
    ASSERT_NEAR(r.completeness_error, 1.0, 1e-15);
}

TEST(projector_family, perturbation_fails_orthogonality) {
    std::vector<Projector> family;
    family.push_back(Projector::rank1(ket({1.0, 1e-6, 0})));
    family.push_back(Projector::rank1(StateVector::basis(3, 1)));
    family.push_back(Projector::rank1(StateVector::basis(3, 2)));
    ProjectorFamilyReport r = validate_projector_family(family, 3);
    ASSERT_FALSE(r.passed);
    ASSERT_NE(r.failures[0].find("orthogonality"), std::string::npos);
    ASSERT_GT(r.max_orthogonality_error, 1e-7);
}

TEST(projector, rejects_non_projector) {
    ASSERT_THROW(Projector(mat(2, {1, 1, 0, 1})), ValidationError);
    ASSERT_THROW(Projector(mat(2, {1, 0, 0, 0.5})), ValidationError);
}

TEST(spectral_observable, pauli_z) {
    std::vector<Projector> family{Projector::rank1(StateVector::basis(2, 0)),
                                  Projector::rank1(StateVector::basis(2, 1))};
    const double values[] = {1, -1};
    ASSERT_EQ(spectral_observable(values, family), mat(2, {1, 0, 0, -1}));
}

TEST(spectral_observable, degenerate_value_gives_scaled_identity) {
    std::vector<Projector> family{Projector::rank1(StateVector::basis(2, 0)),
                                  Projector::rank1(StateVector::basis(2, 1))};
    const double values[] = {5, 5};
    ASSERT_EQ(spectral_observable(values, family), mat(2, {5, 0, 0, 5}));
}

TEST(spectral_observable, rejects_invalid_family) {
    std::vector<Projector> family{Projector::rank1(StateVector::basis(2, 0))};
    const double values[] = {1};
    ASSERT_THROW(spectral_observable(values, family), ValidationError);
}

TEST(spectral_observable, eigendecomposition_round_trip) {
    // Independent oracle: Eigen's Hermitian eigensolver recovers values and rays.
    Rng rng(101);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t d = 2 + static_cast<std::size_t>(rng() % 7);
        Operator u = random_unitary(d, rng);
        std::vector<Projector> family;
        std::vector<double> values;
        for (std::size_t i = 0; i < d; ++i) {
            family.push_back(Projector::rank1(StateVector(u.matrix().col(static_cast<Eigen::Index>(i)))));
            values.push_back(static_cast<double>(i) * 1.5 - 2.0 + 0.1 * rng.uniform());
        }
        Operator m = spectral_observable(values, family);
        ASSERT_TRUE(m.is_hermitian());
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m.matrix());
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < d; ++i) {
            ASSERT_NEAR(es.eigenvalues()[static_cast<Eigen::Index>(i)], sorted[i], 1e-8);
        }
        // Each recovered eigenvector spans the ray of the projector with that value.
        for (std::size_t i = 0; i < d; ++i) {
            std::size_t src = static_cast<std::size_t>(
                std::find(values.begin(), values.end(), sorted[i]) - values.begin());
            StateVector recovered(es.eigenvectors().col(static_cast<Eigen::Index>(i)));
            StateVector planted(u.matrix().col(static_cast<Eigen::Index>(src)));
            ASSERT_NEAR(fidelity(recovered, planted), 1.0, 1e-8);
        }
    }
}

TEST(random_unitary, is_unitary) {
    Rng rng(1);
    for (std::size_t d : {1u, 2u, 5u, 16u}) {
        ASSERT_TRUE(is_unitary(random_unitary(d, rng))) << d;
    }
}

TEST(operator_norm, known_values) {
    ASSERT_NEAR(operator_norm(mat(2, {0, 2, 0, 0})), 2.0, 1e-14);
    ASSERT_NEAR(operator_norm(mat(2, {1, 0, 0, -3})), 3.0, 1e-14);
}

TEST(density_matrix, validation) {
    ASSERT_THROW(DensityMatrix(mat(2, {1, 0, 0, 1})), ValidationError);
    ASSERT_THROW(DensityMatrix(mat(2, {1.5, 0, 0, -0.5})), ValidationError);
    ASSERT_THROW(DensityMatrix(mat(2, {0.5, 1, 0, 0.5})), ValidationError);
    ASSERT_NO_THROW(DensityMatrix(mat(2, {0.5, 0.5, 0.5, 0.5})));
}
