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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "csmlab/error.h"
#include "csmlab/rng.h"

namespace csmlab {

namespace {

void check_vector_dim(std::size_t dim) {
    if (dim == 0) {
        throw ShapeError("state vector dimension must be positive");
    }
    if (dim > kMaxVectorDim) {
        throw CapacityError("state vector dimension " + std::to_string(dim) + " exceeds max_dim " +
                            std::to_string(kMaxVectorDim));
    }
}

void check_operator_dim(std::size_t dim) {
    if (dim == 0) {
        throw ShapeError("operator dimension must be positive");
    }
    if (dim > kMaxOperatorDim) {
        throw CapacityError("operator dimension " + std::to_string(dim) + " exceeds max_dim " +
                            std::to_string(kMaxOperatorDim));
    }
}

// Checked product of site dimensions.
std::size_t checked_product(std::size_t a, std::size_t b, std::size_t limit) {
    if (a != 0 && b > limit / a) {
        throw CapacityError("tensor product dimension " + std::to_string(a) + "x" +
                            std::to_string(b) + " exceeds max_dim " + std::to_string(limit));
    }
    return a * b;
}

double one_norm(const ComplexMatrix &m) {
    return m.cwiseAbs().colwise().sum().maxCoeff();
}

// Index bookkeeping for partial traces. For each full index returns the position within the kept
// subsystem and within the traced subsystem. Site 0 is the slowest-varying index.
struct SiteSplit {
    std::size_t kept_dim = 1;
    std::size_t traced_dim = 1;
    // full[kept * traced_dim + traced] = full index.
    std::vector<std::size_t> full;
};

SiteSplit split_sites(std::size_t total_dim, std::span<const std::size_t> site_dims,
                      std::span<const std::size_t> keep) {
    std::size_t product = 1;
    for (std::size_t d : site_dims) {
        if (d == 0) {
            throw ShapeError("site dimensions must be positive");
        }
        product = checked_product(product, d, kMaxVectorDim);
    }
    if (product != total_dim) {
        throw ShapeError("product of site dimensions " + std::to_string(product) +
                         " does not match dimension " + std::to_string(total_dim));
    }
    std::vector<bool> kept(site_dims.size(), false);
    for (std::size_t k : keep) {
        if (k >= site_dims.size()) {
            throw ShapeError("kept site " + std::to_string(k) + " out of range");
        }
        kept[k] = true;
    }

    SiteSplit split;
    for (std::size_t s = 0; s < site_dims.size(); ++s) {
        (kept[s] ? split.kept_dim : split.traced_dim) *= site_dims[s];
    }
    split.full.assign(total_dim, 0);
    std::vector<std::size_t> digits(site_dims.size(), 0);
    for (std::size_t index = 0; index < total_dim; ++index) {
        std::size_t kept_index = 0;
        std::size_t traced_index = 0;
        for (std::size_t s = 0; s < site_dims.size(); ++s) {
            if (kept[s]) {
                kept_index = kept_index * site_dims[s] + digits[s];
            } else {
                traced_index = traced_index * site_dims[s] + digits[s];
            }
        }
        split.full[kept_index * split.traced_dim + traced_index] = index;
        // Increment the mixed-radix counter, last site fastest.
        for (std::size_t s = site_dims.size(); s-- > 0;) {
            if (++digits[s] < site_dims[s]) {
                break;
            }
            digits[s] = 0;
        }
    }
    return split;
}

bool keeps_everything(std::size_t n_sites, std::span<const std::size_t> keep) {
    std::vector<bool> seen(n_sites, false);
    for (std::size_t k : keep) {
        if (k < n_sites) {
            seen[k] = true;
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

}  // namespace

StateVector::StateVector(ComplexVector amplitudes) : amplitudes_(std::move(amplitudes)) {
    check_vector_dim(dim());
    if (!amplitudes_.allFinite()) {
        throw NumericError("state vector has non-finite amplitudes");
    }
}

StateVector StateVector::normalized(ComplexVector amplitudes) {
    double n = amplitudes.norm();
    if (!(n > 0) || !std::isfinite(n)) {
        throw NumericError("cannot normalize a zero or non-finite vector");
    }
    amplitudes /= n;
    return StateVector(std::move(amplitudes));
}

StateVector StateVector::basis(std::size_t dim, std::size_t index) {
    check_vector_dim(dim);
    if (index >= dim) {
        throw ShapeError("basis index " + std::to_string(index) + " out of range for dimension " +
                         std::to_string(dim));
    }
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
    v[static_cast<Eigen::Index>(index)] = 1.0;
    return StateVector(std::move(v));
}

bool StateVector::is_normalized(double tol) const {
    return std::abs(norm() - 1.0) <= tol;
}

Operator::Operator(ComplexMatrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) {
        throw ShapeError("operator must be square");
    }
    check_operator_dim(dim());
    if (!entries_.allFinite()) {
        throw NumericError("operator has non-finite entries");
    }
}

Operator Operator::identity(std::size_t dim) {
    check_operator_dim(dim);
    auto n = static_cast<Eigen::Index>(dim);
    return Operator(ComplexMatrix::Identity(n, n));
}

Operator Operator::zero(std::size_t dim) {
    check_operator_dim(dim);
    auto n = static_cast<Eigen::Index>(dim);
    return Operator(ComplexMatrix::Zero(n, n));
}

Operator Operator::adjoint() const {
    return Operator(entries_.adjoint());
}

bool Operator::is_hermitian(double tol) const {
    return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Operator operator*(const Operator &a, const Operator &b) {
    if (a.dim() != b.dim()) {
        throw ShapeError("operator product dimension mismatch");
    }
    return Operator(a.matrix() * b.matrix());
}

Operator operator+(const Operator &a, const Operator &b) {
    if (a.dim() != b.dim()) {
        throw ShapeError("operator sum dimension mismatch");
    }
    return Operator(a.matrix() + b.matrix());
}

Operator operator*(Complex scale, const Operator &a) {
    return Operator(scale * a.matrix());
}

StateVector operator*(const Operator &op, const StateVector &state) {
    if (op.dim() != state.dim()) {
        throw ShapeError("operator of dimension " + std::to_string(op.dim()) +
                         " applied to state of dimension " + std::to_string(state.dim()));
    }
    return StateVector(op.matrix() * state.amplitudes());
}

Projector::Projector(Operator op, double tol) : op_(std::move(op)) {
    const ComplexMatrix &m = op_.matrix();
    double idempotence = (m * m - m).cwiseAbs().maxCoeff();
    double hermiticity = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (idempotence > tol || hermiticity > tol) {
        std::ostringstream msg;
        msg << "not a projector: |P^2 - P|_max = " << idempotence
            << ", |P - P^dagger|_max = " << hermiticity;
        throw ValidationError(msg.str());
    }
    rank_ = static_cast<std::size_t>(std::llround(m.trace().real()));
}

Projector Projector::rank1(const StateVector &v) {
    StateVector u = StateVector::normalized(v.amplitudes());
    return Projector(Operator(u.amplitudes() * u.amplitudes().adjoint()));
}

DensityMatrix::DensityMatrix(Operator op, double tol) : op_(std::move(op)) {
    if (!op_.is_hermitian(tol)) {
        throw ValidationError("density matrix is not Hermitian");
    }
    if (std::abs(trace() - 1.0) > tol) {
        throw ValidationError("density matrix trace " + std::to_string(trace()) + " differs from 1");
    }
    ComplexMatrix h = 0.5 * (op_.matrix() + op_.matrix().adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -tol) {
        throw ValidationError("density matrix has a negative eigenvalue");
    }
}

DensityMatrix DensityMatrix::pure(const StateVector &state) {
    if (!state.is_normalized()) {
        throw ValidationError("pure density matrix needs a normalized state");
    }
    return DensityMatrix(Operator(state.amplitudes() * state.amplitudes().adjoint()));
}

double DensityMatrix::trace() const {
    return op_.matrix().trace().real();
}

Complex inner(const StateVector &a, const StateVector &b) {
    if (a.dim() != b.dim()) {
        throw ShapeError("inner product dimension mismatch");
    }
    return a.amplitudes().dot(b.amplitudes());
}

double fidelity(const StateVector &a, const StateVector &b) {
    return std::norm(inner(a, b));
}

StateVector tensor(const StateVector &a, const StateVector &b) {
    std::size_t dim = checked_product(a.dim(), b.dim(), kMaxVectorDim);
    ComplexVector out(static_cast<Eigen::Index>(dim));
    const auto nb = static_cast<Eigen::Index>(b.dim());
    for (Eigen::Index i = 0; i < a.amplitudes().size(); ++i) {
        out.segment(i * nb, nb) = a.amplitudes()[i] * b.amplitudes();
    }
    return StateVector(std::move(out));
}

Operator tensor(const Operator &a, const Operator &b) {
    std::size_t dim = checked_product(a.dim(), b.dim(), kMaxOperatorDim);
    auto n = static_cast<Eigen::Index>(dim);
    const auto nb = static_cast<Eigen::Index>(b.dim());
    ComplexMatrix out(n, n);
    for (Eigen::Index i = 0; i < a.matrix().rows(); ++i) {
        for (Eigen::Index j = 0; j < a.matrix().cols(); ++j) {
            out.block(i * nb, j * nb, nb, nb) = a.matrix()(i, j) * b.matrix();
        }
    }
    return Operator(std::move(out));
}

StateVector tensor_product(std::span<const StateVector> factors) {
    if (factors.empty()) {
        throw ShapeError("tensor product of no factors");
    }
    StateVector out = factors.front();
    for (std::size_t k = 1; k < factors.size(); ++k) {
        out = tensor(out, factors[k]);
    }
    return out;
}

Operator tensor_product(std::span<const Operator> factors) {
    if (factors.empty()) {
        throw ShapeError("tensor product of no factors");
    }
    Operator out = factors.front();
    for (std::size_t k = 1; k < factors.size(); ++k) {
        out = tensor(out, factors[k]);
    }
    return out;
}

DensityMatrix partial_trace(const DensityMatrix &rho, std::span<const std::size_t> site_dims,
                            std::span<const std::size_t> keep) {
    SiteSplit split = split_sites(rho.dim(), site_dims, keep);
    if (keeps_everything(site_dims.size(), keep)) {
        return rho;
    }
    const ComplexMatrix &m = rho.op().matrix();
    auto nk = static_cast<Eigen::Index>(split.kept_dim);
    ComplexMatrix out = ComplexMatrix::Zero(nk, nk);
    const std::size_t nt = split.traced_dim;
    for (std::size_t a = 0; a < split.kept_dim; ++a) {
        for (std::size_t b = 0; b < split.kept_dim; ++b) {
            Complex sum = 0;
            for (std::size_t t = 0; t < nt; ++t) {
                sum += m(static_cast<Eigen::Index>(split.full[a * nt + t]),
                         static_cast<Eigen::Index>(split.full[b * nt + t]));
            }
            out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = sum;
        }
    }
    return DensityMatrix(Operator(std::move(out)), DensityMatrix::Unchecked{});
}

DensityMatrix reduced_density_matrix(const StateVector &psi, std::span<const std::size_t> site_dims,
                                     std::span<const std::size_t> keep) {
    if (!psi.is_normalized()) {
        throw ValidationError("reduced density matrix needs a normalized state");
    }
    SiteSplit split = split_sites(psi.dim(), site_dims, keep);
    check_operator_dim(split.kept_dim);
    const ComplexVector &amp = psi.amplitudes();
    auto nk = static_cast<Eigen::Index>(split.kept_dim);
    ComplexMatrix out = ComplexMatrix::Zero(nk, nk);
    const std::size_t nt = split.traced_dim;
    for (std::size_t a = 0; a < split.kept_dim; ++a) {
        for (std::size_t b = 0; b < split.kept_dim; ++b) {
            Complex sum = 0;
            for (std::size_t t = 0; t < nt; ++t) {
                sum += amp[static_cast<Eigen::Index>(split.full[a * nt + t])] *
                       std::conj(amp[static_cast<Eigen::Index>(split.full[b * nt + t])]);
            }
            out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = sum;
        }
    }
    return DensityMatrix(Operator(std::move(out)), DensityMatrix::Unchecked{});
}

Operator matrix_exponential(const Operator &a, const ExpmOptions &options) {
    const ComplexMatrix &m = a.matrix();
    const auto n = m.rows();
    double norm = one_norm(m);
    int squarings = 0;
    if (norm > options.scaled_norm) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / options.scaled_norm)));
    }
    ComplexMatrix scaled = m / std::ldexp(1.0, squarings);

    ComplexMatrix sum = ComplexMatrix::Identity(n, n);
    ComplexMatrix term = ComplexMatrix::Identity(n, n);
    bool converged = norm == 0;
    for (int k = 1; k <= options.max_terms && !converged; ++k) {
        term = (term * scaled) / static_cast<double>(k);
        sum += term;
        converged = one_norm(term) <= 0x1.0p-53 * one_norm(sum);
    }
    if (!converged) {
        throw NumericError("matrix exponential: Taylor series did not converge within " +
                           std::to_string(options.max_terms) + " terms");
    }
    for (int s = 0; s < squarings; ++s) {
        sum = sum * sum;
    }
    if (!sum.allFinite()) {
        throw NumericError("matrix exponential overflowed");
    }
    return Operator(std::move(sum));
}

ProjectorFamilyReport validate_projector_family(std::span<const Projector> projectors,
                                                std::size_t dim, double tol) {
    ProjectorFamilyReport report;
    auto fail = [&](std::string msg) {
        report.passed = false;
        report.failures.push_back(std::move(msg));
    };
    if (projectors.empty()) {
        fail("empty projector family");
        return report;
    }
    for (std::size_t i = 0; i < projectors.size(); ++i) {
        if (projectors[i].dim() != dim) {
            fail("projector " + std::to_string(i) + " has dimension " +
                 std::to_string(projectors[i].dim()) + ", expected " + std::to_string(dim));
        }
    }
    if (!report.passed) {
        return report;
    }

    for (std::size_t i = 0; i < projectors.size(); ++i) {
        for (std::size_t j = i + 1; j < projectors.size(); ++j) {
            double err =
                (projectors[i].op().matrix() * projectors[j].op().matrix()).cwiseAbs().maxCoeff();
            report.max_orthogonality_error = std::max(report.max_orthogonality_error, err);
            if (err > tol) {
                std::ostringstream msg;
                msg << "orthogonality: |P" << i << " P" << j << "|_max = " << err;
                fail(msg.str());
            }
        }
    }

    auto n = static_cast<Eigen::Index>(dim);
    ComplexMatrix sum = ComplexMatrix::Zero(n, n);
    for (const Projector &p : projectors) {
        sum += p.op().matrix();
    }
    report.completeness_error = (sum - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (report.completeness_error > tol) {
        std::ostringstream msg;
        msg << "completeness: |sum P - I|_max = " << report.completeness_error;
        fail(msg.str());
    }
    return report;
}

Operator spectral_observable(std::span<const double> values, std::span<const Projector> projectors) {
    if (values.size() != projectors.size()) {
        throw ShapeError("spectral observable needs one value per projector");
    }
    if (projectors.empty()) {
        throw ShapeError("spectral observable needs at least one projector");
    }
    ProjectorFamilyReport report = validate_projector_family(projectors, projectors.front().dim());
    if (!report.passed) {
        throw ValidationError("invalid projector family: " + report.failures.front());
    }
    auto n = static_cast<Eigen::Index>(projectors.front().dim());
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    for (std::size_t i = 0; i < values.size(); ++i) {
        m += values[i] * projectors[i].op().matrix();
    }
    return Operator(std::move(m));
}

double unitarity_defect(const Operator &u) {
    auto n = static_cast<Eigen::Index>(u.dim());
    // U^dagger U is Hermitian: a rank update fills only the lower triangle, half the work.
    ComplexMatrix gram = ComplexMatrix::Zero(n, n);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(u.matrix().adjoint());
    gram.diagonal().array() -= 1.0;
    return gram.triangularView<Eigen::Lower>().toDenseMatrix().cwiseAbs().maxCoeff();
}

bool is_unitary(const Operator &u, double tol) {
    return unitarity_defect(u) <= tol;
}

double operator_norm(const Operator &a) {
    Eigen::BDCSVD<ComplexMatrix> svd(a.matrix());
    return svd.singularValues().maxCoeff();
}

StateVector random_state(std::size_t dim, Rng &rng) {
    check_vector_dim(dim);
    ComplexVector v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double re = rng.normal();
        double im = rng.normal();
        v[i] = Complex(re, im);
    }
    return StateVector::normalized(std::move(v));
}

Operator random_operator(std::size_t dim, Rng &rng) {
    check_operator_dim(dim);
    auto n = static_cast<Eigen::Index>(dim);
    ComplexMatrix m(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        for (Eigen::Index r = 0; r < n; ++r) {
            double re = rng.normal();
            double im = rng.normal();
            m(r, c) = Complex(re, im);
        }
    }
    return Operator(std::move(m));
}

Operator random_unitary(std::size_t dim, Rng &rng) {
    ComplexMatrix g = random_operator(dim, rng).matrix();
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    auto n = static_cast<Eigen::Index>(dim);
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
    ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Multiply column k by the phase of R_kk so the distribution is Haar.
    for (Eigen::Index k = 0; k < n; ++k) {
        Complex d = r(k, k);
        double mag = std::abs(d);
        q.col(k) *= mag > 0 ? d / mag : Complex(1.0);
    }
    return Operator(std::move(q));
}

}  // namespace csmlab
