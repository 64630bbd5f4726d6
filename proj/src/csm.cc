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

#include "csmlab/csm.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "csmlab/error.h"

namespace csmlab {

namespace {

std::vector<ValueTuple> index_labels(std::size_t n) {
    std::vector<ValueTuple> labels;
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels.push_back({static_cast<double>(i)});
    }
    return labels;
}

std::vector<StateVector> columns_of(const Operator &u) {
    std::vector<StateVector> cols;
    cols.reserve(u.dim());
    for (Eigen::Index c = 0; c < u.matrix().cols(); ++c) {
        cols.emplace_back(u.matrix().col(c));
    }
    return cols;
}

}  // namespace

Context::Context(std::vector<StateVector> basis, std::vector<ValueTuple> labels, std::string name)
    : basis_(std::move(basis)), labels_(std::move(labels)), name_(std::move(name)) {
    if (basis_.empty()) {
        throw ValidationError("context needs at least one basis vector");
    }
    const std::size_t d = basis_.front().dim();
    if (basis_.size() != d) {
        throw ValidationError("context of a dimension-" + std::to_string(d) + " system needs " +
                              std::to_string(d) + " outcomes, got " +
                              std::to_string(basis_.size()));
    }
    if (labels_.size() != basis_.size()) {
        throw ValidationError("context needs one label per basis vector");
    }
    for (std::size_t i = 0; i < d; ++i) {
        if (basis_[i].dim() != d) {
            throw ShapeError("context basis vectors have mixed dimensions");
        }
        for (std::size_t j = i; j < d; ++j) {
            Complex g = inner(basis_[i], basis_[j]);
            double err = std::abs(g - (i == j ? Complex(1.0) : Complex(0.0)));
            if (err > kTolAlg) {
                std::ostringstream msg;
                msg << "context basis is not orthonormal: |<b" << i << "|b" << j
                    << "> - delta| = " << err;
                throw ValidationError(msg.str());
            }
        }
    }
    std::set<ValueTuple> distinct(labels_.begin(), labels_.end());
    if (distinct.size() != labels_.size()) {
        throw ValidationError("context labels must be distinct");
    }
}

Context::Context(std::vector<StateVector> basis, std::string name)
    : Context(basis, index_labels(basis.size()), std::move(name)) {
}

Context Context::computational(std::size_t dim, std::string name) {
    std::vector<StateVector> basis;
    basis.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        basis.push_back(StateVector::basis(dim, i));
    }
    return Context(std::move(basis), std::move(name));
}

Context Context::from_columns(const Operator &u, std::string name) {
    return Context(columns_of(u), std::move(name));
}

std::vector<Projector> Context::projectors() const {
    std::vector<Projector> out;
    out.reserve(basis_.size());
    for (const StateVector &b : basis_) {
        out.push_back(Projector::rank1(b));
    }
    return out;
}

Modality::Modality(ContextPtr context, std::size_t index)
    : context_(std::move(context)), index_(index) {
    if (!context_) {
        throw ValidationError("modality needs a context");
    }
    if (index_ >= context_->dim()) {
        throw ShapeError("modality index " + std::to_string(index_) + " out of range");
    }
}

CanonicalRay canonical_ray(const StateVector &v) {
    StateVector u = StateVector::normalized(v.amplitudes());
    const ComplexVector &a = u.amplitudes();
    double largest = a.cwiseAbs().maxCoeff();
    Eigen::Index pivot = 0;
    // First index within a loose margin of the maximum, so near-ties resolve the same way for
    // vectors that differ only by rounding.
    while (std::abs(a[pivot]) < largest - 1e-8) {
        ++pivot;
    }
    Complex phase = std::conj(a[pivot]) / std::abs(a[pivot]);
    CanonicalRay key;
    key.components.reserve(2 * static_cast<std::size_t>(a.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        Complex z = a[i] * phase;
        key.components.push_back(std::llround(z.real() / kTolAlg));
        key.components.push_back(std::llround(z.imag() / kTolAlg));
    }
    return key;
}

double born_probability(const Modality &prepared, const Modality &target) {
    if (prepared.dim() != target.dim()) {
        throw ShapeError("born probability between modalities of different dimension");
    }
    return std::min(1.0, fidelity(prepared.ray(), target.ray()));
}

std::vector<double> born_distribution(const StateVector &state, const Context &context) {
    if (state.dim() != context.dim()) {
        throw ShapeError("state dimension " + std::to_string(state.dim()) +
                         " does not match context dimension " + std::to_string(context.dim()));
    }
    std::vector<double> p;
    p.reserve(context.dim());
    for (const StateVector &b : context.basis()) {
        p.push_back(fidelity(b, state));
    }
    return p;
}

MeasurementRecord measure(const StateVector &state, const ContextPtr &context, Rng &rng,
                          std::string input) {
    if (!context) {
        throw ValidationError("measure needs a context");
    }
    if (!state.is_normalized()) {
        throw ValidationError("measure rejects an unnormalized state (norm " +
                              std::to_string(state.norm()) + ")");
    }
    std::vector<double> p = born_distribution(state, *context);

    MeasurementRecord rec;
    rec.input = std::move(input);
    rec.context = context;
    rec.context_name = context->name();
    rec.seed = rng.seed();
    rec.stream = rng.stream();
    rec.stream_position = rng.position();
    double u = rng.uniform();

    // A state that is exactly a basis vector of this context is already actualized.
    auto same = std::find(context->basis().begin(), context->basis().end(), state);
    std::size_t outcome = 0;
    if (same != context->basis().end()) {
        outcome = static_cast<std::size_t>(same - context->basis().begin());
    } else {
        double total = 0;
        for (double pi : p) {
            total += pi;
        }
        double target = u * total;
        double cumulative = 0;
        std::size_t last_nonzero = 0;
        outcome = p.size();
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] <= 0) {
                continue;
            }
            last_nonzero = i;
            cumulative += p[i];
            if (target < cumulative) {
                outcome = i;
                break;
            }
        }
        if (outcome == p.size()) {
            outcome = last_nonzero;
        }
    }
    rec.outcome = outcome;
    rec.value = context->labels()[outcome];
    rec.probability = std::min(1.0, p[outcome]);
    rec.post_state = context->basis()[outcome];
    return rec;
}

Context transform_context(const Context &context, const Operator &u) {
    if (u.dim() != context.dim()) {
        throw ShapeError("transform dimension does not match context");
    }
    double defect = unitarity_defect(u);
    if (defect > kTolAlg) {
        throw ValidationError("context transformation is not unitary (defect " +
                              std::to_string(defect) + ")");
    }
    std::vector<StateVector> basis;
    basis.reserve(context.dim());
    for (const StateVector &b : context.basis()) {
        basis.push_back(u * b);
    }
    return Context(std::move(basis), context.labels(), context.name());
}

bool extravalent(const Modality &a, const Modality &b) {
    if (a.dim() != b.dim()) {
        return false;
    }
    return canonical_ray(a.ray()) == canonical_ray(b.ray());
}

std::vector<ExtravalenceClass> extravalence_classes(std::span<const Modality> modalities) {
    std::vector<ExtravalenceClass> classes;
    std::map<std::pair<std::size_t, CanonicalRay>, std::size_t> slot;
    for (const Modality &m : modalities) {
        auto key = std::make_pair(m.dim(), canonical_ray(m.ray()));
        auto it = slot.find(key);
        if (it == slot.end()) {
            slot.emplace(std::move(key), classes.size());
            classes.push_back({Projector::rank1(m.ray()), {m}});
        } else {
            classes[it->second].members.push_back(m);
        }
    }
    return classes;
}

std::optional<Modality> certainty_transfer(const Modality &m, const ContextPtr &target) {
    if (!target || target->dim() != m.dim()) {
        return std::nullopt;
    }
    for (std::size_t i = 0; i < target->dim(); ++i) {
        if (fidelity(m.ray(), target->basis()[i]) >= 1.0 - kTolAlg) {
            return Modality(target, i);
        }
    }
    return std::nullopt;
}

ComplexVector gram_schmidt_residual(const StateVector &candidate,
                                    std::span<const StateVector> basis) {
    ComplexVector r = candidate.amplitudes();
    for (int pass = 0; pass < 2; ++pass) {
        for (const StateVector &b : basis) {
            if (b.dim() != candidate.dim()) {
                throw ShapeError("Gram-Schmidt basis dimension mismatch");
            }
            r -= b.amplitudes().dot(r) * b.amplitudes();
        }
    }
    return r;
}

std::optional<StateVector> orthogonal_completion(std::span<const StateVector> partial,
                                                 std::size_t dim) {
    std::vector<StateVector> ortho;
    for (const StateVector &v : partial) {
        if (v.dim() != dim) {
            throw ShapeError("orthogonal completion dimension mismatch");
        }
        ComplexVector r = gram_schmidt_residual(v, ortho);
        if (r.norm() > kTolAlg) {
            ortho.push_back(StateVector::normalized(std::move(r)));
        }
    }
    ComplexVector best;
    double best_norm = 0;
    for (std::size_t k = 0; k < dim; ++k) {
        ComplexVector r = gram_schmidt_residual(StateVector::basis(dim, k), ortho);
        if (r.norm() > best_norm) {
            best_norm = r.norm();
            best = std::move(r);
        }
    }
    if (best_norm <= kTolAlg) {
        return std::nullopt;
    }
    return StateVector::normalized(std::move(best));
}

ExclusivityReport assert_exclusivity_bound(const Context &context, std::size_t candidates, Rng &rng) {
    ExclusivityReport report;
    report.dim = context.dim();
    report.candidates = candidates;
    for (std::size_t k = 0; k < candidates; ++k) {
        StateVector c = random_state(context.dim(), rng);
        report.max_residual =
            std::max(report.max_residual, gram_schmidt_residual(c, context.basis()).norm());
    }
    report.passed = report.max_residual <= kTolAlg;
    return report;
}

}  // namespace csmlab
