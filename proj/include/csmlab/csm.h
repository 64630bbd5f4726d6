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

#ifndef CSMLAB_CSM_H
#define CSMLAB_CSM_H

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csmlab/linalg.h"
#include "csmlab/rng.h"

namespace csmlab {

/// Value tuple m_i attached to one outcome of a context.
using ValueTuple = std::vector<double>;

/// A measurement setting: D orthonormal rays, each labelled with a distinct value tuple.
///
/// Contexts are non-degenerate: every outcome is a rank-1 projector, and a context of a
/// D-dimensional system always has exactly D outcomes.
class Context {
   public:
    Context(std::vector<StateVector> basis, std::vector<ValueTuple> labels, std::string name = {});
    /// Labels default to the outcome index.
    explicit Context(std::vector<StateVector> basis, std::string name = {});

    static Context computational(std::size_t dim, std::string name = "Z");
    /// Columns of `u` as the basis.
    static Context from_columns(const Operator &u, std::string name = {});

    std::size_t dim() const noexcept {
        return basis_.size();
    }
    const std::vector<StateVector> &basis() const noexcept {
        return basis_;
    }
    const std::vector<ValueTuple> &labels() const noexcept {
        return labels_;
    }
    const std::string &name() const noexcept {
        return name_;
    }
    std::vector<Projector> projectors() const;

   private:
    std::vector<StateVector> basis_;
    std::vector<ValueTuple> labels_;
    std::string name_;
};

using ContextPtr = std::shared_ptr<const Context>;

/// A definite outcome of a context: the pair (context, outcome index).
class Modality {
   public:
    Modality(ContextPtr context, std::size_t index);

    const Context &context() const noexcept {
        return *context_;
    }
    const ContextPtr &context_ptr() const noexcept {
        return context_;
    }
    std::size_t index() const noexcept {
        return index_;
    }
    const ValueTuple &value() const {
        return context_->labels()[index_];
    }
    const StateVector &ray() const {
        return context_->basis()[index_];
    }
    std::size_t dim() const noexcept {
        return context_->dim();
    }

   private:
    ContextPtr context_;
    std::size_t index_;
};

struct MeasurementRecord {
    std::string input;
    /// Null for checks that are not rank-1 contexts (see `context_name`).
    ContextPtr context;
    std::string context_name;
    std::size_t outcome = 0;
    ValueTuple value;
    StateVector post_state{ComplexVector::Ones(1)};
    double probability = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    /// Stream position before the outcome draw.
    std::uint64_t stream_position = 0;
};

/// Phase-free, tolerance-snapped key of a ray. Equal keys mean equal rank-1 projectors.
struct CanonicalRay {
    std::vector<std::int64_t> components;
    auto operator<=>(const CanonicalRay &) const = default;
};

/// Normalizes, rotates the first largest-magnitude amplitude onto the positive real axis and snaps
/// every component to a grid of spacing `kTolAlg`.
CanonicalRay canonical_ray(const StateVector &v);

struct ExtravalenceClass {
    Projector representative;
    std::vector<Modality> members;
};

double born_probability(const Modality &prepared, const Modality &target);
/// |<b_i|state>|^2 for every basis vector of `context`.
std::vector<double> born_distribution(const StateVector &state, const Context &context);

/// Samples one outcome from the Born distribution and replaces the state by the realized basis
/// vector. Throws ValidationError for unnormalized input.
MeasurementRecord measure(const StateVector &state, const ContextPtr &context, Rng &rng,
                          std::string input = {});

/// New context with basis U b_i and the same labels. Rejects non-unitary U.
Context transform_context(const Context &context, const Operator &u);

/// True when both modalities select the same ray (phase ignored).
bool extravalent(const Modality &a, const Modality &b);

/// Groups modalities by ray. Classes are ordered by first appearance.
std::vector<ExtravalenceClass> extravalence_classes(std::span<const Modality> modalities);

/// The modality of `target` reached with certainty from `m`, if any.
std::optional<Modality> certainty_transfer(const Modality &m, const ContextPtr &target);

/// Residual of `candidate` after removing its components along `basis` (modified Gram-Schmidt,
/// two passes). `basis` must be orthonormal.
ComplexVector gram_schmidt_residual(const StateVector &candidate,
                                    std::span<const StateVector> basis);

/// Unit vector orthogonal to every vector of `partial`, if one exists.
std::optional<StateVector> orthogonal_completion(std::span<const StateVector> partial,
                                                 std::size_t dim);

struct ExclusivityReport {
    std::size_t dim = 0;
    std::size_t candidates = 0;
    double max_residual = 0;
    bool passed = false;
};

/// Samples random unit candidates and records the largest Gram-Schmidt residual against the full
/// context basis. A residual above `kTolAlg` would be a (D+1)-th distinguishable outcome.
ExclusivityReport assert_exclusivity_bound(const Context &context, std::size_t candidates, Rng &rng);

}  // namespace csmlab

#endif
