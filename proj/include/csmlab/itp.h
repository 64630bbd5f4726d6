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

#ifndef CSMLAB_ITP_H
#define CSMLAB_ITP_H

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "csmlab/linalg.h"

namespace csmlab {

/// Product state over N sites, site dimensions may differ.
class ProductState {
   public:
    explicit ProductState(std::vector<StateVector> sites);

    std::size_t size() const noexcept {
        return sites_.size();
    }
    const StateVector &site(std::size_t alpha) const {
        return sites_.at(alpha);
    }
    const std::vector<StateVector> &sites() const noexcept {
        return sites_;
    }
    /// Dense amplitude vector (left fold, site 0 slowest).
    StateVector expand() const;

   private:
    std::vector<StateVector> sites_;
};

/// Qubit product states with <psi_a|phi_a> = overlaps[a]: psi_a = |0>, phi_a = c|0> + sqrt(1-c^2)|1>.
std::pair<ProductState, ProductState> product_pair_with_overlaps(std::span<const double> overlaps);

/// prod_{a in J} <psi_a|phi_a>.
Complex partial_overlap(const ProductState &psi, const ProductState &phi,
                        std::span<const std::size_t> sites);

struct MinimalPrefix {
    /// Smallest prefix length M with |o_M| < epsilon; empty when no prefix reaches it.
    std::optional<std::size_t> m;
    Complex final_overlap;
    double final_abs_overlap = 1;
};

MinimalPrefix minimal_m_for_epsilon(const ProductState &psi, const ProductState &phi,
                                    double epsilon);

/// <psi_K|A|phi_K> * prod_{a in J \ K} <psi_a|phi_a>, with A acting on the sites of `support` in
/// ascending order.
Complex restricted_matrix_element(const Operator &a, std::span<const std::size_t> support,
                                  const ProductState &psi, const ProductState &phi,
                                  std::span<const std::size_t> sites);

enum class SectorClass { SameSector, DifferentSector, Inconclusive };
const char *sector_class_name(SectorClass c);

struct SectorThresholds {
    /// Same sector when S_N - S_{N/2} is below this.
    double converged = 1e-6;
    /// Different sectors when S_N exceeds this.
    double diverged = 10;
};

struct SectorReport {
    /// Entry M-1 holds the prefix quantity for M = 1..N.
    std::vector<Complex> overlaps;
    std::vector<double> abs_overlaps;
    std::vector<double> partial_sums;
    double epsilon = 0;
    std::optional<std::size_t> minimal_m;
    /// S_N - S_{floor(N/2)}.
    double tail_increment = 0;
    SectorClass classification = SectorClass::Inconclusive;
    SectorThresholds thresholds;
};

/// Finite-N sector statistic S_M = sum_{a <= M} (1 - |<psi_a|phi_a>|) with the full prefix
/// sequences. Only moduli enter the classification.
SectorReport sector_classify(const ProductState &psi, const ProductState &phi,
                             const SectorThresholds &thresholds = {}, double epsilon = 1e-6);

struct DecoherencePoint {
    std::size_t n = 0;
    /// |rho_01| of the reduced system qubit.
    double coherence = 0;
    /// (1/2) |cos theta|^N.
    double predicted = 0;
    /// coherence relative to the undecohered value 1/2.
    double relative_coherence = 0;
    /// Estimate 1 / relative_coherence^2.
    double repetitions = 0;
    /// True when `coherence` came from a dense partial trace, false for the closed form.
    bool dense = false;
    bool z_diagonal_dominant = true;
};

struct DecoherenceReport {
    double theta = 0;
    std::size_t dense_max_n = 0;
    std::vector<DecoherencePoint> points;
};

/// Inclusive bound on N for the dense partial-trace path in `decoherence_sweep`.
inline constexpr std::size_t kDecoherenceDenseMaxN = 16;

/// Dense oracle: builds (|0>|E0>^N + |1>|E1>^N)/sqrt(2) with <E0|E1> = cos(theta) and traces
/// out the environment. Returns the reduced system density matrix.
DensityMatrix decohered_system_state(double theta, std::size_t n);

/// For each N, the system-qubit coherence after entangling with N environment sites. N above
/// `dense_max_n` uses the closed form; every point records which path produced it.
DecoherenceReport decoherence_sweep(double theta, std::span<const std::size_t> n_values,
                                    std::size_t dense_max_n = kDecoherenceDenseMaxN);

}  // namespace csmlab

#endif
