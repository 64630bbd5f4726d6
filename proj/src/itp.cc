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

#include "csmlab/itp.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "csmlab/error.h"

namespace csmlab {

namespace {

void check_pair(const ProductState &psi, const ProductState &phi) {
    if (psi.size() != phi.size()) {
        throw ShapeError("product states have " + std::to_string(psi.size()) + " and " +
                         std::to_string(phi.size()) + " sites");
    }
    for (std::size_t a = 0; a < psi.size(); ++a) {
        if (psi.site(a).dim() != phi.site(a).dim()) {
            throw ShapeError("site " + std::to_string(a) + " dimensions differ");
        }
    }
}

void check_sites(std::span<const std::size_t> sites, std::size_t n) {
    std::set<std::size_t> seen;
    for (std::size_t a : sites) {
        if (a >= n) {
            throw ShapeError("site index " + std::to_string(a) + " out of range for " +
                             std::to_string(n) + " sites");
        }
        if (!seen.insert(a).second) {
            throw ShapeError("site index " + std::to_string(a) + " repeated");
        }
    }
}

// Site overlap modulus clamped to 1 so prefix products are non-increasing in floating point.
double clamped_abs(Complex z) {
    return std::min(1.0, std::abs(z));
}

}  // namespace

ProductState::ProductState(std::vector<StateVector> sites) : sites_(std::move(sites)) {
    if (sites_.empty()) {
        throw ShapeError("product state needs at least one site");
    }
    for (std::size_t a = 0; a < sites_.size(); ++a) {
        if (!sites_[a].is_normalized()) {
            throw ValidationError("product state site " + std::to_string(a) + " is not normalized");
        }
    }
}

StateVector ProductState::expand() const {
    return tensor_product(sites_);
}

std::pair<ProductState, ProductState> product_pair_with_overlaps(std::span<const double> overlaps) {
    std::vector<StateVector> psi;
    std::vector<StateVector> phi;
    psi.reserve(overlaps.size());
    phi.reserve(overlaps.size());
    for (double c : overlaps) {
        if (!(c >= 0 && c <= 1)) {
            throw ValidationError("site overlap must lie in [0, 1]");
        }
        ComplexVector v(2);
        v << c, std::sqrt(1.0 - c * c);
        psi.push_back(StateVector::basis(2, 0));
        phi.emplace_back(std::move(v));
    }
    return {ProductState(std::move(psi)), ProductState(std::move(phi))};
}

Complex partial_overlap(const ProductState &psi, const ProductState &phi,
                        std::span<const std::size_t> sites) {
    check_pair(psi, phi);
    check_sites(sites, psi.size());
    Complex product = 1.0;
    for (std::size_t a : sites) {
        product *= inner(psi.site(a), phi.site(a));
    }
    return product;
}

MinimalPrefix minimal_m_for_epsilon(const ProductState &psi, const ProductState &phi,
                                    double epsilon) {
    check_pair(psi, phi);
    if (!(epsilon > 0 && epsilon <= 1)) {
        throw ValidationError("epsilon must lie in (0, 1]");
    }
    MinimalPrefix out;
    out.final_overlap = 1.0;
    for (std::size_t a = 0; a < psi.size(); ++a) {
        Complex site = inner(psi.site(a), phi.site(a));
        out.final_overlap *= site;
        out.final_abs_overlap *= clamped_abs(site);
        if (out.final_abs_overlap < epsilon) {
            out.m = a + 1;
            break;
        }
    }
    return out;
}

Complex restricted_matrix_element(const Operator &a, std::span<const std::size_t> support,
                                  const ProductState &psi, const ProductState &phi,
                                  std::span<const std::size_t> sites) {
    check_pair(psi, phi);
    check_sites(sites, psi.size());
    check_sites(support, psi.size());
    if (support.empty()) {
        throw ShapeError("operator support must be non-empty");
    }
    std::set<std::size_t> in_j(sites.begin(), sites.end());
    for (std::size_t k : support) {
        if (!in_j.contains(k)) {
            throw ShapeError("operator support site " + std::to_string(k) +
                             " is not contained in the site set");
        }
    }
    std::vector<std::size_t> k_sorted(support.begin(), support.end());
    std::sort(k_sorted.begin(), k_sorted.end());

    std::vector<StateVector> psi_k;
    std::vector<StateVector> phi_k;
    for (std::size_t k : k_sorted) {
        psi_k.push_back(psi.site(k));
        phi_k.push_back(phi.site(k));
    }
    StateVector left = tensor_product(psi_k);
    StateVector right = tensor_product(phi_k);
    if (left.dim() != a.dim()) {
        throw ShapeError("operator dimension " + std::to_string(a.dim()) +
                         " does not match its support dimension " + std::to_string(left.dim()));
    }
    Complex value = inner(left, a * right);

    std::set<std::size_t> in_k(k_sorted.begin(), k_sorted.end());
    for (std::size_t j : sites) {
        if (!in_k.contains(j)) {
            value *= inner(psi.site(j), phi.site(j));
        }
    }
    return value;
}

const char *sector_class_name(SectorClass c) {
    switch (c) {
        case SectorClass::SameSector:
            return "same-sector";
        case SectorClass::DifferentSector:
            return "different-sector";
        case SectorClass::Inconclusive:
            return "inconclusive";
    }
    return "?";
}

SectorReport sector_classify(const ProductState &psi, const ProductState &phi,
                             const SectorThresholds &thresholds, double epsilon) {
    check_pair(psi, phi);
    SectorReport r;
    r.thresholds = thresholds;
    r.epsilon = epsilon;
    const std::size_t n = psi.size();
    r.overlaps.reserve(n);
    r.abs_overlaps.reserve(n);
    r.partial_sums.reserve(n);

    Complex product = 1.0;
    double abs_product = 1.0;
    double s = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        Complex site = inner(psi.site(a), phi.site(a));
        double m = clamped_abs(site);
        product *= site;
        abs_product *= m;
        s += 1.0 - m;
        r.overlaps.push_back(product);
        r.abs_overlaps.push_back(abs_product);
        r.partial_sums.push_back(s);
        if (!r.minimal_m && abs_product < epsilon) {
            r.minimal_m = a + 1;
        }
    }

    const std::size_t half = n / 2;
    const double s_half = half == 0 ? 0.0 : r.partial_sums[half - 1];
    r.tail_increment = s - s_half;
    if (s > thresholds.diverged) {
        r.classification = SectorClass::DifferentSector;
    } else if (r.tail_increment < thresholds.converged) {
        r.classification = SectorClass::SameSector;
    } else {
        r.classification = SectorClass::Inconclusive;
    }
    return r;
}

DensityMatrix decohered_system_state(double theta, std::size_t n) {
    if (n + 1 > 20) {
        throw CapacityError("dense decoherence state with " + std::to_string(n) +
                            " environment sites exceeds the vector budget");
    }
    ComplexVector e1(2);
    e1 << std::cos(theta), std::sin(theta);
    const StateVector env0 = StateVector::basis(2, 0);
    const StateVector env1(std::move(e1));

    std::vector<StateVector> branch0{StateVector::basis(2, 0)};
    std::vector<StateVector> branch1{StateVector::basis(2, 1)};
    for (std::size_t k = 0; k < n; ++k) {
        branch0.push_back(env0);
        branch1.push_back(env1);
    }
    StateVector psi = StateVector::normalized(tensor_product(branch0).amplitudes() +
                                              tensor_product(branch1).amplitudes());
    std::vector<std::size_t> dims(n + 1, 2);
    const std::size_t keep[] = {0};
    return reduced_density_matrix(psi, dims, keep);
}

DecoherenceReport decoherence_sweep(double theta, std::span<const std::size_t> n_values,
                                    std::size_t dense_max_n) {
    if (dense_max_n + 1 > 20) {
        throw CapacityError("dense decoherence budget N <= " + std::to_string(dense_max_n) +
                            " exceeds the vector budget");
    }
    if (!std::isfinite(theta)) {
        throw ValidationError("coupling angle must be finite");
    }
    DecoherenceReport report;
    report.theta = theta;
    report.dense_max_n = dense_max_n;
    const double c = std::abs(std::cos(theta));
    for (std::size_t n : n_values) {
        if (n == 0) {
            throw ValidationError("environment size N must be positive");
        }
        DecoherencePoint p;
        p.n = n;
        p.predicted = 0.5 * std::pow(c, static_cast<double>(n));
        if (n <= dense_max_n) {
            DensityMatrix rho = decohered_system_state(theta, n);
            p.coherence = std::abs(rho(0, 1));
            p.dense = true;
            p.z_diagonal_dominant =
                p.coherence <= std::min(rho(0, 0).real(), rho(1, 1).real()) + kTolAlg;
        } else {
            p.coherence = p.predicted;
            p.dense = false;
            p.z_diagonal_dominant = p.coherence <= 0.5;
        }
        p.relative_coherence = 2.0 * p.coherence;
        p.repetitions = 1.0 / (p.relative_coherence * p.relative_coherence);
        report.points.push_back(p);
    }
    return report;
}

}  // namespace csmlab
