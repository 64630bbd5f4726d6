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

#ifndef CSMLAB_CONTEXTUALITY_H
#define CSMLAB_CONTEXTUALITY_H

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csmlab/error.h"
#include "csmlab/linalg.h"

namespace csmlab {

/// Rays grouped into complete orthogonal contexts.
///
/// Rays are kept exactly as supplied (so the JSON form round-trips bit for bit); computations use
/// normalized copies. Rays equal up to phase are merged on construction and context indices are
/// remapped to the first occurrence.
class RaySet {
   public:
    RaySet(std::size_t dim, std::vector<ComplexVector> rays,
           std::vector<std::vector<std::size_t>> contexts);

    /// JSON: {"dim": d, "rays": [[[re, im], ...], ...], "contexts": [[i, ...], ...]}.
    static RaySet from_json(std::string_view text);
    std::string to_json() const;
    static RaySet load(const std::filesystem::path &path);
    void save(const std::filesystem::path &path) const;

    /// Cabello-Estebaranz-Garcia-Alcaine 18-ray, 9-context set in dimension 4.
    static RaySet cabello18();

    /// Same rays, only the listed contexts.
    RaySet with_contexts(std::span<const std::size_t> which) const;

    std::size_t dim() const noexcept {
        return dim_;
    }
    const std::vector<ComplexVector> &rays() const noexcept {
        return rays_;
    }
    const StateVector &unit_ray(std::size_t i) const {
        return unit_rays_.at(i);
    }
    const std::vector<std::vector<std::size_t>> &contexts() const noexcept {
        return contexts_;
    }
    /// Largest |<r_i|r_j>| over distinct rays sharing a context.
    double max_context_overlap() const;

    bool operator==(const RaySet &other) const;

   private:
    std::size_t dim_;
    std::vector<ComplexVector> rays_;
    std::vector<StateVector> unit_rays_;
    std::vector<std::vector<std::size_t>> contexts_;
};

enum class AssignmentStatus { Found, NoneExists };

struct SearchStats {
    std::uint64_t nodes = 0;
    /// True when the whole search space was exhausted.
    bool complete = false;
};

struct AssignmentResult {
    AssignmentStatus status = AssignmentStatus::NoneExists;
    /// Ray index -> 0/1 when found.
    std::vector<std::uint8_t> assignment;
    SearchStats stats;
    /// SHA-256 over the sequence of branching decisions and their results.
    std::string trace_hash;
};

struct SearchOptions {
    /// When set, rays and branch values are tried in an order shuffled with this seed.
    std::optional<std::uint64_t> shuffle_seed;
};

/// Complete backtracking search for a {0,1} valuation with exactly one 1 per context. With default
/// options the returned valuation is the lexicographically first one.
AssignmentResult assignment_search(const RaySet &rays, const SearchOptions &options = {});

/// Independent post-hoc check of an assignment. Returns the violated constraints, empty if sound.
std::vector<std::string> assignment_violations(const RaySet &rays,
                                               std::span<const std::uint8_t> assignment);

struct KsCertificate {
    std::string text;
    std::string trace_hash;
    std::uint64_t nodes = 0;
};

/// Raised by verify_ks on a set that admits a valuation.
class KsMismatchError : public ValidationError {
   public:
    KsMismatchError(const std::string &what, std::vector<std::uint8_t> assignment)
        : ValidationError(what), assignment_(std::move(assignment)) {
    }
    const std::vector<std::uint8_t> &assignment() const noexcept {
        return assignment_;
    }

   private:
    std::vector<std::uint8_t> assignment_;
};

/// Certifies that no noncontextual valuation exists: replays the search and confirms the
/// verdict under shuffled branching orders.
KsCertificate verify_ks(const RaySet &rays);

}  // namespace csmlab

#endif
