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

#include "csmlab/contextuality.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "csmlab/csm.h"
#include "csmlab/digest.h"
#include "csmlab/rng.h"
#include "json.hpp"

namespace csmlab {

namespace {

using nlohmann::json;

// Propagating backtracking search over ray valuations.
class Search {
   public:
    Search(const RaySet &rays, const SearchOptions &options)
        : rays_(rays), value_(rays.rays().size(), kUnset), incident_(rays.rays().size()) {
        const auto &contexts = rays.contexts();
        ones_.assign(contexts.size(), 0);
        open_.resize(contexts.size());
        for (std::size_t c = 0; c < contexts.size(); ++c) {
            open_[c] = contexts[c].size();
            for (std::size_t r : contexts[c]) {
                incident_[r].push_back(c);
            }
        }
        order_.resize(value_.size());
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        if (options.shuffle_seed) {
            rng_.emplace(*options.shuffle_seed, 0x6b73);
            std::shuffle(order_.begin(), order_.end(), *rng_);
        }
    }

    AssignmentResult run() {
        AssignmentResult result;
        bool found = descend(0);
        result.stats.nodes = nodes_;
        if (found) {
            result.status = AssignmentStatus::Found;
            result.assignment.assign(value_.begin(), value_.end());
            result.stats.complete = false;
            trace_ += "found";
        } else {
            result.status = AssignmentStatus::NoneExists;
            result.stats.complete = true;
            trace_ += "exhausted";
        }
        result.trace_hash = sha256_hex(trace_);
        return result;
    }

   private:
    static constexpr std::uint8_t kUnset = 2;

    bool descend(std::size_t pos) {
        while (pos < order_.size() && value_[order_[pos]] != kUnset) {
            ++pos;
        }
        if (pos == order_.size()) {
            return true;
        }
        const std::size_t ray = order_[pos];
        std::uint8_t first = 0;
        if (rng_ && (*rng_)() & 1) {
            first = 1;
        }
        for (std::uint8_t v : {first, static_cast<std::uint8_t>(1 - first)}) {
            ++nodes_;
            const std::size_t mark = trail_.size();
            bool ok = assign(ray, v);
            trace_ += 'r' + std::to_string(ray) + '=' + static_cast<char>('0' + v) +
                      (ok ? ':' : 'x') + ';';
            if (ok && descend(pos + 1)) {
                return true;
            }
            undo(mark);
        }
        return false;
    }

    // Assigns and propagates forced values. Returns false on conflict; the caller undoes the trail.
    bool assign(std::size_t ray, std::uint8_t v) {
        std::deque<std::pair<std::size_t, std::uint8_t>> queue{{ray, v}};
        while (!queue.empty()) {
            auto [r, val] = queue.front();
            queue.pop_front();
            if (value_[r] != kUnset) {
                if (value_[r] != val) {
                    return false;
                }
                continue;
            }
            set(r, val);
            for (std::size_t c : incident_[r]) {
                if (ones_[c] > 1) {
                    return false;
                }
                if (ones_[c] == 0 && open_[c] == 0) {
                    return false;
                }
                const auto &members = rays_.contexts()[c];
                if (ones_[c] == 1) {
                    for (std::size_t m : members) {
                        if (value_[m] == kUnset) {
                            queue.emplace_back(m, 0);
                        }
                    }
                } else if (open_[c] == 1) {
                    for (std::size_t m : members) {
                        if (value_[m] == kUnset) {
                            queue.emplace_back(m, 1);
                        }
                    }
                }
            }
        }
        return true;
    }

    void set(std::size_t r, std::uint8_t v) {
        value_[r] = v;
        trail_.push_back(r);
        for (std::size_t c : incident_[r]) {
            --open_[c];
            ones_[c] += v;
        }
    }

    void undo(std::size_t mark) {
        while (trail_.size() > mark) {
            std::size_t r = trail_.back();
            trail_.pop_back();
            for (std::size_t c : incident_[r]) {
                ++open_[c];
                ones_[c] -= value_[r];
            }
            value_[r] = kUnset;
        }
    }

    const RaySet &rays_;
    std::vector<std::uint8_t> value_;
    std::vector<std::vector<std::size_t>> incident_;
    std::vector<std::size_t> ones_;
    std::vector<std::size_t> open_;
    std::vector<std::size_t> trail_;
    std::vector<std::size_t> order_;
    std::optional<Rng> rng_;
    std::uint64_t nodes_ = 0;
    std::string trace_;
};

ComplexVector parse_ray(const json &j, std::size_t dim) {
    if (!j.is_array() || j.size() != dim) {
        throw ValidationError("ray must be an array of " + std::to_string(dim) + " [re, im] pairs");
    }
    ComplexVector v(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim; ++k) {
        const json &z = j[k];
        if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) {
            throw ValidationError("ray component must be [re, im]");
        }
        v[static_cast<Eigen::Index>(k)] = Complex(z[0].get<double>(), z[1].get<double>());
    }
    return v;
}

}  // namespace

RaySet::RaySet(std::size_t dim, std::vector<ComplexVector> rays,
               std::vector<std::vector<std::size_t>> contexts)
    : dim_(dim) {
    if (dim_ < 2) {
        throw ValidationError("ray set dimension must be at least 2");
    }
    std::map<CanonicalRay, std::size_t> first;
    std::vector<std::size_t> remap(rays.size());
    for (std::size_t i = 0; i < rays.size(); ++i) {
        if (static_cast<std::size_t>(rays[i].size()) != dim_) {
            throw ShapeError("ray " + std::to_string(i) + " has the wrong dimension");
        }
        StateVector unit = StateVector::normalized(rays[i]);
        auto [it, inserted] = first.emplace(canonical_ray(unit), rays_.size());
        if (inserted) {
            rays_.push_back(rays[i]);
            unit_rays_.push_back(std::move(unit));
        }
        remap[i] = it->second;
    }

    for (std::size_t c = 0; c < contexts.size(); ++c) {
        std::vector<std::size_t> group;
        for (std::size_t idx : contexts[c]) {
            if (idx >= rays.size()) {
                throw ValidationError("context " + std::to_string(c) + " references missing ray " +
                                      std::to_string(idx));
            }
            group.push_back(remap[idx]);
        }
        if (group.size() != dim_) {
            throw ValidationError("context " + std::to_string(c) + " has " +
                                  std::to_string(group.size()) + " rays, expected " +
                                  std::to_string(dim_));
        }
        if (std::set<std::size_t>(group.begin(), group.end()).size() != group.size()) {
            throw ValidationError("context " + std::to_string(c) + " repeats a ray");
        }
        std::vector<Projector> family;
        for (std::size_t r : group) {
            family.push_back(Projector::rank1(unit_rays_[r]));
        }
        ProjectorFamilyReport report = validate_projector_family(family, dim_);
        if (!report.passed) {
            throw ValidationError("context " + std::to_string(c) + ": " + report.failures.front());
        }
        contexts_.push_back(std::move(group));
    }
}

RaySet RaySet::from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ValidationError(std::string("ray set JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("dim") || !j.contains("rays") || !j.contains("contexts")) {
        throw ValidationError("ray set JSON needs dim, rays and contexts");
    }
    if (!j["dim"].is_number_unsigned()) {
        throw ValidationError("ray set dim must be a positive integer");
    }
    const auto dim = j["dim"].get<std::size_t>();
    std::vector<ComplexVector> rays;
    for (const json &r : j["rays"]) {
        rays.push_back(parse_ray(r, dim));
    }
    std::vector<std::vector<std::size_t>> contexts;
    for (const json &c : j["contexts"]) {
        if (!c.is_array()) {
            throw ValidationError("context must be an array of ray indices");
        }
        std::vector<std::size_t> group;
        for (const json &idx : c) {
            if (!idx.is_number_unsigned()) {
                throw ValidationError("context entries must be non-negative integers");
            }
            group.push_back(idx.get<std::size_t>());
        }
        contexts.push_back(std::move(group));
    }
    return RaySet(dim, std::move(rays), std::move(contexts));
}

std::string RaySet::to_json() const {
    json rays = json::array();
    for (const ComplexVector &v : rays_) {
        json ray = json::array();
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            ray.push_back({v[k].real(), v[k].imag()});
        }
        rays.push_back(std::move(ray));
    }
    json j;
    j["dim"] = dim_;
    j["rays"] = std::move(rays);
    j["contexts"] = contexts_;
    return j.dump() + "\n";
}

RaySet RaySet::load(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read ray set file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

void RaySet::save(const std::filesystem::path &path) const {
    std::ofstream out(path, std::ios::binary);
    out << to_json();
    if (!out) {
        throw Error("cannot write ray set file " + path.string());
    }
}

RaySet RaySet::cabello18() {
    // Each context lists four mutually orthogonal integer vectors; shared rays are merged by the
    // constructor, leaving 18 rays each used by exactly two contexts.
    static const int kContexts[9][4][4] = {
        {{0, 0, 0, 1}, {0, 0, 1, 0}, {1, 1, 0, 0}, {1, -1, 0, 0}},
        {{0, 0, 0, 1}, {0, 1, 0, 0}, {1, 0, 1, 0}, {1, 0, -1, 0}},
        {{1, -1, 1, -1}, {1, -1, -1, 1}, {1, 1, 0, 0}, {0, 0, 1, 1}},
        {{1, -1, 1, -1}, {1, 1, 1, 1}, {1, 0, -1, 0}, {0, 1, 0, -1}},
        {{0, 0, 1, 0}, {0, 1, 0, 0}, {1, 0, 0, 1}, {1, 0, 0, -1}},
        {{1, -1, -1, 1}, {1, 1, 1, 1}, {1, 0, 0, -1}, {0, 1, -1, 0}},
        {{1, 1, -1, 1}, {1, 1, 1, -1}, {1, -1, 0, 0}, {0, 0, 1, 1}},
        {{1, 1, -1, 1}, {-1, 1, 1, 1}, {1, 0, 1, 0}, {0, 1, 0, -1}},
        {{1, 1, 1, -1}, {-1, 1, 1, 1}, {1, 0, 0, 1}, {0, 1, -1, 0}},
    };
    std::vector<ComplexVector> rays;
    std::vector<std::vector<std::size_t>> contexts;
    for (const auto &ctx : kContexts) {
        std::vector<std::size_t> group;
        for (const auto &v : ctx) {
            ComplexVector ray(4);
            ray << v[0], v[1], v[2], v[3];
            group.push_back(rays.size());
            rays.push_back(std::move(ray));
        }
        contexts.push_back(std::move(group));
    }
    return RaySet(4, std::move(rays), std::move(contexts));
}

RaySet RaySet::with_contexts(std::span<const std::size_t> which) const {
    std::vector<std::vector<std::size_t>> picked;
    for (std::size_t c : which) {
        picked.push_back(contexts_.at(c));
    }
    return RaySet(dim_, rays_, std::move(picked));
}

double RaySet::max_context_overlap() const {
    double worst = 0;
    for (const auto &group : contexts_) {
        for (std::size_t i = 0; i < group.size(); ++i) {
            for (std::size_t j = i + 1; j < group.size(); ++j) {
                worst = std::max(worst, std::abs(inner(unit_rays_[group[i]], unit_rays_[group[j]])));
            }
        }
    }
    return worst;
}

bool RaySet::operator==(const RaySet &other) const {
    return dim_ == other.dim_ && rays_ == other.rays_ && contexts_ == other.contexts_;
}

AssignmentResult assignment_search(const RaySet &rays, const SearchOptions &options) {
    return Search(rays, options).run();
}

std::vector<std::string> assignment_violations(const RaySet &rays,
                                               std::span<const std::uint8_t> assignment) {
    std::vector<std::string> out;
    if (assignment.size() != rays.rays().size()) {
        out.push_back("assignment has " + std::to_string(assignment.size()) + " entries for " +
                      std::to_string(rays.rays().size()) + " rays");
        return out;
    }
    for (std::size_t r = 0; r < assignment.size(); ++r) {
        if (assignment[r] > 1) {
            out.push_back("ray " + std::to_string(r) + " has a non-binary value");
        }
    }
    for (std::size_t c = 0; c < rays.contexts().size(); ++c) {
        std::size_t ones = 0;
        for (std::size_t r : rays.contexts()[c]) {
            ones += assignment[r] == 1;
        }
        if (ones != 1) {
            out.push_back("context " + std::to_string(c) + " has " + std::to_string(ones) +
                          " rays valued 1");
        }
    }
    return out;
}

KsCertificate verify_ks(const RaySet &rays) {
    AssignmentResult first = assignment_search(rays);
    if (first.status == AssignmentStatus::Found) {
        std::ostringstream msg;
        msg << "ray set admits a noncontextual valuation:";
        for (std::size_t r = 0; r < first.assignment.size(); ++r) {
            msg << ' ' << static_cast<int>(first.assignment[r]);
        }
        throw KsMismatchError(msg.str(), first.assignment);
    }
    AssignmentResult replay = assignment_search(rays);
    if (replay.status != AssignmentStatus::NoneExists || replay.trace_hash != first.trace_hash) {
        throw ValidationError("KS verification replay diverged from the first search");
    }
    constexpr std::uint64_t kShuffles = 8;
    for (std::uint64_t s = 1; s <= kShuffles; ++s) {
        AssignmentResult shuffled = assignment_search(rays, SearchOptions{s});
        if (shuffled.status != AssignmentStatus::NoneExists) {
            throw ValidationError("shuffled re-search found a valuation; search is unsound");
        }
    }

    std::ostringstream text;
    text << "Kochen-Specker certificate\n";
    text << "dimension: " << rays.dim() << "\n";
    text << "rays: " << rays.rays().size() << "\n";
    text << "contexts: " << rays.contexts().size() << "\n";
    text << "max in-context overlap: " << rays.max_context_overlap() << "\n";
    text << "constraints (exactly one ray valued 1 per context):\n";
    for (std::size_t c = 0; c < rays.contexts().size(); ++c) {
        text << "  C" << c << ": {";
        for (std::size_t k = 0; k < rays.contexts()[c].size(); ++k) {
            text << (k ? ", " : "") << 'r' << rays.contexts()[c][k];
        }
        text << "}\n";
    }
    text << "verdict: no valuation exists (search exhausted, " << first.stats.nodes
         << " branch nodes)\n";
    text << "shuffled re-searches agreeing: " << kShuffles << "\n";
    text << "trace sha256: " << first.trace_hash << "\n";
    return KsCertificate{text.str(), first.trace_hash, first.stats.nodes};
}

}  // namespace csmlab
