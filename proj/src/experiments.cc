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

#include "csmlab/experiments.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "csmlab/contextuality.h"
#include "csmlab/csm.h"
#include "csmlab/digest.h"
#include "csmlab/itp.h"
#include "csmlab/linalg.h"
#include "csmlab/protocols.h"
#include "csmlab/rng.h"

#ifndef CSMLAB_VERSION
#define CSMLAB_VERSION "0.0.0"
#endif

namespace csmlab {

namespace {

using nlohmann::json;

// Typed access to an experiment's parameter object. Every accessor records the key so that
// `finish` can reject unknown (usually misspelled) parameters.
class Params {
   public:
    Params(const json &params, std::string experiment)
        : params_(params), experiment_(std::move(experiment)) {
        if (!params_.is_object()) {
            throw ConfigError(experiment_ + ": params must be a JSON object");
        }
    }

    double real(const std::string &key, double fallback, double lo, double hi,
                bool open_low = false) {
        used_.insert(key);
        if (!params_.contains(key)) {
            return fallback;
        }
        const json &v = params_[key];
        if (!v.is_number()) {
            throw ConfigError(where(key) + " must be a number");
        }
        double x = v.get<double>();
        if (!std::isfinite(x) || x > hi || (open_low ? x <= lo : x < lo)) {
            std::ostringstream msg;
            msg << where(key) << " = " << x << " outside " << (open_low ? "(" : "[") << lo << ", "
                << hi << "]";
            throw ConfigError(msg.str());
        }
        return x;
    }

    std::size_t count(const std::string &key, std::size_t fallback, std::size_t lo, std::size_t hi) {
        used_.insert(key);
        if (!params_.contains(key)) {
            return fallback;
        }
        return checked_count(params_[key], key, lo, hi);
    }

    std::vector<std::size_t> counts(const std::string &key, std::vector<std::size_t> fallback,
                                    std::size_t lo, std::size_t hi) {
        used_.insert(key);
        if (!params_.contains(key)) {
            return fallback;
        }
        const json &v = params_[key];
        if (!v.is_array() || v.empty()) {
            throw ConfigError(where(key) + " must be a non-empty array of integers");
        }
        std::vector<std::size_t> out;
        for (const json &x : v) {
            out.push_back(checked_count(x, key, lo, hi));
        }
        return out;
    }

    std::string choice(const std::string &key, std::string fallback,
                       const std::vector<std::string> &allowed) {
        used_.insert(key);
        if (!params_.contains(key)) {
            return fallback;
        }
        const json &v = params_[key];
        if (!v.is_string() ||
            std::find(allowed.begin(), allowed.end(), v.get<std::string>()) == allowed.end()) {
            std::string list;
            for (const auto &a : allowed) {
                list += (list.empty() ? "" : ", ") + a;
            }
            throw ConfigError(where(key) + " must be one of: " + list);
        }
        return v.get<std::string>();
    }

    std::optional<std::string> text(const std::string &key) {
        used_.insert(key);
        if (!params_.contains(key)) {
            return std::nullopt;
        }
        if (!params_[key].is_string()) {
            throw ConfigError(where(key) + " must be a string");
        }
        return params_[key].get<std::string>();
    }

    bool has(const std::string &key) const {
        return params_.contains(key);
    }

    void finish() const {
        for (const auto &item : params_.items()) {
            if (!used_.contains(item.key())) {
                throw ConfigError(experiment_ + ": unknown parameter '" + item.key() + "'");
            }
        }
    }

   private:
    std::string where(const std::string &key) const {
        return experiment_ + ": parameter '" + key + "'";
    }

    std::size_t checked_count(const json &v, const std::string &key, std::size_t lo,
                              std::size_t hi) const {
        if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0)) {
            throw ConfigError(where(key) + " must be a non-negative integer");
        }
        auto x = v.get<std::size_t>();
        if (x < lo || x > hi) {
            throw ConfigError(where(key) + " = " + std::to_string(x) + " outside [" +
                              std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
        return x;
    }

    const json &params_;
    std::string experiment_;
    std::set<std::string> used_;
};

std::string fmt_real(double x) {
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    if (std::isnan(x)) {
        return "nan";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// CSV with a header row, '.' decimals and LF line endings.
class Csv {
   public:
    explicit Csv(std::vector<std::string> header) : columns_(header.size()) {
        row_strings(header);
    }

    template <typename... Cells>
    void row(const Cells &...cells) {
        static_assert(sizeof...(Cells) > 0);
        std::vector<std::string> out;
        (out.push_back(cell(cells)), ...);
        row_strings(out);
    }

    const std::string &str() const {
        return text_;
    }

   private:
    static std::string cell(double x) {
        return fmt_real(x);
    }
    static std::string cell(const std::string &s) {
        return s;
    }
    static std::string cell(const char *s) {
        return s;
    }
    static std::string cell(bool b) {
        return b ? "1" : "0";
    }
    template <typename Int>
        requires std::is_integral_v<Int>
    static std::string cell(Int i) {
        return std::to_string(i);
    }

    void row_strings(const std::vector<std::string> &cells) {
        if (cells.size() != columns_) {
            throw Error("CSV row width mismatch");
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            text_ += (i ? "," : "") + cells[i];
        }
        text_ += '\n';
    }

    std::size_t columns_;
    std::string text_;
};

// Runs body(i) for i in [0, n) on up to `threads` workers. Results must be written to slot i.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)> &body) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto &th : pool) {
        th.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

struct Outcome {
    std::string csv;
    json summary = json::object();
};

struct Job {
    const json &params;
    std::uint64_t seed;
    unsigned threads;
};

// Each experiment parses its parameters first; with `dry_run` it stops there.
using ExperimentFn = std::function<std::optional<Outcome>(const Job &, bool dry_run)>;

std::optional<Outcome> overlap_decay(const Job &job, bool dry_run) {
    Params p(job.params, "overlap-decay");
    double c = p.real("overlap", 0.9, 0, 1, true);
    double eps = p.real("epsilon", 1e-6, 0, 1, true);
    std::size_t sites = p.count("sites", 1000, 1, 1000000);
    p.finish();
    if (dry_run) {
        return std::nullopt;
    }
    std::vector<double> overlaps(sites, c);
    auto [psi, phi] = product_pair_with_overlaps(overlaps);
    SectorReport r = sector_classify(psi, phi, {}, eps);
    std::size_t last = r.minimal_m.value_or(sites);

    Outcome out;
    Csv csv({"M", "abs_overlap", "S_M"});
    for (std::size_t m = 1; m <= last; ++m) {
        csv.row(m, r.abs_overlaps[m - 1], r.partial_sums[m - 1]);
    }
    out.csv = csv.str();
    out.summary["minimal_m"] = r.minimal_m ? json(*r.minimal_m) : json(nullptr);
    out.summary["analytic_m"] = c < 1 ? json(std::ceil(std::log(eps) / std::log(c))) : json(nullptr);
    out.summary["final_abs_overlap"] = r.abs_overlaps[last - 1];
    return out;
}

std::optional<Outcome> operator_suppression(const Job &job, bool dry_run) {
    Params p(job.params, "operator-suppression");
    double c = p.real("overlap", 0.95, 0, 1);
    std::size_t sites = p.count("sites", 200, 1, 100000);
    std::size_t operators = p.count("operators", 100, 1, 100000);
    p.finish();
    if (dry_run) {
        return std::nullopt;
    }
    std::vector<double> overlaps(sites, c);
    auto [psi, phi] = product_pair_with_overlaps(overlaps);
    const std::size_t support[] = {0};

    struct Row {
        std::vector<double> value;
        std::vector<double> bound;
    };
    std::vector<Row> rows(operators);
    const Rng master(job.seed);
    parallel_for(operators, job.threads, [&](std::size_t k) {
        Rng rng = master.split(k);
        Operator a = random_operator(2, rng);
        double norm = operator_norm(a);
        Row &row = rows[k];
        std::vector<std::size_t> j;
        for (std::size_t size = 1; size <= sites; ++size) {
            j.push_back(size - 1);
            Complex v = restricted_matrix_element(a, support, psi, phi, j);
            row.value.push_back(std::abs(v));
            row.bound.push_back(norm * std::pow(c, static_cast<double>(size - 1)));
        }
    });

    Outcome out;
    Csv csv({"operator", "J", "abs_element", "bound"});
    bool within = true;
    double worst_ratio = 0;
    for (std::size_t k = 0; k < operators; ++k) {
        for (std::size_t s = 0; s < sites; ++s) {
            csv.row(k, s + 1, rows[k].value[s], rows[k].bound[s]);
            within = within && rows[k].value[s] <= rows[k].bound[s] + 1e-12;
        }
        worst_ratio = std::max(worst_ratio, rows[k].value.back() / rows[k].value.front());
    }
    out.csv = csv.str();
    out.summary["all_within_bound"] = within;
    out.summary["max_suppression_ratio"] = worst_ratio;
    return out;
}

std::optional<Outcome> sector_classify_experiment(const Job &job, bool dry_run) {
    Params p(job.params, "sector-classify");
    std::string profile = p.choice("profile", "constant", {"constant", "inverse-square", "identical"});
    double c = p.real("overlap", 0.9, 0, 1);
    std::size_t sites = p.count("sites", 500, 1, 1000000);
    SectorThresholds th;
    th.converged = p.real("threshold_converged", th.converged, 0, 1e300, true);
    th.diverged = p.real("threshold_diverged", th.diverged, 0, 1e300, true);
    p.finish();
    if (dry_run) {
        return std::nullopt;
    }
    std::vector<double> overlaps(sites);
    for (std::size_t a = 0; a < sites; ++a) {
        double alpha = static_cast<double>(a + 1);
        if (profile == "constant") {
            overlaps[a] = c;
        } else if (profile == "inverse-square") {
            overlaps[a] = 1.0 - 1.0 / (alpha * alpha);
        } else {
            overlaps[a] = 1.0;
        }
    }
    auto [psi, phi] = product_pair_with_overlaps(overlaps);
    SectorReport r = sector_classify(psi, phi, th);

    Outcome out;
    Csv csv({"M", "abs_overlap", "S_M"});
    for (std::size_t m = 1; m <= sites; ++m) {
        csv.row(m, r.abs_overlaps[m - 1], r.partial_sums[m - 1]);
    }
    out.csv = csv.str();
    out.summary["classification"] = sector_class_name(r.classification);
    out.summary["S_N"] = r.partial_sums.back();
    out.summary["tail_increment"] = r.tail_increment;
    out.summary["threshold_converged"] = th.converged;
    out.summary["threshold_diverged"] = th.diverged;
    return out;
}

std::optional<Outcome> decoherence(const Job &job, bool dry_run) {
    Params p(job.params, "decoherence");
    if (p.has("theta") && p.has("cos_theta")) {
        throw ConfigError("decoherence: give either 'theta' or 'cos_theta', not both");
    }
    double theta = p.has("theta") ? p.real("theta", 0, -1e6, 1e6)
                                  : std::acos(p.real("cos_theta", 0.9, -1, 1));
    std::vector<std::size_t> n_values =
        p.counts("n_values", {1, 2, 4, 8, 12, 16, 100, 400}, 1, 100000000);
    std::size_t dense_max = p.count("dense_max_n", kDecoherenceDenseMaxN, 0, 19);
    p.finish();
    if (dry_run) {
        return std::nullopt;
    }
    DecoherenceReport r = decoherence_sweep(theta, n_values, dense_max);
    Outcome out;
    Csv csv({"N", "path", "coherence", "predicted", "relative_coherence", "repetitions"});
    for (const DecoherencePoint &pt : r.points) {
        csv.row(pt.n, pt.dense ? "dense" : "formula", pt.coherence, pt.predicted,
                pt.relative_coherence, pt.repetitions);
    }
    out.csv = csv.str();
    out.summary["theta"] = theta;
    out.summary["repetitions_note"] = "estimate: 1 / relative_coherence^2";
    return out;
}

std::optional<Outcome> born_sample(const Job &job, bool dry_run) {
    Params p(job.params, "born-sample");
    std::size_t cases = p.count("cases", 100, 1, 100000);
    std::size_t min_dim = p.count("min_dim", 2, 2, 64);
    std::size_t max_dim = p.count("max_dim", 8, 2, 64);
    std::size_t trials = p.count("trials", 100000, 1, 100000000);
    p.finish();
    if (min_dim > max_dim) {
        throw ConfigError("born-sample: min_dim exceeds max_dim");
    }
    if (dry_run) {
        return std::nullopt;
    }

    struct Case {
        std::size_t dim = 0;
        std::vector<double> probability;
        std::vector<std::size_t> counts;
    };
    std::vector<Case> results(cases);
    const Rng master(job.seed);
    parallel_for(cases, job.threads, [&](std::size_t k) {
        Rng setup = master.split(2 * k);
        Rng sampling = master.split(2 * k + 1);
        Case &cs = results[k];
        cs.dim = min_dim + static_cast<std::size_t>(setup() % (max_dim - min_dim + 1));
        StateVector state = random_state(cs.dim, setup);
        auto ctx = std::make_shared<const Context>(
            Context::from_columns(random_unitary(cs.dim, setup), "random"));
        cs.probability = born_distribution(state, *ctx);
        cs.counts.assign(cs.dim, 0);
        for (std::size_t t = 0; t < trials; ++t) {
            ++cs.counts[measure(state, ctx, sampling).outcome];
        }
    });

    Outcome out;
    Csv csv({"case", "dim", "outcome", "probability", "frequency", "bound", "within"});
    bool all_within = true;
    double worst_sum_error = 0;
    for (std::size_t k = 0; k < cases; ++k) {
        const Case &cs = results[k];
        double sum = 0;
        for (std::size_t i = 0; i < cs.dim; ++i) {
            double pr = cs.probability[i];
            sum += pr;
            double freq = static_cast<double>(cs.counts[i]) / static_cast<double>(trials);
            double bound = 4.0 * std::sqrt(pr * (1.0 - pr) / static_cast<double>(trials));
            bool within = std::abs(freq - pr) <= bound;
            all_within = all_within && within;
            csv.row(k, cs.dim, i, pr, freq, bound, within);
        }
        worst_sum_error = std::max(worst_sum_error, std::abs(sum - 1.0));
    }
    out.csv = csv.str();
    out.summary["all_within_4_sigma"] = all_within;
    out.summary["max_probability_sum_error"] = worst_sum_error;
    return out;
}

std::optional<Outcome> repeatability(const Job &job, bool dry_run) {
    Params p(job.params, "repeatability");
    std::size_t dim = p.count("dim", 4, 2, 4096);
    std::size_t repeats = p.count("repeats", 10000, 1, 100000000);
    p.finish();
    if (dry_run) {
        return std::nullopt;
    }
    Rng rng(job.seed);
    StateVector state = random_state(dim, rng);
    auto ctx = std::make_shared<const Context>(Context::from_columns(random_unitary(dim, rng), "random"));
    MeasurementRecord first = measure(state, ctx, rng);
    std::size_t same = 0;
    StateVector current = first.post_state;
    for (std::size_t r = 0; r < repeats; ++r) {
        MeasurementRecord again = measure(current, ctx, rng);
        same += again.outcome == first.outcome;
        current = again.post_state;
    }
    Outcome out;
    Csv csv({"dim", "first_outcome", "first_probability", "repeats", "same_outcome"});
    csv.row(dim, first.outcome, first.probability, repeats, same);
    out.csv = csv.str();
    out.summary["repeatable"] = same == repeats;
    return out;
}

std::optional<Outcome> sandwich_coherent(const Job &job, bool dry_run) {
    Params p(job.params, "sandwich-coherent");
    double re = p.real("alpha_re", 2.0, -1e3, 1e3);
    double im = p.real("alpha_im", 0.0, -1e3, 1e3);
    std::size_t n_max = p.count("n_max", 40, 1, kMaxOperatorDim - 1);
    double tol = p.real("trunc_tol", kTruncTol, 0, 1, true);
    p.finish();
    if (dry_run) {
        return std::nullopt;
    }
    Rng rng(job.seed);
    SandwichResult r = sandwich_measure_coherent(Complex(re, im), FockSpace(n_max), rng, tol);
    Outcome out;
    Csv csv({"alpha_re", "alpha_im", "n_max", "outcome", "certainty", "fidelity", "truncation_error"});
    csv.row(re, im, n_max, r.record.outcome, r.report.certainty, r.report.fidelity,
            r.report.truncation_error);
    out.csv = csv.str();
    out.summary["check_failed"] = r.report.check_failed;
    return out;
}

std::optional<Outcome> sandwich_bell(const Job &job, bool dry_run) {
    Params p(job.params, "sandwich-bell");
    std::size_t trials = p.count("trials", 1000, 1, 100000000);
    p.finish();
    if (dry_run) {
        return std::nullopt;
    }
    struct Input {
        std::string name;
        StateVector state;
    };
    std::vector<Input> inputs;
    for (BellState b : {BellState::PhiPlus, BellState::PhiMinus, BellState::PsiPlus,
                        BellState::PsiMinus}) {
        inputs.push_back({bell_name(b), bell_state(b)});
    }
    inputs.push_back({"|01>", StateVector::basis(4, 1)});

    const Rng master(job.seed);
    Outcome out;
    Csv csv({"input", "outcome", "count", "frequency", "probability", "min_fidelity"});
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        Rng rng = master.split(k);
        std::map<int, std::size_t> counts;
        std::map<int, double> probability;
        std::map<int, double> min_fid;
        for (std::size_t t = 0; t < trials; ++t) {
            BellResult r = bell_measure_sandwich(inputs[k].state, rng);
            int o = static_cast<int>(r.outcome);
            ++counts[o];
            probability[o] = r.report.certainty;
            min_fid[o] = min_fid.contains(o) ? std::min(min_fid[o], r.report.fidelity) : r.report.fidelity;
        }
        for (const auto &[o, n] : counts) {
            csv.row(inputs[k].name, bell_name(static_cast<BellState>(o)), n,
                    static_cast<double>(n) / static_cast<double>(trials), probability[o], min_fid[o]);
        }
    }
    out.csv = csv.str();
    return out;
}

std::optional<Outcome> sandwich_register(const Job &job, bool dry_run) {
    Params p(job.params, "sandwich-register");
    std::size_t qubits = p.count("qubits", 10, 1, 12);
    std::size_t unitaries = p.count("unitaries", 20, 1, 100000);
    std::size_t layers = p.count("layers", 6, 1, 1000);
    p.finish();
    if (dry_run) {
        return std::nullopt;
    }
    struct Row {
        double defect = 0;
        double pass_certain = 0;
        double fidelity_certain = 0;
        bool repeat_passed = false;
        double pass_orthogonal = 0;
    };
    std::vector<Row> rows(unitaries);
    const Rng master(job.seed);
    const std::size_t dim = std::size_t{1} << qubits;
    parallel_for(unitaries, job.threads, [&](std::size_t k) {
        Rng build = master.split(2 * k);
        Rng check = master.split(2 * k + 1);
        const RegisterCheck sandwich(random_layered_unitary(qubits, layers, build));
        const Operator &u = sandwich.unitary();
        StateVector certain = u * StateVector::basis(dim, 0);
        StateVector orthogonal = u * StateVector::basis(dim, dim / 2);
        SandwichResult first = sandwich(certain, check);
        SandwichResult second = sandwich(first.record.post_state, check);
        SandwichResult other = sandwich(orthogonal, check);
        rows[k] = Row{sandwich.unitarity_defect(), first.report.certainty, first.report.fidelity,
                      !first.report.check_failed && !second.report.check_failed,
                      other.report.certainty};
    });
    Outcome out;
    Csv csv({"unitary", "unitarity_defect", "pass_probability_certain", "fidelity_certain",
             "repeat_passed", "pass_probability_orthogonal"});
    for (std::size_t k = 0; k < unitaries; ++k) {
        const Row &r = rows[k];
        csv.row(k, r.defect, r.pass_certain, r.fidelity_certain, r.repeat_passed, r.pass_orthogonal);
    }
    out.csv = csv.str();
    return out;
}

std::optional<Outcome> ks(const Job &job, bool dry_run) {
    Params p(job.params, "ks");
    std::optional<std::string> path = p.text("rayset");
    p.finish();
    std::optional<RaySet> loaded;
    if (path) {
        try {
            loaded = RaySet::load(*path);
        } catch (const Error &e) {
            throw ConfigError(std::string("ks: ") + e.what());
        }
    }
    if (dry_run) {
        return std::nullopt;
    }
    RaySet rays = loaded ? *loaded : RaySet::cabello18();
    Outcome out;
    Csv csv({"subset", "contexts", "status", "complete", "nodes", "trace_hash"});
    auto emit = [&](const std::string &name, const RaySet &set) {
        AssignmentResult r = assignment_search(set);
        csv.row(name, set.contexts().size(),
                r.status == AssignmentStatus::Found ? "found" : "none-exists", r.stats.complete,
                r.stats.nodes, r.trace_hash);
        return r;
    };
    AssignmentResult all = emit("all", rays);
    for (std::size_t c = 0; c < rays.contexts().size(); ++c) {
        const std::size_t one[] = {c};
        emit("context-" + std::to_string(c), rays.with_contexts(one));
    }
    out.csv = csv.str();
    out.summary["status"] = all.status == AssignmentStatus::Found ? "found" : "none-exists";
    if (all.status == AssignmentStatus::NoneExists) {
        KsCertificate cert = verify_ks(rays);
        out.summary["certificate_hash"] = cert.trace_hash;
        out.summary["certificate"] = cert.text;
    }
    return out;
}

std::optional<Outcome> exclusivity(const Job &job, bool dry_run) {
    Params p(job.params, "exclusivity");
    std::size_t contexts = p.count("contexts", 100, 1, 100000);
    std::size_t min_dim = p.count("min_dim", 2, 2, 4096);
    std::size_t max_dim = p.count("max_dim", 8, 2, 4096);
    std::size_t candidates = p.count("candidates", 100, 1, 100000000);
    p.finish();
    if (min_dim > max_dim) {
        throw ConfigError("exclusivity: min_dim exceeds max_dim");
    }
    if (dry_run) {
        return std::nullopt;
    }
    const Rng master(job.seed);
    std::vector<ExclusivityReport> reports(contexts);
    parallel_for(contexts, job.threads, [&](std::size_t k) {
        Rng rng = master.split(k);
        std::size_t dim = min_dim + static_cast<std::size_t>(rng() % (max_dim - min_dim + 1));
        Context ctx = Context::from_columns(random_unitary(dim, rng));
        reports[k] = assert_exclusivity_bound(ctx, candidates, rng);
    });
    Outcome out;
    Csv csv({"case", "dim", "max_residual", "passed"});
    bool all = true;
    for (std::size_t k = 0; k < contexts; ++k) {
        csv.row(k, reports[k].dim, reports[k].max_residual, reports[k].passed);
        all = all && reports[k].passed;
    }
    out.csv = csv.str();
    out.summary["all_passed"] = all;
    return out;
}

const std::vector<std::pair<std::string, ExperimentFn>> &registry() {
    static const std::vector<std::pair<std::string, ExperimentFn>> kRegistry = {
        {"overlap-decay", overlap_decay},
        {"operator-suppression", operator_suppression},
        {"sector-classify", sector_classify_experiment},
        {"decoherence", decoherence},
        {"born-sample", born_sample},
        {"repeatability", repeatability},
        {"sandwich-coherent", sandwich_coherent},
        {"sandwich-bell", sandwich_bell},
        {"sandwich-register", sandwich_register},
        {"ks", ks},
        {"exclusivity", exclusivity},
    };
    return kRegistry;
}

const ExperimentFn &lookup(const std::string &name) {
    for (const auto &[n, fn] : registry()) {
        if (n == name) {
            return fn;
        }
    }
    throw ConfigError("unknown experiment '" + name + "' (see list-experiments)");
}

void write_atomically(const std::filesystem::path &path, const std::string &contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open " + tmp.string() + " for writing");
        }
        out << contents;
        out.flush();
        if (!out) {
            throw IoError("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

const std::vector<std::string> &experiment_names() {
    static const std::vector<std::string> kNames = [] {
        std::vector<std::string> names;
        for (const auto &entry : registry()) {
            names.push_back(entry.first);
        }
        return names;
    }();
    return kNames;
}

ExperimentConfig parse_config(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    for (const auto &item : j.items()) {
        static const std::set<std::string> kKeys = {"experiment", "params", "seed", "output"};
        if (!kKeys.contains(item.key())) {
            throw ConfigError("config: unknown field '" + item.key() + "'");
        }
    }
    ExperimentConfig c;
    if (!j.contains("experiment") || !j["experiment"].is_string()) {
        throw ConfigError("config: 'experiment' must be a string");
    }
    c.experiment = j["experiment"].get<std::string>();
    if (j.contains("params")) {
        c.params = j["params"];
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) {
            throw ConfigError("config: 'seed' must be a non-negative 64-bit integer");
        }
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("output")) {
        if (!j["output"].is_string()) {
            throw ConfigError("config: 'output' must be a path string");
        }
        c.output = j["output"].get<std::string>();
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    ExperimentConfig config = parse_config(buf.str());
    // Relative data paths are taken relative to the config file, not the working directory.
    auto it = config.params.find("rayset");
    if (it != config.params.end() && it->is_string()) {
        std::filesystem::path data(it->get<std::string>());
        if (data.is_relative()) {
            *it = (path.parent_path() / data).lexically_normal().string();
        }
    }
    return config;
}

json config_to_json(const ExperimentConfig &config) {
    json j;
    j["experiment"] = config.experiment;
    j["params"] = config.params;
    j["seed"] = config.seed;
    j["output"] = config.output.string();
    return j;
}

void validate_config(const ExperimentConfig &config) {
    const json &params = config.params;
    Job job{params, config.seed, 1};
    lookup(config.experiment)(job, true);
}

std::filesystem::path resolve_output_dir(const ExperimentConfig &config) {
    if (!config.output.empty()) {
        return config.output;
    }
    if (const char *root = std::getenv(kOutputDirEnv); root && *root) {
        return std::filesystem::path(root) / config.experiment;
    }
    return std::filesystem::path("results") / config.experiment;
}

json RunManifest::to_json() const {
    json j;
    j["config"] = config;
    j["version"] = version;
    j["started_utc"] = started_utc;
    j["wall_seconds"] = wall_seconds;
    j["checksums"] = checksums;
    j["summary"] = summary;
    return j;
}

RunManifest run_experiment(const ExperimentConfig &config, const RunOptions &options) {
    const ExperimentFn &fn = lookup(config.experiment);
    Job job{config.params, config.seed, std::max(1u, options.threads)};
    fn(job, true);

    RunManifest manifest;
    manifest.config = config_to_json(config);
    manifest.version = CSMLAB_VERSION;
    manifest.started_utc = utc_now();
    manifest.directory = resolve_output_dir(config);
    manifest.config["output"] = manifest.directory.string();

    auto start = std::chrono::steady_clock::now();
    Outcome outcome = *fn(job, false);
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.summary = std::move(outcome.summary);

    std::error_code ec;
    std::filesystem::create_directories(manifest.directory, ec);
    if (ec) {
        throw IoError("cannot create output directory " + manifest.directory.string() + ": " +
                      ec.message());
    }
    const std::string csv_name = config.experiment + ".csv";
    write_atomically(manifest.directory / csv_name, outcome.csv);
    manifest.checksums[csv_name] = sha256_hex(outcome.csv);
    write_atomically(manifest.directory / "manifest.json", manifest.to_json().dump(2) + "\n");
    return manifest;
}

int exit_status_for(const std::exception &e) {
    if (dynamic_cast<const ConfigError *>(&e)) {
        return 2;
    }
    if (dynamic_cast<const IoError *>(&e)) {
        return 4;
    }
    return 3;
}

}  // namespace csmlab
