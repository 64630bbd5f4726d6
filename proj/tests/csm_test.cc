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

#include <cmath>
#include <numbers>

#include "csmlab/error.h"
#include "gtest/gtest.h"

using namespace csmlab;

namespace {

const double kS = std::numbers::sqrt2 / 2;

ContextPtr share(Context c) {
    return std::make_shared<const Context>(std::move(c));
}

StateVector ket(std::initializer_list<Complex> amps) {
    ComplexVector v(static_cast<Eigen::Index>(amps.size()));
    Eigen::Index i = 0;
    for (Complex a : amps) {
        v[i++] = a;
    }
    return StateVector(std::move(v));
}

ContextPtr x_context() {
    return share(Context({ket({kS, kS}), ket({kS, -kS})}, "X"));
}

}  // namespace

TEST(context, validation) {
    ASSERT_THROW(Context({StateVector::basis(3, 0), StateVector::basis(3, 1)}), ValidationError);
    ASSERT_THROW(Context({StateVector::basis(2, 0), ket({kS, kS})}), ValidationError);
    ASSERT_THROW(Context({StateVector::basis(2, 0), StateVector::basis(2, 1)},
                         std::vector<ValueTuple>{{1}, {1}}),
                 ValidationError);
    ASSERT_NO_THROW(Context({StateVector::basis(2, 0), StateVector::basis(2, 1)},
                            std::vector<ValueTuple>{{1, 0}, {1, 1}}));
}

TEST(born_probability, z_to_x_is_half) {
    auto z = share(Context::computational(2));
    auto x = x_context();
    ASSERT_NEAR(born_probability(Modality(z, 0), Modality(x, 0)), 0.5, 1e-15);
}

TEST(born_probability, self_is_one) {
    auto x = x_context();
    ASSERT_NEAR(born_probability(Modality(x, 1), Modality(x, 1)), 1.0, 1e-15);
}

TEST(born_probability, bloch_rotation_by_third_of_pi) {
    // R_y(pi/3)|0> = cos(pi/6)|0> + sin(pi/6)|1>.
    ComplexMatrix sy(2, 2);
    sy << 0, Complex(0, -1), Complex(0, 1), 0;
    Operator ry = matrix_exponential(Operator(Complex(0, -std::numbers::pi / 6) * sy));
    auto z = share(Context::computational(2));
    auto rotated = share(transform_context(*z, ry));
    ASSERT_NEAR(born_probability(Modality(z, 0), Modality(rotated, 0)), 0.75, kTolAlg);
}

TEST(born_probability, dimension_mismatch) {
    auto z2 = share(Context::computational(2));
    auto z3 = share(Context::computational(3));
    ASSERT_THROW(born_probability(Modality(z2, 0), Modality(z3, 0)), ShapeError);
}

TEST(born_probability, normalization_and_unitary_invariance) {
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t d = 2 + static_cast<std::size_t>(rng() % 7);
        auto a = share(Context::from_columns(random_unitary(d, rng)));
        auto b = share(Context::from_columns(random_unitary(d, rng)));
        Operator u = random_unitary(d, rng);
        auto ua = share(transform_context(*a, u));
        auto ub = share(transform_context(*b, u));
        std::size_t i = static_cast<std::size_t>(rng() % d);
        double sum = 0;
        for (std::size_t j = 0; j < d; ++j) {
            double p = born_probability(Modality(a, i), Modality(b, j));
            sum += p;
            ASSERT_NEAR(born_probability(Modality(ua, i), Modality(ub, j)), p, kTolAlg);
        }
        ASSERT_NEAR(sum, 1.0, kTolAlg);
    }
}

TEST(measure, repeatability_is_exact) {
    Rng rng(99);
    auto ctx = share(Context::from_columns(random_unitary(5, rng)));
    MeasurementRecord first = measure(random_state(5, rng), ctx, rng);
    StateVector state = first.post_state;
    for (int k = 0; k < 10000; ++k) {
        MeasurementRecord again = measure(state, ctx, rng);
        ASSERT_EQ(again.outcome, first.outcome);
        ASSERT_EQ(again.post_state, first.post_state);
        state = again.post_state;
    }
}

TEST(measure, basis_state_is_certain) {
    Rng rng(1);
    auto ctx = share(Context::computational(4));
    for (std::size_t i = 0; i < 4; ++i) {
        MeasurementRecord r = measure(StateVector::basis(4, i), ctx, rng);
        ASSERT_EQ(r.outcome, i);
        ASSERT_EQ(r.probability, 1.0);
        ASSERT_EQ(r.value, ValueTuple{static_cast<double>(i)});
    }
}

TEST(measure, plus_state_in_z_context_is_fair) {
    Rng rng(314159);
    auto z = share(Context::computational(2));
    StateVector plus = ket({kS, kS});
    const int trials = 100000;
    int zeros = 0;
    for (int t = 0; t < trials; ++t) {
        zeros += measure(plus, z, rng).outcome == 0;
    }
    ASSERT_LE(std::abs(zeros / double(trials) - 0.5), 4 * std::sqrt(0.25 / trials));
}

TEST(measure, rejects_unnormalized_state) {
    Rng rng(1);
    auto z = share(Context::computational(2));
    ASSERT_THROW(measure(ket({1, 1}), z, rng), ValidationError);
}

TEST(measure, record_carries_stream_position) {
    Rng rng(5, 3);
    auto z = share(Context::computational(2));
    rng();
    rng();
    MeasurementRecord r = measure(ket({kS, kS}), z, rng, "plus");
    ASSERT_EQ(r.seed, 5u);
    ASSERT_EQ(r.stream, 3u);
    ASSERT_EQ(r.stream_position, 2u);
    ASSERT_EQ(rng.position(), 3u);
    ASSERT_EQ(r.input, "plus");
    ASSERT_EQ(r.context_name, "Z");

    // Replaying from the recorded position reproduces the outcome.
    Rng replay(r.seed, r.stream);
    for (std::uint64_t k = 0; k < r.stream_position; ++k) {
        replay();
    }
    ASSERT_EQ(measure(ket({kS, kS}), z, replay).outcome, r.outcome);
}

TEST(transform_context, identity_and_hadamard) {
    Context z = Context::computational(2);
    Context same = transform_context(z, Operator::identity(2));
    ASSERT_EQ(same.basis(), z.basis());

    ComplexMatrix h(2, 2);
    h << kS, kS, kS, -kS;
    Context x = transform_context(z, Operator(h));
    auto xp = share(x);
    auto ref = x_context();
    for (std::size_t i = 0; i < 2; ++i) {
        ASSERT_TRUE(extravalent(Modality(xp, i), Modality(ref, i)));
    }
    ASSERT_EQ(x.labels(), z.labels());
}

TEST(transform_context, random_unitary_keeps_family_valid) {
    Rng rng(6);
    Context c = transform_context(Context::computational(6), random_unitary(6, rng));
    ASSERT_TRUE(validate_projector_family(c.projectors(), 6).passed);
}

TEST(transform_context, rejects_non_unitary) {
    ComplexMatrix m(2, 2);
    m << 1, 1, 0, 1;
    ASSERT_THROW(transform_context(Context::computational(2), Operator(m)), ValidationError);
}

TEST(extravalent, shared_ray_across_contexts) {
    auto a = share(Context::computational(3));
    auto b = share(Context({StateVector::basis(3, 0), ket({0, kS, kS}), ket({0, kS, -kS})}));
    ASSERT_TRUE(extravalent(Modality(a, 0), Modality(b, 0)));
    ASSERT_FALSE(extravalent(Modality(a, 1), Modality(b, 1)));
}

TEST(extravalent, global_phase_is_ignored) {
    const Complex phase = std::polar(1.0, 0.7);
    auto a = share(Context::computational(2));
    auto b = share(Context({StateVector(phase * StateVector::basis(2, 0).amplitudes()),
                            StateVector::basis(2, 1)}));
    ASSERT_TRUE(extravalent(Modality(a, 0), Modality(b, 0)));

    // Equal-magnitude amplitudes exercise the pivot tie-break.
    auto x = x_context();
    auto xr = share(Context({StateVector(phase * ket({kS, kS}).amplitudes()),
                             StateVector(std::conj(phase) * ket({kS, -kS}).amplitudes())}));
    ASSERT_TRUE(extravalent(Modality(x, 0), Modality(xr, 0)));
    ASSERT_TRUE(extravalent(Modality(x, 1), Modality(xr, 1)));
}

TEST(extravalent, z_and_x_differ) {
    auto z = share(Context::computational(2));
    ASSERT_FALSE(extravalent(Modality(z, 0), Modality(x_context(), 0)));
}

TEST(extravalence_classes, partition_matches_pairwise_relation) {
    Rng rng(8);
    std::vector<ContextPtr> contexts;
    // Contexts sharing |0> but rotated in the orthogonal complement.
    for (int k = 0; k < 5; ++k) {
        ComplexMatrix u = ComplexMatrix::Identity(3, 3);
        u.block(1, 1, 2, 2) = random_unitary(2, rng).matrix();
        u.col(0) *= std::polar(1.0, 0.3 * k);
        contexts.push_back(share(Context::from_columns(Operator(u))));
    }
    std::vector<Modality> all;
    for (const auto &c : contexts) {
        for (std::size_t i = 0; i < 3; ++i) {
            all.emplace_back(c, i);
        }
    }
    auto classes = extravalence_classes(all);
    ASSERT_EQ(classes.size(), 1u + 2 * 5);
    ASSERT_EQ(classes[0].members.size(), 5u);
    std::size_t total = 0;
    for (const auto &cls : classes) {
        total += cls.members.size();
        for (const Modality &m : cls.members) {
            ASSERT_TRUE(extravalent(m, cls.members.front()));
            ASSERT_LE((Projector::rank1(m.ray()).op().matrix() - cls.representative.op().matrix())
                          .cwiseAbs()
                          .maxCoeff(),
                      kTolAlg);
        }
    }
    ASSERT_EQ(total, all.size());
}

TEST(certainty_transfer, shared_ray) {
    auto a = share(Context::computational(3));
    auto b = share(Context({ket({0, kS, kS}), StateVector::basis(3, 0), ket({0, kS, -kS})}));
    auto got = certainty_transfer(Modality(a, 0), b);
    ASSERT_TRUE(got.has_value());
    ASSERT_EQ(got->index(), 1u);
    ASSERT_FALSE(certainty_transfer(Modality(a, 1), b).has_value());
}

TEST(certainty_transfer, z_into_x_is_absent) {
    auto z = share(Context::computational(2));
    ASSERT_FALSE(certainty_transfer(Modality(z, 0), x_context()).has_value());
}

TEST(certainty_transfer, planted_ray_is_recovered) {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t d = 3 + static_cast<std::size_t>(rng() % 5);
        StateVector planted = random_state(d, rng);
        auto build = [&](std::size_t slot) {
            // Complete `planted` to a random orthonormal basis, placing it at `slot`.
            ComplexMatrix g = random_operator(d, rng).matrix();
            g.col(0) = planted.amplitudes();
            Eigen::HouseholderQR<ComplexMatrix> qr(g);
            ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
            q.col(0) = planted.amplitudes();
            q.col(0).swap(q.col(static_cast<Eigen::Index>(slot)));
            return share(Context::from_columns(Operator(q)));
        };
        std::size_t slot_a = static_cast<std::size_t>(rng() % d);
        std::size_t slot_b = static_cast<std::size_t>(rng() % d);
        auto a = build(slot_a);
        auto b = build(slot_b);
        auto got = certainty_transfer(Modality(a, slot_a), b);
        ASSERT_TRUE(got.has_value());
        ASSERT_EQ(got->index(), slot_b);
        ASSERT_TRUE(extravalent(Modality(a, slot_a), *got));
        // Non-planted rays of a have no certain partner in b (generic completions).
        for (std::size_t i = 0; i < d; ++i) {
            if (i == slot_a) {
                continue;
            }
            bool has_partner = false;
            for (std::size_t j = 0; j < d; ++j) {
                has_partner = has_partner || extravalent(Modality(a, i), Modality(b, j));
            }
            ASSERT_EQ(certainty_transfer(Modality(a, i), b).has_value(), has_partner);
        }
    }
}

TEST(exclusivity, full_context_leaves_no_room) {
    Rng rng(5);
    Context c = Context::from_columns(random_unitary(5, rng));
    ExclusivityReport r = assert_exclusivity_bound(c, 100, rng);
    ASSERT_TRUE(r.passed);
    ASSERT_LE(r.max_residual, 1e-10);
    ASSERT_EQ(r.candidates, 100u);
}

TEST(exclusivity, rank_deficit_admits_completion) {
    Rng rng(9);
    Operator u = random_unitary(4, rng);
    std::vector<StateVector> partial;
    for (Eigen::Index c = 0; c < 3; ++c) {
        partial.emplace_back(u.matrix().col(c));
    }
    auto extra = orthogonal_completion(partial, 4);
    ASSERT_TRUE(extra.has_value());
    ASSERT_NEAR(extra->norm(), 1.0, kTolAlg);
    for (const StateVector &p : partial) {
        ASSERT_LE(std::abs(inner(p, *extra)), kTolAlg);
    }
    partial.emplace_back(u.matrix().col(3));
    ASSERT_FALSE(orthogonal_completion(partial, 4).has_value());
}

TEST(exclusivity, plus_candidate_against_z_context) {
    Context z = Context::computational(2);
    ASSERT_EQ(gram_schmidt_residual(ket({kS, kS}), z.basis()).norm(), 0.0);
}
