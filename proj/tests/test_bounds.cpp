#include <gtest/gtest.h>

#include "chanent/suites.hpp"

using namespace chanent;

namespace {

OptimizerOpts quick(std::uint64_t seed = 0) {
  OptimizerOpts o;
  o.restarts = 4;
  o.max_evals = 600;
  o.seed = seed;
  return o;
}

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

// C -> C (x) C by appending a maximally mixed qubit, then tracing the second
// qubit of the output: sends two-qubit channels to qubit channels.
Superchannel append_and_discard() {
  std::vector<Matrix> pre, post;
  for (int j = 0; j < 2; ++j) {
    Matrix e = Matrix::Zero(2, 1);
    e(j, 0) = 1.0;
    pre.push_back(tensor(identity(2), e) / std::sqrt(2.0));
    post.push_back(tensor(identity(2), Matrix(e.transpose())));
  }
  return super_from_dilation(Channel::from_kraus(pre), Channel::from_kraus(post), 1);
}

}  // namespace

TEST(Records, SlackAndPass) {
  auto r = make_record("x", 1.0, 1.5, 0.6);
  EXPECT_DOUBLE_EQ(r.slack, -0.5);
  EXPECT_TRUE(r.pass);
  EXPECT_FALSE(make_record("x", 1.0, 1.5, 0.4).pass);
  EXPECT_EQ(slack_of(kInf, kInf), 0.0);
  EXPECT_TRUE(make_record("x", kInf, kInf, 0.0).pass);
  EXPECT_FALSE(make_record("x", 0.0, kInf, 1.0).pass);
  auto s = skipped_record("x", "why");
  EXPECT_TRUE(s.skipped);
  EXPECT_FALSE(s.pass);
  json j = to_json(s);
  EXPECT_TRUE(j["slack"].is_null());
  EXPECT_EQ(j["note"], "why");
  EXPECT_EQ(to_json(make_record("x", kInf, 0.0, 0.0))["lhs"], "inf");
}

TEST(ChannelDpi, IdentitySuperIsTight) {
  Rng rng = make_rng(500);
  Channel n = random_channel(2, 2, 2, rng), m = random_channel(2, 2, 4, rng);
  auto r = verify_channel_dpi(n, m, identity_super(2, 2), quick());
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.slack, 0.0, 1e-3);
}

TEST(ChannelDpi, RandomIsometrySupers) {
  for (std::uint64_t s = 0; s < 3; ++s) {
    Rng rng = make_rng(501, s);
    Channel n = random_channel(2, 2, 2, rng), m = random_channel(2, 2, 4, rng);
    Superchannel th = gen::isometry_super(rng, 2, 2, 2, 3);
    auto r = verify_channel_dpi(n, m, th, quick(s));
    EXPECT_TRUE(r.pass) << r.slack;
  }
}

TEST(ChannelDpi, RejectsNonSuperchannel) {
  EXPECT_THROW(verify_channel_dpi(identity_channel(2), identity_channel(2), completely_depolarizing_supermap(2, 2, 2, 2)),
               DomainError);
}

TEST(EntropyGain, IdentitySuperIsTrivial) {
  Rng rng = make_rng(502);
  Channel n = random_channel(2, 2, 2, rng);
  auto rep = verify_superchannel_entropy_gain(identity_super(2, 2), n, quick());
  ASSERT_TRUE(rep.hypothesis_ok) << rep.note;
  EXPECT_NEAR(rep.entropy_after - rep.entropy_before, 0.0, 1e-9);
  EXPECT_NEAR(rep.delta_prime, 0.0, 1e-9);
  EXPECT_NEAR(rep.alpha, 1.0, 1e-9);
  EXPECT_NEAR(rep.rho_alpha_term, 0.0, 1e-6);
  EXPECT_TRUE(rep.record().pass);
}

TEST(EntropyGain, TelecovDeltaPrimeIsLogDimensionRatio) {
  Rng rng = make_rng(503);
  Channel n = tensor_with_covariance(gen::pauli(rng, 0.05), gen::pauli(rng, 0.05));
  ASSERT_TRUE(n.covariance());
  Superchannel th = append_and_discard();
  ASSERT_TRUE(th.is_superchannel());
  auto rep = verify_superchannel_entropy_gain(th, n, quick(), pauli_group());
  EXPECT_EQ(rep.method_before, "telecov");
  EXPECT_EQ(rep.method_after, "telecov");
  EXPECT_NEAR(rep.delta_prime, 1.0, 1e-12);
}

TEST(EntropyGain, UnitaryMixturesOnPauliChannels) {
  for (std::uint64_t s = 0; s < 3; ++s) {
    Rng rng = make_rng(504, s);
    Channel n = gen::pauli(rng, 0.05);
    Superchannel th = gen::pauli_mixture_super(rng);
    auto rep = verify_superchannel_entropy_gain(th, n, quick(s), pauli_group());
    ASSERT_TRUE(rep.hypothesis_ok);
    EXPECT_NEAR(rep.delta_prime, 0.0, 1e-12);
    EXPECT_TRUE(rep.record().pass) << rep.slack;
  }
}

TEST(RefinedDpi, TelecovInstances) {
  for (std::uint64_t s = 0; s < 3; ++s) {
    Rng rng = make_rng(505, s);
    Channel n = gen::pauli(rng, 0.05), m = gen::pauli(rng, 0.05);
    Superchannel th = gen::pauli_mixture_super(rng);
    auto r = verify_refined_dpi(th, n, m, quick(s), {}, 1e-3, pauli_group());
    ASSERT_FALSE(r.skipped) << r.note;
    EXPECT_TRUE(r.pass) << r.slack;
    EXPECT_GE(r.params["fidelity"].get<double>(), 0.0);
    EXPECT_LE(r.params["fidelity"].get<double>(), 1.0 + 1e-9);
  }
}

TEST(RefinedDpi, IdentitySuperHasFullFidelity) {
  Channel n = depolarizing(2, 0.3).with_covariance(pauli_group());
  Channel m = depolarizing(2, 0.8).with_covariance(pauli_group());
  auto r = verify_refined_dpi(identity_super(2, 2), n, m, quick(), {}, 1e-3, pauli_group());
  ASSERT_FALSE(r.skipped) << r.note;
  EXPECT_NEAR(r.lhs, 0.0, 1e-12);
  EXPECT_NEAR(r.params["fidelity"].get<double>(), 1.0, 1e-6);
}

TEST(EntropyNondecrease, ReplacerToMaximallyMixed) {
  Rng rng = make_rng(506);
  Channel n = random_channel(2, 2, 2, rng);
  auto r = verify_entropy_nondecrease(replacer_super(2, 2, depolarizing_tilde(2, 2)), n, quick());
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.lhs, 1.0, 1e-12);
}

TEST(EntropyNondecrease, IsometrySupers) {
  for (std::uint64_t s = 0; s < 3; ++s) {
    Rng rng = make_rng(507, s);
    Channel n = random_channel(2, 2, 2, rng);
    Superchannel th = gen::isometry_super(rng, 2, 2, 2, 2);
    auto r = verify_entropy_nondecrease(th, n, quick(s));
    EXPECT_TRUE(r.pass) << r.slack;
  }
}

TEST(EntropyNondecrease, RequiresRSubpreserving) {
  Channel n = identity_channel(2);
  EXPECT_THROW(verify_entropy_nondecrease(replacer_super(2, 2, identity_channel(2)), n), DomainError);
}

TEST(PositiveMap, IdentityAndUnitaryAreTight) {
  Rng rng = make_rng(508);
  Matrix rho = random_state(3, rng);
  auto r = entropy_gain_positive_map(identity_channel(3), rho);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.lhs, 0.0, 1e-12);
  EXPECT_NEAR(r.params["alpha_rhs"].get<double>(), 0.0, 1e-9);
  EXPECT_TRUE(entropy_gain_positive_map(unitary_channel(haar_unitary(3, rng)), rho).pass);
}

TEST(PositiveMap, HoldsForCptpMaps) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng = make_rng(509, s);
    std::size_t d = uniform_int(rng, 2, 3), dout = uniform_int(rng, 2, 3);
    Channel f = random_channel(d, dout, uniform_int(rng, 1, 3) + (dout < d ? 1 : 0), rng);
    auto r = entropy_gain_positive_map(f, random_state(d, rng));
    EXPECT_TRUE(r.pass) << "case " << s << " slack " << r.slack;
    EXPECT_NEAR(r.params["alpha"].get<double>(), 1.0, 1e-12);
  }
}

TEST(PositiveMap, NonUnitalCpCounterexampleFails) {
  // F = diag(1, eps) . diag(1, eps): alpha = 1, S(F(rho)) - S(rho) < 0 while
  // D(rho || F*F(rho)) > 0, so the bound cannot hold. The check must say so.
  const double eps = 0.1;
  Channel f = Channel::from_kraus({diag2(1.0, eps)});
  auto r = entropy_gain_positive_map(f, identity(2) / 2.0);
  EXPECT_FALSE(r.pass);
  EXPECT_LT(r.lhs, -0.4);
  EXPECT_NEAR(r.params["alpha_rhs"].get<double>(), 2.0 * std::log2(1.0 / eps), 1e-9);
}

TEST(PositiveMap, UnitalEntropyScalingCounterexample) {
  // F(X) = <0|X|0> 1 is CP and unital with ||F*(1)|| = 2. At rho = 1/2 the
  // claimed S(F(rho)) >= ||F*(1)|| S(rho) reads 1 >= 2.
  Matrix k0 = Matrix::Zero(2, 2), k1 = Matrix::Zero(2, 2);
  k0(0, 0) = 1.0;
  k1(1, 0) = 1.0;
  Channel f = Channel::from_kraus({k0, k1});
  ASSERT_TRUE(f.flags().unital.yes());
  auto r = entropy_gain_positive_map(f, identity(2) / 2.0);
  EXPECT_NEAR(r.params["alpha"].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(r.params["delta_s"].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(r.params["unital_rhs"].get<double>(), 1.0, 1e-12);
  EXPECT_FALSE(r.pass);
}

TEST(PositiveMap, RejectsBadInput) {
  EXPECT_THROW(entropy_gain_positive_map(identity_channel(2), identity(2)), DomainError);
  EXPECT_THROW(entropy_gain_positive_map(identity_channel(2), identity(3) / 3.0), DimensionError);
}

TEST(Ordering, SharedWitnessAndRandomInstances) {
  Rng rng = make_rng(510);
  Channel n = random_channel(2, 2, 2, rng), m = random_channel(2, 2, 4, rng);
  Channel bigger = Channel::from_choi(m.choi() + random_cp_map(2, 2, 2, rng).choi(), 2, 2);
  auto recs = verify_ordering_and_superadditivity({{n, m, bigger}, {n, m, m}}, {}, quick());
  ASSERT_EQ(recs.size(), 4u);
  for (const auto& r : recs) EXPECT_TRUE(r.pass) << r.check_id << " " << r.slack;
  EXPECT_THROW(verify_ordering_and_superadditivity({{n, bigger, m}}, {}, quick()), DomainError);
}

TEST(Superadditivity, PauliPairsAreAdditive) {
  Rng rng = make_rng(511);
  Channel n1 = gen::pauli(rng, 0.05), m1 = gen::pauli(rng, 0.05), n2 = gen::pauli(rng, 0.05), m2 = gen::pauli(rng, 0.05);
  auto recs = verify_ordering_and_superadditivity({}, {{n1, m1, n2, m2}}, quick());
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_TRUE(recs[0].pass);
  EXPECT_NEAR(recs[0].slack, 0.0, 1e-9);
}

TEST(Additivity, Anchors) {
  Channel rt = depolarizing_tilde(2, 2).with_covariance(pauli_group());
  Channel id = identity_channel(2).with_covariance(pauli_group());
  auto r1 = verify_entropy_additivity(rt, rt);
  EXPECT_NEAR(r1.params["s_joint"].get<double>(), 2.0, 1e-10);
  auto r2 = verify_entropy_additivity(id, rt);
  EXPECT_NEAR(r2.params["s_joint"].get<double>(), 0.0, 1e-10);
  auto r3 = verify_entropy_additivity(id, id);
  EXPECT_NEAR(r3.params["s_joint"].get<double>(), -2.0, 1e-10);
  for (const auto& r : {r1, r2, r3}) {
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.params["method"], "telecov");
  }
}

TEST(Additivity, RandomPauliPairs) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    Rng rng = make_rng(512, s);
    auto r = verify_entropy_additivity(gen::pauli(rng), gen::pauli(rng));
    EXPECT_LE(r.rhs, 1e-8);
    EXPECT_TRUE(r.pass);
  }
}

TEST(TelecovEntropyDifference, Instances) {
  Channel n = depolarizing(2, 0.4).with_covariance(pauli_group());
  auto id = verify_telecov_entropy_difference(identity_super(2, 2), n);
  ASSERT_FALSE(id.skipped) << id.note;
  EXPECT_TRUE(id.pass);
  for (std::uint64_t s = 0; s < 3; ++s) {
    Rng rng = make_rng(513, s);
    auto r = verify_telecov_entropy_difference(gen::pauli_mixture_super(rng), gen::pauli(rng, 0.05), pauli_group());
    ASSERT_FALSE(r.skipped) << r.note;
    EXPECT_TRUE(r.pass) << r.slack;
  }
  auto noc = verify_telecov_entropy_difference(identity_super(2, 2), depolarizing(2, 0.4));
  EXPECT_TRUE(noc.skipped);
}

TEST(SuperDivergence, EqualSupersGiveZero) {
  Rng rng = make_rng(514);
  Superchannel th = gen::isometry_super(rng, 2, 2, 2, 2);
  SuperDivergenceOpts o;
  o.restarts = 1;
  o.iterations = 2;
  o.inner.restarts = 1;
  o.inner.max_evals = 100;
  auto est = super_divergence_lb(th, th, 1, o);
  EXPECT_NEAR(est.value, 0.0, 1e-9);
  EXPECT_TRUE(est.is_lower_bound);
}

TEST(SuperDivergence, StinespringChannelIsCptp) {
  Rng rng = make_rng(515);
  Channel c = channel_from_stinespring(ginibre(8, 4, rng), 4, 2);
  EXPECT_TRUE(c.is_cptp());
}

TEST(SuperDivergence, ReplacerBound) {
  Rng rng = make_rng(516);
  Channel n0 = random_channel(2, 2, 2, rng);
  OptimizerOpts o = quick();
  o.restarts = 2;
  for (int t = 0; t < 2; ++t) {
    Channel w = random_channel(4, 4, 2, rng);
    auto r = verify_replacer_super_bound(n0, w, 2, 2, o);
    EXPECT_TRUE(r.pass) << r.slack;
  }
}

TEST(Suites, ExampleRecordsPass) {
  auto recs = example_b4_records();
  ASSERT_EQ(recs.size(), 2u);
  for (const auto& r : recs) EXPECT_TRUE(r.pass) << r.check_id;
}

TEST(Suites, DeterministicAcrossThreads) {
  RunConfig cfg;
  cfg.seed = 3;
  cfg.optimizer.restarts = 2;
  cfg.optimizer.max_evals = 300;
  auto a = run_suite("petz", 6, cfg);
  cfg.threads = 3;
  auto b = run_suite("petz", 6, cfg);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_EQ(a.summary.failures, 0);
  EXPECT_THROW(run_suite("nope", 1, cfg), ParseError);
}

TEST(Suites, RecordsReplayFromSeed) {
  RunConfig cfg;
  cfg.seed = 9;
  cfg.optimizer.restarts = 2;
  cfg.optimizer.max_evals = 300;
  auto a = run_suite("additivity", 3, cfg);
  auto b = run_suite("additivity", 3, cfg);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].seed, b.records[i].seed);
    EXPECT_EQ(a.records[i].lhs, b.records[i].lhs);
    EXPECT_EQ(a.records[i].rhs, b.records[i].rhs);
  }
}
