#include <gtest/gtest.h>

#include "chanent/divergences.hpp"

using namespace chanent;

namespace {

OptimizerOpts quick(std::uint64_t seed = 0, int restarts = 6) {
  OptimizerOpts o;
  o.restarts = restarts;
  o.max_evals = 800;
  o.seed = seed;
  return o;
}

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

// Choi state of N at Psi = sqrt(rho)^t, built from the Kraus operators
// directly: sum_k (A (x) K) |Omega><Omega| (A (x) K)^+.
Matrix choi_state_direct(const Channel& n, const Matrix& a) {
  const auto d = a.cols();
  CVector omega = CVector::Zero(d * d);
  for (Eigen::Index i = 0; i < d; ++i) omega(i * d + i) = 1.0;
  Matrix out = Matrix::Zero(a.rows() * n.dim_out(), a.rows() * n.dim_out());
  for (const auto& k : *n.kraus()) {
    CVector v = tensor(a, k) * omega;
    out += v * v.adjoint();
  }
  return out;
}

}  // namespace

TEST(RelEntropy, CommutingMatchesClassicalFormula) {
  double want = 0.3 * std::log2(0.3 / 0.6) + 0.7 * std::log2(0.7 / 0.4);
  EXPECT_NEAR(rel_entropy(diag2(0.3, 0.7), diag2(0.6, 0.4)), want, 1e-14);
}

TEST(RelEntropy, BasicIdentities) {
  Rng rng = make_rng(200);
  Matrix rho = random_state(3, rng);
  EXPECT_NEAR(rel_entropy(rho, rho), 0.0, 1e-12);
  EXPECT_NEAR(rel_entropy(rho, 2.0 * rho), -1.0, 1e-12);
  EXPECT_NEAR(rel_entropy(rho, identity(3)), -vn_entropy(rho), 1e-12);
  EXPECT_EQ(rel_entropy(diag2(0.5, 0.5), diag2(1.0, 0.0)), kInf);
  EXPECT_NEAR(rel_entropy(diag2(1.0, 0.0), diag2(0.5, 0.5)), 1.0, 1e-14);
  EXPECT_THROW(rel_entropy(diag2(1, 0), identity(3)), DimensionError);
  EXPECT_THROW(rel_entropy(diag2(1, 0), diag2(1, -1)), DomainError);
}

TEST(RelEntropy, NonnegativeOnStates) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    Rng rng = make_rng(201, s);
    Matrix r = random_state(3, rng), q = random_state(3, rng);
    EXPECT_GE(rel_entropy(r, q), -1e-12);
  }
}

TEST(RelEntropy, PowerFormMatchesDirect) {
  Rng rng = make_rng(202);
  Matrix rho = random_state(3, rng), y = random_state(3, rng);
  for (double alpha : {0.5, 1.0, 2.5}) {
    double c = -alpha * std::log2(alpha);
    Matrix target = std::exp2(c) * mat_fn_psd(y, MatFn::pow(alpha));
    EXPECT_NEAR(rel_entropy_to_power(rho, y, alpha, c), rel_entropy(rho, target), 1e-10);
  }
}

TEST(VonNeumann, KnownValues) {
  EXPECT_NEAR(vn_entropy(identity(4) / 4.0), 2.0, 1e-14);
  EXPECT_NEAR(vn_entropy(diag2(1.0, 0.0)), 0.0, 1e-14);
  double h = -(0.25 * std::log2(0.25) + 0.75 * std::log2(0.75));
  EXPECT_NEAR(vn_entropy(diag2(0.25, 0.75)), h, 1e-14);
}

TEST(PureState, MarginalsAndOutput) {
  Rng rng = make_rng(203);
  Matrix rho = random_state(2, rng);
  Matrix a = mat_fn_psd(rho, MatFn::sqrt()).transpose();
  auto psi = PureBipartiteState::from_a(a);
  EXPECT_LT(max_abs(psi.marginal_in() - rho), 1e-12);
  EXPECT_NEAR(psi.density().trace().real(), 1.0, 1e-14);
  Matrix full = psi.density();
  EXPECT_LT(max_abs(partial_trace(full, 2, 2, Keep::second) - psi.marginal_in()), 1e-13);
  EXPECT_LT(max_abs(partial_trace(full, 2, 2, Keep::first) - psi.marginal_ref()), 1e-13);
  Channel n = random_channel(2, 3, 2, rng);
  EXPECT_LT(max_abs(psi.output(n) - choi_state_direct(n, psi.a_psi)), 1e-13);
  EXPECT_THROW(PureBipartiteState::from_a(Matrix::Zero(2, 2)), DomainError);
  EXPECT_FALSE(PureBipartiteState::from_a(diag2(1.0, 0.0)).full_rank);
}

TEST(ChannelEntropy, DepolarizingTildeIsLogOutputDim) {
  EXPECT_NEAR(channel_entropy(depolarizing_tilde(2, 2)).value, 1.0, 1e-12);
  EXPECT_NEAR(channel_entropy(depolarizing_tilde(3, 4)).value, 2.0, 1e-12);
}

TEST(ChannelEntropy, IdentityIsMinusLogDim) {
  auto r = channel_entropy(identity_channel(2).with_covariance(pauli_group()));
  EXPECT_EQ(r.method, "telecov");
  EXPECT_NEAR(r.value, -1.0, 1e-12);
  // the numerical path agrees
  auto o = channel_entropy(identity_channel(2), quick());
  EXPECT_EQ(o.method, "opt");
  EXPECT_NEAR(o.value, -1.0, 1e-4);
}

TEST(ChannelEntropy, ReplacerToPureIsZero) {
  Matrix pure = diag2(1.0, 0.0);
  EXPECT_NEAR(channel_entropy(replacer(2, pure)).value, 0.0, 1e-12);
}

TEST(ChannelEntropy, RangeBounds) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    Rng rng = make_rng(204, s);
    Channel n = random_channel(2, 2, 2, rng);
    double v = channel_entropy(n, quick(s)).value;
    EXPECT_GE(v, -1.0 - 1e-6);
    EXPECT_LE(v, 1.0 + 1e-6);
  }
}

TEST(ChannelEntropy, BetaWithZeroHamiltonianIsPlainEntropy) {
  Rng rng = make_rng(205);
  Channel n = random_channel(2, 2, 2, rng);
  double s = channel_entropy(n, quick(1)).value;
  double sb = channel_entropy_beta(n, {Matrix::Zero(2, 2), 1.7}, quick(1)).value;
  EXPECT_NEAR(s, sb, 1e-9);
}

TEST(ChannelEntropy, RejectsNonCptp) {
  EXPECT_THROW(channel_entropy(depolarizing_R(2, 2)), DomainError);
}

TEST(ChannelDivergence, TelecovClosedFormMatchesOptimizer) {
  for (double p : {0.1, 0.5, 0.9}) {
    Channel n = depolarizing(2, p).with_covariance(pauli_group());
    Channel m = depolarizing(2, 0.95).with_covariance(pauli_group());
    auto closed = channel_divergence(n, m);
    EXPECT_EQ(closed.method, "telecov");
    auto num = channel_divergence(depolarizing(2, p), depolarizing(2, 0.95), quick(3));
    EXPECT_EQ(num.method, "opt");
    EXPECT_LE(std::abs(closed.value - num.value), 1e-6 * std::max(1.0, std::abs(closed.value)));
  }
}

TEST(ChannelDivergence, SelfDivergenceIsZero) {
  Rng rng = make_rng(206);
  Channel n = random_channel(2, 2, 2, rng);
  EXPECT_NEAR(channel_divergence(n, n, quick()).value, 0.0, 1e-9);
}

TEST(ChannelDivergence, InfiniteWhenSupportLeaks) {
  // identity against a replacer to |0>: the Bell state leaves 1 (x) |0><0|
  Matrix zero = Matrix::Zero(2, 2);
  zero(0, 0) = 1.0;
  auto r = channel_divergence(identity_channel(2), replacer(2, zero), quick());
  EXPECT_TRUE(r.infinite);
  EXPECT_EQ(r.value, kInf);
}

TEST(ChannelDivergence, DominatesEveryWitness) {
  Rng rng = make_rng(207);
  Channel n = random_channel(2, 2, 2, rng), m = random_channel(2, 2, 4, rng);
  auto r = channel_divergence(n, m, quick(5));
  for (int t = 0; t < 20; ++t) {
    auto psi = PureBipartiteState::from_a(ginibre(2, 2, rng));
    EXPECT_GE(r.value, divergence_at(n, m, psi) - 1e-6);
  }
  EXPECT_NEAR(divergence_at(n, m, r.witness), r.value, 1e-9);
}

TEST(ChannelDivergence, AgreesWithGridOnQubits) {
  Rng rng = make_rng(208);
  Channel n = random_channel(2, 2, 2, rng), m = random_channel(2, 2, 4, rng);
  auto r = channel_divergence(n, m, quick(2));
  double grid = grid_max_qubit(n, m, 15);
  EXPECT_GE(r.value, grid - 1e-6);
  EXPECT_LE(r.value, grid + 0.05);
}

TEST(ChannelDivergence, Reproducible) {
  Rng rng = make_rng(209);
  Channel n = random_channel(2, 2, 2, rng), m = random_channel(2, 2, 4, rng);
  auto a = channel_divergence(n, m, quick(11)), b = channel_divergence(n, m, quick(11));
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.per_restart_values, b.per_restart_values);
}

TEST(ChannelDivergence, MoreRestartsNeverLower) {
  Rng rng = make_rng(210);
  Channel n = random_channel(2, 2, 2, rng), m = random_channel(2, 2, 4, rng);
  double v2 = channel_divergence(n, m, quick(4, 2)).value;
  double v8 = channel_divergence(n, m, quick(4, 8)).value;
  EXPECT_GE(v8, v2);
}

TEST(ChannelDivergence, FeasiblePointsAreUsed) {
  Rng rng = make_rng(211);
  Channel n = random_channel(2, 2, 2, rng), m = random_channel(2, 2, 4, rng);
  auto best = channel_divergence(n, m, quick(1, 8));
  OptimizerOpts o = quick(99, 1);
  o.max_evals = 1;
  o.feasible_points.push_back(best.witness);
  EXPECT_GE(channel_divergence(n, m, o).value, best.value - 1e-12);
}

TEST(ChannelDivergence, FullRankWitnessOnRequest) {
  // the replacer-to-pure entropy witness is arbitrary; the search one must be full rank
  Rng rng = make_rng(212);
  Channel n = random_channel(2, 2, 2, rng);
  OptimizerOpts o = quick();
  o.require_full_rank = true;
  auto r = channel_entropy(n, o);
  EXPECT_TRUE(r.witness.full_rank);
}

TEST(ChannelDivergence, ErrorsOnBadInput) {
  EXPECT_THROW(channel_divergence(identity_channel(2), identity_channel(3)), DimensionError);
  EXPECT_THROW(channel_divergence(depolarizing_R(2, 2), identity_channel(2)), DomainError);
}
