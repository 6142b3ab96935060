#include <gtest/gtest.h>

#include "chanent/channels.hpp"

using namespace chanent;

namespace {

Matrix kraus_apply(const std::vector<Matrix>& ks, const Matrix& x) {
  Matrix out = Matrix::Zero(ks[0].rows(), ks[0].rows());
  for (const auto& k : ks) out += k * x * k.adjoint();
  return out;
}

cplx hs(const Matrix& a, const Matrix& b) { return (a.adjoint() * b).trace(); }

}  // namespace

TEST(Channels, IdentityChoiIsUnnormalisedMaxEntangled) {
  for (std::size_t d : {2u, 3u}) {
    CVector omega = CVector::Zero(static_cast<Eigen::Index>(d * d));
    for (std::size_t i = 0; i < d; ++i) omega(static_cast<Eigen::Index>(i * d + i)) = 1.0;
    EXPECT_LT(max_abs(identity_channel(d).choi() - omega * omega.adjoint()), 1e-15);
  }
}

TEST(Channels, ApplyMatchesKrausSum) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng = make_rng(100, s);
    std::size_t a = uniform_int(rng, 1, 3), b = uniform_int(rng, 1, 3), e = uniform_int(rng, 1, 3);
    if (b * e < a) e = a;
    Channel n = random_channel(a, b, e, rng);
    ASSERT_TRUE(n.is_cptp());
    Matrix x = ginibre(a, a, rng);
    EXPECT_LT(max_abs(n(x) - kraus_apply(*n.kraus(), x)), 1e-13);
  }
}

TEST(Channels, KrausRoundTrip) {
  Rng rng = make_rng(101);
  Channel n = random_channel(3, 2, 3, rng);
  Channel m = Channel::from_kraus(kraus_from_choi(n));
  EXPECT_LT(max_abs(n.choi() - m.choi()), 1e-12);
}

TEST(Channels, AdjointSatisfiesDuality) {
  Rng rng = make_rng(102);
  Channel n = random_channel(2, 3, 2, rng);
  for (bool via_kraus : {true, false}) {
    Channel na = via_kraus ? adjoint(n) : adjoint(Channel::from_choi(n.choi(), 2, 3));
    Matrix p = ginibre(3, 3, rng), q = ginibre(2, 2, rng);
    EXPECT_LT(std::abs(hs(p, n(q)) - hs(na(p), q)), 1e-12);
  }
}

TEST(Channels, AdjointOfTpIsUnital) {
  Rng rng = make_rng(103);
  Channel n = random_channel(3, 2, 2, rng);
  EXPECT_LT(max_abs(adjoint(n)(identity(2)) - identity(3)), 1e-12);
  EXPECT_TRUE(adjoint(n).flags().unital.yes());
}

TEST(Channels, CompositionAndTensor) {
  Rng rng = make_rng(104);
  Channel n1 = random_channel(2, 3, 2, rng), n2 = random_channel(3, 2, 2, rng);
  Matrix x = ginibre(2, 2, rng);
  EXPECT_LT(max_abs(compose(n2, n1)(x) - n2(n1(x))), 1e-13);
  EXPECT_LT(max_abs(compose(n2, n1, false)(x) - n2(n1(x))), 1e-13);
  Matrix y = ginibre(3, 3, rng);
  Channel t = tensor_channels(n1, n2);
  Channel tc = tensor_channels(Channel::from_choi(n1.choi(), 2, 3), Channel::from_choi(n2.choi(), 3, 2));
  EXPECT_LT(max_abs(t(tensor(x, y)) - tensor(n1(x), n2(y))), 1e-13);
  EXPECT_LT(max_abs(tc.choi() - t.choi()), 1e-13);
  EXPECT_TRUE(t.is_cptp());
  EXPECT_THROW(compose(n1, n1), DimensionError);
}

TEST(Channels, TensorIdentityHelpers) {
  Rng rng = make_rng(105);
  Channel n = random_channel(2, 3, 2, rng);
  Matrix z = ginibre(4, 4, rng);
  // (N (x) id)(Z) through Kraus K (x) 1
  std::vector<Matrix> kl, kr;
  for (const auto& k : *n.kraus()) {
    kl.push_back(tensor(k, identity(2)));
    kr.push_back(tensor(identity(2), k));
  }
  EXPECT_LT(max_abs(apply_tensor_id(n, z, 2) - kraus_apply(kl, z)), 1e-13);
  EXPECT_LT(max_abs(apply_id_tensor(n, z, 2) - kraus_apply(kr, z)), 1e-13);
}

TEST(Channels, CertificationFlags) {
  EXPECT_TRUE(depolarizing_tilde(2, 3).is_cptp());
  EXPECT_FALSE(depolarizing_R(2, 2).is_tp());
  EXPECT_TRUE(depolarizing_R(2, 2).is_cp());
  EXPECT_TRUE(identity_channel(3).flags().unital.yes());
  EXPECT_TRUE(depolarizing(3, 0.3).is_cptp());
  // transpose map: Choi is the swap, not PSD
  Channel t = channel_from_action(2, 2, [](const Matrix& x) { return Matrix(x.transpose()); });
  EXPECT_EQ(t.flags().cp.verdict, Tri::no);
  EXPECT_NEAR(t.flags().cp.value, -1.0, 1e-12);
  EXPECT_TRUE(t.is_tp());
  // 2 * identity is CP, not TP, and not subunital
  Channel twice = Channel::from_choi(2.0 * identity_channel(2).choi(), 2, 2);
  EXPECT_TRUE(twice.is_cp());
  EXPECT_FALSE(twice.is_tp());
  EXPECT_EQ(twice.flags().subunital.verdict, Tri::no);
}

TEST(Channels, ConstructionErrors) {
  EXPECT_THROW(Channel::from_choi(identity(5), 2, 2), DimensionError);
  EXPECT_THROW(Channel::from_kraus({}), DimensionError);
  EXPECT_THROW(Channel::from_kraus({identity(2), identity(3)}), DimensionError);
  Rng rng = make_rng(106);
  EXPECT_THROW(random_channel(4, 1, 2, rng), DimensionError);
  EXPECT_THROW(identity_channel(2)(identity(3)), DimensionError);
  EXPECT_THROW(pauli_channel({0.5, 0.6, -0.1, 0.0}), DomainError);
}

TEST(Channels, DepolarizingAction) {
  Rng rng = make_rng(107);
  Matrix rho = random_state(3, rng);
  Channel n = depolarizing(3, 0.4);
  EXPECT_LT(max_abs(n(rho) - (0.6 * rho + 0.4 * identity(3) / 3.0)), 1e-14);
  EXPECT_LT(max_abs(depolarizing_R(3, 2)(rho) - identity(2)), 1e-14);
  Matrix s = random_state(2, rng);
  EXPECT_LT(max_abs(replacer(3, s)(rho) - s), 1e-14);
}

TEST(Channels, ThermalMap) {
  Matrix h = Matrix::Zero(2, 2);
  h(1, 1) = 1.0;
  Channel t = thermal_map({h, 2.0}, 2);
  Matrix out = t(identity(2) / 2.0);
  EXPECT_NEAR(out(0, 0).real(), 1.0, 1e-14);
  EXPECT_NEAR(out(1, 1).real(), std::exp(-2.0), 1e-14);
  EXPECT_THROW(thermal_map({h, -1.0}, 2), DomainError);
  EXPECT_THROW(thermal_map({-h, 1.0}, 2), DomainError);
}

TEST(Channels, PauliCovariance) {
  Channel n = pauli_channel({0.4, 0.3, 0.2, 0.1});
  EXPECT_LT(covariance_residual(n, *pauli_group()), 1e-14);
  EXPECT_NO_THROW(n.with_covariance(pauli_group()));
  // amplitude damping is not Pauli covariant
  Matrix k0 = Matrix::Zero(2, 2), k1 = Matrix::Zero(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(0.7);
  k1(0, 1) = std::sqrt(0.3);
  Channel ad = Channel::from_kraus({k0, k1});
  EXPECT_GT(covariance_residual(ad, *pauli_group()), 1e-3);
  EXPECT_THROW(ad.with_covariance(pauli_group()), DomainError);
}

TEST(Channels, TwirlProducesCovariantChannel) {
  Rng rng = make_rng(108);
  for (std::size_t d : {2u, 3u}) {
    Channel base = random_channel(d, d, 2, rng);
    Channel tw = telecov_channel(weyl_heisenberg_group(d), base);
    EXPECT_TRUE(tw.is_cptp());
    EXPECT_LT(covariance_residual(tw, *weyl_heisenberg_group(d)), 1e-12);
  }
}

TEST(Channels, SpecValidation) {
  auto s = std::make_shared<TeleCovariantSpec>();
  s->reps_in = {identity(2)};
  s->reps_out = {identity(2)};
  EXPECT_THROW(s->validate(), DomainError);  // twirl not depolarizing
  s->reps_in = {2.0 * identity(2)};
  EXPECT_THROW(s->validate(), DomainError);  // not unitary
  s->reps_in = {};
  EXPECT_THROW(s->validate(), DimensionError);
  EXPECT_NO_THROW(pauli_group()->validate());
  EXPECT_NO_THROW(tensor_spec(*pauli_group(), *pauli_group())->validate());
}

TEST(Channels, InnerProductIsHilbertSchmidtOnChoi) {
  Channel a = identity_channel(2), b = depolarizing_tilde(2, 2);
  // <Omega Omega^+, 1/2> = tr(Omega Omega^+)/2 = 1
  EXPECT_NEAR(channel_inner_product(a, b).real(), 1.0, 1e-14);
}
