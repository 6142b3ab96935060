// Writes the sample inputs under samples/data into the directory given on
// the command line. The checked-in copies were produced by this program.

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "chanent/suites.hpp"

using namespace chanent;

namespace {

void write(const std::filesystem::path& dir, const char* name, const json& j) {
  std::ofstream f(dir / name, std::ios::binary);
  f << j.dump(2) << '\n';
}

Matrix ket0() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_samples <out-dir>\n");
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);

  write(dir, "depolarizing_tilde_qubit.json", to_json(depolarizing_tilde(2, 2).with_covariance(pauli_group()), false));
  write(dir, "identity_qubit.json", to_json(identity_channel(2).with_covariance(pauli_group()), false));
  write(dir, "depolarizing_0.3.json", to_json(depolarizing(2, 0.3), false));
  write(dir, "depolarizing_0.9_pauli.json", to_json(depolarizing(2, 0.9).with_covariance(pauli_group()), false));
  write(dir, "replacer_to_zero.json", to_json(replacer(2, ket0()), false));
  write(dir, "not_cptp.json", to_json(Channel::from_kraus({std::sqrt(2.0) * identity(2)}), false));

  Rng rng = make_rng(7);
  Channel amp = random_channel(2, 2, 2, rng);
  write(dir, "random_qubit_channel.json", to_json(amp, false));
  write(dir, "unitary_sandwich.json", to_json(unitary_sandwich(haar_unitary(2, rng), haar_unitary(2, rng))));
  write(dir, "isometry_super.json", to_json(gen::isometry_super(rng, 2, 2, 2, 3)));

  Matrix sigma = random_state(2, rng), rho = random_state(2, rng);
  write(dir, "sigma.json", to_json(sigma));
  write(dir, "rho.json", to_json(rho));
  write(dir, "rho_out.json", to_json(amp(rho)));

  RunConfig cfg;
  cfg.seed = 42;
  cfg.optimizer.restarts = 8;
  json c = to_json(cfg);
  c.erase("output_path");
  c.erase("threads");
  write(dir, "config.json", c);
  return 0;
}
