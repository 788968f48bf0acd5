#include "qfcn/circuit.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <numbers>

#include "test_helpers.hpp"

using namespace qfcn;
using test::max_abs_diff;

namespace {

constexpr double kPi = std::numbers::pi;

// Small mirror-consistent architecture used where the default would be
// needlessly slow: widths 4 -> 2 -> 4.
ArchitectureConfig small_arch() {
  ArchitectureConfig cfg;
  cfg.n_qubits = 4;
  cfg.pool_schedule = {{0, 2}};
  cfg.upsample_schedule = {2};
  return cfg;
}

// Reference forward pass built purely from the public state primitives,
// independent of the layered evaluator inside forward().
std::vector<double> forward_by_primitives(const CircuitSpec& spec,
                                          const ParamVector& theta,
                                          std::span<const double> x) {
  MixedState rho = to_density(encode(x, spec.n_qubits));
  for (const Layer& layer : spec.layers) {
    if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
      for (int rep = 0; rep < conv->reps; ++rep) {
        rho = conv_layer(rho, theta.slice(conv->slice),
                         brickwork_pairs(conv->width, rep));
      }
    } else if (const auto* pool = std::get_if<PoolLayer>(&layer)) {
      rho = pool_layer(rho, pool->keep);
    } else if (const auto* up = std::get_if<UpsampleLayer>(&layer)) {
      rho = upsample_layer(rho, theta.slice(up->slice),
                           UpsampleStageCfg{up->n_ancillas, up->mode, up->kind});
    }
  }
  std::vector<double> out(rho.n_qubits());
  for (int q = 0; q < rho.n_qubits(); ++q) out[q] = expect_z(rho, q);
  return out;
}

} // namespace

TEST_CASE("brickwork_pairs alternates the two coverings", "[circuit]") {
  using Pairs = std::vector<std::pair<int, int>>;
  REQUIRE(brickwork_pairs(8, 0) == Pairs{{0, 1}, {2, 3}, {4, 5}, {6, 7}});
  REQUIRE(brickwork_pairs(8, 1) == Pairs{{1, 2}, {3, 4}, {5, 6}});
  REQUIRE(brickwork_pairs(8, 2) == Pairs{{0, 1}, {2, 3}, {4, 5}, {6, 7}});
  REQUIRE(brickwork_pairs(4, 0) == Pairs{{0, 1}, {2, 3}});
  REQUIRE(brickwork_pairs(4, 1) == Pairs{{1, 2}});
  REQUIRE(brickwork_pairs(2, 1) == Pairs{});
  REQUIRE(brickwork_pairs(1, 0) == Pairs{});
}

TEST_CASE("build_qfcn lays out the default architecture", "[circuit]") {
  const CircuitSpec spec = build_qfcn(ArchitectureConfig{});
  REQUIRE(spec.n_qubits == 8);
  REQUIRE(spec.bottleneck_width == 2);

  // encode, conv, pool, conv, pool, upsample, upsample, readout
  REQUIRE(spec.layers.size() == 8);
  REQUIRE(std::get<EncodeLayer>(spec.layers[0]).width == 8);
  REQUIRE(std::get<ConvLayer>(spec.layers[1]).width == 8);
  REQUIRE(std::get<PoolLayer>(spec.layers[2]).width_in == 8);
  REQUIRE(std::get<ConvLayer>(spec.layers[3]).width == 4);
  REQUIRE(std::get<PoolLayer>(spec.layers[4]).width_in == 4);
  REQUIRE(std::get<UpsampleLayer>(spec.layers[5]).width_in == 2);
  REQUIRE(std::get<UpsampleLayer>(spec.layers[6]).width_in == 4);
  REQUIRE(std::get<ReadoutLayer>(spec.layers[7]).width == 8);

  // shared mode: four 15-parameter slices
  REQUIRE(spec.layout.total() == 60);
  REQUIRE(spec.layout.slice("conv0").offset == 0);
  REQUIRE(spec.layout.slice("conv1").offset == 15);
  REQUIRE(spec.layout.slice("up0").offset == 30);
  REQUIRE(spec.layout.slice("up1").offset == 45);
  REQUIRE(spec.layout.slice("up1").length == 15);
  REQUIRE_THROWS_AS(spec.layout.slice("up2"), std::invalid_argument);

  // su4 slice kinds: 6 rotation, 3 canonical, 6 rotation
  for (int block = 0; block < 4; ++block) {
    for (int i = 0; i < 15; ++i) {
      const ParamKind kind = spec.layout.kinds[15 * block + i];
      if (i >= 6 && i < 9) {
        REQUIRE(kind == ParamKind::kCanonicalFull);
      } else {
        REQUIRE(kind == ParamKind::kRotationHalf);
      }
    }
  }
}

TEST_CASE("build_qfcn parameter counts across variants", "[circuit]") {
  ArchitectureConfig cfg;

  SECTION("per-site su4 upsampling: 30 conv + 30 + 60") {
    cfg.upsample_mode = UpsampleMode::kPerSite;
    const CircuitSpec spec = build_qfcn(cfg);
    REQUIRE(spec.layout.total() == 120);
    REQUIRE(spec.layout.slice("up0").length == 30);
    REQUIRE(spec.layout.slice("up1").length == 60);
  }
  SECTION("shared controlled rotations: 3 per stage") {
    cfg.upsample_gate_kind = UpsampleGateKind::kControlledSu2;
    const CircuitSpec spec = build_qfcn(cfg);
    REQUIRE(spec.layout.total() == 36);
    REQUIRE(spec.layout.slice("up0").length == 3);
    for (int i = 30; i < 36; ++i) {
      REQUIRE(spec.layout.kinds[i] == ParamKind::kControlledRotation);
    }
  }
  SECTION("per-site controlled rotations") {
    cfg.upsample_mode = UpsampleMode::kPerSite;
    cfg.upsample_gate_kind = UpsampleGateKind::kControlledSu2;
    const CircuitSpec spec = build_qfcn(cfg);
    REQUIRE(spec.layout.total() == 30 + 6 + 12);
  }
}

TEST_CASE("build_qfcn rejects inconsistent schedules", "[circuit]") {
  SECTION("non-mirror schedule") {
    ArchitectureConfig cfg = small_arch();
    cfg.upsample_schedule = {};  // ends at width 2 instead of 4
    REQUIRE_THROWS_WITH(build_qfcn(cfg),
                        Catch::Matchers::ContainsSubstring("mirror"));
  }
  SECTION("ancilla count must equal the current width") {
    ArchitectureConfig cfg = small_arch();
    cfg.upsample_schedule = {3};
    REQUIRE_THROWS_AS(build_qfcn(cfg), std::invalid_argument);
  }
  SECTION("keep positions must be valid") {
    ArchitectureConfig cfg = small_arch();
    cfg.pool_schedule = {{0, 4}};
    REQUIRE_THROWS_AS(build_qfcn(cfg), std::invalid_argument);
    cfg.pool_schedule = {{0, 0}};
    REQUIRE_THROWS_AS(build_qfcn(cfg), std::invalid_argument);
    cfg.pool_schedule = {{0, 1, 2, 3}};  // keeps everything
    REQUIRE_THROWS_AS(build_qfcn(cfg), std::invalid_argument);
  }
  SECTION("doubling past the simulator budget") {
    ArchitectureConfig cfg;
    cfg.n_qubits = 8;
    cfg.pool_schedule = {{0, 1, 2, 3, 4, 5, 6}};
    cfg.upsample_schedule = {7};  // would need 14 qubits
    REQUIRE_THROWS_AS(build_qfcn(cfg), std::invalid_argument);
  }
  SECTION("reps must be positive") {
    ArchitectureConfig cfg = small_arch();
    cfg.conv_reps_per_stage = 0;
    REQUIRE_THROWS_AS(build_qfcn(cfg), std::invalid_argument);
  }
}

TEST_CASE("encode prepares cluster then RX by hand", "[circuit]") {
  const std::vector<double> x = {0.4, 1.3, 2.2};
  const PureState got = encode(x, 3);

  Eigen::VectorXcd ref = prepare_cluster_state(3).amplitudes();
  for (int q = 0; q < 3; ++q) {
    const Eigen::MatrixXcd full = test::embed(rotation(Axis::X, x[q]), 3, {q});
    ref = full * ref;
  }
  REQUIRE(max_abs_diff(got.amplitudes(), ref) < 1e-13);

  REQUIRE_THROWS_AS(encode(x, 4), std::invalid_argument);
  const std::vector<double> bad = {0.1, std::nan(""), 0.2};
  REQUIRE_THROWS_AS(encode(bad, 3), std::invalid_argument);
}

TEST_CASE("conv_layer applies one shared gate to every pair", "[circuit]") {
  const std::vector<double> theta = test::random_angles(15);
  const GateMatrix gate = su4(std::span<const double>(theta));
  const Eigen::MatrixXcd rho = test::random_density(4);

  const MixedState got =
      conv_layer(MixedState(4, rho), theta, brickwork_pairs(4, 0));

  const Eigen::MatrixXcd g01 = test::embed(gate, 4, {0, 1});
  const Eigen::MatrixXcd g23 = test::embed(gate, 4, {2, 3});
  const Eigen::MatrixXcd ref =
      g23 * g01 * rho * g01.adjoint() * g23.adjoint();
  REQUIRE(max_abs_diff(got.matrix(), ref) < 1e-12);

  REQUIRE_THROWS_AS(conv_layer(MixedState(4, rho),
                               std::span<const double>(theta).first(14),
                               brickwork_pairs(4, 0)),
                    std::invalid_argument);
}

TEST_CASE("pool_layer is the partial trace over dropped positions",
          "[circuit]") {
  const Eigen::MatrixXcd rho = test::random_density(4);
  const MixedState pooled = pool_layer(MixedState(4, rho), {0, 2});
  REQUIRE(pooled.n_qubits() == 2);
  REQUIRE(max_abs_diff(pooled.matrix(), test::trace_out(rho, 4, {1, 3})) <
          1e-13);

  REQUIRE_THROWS_AS(pool_layer(MixedState(4, rho), {}), std::invalid_argument);
  REQUIRE_THROWS_AS(pool_layer(MixedState(4, rho), {0, 1, 2, 3}),
                    std::invalid_argument);
}

TEST_CASE("permute_qubits reorders basis indices", "[circuit]") {
  // |01> under the swap permutation becomes |10>
  PureState psi = new_pure(2);
  const int flip[] = {1};
  psi = apply_unitary(psi, named_gate("X"), flip);
  const MixedState swapped = permute_qubits(to_density(psi), {1, 0});
  REQUIRE(std::abs(swapped.matrix()(2, 2) - cplx(1, 0)) < 1e-15);

  // random 3-qubit check against the embedding built from basis mapping
  const Eigen::MatrixXcd rho = test::random_density(3);
  const std::vector<int> perm = {2, 0, 1};
  const MixedState got = permute_qubits(MixedState(3, rho), perm);
  Eigen::MatrixXcd table = Eigen::MatrixXcd::Zero(8, 8);
  for (int i = 0; i < 8; ++i) {
    int j = 0;
    for (int q = 0; q < 3; ++q) {
      if (i & (1 << (2 - q))) j |= 1 << (2 - perm[q]);
    }
    table(j, i) = 1;
  }
  REQUIRE(max_abs_diff(got.matrix(),
                       Eigen::MatrixXcd(table * rho * table.adjoint())) <
          1e-14);

  REQUIRE_THROWS_AS(permute_qubits(MixedState(3, rho), {0, 0, 1}),
                    std::invalid_argument);
}

TEST_CASE("upsample_layer with zero parameters preserves marginals",
          "[circuit]") {
  // with su4(0) = identity coupling, the output is just the interleaved
  // product with the ancilla cluster
  const Eigen::MatrixXcd rho = test::random_density(2);
  const std::vector<double> zeros(15, 0.0);
  const MixedState out =
      upsample_layer(MixedState(2, rho), zeros, UpsampleStageCfg{2});
  REQUIRE(out.n_qubits() == 4);

  // sources land at positions 0 and 2 and keep their joint state
  REQUIRE(max_abs_diff(partial_trace(out, {1, 3}).matrix(), rho) < 1e-12);

  // ancillas land at positions 1 and 3 in the two-qubit cluster state
  const Eigen::VectorXcd cluster = prepare_cluster_state(2).amplitudes();
  REQUIRE(max_abs_diff(partial_trace(out, {0, 2}).matrix(),
                       Eigen::MatrixXcd(cluster * cluster.adjoint())) <
          1e-12);
}

TEST_CASE("upsample_layer matches a hand-built tensor-couple-permute",
          "[circuit]") {
  const Eigen::MatrixXcd rho = test::random_density(2);
  const std::vector<double> theta = test::random_angles(15);
  const MixedState got =
      upsample_layer(MixedState(2, rho), theta, UpsampleStageCfg{2});

  // reference: rho (x) cluster, couple (0,2) and (1,3), interleave
  const Eigen::VectorXcd cl = prepare_cluster_state(2).amplitudes();
  MixedState ref = tensor_with(MixedState(2, rho),
                               MixedState(2, cl * cl.adjoint()));
  const GateMatrix gate = su4(std::span<const double>(theta));
  ref = apply_unitary(ref, gate, std::vector<int>{0, 2});
  ref = apply_unitary(ref, gate, std::vector<int>{1, 3});
  ref = permute_qubits(ref, {0, 2, 1, 3});
  REQUIRE(max_abs_diff(got.matrix(), ref.matrix()) < 1e-12);
}

TEST_CASE("upsample_layer per-site and controlled variants", "[circuit]") {
  const Eigen::MatrixXcd rho = test::random_density(2);

  SECTION("per-site blocks apply different gates per pair") {
    const std::vector<double> theta = test::random_angles(30);
    const MixedState got = upsample_layer(
        MixedState(2, rho), theta,
        UpsampleStageCfg{2, UpsampleMode::kPerSite, UpsampleGateKind::kFullSu4});

    const Eigen::VectorXcd cl = prepare_cluster_state(2).amplitudes();
    MixedState ref = tensor_with(MixedState(2, rho),
                                 MixedState(2, cl * cl.adjoint()));
    const std::span<const double> all(theta);
    ref = apply_unitary(ref, su4(all.subspan(0, 15)), std::vector<int>{0, 2});
    ref = apply_unitary(ref, su4(all.subspan(15, 15)), std::vector<int>{1, 3});
    ref = permute_qubits(ref, {0, 2, 1, 3});
    REQUIRE(max_abs_diff(got.matrix(), ref.matrix()) < 1e-12);
  }
  SECTION("controlled_su2 applies controlled euler rotations") {
    const std::vector<double> theta = test::random_angles(3);
    const MixedState got =
        upsample_layer(MixedState(2, rho), theta,
                       UpsampleStageCfg{2, UpsampleMode::kShared,
                                        UpsampleGateKind::kControlledSu2});

    const Eigen::VectorXcd cl = prepare_cluster_state(2).amplitudes();
    MixedState ref = tensor_with(MixedState(2, rho),
                                 MixedState(2, cl * cl.adjoint()));
    const GateMatrix gate = controlled(euler_zyz(theta[0], theta[1], theta[2]));
    ref = apply_unitary(ref, gate, std::vector<int>{0, 2});
    ref = apply_unitary(ref, gate, std::vector<int>{1, 3});
    ref = permute_qubits(ref, {0, 2, 1, 3});
    REQUIRE(max_abs_diff(got.matrix(), ref.matrix()) < 1e-12);
  }
  SECTION("wrong slice lengths are rejected") {
    const std::vector<double> theta = test::random_angles(15);
    REQUIRE_THROWS_AS(
        upsample_layer(MixedState(2, rho), theta,
                       UpsampleStageCfg{2, UpsampleMode::kPerSite,
                                        UpsampleGateKind::kFullSu4}),
        std::invalid_argument);
  }
  SECTION("ancilla count must match the width") {
    const std::vector<double> theta = test::random_angles(15);
    REQUIRE_THROWS_AS(
        upsample_layer(MixedState(2, rho), theta, UpsampleStageCfg{1}),
        std::invalid_argument);
  }
}

TEST_CASE("controlled coupling is inert on a |0> control", "[circuit]") {
  // when the source qubit is |0>, the controlled gate must not touch the
  // ancilla: its marginal stays the plain cluster state
  MixedState rho = to_density(new_pure(1));
  const std::vector<double> theta = test::random_angles(3);
  const MixedState out =
      upsample_layer(rho, theta,
                     UpsampleStageCfg{1, UpsampleMode::kShared,
                                      UpsampleGateKind::kControlledSu2});
  const Eigen::VectorXcd plus = prepare_cluster_state(1).amplitudes();
  REQUIRE(max_abs_diff(partial_trace(out, {0}).matrix(),
                       Eigen::MatrixXcd(plus * plus.adjoint())) < 1e-12);
}

TEST_CASE("forward matches the primitive-assembled pipeline", "[circuit]") {
  // the layered evaluator (pure prefix, mixed middle, ensemble suffix)
  // against the same circuit run through the public state primitives
  for (const UpsampleMode mode : {UpsampleMode::kShared, UpsampleMode::kPerSite}) {
    for (const UpsampleGateKind kind :
         {UpsampleGateKind::kFullSu4, UpsampleGateKind::kControlledSu2}) {
      ArchitectureConfig cfg = small_arch();
      cfg.upsample_mode = mode;
      cfg.upsample_gate_kind = kind;
      cfg.conv_reps_per_stage = 2;
      const CircuitSpec spec = build_qfcn(cfg);
      const ParamVector theta =
          make_params(spec, test::random_angles(spec.layout.total()));
      const std::vector<double> x = test::random_angles(4, 0.0, kPi);

      const std::vector<double> fast = forward(spec, theta, x);
      const std::vector<double> slow = forward_by_primitives(spec, theta, x);
      REQUIRE(fast.size() == slow.size());
      for (std::size_t q = 0; q < fast.size(); ++q) {
        REQUIRE(fast[q] == Catch::Approx(slow[q]).margin(1e-12));
      }
    }
  }
}

TEST_CASE("forward on the default architecture reads out 8 values",
          "[circuit]") {
  const CircuitSpec spec = build_qfcn(ArchitectureConfig{});
  const ParamVector theta =
      make_params(spec, test::random_angles(spec.layout.total()));
  const std::vector<double> x = test::random_angles(8, 0.0, kPi);
  const std::vector<double> y = forward(spec, theta, x);
  REQUIRE(y.size() == 8);
  for (double v : y) {
    REQUIRE(v >= -1.0);
    REQUIRE(v <= 1.0);
  }
}

TEST_CASE("per-site upsampling with equal blocks reduces to shared",
          "[circuit]") {
  ArchitectureConfig shared_cfg = small_arch();
  ArchitectureConfig per_site_cfg = small_arch();
  per_site_cfg.upsample_mode = UpsampleMode::kPerSite;

  const CircuitSpec shared_spec = build_qfcn(shared_cfg);
  const CircuitSpec per_site_spec = build_qfcn(per_site_cfg);

  for (int trial = 0; trial < 5; ++trial) {
    const std::vector<double> shared_vals =
        test::random_angles(shared_spec.layout.total());  // conv0 15 + up0 15
    // copy the shared up0 block into both per-site sub-blocks
    std::vector<double> per_site_vals(shared_vals.begin(),
                                      shared_vals.begin() + 15);
    for (int site = 0; site < 2; ++site) {
      per_site_vals.insert(per_site_vals.end(), shared_vals.begin() + 15,
                           shared_vals.begin() + 30);
    }
    const ParamVector a = make_params(shared_spec, shared_vals);
    const ParamVector b = make_params(per_site_spec, per_site_vals);

    const std::vector<double> x = test::random_angles(4, 0.0, kPi);
    const std::vector<double> ya = forward(shared_spec, a, x);
    const std::vector<double> yb = forward(per_site_spec, b, x);
    for (std::size_t q = 0; q < ya.size(); ++q) {
      REQUIRE(ya[q] == Catch::Approx(yb[q]).margin(1e-12));
    }
  }
}

TEST_CASE("truncate_at_bottleneck keeps the encoder prefix", "[circuit]") {
  const CircuitSpec full = build_qfcn(ArchitectureConfig{});
  const CircuitSpec trunc = truncate_at_bottleneck(full);

  REQUIRE(trunc.n_qubits == 8);
  REQUIRE(trunc.bottleneck_width == 2);
  REQUIRE(trunc.layout.total() == 30);  // conv slices only
  REQUIRE(std::get<ReadoutLayer>(trunc.layers.back()).width == 2);

  // forward on the truncated spec equals forward_qcnn on the full spec
  std::vector<double> vals = test::random_angles(60);
  const ParamVector full_theta = make_params(full, vals);
  vals.resize(30);
  const ParamVector trunc_theta = make_params(trunc, vals);

  const std::vector<double> x = test::random_angles(8, 0.0, kPi);
  const std::vector<double> a = forward(trunc, trunc_theta, x);
  const std::vector<double> b = forward_qcnn(full, full_theta, x);
  REQUIRE(a.size() == 2);
  REQUIRE(b.size() == 2);
  for (int q = 0; q < 2; ++q) {
    REQUIRE(a[q] == Catch::Approx(b[q]).margin(1e-12));
  }
}

TEST_CASE("forward validates its inputs", "[circuit]") {
  const CircuitSpec spec = build_qfcn(small_arch());
  const ParamVector theta = zero_params(spec);
  const std::vector<double> x = {0.1, 0.2, 0.3, 0.4};

  REQUIRE_THROWS_AS(
      forward(spec, make_params(spec, test::random_angles(29)), x),
      std::invalid_argument);
  const std::vector<double> short_x = {0.1, 0.2};
  REQUIRE_THROWS_AS(forward(spec, theta, short_x), std::invalid_argument);
}
