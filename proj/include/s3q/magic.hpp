// Magic states from the controlled charge conjugation, sandwiched between
// generalized Hadamards on the six-level logical space.
//
// Six-level basis order is {1, ba, a^2, b, a, ba^2}: index k holds (ba)^k,
// i.e. qubit bit k mod 2 and qutrit digit k mod 3.
#pragma once

#include "s3q/decoder.hpp"
#include "s3q/protocol.hpp"

#include <array>
#include <numbers>

namespace s3q::magic {

inline constexpr int kLevels = 6;
using Vec6 = Eigen::Matrix<cplx, 6, 1>;
using Mat6 = Eigen::Matrix<cplx, 6, 6>;

inline int qubit_bit(int k) { return k % 2; }
inline int qutrit_digit(int k) { return k % 3; }
inline int six_index(int bit, int digit) {
  for (int k = 0; k < kLevels; ++k)
    if (qubit_bit(k) == bit && qutrit_digit(k) == digit) return k;
  return -1;
}

// Z6 Fourier matrix, omega = exp(2 pi i / 6).
inline Mat6 build_H6() {
  Mat6 h;
  for (int r = 0; r < kLevels; ++r)
    for (int c = 0; c < kLevels; ++c) h(r, c) = std::polar(1.0, 2 * std::numbers::pi * r * c / kLevels);
  return h / std::sqrt(6.0);
}

// Swaps ba and a, fixes the rest.
inline Mat6 build_CC6() {
  Mat6 m = Mat6::Identity();
  m.row(1).swap(m.row(4));
  return m;
}

// H2 (x) H3^dagger written in the six-level order.
inline Mat6 hadamard_product() {
  const double s = 1 / std::sqrt(6.0);
  Mat6 m;
  for (int r = 0; r < kLevels; ++r)
    for (int c = 0; c < kLevels; ++c) {
      double sign = (qubit_bit(r) && qubit_bit(c)) ? -1 : 1;
      m(r, c) = sign * s * std::polar(1.0, -2 * std::numbers::pi * qutrit_digit(r) * qutrit_digit(c) / 3);
    }
  return m;
}

// Closed form of H6^dagger CC6 H6.  Identity on even indices; on the odd
// ones the reflection I - 2|f><f| with f the digit-one Fourier vector.
inline Mat6 expected_composite() {
  const double r3 = std::sqrt(3.0);
  const cplx m(1, -r3), p(1, r3);
  Mat6 d = Mat6::Zero();
  d(0, 0) = d(2, 2) = d(4, 4) = 3;
  d(1, 1) = d(3, 3) = d(5, 5) = 1;
  d(1, 3) = m, d(1, 5) = p;
  d(3, 1) = p, d(3, 5) = m;
  d(5, 1) = m, d(5, 3) = p;
  return d / 3.0;
}

inline Mat6 composite() {
  Mat6 h = build_H6();
  return h.adjoint() * build_CC6() * h;
}

inline Vec6 input_state() {
  Vec6 v = Vec6::Zero();
  v(0) = v(3) = 1 / std::sqrt(2.0);
  return v;
}

inline Vec6 output_state() { return composite() * input_state(); }

enum class Layer { qutrit, qubit };

struct Branch {
  std::string label;
  int outcome = 0;          // digit for the qutrit layer, bit for the qubit layer
  double probability = 0;
  std::string exact;        // rational form where known
  std::vector<cplx> state;  // normalized post-state on the other layer
};

inline std::string rational(double p) {
  for (int den : {1, 2, 3, 6, 9, 18})
    for (int num = 0; num <= den; ++num)
      if (std::abs(p - static_cast<double>(num) / den) < 1e-12) {
        if (num == 0) return "0";
        if (num == den) return "1";
        int g = std::gcd(num, den);
        return std::to_string(num / g) + "/" + std::to_string(den / g);
      }
  return "";
}

// Exact branch decomposition of a six-level state measured on one layer.
inline std::vector<Branch> branches(const Vec6& psi, Layer measure) {
  std::vector<Branch> out;
  int outcomes = measure == Layer::qutrit ? 3 : 2;
  int rest = measure == Layer::qutrit ? 2 : 3;
  for (int o = 0; o < outcomes; ++o) {
    Branch b;
    b.outcome = o;
    b.label = measure == Layer::qutrit ? "Zt=w^" + std::to_string(o) : (o ? "Z=-1" : "Z=+1");
    b.state.assign(rest, cplx{});
    for (int r = 0; r < rest; ++r) {
      int k = measure == Layer::qutrit ? six_index(r, o) : six_index(o, r);
      b.state[r] = psi(k);
      b.probability += std::norm(psi(k));
    }
    if (b.probability > 0)
      for (auto& a : b.state) a /= std::sqrt(b.probability);
    b.exact = rational(b.probability);
    out.push_back(std::move(b));
  }
  return out;
}

inline std::vector<Branch> run_magic(Layer measure) { return branches(output_state(), measure); }

// Bloch vector of a qubit state.
inline std::array<double, 3> bloch(const std::vector<cplx>& q) {
  cplx c = std::conj(q[0]) * q[1];
  return {2 * c.real(), 2 * c.imag(), std::norm(q[0]) - std::norm(q[1])};
}

// Euclidean distance from the Bloch vector to the nearest of the six
// stabilizer states.
inline double stabilizer_distance(const std::vector<cplx>& q) {
  auto b = bloch(q);
  double best = 1e9;
  for (int axis = 0; axis < 3; ++axis)
    for (double s : {1.0, -1.0}) {
      double d = 0;
      for (int i = 0; i < 3; ++i) {
        double t = b[i] - (i == axis ? s : 0.0);
        d += t * t;
      }
      best = std::min(best, std::sqrt(d));
    }
  return best;
}

// Largest squared overlap with any of the twelve single-qutrit stabilizer
// states (computational basis plus the three Fourier-type bases).
inline double max_qutrit_stabilizer_overlap(const std::vector<cplx>& q) {
  double best = 0;
  for (int k = 0; k < 3; ++k) best = std::max(best, std::norm(q[k]));
  const cplx w = std::polar(1.0, 2 * std::numbers::pi / 3);
  for (int quad = 0; quad < 3; ++quad)
    for (int lin = 0; lin < 3; ++lin) {
      cplx a{};
      for (int j = 0; j < 3; ++j) a += std::pow(w, lin * j + quad * j * j) * q[j] / std::sqrt(3.0);
      best = std::max(best, std::norm(a));
    }
  return best;
}

// Lattice cross-check.  The code rotation that accompanies the transversal
// Hadamard is taken as a relabeling of the six logical basis states.  The
// displayed CC6 swaps ba and a, so the relabeling sends those two labels to
// |1,1> and |1,2> of the lattice code and the other four to the states the
// controlled charge conjugation fixes.
inline std::pair<int, int> lattice_label(int k) {
  static const std::array<std::pair<int, int>, kLevels> map{{
      {0, 0},  // 1
      {1, 1},  // ba
      {0, 2},  // a^2
      {1, 0},  // b
      {1, 2},  // a
      {0, 1},  // ba^2
  }};
  return map[k];
}

inline int six_from_lattice(int a, int digit) {
  for (int k = 0; k < kLevels; ++k)
    if (lattice_label(k) == std::pair{a, digit}) return k;
  return -1;
}

struct CrossCheck {
  int runs = 0;
  int shots = 0;
  std::array<int, 3> counts{};
  std::array<double, 3> exact{};      // from the lattice logical output
  std::array<double, 3> reference{};  // six-level computation
  double min_gate_fidelity = 1;       // lattice output vs ideal CC on the relabeled input
  double z_frequency() const { return shots ? static_cast<double>(counts[0]) / shots : 0; }
  double sigma() const { return shots ? std::sqrt(reference[0] * (1 - reference[0]) / shots) : 0; }
  bool within(double nsigma = 3) const { return std::abs(z_frequency() - reference[0]) <= nsigma * sigma(); }
  std::vector<int> sequence;  // sampled digit per shot
};

// Logical amplitudes of a lattice state on the output layout.
inline Vec6 read_logical(const ProtocolConfig& cfg, const State& out) {
  auto B = BaseSpec::from(cfg.group);
  auto L = final_layout(cfg);
  Vec6 v = Vec6::Zero();
  for (int a = 0; a < 2; ++a)
    for (int d = 0; d < 3; ++d) {
      State basis = encode(L, B, basis_input(a, {d}), cfg.budget);
      v(six_from_lattice(a, d)) = overlap(basis, out);
    }
  return v;
}

inline CrossCheck lattice_cross_check(ProtocolConfig cfg, int shots, int runs = 16) {
  if (cfg.group.kind != GroupSpec::Kind::cyclic) throw std::invalid_argument("magic cross-check needs the S3 code");
  if (shots < 1 || runs < 1) throw std::invalid_argument("shots and runs must be positive");
  CrossCheck cc;
  cc.runs = runs;
  cc.shots = shots;
  Mat6 h = build_H6();
  Vec6 in6 = h * input_state();
  LogicalVector in = [in6](int a, const std::vector<int>& ks) { return in6(six_from_lattice(a, ks[0])); };
  Vec6 ideal = build_CC6() * in6;
  auto ref = branches(output_state(), Layer::qutrit);
  for (int j = 0; j < 3; ++j) cc.reference[j] = ref[j].probability;

  std::vector<std::array<double, 3>> dist;
  for (int r = 0; r < runs; ++r) {
    Rng rng(trial_seed(cfg.seed, r));
    auto res = run_protocol(cfg, in, rng);
    Vec6 got = read_logical(cfg, res.out);
    cc.min_gate_fidelity = std::min(cc.min_gate_fidelity, std::norm(ideal.dot(got)));
    auto br = branches(h.adjoint() * got, Layer::qutrit);
    std::array<double, 3> p{};
    for (int j = 0; j < 3; ++j) p[j] = br[j].probability;
    for (int j = 0; j < 3; ++j) cc.exact[j] += p[j] / runs;
    dist.push_back(p);
  }
  Rng pick(trial_seed(cfg.seed ^ 0x6d61676963ULL, 0));
  std::uniform_real_distribution<double> u(0, 1);
  for (int s = 0; s < shots; ++s) {
    const auto& p = dist[s % runs];
    double x = u(pick);
    int j = x < p[0] ? 0 : (x < p[0] + p[1] ? 1 : 2);
    ++cc.counts[j];
    cc.sequence.push_back(j);
  }
  return cc;
}

}  // namespace s3q::magic
