// Dense mixed-radix state vector over qubit and qutrit sites.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace s3q {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Rng = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr std::size_t kDefaultBudget = std::size_t{1} << 26;

inline cplx root_of_unity(int k, int j) {
  double a = 2.0 * kPi * static_cast<double>(((j % k) + k) % k) / k;
  return {std::cos(a), std::sin(a)};
}

enum class Role : std::uint8_t { qubit_edge, base_edge, vertex };

// Lattice-addressed site. For edges h selects horizontal (c,c+1) at row y or
// vertical at column c between rows y and y+1. k is the base layer index.
struct SiteKey {
  Role role = Role::qubit_edge;
  int c = 0;
  int y = 0;
  bool h = true;
  int k = 0;
  auto operator<=>(const SiteKey&) const = default;
};

inline std::string to_string(const SiteKey& s) {
  std::ostringstream o;
  switch (s.role) {
    case Role::qubit_edge: o << "q"; break;
    case Role::base_edge: o << "b" << s.k; break;
    case Role::vertex: o << "v"; break;
  }
  if (s.role == Role::vertex) {
    o << "(" << s.c << "," << s.y << ")";
  } else {
    o << (s.h ? "h" : "v") << "(" << s.c << "," << s.y << ")";
  }
  return o.str();
}

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One factor of an operator product. On each branch of the Z-parity of the
// condition qubits the targets get plus (even) or minus (odd).
struct Factor {
  std::vector<SiteKey> targets;
  Mat plus;
  Mat minus;
  std::vector<SiteKey> cond;

  static Factor local(std::vector<SiteKey> t, Mat m) {
    Factor f;
    f.targets = std::move(t);
    f.plus = m;
    f.minus = std::move(m);
    return f;
  }
  static Factor conditioned(SiteKey t, Mat p, Mat m, std::vector<SiteKey> c) {
    Factor f;
    f.targets = {t};
    f.plus = std::move(p);
    f.minus = std::move(m);
    f.cond = std::move(c);
    return f;
  }
  bool is_conditioned() const { return !cond.empty(); }
};

// Operator product. Factors are applied to a state in list order.
struct Op {
  std::vector<Factor> factors;
  std::string label;

  Op adjoint() const {
    Op r;
    r.label = label + "^dag";
    for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
      Factor f = *it;
      f.plus = it->plus.adjoint();
      f.minus = it->minus.adjoint();
      r.factors.push_back(std::move(f));
    }
    return r;
  }
  Op then(const Op& o) const {
    Op r = *this;
    r.factors.insert(r.factors.end(), o.factors.begin(), o.factors.end());
    return r;
  }
  std::vector<SiteKey> support() const {
    std::vector<SiteKey> s;
    for (const auto& f : factors) {
      s.insert(s.end(), f.targets.begin(), f.targets.end());
      s.insert(s.end(), f.cond.begin(), f.cond.end());
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
  }
};

// Unitary of finite order k; outcomes are exponents j meaning exp(2 pi i j/k).
struct Observable {
  Op op;
  int order = 2;
  std::string name;
};

class State {
 public:
  explicit State(std::size_t budget = kDefaultBudget) : budget_(budget), amp_{cplx{1.0, 0.0}} {}

  std::size_t dim() const { return amp_.size(); }
  int num_sites() const { return static_cast<int>(keys_.size()); }
  const std::vector<SiteKey>& keys() const { return keys_; }
  const std::vector<int>& dims() const { return dims_; }
  std::vector<cplx>& amplitudes() { return amp_; }
  const std::vector<cplx>& amplitudes() const { return amp_; }
  std::size_t budget() const { return budget_; }

  bool has(const SiteKey& k) const { return find(k) >= 0; }

  int find(const SiteKey& k) const {
    for (std::size_t i = 0; i < keys_.size(); ++i) {
      if (keys_[i] == k) return static_cast<int>(i);
    }
    return -1;
  }

  int pos(const SiteKey& k) const {
    int p = find(k);
    if (p < 0) throw std::out_of_range("site not in register: " + to_string(k));
    return p;
  }

  int dim_of(const SiteKey& k) const { return dims_[pos(k)]; }

  std::size_t stride(int p) const {
    std::size_t s = 1;
    for (int i = p + 1; i < num_sites(); ++i) s *= static_cast<std::size_t>(dims_[i]);
    return s;
  }

  // Append a site in the given local state; it becomes the fastest index.
  void add_site(const SiteKey& key, int d, const std::vector<cplx>& local) {
    if (has(key)) throw std::invalid_argument("duplicate site " + to_string(key));
    if (d != 2 && d != 3) throw std::invalid_argument("site dimension must be 2 or 3");
    if (static_cast<int>(local.size()) != d) throw std::invalid_argument("local state size");
    std::size_t nd = amp_.size() * static_cast<std::size_t>(d);
    if (nd > budget_) {
      throw BudgetError("dimension " + std::to_string(nd) + " exceeds budget " + std::to_string(budget_));
    }
    std::vector<cplx> out(nd);
    for (std::size_t i = 0; i < amp_.size(); ++i) {
      for (int j = 0; j < d; ++j) out[i * d + j] = amp_[i] * local[j];
    }
    amp_.swap(out);
    keys_.push_back(key);
    dims_.push_back(d);
  }

  void add_basis(const SiteKey& key, int d, int level) {
    std::vector<cplx> v(d, 0.0);
    v.at(level) = 1.0;
    add_site(key, d, v);
  }

  void add_plus(const SiteKey& key, int d) {
    std::vector<cplx> v(d, 1.0 / std::sqrt(static_cast<double>(d)));
    add_site(key, d, v);
  }

  std::vector<double> level_probabilities(const SiteKey& key) const {
    int p = pos(key);
    int d = dims_[p];
    std::size_t st = stride(p);
    std::vector<double> pr(d, 0.0);
    for (std::size_t i = 0; i < amp_.size(); ++i) pr[(i / st) % d] += std::norm(amp_[i]);
    return pr;
  }

  // Computational-basis measurement of one site. forced >= 0 postselects.
  int measure_level(const SiteKey& key, Rng& rng, int forced = -1, bool remove = false) {
    auto pr = level_probabilities(key);
    int d = static_cast<int>(pr.size());
    int out = forced;
    if (out < 0) {
      out = sample(pr, rng);
    } else if (pr.at(out) < kZeroWeight) {
      throw std::runtime_error("forced outcome has zero probability on " + to_string(key));
    }
    int p = pos(key);
    std::size_t st = stride(p);
    double norm = 1.0 / std::sqrt(pr[out]);
    if (!remove) {
      for (std::size_t i = 0; i < amp_.size(); ++i) {
        amp_[i] = (static_cast<int>((i / st) % d) == out) ? amp_[i] * norm : cplx{};
      }
      return out;
    }
    std::size_t outer = amp_.size() / (st * d);
    std::vector<cplx> nv(outer * st);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < st; ++in) {
        nv[o * st + in] = amp_[(o * d + out) * st + in] * norm;
      }
    }
    amp_.swap(nv);
    keys_.erase(keys_.begin() + p);
    dims_.erase(dims_.begin() + p);
    return out;
  }

  void apply(const Factor& f) { apply_factor(f, amp_); }

  void apply(const Op& op) {
    for (const auto& f : op.factors) apply_factor(f, amp_);
  }

  std::vector<cplx> applied(const Op& op, const std::vector<cplx>& v) const {
    std::vector<cplx> w = v;
    for (const auto& f : op.factors) apply_factor(f, w);
    return w;
  }

  cplx inner(const std::vector<cplx>& a, const std::vector<cplx>& b) const {
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
  }

  cplx expectation(const Op& op) const { return inner(amp_, applied(op, amp_)); }

  double norm2() const {
    double s = 0;
    for (const auto& a : amp_) s += std::norm(a);
    return s;
  }

  void normalize() {
    double n = std::sqrt(norm2());
    if (n < 1e-300) throw std::runtime_error("cannot normalize zero vector");
    for (auto& a : amp_) a /= n;
  }

  // Projector onto exponent j of a finite-order unitary applied to v.
  std::vector<cplx> project(const Observable& obs, int j, const std::vector<cplx>& v) const {
    int k = obs.order;
    std::vector<cplx> acc = v;
    std::vector<cplx> cur = v;
    for (int m = 1; m < k; ++m) {
      cur = applied(obs.op, cur);
      cplx ph = root_of_unity(k, -j * m);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += ph * cur[i];
    }
    for (auto& a : acc) a /= static_cast<double>(k);
    return acc;
  }

  std::vector<double> outcome_probabilities(const Observable& obs) const {
    auto& pw = power_chain(obs);
    return probabilities_from(pw, obs.order);
  }

  int measure(const Observable& obs, Rng& rng, int forced = -1) {
    const int k = obs.order;
    auto& pw = power_chain(obs);
    auto pr = probabilities_from(pw, k);
    int out = forced;
    if (out < 0) {
      out = sample(pr, rng);
    } else if (pr.at(out) < kZeroWeight) {
      throw std::runtime_error("forced outcome has zero probability for " + obs.name);
    }
    // projection built in place: amp <- sum_m w^(-jm) U^m amp / k
    const double inv = 1.0 / static_cast<double>(k);
    for (auto& a : amp_) a *= inv;
    for (int m = 1; m < k; ++m) {
      cplx ph = root_of_unity(k, -out * m) * inv;
      const auto& v = pw[m - 1];
      for (std::size_t i = 0; i < amp_.size(); ++i) amp_[i] += ph * v[i];
    }
    normalize();
    return out;
  }

  static constexpr double kZeroWeight = 1e-12;

  static int sample(const std::vector<double>& pr, Rng& rng) {
    double tot = 0;
    for (double p : pr) tot += (p < kZeroWeight ? 0.0 : p);
    if (tot < kZeroWeight) throw std::runtime_error("all outcome weights vanish");
    std::uniform_real_distribution<double> u(0.0, tot);
    double r = u(rng);
    int last = -1;
    for (std::size_t j = 0; j < pr.size(); ++j) {
      if (pr[j] < kZeroWeight) continue;
      last = static_cast<int>(j);
      if (r < pr[j]) return last;
      r -= pr[j];
    }
    return last;
  }

 private:
  // U^m amp for m = 1..k-1 in a reusable per-thread pool.
  const std::vector<std::vector<cplx>>& power_chain(const Observable& obs) const {
    static thread_local std::vector<std::vector<cplx>> pool;
    const int k = obs.order;
    if (static_cast<int>(pool.size()) < k - 1) pool.resize(k - 1);
    for (int m = 1; m < k; ++m) {
      auto& v = pool[m - 1];
      const auto& src = m == 1 ? amp_ : pool[m - 2];
      v.resize(src.size());
      std::copy(src.begin(), src.end(), v.begin());
      for (const auto& f : obs.op.factors) apply_factor(f, v);
    }
    return pool;
  }

  std::vector<double> probabilities_from(const std::vector<std::vector<cplx>>& pw, int k) const {
    std::vector<cplx> ex(k);
    ex[0] = inner(amp_, amp_);
    for (int m = 1; m < k; ++m) ex[m] = inner(amp_, pw[m - 1]);
    std::vector<double> pr(k, 0.0);
    for (int j = 0; j < k; ++j) {
      cplx s{};
      for (int m = 0; m < k; ++m) s += root_of_unity(k, -j * m) * ex[m];
      pr[j] = std::max(0.0, s.real() / k);
    }
    return pr;
  }

  void apply_factor(const Factor& f, std::vector<cplx>& v) const {
    const int ns = num_sites();
    std::vector<int> tpos;
    for (const auto& t : f.targets) tpos.push_back(pos(t));
    std::vector<int> cpos;
    for (const auto& c : f.cond) {
      int p = pos(c);
      if (dims_[p] != 2) throw std::invalid_argument("condition site must be a qubit");
      if (std::find(tpos.begin(), tpos.end(), p) != tpos.end()) {
        throw std::invalid_argument("condition site overlaps target");
      }
      cpos.push_back(p);
    }
    std::vector<std::size_t> st(ns);
    for (int i = 0; i < ns; ++i) st[i] = stride(i);
    if (tpos.size() == 1) {
      apply_single(f, tpos[0], cpos, st, v);
      return;
    }

    // offsets of the target block, target 0 slowest
    int D = 1;
    for (int p : tpos) D *= dims_[p];
    if (f.plus.rows() != D || f.plus.cols() != D || f.minus.rows() != D) {
      throw std::invalid_argument("factor matrix size mismatch");
    }
    std::vector<std::size_t> off(D, 0);
    for (int b = 0; b < D; ++b) {
      int r = b;
      std::size_t o = 0;
      for (int t = static_cast<int>(tpos.size()) - 1; t >= 0; --t) {
        int d = dims_[tpos[t]];
        o += static_cast<std::size_t>(r % d) * st[tpos[t]];
        r /= d;
      }
      off[b] = o;
    }

    std::vector<int> freep;
    std::vector<char> is_cond(ns, 0);
    for (int p : cpos) is_cond[p] = 1;
    for (int i = 0; i < ns; ++i) {
      if (std::find(tpos.begin(), tpos.end(), i) == tpos.end()) freep.push_back(i);
    }
    const int nf = static_cast<int>(freep.size());
    std::vector<int> digit(nf, 0);
    std::size_t base = 0;
    int parity = 0;
    std::vector<cplx> buf(D), res(D);
    const bool diag_plus = is_diagonal(f.plus);
    const bool diag_minus = is_diagonal(f.minus);
    std::size_t count = v.size() / static_cast<std::size_t>(D);
    for (std::size_t it = 0; it < count; ++it) {
      const Mat& m = parity ? f.minus : f.plus;
      if (parity ? diag_minus : diag_plus) {
        for (int b = 0; b < D; ++b) v[base + off[b]] *= m(b, b);
      } else {
        for (int b = 0; b < D; ++b) buf[b] = v[base + off[b]];
        for (int r = 0; r < D; ++r) {
          cplx s{};
          for (int c = 0; c < D; ++c) s += m(r, c) * buf[c];
          res[r] = s;
        }
        for (int b = 0; b < D; ++b) v[base + off[b]] = res[b];
      }
      // odometer over free sites, fastest last
      for (int q = nf - 1; q >= 0; --q) {
        int p = freep[q];
        if (++digit[q] < dims_[p]) {
          base += st[p];
          if (is_cond[p]) parity ^= 1;
          break;
        }
        base -= st[p] * static_cast<std::size_t>(dims_[p] - 1);
        if (is_cond[p] && ((dims_[p] - 1) & 1)) parity ^= 1;
        digit[q] = 0;
      }
    }
  }

  // One target site: index = outer * (st * d) + digit * st + inner, with
  // condition parities tabulated separately over outer and inner.
  void apply_single(const Factor& f, int p, const std::vector<int>& cpos, const std::vector<std::size_t>& st,
                    std::vector<cplx>& v) const {
    const int d = dims_[p];
    if (f.plus.rows() != d || f.minus.rows() != d) throw std::invalid_argument("factor matrix size mismatch");
    const std::size_t s = st[p];
    const std::size_t block = s * static_cast<std::size_t>(d);
    const std::size_t nout = v.size() / block;
    std::vector<char> pin(s, 0), pout(nout, 0);
    for (int c : cpos) {
      if (st[c] < s) {
        for (std::size_t j = 0; j < s; ++j) pin[j] ^= static_cast<char>((j / st[c]) & 1);
      } else {
        std::size_t q = st[c] / block;
        for (std::size_t o = 0; o < nout; ++o) pout[o] ^= static_cast<char>((o / q) & 1);
      }
    }
    const bool dp = is_diagonal(f.plus), dm = is_diagonal(f.minus);
    std::vector<cplx> mp(f.plus.data(), f.plus.data() + d * d), mm(f.minus.data(), f.minus.data() + d * d);
    std::vector<cplx> buf(d);
    auto run = [&](cplx* base, const cplx* m, bool diag) {  // m column-major
      if (diag) {
        for (int b = 0; b < d; ++b) base[b * s] *= m[b * d + b];
        return;
      }
      for (int b = 0; b < d; ++b) buf[b] = base[b * s];
      for (int r = 0; r < d; ++r) {
        cplx acc{};
        for (int c = 0; c < d; ++c) acc += m[c * d + r] * buf[c];
        base[r * s] = acc;
      }
    };
    const bool any_cond = !cpos.empty();
    for (std::size_t o = 0; o < nout; ++o) {
      cplx* base = v.data() + o * block;
      if (!any_cond) {
        for (std::size_t j = 0; j < s; ++j) run(base + j, mp.data(), dp);
        continue;
      }
      for (std::size_t j = 0; j < s; ++j) {
        const bool odd = pout[o] ^ pin[j];
        run(base + j, odd ? mm.data() : mp.data(), odd ? dm : dp);
      }
    }
  }

  static bool is_diagonal(const Mat& m) {
    for (int r = 0; r < m.rows(); ++r) {
      for (int c = 0; c < m.cols(); ++c) {
        if (r != c && std::abs(m(r, c)) > 0) return false;
      }
    }
    return true;
  }

  std::size_t budget_;
  std::vector<cplx> amp_;
  std::vector<SiteKey> keys_;
  std::vector<int> dims_;
};

}  // namespace s3q
