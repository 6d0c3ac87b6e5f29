#include "r1lab/sequences.hpp"

#include <sstream>

#include "r1lab/errors.hpp"

namespace r1lab {

Polynomial::Polynomial(std::vector<Rat> coeffs) : coeffs_(std::move(coeffs)) {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

Polynomial Polynomial::from_int_coeffs(const std::vector<long>& coeffs) {
  std::vector<Rat> cs;
  cs.reserve(coeffs.size());
  for (long c : coeffs) cs.emplace_back(c);
  return Polynomial(std::move(cs));
}

int Polynomial::degree() const {
  return coeffs_.empty() ? -1 : static_cast<int>(coeffs_.size()) - 1;
}

const Rat& Polynomial::leading() const {
  static const Rat zero(0);
  return coeffs_.empty() ? zero : coeffs_.back();
}

Rat Polynomial::eval(const Rat& x) const {
  Rat acc(0);
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    acc = acc * x + *it;
  }
  return acc;
}

Int Polynomial::eval_int(const Int& n) const {
  Rat v = eval(Rat(n));
  if (v.get_den() != 1) {
    throw Degenerate("polynomial value not an integer at n=" + n.get_str());
  }
  return v.get_num();
}

Polynomial Polynomial::shifted(long c) const {
  // Coefficients of f(x + c) via binomial expansion.
  const int d = degree();
  if (d < 0) return Polynomial();
  std::vector<Rat> out(static_cast<size_t>(d) + 1, Rat(0));
  for (int k = 0; k <= d; ++k) {
    // x^k -> sum_{i<=k} C(k,i) c^{k-i} x^i
    Int binom = 1;
    for (int i = k; i >= 0; --i) {
      Int cpow = 1;
      for (int t = 0; t < k - i; ++t) cpow *= c;
      out[static_cast<size_t>(i)] +=
          coeffs_[static_cast<size_t>(k)] * Rat(binom * cpow);
      binom = binom * i / (k - i + 1);
    }
  }
  return Polynomial(std::move(out));
}

Polynomial Polynomial::forward_difference() const { return shifted(1) - *this; }

Polynomial Polynomial::operator-(const Polynomial& other) const {
  std::vector<Rat> out(std::max(coeffs_.size(), other.coeffs_.size()), Rat(0));
  for (size_t i = 0; i < coeffs_.size(); ++i) out[i] += coeffs_[i];
  for (size_t i = 0; i < other.coeffs_.size(); ++i) out[i] -= other.coeffs_[i];
  return Polynomial(std::move(out));
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  std::vector<Rat> out(std::max(coeffs_.size(), other.coeffs_.size()), Rat(0));
  for (size_t i = 0; i < coeffs_.size(); ++i) out[i] += coeffs_[i];
  for (size_t i = 0; i < other.coeffs_.size(); ++i) out[i] += other.coeffs_[i];
  return Polynomial(std::move(out));
}

Polynomial Polynomial::with_constant_added(const Rat& c) const {
  std::vector<Rat> out = coeffs_;
  if (out.empty()) out.emplace_back(0);
  out[0] += c;
  return Polynomial(std::move(out));
}

bool Polynomial::all_coeffs_nonneg() const {
  for (const Rat& c : coeffs_) {
    if (c < 0) return false;
  }
  return true;
}

bool Polynomial::nondecreasing_on_nonneg() const {
  if (degree() <= 0) return true;
  return forward_difference().all_coeffs_nonneg();
}

std::string Polynomial::text() const {
  if (coeffs_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int k = degree(); k >= 0; --k) {
    const Rat& c = coeffs_[static_cast<size_t>(k)];
    if (c == 0) continue;
    if (!first) os << (c > 0 ? " + " : " - ");
    else if (c < 0) os << "-";
    Rat a = abs(c);
    if (k == 0 || a != 1) {
      os << a.get_num().get_str();
      if (a.get_den() != 1) os << "/" << a.get_den().get_str();
      if (k > 0) os << "*";
    }
    if (k == 1) os << "n";
    if (k > 1) os << "n^" << k;
    first = false;
  }
  return os.str();
}

namespace {

const Polynomial& pick(const SequencePair& s, bool use_q) {
  return use_q ? s.q : s.p;
}

}  // namespace

std::optional<Int> SequencePair::max_n_below(bool use_q, const Int& bound) const {
  const Polynomial& f = pick(*this, use_q);
  if (f.eval_int(1) >= bound) return std::nullopt;
  Int lo = 1, hi = 2;
  while (f.eval_int(hi) < bound) {
    lo = hi;
    hi *= 2;
  }
  // invariant: f(lo) < bound <= f(hi)
  while (hi - lo > 1) {
    Int mid = (lo + hi) / 2;
    if (f.eval_int(mid) < bound) lo = mid;
    else hi = mid;
  }
  return lo;
}

Int SequencePair::min_n_above(bool use_q, const Int& bound) const {
  const Polynomial& f = pick(*this, use_q);
  if (f.eval_int(1) > bound) return Int(1);
  Int lo = 1, hi = 2;
  while (f.eval_int(hi) <= bound) {
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    Int mid = (lo + hi) / 2;
    if (f.eval_int(mid) <= bound) lo = mid;
    else hi = mid;
  }
  return hi;
}

SequencePair make_squares_cubes() {
  return {Polynomial::from_int_coeffs({0, 0, 1}),
          Polynomial::from_int_coeffs({0, 0, 0, 1}), "n^2", "n^3"};
}

SequencePair make_squares_plus_linear() {
  return {Polynomial::from_int_coeffs({0, 0, 1}),
          Polynomial::from_int_coeffs({0, 1, 1}), "n^2", "n^2+n"};
}

SequencePair make_pair(Polynomial p, Polynomial q, std::string p_name,
                       std::string q_name) {
  return {std::move(p), std::move(q), std::move(p_name), std::move(q_name)};
}

GapReport gap_condition_check(const SequencePair& seq, long probe_max) {
  if (probe_max < 10) throw ConfigInvalid("probe_max must be >= 10");
  GapReport rep;
  auto symbolic = [](const Polynomial& f) {
    return f.degree() >= 2 && f.leading() > 0;
  };
  rep.p_symbolic_pass = symbolic(seq.p);
  rep.q_symbolic_pass = symbolic(seq.q);

  auto probe = [&](const Polynomial& f, const char* name, Int* min_tail) {
    Int prev = f.eval_int(1);
    Int min_gap_tail(-1);
    Int max_gap_head(0);
    for (long n = 2; n <= probe_max; ++n) {
      Int cur = f.eval_int(Int(n));
      Int gap = cur - prev;
      if (gap <= 0) {
        throw Degenerate(std::string(name) + " non-increasing at n=" +
                         std::to_string(n));
      }
      if (n <= probe_max / 2) {
        if (gap > max_gap_head) max_gap_head = gap;
      } else {
        if (min_gap_tail < 0 || gap < min_gap_tail) min_gap_tail = gap;
      }
      prev = cur;
    }
    *min_tail = min_gap_tail;
    // Increments over the tail half must strictly dominate the head half;
    // constant differences (e.g. 2n) fail here.
    return min_gap_tail > max_gap_head;
  };
  rep.p_probe_pass = probe(seq.p, "p", &rep.p_min_tail_gap);
  rep.q_probe_pass = probe(seq.q, "q", &rep.q_min_tail_gap);
  return rep;
}

}  // namespace r1lab
