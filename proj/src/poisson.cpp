#include "r1lab/poisson.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "r1lab/errors.hpp"

namespace r1lab {

ExactProb ExactProb::constant(const Rat& c) {
  ExactProb p;
  p.add_term(c, Rat(0));
  return p;
}

ExactProb ExactProb::exp_term(const Rat& coeff, const Rat& exponent) {
  ExactProb p;
  p.add_term(coeff, exponent);
  return p;
}

void ExactProb::add_term(const Rat& coeff, const Rat& exponent) {
  if (coeff == 0) return;
  if (exponent < 0) throw ConfigInvalid("ExactProb exponent must be >= 0");
  auto [it, inserted] = terms_.emplace(exponent, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0) terms_.erase(it);
  }
}

ExactProb ExactProb::operator+(const ExactProb& other) const {
  ExactProb out = *this;
  for (const auto& [e, c] : other.terms_) out.add_term(c, e);
  return out;
}

ExactProb ExactProb::operator-(const ExactProb& other) const {
  ExactProb out = *this;
  for (const auto& [e, c] : other.terms_) out.add_term(-c, e);
  return out;
}

ExactProb ExactProb::operator*(const ExactProb& other) const {
  ExactProb out;
  for (const auto& [e1, c1] : terms_) {
    for (const auto& [e2, c2] : other.terms_) out.add_term(c1 * c2, e1 + e2);
  }
  return out;
}

ExactProb ExactProb::scaled(const Rat& c) const {
  ExactProb out;
  if (c == 0) return out;
  for (const auto& [e, k] : terms_) out.add_term(k * c, e);
  return out;
}

namespace {

// Directed-rounding evaluation: accumulates sum coeff*e^{-exp} rounded
// toward -inf (down=true) or +inf.
void eval_directed(const std::map<Rat, Rat>& terms, mpfr_prec_t prec,
                   bool down, mpfr_t out) {
  mpfr_set_prec(out, prec);
  mpfr_set_zero(out, 1);
  mpfr_t x, e;
  mpfr_init2(x, prec);
  mpfr_init2(e, prec);
  const mpfr_rnd_t rnd = down ? MPFR_RNDD : MPFR_RNDU;
  const mpfr_rnd_t anti = down ? MPFR_RNDU : MPFR_RNDD;
  for (const auto& [expo, coeff] : terms) {
    const bool pos = coeff > 0;
    // e^{-s} monotone decreasing in s: to round the product toward `rnd`,
    // round the exponent the opposite way when the coefficient is positive.
    mpfr_set_q(e, expo.get_mpq_t(), pos ? anti : rnd);
    mpfr_neg(e, e, MPFR_RNDN);
    mpfr_exp(e, e, pos ? rnd : anti);
    mpfr_set_q(x, coeff.get_mpq_t(), rnd);
    mpfr_mul(x, x, e, rnd);
    mpfr_add(out, out, x, rnd);
  }
  mpfr_clear(x);
  mpfr_clear(e);
}

}  // namespace

int ExactProb::sign() const {
  if (terms_.empty()) return 0;
  mpfr_t lo, hi;
  mpfr_init2(lo, 64);
  mpfr_init2(hi, 64);
  int result = 0;
  for (mpfr_prec_t prec = 128; prec <= 1 << 16; prec *= 2) {
    eval_directed(terms_, prec, true, lo);
    eval_directed(terms_, prec, false, hi);
    if (mpfr_sgn(lo) > 0) {
      result = 1;
      break;
    }
    if (mpfr_sgn(hi) < 0) {
      result = -1;
      break;
    }
    // A nonempty merged term list has a nonzero transcendental value, so the
    // interval eventually separates from zero.
  }
  mpfr_clear(lo);
  mpfr_clear(hi);
  if (result == 0) throw Error("sign(): interval refinement exhausted");
  return result;
}

double ExactProb::to_double() const {
  if (terms_.empty()) return 0.0;
  mpfr_t v;
  mpfr_init2(v, 256);
  eval_directed(terms_, 256, true, v);
  double d = mpfr_get_d(v, MPFR_RNDN);
  mpfr_clear(v);
  return d;
}

std::string to_float(const ExactProb& p, int digits) {
  if (digits < 1) throw ConfigInvalid("precision must be >= 1 digit");
  if (p.is_zero()) {
    std::string s = "0.";
    s.append(static_cast<size_t>(digits), '0');
    return s;
  }
  mpfr_t lo, hi;
  mpfr_init2(lo, 64);
  mpfr_init2(hi, 64);
  std::string out;
  char fmt[32];
  std::snprintf(fmt, sizeof(fmt), "%%.%dRNf", digits);
  for (mpfr_prec_t prec = 128; prec <= 1 << 18; prec *= 2) {
    eval_directed(p.terms(), prec, true, lo);
    eval_directed(p.terms(), prec, false, hi);
    char blo[512], bhi[512];
    mpfr_snprintf(blo, sizeof(blo), fmt, lo);
    mpfr_snprintf(bhi, sizeof(bhi), fmt, hi);
    if (std::string(blo) == std::string(bhi)) {
      out = blo;
      break;
    }
  }
  mpfr_clear(lo);
  mpfr_clear(hi);
  if (out.empty()) throw Error("to_float(): rounding did not stabilize");
  return out;
}

namespace {

struct Atom {
  Rat mu;
  unsigned mask;  // constraint-set membership bits
};

}  // namespace

ExactProb cylinder_prob(const CylinderEvent& event, const TowerSchedule& s,
                        int count_cap) {
  if (event.constraints.empty()) {
    throw ConfigInvalid("cylinder event needs at least one constraint");
  }
  if (event.constraints.size() > 16) {
    throw ConfigInvalid("too many cylinder constraints");
  }
  for (const CylinderConstraint& c : event.constraints) {
    if (c.count < 0) throw ConfigInvalid("negative cylinder count");
    if (c.count > count_cap) {
      throw CountTooLarge("cylinder count " + std::to_string(c.count) +
                          " exceeds cap " + std::to_string(count_cap));
    }
  }
  const size_t m = event.constraints.size();

  // Venn atoms of the constraint sets, each carrying an independent Poisson
  // count with mean = atom measure.
  FloorSet uni = event.constraints[0].set;
  for (size_t i = 1; i < m; ++i) uni = unite(uni, event.constraints[i].set, s);
  const Rat total_mu = measure(uni, s);

  std::vector<Atom> atoms;
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    FloorSet cell = uni;
    for (size_t i = 0; i < m; ++i) {
      if (mask & (1u << i)) cell = intersect(cell, event.constraints[i].set, s);
      else cell = difference(cell, event.constraints[i].set, s);
      if (cell.empty()) break;
    }
    if (cell.empty()) continue;
    atoms.push_back(Atom{measure(cell, s), mask});
  }

  // Enumerate atom count vectors consistent with every constraint.
  std::vector<int> caps(atoms.size(), 0);
  for (size_t a = 0; a < atoms.size(); ++a) {
    int cap = count_cap;
    for (size_t i = 0; i < m; ++i) {
      if (atoms[a].mask & (1u << i)) {
        cap = std::min(cap, event.constraints[i].count);
      }
    }
    caps[a] = cap;
  }
  Rat coeff_sum(0);
  std::vector<int> counts(atoms.size(), 0);
  std::vector<int> remaining(m);
  auto feasible = [&](size_t next) {
    // remaining demand per constraint must still be achievable
    for (size_t i = 0; i < m; ++i) {
      if (remaining[i] < 0) return false;
    }
    if (next == atoms.size()) {
      for (size_t i = 0; i < m; ++i) {
        if (remaining[i] != 0) return false;
      }
    }
    return true;
  };
  std::function<void(size_t, Rat)> dfs = [&](size_t a, Rat coeff) {
    if (!feasible(a)) return;
    if (a == atoms.size()) {
      coeff_sum += coeff;
      return;
    }
    Rat pow(1);
    Int fact(1);
    for (int k = 0; k <= caps[a]; ++k) {
      if (k > 0) {
        pow *= atoms[a].mu;
        fact *= k;
        for (size_t i = 0; i < m; ++i) {
          if (atoms[a].mask & (1u << i)) --remaining[i];
        }
      }
      dfs(a + 1, coeff * pow / Rat(fact));
    }
    for (size_t i = 0; i < m; ++i) {
      if (atoms[a].mask & (1u << i)) remaining[i] += caps[a];
    }
  };
  for (size_t i = 0; i < m; ++i) remaining[i] = event.constraints[i].count;
  dfs(0, Rat(1));

  ExactProb out;
  out.add_term(coeff_sum, total_mu);
  return out;
}

ExactProb suspension_correlation(const FloorSet& a, const Int& p_shift,
                                 const Int& q_shift,
                                 const ConjugationPlan& plan) {
  const TowerSchedule& s = *plan.schedule;
  FloorSet sa = shift(a, p_shift, s);
  FloorSet ta = t_power(a, q_shift, plan);
  return ExactProb::exp_term(Rat(1), measure(unite(sa, ta, s), s));
}

ExactProb nonrecurrence_prob(const FloorSet& e, const FloorSet& re,
                             const FloorSet& conj_e, const FloorSet& conj_re,
                             const TowerSchedule& s) {
  CylinderEvent event;
  event.constraints = {{re, 0}, {e, 1}, {conj_e, 0}, {conj_re, 1}};
  return cylinder_prob(event, s);
}

namespace {

// Deterministic uniform value in [0, n) built from 64-bit draws.
Int uniform_below(const Int& n, std::mt19937_64* rng) {
  const size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
  while (true) {
    Int v(0);
    size_t produced = 0;
    while (produced < bits) {
      v <<= 32;
      v += static_cast<unsigned long>((*rng)() & 0xffffffffull);
      produced += 32;
    }
    v >>= (produced - bits);
    if (v < n) return v;
  }
}

// Knuth product-of-uniforms sampler; exact enough for desk-scale means.
int poisson_draw(double mean, std::mt19937_64* rng) {
  if (mean <= 0) return 0;
  if (mean > 600) throw ConfigInvalid("mc_oracle mean too large");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double limit = std::exp(-mean);
  double prod = 1.0;
  int k = 0;
  while (true) {
    prod *= unif(*rng);
    if (prod <= limit) return k;
    ++k;
  }
}

}  // namespace

McResult mc_oracle(const CylinderEvent& event, const TowerSchedule& s,
                   std::int64_t samples, std::uint64_t seed) {
  if (samples < 1000) throw ConfigInvalid("mc_oracle needs >= 1000 samples");
  if (event.constraints.empty()) {
    throw ConfigInvalid("cylinder event needs at least one constraint");
  }
  // Points outside the union of constraint sets cannot change any count,
  // so the process is sampled on the union only.
  FloorSet uni = event.constraints[0].set;
  for (size_t i = 1; i < event.constraints.size(); ++i) {
    uni = unite(uni, event.constraints[i].set, s);
  }
  std::vector<FloorSet> lifted;
  lifted.reserve(event.constraints.size());
  for (const CylinderConstraint& c : event.constraints) {
    lifted.push_back(lift(c.set, s, uni.stage));
  }
  const Int total_len = uni.total_length();
  const double mean = measure(uni, s).get_d();

  // Cumulative run lengths for uniform placement.
  std::vector<Int> cum{Int(0)};
  for (const Run& r : uni.runs) {
    Int next = cum.back() + (r.hi - r.lo);
    cum.push_back(std::move(next));
  }

  auto index_of = [&](const Int& offset) -> Int {
    size_t lo = 0, hi = uni.runs.size();
    while (hi - lo > 1) {
      size_t mid = (lo + hi) / 2;
      if (cum[mid] <= offset) lo = mid;
      else hi = mid;
    }
    return uni.runs[lo].lo + (offset - cum[lo]);
  };
  auto contains = [](const FloorSet& f, const Int& idx) {
    auto it = std::upper_bound(
        f.runs.begin(), f.runs.end(), idx,
        [](const Int& v, const Run& r) { return v < r.lo; });
    if (it == f.runs.begin()) return false;
    --it;
    return idx < it->hi;
  };

  std::mt19937_64 rng(seed);
  std::int64_t hits = 0;
  std::vector<int> counts(event.constraints.size());
  for (std::int64_t it = 0; it < samples; ++it) {
    int n_points = total_len == 0 ? 0 : poisson_draw(mean, &rng);
    std::fill(counts.begin(), counts.end(), 0);
    for (int pt = 0; pt < n_points; ++pt) {
      Int idx = index_of(uniform_below(total_len, &rng));
      for (size_t i = 0; i < lifted.size(); ++i) {
        if (contains(lifted[i], idx)) ++counts[i];
      }
    }
    bool ok = true;
    for (size_t i = 0; i < event.constraints.size(); ++i) {
      if (counts[i] != event.constraints[i].count) {
        ok = false;
        break;
      }
    }
    if (ok) ++hits;
  }
  McResult res;
  res.hits = hits;
  res.samples = samples;
  res.estimate = static_cast<double>(hits) / static_cast<double>(samples);
  res.stderr_est =
      std::sqrt(res.estimate * (1.0 - res.estimate) /
                static_cast<double>(samples));
  return res;
}

}  // namespace r1lab
