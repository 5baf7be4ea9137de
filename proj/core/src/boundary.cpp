#include "segrex/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "segrex/errors.hpp"

namespace segrex {

namespace {

// A zero gap between two support arcs may span a few samples when the
// traces touch zero at higher order; wider gaps mean sum phi vanishes on an arc.
constexpr std::size_t kMaxZeroRun = 3;

struct SupportAnalysis {
  std::vector<Violation> violations;
  std::array<double, kSpecies> endpoints{};
};

std::string species_name(int i) { return "phi_" + std::to_string(i + 1); }

SupportAnalysis analyze(const BoundaryDatum& datum) {
  SupportAnalysis out;
  const std::size_t m = datum.m();
  const double h = kTwoPi / static_cast<double>(m);
  const double tol = kZeroRelTol * datum.max_abs();

  auto prev = [m](std::size_t k) { return (k + m - 1) % m; };
  auto next = [m](std::size_t k) { return (k + 1) % m; };

  std::array<std::vector<char>, kSpecies> positive;
  for (int i = 0; i < kSpecies; ++i) {
    const auto& tr = datum.trace(i);
    positive[i].assign(m, 0);
    std::size_t neg_start = 0;
    std::size_t neg_count = 0;
    double neg_min = 0.0;
    for (std::size_t k = 0; k <= m; ++k) {
      const bool neg = k < m && tr[k] < -tol;
      if (k < m) positive[i][k] = tr[k] > tol ? 1 : 0;
      if (neg) {
        if (neg_count == 0) neg_start = k;
        ++neg_count;
        neg_min = std::min(neg_min, tr[k]);
      } else if (neg_count > 0) {
        std::ostringstream os;
        os << species_name(i) << " negative on " << neg_count << " sample(s), min " << neg_min;
        out.violations.push_back({"nonnegativity", tr.angle(neg_start), os.str()});
        neg_count = 0;
        neg_min = 0.0;
      }
    }
  }

  // Pairwise overlap, reported once per maximal run of overlapping samples.
  {
    std::size_t run_start = 0;
    std::size_t run_len = 0;
    int mask_union = 0;
    for (std::size_t k = 0; k <= m; ++k) {
      int mask = 0;
      int count = 0;
      if (k < m) {
        for (int i = 0; i < kSpecies; ++i) {
          if (positive[i][k]) {
            mask |= 1 << i;
            ++count;
          }
        }
      }
      if (count >= 2) {
        if (run_len == 0) run_start = k;
        ++run_len;
        mask_union |= mask;
      } else if (run_len > 0) {
        std::ostringstream os;
        os << "positive together:";
        for (int i = 0; i < kSpecies; ++i) {
          if (mask_union & (1 << i)) os << ' ' << species_name(i);
        }
        os << " on " << run_len << " sample(s)";
        out.violations.push_back({"disjoint-supports", datum.trace(0).angle(run_start), os.str()});
        run_len = 0;
        mask_union = 0;
      }
    }
  }

  // Each support must be one connected open arc.
  std::array<std::size_t, kSpecies> first{};
  std::array<std::size_t, kSpecies> last{};
  bool arcs_ok = true;
  for (int i = 0; i < kSpecies; ++i) {
    const auto& pos = positive[i];
    std::size_t starts = 0;
    std::size_t npos = 0;
    for (std::size_t k = 0; k < m; ++k) {
      npos += pos[k] ? 1u : 0u;
      if (pos[k] && !pos[prev(k)]) {
        ++starts;
        first[i] = k;
      }
      if (pos[k] && !pos[next(k)]) last[i] = k;
    }
    if (npos == 0) {
      out.violations.push_back({"support-arc", 0.0, species_name(i) + " has empty support"});
      arcs_ok = false;
    } else if (npos == m) {
      out.violations.push_back({"support-arc", 0.0, species_name(i) + " is positive on the whole circle"});
      arcs_ok = false;
    } else if (starts != 1) {
      out.violations.push_back({"support-arc", datum.trace(i).angle(first[i]),
                                species_name(i) + " support splits into " + std::to_string(starts) + " arcs"});
      arcs_ok = false;
    }
  }
  if (!out.violations.empty() || !arcs_ok) return out;

  // Anticlockwise order 1 -> 2 -> 3 -> 4 and isolated zeros between arcs.
  for (int i = 0; i < kSpecies; ++i) {
    std::size_t best_gap = m;
    int successor = -1;
    for (int j = 0; j < kSpecies; ++j) {
      if (j == i) continue;
      const std::size_t gap = (first[j] + m - last[i] - 1) % m;
      if (gap < best_gap) {
        best_gap = gap;
        successor = j;
      }
    }
    const int expected = (i + 1) % kSpecies;
    if (successor != expected) {
      out.violations.push_back({"arc-order", datum.trace(i).angle(last[i]),
                                species_name(i) + " is followed anticlockwise by " + species_name(successor) +
                                    " instead of " + species_name(expected)});
      continue;
    }
    if (best_gap > kMaxZeroRun) {
      const double mid = datum.trace(i).angle(last[i]) + h * (static_cast<double>(best_gap) + 1.0) / 2.0;
      out.violations.push_back({"isolated-zeros", wrap_angle(mid),
                                "sum of traces vanishes on " + std::to_string(best_gap) + " consecutive samples between " +
                                    species_name(i) + " and " + species_name(expected)});
      continue;
    }
    double angle = 0.0;
    const std::size_t e = last[i];
    const std::size_t s = first[expected];
    if (best_gap == 0) {
      const auto& a = datum.trace(i);
      const auto& b = datum.trace(expected);
      const double de = a[e] - b[e];
      const double ds = a[s] - b[s];
      const double t = de / (de - ds);
      angle = a.angle(e) + t * h;
    } else {
      angle = datum.trace(i).angle(e) + h * (static_cast<double>(best_gap) + 1.0) / 2.0;
    }
    out.endpoints[static_cast<std::size_t>(expected)] = wrap_angle(angle);
  }
  return out;
}

}  // namespace

double Arc::length() const {
  const double len = wrap_angle(end - start);
  return len;
}

bool Arc::contains(double theta) const {
  const double d = wrap_angle(theta - start);
  return d > 0.0 && d < length();
}

double Arc::midpoint() const { return wrap_angle(start + 0.5 * length()); }

BoundaryDatum::BoundaryDatum(std::array<TraceFunction, kSpecies> traces) : traces_(std::move(traces)) {
  for (const auto& t : traces_) {
    if (t.size() != traces_[0].size()) {
      throw std::invalid_argument("boundary traces have unequal sample counts");
    }
  }
}

TraceFunction BoundaryDatum::total() const {
  TraceFunction s = traces_[0];
  for (int i = 1; i < kSpecies; ++i) s += traces_[static_cast<std::size_t>(i)];
  return s;
}

double BoundaryDatum::max_abs() const {
  double r = 0.0;
  for (const auto& t : traces_) r = std::max(r, t.max_abs());
  return r;
}

AdmissibilityReport validate(const BoundaryDatum& datum) {
  AdmissibilityReport report;
  report.violations = analyze(datum).violations;
  report.admissible = report.violations.empty();
  return report;
}

void require_admissible(const BoundaryDatum& datum) {
  const auto report = validate(datum);
  if (!report.admissible) {
    const auto& v = report.violations.front();
    std::ostringstream os;
    os << "inadmissible boundary datum: " << v.rule << " at angle " << v.angle << " (" << v.detail << ")";
    if (report.violations.size() > 1) os << " and " << report.violations.size() - 1 << " more";
    throw DomainError(os.str());
  }
}

TraceFunction signed_trace(const BoundaryDatum& datum, const Signs& signs) {
  for (int s : signs) {
    if (s != 1 && s != -1) throw std::invalid_argument("signs must be +1 or -1");
  }
  std::vector<double> v(datum.m(), 0.0);
  for (std::size_t k = 0; k < v.size(); ++k) {
    double acc = 0.0;
    for (int i = 0; i < kSpecies; ++i) acc += signs[static_cast<std::size_t>(i)] * datum.trace(i)[k];
    v[k] = acc;
  }
  return TraceFunction(std::move(v));
}

TraceFunction alternating_trace(const BoundaryDatum& datum) { return signed_trace(datum, kAlternatingSigns); }

std::array<double, kSpecies> endpoints(const BoundaryDatum& datum) {
  auto a = analyze(datum);
  if (!a.violations.empty()) require_admissible(datum);
  return a.endpoints;
}

std::array<Arc, kSpecies> support_arcs(const BoundaryDatum& datum) {
  const auto p = endpoints(datum);
  std::array<Arc, kSpecies> arcs;
  for (std::size_t i = 0; i < kSpecies; ++i) arcs[i] = {p[i], p[(i + 1) % kSpecies]};
  return arcs;
}

std::array<TraceFunction, kSpecies> quadrant_traces(const std::array<double, kSpecies>& c, std::size_t m) {
  if (m % 2 != 0) throw std::invalid_argument("sample count must be even");
  std::array<std::vector<double>, kSpecies> v;
  for (auto& x : v) x.assign(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const double th = TraceFunction::grid_angle(k, m);
    std::size_t q = 0;
    bool on_axis = false;
    if (m % 4 == 0) {
      q = 4 * k / m;
      on_axis = (4 * k) % m == 0;
    } else {
      q = std::min<std::size_t>(3, static_cast<std::size_t>(th / (kPi / 2.0)));
    }
    v[q][k] = on_axis ? 0.0 : c[q] * std::abs(std::cos(th) * std::sin(th));
  }
  return {TraceFunction(std::move(v[0])), TraceFunction(std::move(v[1])), TraceFunction(std::move(v[2])),
          TraceFunction(std::move(v[3]))};
}

BoundaryDatum make_quadrant_datum(const std::array<double, kSpecies>& c, std::size_t m) {
  for (int i = 0; i < kSpecies; ++i) {
    if (!(c[static_cast<std::size_t>(i)] >= 0.0)) {
      throw DomainError("quadrant coefficient c" + std::to_string(i + 1) + " must be nonnegative");
    }
  }
  return BoundaryDatum(quadrant_traces(c, m));
}

double TrigPolynomial::operator()(double theta) const {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * std::cos(static_cast<double>(k) * theta);
  for (std::size_t k = 0; k < b.size(); ++k) s += b[k] * std::sin(static_cast<double>(k + 1) * theta);
  return s;
}

PolynomialDatum make_polynomial_datum(const TrigPolynomial& poly, std::size_t m) {
  const auto f = TraceFunction::sample(m, poly);
  const double tol = kZeroRelTol * f.max_abs();
  auto sgn = [tol](double v) { return v > tol ? 1 : (v < -tol ? -1 : 0); };

  std::vector<std::size_t> nonzero;
  for (std::size_t k = 0; k < m; ++k) {
    if (sgn(f[k]) != 0) nonzero.push_back(k);
  }
  std::size_t changes = 0;
  for (std::size_t j = 0; j < nonzero.size(); ++j) {
    const std::size_t a = nonzero[j];
    const std::size_t b = nonzero[(j + 1) % nonzero.size()];
    if (sgn(f[a]) != sgn(f[b])) ++changes;
  }
  if (changes != 4) {
    throw DomainError("trigonometric trace has " + std::to_string(changes) + " sign changes, an admissible datum needs 4");
  }

  // Label the nonzero samples by run, starting just after a sign change.
  std::size_t j0 = 0;
  while (sgn(f[nonzero[j0]]) == sgn(f[nonzero[(j0 + nonzero.size() - 1) % nonzero.size()]])) ++j0;
  std::vector<int> label(m, -1);
  std::array<int, kSpecies> run_sign{};
  int run = 0;
  for (std::size_t j = 0; j < nonzero.size(); ++j) {
    const std::size_t idx = nonzero[(j0 + j) % nonzero.size()];
    if (j > 0 && sgn(f[idx]) != sgn(f[nonzero[(j0 + j - 1) % nonzero.size()]])) ++run;
    label[idx] = run;
    run_sign[static_cast<std::size_t>(run)] = sgn(f[idx]);
  }

  // Samples within the zero tolerance join a neighbouring run.
  for (std::size_t k = 0; k < m; ++k) {
    if (label[k] >= 0) continue;
    std::size_t p = k;
    while (label[p] < 0 || sgn(f[p]) == 0) p = (p + m - 1) % m;
    std::size_t n = k;
    while (label[n] < 0 || sgn(f[n]) == 0) n = (n + 1) % m;
    const int lp = label[p];
    const int ln = label[n];
    const double raw = f[k];
    if (lp != ln && raw != 0.0 && (raw > 0.0 ? 1 : -1) == run_sign[static_cast<std::size_t>(ln)]) {
      label[k] = ln;
    } else {
      label[k] = lp;
    }
  }

  // Species 1 is the run whose first sample comes earliest in [0, 2pi).
  std::array<std::size_t, kSpecies> run_start{};
  for (std::size_t k = 0; k < m; ++k) {
    if (label[k] != label[(k + m - 1) % m]) run_start[static_cast<std::size_t>(label[k])] = k;
  }
  std::array<int, kSpecies> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return run_start[static_cast<std::size_t>(x)] < run_start[static_cast<std::size_t>(y)]; });
  std::array<int, kSpecies> species_of_run{};
  for (int s = 0; s < kSpecies; ++s) species_of_run[static_cast<std::size_t>(order[static_cast<std::size_t>(s)])] = s;

  std::array<std::vector<double>, kSpecies> v;
  for (auto& x : v) x.assign(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    v[static_cast<std::size_t>(species_of_run[static_cast<std::size_t>(label[k])])][k] = std::abs(f[k]);
  }
  PolynomialDatum out{BoundaryDatum({TraceFunction(std::move(v[0])), TraceFunction(std::move(v[1])),
                                     TraceFunction(std::move(v[2])), TraceFunction(std::move(v[3]))}),
                      run_sign[static_cast<std::size_t>(order[0])]};
  return out;
}

}  // namespace segrex
