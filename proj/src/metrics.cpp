#include "proce/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "proce/error.hpp"

namespace proce {

namespace {

// Continued-fraction machinery for the regularized incomplete beta.
constexpr int kBetaMaxIterations = 2000;
constexpr double kBetaEps = 1e-14;
constexpr double kBetaFpMin = 1e-300;

double gammln(double xx) {
  // Lanczos approximation.
  static const double cof[6] = {76.18009172947146,     -86.50532032941677,
                                24.01409824083091,     -1.231739572450155,
                                0.1208650973866179e-2, -0.5395239384953e-5};
  double x = xx;
  double y = xx;
  double tmp = x + 5.5;
  tmp -= (x + 0.5) * std::log(tmp);
  double ser = 1.000000000190015;
  for (int j = 0; j < 6; ++j) ser += cof[j] / ++y;
  return -tmp + std::log(2.5066282746310005 * ser / x);
}

double betacf(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kBetaFpMin) d = kBetaFpMin;
  d = 1.0 / d;
  double h = d;
  int m = 1;
  for (; m <= kBetaMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kBetaFpMin) d = kBetaFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kBetaFpMin) c = kBetaFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kBetaFpMin) d = kBetaFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kBetaFpMin) c = kBetaFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kBetaEps) break;
  }
  if (m > kBetaMaxIterations) {
    throw DomainError("incomplete beta continued fraction did not converge");
  }
  return h;
}

double instance_norm_squared(const std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x * x;
  return total;
}

void require_pairs(const std::vector<EvalSample>& samples) {
  if (samples.empty()) throw UsageError("metric over an empty batch");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x < 0.0 || x > 1.0) {
    throw DomainError("incomplete beta needs x in [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double bt = std::exp(gammln(a + b) - gammln(a) - gammln(b) +
                             a * std::log(x) + b * std::log(1.0 - x));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * betacf(a, b, x) / a;
  }
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw DomainError("degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

TTestResult paired_t_test(const std::vector<double>& a,
                          const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw UsageError("paired test needs equal-length samples");
  }
  const std::size_t n = a.size();
  if (n < 2) throw UsageError("paired test needs at least two pairs");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  TTestResult result;
  result.df = static_cast<double>(n - 1);
  const double sd = std::sqrt(ss / result.df);
  if (sd == 0.0) {
    // All differences identical: the statistic is undefined; report the
    // certain outcome instead.
    result.degenerate = true;
    if (mean == 0.0) {
      result.t = 0.0;
      result.p = 1.0;
    } else {
      result.t = mean > 0.0 ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
      result.p = 0.0;
    }
    return result;
  }
  result.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  result.p = student_t_two_sided_p(result.t, result.df);
  return result;
}

void validate_constraints(const std::vector<ConstraintSpec>& constraints,
                          const FeatureSchema& schema) {
  for (const ConstraintSpec& c : constraints) {
    if (c.kind == ConstraintSpec::Kind::kNondecreasing) {
      schema.index_of(c.feature);  // throws when absent
    } else {
      if (c.sources.empty()) {
        throw ConfigError("proportional constraint needs source features");
      }
      std::set<std::string> seen;
      for (const std::string& s : c.sources) {
        schema.index_of(s);
        if (!seen.insert(s).second) {
          throw ConfigError("duplicate source feature '" + s +
                            "' in proportional constraint");
        }
      }
      schema.index_of(c.target);
      if (seen.count(c.target) > 0) {
        throw ConfigError("proportional target '" + c.target +
                          "' also listed as a source");
      }
    }
  }
}

EvalSample to_eval_sample(const ExplanationReport& report) {
  EvalSample s;
  s.x_org = report.x_org_norm;
  s.x_cf = report.x_cf_norm;
  s.y_org = report.y_org;
  s.y_cf = report.y_cf;
  s.runtime_seconds = report.runtime_seconds;
  return s;
}

double target_class_validity(const std::vector<EvalSample>& samples,
                             const Classifier& clf) {
  require_pairs(samples);
  std::size_t hits = 0;
  for (const EvalSample& s : samples) {
    hits += clf.predict_class(s.x_cf) == s.y_cf ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

bool check_proportional(const FeatureSchema& schema, const Instance& x_org,
                        const Instance& x_cf,
                        const std::vector<std::string>& sources,
                        const std::string& target, double tol) {
  double s = 0.0;
  for (const std::string& src : sources) {
    const std::size_t idx = schema.index_of(src);
    s += x_cf[idx] - x_org[idx];
  }
  const std::size_t target_idx = schema.index_of(target);
  const double t = x_cf[target_idx] - x_org[target_idx];
  if (std::abs(s) <= tol) return true;  // sources did not move
  if (std::abs(t) <= tol) return true;  // target held still: no reversal
  return s * t > 0.0;                   // both moved: must share direction
}

bool satisfies_constraints(const FeatureSchema& schema, const Instance& x_org,
                           const Instance& x_cf,
                           const std::vector<ConstraintSpec>& constraints) {
  for (const ConstraintSpec& c : constraints) {
    if (c.kind == ConstraintSpec::Kind::kNondecreasing) {
      const std::size_t idx = schema.index_of(c.feature);
      if (x_cf[idx] < x_org[idx]) return false;
    } else if (!check_proportional(schema, x_org, x_cf, c.sources, c.target)) {
      return false;
    }
  }
  return true;
}

double causal_constraint_validity(
    const std::vector<EvalSample>& samples, const FeatureSchema& schema,
    const std::vector<ConstraintSpec>& constraints) {
  require_pairs(samples);
  validate_constraints(constraints, schema);
  std::size_t satisfied = 0;
  for (const EvalSample& s : samples) {
    satisfied +=
        satisfies_constraints(schema, s.x_org, s.x_cf, constraints) ? 1 : 0;
  }
  return static_cast<double>(satisfied) / static_cast<double>(samples.size());
}

double categorical_proximity(const std::vector<EvalSample>& samples,
                             const FeatureSchema& schema) {
  require_pairs(samples);
  double total = 0.0;
  for (const EvalSample& s : samples) {
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (schema.at(i).kind != FeatureKind::kCategorical) continue;
      if (s.x_cf[i] == s.x_org[i]) total += 1.0;
    }
  }
  return total / static_cast<double>(samples.size());
}

double continuous_proximity(const std::vector<EvalSample>& samples,
                            const FeatureSchema& schema) {
  require_pairs(samples);
  double total = 0.0;
  for (const EvalSample& s : samples) {
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (schema.at(i).kind != FeatureKind::kContinuous) continue;
      const double d = s.x_cf[i] - s.x_org[i];
      total += d * d;
    }
  }
  return -total / static_cast<double>(samples.size());
}

double im1(const Autoencoder& ae_cf, const Autoencoder& ae_org,
           const FeatureSchema& schema, const Instance& x_cf, double epsilon) {
  if (ae_cf.encoder.layers.empty() || ae_org.encoder.layers.empty()) {
    throw UsageError("im1 needs trained autoencoders");
  }
  const double num = reconstruction_error(ae_cf, schema, x_cf);
  const double den = reconstruction_error(ae_org, schema, x_cf) + epsilon;
  return num / den;
}

double im2(const Autoencoder& ae_cf, const Autoencoder& ae_full,
           const FeatureSchema& schema, const Instance& x_cf, double epsilon) {
  if (ae_cf.encoder.layers.empty() || ae_full.encoder.layers.empty()) {
    throw UsageError("im2 needs trained autoencoders");
  }
  const std::vector<double> recon_cf = reconstruct(ae_cf, schema, x_cf);
  const std::vector<double> recon_full = reconstruct(ae_full, schema, x_cf);
  if (recon_cf.size() != recon_full.size()) {
    throw ShapeError("autoencoders disagree on the embedded width");
  }
  double num = 0.0;
  for (std::size_t i = 0; i < recon_cf.size(); ++i) {
    const double d = recon_cf[i] - recon_full[i];
    num += d * d;
  }
  const double den =
      instance_norm_squared(embed_instance(ae_cf, schema, x_cf)) + epsilon;
  return num / den;
}

MetricsReport compute_metrics(const std::vector<EvalSample>& samples,
                              const Classifier& clf,
                              const AutoencoderTriple& autoencoders,
                              const FeatureSchema& schema,
                              const std::vector<ConstraintSpec>& constraints,
                              double epsilon) {
  require_pairs(samples);
  validate_constraints(constraints, schema);
  MetricsReport report;
  report.n = samples.size();
  report.epsilon = epsilon;
  for (const EvalSample& s : samples) {
    report.tcv_per_sample.push_back(
        clf.predict_class(s.x_cf) == s.y_cf ? 1.0 : 0.0);
    report.ccv_per_sample.push_back(
        satisfies_constraints(schema, s.x_org, s.x_cf, constraints) ? 1.0
                                                                    : 0.0);
    double matches = 0.0;
    double con = 0.0;
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (schema.at(i).kind == FeatureKind::kCategorical) {
        if (s.x_cf[i] == s.x_org[i]) matches += 1.0;
      } else {
        const double d = s.x_cf[i] - s.x_org[i];
        con += d * d;
      }
    }
    report.cat_per_sample.push_back(matches);
    report.con_per_sample.push_back(-con);
    report.im1_per_sample.push_back(
        im1(autoencoders.for_class(s.y_cf), autoencoders.for_class(s.y_org),
            schema, s.x_cf, epsilon));
    report.im2_per_sample.push_back(im2(autoencoders.for_class(s.y_cf),
                                        autoencoders.full, schema, s.x_cf,
                                        epsilon));
    report.runtime_per_sample.push_back(s.runtime_seconds);
  }
  auto mean = [](const std::vector<double>& v) {
    double total = 0.0;
    for (double x : v) total += x;
    return total / static_cast<double>(v.size());
  };
  report.tcv = mean(report.tcv_per_sample);
  report.ccv = mean(report.ccv_per_sample);
  report.cat_prox = mean(report.cat_per_sample);
  report.con_prox = mean(report.con_per_sample);
  report.im1 = mean(report.im1_per_sample);
  report.im2 = mean(report.im2_per_sample);
  report.im2_x10 = report.im2 * 10.0;
  report.runtime_seconds = mean(report.runtime_per_sample);
  return report;
}

}  // namespace proce
