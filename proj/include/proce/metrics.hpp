#pragma once

#include <string>
#include <vector>

#include "proce/data.hpp"
#include "proce/engine.hpp"
#include "proce/models.hpp"

namespace proce {

// Plausibility constraint checked pairwise on (x_org, x_cf).
struct ConstraintSpec {
  enum class Kind {
    kNondecreasing,  // feature must not shrink
    kProportional,   // sources' total change and target's change share sign
  };
  Kind kind = Kind::kNondecreasing;
  std::string feature;               // nondecreasing
  std::vector<std::string> sources;  // proportional
  std::string target;                // proportional
};

void validate_constraints(const std::vector<ConstraintSpec>& constraints,
                          const FeatureSchema& schema);

// One scored explanation, in normalized space.
struct EvalSample {
  Instance x_org;
  Instance x_cf;
  int y_org = 0;
  int y_cf = 1;
  double runtime_seconds = 0.0;
};

EvalSample to_eval_sample(const ExplanationReport& report);

inline constexpr double kMetricEpsilon = 1e-8;
inline constexpr double kProportionalTolerance = 1e-9;

// Fraction of samples the classifier assigns to their target class.
double target_class_validity(const std::vector<EvalSample>& samples,
                             const Classifier& clf);

// The "sources vary together with target" predicate: violated only when the
// sources' summed change and the target's change are both larger than `tol`
// in magnitude yet do not share a positive sign product.
bool check_proportional(const FeatureSchema& schema, const Instance& x_org,
                        const Instance& x_cf,
                        const std::vector<std::string>& sources,
                        const std::string& target,
                        double tol = kProportionalTolerance);

bool satisfies_constraints(const FeatureSchema& schema, const Instance& x_org,
                           const Instance& x_cf,
                           const std::vector<ConstraintSpec>& constraints);

// Fraction of samples satisfying every constraint.
double causal_constraint_validity(
    const std::vector<EvalSample>& samples, const FeatureSchema& schema,
    const std::vector<ConstraintSpec>& constraints);

// Mean count of categorical features left unchanged, per sample.
double categorical_proximity(const std::vector<EvalSample>& samples,
                             const FeatureSchema& schema);

// Negated mean total squared change over continuous features (<= 0).
double continuous_proximity(const std::vector<EvalSample>& samples,
                            const FeatureSchema& schema);

// Ratio of the counterfactual-class autoencoder's reconstruction error on
// x_cf to the origin-class autoencoder's (small = x_cf sits on the target
// class manifold).
double im1(const Autoencoder& ae_cf, const Autoencoder& ae_org,
           const FeatureSchema& schema, const Instance& x_cf,
           double epsilon = kMetricEpsilon);

// Squared gap between the class-conditional and full-data reconstructions of
// x_cf, scaled by x_cf's embedded magnitude. Both reconstructions live in
// each autoencoder's own embedded space; with categorical features those
// spaces differ by their learned embeddings, so the gap is an approximation
// there (exact whenever every feature is continuous).
double im2(const Autoencoder& ae_cf, const Autoencoder& ae_full,
           const FeatureSchema& schema, const Instance& x_cf,
           double epsilon = kMetricEpsilon);

struct MetricsReport {
  std::size_t n = 0;
  double tcv = 0.0;
  double ccv = 0.0;
  double cat_prox = 0.0;
  double con_prox = 0.0;
  double im1 = 0.0;
  double im2 = 0.0;
  double im2_x10 = 0.0;  // table convention
  double runtime_seconds = 0.0;  // mean per explanation
  double epsilon = kMetricEpsilon;
  // Per-sample values backing paired significance tests.
  std::vector<double> tcv_per_sample;
  std::vector<double> ccv_per_sample;
  std::vector<double> cat_per_sample;
  std::vector<double> con_per_sample;
  std::vector<double> im1_per_sample;
  std::vector<double> im2_per_sample;
  std::vector<double> runtime_per_sample;
};

MetricsReport compute_metrics(const std::vector<EvalSample>& samples,
                              const Classifier& clf,
                              const AutoencoderTriple& autoencoders,
                              const FeatureSchema& schema,
                              const std::vector<ConstraintSpec>& constraints,
                              double epsilon = kMetricEpsilon);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  bool degenerate = false;  // zero variance of the differences
};

// Paired two-sided Student t-test over equal-length samples.
TTestResult paired_t_test(const std::vector<double>& a,
                          const std::vector<double>& b);

// Two-sided tail probability P(|T_df| >= |t|) via the regularized
// incomplete beta function.
double student_t_two_sided_p(double t, double df);

// Regularized incomplete beta I_x(a, b), exposed for verification.
double incomplete_beta(double a, double b, double x);

}  // namespace proce
