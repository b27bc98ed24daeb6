#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "proce/causal.hpp"
#include "proce/data.hpp"
#include "proce/error.hpp"
#include "proce/models.hpp"
#include "proce/objectives.hpp"

using namespace proce;

namespace {

constexpr double kLn2 = 0.6931471805599453;

FeatureSchema scalar_schema() {
  FeatureSchema schema;
  schema.features = {
      Feature{"x", FeatureKind::kContinuous, {}, true, ConstraintKind::kNone}};
  return schema;
}

// Identity autoencoder over one continuous feature: embed(x) = encode(x) = x.
Autoencoder identity_ae() {
  Autoencoder ae;
  ae.embedding_dim = 1;
  ae.cat_embeddings.resize(1);
  DenseLayer eye;
  eye.weights = Matrix(1, 1);
  eye.weights.at(0, 0) = 1.0;
  eye.bias = {0.0};
  eye.activation = Activation::kIdentity;
  ae.encoder.layers = {eye};
  ae.decoder.layers = {eye};
  return ae;
}

// Classifier p = sigmoid(w*x + b) over the scalar schema.
Classifier linear_classifier(double w, double b) {
  Classifier clf;
  DenseLayer head;
  head.weights = Matrix(1, 1);
  head.weights.at(0, 0) = w;
  head.bias = {b};
  head.activation = Activation::kSigmoid;
  clf.net.layers = {head};
  return clf;
}

// Rows at given positions, with the given labels.
Dataset rows_at(const std::vector<std::pair<double, int>>& points) {
  Dataset data;
  data.schema = scalar_schema();
  for (const auto& [x, y] : points) {
    data.rows.push_back(Instance{{x}});
    data.labels.push_back(y);
  }
  return data;
}

}  // namespace

TEST_SUITE("objectives") {

TEST_CASE("knn picks the nearest opposite-class rows, ties by lowest index") {
  const Autoencoder ae = identity_ae();
  // Origin at 0, class 0. Same-class rows sit closest and must be skipped.
  const Dataset data = rows_at({
      {0.05, 0},   // row 0: nearest of all, wrong class
      {0.30, 1},   // row 1
      {-0.30, 1},  // row 2: exactly as far as row 1
      {0.10, 1},   // row 3: nearest opposite-class row
      {0.90, 1},   // row 4
  });
  const Instance x_org{{0.0}};

  const auto one = knn_counterfactual_class(data, ae, x_org, 0, 1);
  CHECK(one == std::vector<std::size_t>{3});

  // Rows 1 and 2 tie at distance 0.09; the lower index wins the last slot.
  const auto two = knn_counterfactual_class(data, ae, x_org, 0, 2);
  CHECK(two == std::vector<std::size_t>{3, 1});

  const auto all = knn_counterfactual_class(data, ae, x_org, 0, 4);
  CHECK(all == std::vector<std::size_t>{3, 1, 2, 4});

  CHECK_THROWS_AS(
      (void)knn_counterfactual_class(data, ae, x_org, 0, 5),  // only 4 exist
      proce::DataError);
  CHECK_THROWS_AS((void)knn_counterfactual_class(data, ae, x_org, 0, 0),
                  proce::UsageError);
}

TEST_CASE("knn honors a precomputed latent cache") {
  const Autoencoder ae = identity_ae();
  const Dataset data = rows_at({{0.2, 1}, {0.4, 1}});
  const Instance x_org{{0.0}};
  // Cache deliberately contradicts the rows: row 1 claims to sit at 0.01.
  const std::vector<std::vector<double>> cache = {{0.2}, {0.01}};
  const auto picked =
      knn_counterfactual_class(data, ae, x_org, 0, 1, &cache);
  CHECK(picked == std::vector<std::size_t>{1});

  const std::vector<std::vector<double>> short_cache = {{0.2}};
  CHECK_THROWS_AS((void)knn_counterfactual_class(data, ae, x_org, 0, 1,
                                                 &short_cache),
                  proce::UsageError);
}

TEST_CASE("prototype is the mean neighbor code") {
  const Autoencoder ae = identity_ae();
  const Dataset data = rows_at({{1.0, 1}, {2.0, 1}, {6.0, 1}});
  const auto proto = compute_prototype(data, ae, {0, 1, 2});
  REQUIRE(proto.size() == 1);
  CHECK(proto[0] == doctest::Approx(3.0).epsilon(1e-12));

  CHECK_THROWS_AS((void)compute_prototype(data, ae, {}), proce::UsageError);
  CHECK_THROWS_AS((void)compute_prototype(data, ae, {7}), proce::UsageError);
}

TEST_CASE("build_prototype_context wires neighbors and mean together") {
  const Autoencoder ae = identity_ae();
  const Dataset data = rows_at({{0.1, 0}, {0.5, 1}, {0.7, 1}, {5.0, 1}});
  const PrototypeContext ctx =
      build_prototype_context(data, ae, Instance{{0.0}}, 0, 1, 2);
  CHECK(ctx.neighbor_indices == std::vector<std::size_t>{1, 2});
  CHECK(ctx.proto[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(ctx.y_org == 0);
  CHECK(ctx.y_cf == 1);
  CHECK(ctx.k == 2);
  CHECK_THROWS_AS(
      (void)build_prototype_context(data, ae, Instance{{0.0}}, 1, 1, 2),
      proce::UsageError);
}

TEST_CASE("prediction loss is the cross-entropy of the target class") {
  // w = 0, b = 0 pins p = 1/2 regardless of input: loss ln 2 for either class.
  const Classifier half = linear_classifier(0.0, 0.0);
  CHECK(f_pred(half, Instance{{3.0}}, 1) == doctest::Approx(kLn2).epsilon(1e-12));
  CHECK(f_pred(half, Instance{{3.0}}, 0) == doctest::Approx(kLn2).epsilon(1e-12));

  // p = sigmoid(2): pushing toward class 1 costs -ln p, class 0 costs -ln(1-p).
  const Classifier tilted = linear_classifier(1.0, 0.0);
  const double p = 1.0 / (1.0 + std::exp(-2.0));
  CHECK(f_pred(tilted, Instance{{2.0}}, 1) ==
        doctest::Approx(-std::log(p)).epsilon(1e-12));
  CHECK(f_pred(tilted, Instance{{2.0}}, 0) ==
        doctest::Approx(-std::log(1.0 - p)).epsilon(1e-12));
}

TEST_CASE("latent-prototype and feature-space distances") {
  const Autoencoder ae = identity_ae();
  const FeatureSchema schema = scalar_schema();
  CHECK(f_proto(ae, schema, Instance{{2.0}}, {0.5}) ==
        doctest::Approx(2.25).epsilon(1e-12));
  CHECK(f_dist(ae, schema, Instance{{2.0}}, Instance{{-1.0}}) ==
        doctest::Approx(9.0).epsilon(1e-12));
  CHECK_THROWS_AS((void)f_proto(ae, schema, Instance{{2.0}}, {0.5, 0.5}),
                  proce::ShapeError);
}

TEST_CASE("evaluate_objectives composes the three parts") {
  const Autoencoder ae = identity_ae();
  const FeatureSchema schema = scalar_schema();
  const Classifier clf = linear_classifier(0.0, 0.0);
  StructuralModel scm;  // no equations: dist_final is the plain distance
  scm.graph.nodes = {"x"};
  const std::vector<double> proto = {1.0};
  const Instance x_org{{0.0}};

  EvalContext ctx;
  ctx.classifier = &clf;
  ctx.ae = &ae;
  ctx.scm = &scm;
  ctx.schema = &schema;
  ctx.proto = &proto;
  ctx.x_org = &x_org;
  ctx.y_cf = 1;

  const ObjectiveVector v = evaluate_objectives(ctx, Instance{{0.5}});
  CHECK(v.pred == doctest::Approx(kLn2).epsilon(1e-12));
  CHECK(v.proto == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(v.dist_final == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(v.as_array() == std::array<double, 3>{v.pred, v.proto, v.dist_final});

  EvalContext broken = ctx;
  broken.classifier = nullptr;
  CHECK_THROWS_AS((void)evaluate_objectives(broken, Instance{{0.5}}),
                  proce::UsageError);
  EvalContext bad_class = ctx;
  bad_class.y_cf = 2;
  CHECK_THROWS_AS((void)evaluate_objectives(bad_class, Instance{{0.5}}),
                  proce::UsageError);
}

}  // TEST_SUITE
