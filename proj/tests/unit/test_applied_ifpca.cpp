#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "rwclust/applied_ifpca.hpp"
#include "rwclust/clusterers.hpp"

using namespace rwclust;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = z(gen);
  return m;
}

// n samples, one third "AML" and the rest "ALL"; the AML rows are shifted on
// the first `strong` columns. Balanced classes would inflate the MAD of the
// informative columns and push their norms below the null level.
LabeledMatrix blobs(Eigen::Index n, Eigen::Index p, Eigen::Index strong, double shift, std::uint64_t seed) {
  LabeledMatrix d;
  d.X = gaussian(n, p, seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool a = (i * 7 + 3) % 3 == 0;
    d.class_labels.push_back(a ? "AML" : "ALL");
    if (a) d.X.row(i).head(strong).array() += shift;
  }
  for (Eigen::Index j = 0; j < p; ++j) d.feature_names.push_back("g" + std::to_string(j));
  return d;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

TEST_CASE("labels") {
  CHECK(encode_classes({"b", "a", "b"}) == Labels{1, -1, 1});
  LabeledMatrix d;
  d.X = Eigen::MatrixXd::Zero(3, 2);
  d.class_labels = {"x", "x", "x"};
  CHECK_THROWS_AS(validate(d), std::invalid_argument);
  d.class_labels = {"x", "y", "z"};
  CHECK_THROWS_AS(validate(d), std::invalid_argument);
  CHECK(clustering_errors(Labels{1, 1, -1, -1}, Labels{-1, -1, 1, -1}) == 1);
}

TEST_CASE("mad_normalize") {
  const Eigen::MatrixXd Z = gaussian(101, 4, 3);
  const Normalized a = mad_normalize(Z);

  SUBCASE("matches the displayed formula") {
    for (Eigen::Index j = 0; j < 4; ++j) {
      std::vector<double> col(Z.col(j).data(), Z.col(j).data() + 101);
      const double med = median(col);
      std::vector<double> dev;
      for (double v : col) dev.push_back(std::abs(v - med));
      const double mad = median(dev);
      const double mean = Z.col(j).mean();
      for (Eigen::Index i = 0; i < 101; ++i)
        CHECK(a.X(i, j) == doctest::Approx(0.6745 * (Z(i, j) - mean) / mad).epsilon(1e-12));
    }
  }

  SUBCASE("affine invariance") {
    Eigen::MatrixXd Y = Z;
    Y.col(0) = 2.0 * Y.col(0).array() + 5.0;
    Y.col(2) = 0.01 * Y.col(2).array() - 3.0;
    CHECK((mad_normalize(Y).X - a.X).cwiseAbs().maxCoeff() < 1e-9);
  }

  SUBCASE("gaussian columns have unit scale") {
    const Normalized big = mad_normalize(gaussian(20000, 3, 4));
    for (Eigen::Index j = 0; j < 3; ++j) CHECK(big.X.col(j).squaredNorm() / 20000 == doctest::Approx(1.0).epsilon(0.05));
  }

  SUBCASE("constant column is dropped") {
    Eigen::MatrixXd Y = Z;
    Y.col(1).setConstant(7.0);
    const Normalized n = mad_normalize(Y);
    CHECK(n.X.cols() == 3);
    CHECK(n.kept == IndexSet{0, 2, 3});
    CHECK(n.warnings.size() == 1);
  }
}

TEST_CASE("two-sided scores reduce to the one-sided ones") {
  const Eigen::MatrixXd X = gaussian(30, 200, 8);
  const Eigen::VectorXd one = chi2_scores(X);
  const Eigen::VectorXd two = two_sided_scores(X);
  for (Eigen::Index j = 0; j < one.size(); ++j) {
    if (one(j) >= 0) CHECK(two(j) == one(j));
    else CHECK(two(j) == -one(j));
  }
  const Eigen::VectorXd lit = two_sided_scores(X, true);
  CHECK(lit(0) == doctest::Approx(two(0) / std::sqrt(60.0)));
}

TEST_CASE("ifpca_pipeline") {
  const LabeledMatrix d = blobs(60, 500, 30, 5.0, 11);

  SUBCASE("separated classes are recovered") {
    for (const QMode& mode : {QMode{FixedQ{0.5}}, QMode{FdrLevel{0.05}}, QMode{TopK{30}}, QMode{AllFeatures{}}}) {
      const IfpcaReport r = ifpca_pipeline(d, mode);
      REQUIRE(r.rows.size() == 1);
      CHECK(r.rows[0].errors == 0);
      CHECK(r.n == 60);
    }
    CHECK(ifpca_pipeline(d, TopK{30}).rows[0].selected == 30);
    CHECK(ifpca_pipeline(d, AllFeatures{}).rows[0].selected == 500);
  }

  SUBCASE("sweep rows") {
    const IfpcaReport r = ifpca_pipeline(d, QSweep{0.2, 1.0, 0.2});
    CHECK(r.rows.size() == 5);
    for (std::size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i].selected <= r.rows[i - 1].selected);
    CHECK(to_json(r)["rows"].size() == 5);
  }

  SUBCASE("huge q falls back") {
    const IfpcaReport r = ifpca_pipeline(d, FixedQ{1e6});
    CHECK(r.rows[0].fallback);
  }

  SUBCASE("sample order does not matter") {
    LabeledMatrix s = d;
    std::vector<Eigen::Index> perm(60);
    for (Eigen::Index i = 0; i < 60; ++i) perm[static_cast<std::size_t>(i)] = (i * 37) % 60;
    for (Eigen::Index i = 0; i < 60; ++i) {
      s.X.row(i) = d.X.row(perm[static_cast<std::size_t>(i)]);
      s.class_labels[static_cast<std::size_t>(i)] = d.class_labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    }
    const LabeledMatrix weak = blobs(60, 500, 30, 0.7, 12);
    LabeledMatrix ws = weak;
    for (Eigen::Index i = 0; i < 60; ++i) {
      ws.X.row(i) = weak.X.row(perm[static_cast<std::size_t>(i)]);
      ws.class_labels[static_cast<std::size_t>(i)] = weak.class_labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    }
    for (const QMode& mode : {QMode{FixedQ{0.3}}, QMode{AllFeatures{}}}) {
      CHECK(ifpca_pipeline(s, mode).rows[0].errors == ifpca_pipeline(d, mode).rows[0].errors);
      CHECK(ifpca_pipeline(ws, mode).rows[0].errors == ifpca_pipeline(weak, mode).rows[0].errors);
    }
  }

  SUBCASE("synthetic data agrees with if_pca") {
    // ARW noise and signal with one third of the samples in the +1 class.
    // Each informative column is a two-point mixture, so the MAD rescaling
    // absorbs its variance excess and the normalized screen no longer sees it.
    // Only the screen-free mode is comparable with if_pca on the raw matrix.
    ArwParams pr;
    pr.p = 3000;
    pr.theta = 0.6;
    pr.beta = 0.5;
    pr.strength = PlainStrength{0.04};
    double sig = 0.0, nul = 0.0, sig_raw = 0.0;
    std::size_t ns = 0, nn = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Dataset ds = gen_dataset(pr, NoiseSpec::white(), seed, {true});
      const Eigen::VectorXd mu = gen_dataset(pr, NoiseSpec::white(), seed).mu.value();
      Labels l(ds.n());
      Eigen::VectorXd lv(static_cast<Eigen::Index>(ds.n()));
      LabeledMatrix w;
      for (std::size_t i = 0; i < l.size(); ++i) {
        l[i] = i % 3 == 0 ? 1 : -1;
        lv(static_cast<Eigen::Index>(i)) = l[i];
        w.class_labels.push_back(l[i] > 0 ? "b" : "a");
      }
      w.X = ds.X + lv * mu.transpose();
      const IfpcaReport r = ifpca_pipeline(w, AllFeatures{});
      const std::size_t direct = clustering_errors(if_pca(w.X, 0.5).labels, l);
      CAPTURE(seed);
      CAPTURE(direct);
      CHECK(std::abs(static_cast<long>(r.rows[0].errors) - static_cast<long>(direct)) <= 2);

      const Eigen::VectorXd raw = two_sided_scores(w.X);
      const Eigen::VectorXd norm = two_sided_scores(mad_normalize(w.X).X);
      for (Eigen::Index j = 0; j < mu.size(); ++j) {
        if (mu(j) != 0) {
          sig_raw += raw(j);
          sig += norm(j), ++ns;
        } else {
          nul += norm(j), ++nn;
        }
      }
    }
    CHECK(sig_raw / static_cast<double>(ns) > 3.0);
    CHECK(sig / static_cast<double>(ns) < nul / static_cast<double>(nn) + 0.2);
  }
}

TEST_CASE("baseline_kmeans") {
  const LabeledMatrix d = blobs(40, 20, 20, 5.0, 3);
  const BaselineResult b = baseline_kmeans(d.X, encode_classes(d.class_labels), 10, 1);
  CHECK(b.best_objective_errors == 0);
  CHECK(b.mean_errors == 0.0);

  Eigen::MatrixXd two(2, 3);
  two << 1, 2, 3, -4, 0, 9;
  CHECK(baseline_kmeans(two, Labels{-1, 1}, 3, 2).best_objective_errors == 0);
}

TEST_CASE("load_labeled_matrix") {
  const auto dir = std::filesystem::temp_directory_path() / "rwclust_applied_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream data(dir / "data.csv");
    data << "g1,g2,class\n1,2,AML\n3,4,ALL\n5,6.5,AML\n";
    std::ofstream plain(dir / "plain.csv");
    plain << "g1,g2\n1,2\n3,4\n5,6.5\n";
    std::ofstream labels(dir / "labels.txt");
    labels << "class\nAML\nALL\nAML\n";
    std::ofstream bad(dir / "bad.csv");
    bad << "g1,g2\n1,2\n3,x\n";
  }
  const LabeledMatrix a = load_labeled_matrix(dir / "data.csv", std::nullopt, std::string("class"));
  CHECK(a.X.rows() == 3);
  CHECK(a.X.cols() == 2);
  CHECK(a.X(2, 1) == 6.5);
  CHECK(a.feature_names == std::vector<std::string>{"g1", "g2"});
  const LabeledMatrix b = load_labeled_matrix(dir / "plain.csv", dir / "labels.txt", std::nullopt);
  CHECK(b.class_labels == a.class_labels);
  CHECK_THROWS(load_labeled_matrix(dir / "bad.csv", dir / "labels.txt", std::nullopt));
  CHECK_THROWS(load_labeled_matrix(dir / "plain.csv", std::nullopt, std::string("missing")));
  std::filesystem::remove_all(dir);
}
